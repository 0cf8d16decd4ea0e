//! Two-stage ensemble clustering of functional data with Gaussian-process
//! random projections and the MADD dissimilarity.
//!
//! Curves are projected on random directions drawn from several Gaussian
//! processes, compared with MADD and clustered by minimizing a normalized
//! within-cluster cost. A second stage re-projects on directions drawn from
//! the covariance estimated within the first-stage clusters. The best
//! `(family, M, stage)` combination is kept. Regular, irregular and
//! fragmented observation grids are supported.
//!
//! ```no_run
//! use terp::{generate_model, run_ensemble, rand_index, EnsembleConfig, ModelSpec, SeedSpec};
//!
//! let sample = generate_model(&ModelSpec::new(1, vec![30, 30], SeedSpec::new(7)))?;
//! let result = run_ensemble(&sample.dataset, &EnsembleConfig::new(2, SeedSpec::new(8)))?;
//! println!("rand index {:.3}", rand_index(&sample.truth, &result.partition)?);
//! # Ok::<(), terp::Error>(())
//! ```

pub mod covariance;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod io;
pub mod madd;
pub mod optimizer;
pub mod pipeline;
pub mod plot;
pub mod quadrature;
pub mod sampler;
pub mod seed;
pub mod simgen;
pub mod types;

pub use covariance::{pooled_eigenpairs, Bandwidth, ClusterMeans, SmootherConfig};
pub use error::{Error, Result};
pub use eval::{derivative, rand_index};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport};
pub use madd::{base_distance, madd_matrix, population_madd, PopulationSpec};
pub use optimizer::{normalized_cost, optimize, OptimizerConfig, Optimum};
pub use pipeline::{run_ensemble, stage_one, stage_two, EnsembleConfig, EnsembleResult, Stage, StageTwo};
pub use quadrature::{inner_product, interpolate_to, QuadratureRule};
pub use sampler::{sample_kl, sample_path, sample_paths, EigenSystem, ProjectionFamily};
pub use seed::SeedSpec;
pub use simgen::{fragment, generate, generate_model, irregularize, LabeledDataset, ModelSpec};
pub use types::{
    build_dataset, partition_from_labels, Curve, DissimilarityMatrix, FunctionalDataset, Grid, Partition,
    ProjectedMatrix, Record, Regime,
};
