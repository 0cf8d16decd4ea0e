//! Clustering curves observed on curve-specific random grids.
//!
//! ```text
//! cargo run --release --example cluster_irregular
//! ```

use terp::simgen::generate_irregular;
use terp::{rand_index, run_ensemble, EnsembleConfig, ModelSpec, SeedSpec};

fn main() -> terp::Result<()> {
    // mean separation amplified so the clusters are plain to see
    let spec = ModelSpec::new(5, vec![25, 25], SeedSpec::new(21)).with_mean_scale(4.0);
    let sample = generate_irregular(&spec)?;
    let sizes: Vec<usize> = sample.dataset.curves().iter().map(|c| c.len()).collect();
    println!(
        "{} curves, {} to {} points each, union grid {} points",
        sample.dataset.len(),
        sizes.iter().min().unwrap_or(&0),
        sizes.iter().max().unwrap_or(&0),
        sample.dataset.union_grid().len()
    );

    let mut cfg = EnsembleConfig::new(2, SeedSpec::new(22));
    cfg.m_set = vec![10, 100];
    let result = run_ensemble(&sample.dataset, &cfg)?;
    println!(
        "selected {} M={} stage {}  cost {:.4}  stage II skipped in {} of {}",
        result.selected_family,
        result.selected_m,
        result.selection.stage,
        result.cost,
        result.skipped_stage_two(),
        result.records.len()
    );
    println!("rand index {:.3}", rand_index(&sample.truth, &result.partition)?);
    Ok(())
}
