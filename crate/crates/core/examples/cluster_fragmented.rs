//! Clustering fragmented curves: each curve loses a random subset of the
//! ten equal segments of `[0, 1]`.
//!
//! ```text
//! cargo run --release --example cluster_fragmented
//! ```

use terp::quadrature::{segments, DEFAULT_GAP_FACTOR};
use terp::simgen::generate_fragmented;
use terp::{rand_index, run_ensemble, EnsembleConfig, ModelSpec, SeedSpec};

fn main() -> terp::Result<()> {
    let spec = ModelSpec::new(7, vec![20, 20, 20], SeedSpec::new(31)).with_mean_scale(4.0);
    let sample = generate_fragmented(&spec)?;
    let pieces: usize = sample
        .dataset
        .curves()
        .iter()
        .map(|c| segments(c.times(), DEFAULT_GAP_FACTOR).len())
        .sum();
    println!(
        "{} curves in {} observed stretches",
        sample.dataset.len(),
        pieces
    );

    let mut cfg = EnsembleConfig::new(3, SeedSpec::new(32));
    cfg.m_set = vec![10, 100];
    let result = run_ensemble(&sample.dataset, &cfg)?;
    println!(
        "selected {} M={} stage {}  cost {:.4}",
        result.selected_family, result.selected_m, result.selection.stage, result.cost
    );
    println!("rand index {:.3}", rand_index(&sample.truth, &result.partition)?);
    Ok(())
}
