//! Choosing the number of clusters by sweeping `K` and keeping the
//! smallest final cost.
//!
//! ```text
//! cargo run --release --example k_sweep
//! ```

use terp::experiment::{ClusterCount, ExperimentConfig};
use terp::{run_experiment, Regime};

fn main() -> terp::Result<()> {
    let mut cfg = ExperimentConfig::model(9, vec![20, 20, 20], Regime::Regular);
    cfg.k = ClusterCount::Sweep(vec![2, 3, 4]);
    cfg.m_set = vec![10, 100];
    cfg.replicates = 3;
    cfg.seed = 17;
    let report = run_experiment(&cfg)?;
    for r in &report.replicates {
        let costs: Vec<String> = r.sweep.iter().map(|(k, c)| format!("K={k}: {c:.4}")).collect();
        println!(
            "replicate {}  [{}]  chose K={}  rand {:.3}",
            r.replicate + 1,
            costs.join(", "),
            r.k,
            r.rand_index.unwrap_or(f64::NAN)
        );
    }
    println!("(the normalized cost tends to shrink as K grows, so wide sweeps favour large K)");
    Ok(())
}
