//! Monte-Carlo replicates of one simulation model.
//!
//! ```text
//! cargo run --release --example benchmark -- [model] [regime] [replicates] [seed] [sqrt-theta|theta]
//! cargo run --release --example benchmark -- 9 regular 20 1 theta
//! ```

use std::time::Instant;

use terp::experiment::ExperimentConfig;
use terp::simgen::{population_count, CoefficientScale};
use terp::{run_experiment, Regime};

fn main() -> terp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let model: usize = args.first().map_or(Ok(1), |s| s.parse()).expect("model id");
    let regime: Regime = args.get(1).map_or(Ok(Regime::Regular), |s| s.parse())?;
    let reps: usize = args.get(2).map_or(Ok(5), |s| s.parse()).expect("replicate count");
    let seed: u64 = args.get(3).map_or(Ok(2024), |s| s.parse()).expect("seed");
    let scale: CoefficientScale = args.get(4).map_or(Ok(CoefficientScale::SqrtTheta), |s| s.parse())?;

    let sizes = vec![30; population_count(model)?];
    let mut cfg = ExperimentConfig::model(model, sizes, regime);
    cfg.replicates = reps;
    cfg.seed = seed;
    cfg.coefficient_scale = scale;

    let start = Instant::now();
    let report = run_experiment(&cfg)?;
    for r in &report.replicates {
        println!(
            "rep {:>3}  rand {:.3}  {:<13} M={:<5} stage {}  cost {:.5}",
            r.replicate + 1,
            r.rand_index.unwrap_or(f64::NAN),
            r.family,
            r.m,
            r.stage,
            r.final_cost
        );
    }
    print!("{}", report.summary_text());
    println!("stage-2 share {:.2}", report.stage_two_share());
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
