//! Full ensemble on a regular sample, with the per-combination cost table.
//!
//! ```text
//! cargo run --release --example cluster_regular -- [model] [seed]
//! ```

use terp::simgen::population_count;
use terp::{generate_model, rand_index, run_ensemble, EnsembleConfig, ModelSpec, SeedSpec};

fn main() -> terp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let model: usize = args.first().map_or(1, |s| s.parse().expect("model id"));
    let seed: u64 = args.get(1).map_or(7, |s| s.parse().expect("seed"));
    let k = population_count(model)?;

    let sample = generate_model(&ModelSpec::new(model, vec![30; k], SeedSpec::new(seed)))?;
    let result = run_ensemble(&sample.dataset, &EnsembleConfig::new(k, SeedSpec::new(seed + 1)))?;

    println!("{:<13} {:>5} {:>9} {:>9} {:>7}", "family", "M", "stage I", "stage II", "rand");
    for r in &result.records {
        let c2 = r.stage2.cost().map_or("skipped".to_string(), |c| format!("{c:.4}"));
        let best = r.stage2.result().filter(|s| s.cost < r.stage1.cost).map_or(&r.stage1.partition, |s| &s.partition);
        println!(
            "{:<13} {:>5} {:>9.4} {:>9} {:>7.3}",
            r.family,
            r.m,
            r.stage1.cost,
            c2,
            rand_index(&sample.truth, best)?
        );
    }
    println!(
        "\nselected {} M={} stage {}  cost {:.4}  rand {:.3}",
        result.selected_family,
        result.selected_m,
        result.selection.stage,
        result.cost,
        rand_index(&sample.truth, &result.partition)?
    );
    Ok(())
}
