//! Generates every simulation model in every observation regime and writes
//! the samples as CSV files.
//!
//! ```text
//! cargo run --release --example simulate_models -- [out_dir]
//! ```

use std::fs;
use std::path::PathBuf;

use terp::io::{write_dataset, write_labels};
use terp::simgen::{generate, population_count};
use terp::{Regime, SeedSpec};

fn main() -> terp::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/simulated".into()));
    fs::create_dir_all(&out)?;
    for model in 1..=10 {
        let sizes = vec![30; population_count(model)?];
        for regime in [Regime::Regular, Regime::Irregular, Regime::Fragmented] {
            let sample = generate(model, sizes.clone(), regime, &SeedSpec::with_path(99, &[model as u64]))?;
            let stem = format!("model{model:02}_{}", regime.name());
            write_dataset(&sample.dataset, &out.join(format!("{stem}.csv")))?;
            let mut buf = Vec::new();
            write_labels(sample.dataset.ids(), &sample.truth, &mut buf)?;
            fs::write(out.join(format!("{stem}_truth.csv")), buf)?;
            let points: usize = sample.dataset.curves().iter().map(|c| c.len()).sum();
            println!("{stem:<24} {:>3} curves {:>6} points", sample.dataset.len(), points);
        }
    }
    println!("written to {}", out.display());
    Ok(())
}
