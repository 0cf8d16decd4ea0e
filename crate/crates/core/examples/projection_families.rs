//! Draws directions from each Gaussian-process family and reports simple
//! path statistics.
//!
//! ```text
//! cargo run --release --example projection_families
//! ```

use terp::sampler::sample_paths;
use terp::{Grid, ProjectionFamily, SeedSpec};

fn main() -> terp::Result<()> {
    let grid = Grid::uniform(101)?;
    let paths = 2000;
    let mid = 50;
    println!("{:<13} {:>10} {:>10} {:>10}", "family", "var(0.5)", "var(1)", "mean |Z|");
    for (l, family) in ProjectionFamily::defaults().iter().enumerate() {
        let z = sample_paths(family, &grid, paths, &SeedSpec::with_path(11, &[l as u64]))?;
        let var_at = |g: usize| z.row(g).iter().map(|v| v * v).sum::<f64>() / paths as f64;
        let mean_abs = z.iter().map(|v| v.abs()).sum::<f64>() / z.len() as f64;
        println!(
            "{:<13} {:>10.4} {:>10.4} {:>10.4}",
            family.name(),
            var_at(mid),
            var_at(grid.len() - 1),
            mean_abs
        );
    }
    println!("(Brownian motion has var(t) = t; the bridge is pinned at 0 and 1.)");
    Ok(())
}
