//! Population MADD from expected base distances, plus a small Monte-Carlo
//! estimate of `d*` for two Gaussian-process populations.
//!
//! ```text
//! cargo run --release --example population_madd
//! ```

use nalgebra::DMatrix;
use terp::sampler::sample_paths;
use terp::{base_distance, population_madd, Grid, PopulationSpec, ProjectionFamily, SeedSpec};

fn main() -> terp::Result<()> {
    let spec = PopulationSpec::new(vec![3, 3], DMatrix::from_row_slice(2, 2, &[0.2, 0.5, 0.5, 0.3]))?;
    println!("two populations, hand table: rho* = {:.4}", population_madd(&spec, 0, 1)?);

    // d*_{ab} for BB against BB + sqrt(t) under Brownian-motion projections
    let grid = Grid::uniform(100)?;
    let h = 1.0 / grid.len() as f64;
    let pairs = 500;
    let m = 100;
    let bb = |seed: SeedSpec| sample_paths(&ProjectionFamily::BrownianBridge, &grid, 1, &seed);
    let mut d = [[0.0; 2]; 2];
    for s in (0..pairs).map(|s| SeedSpec::with_path(3, &[s])) {
        let z = sample_paths(&ProjectionFamily::BrownianMotion, &grid, m, &s.child(0))?;
        let mut x = [bb(s.child(1))?, bb(s.child(2))?, bb(s.child(3))?, bb(s.child(4))?];
        for g in 0..grid.len() {
            let lift = grid.points()[g].sqrt();
            x[2][(g, 0)] += lift;
            x[3][(g, 0)] += lift;
        }
        let proj: Vec<Vec<f64>> = x.iter().map(|c| (c.transpose() * &z).iter().map(|v| v * h).collect()).collect();
        d[0][0] += base_distance(&proj[0], &proj[1])?;
        d[1][1] += base_distance(&proj[2], &proj[3])?;
        d[0][1] += base_distance(&proj[0], &proj[2])?;
    }
    let avg = |v: f64| v / pairs as f64;
    let table = DMatrix::from_row_slice(2, 2, &[avg(d[0][0]), avg(d[0][1]), avg(d[0][1]), avg(d[1][1])]);
    println!("d* estimate ({pairs} pairs, M = {m}):");
    println!("  aa {:.4}  ab {:.4}  bb {:.4}", table[(0, 0)], table[(0, 1)], table[(1, 1)]);
    let spec = PopulationSpec::new(vec![30, 30], table)?;
    println!("rho*(BB, BB + sqrt t) = {:.4}", population_madd(&spec, 0, 1)?);
    Ok(())
}
