//! Clusters a fragmented sample and renders the curves as SVG, one color
//! per cluster.
//!
//! ```text
//! cargo run --release --example plot_clusters -- [out.svg]
//! ```

use std::fs;

use terp::plot::{render_svg, PlotOptions};
use terp::simgen::generate_fragmented;
use terp::{run_ensemble, EnsembleConfig, ModelSpec, SeedSpec};

fn main() -> terp::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "clusters.svg".into());
    let sample = generate_fragmented(&ModelSpec::new(1, vec![15, 15], SeedSpec::new(4)).with_mean_scale(5.0))?;
    let mut cfg = EnsembleConfig::new(2, SeedSpec::new(5));
    cfg.m_set = vec![50];
    let result = run_ensemble(&sample.dataset, &cfg)?;
    let opts = PlotOptions {
        title: Some(format!("{} M={} stage {}", result.selected_family, result.selected_m, result.selection.stage)),
        ..PlotOptions::default()
    };
    fs::write(&out, render_svg(&sample.dataset, &result.partition, &opts)?)?;
    println!("wrote {out}");
    Ok(())
}
