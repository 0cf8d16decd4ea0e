//! Static SVG rendering of clustered curves.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::quadrature::{segments, DEFAULT_GAP_FACTOR};
use crate::types::{FunctionalDataset, Partition, Regime};

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub stroke_width: f64,
    pub title: Option<String>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            width: 800.0,
            height: 500.0,
            margin: 40.0,
            stroke_width: 1.0,
            title: None,
        }
    }
}

/// One polyline per observed stretch of every curve, colored by cluster.
/// Fragmented curves are broken at their missing segments.
pub fn render_svg(data: &FunctionalDataset, partition: &Partition, opts: &PlotOptions) -> Result<String> {
    if partition.len() != data.len() {
        return Err(Error::LengthMismatch {
            expected: data.len(),
            got: partition.len(),
        });
    }
    let (lo, hi) = data
        .curves()
        .iter()
        .flat_map(|c| c.values().iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let m = opts.margin;
    let (pw, ph) = (opts.width - 2.0 * m, opts.height - 2.0 * m);
    let x = |t: f64| m + t * pw;
    let y = |v: f64| m + (hi - v) / span * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<rect x="{m}" y="{m}" width="{pw}" height="{ph}" fill="none" stroke="#444" stroke-width="0.5"/>"##
    );
    if let Some(title) = &opts.title {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            opts.width / 2.0,
            m / 2.0 + 5.0,
            escape(title)
        );
    }
    for (c, &label) in data.curves().iter().zip(partition.labels()) {
        let color = PALETTE[label % PALETTE.len()];
        let t = c.times();
        let pieces = match data.regime() {
            Regime::Fragmented => segments(t, DEFAULT_GAP_FACTOR),
            _ => std::iter::once(0..t.len()).collect(),
        };
        for r in pieces {
            let pts: Vec<String> = r
                .map(|i| format!("{:.2},{:.2}", x(t[i]), y(c.values()[i])))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="{}" stroke-opacity="0.7" points="{}"/>"#,
                opts.stroke_width,
                pts.join(" ")
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
