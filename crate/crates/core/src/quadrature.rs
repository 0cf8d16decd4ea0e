//! Inner products of curves on arbitrary grids and linear interpolation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::{Curve, Grid};

/// Quadrature used to approximate `∫ f(t) g(t) dt` from grid values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum QuadratureRule {
    /// Composite trapezoid over the whole grid span.
    #[default]
    Trapezoid,
    /// Trapezoid that does not bridge gaps: any step longer than
    /// `gap_factor` times the median step splits the grid into separately
    /// integrated segments.
    SegmentedTrapezoid { gap_factor: f64 },
}

/// Gap threshold used for fragmented data.
pub const DEFAULT_GAP_FACTOR: f64 = 3.0;

impl QuadratureRule {
    pub fn segmented() -> Self {
        QuadratureRule::SegmentedTrapezoid {
            gap_factor: DEFAULT_GAP_FACTOR,
        }
    }

    /// Per-point weights `w` such that `∫ f g ≈ Σ w_k f_k g_k`.
    pub fn weights(&self, grid: &Grid) -> Vec<f64> {
        let t = grid.points();
        match *self {
            QuadratureRule::Trapezoid => trapezoid_weights(t),
            QuadratureRule::SegmentedTrapezoid { gap_factor } => {
                let mut w = vec![0.0; t.len()];
                for seg in segments(t, gap_factor) {
                    if seg.len() < 2 {
                        continue;
                    }
                    let sw = trapezoid_weights(&t[seg.clone()]);
                    for (k, v) in seg.zip(sw) {
                        w[k] = v;
                    }
                }
                w
            }
        }
    }
}

fn trapezoid_weights(t: &[f64]) -> Vec<f64> {
    let m = t.len();
    let mut w = vec![0.0; m];
    for k in 0..m.saturating_sub(1) {
        let half = 0.5 * (t[k + 1] - t[k]);
        w[k] += half;
        w[k + 1] += half;
    }
    w
}

/// Index ranges of the contiguous observed stretches of `t`.
///
/// A step is a gap when it exceeds `gap_factor` times the median step.
pub fn segments(t: &[f64], gap_factor: f64) -> Vec<std::ops::Range<usize>> {
    if t.len() < 2 {
        return std::iter::once(0..t.len()).collect();
    }
    let mut steps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let threshold = {
        let mut sorted = steps.clone();
        sorted.sort_by(f64::total_cmp);
        gap_factor * sorted[sorted.len() / 2]
    };
    let mut out = Vec::new();
    let mut start = 0;
    for (k, step) in steps.drain(..).enumerate() {
        if step > threshold {
            out.push(start..k + 1);
            start = k + 1;
        }
    }
    out.push(start..t.len());
    out
}

/// Trapezoid approximation of `∫ f g` over the shared grid span.
pub fn inner_product(f: &Curve, g: &Curve) -> Result<f64> {
    inner_product_with(f, g, QuadratureRule::Trapezoid)
}

pub fn inner_product_with(f: &Curve, g: &Curve, rule: QuadratureRule) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let w = rule.weights(f.grid());
    Ok(w
        .iter()
        .zip(f.values().iter().zip(g.values()))
        .map(|(w, (a, b))| w * (a * b))
        .sum())
}

/// Piecewise-linear interpolation of `direction` at the points of `target`.
pub fn interpolate_to(direction: &Curve, target: &Grid) -> Result<Curve> {
    let values = interpolate_values(direction.times(), direction.values(), target.points())?;
    Curve::new(target.clone(), values)
}

pub(crate) fn interpolate_values(src_t: &[f64], src_v: &[f64], at: &[f64]) -> Result<Vec<f64>> {
    at.iter()
        .map(|&x| {
            let (k, frac) = bracket(src_t, x)?;
            Ok(if frac == 0.0 {
                src_v[k]
            } else {
                src_v[k] + frac * (src_v[k + 1] - src_v[k])
            })
        })
        .collect()
}

/// Locates `x` in `t`: returns `(k, frac)` with `x = t[k] + frac (t[k+1] - t[k])`.
fn bracket(t: &[f64], x: f64) -> Result<(usize, f64)> {
    let (lo, hi) = (t[0], t[t.len() - 1]);
    if !(lo..=hi).contains(&x) {
        return Err(Error::Extrapolation(x));
    }
    let k = t.partition_point(|&s| s <= x).saturating_sub(1);
    if k + 1 >= t.len() || t[k] == x {
        return Ok((k.min(t.len() - 1), 0.0));
    }
    Ok((k, (x - t[k]) / (t[k + 1] - t[k])))
}

/// Linear map taking values on `source` to interpolated values at `target`.
///
/// Row `r` holds at most two non-zero weights.
pub(crate) fn interpolation_matrix(source: &Grid, target: &[f64]) -> Result<DMatrix<f64>> {
    let t = source.points();
    let mut out = DMatrix::zeros(target.len(), t.len());
    for (r, &x) in target.iter().enumerate() {
        let (k, frac) = bracket(t, x)?;
        out[(r, k)] += 1.0 - frac;
        if frac != 0.0 {
            out[(r, k + 1)] += frac;
        }
    }
    Ok(out)
}
