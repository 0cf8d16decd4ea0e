//! Rand index and finite-difference derivative preprocessing.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::types::{Curve, FunctionalDataset, Partition, Regime};

fn pairs(n: u128) -> u128 {
    n * n.saturating_sub(1) / 2
}

/// Plain (unadjusted) Rand index: the fraction of item pairs on which the
/// two partitions agree.
pub fn rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Config("Rand index needs at least 2 items".into()));
    }
    let mut joint: HashMap<(usize, usize), u128> = HashMap::new();
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        *joint.entry((x, y)).or_default() += 1;
    }
    let same_a: u128 = a.sizes().iter().map(|&s| pairs(s as u128)).sum();
    let same_b: u128 = b.sizes().iter().map(|&s| pairs(s as u128)).sum();
    let same_both: u128 = joint.values().map(|&c| pairs(c)).sum();
    let total = pairs(n as u128);
    // pairs together in both + pairs apart in both
    let agree = total + 2 * same_both - same_a - same_b;
    Ok(agree as f64 / total as f64)
}

// derivative of the quadratic through three points, evaluated at x
fn lagrange3(t: [f64; 3], f: [f64; 3], x: f64, order: u8) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let denom = (t[i] - t[j]) * (t[i] - t[k]);
        let num = match order {
            1 => 2.0 * x - t[j] - t[k],
            _ => 2.0,
        };
        s += f[i] * num / denom;
    }
    s
}

/// First or second derivative by three-point finite differences: central
/// at interior points, one-sided at the two ends. The output shares the
/// input grid.
pub fn derivative(curve: &Curve, order: u8) -> Result<Curve> {
    if !(1..=2).contains(&order) {
        return Err(Error::Config(format!("derivative order must be 1 or 2, got {order}")));
    }
    let g = curve.len();
    if g < order as usize + 2 {
        return Err(Error::InvalidCurve(format!(
            "order-{order} derivative needs at least {} points, got {g}",
            order as usize + 2
        )));
    }
    let t = curve.times();
    let v = curve.values();
    let out = (0..g)
        .map(|i| {
            let c = i.clamp(1, g - 2);
            lagrange3(
                [t[c - 1], t[c], t[c + 1]],
                [v[c - 1], v[c], v[c + 1]],
                t[i],
                order,
            )
        })
        .collect();
    Curve::new(curve.grid().clone(), out)
}

/// Derivative of every curve of a regular dataset.
pub fn derivative_dataset(data: &FunctionalDataset, order: u8) -> Result<FunctionalDataset> {
    if data.regime() != Regime::Regular {
        return Err(Error::InvalidDataset(
            "derivative preprocessing needs regular data".into(),
        ));
    }
    let curves = data
        .curves()
        .iter()
        .map(|c| derivative(c, order))
        .collect::<Result<Vec<_>>>()?;
    FunctionalDataset::with_ids(data.ids().to_vec(), curves, Regime::Regular)
}
