//! Mean Absolute Difference of Distances.
//!
//! The base distance between two projected vectors is the average of
//! `1 - exp(-|v_q - w_q|)` over coordinates. MADD compares the distance
//! profiles of two rows against every other row of the dataset.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{DissimilarityMatrix, ProjectedMatrix};

/// `(1/M) Σ_q (1 - exp(-|v_q - w_q|))`, a value in `[0, 1)`.
pub fn base_distance(v: &[f64], w: &[f64]) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: v.len(),
            got: w.len(),
        });
    }
    if v.is_empty() {
        return Err(Error::Config("base distance needs at least one coordinate".into()));
    }
    Ok(raw_distance(v.iter().copied(), w.iter().copied(), v.len()))
}

#[inline]
fn raw_distance(v: impl Iterator<Item = f64>, w: impl Iterator<Item = f64>, m: usize) -> f64 {
    let s: f64 = v.zip(w).map(|(a, b)| -(-(a - b).abs()).exp_m1()).sum();
    s / m as f64
}

/// Pairwise base distances between the rows of `p`.
pub fn distance_matrix(p: &ProjectedMatrix) -> DMatrix<f64> {
    let n = p.rows();
    let m = p.cols();
    // row-major copy for contiguous access
    let rows: Vec<Vec<f64>> = (0..n).map(|i| p.matrix().row(i).iter().copied().collect()).collect();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| raw_distance(rows[i].iter().copied(), rows[j].iter().copied(), m))
                .collect()
        })
        .collect();
    let mut d = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// MADD dissimilarity matrix of the rows of `p`.
///
/// Entry `(i, j)` is the mean of `|d(i, u) - d(j, u)|` over the `n - 2`
/// rows `u` other than `i` and `j`.
pub fn madd_matrix(p: &ProjectedMatrix) -> Result<DissimilarityMatrix> {
    let n = p.rows();
    if n < 3 {
        return Err(Error::TooFewRows(n));
    }
    if p.cols() == 0 {
        return Err(Error::Config("projected matrix has no columns".into()));
    }
    madd_from_distances(&distance_matrix(p))
}

/// MADD from a precomputed base-distance matrix.
pub fn madd_from_distances(d: &DMatrix<f64>) -> Result<DissimilarityMatrix> {
    let n = d.nrows();
    if n < 3 {
        return Err(Error::TooFewRows(n));
    }
    let denom = (n - 2) as f64;
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let di = d.column(i);
            (i + 1..n)
                .map(|j| {
                    let dj = d.column(j);
                    let s: f64 = (0..n)
                        .filter(|&u| u != i && u != j)
                        .map(|u| (di[u] - dj[u]).abs())
                        .sum();
                    s / denom
                })
                .collect()
        })
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    DissimilarityMatrix::new(out)
}

/// Population layout behind the population-level MADD `ρ*`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    sizes: Vec<usize>,
    /// Expected base distances `d*_{ab}` between populations.
    dstar: DMatrix<f64>,
}

impl PopulationSpec {
    pub fn new(sizes: Vec<usize>, dstar: DMatrix<f64>) -> Result<Self> {
        let k = sizes.len();
        if k == 0 {
            return Err(Error::InvalidPopulation("no populations".into()));
        }
        if let Some(s) = sizes.iter().find(|&&s| s < 2) {
            return Err(Error::InvalidPopulation(format!(
                "population size {s} below 2"
            )));
        }
        if dstar.nrows() != k || dstar.ncols() != k {
            return Err(Error::InvalidPopulation(format!(
                "d* table must be {k} x {k}"
            )));
        }
        for a in 0..k {
            for b in 0..k {
                let v = dstar[(a, b)];
                if !(0.0..1.0).contains(&v) || v != dstar[(b, a)] {
                    return Err(Error::InvalidPopulation(format!(
                        "d*[{a},{b}] = {v} must be symmetric and in [0, 1)"
                    )));
                }
            }
        }
        Ok(PopulationSpec { sizes, dstar })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dstar(&self) -> &DMatrix<f64> {
        &self.dstar
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// Population MADD between populations `a` and `b`:
///
/// `ρ* = [(n_a-1)|d*_ab - d*_aa| + (n_b-1)|d*_ab - d*_bb| + Σ_{c≠a,b} n_c |d*_ac - d*_bc|] / (n-2)`.
pub fn population_madd(spec: &PopulationSpec, a: usize, b: usize) -> Result<f64> {
    let k = spec.sizes.len();
    if a == b {
        return Err(Error::InvalidPopulation("populations must differ".into()));
    }
    if a >= k || b >= k {
        return Err(Error::InvalidPopulation(format!(
            "population index out of range (K = {k})"
        )));
    }
    let n = spec.total();
    if n < 3 {
        return Err(Error::TooFewRows(n));
    }
    let d = &spec.dstar;
    let na = spec.sizes[a] as f64;
    let nb = spec.sizes[b] as f64;
    let mut s = (na - 1.0) * (d[(a, b)] - d[(a, a)]).abs() + (nb - 1.0) * (d[(a, b)] - d[(b, b)]).abs();
    for c in (0..k).filter(|&c| c != a && c != b) {
        s += spec.sizes[c] as f64 * (d[(a, c)] - d[(b, c)]).abs();
    }
    Ok(s / (n - 2) as f64)
}
