//! Cluster-wise centering, pooled covariance and its eigenpairs.
//!
//! Regular data use the empirical covariance on the common grid. Irregular
//! and fragmented data use Nadaraya–Watson smoothing: cluster means from the
//! pooled `(t, x)` points, and the covariance surface from off-diagonal raw
//! cross-products of the centered curves.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{interpolate_values, QuadratureRule};
use crate::sampler::EigenSystem;
use crate::types::{Curve, FunctionalDataset, Grid, Partition, Regime};

pub const DEFAULT_VARIANCE_CUTOFF: f64 = 0.99;
pub const DEFAULT_OUTPUT_GRID: usize = 101;

/// Eigenvalues below this fraction of the mean squared curve norm are noise.
const RELATIVE_EIGEN_FLOOR: f64 = 1e-12;
/// Kernel mass below which an output point counts as having an empty window.
const MIN_KERNEL_MASS: f64 = 1e-8;

/// One mean curve per cluster, all on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMeans {
    grid: Grid,
    means: Vec<Curve>,
}

impl ClusterMeans {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn means(&self) -> &[Curve] {
        &self.means
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// `1.06 σ_t m^{-1/5}` from the pooled observation times.
    Auto,
    Fixed(f64),
}

impl Bandwidth {
    fn resolve(self, times: &[f64]) -> Result<f64> {
        match self {
            Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => Ok(h),
            Bandwidth::Fixed(h) => Err(Error::Config(format!("bandwidth must be positive, got {h}"))),
            Bandwidth::Auto => {
                let m = times.len() as f64;
                let mean = times.iter().sum::<f64>() / m;
                let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
                let h = 1.06 * var.sqrt() * m.powf(-0.2);
                if h > 0.0 {
                    Ok(h)
                } else {
                    Err(Error::BandwidthTooSmall(mean))
                }
            }
        }
    }
}

/// Smoothing knobs for the irregular path.
#[derive(Debug, Clone, PartialEq)]
pub struct SmootherConfig {
    pub grid_size: usize,
    pub mean_bandwidth: Bandwidth,
    pub cov_bandwidth: Bandwidth,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        SmootherConfig {
            grid_size: DEFAULT_OUTPUT_GRID,
            mean_bandwidth: Bandwidth::Auto,
            cov_bandwidth: Bandwidth::Auto,
        }
    }
}

fn check_clusters(s: &Partition, n: usize) -> Result<Vec<Vec<usize>>> {
    if s.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: s.len(),
        });
    }
    let members = s.members();
    if let Some((c, m)) = members.iter().enumerate().find(|(_, m)| m.len() < 2) {
        return Err(Error::ClusterTooSmall {
            cluster: c,
            size: m.len(),
        });
    }
    Ok(members)
}

fn mean_sq_norm(data: &FunctionalDataset, rule: QuadratureRule) -> f64 {
    let total: f64 = data
        .curves()
        .iter()
        .map(|c| {
            let w = rule.weights(c.grid());
            c.values().iter().zip(&w).map(|(v, w)| w * v * v).sum::<f64>()
        })
        .sum();
    total / data.len() as f64
}

/// Eigenpairs of the covariance kernel `cov` sampled on `grid`.
///
/// Solves the symmetrized quadrature-weighted problem so that the returned
/// eigenfunctions are orthonormal in L². Eigenvalues at or below `floor`
/// are clipped to zero, and the smallest leading set reaching
/// `variance_cutoff` of the total is kept.
pub fn eigen_decompose(grid: &Grid, cov: &DMatrix<f64>, variance_cutoff: f64, floor: f64) -> Result<EigenSystem> {
    if !(variance_cutoff > 0.0 && variance_cutoff <= 1.0) {
        return Err(Error::Config(format!(
            "variance cutoff must lie in (0, 1], got {variance_cutoff}"
        )));
    }
    let g = grid.len();
    let w = QuadratureRule::Trapezoid.weights(grid);
    let root: Vec<f64> = w.iter().map(|w| w.sqrt()).collect();
    let mut a = DMatrix::from_fn(g, g, |r, c| root[r] * 0.5 * (cov[(r, c)] + cov[(c, r)]) * root[c]);
    // exact symmetry for the solver
    for r in 0..g {
        for c in 0..r {
            a[(r, c)] = a[(c, r)];
        }
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..g).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let clipped: Vec<f64> = order
        .iter()
        .map(|&i| {
            let l = eig.eigenvalues[i];
            if l > floor {
                l
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = clipped.iter().sum();
    let keep = if total <= 0.0 {
        1
    } else {
        let mut acc = 0.0;
        let mut j = 0;
        while j < g {
            acc += clipped[j];
            j += 1;
            if acc >= variance_cutoff * total * (1.0 - 1e-12) {
                break;
            }
        }
        j
    };
    let functions = DMatrix::from_fn(g, keep, |r, c| eig.eigenvectors[(r, order[c])] / root[r]);
    EigenSystem::new(grid.clone(), clipped[..keep].to_vec(), functions)
}

/// Pooled eigenpairs for regular data on the common grid.
pub fn pooled_eigenpairs_regular(
    data: &FunctionalDataset,
    s: &Partition,
    variance_cutoff: f64,
) -> Result<(ClusterMeans, EigenSystem)> {
    let grid = data
        .common_grid()
        .ok_or_else(|| Error::InvalidDataset("regular path needs a regular dataset".into()))?
        .clone();
    let members = check_clusters(s, data.len())?;
    let g = grid.len();
    let means: Vec<Vec<f64>> = members
        .iter()
        .map(|idx| {
            let mut m = vec![0.0; g];
            for &i in idx {
                for (acc, v) in m.iter_mut().zip(data.curves()[i].values()) {
                    *acc += v;
                }
            }
            let c = idx.len() as f64;
            m.iter_mut().for_each(|v| *v /= c);
            m
        })
        .collect();
    let labels = s.labels();
    let resid = DMatrix::from_fn(data.len(), g, |i, t| data.curves()[i].values()[t] - means[labels[i]][t]);
    let cov = resid.transpose() * &resid / data.len() as f64;
    let floor = RELATIVE_EIGEN_FLOOR * mean_sq_norm(data, QuadratureRule::Trapezoid);
    let system = eigen_decompose(&grid, &cov, variance_cutoff, floor)?;
    let means = means
        .into_iter()
        .map(|m| Curve::new(grid.clone(), m))
        .collect::<Result<Vec<_>>>()?;
    Ok((ClusterMeans { grid, means }, system))
}

#[inline]
fn gauss(u: f64) -> f64 {
    (-0.5 * u * u).exp()
}

fn check_coverage(times: &[f64], grid: &Grid) -> Result<()> {
    let step = grid.points()[1] - grid.points()[0];
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    for &s in grid.points() {
        let k = sorted.partition_point(|&t| t < s);
        let near = [k.checked_sub(1), Some(k)]
            .into_iter()
            .flatten()
            .filter_map(|i| sorted.get(i))
            .map(|t| (t - s).abs())
            .fold(f64::INFINITY, f64::min);
        if near > step * (1.0 + 1e-9) {
            return Err(Error::DomainNotCovered(s));
        }
    }
    Ok(())
}

/// Nadaraya–Watson estimate at every point of `out` from scattered `(t, y)`.
fn smooth_curve(times: &[f64], values: &[f64], out: &Grid, h: f64) -> Result<Vec<f64>> {
    out.points()
        .iter()
        .map(|&s| {
            let (mut num, mut den) = (0.0, 0.0);
            for (&t, &y) in times.iter().zip(values) {
                let k = gauss((s - t) / h);
                num += k * y;
                den += k;
            }
            if den < MIN_KERNEL_MASS {
                return Err(Error::BandwidthTooSmall(s));
            }
            Ok(num / den)
        })
        .collect()
}

/// Pooled eigenpairs for irregular or fragmented data via kernel smoothing.
pub fn pooled_eigenpairs_irregular(
    data: &FunctionalDataset,
    s: &Partition,
    cfg: &SmootherConfig,
    variance_cutoff: f64,
) -> Result<(ClusterMeans, EigenSystem)> {
    let members = check_clusters(s, data.len())?;
    if cfg.grid_size < 2 {
        return Err(Error::Config("output grid needs at least 2 points".into()));
    }
    let out = Grid::uniform(cfg.grid_size)?;
    let pooled: Vec<f64> = data.curves().iter().flat_map(|c| c.times().iter().copied()).collect();
    check_coverage(&pooled, &out)?;

    let means: Vec<Vec<f64>> = members
        .par_iter()
        .map(|idx| {
            let (t, y): (Vec<f64>, Vec<f64>) = idx
                .iter()
                .flat_map(|&i| {
                    let c = &data.curves()[i];
                    c.times().iter().copied().zip(c.values().iter().copied())
                })
                .unzip();
            let h = cfg.mean_bandwidth.resolve(&t)?;
            smooth_curve(&t, &y, &out, h)
        })
        .collect::<Result<_>>()?;

    let labels = s.labels();
    let residuals: Vec<Vec<f64>> = data
        .curves()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mu = interpolate_values(out.points(), &means[labels[i]], c.times())?;
            Ok(c.values().iter().zip(mu).map(|(x, m)| x - m).collect())
        })
        .collect::<Result<_>>()?;

    let h = cfg.cov_bandwidth.resolve(&pooled)?;
    let g = out.len();
    let (num, den) = data
        .curves()
        .par_iter()
        .zip(residuals.par_iter())
        .map(|(c, r)| {
            // kernel weights of every observation at every output point
            let b = DMatrix::from_fn(g, c.len(), |s, j| gauss((out.points()[s] - c.times()[j]) / h));
            let x = DVector::from_column_slice(r);
            let a = &b * &x;
            let ones = b.column_sum();
            let bx2 = DMatrix::from_fn(g, c.len(), |s, j| b[(s, j)] * r[j] * r[j]);
            let num = &a * a.transpose() - &bx2 * b.transpose();
            let den = &ones * ones.transpose() - &b * b.transpose();
            (num, den)
        })
        .reduce(
            || (DMatrix::zeros(g, g), DMatrix::zeros(g, g)),
            |(n1, d1), (n2, d2)| (n1 + n2, d1 + d2),
        );
    let mut cov = DMatrix::zeros(g, g);
    for r in 0..g {
        for c in 0..g {
            if den[(r, c)] < MIN_KERNEL_MASS {
                return Err(Error::BandwidthTooSmall(out.points()[r]));
            }
            cov[(r, c)] = num[(r, c)] / den[(r, c)];
        }
    }
    let floor = RELATIVE_EIGEN_FLOOR * mean_sq_norm(data, QuadratureRule::Trapezoid);
    let system = eigen_decompose(&out, &cov, variance_cutoff, floor)?;
    let means = means
        .into_iter()
        .map(|m| Curve::new(out.clone(), m))
        .collect::<Result<Vec<_>>>()?;
    Ok((ClusterMeans { grid: out, means }, system))
}

/// Dispatches on the dataset regime.
pub fn pooled_eigenpairs(
    data: &FunctionalDataset,
    s: &Partition,
    cfg: &SmootherConfig,
    variance_cutoff: f64,
) -> Result<(ClusterMeans, EigenSystem)> {
    match data.regime() {
        Regime::Regular => pooled_eigenpairs_regular(data, s, variance_cutoff),
        Regime::Irregular | Regime::Fragmented => pooled_eigenpairs_irregular(data, s, cfg, variance_cutoff),
    }
}
