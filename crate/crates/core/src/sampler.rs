//! Gaussian projection directions.
//!
//! Six prespecified families (Brownian motion, Brownian bridge, and four
//! truncated Haar/Fourier expansions) plus the data-driven family given by
//! an estimated eigensystem, sampled through its Karhunen–Loève sum.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quadrature::{interpolation_matrix, QuadratureRule};
use crate::seed::SeedSpec;
use crate::types::{Curve, Grid};

pub const DEFAULT_J_MAX: usize = 4;
pub const DEFAULT_K_MAX: usize = 40;
pub const DEFAULT_ALPHA: f64 = 2.0;

/// Tolerance on negative eigenvalues before they are clipped to zero.
pub const EIGEN_CLIP_TOL: f64 = 1e-10;
/// Tolerance of the orthonormality check on eigenfunctions.
pub const ORTHONORMAL_TOL: f64 = 1e-6;

/// Covariance family of the projection directions.
#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionFamily {
    BrownianMotion,
    BrownianBridge,
    HaarPoly { alpha: f64, j_max: usize },
    HaarExp { j_max: usize },
    FourierPoly { alpha: f64, k_max: usize },
    FourierExp { k_max: usize },
    Estimated(Arc<EigenSystem>),
}

impl ProjectionFamily {
    /// The six families with their default truncation and decay parameters.
    pub fn defaults() -> Vec<ProjectionFamily> {
        vec![
            ProjectionFamily::BrownianMotion,
            ProjectionFamily::BrownianBridge,
            ProjectionFamily::HaarPoly {
                alpha: DEFAULT_ALPHA,
                j_max: DEFAULT_J_MAX,
            },
            ProjectionFamily::HaarExp { j_max: DEFAULT_J_MAX },
            ProjectionFamily::FourierPoly {
                alpha: DEFAULT_ALPHA,
                k_max: DEFAULT_K_MAX,
            },
            ProjectionFamily::FourierExp { k_max: DEFAULT_K_MAX },
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ProjectionFamily::HaarPoly { alpha, .. } | ProjectionFamily::FourierPoly { alpha, .. }
                if !(alpha > 0.0 && alpha.is_finite()) =>
            {
                Err(Error::Config(format!("alpha must be positive, got {alpha}")))
            }
            ProjectionFamily::FourierPoly { k_max: 0, .. } | ProjectionFamily::FourierExp { k_max: 0 } => {
                Err(Error::Config("K_max must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProjectionFamily::BrownianMotion => "bm",
            ProjectionFamily::BrownianBridge => "bb",
            ProjectionFamily::HaarPoly { .. } => "haar-poly",
            ProjectionFamily::HaarExp { .. } => "haar-exp",
            ProjectionFamily::FourierPoly { .. } => "fourier-poly",
            ProjectionFamily::FourierExp { .. } => "fourier-exp",
            ProjectionFamily::Estimated(_) => "estimated",
        }
    }

    /// Basis functions and their weights for the expansion families.
    fn expansion(&self) -> Option<Vec<(f64, BasisFn)>> {
        match *self {
            ProjectionFamily::HaarPoly { alpha, j_max } => Some(
                haar_indices(j_max)
                    .map(|(j, k)| (haar_poly_weight(j, k, alpha), BasisFn::Haar(j, k)))
                    .collect(),
            ),
            ProjectionFamily::HaarExp { j_max } => Some(
                haar_indices(j_max)
                    .map(|(j, k)| (haar_exp_weight(j, k), BasisFn::Haar(j, k)))
                    .collect(),
            ),
            ProjectionFamily::FourierPoly { alpha, k_max } => {
                Some(fourier_terms(k_max, |k| fourier_poly_weight(k, alpha)))
            }
            ProjectionFamily::FourierExp { k_max } => Some(fourier_terms(k_max, fourier_exp_weight)),
            _ => None,
        }
    }
}

impl fmt::Display for ProjectionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProjectionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let defaults = ProjectionFamily::defaults();
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        defaults
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown projection family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy)]
enum BasisFn {
    Haar(u32, u64),
    Sin(u64),
    Cos(u64),
}

impl BasisFn {
    fn eval(self, t: f64) -> f64 {
        match self {
            BasisFn::Haar(j, k) => haar_psi(j, k, t),
            BasisFn::Sin(k) => (2.0 * PI * k as f64 * t).sin(),
            BasisFn::Cos(k) => (2.0 * PI * k as f64 * t).cos(),
        }
    }
}

fn haar_indices(j_max: usize) -> impl Iterator<Item = (u32, u64)> {
    (0..=j_max as u32).flat_map(|j| (1..=1u64 << j).map(move |k| (j, k)))
}

// η_k (sine) is drawn before η̃_k (cosine) for every k.
fn fourier_terms(k_max: usize, weight: impl Fn(u64) -> f64) -> Vec<(f64, BasisFn)> {
    (1..=k_max as u64)
        .flat_map(|k| {
            let w = weight(k);
            [(w, BasisFn::Sin(k)), (w, BasisFn::Cos(k))]
        })
        .collect()
}

pub fn haar_poly_weight(j: u32, k: u64, alpha: f64) -> f64 {
    ((1u64 << j) as f64 + k as f64).powf(-alpha / 2.0)
}

pub fn haar_exp_weight(j: u32, k: u64) -> f64 {
    (-((1u64 << j) as f64 + (k * k) as f64) / 20000.0).exp()
}

pub fn fourier_poly_weight(k: u64, alpha: f64) -> f64 {
    (k as f64).powf(-alpha / 2.0)
}

pub fn fourier_exp_weight(k: u64) -> f64 {
    (-((k * k) as f64) / 20000.0).exp()
}

/// L²-normalized Haar wavelet `ψ_{j,k}`, `k = 1..=2^j`.
pub fn haar_psi(j: u32, k: u64, t: f64) -> f64 {
    let scale = (1u64 << j) as f64;
    let left = (k - 1) as f64 / scale;
    let mid = (k as f64 - 0.5) / scale;
    let right = k as f64 / scale;
    let amp = scale.sqrt();
    if (left..mid).contains(&t) {
        amp
    } else if (mid..right).contains(&t) {
        -amp
    } else {
        0.0
    }
}

/// Estimated eigenpairs on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    grid: Grid,
    eigenvalues: Vec<f64>,
    /// `G x J`, column `j` is `φ_j` on the grid.
    functions: DMatrix<f64>,
}

impl EigenSystem {
    /// Validates ordering and L²-orthonormality; clips tiny negative eigenvalues.
    pub fn new(grid: Grid, eigenvalues: Vec<f64>, functions: DMatrix<f64>) -> Result<Self> {
        if functions.nrows() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: functions.nrows(),
            });
        }
        if functions.ncols() != eigenvalues.len() {
            return Err(Error::LengthMismatch {
                expected: eigenvalues.len(),
                got: functions.ncols(),
            });
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Config("eigenvalues must be non-increasing".into()));
        }
        if let Some(&bad) = eigenvalues.iter().find(|&&l| l.is_nan() || l < -EIGEN_CLIP_TOL) {
            return Err(Error::Config(format!("negative eigenvalue {bad}")));
        }
        let eigenvalues = eigenvalues.into_iter().map(|l| l.max(0.0)).collect();
        let w = QuadratureRule::Trapezoid.weights(&grid);
        let j = functions.ncols();
        for a in 0..j {
            for b in 0..=a {
                let ip: f64 = (0..grid.len())
                    .map(|g| w[g] * functions[(g, a)] * functions[(g, b)])
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                if (ip - target).abs() > ORTHONORMAL_TOL {
                    return Err(Error::Config(format!(
                        "eigenfunctions {a} and {b} not orthonormal (inner product {ip})"
                    )));
                }
            }
        }
        Ok(EigenSystem {
            grid,
            eigenvalues,
            functions,
        })
    }

    /// Builds from eigenfunction curves that all live on `grid`.
    pub fn from_curves(grid: Grid, eigenvalues: Vec<f64>, functions: &[Curve]) -> Result<Self> {
        if functions.iter().any(|c| c.grid() != &grid) {
            return Err(Error::GridMismatch);
        }
        let m = DMatrix::from_fn(grid.len(), functions.len(), |g, j| functions[j].values()[g]);
        EigenSystem::new(grid, eigenvalues, m)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn functions(&self) -> &DMatrix<f64> {
        &self.functions
    }

    pub fn eigenfunction(&self, j: usize) -> Curve {
        Curve::new(self.grid.clone(), self.functions.column(j).iter().copied().collect())
            .expect("eigenfunction values are finite")
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// No strictly positive eigenvalue.
    pub fn is_degenerate(&self) -> bool {
        self.eigenvalues.iter().all(|&l| l <= 0.0)
    }
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Brownian motion at `times` (sorted, non-negative) by exact increments.
fn brownian_motion(times: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut prev_t = 0.0;
    let mut level = 0.0;
    for &t in times {
        level += (t - prev_t).sqrt() * standard_normal(rng);
        out.push(level);
        prev_t = t;
    }
    out
}

fn brownian_bridge(times: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let mut ext = times.to_vec();
    let has_one = ext.last() == Some(&1.0);
    if !has_one {
        ext.push(1.0);
    }
    let path = brownian_motion(&ext, rng);
    let end = path[path.len() - 1];
    times.iter().zip(&path).map(|(&t, &w)| w - t * end).collect()
}

/// Draws one direction as a column of `G` values on `times`.
fn draw_values(family: &ProjectionFamily, times: &[f64], seed: &SeedSpec) -> Result<Vec<f64>> {
    let mut rng = seed.rng();
    match family {
        ProjectionFamily::BrownianMotion => Ok(brownian_motion(times, &mut rng)),
        ProjectionFamily::BrownianBridge => Ok(brownian_bridge(times, &mut rng)),
        ProjectionFamily::Estimated(system) => {
            let coef = kl_coefficients(system, &mut rng)?;
            let on_own = system.functions() * coef;
            let l = interpolation_matrix(system.grid(), times)?;
            Ok((l * on_own).iter().copied().collect())
        }
        family => {
            let terms = family.expansion().expect("expansion family");
            let coef: Vec<f64> = terms.iter().map(|(w, _)| w * standard_normal(&mut rng)).collect();
            Ok(times
                .iter()
                .map(|&t| terms.iter().zip(&coef).map(|((_, b), c)| c * b.eval(t)).sum())
                .collect())
        }
    }
}

fn kl_coefficients(system: &EigenSystem, rng: &mut impl Rng) -> Result<nalgebra::DVector<f64>> {
    if system.is_degenerate() {
        return Err(Error::DegenerateCovariance);
    }
    Ok(nalgebra::DVector::from_iterator(
        system.len(),
        system
            .eigenvalues()
            .iter()
            .map(|l| l.sqrt() * standard_normal(rng)),
    ))
}

/// One realization of `family` evaluated at the points of `grid`.
pub fn sample_path(family: &ProjectionFamily, grid: &Grid, seed: &SeedSpec) -> Result<Curve> {
    family.validate()?;
    Curve::new(grid.clone(), draw_values(family, grid.points(), seed)?)
}

/// `count` independent directions on `grid` as a `G x count` matrix.
///
/// Column `q` is the path drawn from `seed.child(q)`, so it equals
/// `sample_path(family, grid, &seed.child(q))` up to floating-point
/// summation order.
pub fn sample_paths(
    family: &ProjectionFamily,
    grid: &Grid,
    count: usize,
    seed: &SeedSpec,
) -> Result<DMatrix<f64>> {
    family.validate()?;
    let times = grid.points();
    match family {
        ProjectionFamily::BrownianMotion | ProjectionFamily::BrownianBridge => {
            let mut out = DMatrix::zeros(times.len(), count);
            for q in 0..count {
                let col = draw_values(family, times, &seed.child(q as u64))?;
                out.column_mut(q).copy_from_slice(&col);
            }
            Ok(out)
        }
        ProjectionFamily::Estimated(system) => {
            let paths = sample_kl_matrix(system, count, seed)?;
            Ok(interpolation_matrix(system.grid(), times)? * paths)
        }
        family => {
            let terms = family.expansion().expect("expansion family");
            let basis = DMatrix::from_fn(times.len(), terms.len(), |g, b| terms[b].1.eval(times[g]));
            let mut coef = DMatrix::zeros(terms.len(), count);
            for q in 0..count {
                let mut rng = seed.child(q as u64).rng();
                for (b, (w, _)) in terms.iter().enumerate() {
                    coef[(b, q)] = w * standard_normal(&mut rng);
                }
            }
            Ok(basis * coef)
        }
    }
}

/// `count` i.i.d. Karhunen–Loève paths `Σ_j √λ_j ξ_jq φ_j` on the system grid.
pub fn sample_kl(system: &EigenSystem, count: usize, seed: &SeedSpec) -> Result<Vec<Curve>> {
    let m = sample_kl_matrix(system, count, seed)?;
    m.column_iter()
        .map(|c| Curve::new(system.grid().clone(), c.iter().copied().collect()))
        .collect()
}

/// Matrix form of [`sample_kl`]: `G x count`.
pub fn sample_kl_matrix(system: &EigenSystem, count: usize, seed: &SeedSpec) -> Result<DMatrix<f64>> {
    if count == 0 {
        return Err(Error::Config("need at least one direction".into()));
    }
    let mut coef = DMatrix::zeros(system.len(), count);
    for q in 0..count {
        let c = kl_coefficients(system, &mut seed.child(q as u64).rng())?;
        coef.set_column(q, &c);
    }
    Ok(system.functions() * coef)
}
