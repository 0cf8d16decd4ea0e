//! Labeled synthetic datasets (Models 1–10) and the irregular and
//! fragmented observation schemes.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seed::SeedSpec;
use crate::types::{Curve, FunctionalDataset, Grid, Partition, Regime};

/// Number of terms in the truncated expansions.
pub const EXPANSION_TERMS: usize = 40;
pub const DEFAULT_GRID_SIZE: usize = 100;
pub const FINE_GRID_SIZE: usize = 1000;
pub const DEFAULT_KEEP: usize = 100;
pub const DEFAULT_SEGMENTS: usize = 10;

/// Standard deviation of the `j`-th expansion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientScale {
    /// `√θ_j Z_j`, so `θ_j` is the eigenvalue.
    #[default]
    SqrtTheta,
    /// `θ_j Z_j`, so `θ_j²` is the eigenvalue.
    Theta,
}

impl CoefficientScale {
    fn sd(self, theta: f64) -> f64 {
        match self {
            CoefficientScale::SqrtTheta => theta.sqrt(),
            CoefficientScale::Theta => theta,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CoefficientScale::SqrtTheta => "sqrt-theta",
            CoefficientScale::Theta => "theta",
        }
    }
}

impl std::str::FromStr for CoefficientScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt-theta" => Ok(CoefficientScale::SqrtTheta),
            "theta" => Ok(CoefficientScale::Theta),
            other => Err(Error::Config(format!("unknown coefficient scale `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub model: usize,
    pub sizes: Vec<usize>,
    pub grid: Grid,
    pub seed: SeedSpec,
    /// Multiplier on the population mean differences (1 = as specified).
    pub mean_scale: f64,
    pub coefficient_scale: CoefficientScale,
}

impl ModelSpec {
    /// Model on the default 100-point equi-spaced grid.
    pub fn new(model: usize, sizes: Vec<usize>, seed: SeedSpec) -> Self {
        ModelSpec {
            model,
            sizes,
            grid: Grid::uniform(DEFAULT_GRID_SIZE).expect("valid default grid"),
            seed,
            mean_scale: 1.0,
            coefficient_scale: CoefficientScale::SqrtTheta,
        }
    }

    pub fn on_grid(mut self, grid: Grid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_mean_scale(mut self, scale: f64) -> Self {
        self.mean_scale = scale;
        self
    }

    pub fn with_coefficient_scale(mut self, scale: CoefficientScale) -> Self {
        self.coefficient_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pops = population_count(self.model)?;
        if self.sizes.len() != pops {
            return Err(Error::Config(format!(
                "model {} has {pops} populations, got {} sizes",
                self.model,
                self.sizes.len()
            )));
        }
        if self.sizes.contains(&0) {
            return Err(Error::Config("population sizes must be positive".into()));
        }
        if self.sizes.iter().sum::<usize>() < 3 {
            return Err(Error::Config("need at least 3 curves in total".into()));
        }
        Ok(())
    }
}

/// Number of populations of a model.
pub fn population_count(model: usize) -> Result<usize> {
    match model {
        1..=6 => Ok(2),
        7..=10 => Ok(3),
        other => Err(Error::UnknownModel(other)),
    }
}

/// A dataset with its generating populations.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub dataset: FunctionalDataset,
    pub truth: Partition,
}

#[derive(Debug, Clone, Copy)]
enum Innovation {
    Gaussian,
    /// Student t with 3 degrees of freedom scaled to unit variance.
    StudentT3,
}

impl Innovation {
    fn draw(self, rng: &mut impl Rng) -> f64 {
        match self {
            Innovation::Gaussian => rng.sample(StandardNormal),
            Innovation::StudentT3 => student_t3_unit(rng),
        }
    }
}

/// `t₃ / √3` via a normal over the root of a scaled chi-square.
pub fn student_t3_unit(rng: &mut impl Rng) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let chi2: f64 = (0..3).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum();
    z / (chi2 / 3.0).sqrt() / 3f64.sqrt()
}

/// How one population of an expansion model is generated.
struct Expansion {
    /// Eigenvalues `θ_j`, `j = 1..=40`.
    theta: Vec<f64>,
    /// Frequency multiplier: `φ_j(t) = √2 sin(freq · j π t)`.
    freq: f64,
    innovation: Innovation,
    /// Shifts of the first coefficients.
    coef_shift: Vec<f64>,
    /// Additive mean function.
    mean: fn(f64) -> f64,
}

fn zero(_: f64) -> f64 {
    0.0
}

fn quad_mean(t: f64) -> f64 {
    2.0 * (t * t - 1.0 / 3.0)
}

fn neg_quad_mean(t: f64) -> f64 {
    -quad_mean(t)
}

fn root_abs_mean(t: f64) -> f64 {
    (t - 0.5).abs().sqrt()
}

fn theta(f: impl Fn(f64) -> f64) -> Vec<f64> {
    (1..=EXPANSION_TERMS).map(|j| f(j as f64)).collect()
}

fn expansion(model: usize, pop: usize) -> Option<Expansion> {
    let base = |theta: Vec<f64>| Expansion {
        theta,
        freq: 1.0,
        innovation: Innovation::Gaussian,
        coef_shift: Vec::new(),
        mean: zero,
    };
    let slow = || theta(|j| j.powf(-1.05));
    let inv_sq = || theta(|j| j.powi(-2));
    Some(match (model, pop) {
        (1, 0) => Expansion {
            mean: quad_mean,
            ..base(slow())
        },
        (1, _) => base(slow()),
        (2, 0) => base(inv_sq()),
        (2, _) => base(theta(|j| 2f64.powf(-j))),
        (3, p) => Expansion {
            freq: 2.0,
            innovation: Innovation::StudentT3,
            mean: if p == 0 { root_abs_mean } else { zero },
            ..base(slow())
        },
        (4, p) => Expansion {
            innovation: Innovation::StudentT3,
            ..base(if p == 0 { inv_sq() } else { theta(|j| (-j).exp()) })
        },
        (5, p) | (9, p) => Expansion {
            coef_shift: match p {
                0 => vec![0.0, -0.5, 1.0, -0.5],
                1 => vec![0.0, -0.75, 0.75, -0.75],
                _ => vec![0.0, -1.0, 0.5, -1.0],
            },
            ..base(inv_sq())
        },
        (7, p) => Expansion {
            mean: [quad_mean, zero, neg_quad_mean][p],
            ..base(slow())
        },
        (8, 0) => base(inv_sq()),
        (8, 1) => base(theta(|j| 4f64.powf(-j))),
        (8, _) => base(theta(|j| (-j).exp())),
        _ => return None,
    })
}

fn sine_basis(grid: &Grid, freq: f64) -> DMatrix<f64> {
    let t = grid.points();
    DMatrix::from_fn(t.len(), EXPANSION_TERMS, |g, j| {
        2f64.sqrt() * (freq * (j + 1) as f64 * PI * t[g]).sin()
    })
}

fn bridge_values(times: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let mut ext = times.to_vec();
    if ext.last() != Some(&1.0) {
        ext.push(1.0);
    }
    let mut level = 0.0;
    let mut prev = 0.0;
    let w: Vec<f64> = ext
        .iter()
        .map(|&t| {
            level += (t - prev).sqrt() * rng.sample::<f64, _>(StandardNormal);
            prev = t;
            level
        })
        .collect();
    let end = w[w.len() - 1];
    times.iter().zip(&w).map(|(&t, &x)| x - t * end).collect()
}

/// Curves of population `pop` (0-based) of `model`; curve `i` of the whole
/// dataset draws from `seed.child(i)`.
fn population_curves(spec: &ModelSpec, pop: usize, first_index: usize) -> Result<Vec<Curve>> {
    let grid = &spec.grid;
    let count = spec.sizes[pop];
    let scale = spec.mean_scale;
    match spec.model {
        6 | 10 => {
            let sign = [0.0, 1.0, -1.0][pop];
            (0..count)
                .map(|c| {
                    let mut rng = spec.seed.child((first_index + c) as u64).rng();
                    let bb = bridge_values(grid.points(), &mut rng);
                    let vals = grid
                        .points()
                        .iter()
                        .zip(bb)
                        .map(|(&t, b)| b + scale * sign * t.sqrt())
                        .collect();
                    Curve::new(grid.clone(), vals)
                })
                .collect()
        }
        model => {
            let e = expansion(model, pop).ok_or(Error::UnknownModel(model))?;
            let basis = sine_basis(grid, e.freq);
            (0..count)
                .map(|c| {
                    let mut rng = spec.seed.child((first_index + c) as u64).rng();
                    let coef: Vec<f64> = (0..EXPANSION_TERMS)
                        .map(|j| {
                            let shift = e.coef_shift.get(j).copied().unwrap_or(0.0);
                            spec.coefficient_scale.sd(e.theta[j]) * e.innovation.draw(&mut rng) + scale * shift
                        })
                        .collect();
                    let vals = (0..grid.len())
                        .map(|g| {
                            let s: f64 = (0..EXPANSION_TERMS).map(|j| coef[j] * basis[(g, j)]).sum();
                            s + scale * (e.mean)(grid.points()[g])
                        })
                        .collect();
                    Curve::new(grid.clone(), vals)
                })
                .collect()
        }
    }
}

/// Generates a regular labeled sample; population `r` occupies a
/// contiguous block of `sizes[r]` curves.
pub fn generate_model(spec: &ModelSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut curves = Vec::new();
    let mut labels = Vec::new();
    for pop in 0..spec.sizes.len() {
        let first = curves.len();
        curves.extend(population_curves(spec, pop, first)?);
        labels.extend(std::iter::repeat_n(pop, spec.sizes[pop]));
    }
    Ok(LabeledDataset {
        dataset: FunctionalDataset::new(curves, Regime::Regular)?,
        truth: Partition::from_labels(&labels),
    })
}

/// Keeps `keep` randomly chosen points of every curve, independently per
/// curve. The input must be regular on a grid of `fine_size` points.
pub fn irregularize(data: &LabeledDataset, fine_size: usize, keep: usize, seed: &SeedSpec) -> Result<LabeledDataset> {
    if keep > fine_size {
        return Err(Error::Config(format!(
            "cannot keep {keep} of {fine_size} points"
        )));
    }
    if keep < 2 {
        return Err(Error::Config("need to keep at least 2 points".into()));
    }
    let grid = data
        .dataset
        .common_grid()
        .ok_or_else(|| Error::InvalidDataset("irregularize needs regular input".into()))?;
    if grid.len() != fine_size {
        return Err(Error::InvalidDataset(format!(
            "input grid has {} points, expected {fine_size}",
            grid.len()
        )));
    }
    let curves = data
        .dataset
        .curves()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut idx = sample(&mut seed.child(i as u64).rng(), fine_size, keep).into_vec();
            idx.sort_unstable();
            let vals = idx.iter().map(|&k| c.values()[k]).collect();
            Curve::new(grid.select(&idx)?, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    let regime = if keep == fine_size {
        Regime::Regular
    } else {
        Regime::Irregular
    };
    Ok(LabeledDataset {
        dataset: FunctionalDataset::with_ids(data.dataset.ids().to_vec(), curves, regime)?,
        truth: data.truth.clone(),
    })
}

/// Index of the length-`1/r` segment containing `t` (0-based; `t = 1`
/// belongs to the last segment).
pub fn segment_of(t: f64, r: usize) -> usize {
    ((t * r as f64).floor() as usize).min(r - 1)
}

/// Removes, for every curve, all points of one uniformly chosen segment
/// among `r` equal-length segments of `[0, 1]`.
pub fn fragment(data: &LabeledDataset, r: usize, seed: &SeedSpec) -> Result<LabeledDataset> {
    if r == 0 {
        return Err(Error::Config("need at least one segment".into()));
    }
    if data.dataset.regime() != Regime::Regular {
        return Err(Error::InvalidDataset("fragment needs regular input".into()));
    }
    let curves = data
        .dataset
        .curves()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let drop = seed.child(i as u64).rng().random_range(0..r);
            let idx: Vec<usize> = (0..c.len()).filter(|&k| segment_of(c.times()[k], r) != drop).collect();
            if idx.len() < 2 {
                return Err(Error::InvalidDataset(format!(
                    "curve {i} keeps {} points after fragmentation",
                    idx.len()
                )));
            }
            let vals = idx.iter().map(|&k| c.values()[k]).collect();
            Curve::new(c.grid().select(&idx)?, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledDataset {
        dataset: FunctionalDataset::with_ids(data.dataset.ids().to_vec(), curves, Regime::Fragmented)?,
        truth: data.truth.clone(),
    })
}

/// `template` regenerated on the 1000-point fine grid, then irregularized
/// to 100 points per curve. Generation uses `template.seed.child(0)`,
/// point selection `template.seed.child(1)`.
pub fn generate_irregular(template: &ModelSpec) -> Result<LabeledDataset> {
    let spec = ModelSpec {
        grid: Grid::uniform(FINE_GRID_SIZE)?,
        seed: template.seed.child(0),
        ..template.clone()
    };
    irregularize(&generate_model(&spec)?, FINE_GRID_SIZE, DEFAULT_KEEP, &template.seed.child(1))
}

/// `template` with one of ten segments removed per curve.
pub fn generate_fragmented(template: &ModelSpec) -> Result<LabeledDataset> {
    let spec = ModelSpec {
        seed: template.seed.child(0),
        ..template.clone()
    };
    fragment(&generate_model(&spec)?, DEFAULT_SEGMENTS, &template.seed.child(1))
}

/// `template` under the requested observation regime.
pub fn generate_in(template: &ModelSpec, regime: Regime) -> Result<LabeledDataset> {
    match regime {
        Regime::Regular => generate_model(&ModelSpec {
            seed: template.seed.child(0),
            ..template.clone()
        }),
        Regime::Irregular => generate_irregular(template),
        Regime::Fragmented => generate_fragmented(template),
    }
}

/// Model with default settings under the requested observation regime.
pub fn generate(model: usize, sizes: Vec<usize>, regime: Regime, seed: &SeedSpec) -> Result<LabeledDataset> {
    generate_in(&ModelSpec::new(model, sizes, seed.clone()), regime)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_model_pinned_at_ends() {
        let data = generate_model(&ModelSpec::new(6, vec![5, 5], SeedSpec::new(1))).unwrap();
        for c in &data.dataset.curves()[..5] {
            assert_eq!(c.values()[0], 0.0);
            assert!(c.values()[99].abs() < 1e-15);
        }
        // population 2 ends at sqrt(1) = 1
        for c in &data.dataset.curves()[5..] {
            assert!((c.values()[99] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sizes_and_truth() {
        let data = generate_model(&ModelSpec::new(9, vec![3, 4, 5], SeedSpec::new(2))).unwrap();
        assert_eq!(data.dataset.len(), 12);
        assert_eq!(data.truth.sizes(), vec![3, 4, 5]);
        assert_eq!(data.dataset.regime(), Regime::Regular);
    }

    #[test]
    fn invalid_specs() {
        assert_eq!(
            generate_model(&ModelSpec::new(11, vec![3, 3], SeedSpec::new(0))).unwrap_err(),
            Error::UnknownModel(11)
        );
        assert!(generate_model(&ModelSpec::new(7, vec![3, 3], SeedSpec::new(0))).is_err());
    }

    #[test]
    fn irregular_keeps_fine_grid_points() {
        let spec = ModelSpec::new(1, vec![4, 4], SeedSpec::new(3)).on_grid(Grid::uniform(1000).unwrap());
        let reg = generate_model(&spec).unwrap();
        let irr = irregularize(&reg, 1000, 100, &SeedSpec::new(4)).unwrap();
        assert_eq!(irr.dataset.regime(), Regime::Irregular);
        assert_eq!(irr.truth, reg.truth);
        let fine = Grid::uniform(1000).unwrap();
        for c in irr.dataset.curves() {
            assert_eq!(c.len(), 100);
            assert!(c.times().iter().all(|t| fine.points().contains(t)));
        }
        assert_ne!(irr.dataset.curves()[0].grid(), irr.dataset.curves()[1].grid());
        let same = irregularize(&reg, 1000, 1000, &SeedSpec::new(4)).unwrap();
        assert_eq!(same.dataset.curves()[0].grid(), &fine);
        assert!(irregularize(&reg, 1000, 1001, &SeedSpec::new(4)).is_err());
    }

    #[test]
    fn fragment_drops_one_segment() {
        let reg = generate_model(&ModelSpec::new(2, vec![10, 10], SeedSpec::new(5))).unwrap();
        let frag = fragment(&reg, 10, &SeedSpec::new(6)).unwrap();
        assert_eq!(frag.dataset.regime(), Regime::Fragmented);
        for c in frag.dataset.curves() {
            assert_eq!(c.len(), 90);
            let present: std::collections::BTreeSet<usize> = c.times().iter().map(|&t| segment_of(t, 10)).collect();
            assert_eq!(present.len(), 9);
        }
        assert!(matches!(fragment(&reg, 1, &SeedSpec::new(6)), Err(Error::InvalidDataset(_))));
    }

    #[test]
    fn coefficient_scale_changes_only_the_noise() {
        let lit = ModelSpec::new(5, vec![3, 3], SeedSpec::new(9));
        let sq = lit.clone().with_coefficient_scale(CoefficientScale::Theta);
        let a = generate_model(&lit).unwrap();
        let b = generate_model(&sq).unwrap();
        // first coefficient has theta_1 = 1 under both scales, higher ones shrink
        assert_ne!(a.dataset, b.dataset);
        assert_eq!("theta".parse::<CoefficientScale>().unwrap(), CoefficientScale::Theta);
        let bb = ModelSpec::new(6, vec![3, 3], SeedSpec::new(9));
        assert_eq!(
            generate_model(&bb).unwrap(),
            generate_model(&bb.clone().with_coefficient_scale(CoefficientScale::Theta)).unwrap()
        );
    }

    #[test]
    fn t3_innovations_unit_variance() {
        let mut rng = SeedSpec::new(8).rng();
        let xs: Vec<f64> = (0..10000).map(|_| student_t3_unit(&mut rng)).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let kurt = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n / var.powi(2) - 3.0;
        // t3 has infinite fourth moment, so the sample variance is noisy
        assert!((var - 1.0).abs() < 0.25, "var {var}");
        assert!(kurt > 0.0);
    }
}
