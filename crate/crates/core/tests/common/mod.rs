//! Independent oracles and checks shared by the property suite and the
//! acceptance target. Every check returns `Err(reason)` on failure.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;

use terp::covariance::DEFAULT_VARIANCE_CUTOFF;
use terp::madd::distance_matrix;
use terp::pipeline::ProjectionDesign;
use terp::sampler::{sample_kl_matrix, sample_paths};
use terp::simgen::generate_model;
use terp::{
    base_distance, madd_matrix, normalized_cost, optimize, pooled_eigenpairs, population_madd, rand_index,
    DissimilarityMatrix, EigenSystem, Grid, ModelSpec, OptimizerConfig, Partition, PopulationSpec,
    ProjectedMatrix, ProjectionFamily, SeedSpec, SmootherConfig,
};

pub type Check = Result<(), String>;

/// `Φ / T` straight from the definition.
pub fn cost_oracle(d: &DissimilarityMatrix, labels: &[usize]) -> f64 {
    let n = labels.len();
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let sq = |i: usize, j: usize| d.get(i, j).powi(2);
    let total: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| sq(i, j)).sum::<f64>() / (2.0 * n as f64);
    let mut phi = 0.0;
    for c in 0..k {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let s: f64 = members.iter().flat_map(|&i| members.iter().map(move |&j| (i, j))).map(|(i, j)| sq(i, j)).sum();
        phi += s / (2.0 * members.len() as f64);
    }
    phi / total
}

/// Minimum of `Φ / T` over every labeling with all `k` clusters non-empty.
pub fn exhaustive_min(d: &DissimilarityMatrix, k: usize) -> f64 {
    let n = d.len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut used = vec![false; k];
        labels.iter().for_each(|&l| used[l] = true);
        if used.iter().all(|&u| u) {
            best = best.min(cost_oracle(d, &labels));
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Fraction of agreeing pairs, by direct enumeration.
pub fn rand_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let mut agree = 0u64;
    let mut pairs = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            pairs += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    agree as f64 / pairs as f64
}

pub fn random_dissimilarity(rng: &mut impl Rng, n: usize) -> DissimilarityMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v: f64 = rng.random_range(0.01..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    DissimilarityMatrix::new(m).expect("valid matrix")
}

pub fn random_labels(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

pub fn check_optimizer_against_exhaustive(cases: usize, seed: u64) -> Check {
    let mut rng = SeedSpec::new(seed).rng();
    for case in 0..cases {
        let n = rng.random_range(6..=8);
        let k = rng.random_range(2..=3);
        let d = random_dissimilarity(&mut rng, n);
        let cfg = OptimizerConfig {
            restarts: 20,
            ..OptimizerConfig::with_seed(SeedSpec::with_path(seed, &[case as u64]))
        };
        let found = optimize(&d, k, &cfg).map_err(|e| e.to_string())?;
        let best = exhaustive_min(&d, k);
        if (found.cost - best).abs() > 1e-12 {
            return Err(format!("case {case} (n={n}, K={k}): optimizer {} vs exhaustive {best}", found.cost));
        }
    }
    Ok(())
}

pub fn check_cost_extremes_and_scale(cases: usize, seed: u64) -> Check {
    let mut rng = SeedSpec::new(seed).rng();
    for case in 0..cases {
        let n = rng.random_range(3..=12);
        let d = random_dissimilarity(&mut rng, n);
        let one = normalized_cost(&d, &Partition::from_labels(&vec![0; n])).map_err(|e| e.to_string())?;
        let singles = normalized_cost(&d, &Partition::from_labels(&(0..n).collect::<Vec<_>>())).map_err(|e| e.to_string())?;
        if (one - 1.0).abs() > 1e-12 || singles != 0.0 {
            return Err(format!("case {case}: K=1 cost {one}, singleton cost {singles}"));
        }
        let labels = random_labels(&mut rng, n, 3);
        let p = Partition::from_labels(&labels);
        let c: f64 = rng.random_range(0.001..1000.0);
        let base = normalized_cost(&d, &p).map_err(|e| e.to_string())?;
        let scaled = normalized_cost(&d.scaled(c).map_err(|e| e.to_string())?, &p).map_err(|e| e.to_string())?;
        if (base - scaled).abs() > 1e-12 * base.max(1.0) {
            return Err(format!("case {case}: cost {base} becomes {scaled} under scaling by {c}"));
        }
        if (base - cost_oracle(&d, &labels)).abs() > 1e-12 {
            return Err(format!("case {case}: cost {base} disagrees with the definition"));
        }
    }
    Ok(())
}

pub fn check_rand_against_pair_counting(cases: usize, seed: u64) -> Check {
    let mut rng = SeedSpec::new(seed).rng();
    for case in 0..cases {
        let n = rng.random_range(2..=40);
        let (ka, kb) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let a = random_labels(&mut rng, n, ka);
        let b = random_labels(&mut rng, n, kb);
        let (pa, pb) = (Partition::from_labels(&a), Partition::from_labels(&b));
        let ab = rand_index(&pa, &pb).map_err(|e| e.to_string())?;
        let ba = rand_index(&pb, &pa).map_err(|e| e.to_string())?;
        let oracle = rand_oracle(&a, &b);
        if ab != ba || (ab - oracle).abs() > 1e-15 {
            return Err(format!("case {case}: rand {ab} / {ba}, pair counting {oracle}"));
        }
    }
    Ok(())
}

pub fn check_madd_invariants(cases: usize, seed: u64) -> Check {
    let mut rng = SeedSpec::new(seed).rng();
    for case in 0..cases {
        let n = rng.random_range(3..=15);
        let m = rng.random_range(1..=30);
        let scale: f64 = rng.random_range(0.01..50.0);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| scale * rng.random_range(-1.0..1.0)).collect()).collect();
        let rho = madd_matrix(&ProjectedMatrix::from_rows(&rows).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for i in 0..n {
            if rho.get(i, i) != 0.0 {
                return Err(format!("case {case}: diagonal {}", rho.get(i, i)));
            }
            for j in 0..n {
                let v = rho.get(i, j);
                if v != rho.get(j, i) || !(0.0..1.0).contains(&v) {
                    return Err(format!("case {case}: entry ({i}, {j}) = {v}"));
                }
            }
        }
    }
    Ok(())
}

pub fn check_bridge_endpoints() -> Check {
    let grid = Grid::uniform(100).map_err(|e| e.to_string())?;
    let z = sample_paths(&ProjectionFamily::BrownianBridge, &grid, 500, &SeedSpec::new(41)).map_err(|e| e.to_string())?;
    let last = grid.len() - 1;
    for q in 0..z.ncols() {
        if z[(0, q)] != 0.0 || z[(last, q)].abs() > 1e-12 {
            return Err(format!("path {q}: endpoints {} and {}", z[(0, q)], z[(last, q)]));
        }
    }
    Ok(())
}

/// Sample covariance of the rows of a `G x count` path matrix (zero mean).
fn path_covariance(z: &DMatrix<f64>) -> DMatrix<f64> {
    z * z.transpose() / z.ncols() as f64
}

pub fn check_motion_covariance(tol: f64) -> Check {
    let grid = Grid::new((0..=10).map(|i| i as f64 / 10.0).collect()).map_err(|e| e.to_string())?;
    let z = sample_paths(&ProjectionFamily::BrownianMotion, &grid, 40_000, &SeedSpec::new(42)).map_err(|e| e.to_string())?;
    let cov = path_covariance(&z);
    let t = grid.points();
    let worst = (0..t.len())
        .flat_map(|a| (0..t.len()).map(move |b| (a, b)))
        .map(|(a, b)| (cov[(a, b)] - t[a].min(t[b])).abs())
        .fold(0.0, f64::max);
    if worst > tol {
        return Err(format!("max |cov - min(s,t)| = {worst:.4}"));
    }
    Ok(())
}

pub fn check_kl_covariance(rel_tol: f64) -> Check {
    let grid = Grid::uniform(51).map_err(|e| e.to_string())?;
    let t = grid.points().to_vec();
    let phi = |j: usize, s: f64| 2f64.sqrt() * (j as f64 * std::f64::consts::PI * s).sin();
    // trapezoid-orthonormal rescaling of sine functions on this grid
    let raw = DMatrix::from_fn(t.len(), 4, |g, j| phi(j + 1, t[g]));
    let w = terp::QuadratureRule::Trapezoid.weights(&grid);
    let mut f = raw.clone();
    for j in 0..4 {
        let norm: f64 = (0..t.len()).map(|g| w[g] * raw[(g, j)].powi(2)).sum::<f64>().sqrt();
        f.column_mut(j).scale_mut(1.0 / norm);
    }
    let lambdas = vec![1.0, 0.5, 0.25, 0.125];
    let system = EigenSystem::new(grid, lambdas.clone(), f.clone()).map_err(|e| e.to_string())?;
    let z = sample_kl_matrix(&system, 5000, &SeedSpec::new(43)).map_err(|e| e.to_string())?;
    let cov = path_covariance(&z);
    let target = DMatrix::from_fn(t.len(), t.len(), |a, b| (0..4).map(|j| lambdas[j] * f[(a, j)] * f[(b, j)]).sum::<f64>());
    let scale = target.amax();
    let worst = (&cov - &target).amax();
    if worst > rel_tol * scale {
        return Err(format!("max deviation {worst:.4} against {:.4}", rel_tol * scale));
    }
    Ok(())
}

pub fn check_eigenfunction_orthonormality(tol: f64) -> Check {
    let sample = generate_model(&ModelSpec::new(5, vec![40, 40], SeedSpec::new(44))).map_err(|e| e.to_string())?;
    let (_, system) = pooled_eigenpairs(&sample.dataset, &sample.truth, &SmootherConfig::default(), DEFAULT_VARIANCE_CUTOFF)
        .map_err(|e| e.to_string())?;
    let w = terp::QuadratureRule::Trapezoid.weights(system.grid());
    let f = system.functions();
    for a in 0..f.ncols() {
        for b in 0..=a {
            let ip: f64 = (0..w.len()).map(|g| w[g] * f[(g, a)] * f[(g, b)]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            if (ip - target).abs() > tol {
                return Err(format!("<phi_{a}, phi_{b}> = {ip}"));
            }
        }
    }
    Ok(())
}

pub fn check_population_hand_value() -> Check {
    let spec = PopulationSpec::new(vec![3, 3], DMatrix::from_row_slice(2, 2, &[0.2, 0.5, 0.5, 0.3])).map_err(|e| e.to_string())?;
    let v = population_madd(&spec, 0, 1).map_err(|e| e.to_string())?;
    if v != 0.25 {
        return Err(format!("rho* = {v}"));
    }
    Ok(())
}

/// Monte-Carlo estimate of `ρ*` and its standard error for two populations
/// of equal size `n_r`, from `pairs` independent draws of fresh directions
/// and fresh curve pairs.
pub struct PopulationEstimate {
    pub rho: f64,
    pub se: f64,
    pub d_aa: f64,
    pub d_bb: f64,
    pub d_ab: f64,
}

/// Model 6 curves under Brownian-motion projections. With `distinct`, the
/// second population is `BB + √t`; otherwise both are `BB`.
pub fn estimate_bridge_rho(distinct: bool, pairs: usize, m: usize, n_r: usize, seed: u64) -> Result<PopulationEstimate, String> {
    let mut samples = Vec::with_capacity(pairs);
    for s in 0..pairs {
        let base = SeedSpec::with_path(seed, &[s as u64]);
        // population 1 curves 0..6, population 2 curves 6..10
        let data = generate_model(&ModelSpec::new(6, vec![6, 4], base.child(0))).map_err(|e| e.to_string())?;
        let design = ProjectionDesign::new(&data.dataset);
        let z = sample_paths(&ProjectionFamily::BrownianMotion, design.grid(), m, &base.child(1)).map_err(|e| e.to_string())?;
        let p = design.project(&z).map_err(|e| e.to_string())?;
        let row = |i: usize| p.matrix().row(i).iter().copied().collect::<Vec<f64>>();
        let d = |i: usize, j: usize| base_distance(&row(i), &row(j));
        let (aa, bb, ab) = if distinct { ((0, 1), (6, 7), (2, 8)) } else { ((0, 1), (2, 3), (4, 5)) };
        samples.push([
            d(aa.0, aa.1).map_err(|e| e.to_string())?,
            d(bb.0, bb.1).map_err(|e| e.to_string())?,
            d(ab.0, ab.1).map_err(|e| e.to_string())?,
        ]);
    }
    let mean = |k: usize| samples.iter().map(|s| s[k]).sum::<f64>() / pairs as f64;
    let (d_aa, d_bb, d_ab) = (mean(0), mean(1), mean(2));
    let table = DMatrix::from_row_slice(2, 2, &[d_aa, d_ab, d_ab, d_bb]);
    let spec = PopulationSpec::new(vec![n_r, n_r], table).map_err(|e| e.to_string())?;
    let rho = population_madd(&spec, 0, 1).map_err(|e| e.to_string())?;
    // delta method through the signs of the two differences
    let (s1, s2) = ((d_ab - d_aa).signum(), (d_ab - d_bb).signum());
    let w = (n_r - 1) as f64 / (2 * n_r - 2) as f64;
    let g: Vec<f64> = samples.iter().map(|s| w * (s1 * (s[2] - s[0]) + s2 * (s[2] - s[1]))).collect();
    let gm = g.iter().sum::<f64>() / pairs as f64;
    let var = g.iter().map(|v| (v - gm).powi(2)).sum::<f64>() / (pairs - 1) as f64;
    Ok(PopulationEstimate {
        rho,
        se: (var / pairs as f64).sqrt(),
        d_aa,
        d_bb,
        d_ab,
    })
}

/// Brute-force base distance matrix, for comparison with the library.
pub fn distance_oracle(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| {
        rows[i].iter().zip(&rows[j]).map(|(a, b)| 1.0 - (-(a - b).abs()).exp()).sum::<f64>() / rows[i].len() as f64
    })
}

pub fn library_distances(rows: &[Vec<f64>]) -> DMatrix<f64> {
    distance_matrix(&ProjectedMatrix::from_rows(rows).expect("rectangular rows"))
}

/// Coefficient shifts `μ_lj`, `j = 1..4`, of the shift models 5 and 9.
pub fn coefficient_shifts(model: usize) -> Vec<[f64; 4]> {
    let mut m = vec![[0.0, -0.5, 1.0, -0.5], [0.0, -0.75, 0.75, -0.75]];
    if model == 9 {
        m.push([0.0, -1.0, 0.5, -1.0]);
    }
    m
}

/// Rand index of the Bayes rule that knows every model parameter, on the
/// regular sample generated from `seed`. Scores are `⟨X, φ_j⟩` for the 40
/// sine functions; each curve goes to the population with the smallest
/// `Σ_j (score_j - μ_lj)² / θ_j`, `θ_j = j^{-2}`.
pub fn supervised_ceiling(model: usize, sizes: Vec<usize>, seed: SeedSpec) -> f64 {
    let shifts = coefficient_shifts(model);
    let sample = generate_model(&ModelSpec::new(model, sizes, seed)).expect("sample");
    let grid = sample.dataset.curves()[0].grid().clone();
    let w = terp::QuadratureRule::Trapezoid.weights(&grid);
    let t = grid.points();
    let phi = |j: usize, s: f64| 2f64.sqrt() * (j as f64 * std::f64::consts::PI * s).sin();
    let labels: Vec<usize> = sample
        .dataset
        .curves()
        .iter()
        .map(|c| {
            let scores: Vec<f64> = (1..=40)
                .map(|j| (0..t.len()).map(|g| w[g] * c.values()[g] * phi(j, t[g])).sum())
                .collect();
            let score = |l: usize| -> f64 {
                scores
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let mu = if i < 4 { shifts[l][i] } else { 0.0 };
                        (s - mu).powi(2) * ((i + 1) as f64).powi(2)
                    })
                    .sum()
            };
            (0..shifts.len()).min_by(|&a, &b| score(a).total_cmp(&score(b))).expect("populations")
        })
        .collect();
    rand_index(&sample.truth, &Partition::from_labels(&labels)).expect("same length")
}
