//! Minimization of the normalized within-cluster MADD cost.
//!
//! The cost of a partition is `Φ(S) = Σ_r (1 / 2|S_r|) Σ_{i,j ∈ S_r} D_ij²`,
//! normalized by the total dispersion `T = (1 / 2n) Σ_{i,j} D_ij²`. There is
//! no centroid, so the search is a restarted single-point relocation descent
//! on the pairwise cost.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed::SeedSpec;
use crate::types::{DissimilarityMatrix, Partition};

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub seed: SeedSpec,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: DEFAULT_RESTARTS,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            seed: SeedSpec::new(0),
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: SeedSpec) -> Self {
        OptimizerConfig {
            seed,
            ..OptimizerConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Config("max sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Best partition found and its normalized cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub partition: Partition,
    pub cost: f64,
}

struct Squared {
    n: usize,
    sq: Vec<f64>,
    total: f64,
}

impl Squared {
    fn new(d: &DissimilarityMatrix) -> Result<Self> {
        let n = d.len();
        let m = d.matrix();
        let sq: Vec<f64> = (0..n * n).map(|idx| m[(idx / n, idx % n)].powi(2)).collect();
        let total = sq.iter().sum::<f64>() / (2.0 * n as f64);
        if total <= 0.0 {
            return Err(Error::DegenerateDissimilarity);
        }
        Ok(Squared { n, sq, total })
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.sq[i * self.n..(i + 1) * self.n]
    }

    fn cost(&self, labels: &[usize], k: usize) -> f64 {
        let mut within = vec![0.0; k];
        let mut sizes = vec![0usize; k];
        for i in 0..self.n {
            sizes[labels[i]] += 1;
            let row = self.row(i);
            for j in 0..self.n {
                if labels[j] == labels[i] {
                    within[labels[i]] += row[j];
                }
            }
        }
        let phi: f64 = within
            .iter()
            .zip(&sizes)
            .map(|(q, &s)| q / (2.0 * s as f64))
            .sum();
        phi / self.total
    }
}

/// `Φ(S) / T` for partition `s` of the rows of `d`.
pub fn normalized_cost(d: &DissimilarityMatrix, s: &Partition) -> Result<f64> {
    if s.len() != d.len() {
        return Err(Error::LengthMismatch {
            expected: d.len(),
            got: s.len(),
        });
    }
    let sq = Squared::new(d)?;
    Ok(sq.cost(s.labels(), s.k()))
}

fn random_labels(n: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    loop {
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut seen = vec![false; k];
        labels.iter().for_each(|&l| seen[l] = true);
        if seen.iter().all(|&s| s) {
            return labels;
        }
    }
}

/// Relocation descent from `labels`; returns final labels and, when
/// `trace` is set, the exact normalized cost after every accepted move
/// (starting with the initial cost).
fn descend(
    sq: &Squared,
    mut labels: Vec<usize>,
    k: usize,
    max_sweeps: usize,
    trace: bool,
) -> (Vec<usize>, Vec<f64>) {
    let n = sq.n;
    let mut sizes = vec![0usize; k];
    // link[i * k + c] = Σ_{j ∈ c} D_ij²
    let mut link = vec![0.0; n * k];
    for i in 0..n {
        sizes[labels[i]] += 1;
        let row = sq.row(i);
        for j in 0..n {
            link[i * k + labels[j]] += row[j];
        }
    }
    let mut within: Vec<f64> = vec![0.0; k];
    for i in 0..n {
        within[labels[i]] += link[i * k + labels[i]];
    }
    let tol = 1e-13 * sq.total;
    let mut costs = Vec::new();
    if trace {
        costs.push(sq.cost(&labels, k));
    }

    for _ in 0..max_sweeps {
        let mut moved = false;
        for i in 0..n {
            let a = labels[i];
            if sizes[a] == 1 {
                continue;
            }
            let na = sizes[a] as f64;
            let leave = (within[a] - 2.0 * link[i * k + a]) / (2.0 * (na - 1.0)) - within[a] / (2.0 * na);
            let mut best: Option<(usize, f64)> = None;
            for b in (0..k).filter(|&b| b != a) {
                let nb = sizes[b] as f64;
                let join = (within[b] + 2.0 * link[i * k + b]) / (2.0 * (nb + 1.0)) - within[b] / (2.0 * nb);
                let delta = leave + join;
                if delta < -tol && best.is_none_or(|(_, d)| delta < d) {
                    best = Some((b, delta));
                }
            }
            if let Some((b, _)) = best {
                within[a] -= 2.0 * link[i * k + a];
                within[b] += 2.0 * link[i * k + b];
                sizes[a] -= 1;
                sizes[b] += 1;
                labels[i] = b;
                let row = sq.row(i);
                for j in 0..n {
                    link[j * k + a] -= row[j];
                    link[j * k + b] += row[j];
                }
                moved = true;
                if trace {
                    costs.push(sq.cost(&labels, k));
                }
            }
        }
        if !moved {
            break;
        }
    }
    (labels, costs)
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 2 || k + 1 > n {
        return Err(Error::ClusterCountOutOfRange { k, n });
    }
    Ok(())
}

/// Restarted relocation search for the `K`-partition minimizing `Φ / T`.
///
/// Restarts run in parallel; the winner is the lowest cost, ties going to
/// the lowest restart index. The returned cost is recomputed from scratch.
pub fn optimize(d: &DissimilarityMatrix, k: usize, cfg: &OptimizerConfig) -> Result<Optimum> {
    cfg.validate()?;
    let n = d.len();
    check_k(n, k)?;
    let sq = Squared::new(d)?;
    let results: Vec<(f64, Vec<usize>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let init = random_labels(n, k, &mut cfg.seed.child(r as u64).rng());
            let (labels, _) = descend(&sq, init, k, cfg.max_sweeps, false);
            (sq.cost(&labels, k), labels)
        })
        .collect();
    let (cost, labels) = results
        .into_iter()
        .reduce(|best, cand| if cand.0 < best.0 { cand } else { best })
        .expect("at least one restart");
    Ok(Optimum {
        partition: Partition::from_labels(&labels),
        cost,
    })
}

/// Runs one relocation descent from `start` and reports the cost after
/// every accepted move.
pub fn descent_trace(
    d: &DissimilarityMatrix,
    start: &Partition,
    max_sweeps: usize,
) -> Result<(Partition, Vec<f64>)> {
    let n = d.len();
    if start.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: start.len(),
        });
    }
    let sq = Squared::new(d)?;
    let (labels, costs) = descend(&sq, start.labels().to_vec(), start.k(), max_sweeps, true);
    Ok((Partition::from_labels(&labels), costs))
}
