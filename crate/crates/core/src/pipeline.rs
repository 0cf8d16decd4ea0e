//! Two-stage ensemble clustering.
//!
//! For every projection family `l` and projection count `M`:
//!
//! 1. *Stage I* projects every curve on `M` directions drawn from family
//!    `l`, builds the MADD matrix and minimizes the normalized cost.
//! 2. *Stage II* centers the curves with the stage-I clusters, estimates
//!    the pooled covariance, projects on `M` directions drawn from the
//!    estimated Gaussian process and clusters again.
//!
//! The combination and stage with the smallest normalized cost wins. The
//! same code serves regular data (common grid) and irregular or fragmented
//! data (curve-specific grids, kernel-smoothed covariance).

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::covariance::{pooled_eigenpairs, SmootherConfig, DEFAULT_VARIANCE_CUTOFF};
use crate::error::{Error, Result};
use crate::madd::madd_matrix;
use crate::optimizer::{optimize, OptimizerConfig};
use crate::quadrature::{interpolation_matrix, QuadratureRule};
use crate::sampler::{sample_kl_matrix, sample_paths, ProjectionFamily};
use crate::seed::SeedSpec;
use crate::types::{FunctionalDataset, Grid, Partition, ProjectedMatrix, Regime};

pub const DEFAULT_M_SET: [usize; 5] = [10, 50, 100, 500, 1000];

const DIRECTIONS: u64 = 0;
const OPTIMIZER: u64 = 1;

/// Everything the ensemble sweep needs besides the data.
///
/// The optimizer seed inside `optimizer` is ignored; every stage derives its
/// own seeds from `seed`, the family index and the `M` index.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub families: Vec<ProjectionFamily>,
    pub m_set: Vec<usize>,
    pub k: usize,
    pub optimizer: OptimizerConfig,
    pub smoother: SmootherConfig,
    pub variance_cutoff: f64,
    pub seed: SeedSpec,
}

impl EnsembleConfig {
    /// Six default families, `M ∈ {10, 50, 100, 500, 1000}`.
    pub fn new(k: usize, seed: SeedSpec) -> Self {
        EnsembleConfig {
            families: ProjectionFamily::defaults(),
            m_set: DEFAULT_M_SET.to_vec(),
            k,
            optimizer: OptimizerConfig::default(),
            smoother: SmootherConfig::default(),
            variance_cutoff: DEFAULT_VARIANCE_CUTOFF,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::Config("at least one projection family is required".into()));
        }
        for f in &self.families {
            f.validate()?;
        }
        if self.m_set.is_empty() {
            return Err(Error::Config("the M set must not be empty".into()));
        }
        if self.m_set[0] == 0 || self.m_set.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "the M set must hold strictly increasing positive values".into(),
            ));
        }
        self.optimizer.validate()
    }

    fn optimizer_for(&self, seed: SeedSpec) -> OptimizerConfig {
        OptimizerConfig {
            seed,
            ..self.optimizer.clone()
        }
    }
}

/// Quadrature-weighted data on the union of all observation times.
///
/// `⟨X_i, Z⟩ ≈ Σ_g weighted[i, g] · Z(t_g)` for any direction `Z` sampled
/// on `grid`.
#[derive(Debug, Clone)]
pub struct ProjectionDesign {
    grid: Grid,
    weighted: DMatrix<f64>,
}

impl ProjectionDesign {
    pub fn new(data: &FunctionalDataset) -> Self {
        let grid = data.union_grid();
        let rule = match data.regime() {
            Regime::Fragmented => QuadratureRule::segmented(),
            _ => QuadratureRule::Trapezoid,
        };
        let union = grid.points();
        let mut weighted = DMatrix::zeros(data.len(), union.len());
        for (i, c) in data.curves().iter().enumerate() {
            let w = rule.weights(c.grid());
            let mut pos = 0;
            for ((&t, &x), w) in c.times().iter().zip(c.values()).zip(w) {
                while union[pos] < t {
                    pos += 1;
                }
                weighted[(i, pos)] = w * x;
            }
        }
        ProjectionDesign { grid, weighted }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Projections on the columns of `directions` (sampled on `self.grid()`).
    pub fn project(&self, directions: &DMatrix<f64>) -> Result<ProjectedMatrix> {
        ProjectedMatrix::new(&self.weighted * directions)
    }

    /// Projections on directions sampled on another grid, linearly
    /// interpolated onto every observation time first.
    pub fn project_from(&self, source: &Grid, directions: &DMatrix<f64>) -> Result<ProjectedMatrix> {
        if source == &self.grid {
            return self.project(directions);
        }
        let interp = interpolation_matrix(source, self.grid.points())?;
        ProjectedMatrix::new((&self.weighted * interp) * directions)
    }
}

/// A clustering and its normalized cost.
#[derive(Debug, Clone, PartialEq)]
pub struct StageResult {
    pub partition: Partition,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOneOutput {
    pub result: StageResult,
    pub projected: ProjectedMatrix,
}

/// Outcome of stage II for one combination.
#[derive(Debug, Clone, PartialEq)]
pub enum StageTwo {
    Done(StageResult),
    Skipped(String),
}

impl StageTwo {
    pub fn result(&self) -> Option<&StageResult> {
        match self {
            StageTwo::Done(r) => Some(r),
            StageTwo::Skipped(_) => None,
        }
    }

    pub fn cost(&self) -> Option<f64> {
        self.result().map(|r| r.cost)
    }
}

fn check_k(data: &FunctionalDataset, k: usize) -> Result<()> {
    if k < 2 || k >= data.len() {
        return Err(Error::ClusterCountOutOfRange { k, n: data.len() });
    }
    Ok(())
}

/// Stage I with directions from `family`.
pub fn stage_one(
    data: &FunctionalDataset,
    family: &ProjectionFamily,
    m: usize,
    k: usize,
    seed: &SeedSpec,
) -> Result<StageOneOutput> {
    stage_one_with(
        &ProjectionDesign::new(data),
        data,
        family,
        m,
        k,
        &OptimizerConfig::default(),
        seed,
    )
}

fn stage_one_with(
    design: &ProjectionDesign,
    data: &FunctionalDataset,
    family: &ProjectionFamily,
    m: usize,
    k: usize,
    optimizer: &OptimizerConfig,
    seed: &SeedSpec,
) -> Result<StageOneOutput> {
    check_k(data, k)?;
    if m == 0 {
        return Err(Error::Config("M must be at least 1".into()));
    }
    let directions = sample_paths(family, design.grid(), m, &seed.child(DIRECTIONS))?;
    let projected = design.project(&directions)?;
    let rho = madd_matrix(&projected)?;
    let opt = OptimizerConfig {
        seed: seed.child(OPTIMIZER),
        ..optimizer.clone()
    };
    let best = optimize(&rho, k, &opt)?;
    Ok(StageOneOutput {
        result: StageResult {
            partition: best.partition,
            cost: best.cost,
        },
        projected,
    })
}

fn skip_reason(e: &Error) -> String {
    match e {
        Error::ClusterTooSmall { .. } => "cluster too small".into(),
        Error::DegenerateCovariance => "degenerate covariance".into(),
        other => other.to_string(),
    }
}

/// Stage II from the stage-I partition `stage1`.
///
/// Degenerate inputs (singleton clusters, vanishing covariance, empty
/// smoothing windows, ...) yield [`StageTwo::Skipped`] instead of an error.
pub fn stage_two(
    data: &FunctionalDataset,
    stage1: &Partition,
    m: usize,
    k: usize,
    cfg: &EnsembleConfig,
    seed: &SeedSpec,
) -> StageTwo {
    stage_two_with(&ProjectionDesign::new(data), data, stage1, m, k, cfg, seed)
}

fn stage_two_with(
    design: &ProjectionDesign,
    data: &FunctionalDataset,
    stage1: &Partition,
    m: usize,
    k: usize,
    cfg: &EnsembleConfig,
    seed: &SeedSpec,
) -> StageTwo {
    let run = || -> Result<StageResult> {
        let (_, system) = pooled_eigenpairs(data, stage1, &cfg.smoother, cfg.variance_cutoff)?;
        let directions = sample_kl_matrix(&system, m, &seed.child(DIRECTIONS))?;
        let projected = design.project_from(system.grid(), &directions)?;
        let rho = madd_matrix(&projected)?;
        let best = optimize(&rho, k, &cfg.optimizer_for(seed.child(OPTIMIZER)))?;
        Ok(StageResult {
            partition: best.partition,
            cost: best.cost,
        })
    };
    match run() {
        Ok(r) => StageTwo::Done(r),
        Err(e) => StageTwo::Skipped(skip_reason(&e)),
    }
}

/// Which stage produced a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    One,
    Two,
}

impl Stage {
    pub fn number(self) -> u8 {
        match self {
            Stage::One => 1,
            Stage::Two => 2,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Both stages of one `(family, M)` combination.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationRecord {
    pub family_index: usize,
    pub family: String,
    pub m_index: usize,
    pub m: usize,
    pub stage1: StageResult,
    pub stage2: StageTwo,
    /// `min` of the stage costs that are available.
    pub v: f64,
}

impl CombinationRecord {
    pub fn best_stage(&self) -> Stage {
        match self.stage2.cost() {
            Some(c2) if c2 < self.stage1.cost => Stage::Two,
            _ => Stage::One,
        }
    }
}

/// One row of the `v`-table as seen by the final selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEntry {
    pub family_index: usize,
    pub m_index: usize,
    pub stage1: f64,
    pub stage2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub family_index: usize,
    pub m_index: usize,
    pub stage: Stage,
}

/// Argmin of `v = min(Φ̃¹, Φ̃²)` over the table.
///
/// Ties go to the lower family index, then the lower `M` index, then
/// stage 1 over stage 2.
pub fn select_combination(entries: &[CostEntry]) -> Option<Selection> {
    let mut sorted: Vec<&CostEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| (e.family_index, e.m_index));
    let mut best: Option<(f64, Selection)> = None;
    for e in sorted {
        let (v, stage) = match e.stage2 {
            Some(c2) if c2 < e.stage1 => (c2, Stage::Two),
            _ => (e.stage1, Stage::One),
        };
        if best.is_none_or(|(bv, _)| v < bv) {
            best = Some((
                v,
                Selection {
                    family_index: e.family_index,
                    m_index: e.m_index,
                    stage,
                },
            ));
        }
    }
    best.map(|(_, s)| s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub records: Vec<CombinationRecord>,
    /// Combinations whose stage I failed, with the reason.
    pub failures: Vec<(usize, usize, String)>,
    pub selection: Selection,
    pub selected_family: String,
    pub selected_m: usize,
    pub partition: Partition,
    pub cost: f64,
}

impl EnsembleResult {
    /// Number of combinations whose stage II was skipped.
    pub fn skipped_stage_two(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.stage2, StageTwo::Skipped(_)))
            .count()
    }

    pub fn cost_table(&self) -> Vec<CostEntry> {
        self.records
            .iter()
            .map(|r| CostEntry {
                family_index: r.family_index,
                m_index: r.m_index,
                stage1: r.stage1.cost,
                stage2: r.stage2.cost(),
            })
            .collect()
    }
}

/// Per-combination seed; independent of which other `M` values are swept.
pub fn combination_seed(base: &SeedSpec, family_index: usize, m: usize) -> SeedSpec {
    base.descend(&[family_index as u64, m as u64])
}

fn run_combination(
    design: &ProjectionDesign,
    data: &FunctionalDataset,
    cfg: &EnsembleConfig,
    family_index: usize,
    m_index: usize,
) -> Result<CombinationRecord> {
    let family = &cfg.families[family_index];
    let m = cfg.m_set[m_index];
    let seed = combination_seed(&cfg.seed, family_index, m);
    let one = stage_one_with(design, data, family, m, cfg.k, &cfg.optimizer, &seed.child(1))?;
    let two = stage_two_with(design, data, &one.result.partition, m, cfg.k, cfg, &seed.child(2));
    let v = two.cost().map_or(one.result.cost, |c2| c2.min(one.result.cost));
    Ok(CombinationRecord {
        family_index,
        family: family.name().to_string(),
        m_index,
        m,
        stage1: one.result,
        stage2: two,
        v,
    })
}

/// Full sweep over families × M values and final selection.
pub fn run_ensemble(data: &FunctionalDataset, cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    cfg.validate()?;
    check_k(data, cfg.k)?;
    let design = ProjectionDesign::new(data);
    let combos: Vec<(usize, usize)> = (0..cfg.families.len())
        .flat_map(|l| (0..cfg.m_set.len()).map(move |mi| (l, mi)))
        .collect();
    let outcomes: Vec<Result<CombinationRecord>> = combos
        .par_iter()
        .map(|&(l, mi)| run_combination(&design, data, cfg, l, mi))
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for ((l, mi), out) in combos.into_iter().zip(outcomes) {
        match out {
            Ok(r) => records.push(r),
            Err(e) => failures.push((l, mi, e.to_string())),
        }
    }
    let table: Vec<CostEntry> = records
        .iter()
        .map(|r| CostEntry {
            family_index: r.family_index,
            m_index: r.m_index,
            stage1: r.stage1.cost,
            stage2: r.stage2.cost(),
        })
        .collect();
    let Some(selection) = select_combination(&table) else {
        let details = failures
            .iter()
            .map(|(l, mi, e)| format!("({}, M={}): {e}", cfg.families[*l].name(), cfg.m_set[*mi]))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::AllCombinationsFailed {
            count: failures.len(),
            details,
        });
    };
    let chosen = records
        .iter()
        .find(|r| r.family_index == selection.family_index && r.m_index == selection.m_index)
        .expect("selection comes from the records");
    let winner = match selection.stage {
        Stage::One => &chosen.stage1,
        Stage::Two => chosen.stage2.result().expect("stage two ran"),
    };
    Ok(EnsembleResult {
        selected_family: chosen.family.clone(),
        selected_m: chosen.m,
        partition: winner.partition.clone(),
        cost: winner.cost,
        selection,
        records,
        failures,
    })
}
