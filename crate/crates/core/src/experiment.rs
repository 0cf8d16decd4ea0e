//! Replicated experiments: data generation or ingestion, ensemble runs,
//! Rand-index evaluation and report files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{derivative_dataset, rand_index};
use crate::io::{parse_config, read_dataset, read_labels_file, write_labels};
use crate::pipeline::{run_ensemble, EnsembleConfig, EnsembleResult, DEFAULT_M_SET};
use crate::plot::{render_svg, PlotOptions};
use crate::sampler::ProjectionFamily;
use crate::seed::SeedSpec;
use crate::simgen::{generate_in, population_count, CoefficientScale, ModelSpec};
use crate::types::{FunctionalDataset, Partition, Regime};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Model { model: usize, sizes: Vec<usize> },
    Csv { path: PathBuf, labels: Option<PathBuf> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClusterCount {
    Fixed(usize),
    /// Every candidate is run; the one with the smallest final cost wins.
    Sweep(Vec<usize>),
}

impl ClusterCount {
    pub fn candidates(&self) -> Vec<usize> {
        match self {
            ClusterCount::Fixed(k) => vec![*k],
            ClusterCount::Sweep(ks) => ks.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub regime: Regime,
    pub k: ClusterCount,
    pub families: Vec<ProjectionFamily>,
    pub m_set: Vec<usize>,
    pub restarts: usize,
    pub derivative: Option<u8>,
    /// Coefficient convention of the expansion models.
    pub coefficient_scale: CoefficientScale,
    pub replicates: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub plots: bool,
    /// Record wall-clock seconds in the results file (breaks byte
    /// reproducibility, so off by default).
    pub timing: bool,
}

impl ExperimentConfig {
    /// Simulation run with the default ensemble and `K` = number of
    /// populations.
    pub fn model(model: usize, sizes: Vec<usize>, regime: Regime) -> Self {
        let k = population_count(model).unwrap_or(2);
        ExperimentConfig {
            source: DataSource::Model { model, sizes },
            regime,
            k: ClusterCount::Fixed(k),
            families: ProjectionFamily::defaults(),
            m_set: DEFAULT_M_SET.to_vec(),
            restarts: crate::optimizer::DEFAULT_RESTARTS,
            derivative: None,
            coefficient_scale: CoefficientScale::SqrtTheta,
            replicates: 1,
            seed: 0,
            out: None,
            plots: false,
            timing: false,
        }
    }

    pub fn csv(path: PathBuf, labels: Option<PathBuf>, regime: Regime, k: usize) -> Self {
        ExperimentConfig {
            source: DataSource::Csv { path, labels },
            k: ClusterCount::Fixed(k),
            ..ExperimentConfig::model(1, vec![], regime)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicate count must be at least 1".into()));
        }
        let ks = self.k.candidates();
        if ks.is_empty() || ks.iter().any(|&k| k < 2) {
            return Err(Error::Config("every K must be at least 2".into()));
        }
        if let Some(d) = self.derivative {
            if !(1..=2).contains(&d) {
                return Err(Error::Config(format!("derivative order must be 1 or 2, got {d}")));
            }
            if self.regime != Regime::Regular {
                return Err(Error::Config("derivatives need regular data".into()));
            }
        }
        if let DataSource::Model { model, sizes } = &self.source {
            let pops = population_count(*model)?;
            if sizes.len() != pops {
                return Err(Error::Config(format!(
                    "model {model} has {pops} populations, got {} sizes",
                    sizes.len()
                )));
            }
        }
        self.ensemble(2, SeedSpec::new(0)).validate()
    }

    fn ensemble(&self, k: usize, seed: SeedSpec) -> EnsembleConfig {
        let mut e = EnsembleConfig::new(k, seed);
        e.families = self.families.clone();
        e.m_set = self.m_set.clone();
        e.optimizer.restarts = self.restarts;
        e
    }

    /// Applies `key = value` overrides (keys as in the CLI flags).
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("invalid {what} `{value}`"));
        match key {
            "model" => {
                let model = value.parse().map_err(|_| bad("model"))?;
                let sizes = match &self.source {
                    DataSource::Model { sizes, .. } => sizes.clone(),
                    DataSource::Csv { .. } => vec![],
                };
                self.source = DataSource::Model { model, sizes };
            }
            "sizes" => {
                let parsed = parse_list(value).map_err(|_| bad("sizes"))?;
                match &mut self.source {
                    DataSource::Model { sizes, .. } => *sizes = parsed,
                    DataSource::Csv { .. } => return Err(Error::Config("sizes needs a model source".into())),
                }
            }
            "data" => {
                self.source = DataSource::Csv {
                    path: PathBuf::from(value),
                    labels: None,
                }
            }
            "labels" => match &mut self.source {
                DataSource::Csv { labels, .. } => *labels = Some(PathBuf::from(value)),
                DataSource::Model { .. } => return Err(Error::Config("labels need a csv source".into())),
            },
            "regime" => self.regime = value.parse()?,
            "k" => self.k = ClusterCount::Fixed(value.parse().map_err(|_| bad("K"))?),
            "k_sweep" | "k-sweep" => self.k = ClusterCount::Sweep(parse_range(value).map_err(|_| bad("K sweep"))?),
            "families" => {
                self.families = value
                    .split(',')
                    .map(|f| ProjectionFamily::from_str(f.trim()))
                    .collect::<Result<_>>()?
            }
            "m_set" | "m-set" => self.m_set = parse_list(value).map_err(|_| bad("M set"))?,
            "restarts" => self.restarts = value.parse().map_err(|_| bad("restart count"))?,
            "derivative" => self.derivative = Some(value.parse().map_err(|_| bad("derivative order"))?),
            "coefficient_scale" | "coefficient-scale" => self.coefficient_scale = value.parse()?,
            "reps" | "replicates" => self.replicates = value.parse().map_err(|_| bad("replicate count"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "out" => self.out = Some(PathBuf::from(value)),
            "plots" => self.plots = value.parse().map_err(|_| bad("plots flag"))?,
            "timing" => self.timing = value.parse().map_err(|_| bad("timing flag"))?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Builds a config from a flat `key = value` file; `model` or `data`
    /// must be present.
    pub fn from_text(text: &str) -> Result<Self> {
        let kv = parse_config(text)?;
        let mut cfg = match (kv.get("model"), kv.get("data")) {
            (Some(_), Some(_)) => return Err(Error::Config("give either model or data, not both".into())),
            (None, None) => return Err(Error::Config("a model or data source is required".into())),
            (Some(m), None) => {
                let model = m.parse().map_err(|_| Error::Config(format!("invalid model `{m}`")))?;
                ExperimentConfig::model(model, vec![], Regime::Regular)
            }
            (None, Some(p)) => ExperimentConfig::csv(PathBuf::from(p), None, Regime::Regular, 2),
        };
        // source first so later keys can refine it
        for key in ["model", "data"] {
            if let Some(v) = kv.get(key) {
                cfg.apply(key, v)?;
            }
        }
        for (k, v) in kv.iter().filter(|(k, _)| !matches!(k.as_str(), "model" | "data")) {
            cfg.apply(k, v)?;
        }
        Ok(cfg)
    }
}

/// Comma-separated list of integers.
pub fn parse_list(s: &str) -> std::result::Result<Vec<usize>, std::num::ParseIntError> {
    s.split(',').map(|x| x.trim().parse()).collect()
}

/// `a..b`/`a-b` (inclusive) or a comma-separated list.
pub fn parse_range(s: &str) -> std::result::Result<Vec<usize>, std::num::ParseIntError> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..").or_else(|| s.split_once('-')) {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().trim_start_matches('=').parse()?);
        return Ok((a..=b).collect());
    }
    parse_list(s)
}

/// Outcome of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateSummary {
    pub replicate: usize,
    pub k: usize,
    pub family: String,
    pub m: usize,
    pub stage: u8,
    pub final_cost: f64,
    pub rand_index: Option<f64>,
    pub wall_seconds: f64,
    pub partition: Partition,
    /// `(K, final cost)` for every candidate of a K sweep.
    pub sweep: Vec<(usize, f64)>,
    pub skipped_stage_two: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub replicates: Vec<ReplicateSummary>,
    /// Ids of the clustered curves, in the order of the partitions.
    pub ids: Vec<String>,
}

impl ExperimentReport {
    /// Mean and sample standard deviation of the Rand index.
    pub fn rand_mean_sd(&self) -> Option<(f64, f64)> {
        let vals: Vec<f64> = self.replicates.iter().filter_map(|r| r.rand_index).collect();
        mean_sd(&vals)
    }

    /// How often each `(family, M, stage)` was selected.
    pub fn selection_frequencies(&self) -> BTreeMap<(String, usize, u8), usize> {
        let mut freq = BTreeMap::new();
        for r in &self.replicates {
            *freq.entry((r.family.clone(), r.m, r.stage)).or_insert(0) += 1;
        }
        freq
    }

    /// Fraction of replicates whose winner came from stage II.
    pub fn stage_two_share(&self) -> f64 {
        let two = self.replicates.iter().filter(|r| r.stage == 2).count();
        two as f64 / self.replicates.len() as f64
    }

    /// Results table, one row per replicate.
    pub fn results_csv(&self, timing: bool) -> String {
        let mut s = String::from("replicate,l_star,m_star,s_star,final_cost,rand_index,wall_seconds\n");
        for r in &self.replicates {
            let rand = r.rand_index.map(|v| format!("{v:.6}")).unwrap_or_default();
            let wall = if timing { format!("{:.3}", r.wall_seconds) } else { String::new() };
            let _ = writeln!(
                s,
                "{},{},{},{},{:.12e},{},{}",
                r.replicate + 1,
                r.family,
                r.m,
                r.stage,
                r.final_cost,
                rand,
                wall
            );
        }
        s
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "replicates: {}", self.replicates.len());
        if let Some((mean, sd)) = self.rand_mean_sd() {
            let _ = writeln!(s, "rand index: mean {mean:.4} sd {sd:.4}");
        }
        let ks: Vec<usize> = self.replicates.iter().map(|r| r.k).collect();
        if self.replicates.iter().any(|r| r.sweep.len() > 1) {
            let _ = writeln!(s, "best K per replicate: {ks:?}");
        }
        let _ = writeln!(s, "selected (family, M, stage):");
        for ((f, m, st), c) in self.selection_frequencies() {
            let _ = writeln!(s, "  {f:<13} {m:>5}  {st}  {c}");
        }
        s
    }
}

fn mean_sd(vals: &[f64]) -> Option<(f64, f64)> {
    if vals.is_empty() {
        return None;
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let sd = if vals.len() > 1 {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, sd))
}

/// Seed of replicate `r`: data from `.child(0)`, ensemble from `.child(1)`.
pub fn replicate_seed(master: u64, replicate: usize) -> SeedSpec {
    SeedSpec::with_path(master, &[replicate as u64])
}

struct Loaded {
    data: FunctionalDataset,
    truth: Option<Partition>,
}

fn load_csv(cfg: &ExperimentConfig, path: &Path, labels: Option<&Path>) -> Result<Loaded> {
    let mut data = read_dataset(path, cfg.regime)?;
    if let Some(order) = cfg.derivative {
        data = derivative_dataset(&data, order)?;
    }
    let truth = labels.map(read_labels_file).transpose()?;
    if let Some(t) = &truth {
        if t.len() != data.len() {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} curves",
                t.len(),
                data.len()
            )));
        }
    }
    Ok(Loaded { data, truth })
}

/// Chosen K, its ensemble result and the `(K, cost)` sweep.
type SweepOutcome = (usize, EnsembleResult, Vec<(usize, f64)>);

fn cluster_sweep(data: &FunctionalDataset, cfg: &ExperimentConfig, seed: &SeedSpec) -> Result<SweepOutcome> {
    let mut best: Option<(usize, EnsembleResult)> = None;
    let mut sweep = Vec::new();
    for k in cfg.k.candidates() {
        let res = run_ensemble(data, &cfg.ensemble(k, seed.child(k as u64)))?;
        sweep.push((k, res.cost));
        if best.as_ref().is_none_or(|(_, b)| res.cost < b.cost) {
            best = Some((k, res));
        }
    }
    let (k, res) = best.expect("at least one K");
    Ok((k, res, sweep))
}

fn run_replicate(cfg: &ExperimentConfig, loaded: Option<&Loaded>, r: usize) -> Result<(ReplicateSummary, Option<Loaded>)> {
    let seed = replicate_seed(cfg.seed, r);
    let start = Instant::now();
    let generated = match (&cfg.source, loaded) {
        (DataSource::Model { model, sizes }, _) => {
            let spec = ModelSpec::new(*model, sizes.clone(), seed.child(0)).with_coefficient_scale(cfg.coefficient_scale);
            let d = generate_in(&spec, cfg.regime)?;
            Some(Loaded {
                data: d.dataset,
                truth: Some(d.truth),
            })
        }
        _ => None,
    };
    let current = generated.as_ref().or(loaded).expect("data available");
    let (k, res, sweep) = cluster_sweep(&current.data, cfg, &seed.child(1))?;
    let rand = current.truth.as_ref().map(|t| rand_index(t, &res.partition)).transpose()?;
    let summary = ReplicateSummary {
        replicate: r,
        k,
        family: res.selected_family.clone(),
        m: res.selected_m,
        stage: res.selection.stage.number(),
        final_cost: res.cost,
        rand_index: rand,
        wall_seconds: start.elapsed().as_secs_f64(),
        partition: res.partition.clone(),
        sweep,
        skipped_stage_two: res.skipped_stage_two(),
    };
    Ok((summary, generated))
}

/// Runs every replicate (in parallel) and writes the report files when
/// `cfg.out` is set. Inputs are read and validated before any clustering.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let loaded = match &cfg.source {
        DataSource::Csv { path, labels } => Some(load_csv(cfg, path, labels.as_deref())?),
        DataSource::Model { .. } => None,
    };
    if let Some(out) = &cfg.out {
        fs::create_dir_all(out)?;
    }
    let outcomes: Vec<Result<(ReplicateSummary, Option<Loaded>)>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_replicate(cfg, loaded.as_ref(), r))
        .collect();

    let mut replicates = Vec::new();
    let mut datasets = Vec::new();
    for o in outcomes {
        let (s, d) = o?;
        replicates.push(s);
        datasets.push(d);
    }
    let ids = match &loaded {
        Some(l) => l.data.ids().to_vec(),
        None => datasets[0].as_ref().map(|l| l.data.ids().to_vec()).unwrap_or_default(),
    };
    let report = ExperimentReport { replicates, ids };

    // single writer, after all replicates finished
    if let Some(out) = &cfg.out {
        fs::write(out.join(RESULTS_FILE), report.results_csv(cfg.timing))?;
        fs::write(out.join(SUMMARY_FILE), report.summary_text())?;
        for (s, d) in report.replicates.iter().zip(&datasets) {
            let data = &d.as_ref().or(loaded.as_ref()).expect("data available").data;
            let mut buf = Vec::new();
            write_labels(data.ids(), &s.partition, &mut buf)?;
            fs::write(out.join(format!("labels_{:03}.csv", s.replicate + 1)), buf)?;
            if cfg.plots {
                let opts = PlotOptions {
                    title: Some(format!("replicate {}: {} M={} stage {}", s.replicate + 1, s.family, s.m, s.stage)),
                    ..PlotOptions::default()
                };
                fs::write(out.join(format!("clusters_{:03}.svg", s.replicate + 1)), render_svg(data, &s.partition, &opts)?)?;
            }
        }
    }
    Ok(report)
}

/// Process exit code for an error: 2 configuration, 3 data, 4 numerical
/// degeneracy.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownModel(_) | Error::ClusterCountOutOfRange { .. } => 2,
        e if e.is_degenerate() => 4,
        _ => 3,
    }
}
