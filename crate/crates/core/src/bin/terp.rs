use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use terp::experiment::{exit_code, parse_range, ClusterCount, DataSource, ExperimentConfig};
use terp::io::{read_dataset, read_labels_file, write_dataset, write_labels};
use terp::plot::{render_svg, PlotOptions};
use terp::simgen::{generate_in, CoefficientScale};
use terp::{rand_index, Error, ModelSpec, Regime, Result, SeedSpec};

#[derive(Parser)]
#[command(name = "terp", version, about = "Ensemble random-projection clustering of functional data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a simulated sample (data CSV plus true labels).
    Simulate {
        #[arg(long)]
        model: usize,
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, default_value = "regular")]
        regime: Regime,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Expansion coefficient convention: `sqrt-theta` or `theta`.
        #[arg(long, default_value = "sqrt-theta")]
        coefficient_scale: CoefficientScale,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster a CSV dataset.
    Cluster {
        /// Wide CSV (regular) or long CSV (irregular, fragmented).
        data: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// True labels, for the Rand index.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        derivative: Option<u8>,
    },
    /// Rand index between two label files.
    Evaluate { a: PathBuf, b: PathBuf },
    /// Monte-Carlo replicates of simulation models.
    Bench {
        /// Model ids, comma separated.
        #[arg(long, value_delimiter = ',')]
        model: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        /// Flat key = value config; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        plots: bool,
        /// Expansion coefficient convention: `sqrt-theta` or `theta`.
        #[arg(long)]
        coefficient_scale: Option<CoefficientScale>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// SVG of curves colored by cluster.
    Plot {
        data: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value = "regular")]
        regime: Regime,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    k: Option<usize>,
    /// Candidate K values, e.g. `2..4` or `2,3,5`.
    #[arg(long)]
    k_sweep: Option<String>,
    /// Projection families, comma separated.
    #[arg(long)]
    families: Option<String>,
    #[arg(long, value_delimiter = ',')]
    m_set: Option<Vec<usize>>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    regime: Option<Regime>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for results, labels and plots.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock seconds in the results file.
    #[arg(long)]
    timing: bool,
}

impl RunArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(r) = self.regime {
            cfg.regime = r;
        }
        match (self.k, &self.k_sweep) {
            (Some(_), Some(_)) => return Err(Error::Config("give --k or --k-sweep, not both".into())),
            (Some(k), None) => cfg.k = ClusterCount::Fixed(k),
            (None, Some(ks)) => {
                let ks = parse_range(ks).map_err(|e| Error::Config(format!("--k-sweep `{ks}`: {e}")))?;
                cfg.k = ClusterCount::Sweep(ks);
            }
            (None, None) => {}
        }
        if let Some(f) = &self.families {
            cfg.apply("families", f)?;
        }
        if let Some(m) = &self.m_set {
            cfg.m_set = m.clone();
        }
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        cfg.timing |= self.timing;
        Ok(())
    }
}

fn print_report(report: &terp::ExperimentReport) {
    print!("{}", report.summary_text());
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            model,
            sizes,
            regime,
            seed,
            coefficient_scale,
            out,
        } => {
            let spec = ModelSpec::new(model, sizes, SeedSpec::new(seed)).with_coefficient_scale(coefficient_scale);
            let sample = generate_in(&spec, regime)?;
            fs::create_dir_all(&out)?;
            write_dataset(&sample.dataset, &out.join("data.csv"))?;
            let mut buf = Vec::new();
            write_labels(sample.dataset.ids(), &sample.truth, &mut buf)?;
            fs::write(out.join("truth.csv"), buf)?;
            println!("wrote {} curves ({}) to {}", sample.dataset.len(), regime.name(), out.display());
        }
        Command::Cluster {
            data,
            run,
            labels,
            derivative,
        } => {
            let mut cfg = ExperimentConfig::csv(data, labels, Regime::Regular, 2);
            cfg.derivative = derivative;
            run.apply(&mut cfg)?;
            let report = terp::run_experiment(&cfg)?;
            let r = &report.replicates[0];
            println!(
                "K {}  family {}  M {}  stage {}  cost {:.6}",
                r.k, r.family, r.m, r.stage, r.final_cost
            );
            if let Some(ri) = r.rand_index {
                println!("rand index {ri:.4}");
            }
            if cfg.out.is_none() {
                let mut buf = Vec::new();
                write_labels(&report.ids, &r.partition, &mut buf)?;
                print!("{}", String::from_utf8_lossy(&buf));
            }
        }
        Command::Evaluate { a, b } => {
            let ri = rand_index(&read_labels_file(&a)?, &read_labels_file(&b)?)?;
            println!("{ri:.6}");
        }
        Command::Bench {
            model,
            sizes,
            reps,
            config,
            plots,
            coefficient_scale,
            run,
        } => {
            let mut base = match &config {
                Some(path) => ExperimentConfig::from_text(&fs::read_to_string(path)?)?,
                None => ExperimentConfig::model(1, vec![30, 30], Regime::Regular),
            };
            if config.is_none() || reps != 20 {
                base.replicates = reps;
            }
            base.plots |= plots;
            if let Some(c) = coefficient_scale {
                base.coefficient_scale = c;
            }
            let models = match (&model, &base.source) {
                (Some(m), _) => m.clone(),
                (None, DataSource::Model { model, .. }) => vec![*model],
                (None, DataSource::Csv { .. }) => vec![],
            };
            if models.is_empty() {
                // csv source from the config file
                run.apply(&mut base)?;
                print_report(&terp::run_experiment(&base)?);
                return Ok(());
            }
            let out_root = run.out.clone().or(base.out.clone());
            for &m in &models {
                let default_sizes = match &base.source {
                    DataSource::Model { model, sizes } if *model == m && !sizes.is_empty() => sizes.clone(),
                    _ => vec![30; terp::simgen::population_count(m)?],
                };
                let mut cfg = base.clone();
                cfg.source = DataSource::Model {
                    model: m,
                    sizes: sizes.clone().unwrap_or(default_sizes),
                };
                if !matches!(base.k, ClusterCount::Sweep(_)) && config.is_none() {
                    cfg.k = ClusterCount::Fixed(terp::simgen::population_count(m)?);
                }
                run.apply(&mut cfg)?;
                cfg.out = out_root.as_ref().map(|o| {
                    if models.len() > 1 {
                        o.join(format!("model{m}_{}", cfg.regime.name()))
                    } else {
                        o.clone()
                    }
                });
                println!("model {m} ({})", cfg.regime.name());
                print_report(&terp::run_experiment(&cfg)?);
            }
        }
        Command::Plot {
            data,
            labels,
            regime,
            out,
        } => {
            let d = read_dataset(&data, regime)?;
            let p = read_labels_file(&labels)?;
            fs::write(&out, render_svg(&d, &p, &PlotOptions::default())?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
