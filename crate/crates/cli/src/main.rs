use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hermite_adapt::experiment::{
    emit_tables, render_report, reproduce, run_experiment, ExperimentConfig, PolicySpec,
    RegressorKind, StepChoice, TableConfig, TableId,
};
use hermite_adapt::regress::{train_lsq, train_mlp, train_svr, ModelFile, RegressorModel, MODEL_SCHEMA_VERSION};
use hermite_adapt::solver::Problem;
use hermite_adapt::training::{
    build_spline_corpus, gen_gaussian_samples, read_corpus, write_corpus, SplineCorpusParams,
};
use hermite_adapt::HermiteBasis;

const EXIT_DIVERGED: u8 = 2;

#[derive(Parser)]
#[command(name = "hermite-adapt", version, about = "Hermite spectral heat solver with learned scaling factors")]
struct Cli {
    /// Log verbosity (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusFamily {
    Gaussian,
    Spline,
}

#[derive(Subcommand)]
enum Command {
    /// Print Gauss-Hermite nodes and weights as CSV.
    Basis {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a labeled training corpus (writes pv.csv and fc.csv).
    GenCorpus {
        #[arg(long, value_enum, default_value = "gaussian")]
        family: CorpusFamily,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 40)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a regressor on a corpus CSV and save it as JSON.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "svr")]
        model: String,
        /// Hidden layer widths for the network, e.g. 20,10.
        #[arg(long, value_delimiter = ',', default_value = "20,10")]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one experiment; exits with status 2 if the run diverges.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = ["homogeneous", "nonhomogeneous"])]
        problem: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        /// exact, constant:A, random:LO:HI[:SEED], piecewise:T=A,..., or svr-fc, mlp-pv, ...
        #[arg(long)]
        policy: Option<String>,
        /// Pre-trained model JSON for an ML policy.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce one of the result tables.
    Reproduce {
        table: String,
        /// Table config; defaults to configs/<table>.toml.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Use the published time step instead of the desk-scale one.
        #[arg(long, conflicts_with = "dt")]
        paper_dt: bool,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the tables found in an output directory.
    Report {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Basis { n, out } => {
            let b = HermiteBasis::new(n)?;
            let mut s = String::from("j,xi,w\n");
            for (j, (x, w)) in b.nodes().iter().zip(b.weights()).enumerate() {
                s.push_str(&format!("{j},{x:.16e},{w:.16e}\n"));
            }
            emit(out.as_deref(), &s)?;
        }
        Command::GenCorpus {
            family,
            n,
            count,
            seed,
            out,
        } => {
            let b = HermiteBasis::new(n)?;
            let pair = match family {
                CorpusFamily::Gaussian => gen_gaussian_samples(&b, count, (0.2, 0.6), (0.0, 1.0), seed)?,
                CorpusFamily::Spline => build_spline_corpus(
                    &b,
                    &SplineCorpusParams {
                        k: count,
                        ..Default::default()
                    },
                    seed,
                )?,
            };
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_corpus(&out.join("pv.csv"), &pair.pv)?;
            write_corpus(&out.join("fc.csv"), &pair.fc)?;
            println!("wrote {} samples per representation to {}", pair.pv.len(), out.display());
        }
        Command::Train {
            corpus,
            model,
            hidden,
            seed,
            out,
        } => {
            let c = read_corpus(&corpus)?;
            if c.is_empty() {
                bail!("corpus {} has no samples", corpus.display());
            }
            let x = c.features();
            let y = c.targets();
            let m = match model.parse::<RegressorKind>()? {
                RegressorKind::Svr => RegressorModel::Svr(train_svr(&x, &y, &Default::default())?),
                RegressorKind::Mlp => {
                    let params = hermite_adapt::regress::MlpParams {
                        hidden,
                        ..Default::default()
                    };
                    let (m, report) = train_mlp(&x, &y, &params, seed)?;
                    println!(
                        "network: {} epochs, {} restarts, final mse {:e}",
                        report.epochs,
                        report.restarts,
                        report.loss_history.last().copied().unwrap_or(f64::NAN)
                    );
                    RegressorModel::Mlp(m)
                }
                RegressorKind::Lsq => {
                    let m = train_lsq(&x, &y)?;
                    if m.diagnostics.rank_deficient {
                        println!(
                            "least squares: rank {} of {} (log10 det of Gram = {:.2})",
                            m.diagnostics.rank, m.diagnostics.n_features, m.diagnostics.gram_log10_det
                        );
                    }
                    RegressorModel::Lsq(m)
                }
            };
            let rmse = (x.iter().zip(&y).map(|(f, t)| (m.predict(f).unwrap() - t).powi(2)).sum::<f64>()
                / y.len() as f64)
                .sqrt();
            println!("training RMSE {rmse:.3e}");
            ModelFile {
                schema_version: MODEL_SCHEMA_VERSION,
                representation: c.representation,
                n: x[0].len(),
                corpus_seed: c.seed,
                model: m,
            }
            .save(&out)?;
        }
        Command::Solve {
            config,
            problem,
            n,
            dt,
            policy,
            model,
            seed,
            out,
        } => {
            let mut cfg = match &config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::new(Problem::Homogeneous, 10, 1e-6, PolicySpec::ExactLaw),
            };
            if let Some(p) = problem {
                cfg.problem = if p == "homogeneous" {
                    Problem::Homogeneous
                } else {
                    Problem::Nonhomogeneous
                };
            }
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(dt) = dt {
                cfg.dt = dt;
            }
            if let Some(p) = policy {
                cfg.policy = p.parse()?;
                cfg.label = cfg.policy.label();
            }
            if let Some(path) = model {
                match &mut cfg.policy {
                    PolicySpec::Ml { model, .. } => *model = Some(path),
                    _ => bail!("--model needs an ML policy"),
                }
            }
            if let Some(s) = seed {
                cfg.ml.set_seed(s);
                if let PolicySpec::Random { seed, .. } = &mut cfg.policy {
                    *seed = s;
                }
            }
            if cfg.label.is_empty() {
                cfg.label = cfg.policy.label();
            }
            cfg.validate()?;
            let report = run_experiment(&cfg)?;
            match report.outcome.norms() {
                Some(nm) => println!("{}: N1 = {:.6e}  N2 = {:.6e}  N3 = {:.6e}", report.label, nm.n1, nm.n2, nm.n3),
                None => println!("{}: does not converge ({:?})", report.label, report.outcome),
            }
            if let Some(dir) = out {
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                let json = serde_json::to_string_pretty(&report)?;
                fs::write(dir.join("report.json"), json)?;
                fs::write(dir.join("norms.csv"), hermite_adapt::experiment::norms_csv(std::slice::from_ref(&report)))?;
            }
            if report.outcome.is_diverged() {
                return Ok(ExitCode::from(EXIT_DIVERGED));
            }
        }
        Command::Reproduce {
            table,
            config,
            paper_dt,
            dt,
            seed,
            out,
        } => {
            let id: TableId = table.parse()?;
            let path = config.unwrap_or_else(|| default_config(id));
            let mut cfg = TableConfig::load(&path)?;
            if cfg.table != id {
                bail!("{} describes {}, not {}", path.display(), cfg.table.name(), id.name());
            }
            if let Some(s) = seed {
                cfg.set_seed(s);
            }
            let step = match (paper_dt, dt) {
                (true, _) => StepChoice::Paper,
                (false, Some(dt)) => StepChoice::Explicit(dt),
                (false, None) => StepChoice::Desk,
            };
            let reports = reproduce(&cfg, step)?;
            let files = emit_tables(id, &reports, &out)?;
            print!("{}", fs::read_to_string(&files[0])?);
            for r in &reports {
                for c in &r.clamps {
                    eprintln!("{}: clamped α {} -> {} at t = {}", r.label, c.predicted, c.used, c.t);
                }
            }
        }
        Command::Report { out } => {
            print!("{}", render_report(&out)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn default_config(id: TableId) -> PathBuf {
    let name = format!("{}.toml", id.name());
    let local = Path::new("configs").join(&name);
    if local.exists() {
        return local;
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
