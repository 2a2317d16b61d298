use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use inkscreen_core::bundle::TrainedBundle;
use inkscreen_core::dataset::{read_features_csv, write_features_csv, FeatureTable};
use inkscreen_core::evaluation::Target;
use inkscreen_core::synth::{CohortSpec, ThetaDistribution};
use inkscreen_service::{AppState, ServiceConfig, SessionStore};

#[derive(Parser)]
#[command(name = "inkscreen", version, about = "Screen for cognitive impairment from digitized pen drawings")]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON run configuration; protocol defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the 190-column feature table from session files or directories.
    Extract {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// CSV destination; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Repeated nested cross-validation for one target.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Label-permutation test of the nested-CV score.
    Permtest {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1000)]
        n_perm: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Fit the diagnosis, MMSE and MTL pipelines and save a bundle.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Timestamp stored in the bundle; the current time when omitted.
        #[arg(long)]
        created_at: Option<String>,
        /// Also run nested CV per target and store the summary means.
        #[arg(long)]
        with_cv: bool,
    },
    /// Apply a bundle to sessions or to a feature table.
    Predict {
        #[arg(long)]
        bundle: PathBuf,
        /// Feature CSV to score instead of session files.
        #[arg(long, conflicts_with = "inputs")]
        features: Option<PathBuf>,
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Generate a labelled synthetic cohort.
    Synth {
        #[command(flatten)]
        cohort: SynthArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long)]
        bundle: Option<PathBuf>,
        #[arg(long, default_value = "sessions")]
        store_dir: PathBuf,
        /// Only this CORS origin is allowed; any origin when omitted.
        #[arg(long)]
        allow_origin: Option<String>,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// diagnosis, cn_vs_mci, cn_vs_dementia, mci_vs_dementia, mmse or mtl.
    #[arg(long, value_parser = parse_target)]
    target: Target,
}

#[derive(Args)]
#[group(multiple = false)]
struct ThetaArgs {
    /// Separated CN,MCI,DEMENTIA bands with these counts.
    #[arg(long, value_delimiter = ',')]
    groups: Option<Vec<usize>>,
    /// Every subject at this severity.
    #[arg(long)]
    theta: Option<f64>,
    /// Severity drawn uniformly from LOW,HIGH.
    #[arg(long, value_delimiter = ',')]
    uniform: Option<Vec<f64>>,
    /// Severity distribution as JSON.
    #[arg(long)]
    theta_dist: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of sessions; implied by --groups.
    #[arg(long, short)]
    n: Option<usize>,
    #[command(flatten)]
    theta: ThetaArgs,
    /// Generator parameters as JSON.
    #[arg(long)]
    spec: Option<PathBuf>,
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse::<Target>().map_err(|e| e.to_string())
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            Ok(stdout.flush()?)
        }
    }
}

fn write_json<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_output(out, text.as_bytes())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn load_bundle(path: &Path) -> Result<TrainedBundle> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    TrainedBundle::from_json(&bytes).with_context(|| format!("bundle {}", path.display()))
}

fn theta_distribution(args: &SynthArgs) -> Result<(usize, ThetaDistribution)> {
    let t = &args.theta;
    let dist = if let Some(g) = &t.groups {
        let [cn, mci, dem] = g[..] else { bail!("--groups takes three counts, CN,MCI,DEMENTIA") };
        let total = cn + mci + dem;
        if args.n.is_some_and(|n| n != total) {
            bail!("--n disagrees with the --groups total {total}");
        }
        return Ok((total, ThetaDistribution::separated_groups(cn, mci, dem)));
    } else if let Some(theta) = t.theta {
        ThetaDistribution::Fixed { theta }
    } else if let Some(u) = &t.uniform {
        let [low, high] = u[..] else { bail!("--uniform takes LOW,HIGH") };
        ThetaDistribution::Uniform { low, high }
    } else if let Some(p) = &t.theta_dist {
        read_json(p)?
    } else {
        ThetaDistribution::Uniform { low: 0.0, high: 1.0 }
    };
    let Some(n) = args.n else { bail!("--n is required unless --groups is given") };
    Ok((n, dist))
}

/// Failed files are reported on stderr; the good rows are still returned.
fn extract_reporting(inputs: &[PathBuf], cfg: &inkscreen_core::features::FeatureConfig) -> Result<(FeatureTable, bool)> {
    let paths = inkscreen::session_paths(inputs)?;
    if paths.is_empty() {
        bail!("no sessions found");
    }
    let ex = inkscreen::extract(&paths, cfg);
    for (path, reason) in &ex.failures {
        eprintln!("error: {}: {reason}", path.display());
    }
    Ok((ex.table, ex.failures.is_empty()))
}

fn run(cli: Cli) -> Result<bool> {
    let config = inkscreen::load_config(cli.config.as_deref())?;
    let seed = cli.seed;
    match cli.command {
        Command::Extract { inputs, out } => {
            let (table, clean) = extract_reporting(&inputs, &config.features)?;
            let mut buf = Vec::new();
            write_features_csv(&mut buf, &table)?;
            write_output(out.as_deref(), &buf)?;
            Ok(clean)
        }
        Command::Evaluate { data, out } => {
            let (table, subjects) = inkscreen::load_dataset(&data.features, &data.labels)?;
            let res = inkscreen::evaluate(&table, &subjects, data.target, &config.evaluation, seed)?;
            write_json(out.as_deref(), &res)?;
            Ok(true)
        }
        Command::Permtest { data, n_perm, out } => {
            let (table, subjects) = inkscreen::load_dataset(&data.features, &data.labels)?;
            let res = inkscreen::permtest(&table, &subjects, data.target, &config.evaluation, n_perm, seed)?;
            write_json(out.as_deref(), &res)?;
            Ok(true)
        }
        Command::Train {
            features,
            labels,
            out,
            created_at,
            with_cv,
        } => {
            let (table, subjects) = inkscreen::load_dataset(&features, &labels)?;
            let created_at = created_at.unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
            eprintln!("training on {} sessions {:?}", table.len(), inkscreen::diagnosis_counts(&subjects));
            let bundle = inkscreen::train(&table, &subjects, &config, seed, created_at, with_cv)?;
            write_output(Some(&out), bundle.to_json().as_bytes())?;
            Ok(true)
        }
        Command::Predict {
            bundle,
            features,
            inputs,
            out,
        } => {
            let bundle = load_bundle(&bundle)?;
            let (table, clean) = match features {
                Some(p) => {
                    let file = fs::File::open(&p).with_context(|| format!("opening {}", p.display()))?;
                    (read_features_csv(file).with_context(|| format!("features {}", p.display()))?, true)
                }
                None if inputs.is_empty() => bail!("give session files or --features"),
                None => extract_reporting(&inputs, &bundle.features)?,
            };
            let preds = inkscreen::predict(&bundle, &table)?;
            write_json(out.as_deref(), &preds)?;
            Ok(clean)
        }
        Command::Synth { cohort, out_dir } => {
            let (n, dist) = theta_distribution(&cohort)?;
            let spec: CohortSpec = match &cohort.spec {
                Some(p) => read_json(p)?,
                None => CohortSpec::default(),
            };
            let written = inkscreen::synth(&out_dir, n, &dist, &spec, seed)?;
            eprintln!("wrote {} sessions and labels.csv to {}", written.len(), out_dir.display());
            Ok(true)
        }
        Command::Serve {
            addr,
            bundle,
            store_dir,
            allow_origin,
        } => {
            let bundle = bundle.as_deref().map(load_bundle).transpose()?;
            if bundle.is_none() {
                eprintln!("warning: no bundle loaded, screening requests will return 503");
            }
            let store = SessionStore::open(&store_dir).with_context(|| format!("opening {}", store_dir.display()))?;
            let service = ServiceConfig {
                allow_origin: allow_origin.map(|o| o.parse()).transpose().context("--allow-origin")?,
                ..ServiceConfig::default()
            };
            let state = AppState::new(store, bundle, service);
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                inkscreen_service::serve(listener, state).await?;
                Ok(true)
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
