use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use renyi_extract::{Alpha, Regime};
use renyi_extract_cli::config::ExperimentConfig;
use renyi_extract_cli::report::{sig12, summarize, RunSettings, Units};
use renyi_extract_cli::runners::{self, BoundName, BoundQuery, Evaluated, BUDGET_ENV};

/// Exact leftover-hash experiments and Rényi-divergence bound certification.
#[derive(Debug, Parser)]
#[command(name = "renyi-extract", version)]
struct Cli {
    /// Units for printed log quantities; files are always q-ary.
    #[arg(long, value_enum, default_value_t = Units::Qary, global = true)]
    units: Units,
    /// Maximum hash evaluations per enumeration.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 1, global = true)]
    workers: usize,
    #[arg(long, global = true)]
    rng_seed: Option<u64>,
    /// Report JSON for `verify`, CSV for `bucket` and `sweep`; `-` is stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one bound or threshold.
    Bound(BoundArgs),
    /// Certify the family and check every selected bound against the exact joint.
    Verify(ConfigArg),
    /// Expected largest hash bucket against its bound.
    Bucket(ConfigArg),
    /// Bound-versus-empirical table over an (α, m) grid.
    Sweep(ConfigArg),
    /// Rényi entropies of a pmf or of a configured source.
    Entropy(EntropyArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("which").required(true).args(["regime", "name"])))]
struct BoundArgs {
    /// Threshold on m for a guarantee.
    #[arg(long)]
    regime: Option<Regime>,
    /// Bound to evaluate.
    #[arg(long, value_enum)]
    name: Option<BoundName>,
    #[arg(long)]
    q: u32,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    alpha: Option<Alpha>,
    /// Entropy of the matching order, q-ary.
    #[arg(long = "H")]
    entropy: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Subset size for the bucket bound.
    #[arg(long = "A")]
    subset_size: Option<u64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["probs", "config"])))]
struct EntropyArgs {
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Logarithm base for `--probs`.
    #[arg(long, default_value_t = 2)]
    q: u32,
    #[arg(long, value_delimiter = ',', default_value = "1,2,inf")]
    alpha: Vec<Alpha>,
}

const EXIT_FAILED: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn settings(cli: &Cli, cfg: &ExperimentConfig) -> Result<RunSettings> {
    if cli.workers == 0 {
        bail!("--workers must be at least 1");
    }
    let env = std::env::var(BUDGET_ENV).ok();
    Ok(RunSettings {
        budget: runners::resolve_budget(cli.budget, cfg.budget, env.as_deref())?,
        workers: cli.workers,
        rng_seed: cli.rng_seed.or(cfg.rng_seed).unwrap_or(0),
    })
}

fn print_values(values: &[Evaluated], units: Units, q: u32) {
    for v in values {
        let value = if v.log_scale { units.convert(v.value, q) } else { v.value };
        println!("{} = {}", v.label, sig12(value));
    }
}

fn write_to(path: &Path, text: &str) -> Result<()> {
    if path == Path::new("-") {
        io::stdout().write_all(text.as_bytes())?;
        Ok(())
    } else {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

fn csv_target(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out.clone().or_else(|| cfg.output.csv.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("-"))
}

fn run(cli: Cli) -> Result<bool> {
    let started = Instant::now();
    let passed = match &cli.command {
        Command::Bound(b) => {
            let query = BoundQuery {
                regime: b.regime,
                name: b.name,
                q: b.q,
                m: b.m,
                k: b.k,
                alpha: b.alpha,
                entropy: b.entropy,
                epsilon: b.eps,
                subset_size: b.subset_size,
            };
            print_values(&runners::bound_query(&query)?, cli.units, b.q);
            true
        }
        Command::Entropy(e) => {
            match (&e.probs, &e.config) {
                (Some(probs), _) => print_values(&runners::entropy_query(probs, e.q, &e.alpha)?, cli.units, e.q),
                (None, Some(path)) => {
                    let cfg = ExperimentConfig::load(path)?;
                    let family = cfg.family.build()?;
                    let source = cfg.source.build(family.field())?;
                    print_values(&runners::source_entropy(&source, &e.alpha)?, cli.units, family.q());
                }
                (None, None) => unreachable!("clap requires one input"),
            }
            true
        }
        Command::Verify(c) => {
            let cfg = ExperimentConfig::load(&c.config)?;
            let report = runners::verify(&cfg, settings(&cli, &cfg)?)?;
            let target = cli.out.clone().or_else(|| cfg.output.report.as_ref().map(PathBuf::from));
            if target.as_deref() != Some(Path::new("-")) {
                print!("{}", summarize(&report, cli.units));
            }
            if let Some(path) = target {
                write_to(&path, &report.to_json()?)?;
            }
            if let Some(reason) = &report.aborted {
                eprintln!("aborted: {reason}");
            }
            report.passed
        }
        Command::Bucket(c) => {
            let cfg = ExperimentConfig::load(&c.config)?;
            if cfg.bucket.is_none() {
                bail!("config has no `bucket` section");
            }
            let rows = runners::bucket_rows(&cfg, settings(&cli, &cfg)?)?;
            let mut buf = Vec::new();
            runners::write_bucket_csv(&rows, &mut buf)?;
            write_to(&csv_target(&cli, &cfg), std::str::from_utf8(&buf)?)?;
            !rows.iter().any(|r| r.counts_as_failure())
        }
        Command::Sweep(c) => {
            let cfg = ExperimentConfig::load(&c.config)?;
            let outcome = runners::sweep(&cfg, settings(&cli, &cfg)?)?;
            let mut buf = Vec::new();
            runners::write_sweep_csv(&outcome.rows, &mut buf)?;
            write_to(&csv_target(&cli, &cfg), std::str::from_utf8(&buf)?)?;
            for (m, l) in &outcome.failed_certification {
                eprintln!("m = {m}: family is not {l}-universal");
            }
            outcome.passed()
        }
    };
    if matches!(cli.command, Command::Verify(_) | Command::Bucket(_) | Command::Sweep(_)) {
        eprintln!("elapsed: {:.3} s", started.elapsed().as_secs_f64());
    }
    Ok(passed)
}
