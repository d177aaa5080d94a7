use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

mod config;
mod run;

use config::ExperimentConfig;
use run::RunError;

/// Convex envelopes, relaxed minimization and constructive minimizing
/// sequences for discontinuous Lagrangians.
#[derive(Debug, Parser)]
#[command(name = "relaxforge", version)]
struct Cli {
    /// Worker threads for patch construction (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full experiment: envelope, relaxed minimum, minimizing sequence, gap.
    Run {
        configs: Vec<PathBuf>,
        /// Configs processed concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Writes `envelope.csv` only.
    Envelope { config: PathBuf },
    /// Audits the growth bound and witness existence over the sample grid.
    Check { config: PathBuf },
}

fn load(path: &PathBuf, out: &Option<PathBuf>) -> Result<ExperimentConfig, RunError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Ok(seed) = std::env::var("RELAXFORGE_SEED") {
        cfg.seed = seed
            .trim()
            .parse()
            .map_err(|_| RunError::Input(format!("RELAXFORGE_SEED={seed:?} is not an unsigned integer")))?;
    }
    if let Some(dir) = out {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn report(path: &PathBuf, result: Result<String, RunError>) -> u8 {
    match result {
        Ok(line) => {
            println!("{}: {line}", path.display());
            0
        }
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            e.exit_code()
        }
    }
}

fn run_one(path: &PathBuf, out: &Option<PathBuf>) -> u8 {
    let result = load(path, out).and_then(|cfg| run::run(&cfg)).map(|r| {
        format!("min F** = {}, best F = {}, gap = {}, certified", r.min_relaxed, r.best_f, r.gap)
    });
    report(path, result)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot start {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let code = match &cli.command {
        Command::Run { configs, jobs } => {
            if configs.is_empty() {
                eprintln!("no config given");
                return ExitCode::from(1);
            }
            if cli.out.is_some() && configs.len() > 1 {
                eprintln!("--out needs a single config");
                return ExitCode::from(1);
            }
            let next = AtomicUsize::new(0);
            let worst = Mutex::new(0u8);
            std::thread::scope(|s| {
                for _ in 0..(*jobs).clamp(1, configs.len()) {
                    s.spawn(|| loop {
                        let i = next.fetch_add(1, Ordering::SeqCst);
                        let Some(path) = configs.get(i) else { break };
                        let code = run_one(path, &cli.out);
                        let mut w = worst.lock().unwrap();
                        *w = (*w).max(code);
                    });
                }
            });
            worst.into_inner().unwrap()
        }
        Command::Envelope { config } => {
            let result = load(config, &cli.out).and_then(|cfg| {
                run::envelope(&cfg)?;
                Ok(format!("wrote {}", cfg.output_dir.join("envelope.csv").display()))
            });
            report(config, result)
        }
        Command::Check { config } => {
            let result = load(config, &cli.out).and_then(|cfg| run::check(&cfg)).map(|a| {
                let mut line = format!(
                    "{} gradients, {} in contact, all with witnesses; minorant {}",
                    a.queries,
                    a.contact,
                    if a.superlinear { "superlinear" } else { "linear" }
                );
                if let Some(r) = a.simplex_radius {
                    line.push_str(&format!("; contact simplex encloses radius {r}"));
                }
                line
            });
            report(config, result)
        }
    };
    ExitCode::from(code)
}
