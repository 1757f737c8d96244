use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};
use heatlaser::Execution;
use heatlaser_cli::config::{Config, DistributionConfig, Format};
use heatlaser_cli::{commands, CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "heatlaser", version, about = "Photon statistics of a thermally pumped laser")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format (overrides output.format).
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Worker threads; 1 runs sequentially. Defaults to the CPU count.
    #[arg(long, short, global = true)]
    jobs: Option<usize>,
    /// Fock truncation (overrides numerics.n_max).
    #[arg(long, global = true)]
    nmax: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic vs numerical photon statistics along an n_h sweep.
    Sweep,
    /// One sweep row at a single n_h.
    Point {
        /// Hot-bath occupation.
        #[arg(long)]
        nh: f64,
    },
    /// Photon distribution (and optionally the Wigner function) at one n_h.
    Distribution {
        /// Hot-bath occupation (overrides distribution.n_h).
        #[arg(long)]
        nh: Option<f64>,
        /// Also compute the Wigner function.
        #[arg(long)]
        wigner: bool,
    },
    /// Lasing thresholds in n_h and the zero-loss temperature condition.
    Thresholds,
}

fn load(cli: &Cli) -> CliResult<Config> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config(anyhow!("--config is required")))?;
    let mut cfg = Config::load(path)?;
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if cli.nmax.is_some() {
        cfg.numerics.n_max = cli.nmax;
    }
    if let Command::Distribution { nh, wigner } = cli.command {
        if nh.is_some() || wigner {
            let d = cfg.distribution.get_or_insert(DistributionConfig {
                n_h: 0.0,
                wigner: false,
                wigner_extent: 4.0,
                wigner_points: 101,
            });
            if let Some(nh) = nh {
                d.n_h = nh;
            }
            d.wigner |= wigner;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli, cfg: &Config, exec: Execution) -> CliResult<()> {
    match cli.command {
        Command::Sweep => commands::run_sweep(cfg, exec),
        Command::Point { nh } => commands::run_point(cfg, nh, exec),
        Command::Distribution { .. } => commands::run_distribution(cfg, exec),
        Command::Thresholds => commands::run_thresholds(cfg),
    }
}

#[cfg(feature = "parallel")]
fn run(cli: &Cli, cfg: &Config) -> CliResult<()> {
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs <= 1 {
        return execute(cli, cfg, Execution::Sequential);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Other(e.into()))?;
    pool.install(|| execute(cli, cfg, Execution::Parallel))
}

#[cfg(not(feature = "parallel"))]
fn run(cli: &Cli, cfg: &Config) -> CliResult<()> {
    if cli.jobs.is_some_and(|j| j > 1) {
        log::warn!("built without the `parallel` feature; running sequentially");
    }
    execute(cli, cfg, Execution::Sequential)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.jobs == Some(0) {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    match load(&cli).and_then(|cfg| run(&cli, &cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
