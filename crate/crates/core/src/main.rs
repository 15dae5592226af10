use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eulerlab::harness::{self, ExperimentConfig, EXIT_ASSERTION, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "eulerlab", version, about = "2D Euler / Navier-Stokes experiments on the torus")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, from a config file or by name with its defaults.
    Run {
        /// Experiment name; ignored when --config is given.
        experiment: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (default: the config's `out`, else runs/<experiment>).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-run the golden suite and compare against stored outputs.
    Verify { golden_dir: PathBuf },
    /// List the available experiments.
    ListExperiments,
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn load(experiment: Option<String>, config: Option<PathBuf>, seed: Option<u64>) -> eulerlab::Result<ExperimentConfig> {
    let mut cfg = match (config, experiment) {
        (Some(path), _) => ExperimentConfig::load(&path)?,
        (None, Some(name)) => harness::default_config(&name)?,
        (None, None) => return Err(eulerlab::Error::Config("give an experiment name or --config".into())),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::error!("cannot configure thread pool: {e}");
            return code(EXIT_CONFIG);
        }
        #[cfg(not(feature = "parallel"))]
        log::warn!("built without the parallel feature; ignoring --threads {n}");
    }
    match cli.command {
        Command::ListExperiments => {
            for e in harness::EXPERIMENTS {
                println!("{:<30} {}", e.name, e.about);
            }
            ExitCode::SUCCESS
        }
        Command::Run { experiment, config, out, seed } => {
            let cfg = match load(experiment, config, seed) {
                Ok(c) => c,
                Err(e) => {
                    log::error!("{e}");
                    return code(EXIT_CONFIG);
                }
            };
            let dir = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("runs").join(&cfg.experiment));
            let manifest = harness::cmd_run(&cfg, &dir);
            for c in &manifest.checks {
                println!("{} {} = {:.6e} (limit {:.6e})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.value, c.limit);
            }
            println!("{} -> {} in {:.1}s, exit {}", cfg.experiment, dir.display(), manifest.wall_clock_seconds, manifest.exit_code);
            code(manifest.exit_code)
        }
        Command::Verify { golden_dir } => match harness::cmd_verify(&golden_dir) {
            Ok(report) => {
                print!("{report}");
                if report.passed() {
                    ExitCode::SUCCESS
                } else {
                    code(EXIT_ASSERTION)
                }
            }
            Err(e) => {
                log::error!("{e}");
                code(EXIT_CONFIG)
            }
        },
    }
}
