//! Thin command-line front end over [`annealearn::harness`].

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use annealearn::harness::{self, ExperimentConfig, ExperimentKind};
use annealearn::schedule::TrainableMask;
use annealearn::states::{PathFamily, PathSpec};

#[derive(Parser)]
#[command(
    name = "annealearn",
    version,
    about = "Learn Hamiltonian schedules that anneal qubit registers into entangled states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct RunArgs {
    /// JSON experiment config; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config's rng_seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum training epochs (overrides the config's training.max_epochs).
    #[arg(long)]
    epochs: Option<usize>,
    /// Qubit count (overrides the config's n).
    #[arg(long)]
    n: Option<usize>,
    /// Suppress logging and the summary printout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Train annealing schedules from the start state to the target.
    Train(RunArgs),
    /// Chain trainings across system sizes, seeding each from the previous.
    Bootstrap {
        #[command(flatten)]
        args: RunArgs,
        /// First size of the chain.
        #[arg(long)]
        n_start: Option<usize>,
    },
    /// Sweep a broken-path family, bootstrapping along the path parameter.
    Path {
        #[command(flatten)]
        args: RunArgs,
        /// Path family: y, y-prime, x, x-prime, v, v-prime, v3.
        #[arg(long)]
        family: Option<String>,
    },
    /// Noise-robustness Monte Carlo under fixed trained schedules.
    Noise {
        #[command(flatten)]
        args: RunArgs,
        /// Trained schedule CSV (with its JSON sidecar) to evolve under.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Total Monte Carlo samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Train through the single monotone annealing parameter.
    Monotone(RunArgs),
    /// Summarize run manifests under a directory.
    Report { dir: PathBuf },
}

fn base_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, annealearn::Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_json_file(path)?;
            if cfg.kind != kind {
                return Err(annealearn::Error::InvalidConfig(vec![format!(
                    "config kind `{}` does not match the `{kind}` command",
                    cfg.kind
                )]));
            }
            cfg
        }
        None => {
            let out = args
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("runs/{kind}")));
            ExperimentConfig::new(kind, out)
        }
    };
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.rng_seed = seed;
    }
    if let Some(epochs) = args.epochs {
        cfg.training.max_epochs = epochs;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    Ok(cfg)
}

fn build_config(command: &Command) -> Result<ExperimentConfig, annealearn::Error> {
    match command {
        Command::Train(args) => base_config(ExperimentKind::AnnealTrain, args),
        Command::Bootstrap { args, n_start } => {
            let mut cfg = base_config(ExperimentKind::SizeBootstrap, args)?;
            if args.config.is_none() && args.n.is_none() {
                cfg.n = 4;
            }
            if let Some(n_start) = n_start {
                cfg.n_start = *n_start;
            }
            Ok(cfg)
        }
        Command::Path { args, family } => {
            let mut cfg = base_config(ExperimentKind::BrokenPath, args)?;
            if args.config.is_none() {
                cfg.training.trainable = TrainableMask::zeta_and_eps();
                cfg.training.max_epochs = 50;
                cfg.training.stop_rms = 0.01;
            }
            if let Some(name) = family {
                let family: PathFamily = serde_json::from_value(serde_json::Value::String(
                    name.clone(),
                ))
                .map_err(|_| {
                    annealearn::Error::InvalidConfig(vec![format!("unknown path family {name:?}")])
                })?;
                let n = family.required_qubits().unwrap_or(cfg.n);
                cfg.n = n;
                cfg.path = Some(PathSpec::with_default_grid(family, n));
            } else if cfg.path.is_none() {
                cfg.path = Some(PathSpec::with_default_grid(PathFamily::Y, 2));
                cfg.n = 2;
            }
            Ok(cfg)
        }
        Command::Noise { args, schedule, samples } => {
            let mut cfg = base_config(ExperimentKind::NoiseMc, args)?;
            if let Some(schedule) = schedule {
                cfg.seed_schedule_file = Some(schedule.clone());
            }
            if let Some(samples) = samples {
                let mut spec = cfg.noise.clone().unwrap_or_default();
                spec.samples = *samples;
                cfg.noise = Some(spec);
            }
            Ok(cfg)
        }
        Command::Monotone(args) => {
            let mut cfg = base_config(ExperimentKind::Monotone, args)?;
            if args.config.is_none() {
                cfg.training.max_epochs = 1000;
                cfg.training.stop_rms = 0.0;
            }
            Ok(cfg)
        }
        Command::Report { .. } => unreachable!("report is handled separately"),
    }
}

fn run(cli: Cli) -> Result<(), annealearn::Error> {
    if let Command::Report { dir } = &cli.command {
        print!("{}", harness::report(dir)?);
        return Ok(());
    }
    let quiet = match &cli.command {
        Command::Train(args) | Command::Monotone(args) => args.quiet,
        Command::Bootstrap { args, .. }
        | Command::Path { args, .. }
        | Command::Noise { args, .. } => args.quiet,
        Command::Report { .. } => false,
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .filter_level(if quiet {
            log::LevelFilter::Off
        } else {
            log::LevelFilter::Info
        })
        .init();
    let cfg = build_config(&cli.command)?;
    let summary = harness::run_experiment(&cfg)?;
    if !quiet {
        println!(
            "{} finished: outputs in {}",
            summary.kind,
            summary.output_dir.display()
        );
        for line in &summary.details {
            println!("  {line}");
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
            ExitCode::from(e.exit_code())
        }
    }
}
