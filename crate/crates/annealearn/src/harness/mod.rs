//! Experiment orchestration: configuration ingestion, dispatch to the
//! training pipelines, and persistence of results.
//!
//! Every experiment writes into its own output directory: `errors.csv`
//! (epoch, rms, loss), the trained `schedule.csv` with its JSON sidecar,
//! `rho_series.csv` (interaction-picture magnitudes over time), `spins.csv`,
//! and a `manifest.json` echoing the resolved configuration so the run can
//! be reproduced without the original command line.

pub mod noise;
mod output;

pub use noise::{noise_mc, perturb_flat, NoiseMode, NoiseReport, NoiseSpec, RNG_ALGORITHM};

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adjoint::{
    bootstrap_gamma, bootstrap_size, train, train_monotone, InitPolicy, LossReport,
    TrainingConfig,
};
use crate::error::{Error, Result};
use crate::propagate::{run_forward, Trajectory};
use crate::qops::QubitCount;
use crate::schedule::{BetaRamp, MonotoneSchedule, ScheduleSet};
use crate::states::{flat_state, ghz_state, w_state, DensityMatrix, PathSpec, PureState};

/// The experiment families the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Train one system from its start state to the target.
    AnnealTrain,
    /// Chain trainings across sizes, seeding each from the previous.
    SizeBootstrap,
    /// Sweep a broken-path family, seeding each value from the previous.
    BrokenPath,
    /// Monte Carlo over noisy initial states under fixed trained schedules.
    NoiseMc,
    /// Constrained training through the single monotone annealing function.
    Monotone,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ExperimentKind::AnnealTrain => "anneal-train",
            ExperimentKind::SizeBootstrap => "size-bootstrap",
            ExperimentKind::BrokenPath => "broken-path",
            ExperimentKind::NoiseMc => "noise-mc",
            ExperimentKind::Monotone => "monotone",
        };
        f.write_str(name)
    }
}

/// Entangled target family for direct annealing runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetState {
    #[default]
    Ghz,
    W,
}

/// One experiment, fully described. Serialized as snake_case JSON; every
/// field except `kind` and `output_dir` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "defaults::n")]
    pub n: usize,
    /// Integration step; the step count is t_f / dt.
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    /// Initial tunneling amplitude of the fixed ramp.
    #[serde(default = "defaults::k0")]
    pub k0: f64,
    /// Fraction of the run after which the tunneling ramp is zero.
    #[serde(default = "defaults::ramp_end_fraction")]
    pub ramp_end_fraction: f64,
    #[serde(default)]
    pub ramp: BetaRamp,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub target: TargetState,
    /// Initial state: "flat" or "basis:<bitstring>".
    #[serde(default = "defaults::start")]
    pub start: String,
    #[serde(default)]
    pub path: Option<PathSpec>,
    /// First system size of a size-bootstrap chain.
    #[serde(default = "defaults::n_start")]
    pub n_start: usize,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    /// Trained schedule CSV to seed from (its JSON sidecar must sit next to it).
    #[serde(default)]
    pub seed_schedule_file: Option<PathBuf>,
    #[serde(default = "defaults::rng_seed")]
    pub rng_seed: u64,
    pub output_dir: PathBuf,
    /// Step stride for the density-matrix series; derived from the run size
    /// when absent.
    #[serde(default)]
    pub rho_series_stride: Option<usize>,
}

mod defaults {
    pub fn n() -> usize {
        2
    }
    pub fn dt() -> f64 {
        2.5
    }
    pub fn k0() -> f64 {
        1.5e-3
    }
    pub fn ramp_end_fraction() -> f64 {
        0.5
    }
    pub fn start() -> String {
        "flat".into()
    }
    pub fn n_start() -> usize {
        2
    }
    pub fn rng_seed() -> u64 {
        1
    }
}

impl ExperimentConfig {
    /// A ready-to-run config with the standard hyperparameters.
    pub fn new(kind: ExperimentKind, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            kind,
            n: defaults::n(),
            dt: defaults::dt(),
            k0: defaults::k0(),
            ramp_end_fraction: defaults::ramp_end_fraction(),
            ramp: BetaRamp::default(),
            training: TrainingConfig::default(),
            target: TargetState::default(),
            start: defaults::start(),
            path: None,
            n_start: defaults::n_start(),
            noise: None,
            seed_schedule_file: None,
            rng_seed: defaults::rng_seed(),
            output_dir: output_dir.into(),
            rho_series_stride: None,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(vec![format!(
            "{}: {e}",
            path.display()
        )]))
    }

    /// Number of integration steps implied by the ramp span and dt.
    pub fn timesteps(&self) -> usize {
        (self.ramp.t_f / self.dt).round() as usize
    }

    /// Collect every violation instead of stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if QubitCount::new(self.n).is_err() {
            problems.push(format!("n = {} outside 1..=8", self.n));
        }
        if !(self.dt > 0.0) {
            problems.push(format!("dt = {} must be positive", self.dt));
        }
        if let Err(e) = self.ramp.validate() {
            problems.push(e.to_string());
        }
        if self.dt > 0.0 && self.ramp.t_f > 0.0 {
            let steps = self.ramp.t_f / self.dt;
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                problems.push(format!(
                    "t_f = {} is not an integer multiple of dt = {}",
                    self.ramp.t_f, self.dt
                ));
            } else if (steps.round() as usize) < 2 {
                problems.push("schedule needs at least 2 steps".into());
            }
        }
        if !(self.k0 > 0.0) {
            problems.push(format!("k0 = {} must be positive", self.k0));
        }
        if !(0.0 < self.ramp_end_fraction && self.ramp_end_fraction <= 1.0) {
            problems.push(format!(
                "ramp_end_fraction = {} outside (0, 1]",
                self.ramp_end_fraction
            ));
        }
        if let Err(e) = self.training.validate() {
            problems.push(e.to_string());
        }
        if let Err(e) = parse_start(&self.start, self.n) {
            problems.push(e.to_string());
        }
        if self.n < 2 && !matches!(self.kind, ExperimentKind::AnnealTrain) {
            problems.push("multi-qubit experiment kinds need n >= 2".into());
        }
        if self.target == TargetState::Ghz || self.target == TargetState::W {
            if self.n < 2 {
                problems.push("GHZ/W targets need n >= 2".into());
            }
        }
        if self.training.trainable.kk && self.kind != ExperimentKind::Monotone {
            problems.push(
                "per-step tunneling training is only available in the monotone kind".into(),
            );
        }
        match self.kind {
            ExperimentKind::BrokenPath => match &self.path {
                None => problems.push("broken-path runs need a `path`".into()),
                Some(p) => {
                    if let Err(e) = p.validate() {
                        problems.push(e.to_string());
                    } else if p.n != self.n {
                        problems.push(format!(
                            "path is for {} qubits but n = {}",
                            p.n, self.n
                        ));
                    }
                }
            },
            ExperimentKind::NoiseMc => {
                if self.seed_schedule_file.is_none() {
                    problems.push(
                        "noise-mc needs `seed_schedule_file` pointing at trained schedules".into(),
                    );
                }
                if let Some(spec) = &self.noise {
                    if let Err(e) = spec.validate() {
                        problems.push(e.to_string());
                    }
                }
            }
            ExperimentKind::SizeBootstrap => {
                if self.n_start < 2 {
                    problems.push(format!("n_start = {} must be >= 2", self.n_start));
                }
                if self.n <= self.n_start {
                    problems.push(format!(
                        "size bootstrap needs n (= {}) > n_start (= {})",
                        self.n, self.n_start
                    ));
                }
            }
            ExperimentKind::Monotone => {
                if self.training.init_policy == InitPolicy::SeedSchedule {
                    problems.push("monotone runs always start from the uniform ramp".into());
                }
            }
            ExperimentKind::AnnealTrain => {}
        }
        if self.training.init_policy == InitPolicy::SeedSchedule
            && self.seed_schedule_file.is_none()
            && self.kind != ExperimentKind::NoiseMc
        {
            problems.push("init_policy seed-schedule needs `seed_schedule_file`".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

fn parse_start(start: &str, n: usize) -> Result<StartKind> {
    if start == "flat" {
        return Ok(StartKind::Flat);
    }
    if let Some(bits) = start.strip_prefix("basis:") {
        if bits.len() != n || bits.chars().any(|c| c != '0' && c != '1') {
            return Err(Error::Argument(format!(
                "start {start:?} needs exactly {n} binary digits after `basis:`"
            )));
        }
        let index = usize::from_str_radix(bits, 2).expect("validated binary");
        return Ok(StartKind::Basis(index));
    }
    Err(Error::Argument(format!(
        "start {start:?} must be \"flat\" or \"basis:<bitstring>\""
    )))
}

enum StartKind {
    Flat,
    Basis(usize),
}

/// What one experiment produced, for printing and tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub kind: ExperimentKind,
    pub output_dir: PathBuf,
    pub epochs: usize,
    pub final_rms: Option<f64>,
    /// One printable line per sub-run (size level, path value, ..).
    pub details: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    crate_version: String,
    rng_algorithm: String,
    wall_time_s: f64,
    config: ExperimentConfig,
    result: serde_json::Value,
}

fn write_manifest(dir: &Path, cfg: &ExperimentConfig, started: Instant, result: serde_json::Value) -> Result<()> {
    let manifest = Manifest {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        config: cfg.clone(),
        result,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn prepare_output_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::io(format!("creating output dir {}", dir.display()), e))?;
    // Probe writability up front so failed runs leave no partial files.
    let probe = dir.join(".write_probe");
    std::fs::write(&probe, b"ok")
        .map_err(|e| Error::io(format!("output dir {} not writable", dir.display()), e))?;
    std::fs::remove_file(&probe)
        .map_err(|e| Error::io(format!("output dir {} not writable", dir.display()), e))?;
    Ok(())
}

fn start_state(cfg: &ExperimentConfig, n: QubitCount) -> Result<DensityMatrix> {
    match parse_start(&cfg.start, n.get())? {
        StartKind::Flat => Ok(flat_state(n)),
        StartKind::Basis(index) => Ok(PureState::basis(n, index)?.density()),
    }
}

fn target_state(cfg: &ExperimentConfig, n: QubitCount) -> Result<DensityMatrix> {
    match cfg.target {
        TargetState::Ghz => ghz_state(n),
        TargetState::W => w_state(n),
    }
}

fn initial_schedule(cfg: &ExperimentConfig, n: QubitCount) -> Result<ScheduleSet> {
    let timesteps = cfg.timesteps();
    let mut s = match cfg.training.init_policy {
        InitPolicy::Zeros => {
            ScheduleSet::annealing_init(n, timesteps, cfg.dt, cfg.k0, cfg.ramp_end_fraction)?
        }
        InitPolicy::SeedSchedule => {
            let path = cfg
                .seed_schedule_file
                .as_ref()
                .ok_or_else(|| Error::Argument("seed schedule file missing".into()))?;
            let s = ScheduleSet::read_csv(path)?;
            if s.n() != n || s.timesteps() != timesteps || s.dt() != cfg.dt {
                return Err(Error::Argument(format!(
                    "seed schedule shape ({} qubits, {} steps, dt {}) does not match \
                     the config ({n} qubits, {timesteps} steps, dt {})",
                    s.n(),
                    s.timesteps(),
                    s.dt(),
                    cfg.dt,
                )));
            }
            s
        }
    };
    s.set_trainable(cfg.training.trainable);
    Ok(s)
}

/// Write the standard per-run file set for one trained schedule.
fn write_training_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    reports: &[LossReport],
    trained: &ScheduleSet,
    traj: &Trajectory,
) -> Result<f64> {
    output::write_errors_csv(&dir.join("errors.csv"), reports)?;
    trained.write_csv(&dir.join("schedule.csv"))?;
    let stride = cfg
        .rho_series_stride
        .unwrap_or_else(|| output::auto_stride(traj.len(), traj.n().dim()));
    output::write_rho_series_csv(&dir.join("rho_series.csv"), traj, stride)?;
    output::write_spins_step_csv(&dir.join("spins.csv"), traj, stride)?;
    traj.final_hermiticity_defect()
}

/// Run one experiment end to end, writing all outputs under
/// `cfg.output_dir`. Fully deterministic for a fixed config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    prepare_output_dir(&cfg.output_dir)?;
    let started = Instant::now();
    match cfg.kind {
        ExperimentKind::AnnealTrain => run_anneal_train(cfg, started),
        ExperimentKind::SizeBootstrap => run_size_bootstrap(cfg, started),
        ExperimentKind::BrokenPath => run_broken_path(cfg, started),
        ExperimentKind::NoiseMc => run_noise_mc(cfg, started),
        ExperimentKind::Monotone => run_monotone(cfg, started),
    }
}

fn run_anneal_train(cfg: &ExperimentConfig, started: Instant) -> Result<RunSummary> {
    let n = QubitCount::new(cfg.n)?;
    let rho0 = start_state(cfg, n)?;
    let rho_des = target_state(cfg, n)?;
    let s0 = initial_schedule(cfg, n)?;
    let (trained, reports) = train(&cfg.training, &s0, &cfg.ramp, &rho0, &rho_des)?;
    let traj = run_forward(&rho0, &trained, &cfg.ramp)?;
    let defect = write_training_outputs(&cfg.output_dir, cfg, &reports, &trained, &traj)?;
    let last = reports.last().expect("at least one epoch");
    write_manifest(
        &cfg.output_dir,
        cfg,
        started,
        serde_json::json!({
            "epochs_run": reports.len(),
            "final_rms": last.rms,
            "final_loss": last.loss,
            "final_hermiticity_defect": defect,
        }),
    )?;
    Ok(RunSummary {
        kind: cfg.kind,
        output_dir: cfg.output_dir.clone(),
        epochs: reports.len(),
        final_rms: Some(last.rms),
        details: vec![format!(
            "n={} epochs={} final_rms={:.6e}",
            cfg.n,
            reports.len(),
            last.rms
        )],
    })
}

fn run_size_bootstrap(cfg: &ExperimentConfig, started: Instant) -> Result<RunSummary> {
    let mut details = Vec::new();
    let mut levels = Vec::new();
    let mut prev: Option<ScheduleSet> = None;
    let mut last_rms = None;
    let mut last_epochs = 0;
    for size in cfg.n_start..=cfg.n {
        let n = QubitCount::new(size)?;
        let rho_des = target_state(cfg, n)?;
        let (trained, reports) = match &prev {
            None => {
                let s0 = initial_schedule(cfg, n)?;
                let rho0 = flat_state(n);
                train(&cfg.training, &s0, &cfg.ramp, &rho0, &rho_des)?
            }
            Some(seed) => bootstrap_size(seed, n, &cfg.training, &cfg.ramp, &rho_des)?,
        };
        let level_dir = cfg.output_dir.join(format!("n{size}"));
        prepare_output_dir(&level_dir)?;
        let rho0 = flat_state(n);
        let traj = run_forward(&rho0, &trained, &cfg.ramp)?;
        write_training_outputs(&level_dir, cfg, &reports, &trained, &traj)?;
        let first = reports.first().expect("at least one epoch");
        let last = reports.last().expect("at least one epoch");
        details.push(format!(
            "n={size} epochs={} initial_rms={:.6e} final_rms={:.6e}",
            reports.len(),
            first.rms,
            last.rms
        ));
        levels.push(serde_json::json!({
            "n": size,
            "epochs_run": reports.len(),
            "initial_rms": first.rms,
            "initial_loss": first.loss,
            "final_rms": last.rms,
        }));
        last_rms = Some(last.rms);
        last_epochs = reports.len();
        prev = Some(trained);
    }
    write_manifest(&cfg.output_dir, cfg, started, serde_json::json!({ "levels": levels }))?;
    Ok(RunSummary {
        kind: cfg.kind,
        output_dir: cfg.output_dir.clone(),
        epochs: last_epochs,
        final_rms: last_rms,
        details,
    })
}

fn run_broken_path(cfg: &ExperimentConfig, started: Instant) -> Result<RunSummary> {
    let path = cfg.path.as_ref().expect("validated");
    let n = QubitCount::new(cfg.n)?;
    let s0 = initial_schedule(cfg, n)?;
    let results = bootstrap_gamma(path, &cfg.training, &s0, &cfg.ramp)?;
    let mut details = Vec::new();
    let mut gammas = Vec::new();
    for r in &results {
        let sub = cfg.output_dir.join(format!("gamma_{:.4}", r.gamma));
        prepare_output_dir(&sub)?;
        output::write_errors_csv(&sub.join("errors.csv"), &r.reports)?;
        r.schedules.write_csv(&sub.join("schedule.csv"))?;
        details.push(format!(
            "gamma={:.2} epochs={} final_rms={:.6e}",
            r.gamma,
            r.reports.len(),
            r.final_rms
        ));
        gammas.push(serde_json::json!({
            "gamma": r.gamma,
            "epochs_run": r.reports.len(),
            "final_rms": r.final_rms,
            "spins": r.spins,
        }));
    }
    output::write_spins_gamma_csv(&cfg.output_dir.join("spins.csv"), &results)?;
    // The sweep's error series, one row per (gamma, epoch), lands in one file.
    let flattened: Vec<LossReport> = results.iter().flat_map(|r| r.reports.clone()).collect();
    output::write_errors_csv(&cfg.output_dir.join("errors.csv"), &flattened)?;
    write_manifest(
        &cfg.output_dir,
        cfg,
        started,
        serde_json::json!({ "family": path.family.to_string(), "gammas": gammas }),
    )?;
    let last = results.last().expect("grid is non-empty");
    Ok(RunSummary {
        kind: cfg.kind,
        output_dir: cfg.output_dir.clone(),
        epochs: results.iter().map(|r| r.reports.len()).sum(),
        final_rms: Some(last.final_rms),
        details,
    })
}

fn run_noise_mc(cfg: &ExperimentConfig, started: Instant) -> Result<RunSummary> {
    let n = QubitCount::new(cfg.n)?;
    let rho_des = target_state(cfg, n)?;
    let schedule_path = cfg.seed_schedule_file.as_ref().expect("validated");
    let trained = ScheduleSet::read_csv(schedule_path)?;
    if trained.n() != n {
        return Err(Error::Argument(format!(
            "trained schedule is for {} qubits, config says {}",
            trained.n(),
            cfg.n
        )));
    }
    let spec = cfg.noise.clone().unwrap_or_default();
    let report = noise_mc(&spec, &trained, &cfg.ramp, &rho_des, cfg.rng_seed)?;
    output::write_noise_scatter_csv(&cfg.output_dir.join("noise_scatter.csv"), &report)?;
    output::write_noise_summary_csv(&cfg.output_dir.join("noise_summary.csv"), &report)?;
    write_manifest(
        &cfg.output_dir,
        cfg,
        started,
        serde_json::json!({
            "reference_rms": report.reference_rms,
            "slope": report.slope,
            "intercept": report.intercept,
            "samples_requested": spec.samples,
            "samples_written": report.samples.len(),
            "excluded": report.excluded.len(),
        }),
    )?;
    Ok(RunSummary {
        kind: cfg.kind,
        output_dir: cfg.output_dir.clone(),
        epochs: 0,
        final_rms: Some(report.reference_rms),
        details: vec![format!(
            "samples={} excluded={} slope={:.4} reference_rms={:.6e}",
            report.samples.len(),
            report.excluded.len(),
            report.slope,
            report.reference_rms
        )],
    })
}

fn run_monotone(cfg: &ExperimentConfig, started: Instant) -> Result<RunSummary> {
    let n = QubitCount::new(cfg.n)?;
    let rho0 = start_state(cfg, n)?;
    let rho_des = target_state(cfg, n)?;
    let m0 = MonotoneSchedule::uniform_init(n, cfg.timesteps(), cfg.dt)?;
    let (trained, reports) =
        train_monotone(&cfg.training, &m0, cfg.k0, &cfg.ramp, &rho0, &rho_des)?;
    let expanded = trained.expand(cfg.k0)?;
    let traj = run_forward(&rho0, &expanded, &cfg.ramp)?;
    let defect = write_training_outputs(&cfg.output_dir, cfg, &reports, &expanded, &traj)?;
    output::write_s_w_csv(&cfg.output_dir.join("s_w.csv"), &trained)?;
    let last = reports.last().expect("at least one epoch");
    write_manifest(
        &cfg.output_dir,
        cfg,
        started,
        serde_json::json!({
            "epochs_run": reports.len(),
            "final_rms": last.rms,
            "final_loss": last.loss,
            "final_hermiticity_defect": defect,
            "zeta_end": trained.zeta_end,
            "eps_end": trained.eps_end,
        }),
    )?;
    Ok(RunSummary {
        kind: cfg.kind,
        output_dir: cfg.output_dir.clone(),
        epochs: reports.len(),
        final_rms: Some(last.rms),
        details: vec![format!(
            "n={} epochs={} final_rms={:.6e}",
            cfg.n,
            reports.len(),
            last.rms
        )],
    })
}

/// Render a summary table from the manifests under `dir` (the directory
/// itself plus one level of subdirectories).
pub fn report(dir: &Path) -> Result<String> {
    let mut rows = Vec::new();
    let mut consider = vec![dir.to_path_buf()];
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Error::io(format!("reading {}", dir.display()), e))?;
    for entry in entries.flatten() {
        if entry.path().is_dir() {
            consider.push(entry.path());
        }
    }
    consider.sort();
    for d in consider {
        let path = d.join("manifest.json");
        if !path.exists() {
            continue;
        }
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
            file: path.display().to_string(),
            detail: e.to_string(),
        })?;
        let final_rms = manifest
            .result
            .get("final_rms")
            .or_else(|| manifest.result.get("reference_rms"))
            .and_then(|v| v.as_f64())
            .map(|v| format!("{v:.6e}"))
            .unwrap_or_else(|| "-".into());
        let epochs = manifest
            .result
            .get("epochs_run")
            .and_then(|v| v.as_u64())
            .map(|v| v.to_string())
            .unwrap_or_else(|| "-".into());
        rows.push((
            d.display().to_string(),
            manifest.config.kind.to_string(),
            manifest.config.n.to_string(),
            epochs,
            final_rms,
            format!("{:.1}", manifest.wall_time_s),
        ));
    }
    if rows.is_empty() {
        return Ok(format!("no manifests found under {}\n", dir.display()));
    }
    let header = ("directory", "kind", "n", "epochs", "final_rms", "wall_s");
    let width0 = rows
        .iter()
        .map(|r| r.0.len())
        .chain([header.0.len()])
        .max()
        .unwrap();
    let mut out = String::new();
    out.push_str(&format!(
        "{:w0$}  {:14} {:>2} {:>7} {:>13} {:>7}\n",
        header.0,
        header.1,
        header.2,
        header.3,
        header.4,
        header.5,
        w0 = width0
    ));
    for r in rows {
        out.push_str(&format!(
            "{:w0$}  {:14} {:>2} {:>7} {:>13} {:>7}\n",
            r.0,
            r.1,
            r.2,
            r.3,
            r.4,
            r.5,
            w0 = width0
        ));
    }
    Ok(out)
}
