//! CSV and JSON writers for experiment outputs. All floats are printed with
//! 17 significant digits so re-parsing reproduces them bit for bit.

use std::io::Write;
use std::path::Path;

use crate::adjoint::{GammaResult, LossReport};
use crate::error::{Error, Result};
use crate::propagate::Trajectory;

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let file = std::fs::File::create(path)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    Ok(std::io::BufWriter::new(file))
}

fn finish(mut w: std::io::BufWriter<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

macro_rules! wln {
    ($w:expr, $path:expr, $($arg:tt)*) => {
        writeln!($w, $($arg)*).map_err(|e| Error::io(format!("writing {}", $path.display()), e))?
    };
}

/// `errors.csv`: epoch, rms, loss.
pub fn write_errors_csv(path: &Path, reports: &[LossReport]) -> Result<()> {
    let mut w = create(path)?;
    wln!(w, path, "epoch,rms,loss");
    for r in reports {
        wln!(w, path, "{},{:.16e},{:.16e}", r.epoch, r.rms, r.loss);
    }
    finish(w, path)
}

/// Step stride keeping the density-matrix series under about a million rows.
pub fn auto_stride(steps: usize, dim: usize) -> usize {
    (((steps + 1) * dim * dim + 999_999) / 1_000_000).max(1)
}

/// `rho_series.csv`: step, row, col, abs of the interaction-picture state.
pub fn write_rho_series_csv(path: &Path, traj: &Trajectory, stride: usize) -> Result<()> {
    let mut w = create(path)?;
    wln!(w, path, "step,row,col,abs");
    let dim = traj.n().dim();
    for k in recorded_steps(traj.len(), stride) {
        let rho_i = traj.rho_i_at(k)?;
        for row in 0..dim {
            for col in 0..dim {
                wln!(w, path, "{k},{row},{col},{:.16e}", rho_i[(row, col)].norm());
            }
        }
    }
    finish(w, path)
}

/// `spins.csv` in per-step form: step, qubit, mean_spin.
pub fn write_spins_step_csv(path: &Path, traj: &Trajectory, stride: usize) -> Result<()> {
    let mut w = create(path)?;
    wln!(w, path, "step,qubit,mean_spin");
    for k in recorded_steps(traj.len(), stride) {
        let rho_i = traj.rho_i_at(k)?;
        let spins = crate::states::spin_averages(&rho_i, traj.n())?;
        for (q, s) in spins.iter().enumerate() {
            wln!(w, path, "{k},{q},{:.16e}", s);
        }
    }
    finish(w, path)
}

/// `spins.csv` in per-gamma form: gamma, qubit, mean_spin at the trained
/// endpoint of every path value.
pub fn write_spins_gamma_csv(path: &Path, results: &[GammaResult]) -> Result<()> {
    let mut w = create(path)?;
    wln!(w, path, "gamma,qubit,mean_spin");
    for r in results {
        for (q, s) in r.spins.iter().enumerate() {
            wln!(w, path, "{:.16e},{q},{:.16e}", r.gamma, s);
        }
    }
    finish(w, path)
}

fn recorded_steps(steps: usize, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    let mut ks: Vec<usize> = (0..=steps).step_by(stride).collect();
    if *ks.last().unwrap() != steps {
        ks.push(steps);
    }
    ks
}

/// `s_w.csv`: the reconstructed monotone annealing function.
pub fn write_s_w_csv(path: &Path, m: &crate::schedule::MonotoneSchedule) -> Result<()> {
    let mut w = create(path)?;
    wln!(w, path, "step,time,s_w");
    for (k, v) in m.s_w_series().iter().enumerate() {
        wln!(w, path, "{k},{:.16e},{:.16e}", k as f64 * m.dt, v);
    }
    finish(w, path)
}

/// `noise_scatter.csv`: sample, nominal_magnitude, recorded_magnitude, rms_error.
pub fn write_noise_scatter_csv(
    path: &Path,
    report: &crate::harness::noise::NoiseReport,
) -> Result<()> {
    let mut w = create(path)?;
    wln!(w, path, "sample,nominal_magnitude,recorded_magnitude,rms_error");
    wln!(w, path, "-1,0.0,0.0,{:.16e}", report.reference_rms);
    for s in &report.samples {
        wln!(
            w,
            path,
            "{},{:.16e},{:.16e},{:.16e}",
            s.index,
            s.nominal,
            s.recorded,
            s.rms
        );
    }
    finish(w, path)
}

/// `noise_summary.csv`: per-magnitude aggregates.
pub fn write_noise_summary_csv(
    path: &Path,
    report: &crate::harness::noise::NoiseReport,
) -> Result<()> {
    let mut w = create(path)?;
    wln!(w, path, "nominal_magnitude,samples,mean_recorded,mean_rms,max_rms");
    for b in &report.summary {
        wln!(
            w,
            path,
            "{:.16e},{},{:.16e},{:.16e},{:.16e}",
            b.nominal,
            b.count,
            b.mean_recorded,
            b.mean_rms,
            b.max_rms
        );
    }
    finish(w, path)
}
