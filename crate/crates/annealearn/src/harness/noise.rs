//! Noise-robustness Monte Carlo: perturbed initial states evolved under
//! fixed trained schedules.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagate::Propagator;
use crate::qops::{frobenius_distance, C64, CMat, QubitCount};
use crate::schedule::{BetaRamp, ScheduleSet};
use crate::states::{flat_state, DensityMatrix};

/// Name of the RNG recorded in manifests; `ChaCha12Rng` is seedable and
/// produces the same stream on every platform.
pub const RNG_ALGORITHM: &str = "chacha12";

/// How initial-state noise is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Independent complex Gaussian per matrix entry, then Hermitization
    /// and trace rescaling.
    #[default]
    ComplexEntrywise,
}

/// Monte Carlo settings for the noise study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub samples: usize,
    /// Nominal noise magnitudes; samples cycle through this list.
    pub magnitudes: Vec<f64>,
    pub mode: NoiseMode,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            samples: 1000,
            magnitudes: (1..=8).map(|k| 0.025 * k as f64).collect(),
            mode: NoiseMode::ComplexEntrywise,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Argument("noise spec needs at least one sample".into()));
        }
        if self.magnitudes.is_empty() || self.magnitudes.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Argument("noise magnitudes must be positive".into()));
        }
        Ok(())
    }
}

/// The flat state with independent complex Gaussian perturbations on every
/// entry, Hermitized ((M + M^dagger)/2) and rescaled to unit trace.
///
/// `magnitude` sets the scale of the raw draw; the meaningful size of a
/// sample is its recorded magnitude ||rho - rho_flat||_F / ||rho_flat||_F,
/// which callers measure on the returned state (the flat state has unit
/// Frobenius norm, so this is just the Frobenius distance).
pub fn perturb_flat(
    n: QubitCount,
    magnitude: f64,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    if magnitude < 0.0 {
        return Err(Error::Argument(format!("noise magnitude {magnitude} < 0")));
    }
    let flat = flat_state(n);
    if magnitude == 0.0 {
        return Ok(flat);
    }
    let dim = n.dim();
    // Per-component std such that the raw perturbation's expected Frobenius
    // norm equals `magnitude`.
    let sigma = magnitude / (dim as f64 * std::f64::consts::SQRT_2);
    let mut m = flat.into_matrix();
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = sample_standard_normal(rng);
            let im: f64 = sample_standard_normal(rng);
            m[(i, j)] += C64::new(sigma * re, sigma * im);
        }
    }
    let m = crate::qops::hermitian_part(&m);
    let trace = m.trace().re;
    if trace <= 0.0 {
        return Err(Error::RejectedSample(format!(
            "perturbed trace {trace:.3e} is not positive"
        )));
    }
    let m = m.map(|x| x / C64::new(trace, 0.0));
    DensityMatrix::new(n, m)
}

/// Box-Muller standard normal; keeps the draw sequence identical across
/// platforms for a given RNG stream.
fn sample_standard_normal(rng: &mut impl Rng) -> f64 {
    loop {
        let u1: f64 = rng.gen::<f64>();
        let u2: f64 = rng.gen::<f64>();
        if u1 > f64::MIN_POSITIVE {
            return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
    }
}

/// One accepted Monte Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSample {
    pub index: usize,
    pub nominal: f64,
    /// Measured relative Frobenius size of the realized perturbation.
    pub recorded: f64,
    /// Final rms error against the target under the fixed schedules.
    pub rms: f64,
}

/// Per-magnitude aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeSummary {
    pub nominal: f64,
    pub count: usize,
    pub mean_recorded: f64,
    pub mean_rms: f64,
    pub max_rms: f64,
}

/// Full Monte Carlo outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseReport {
    /// Final rms of the unperturbed flat state; must match the training
    /// run's final error since the schedules and integrator are identical.
    pub reference_rms: f64,
    pub samples: Vec<NoiseSample>,
    pub summary: Vec<MagnitudeSummary>,
    /// Least-squares slope of max rms error against mean recorded magnitude.
    pub slope: f64,
    pub intercept: f64,
    /// Samples dropped because the forward run failed, with reasons.
    pub excluded: Vec<(usize, String)>,
}

/// Evolve `spec.samples` perturbed flat states under the fixed trained
/// schedules and aggregate the final errors by noise magnitude.
///
/// Sample `i` draws from an independent RNG stream derived from
/// (`rng_seed`, `i`), so results are identical no matter how the work is
/// scheduled across threads.
pub fn noise_mc(
    spec: &NoiseSpec,
    trained: &ScheduleSet,
    ramp: &BetaRamp,
    rho_des: &DensityMatrix,
    rng_seed: u64,
) -> Result<NoiseReport> {
    spec.validate()?;
    let n = trained.n();
    if rho_des.n() != n {
        return Err(Error::Argument("target dimension mismatch".into()));
    }
    let propagator = Propagator::compile(trained)?;
    let flat_mat: CMat = flat_state(n).into_matrix();

    let reference_rms = {
        let traj = propagator.run(&flat_state(n), ramp)?;
        let rho_i = traj.final_rho_i()?;
        crate::propagate::rms_error(&rho_i, rho_des.matrix())?
    };

    let outcomes: Vec<std::result::Result<NoiseSample, (usize, String)>> = (0..spec.samples)
        .into_par_iter()
        .map(|i| {
            let nominal = spec.magnitudes[i % spec.magnitudes.len()];
            let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
            rng.set_stream(i as u64 + 1);
            let mut state = None;
            for _ in 0..100 {
                match perturb_flat(n, nominal, &mut rng) {
                    Ok(dm) => {
                        state = Some(dm);
                        break;
                    }
                    Err(Error::RejectedSample(_)) => continue,
                    Err(e) => return Err((i, e.to_string())),
                }
            }
            let Some(state) = state else {
                return Err((i, "rejected 100 consecutive draws".into()));
            };
            let recorded = frobenius_distance(state.matrix(), &flat_mat)
                .expect("same dimensions");
            match propagator.run(&state, ramp).and_then(|traj| traj.final_rho_i()) {
                Ok(rho_i) => {
                    let rms = crate::propagate::rms_error(&rho_i, rho_des.matrix())
                        .expect("same dimensions");
                    Ok(NoiseSample { index: i, nominal, recorded, rms })
                }
                Err(e) => Err((i, e.to_string())),
            }
        })
        .collect();

    let mut samples = Vec::with_capacity(spec.samples);
    let mut excluded = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(s) => samples.push(s),
            Err(reason) => excluded.push(reason),
        }
    }
    for (i, reason) in &excluded {
        log::warn!("noise sample {i} excluded: {reason}");
    }

    let summary: Vec<MagnitudeSummary> = spec
        .magnitudes
        .iter()
        .map(|&nominal| {
            let bucket: Vec<&NoiseSample> =
                samples.iter().filter(|s| s.nominal == nominal).collect();
            let count = bucket.len();
            let inv = 1.0 / count.max(1) as f64;
            MagnitudeSummary {
                nominal,
                count,
                mean_recorded: bucket.iter().map(|s| s.recorded).sum::<f64>() * inv,
                mean_rms: bucket.iter().map(|s| s.rms).sum::<f64>() * inv,
                max_rms: bucket.iter().map(|s| s.rms).fold(0.0, f64::max),
            }
        })
        .collect();

    let points: Vec<(f64, f64)> = summary
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| (b.mean_recorded, b.max_rms))
        .collect();
    let (slope, intercept) = least_squares_line(&points)?;

    Ok(NoiseReport { reference_rms, samples, summary, slope, intercept, excluded })
}

fn least_squares_line(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::Argument(
            "need at least two magnitude buckets with samples for a slope".into(),
        ));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(Error::Argument("degenerate magnitude spread for slope fit".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    Ok((slope, intercept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn n(k: usize) -> QubitCount {
        QubitCount::new(k).unwrap()
    }

    #[test]
    fn zero_magnitude_is_exact_flat() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let dm = perturb_flat(n(2), 0.0, &mut rng).unwrap();
        assert_eq!(
            frobenius_distance(dm.matrix(), flat_state(n(2)).matrix()).unwrap(),
            0.0
        );
    }

    #[test]
    fn perturbed_states_are_hermitian_unit_trace() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let dm = perturb_flat(n(3), 0.15, &mut rng).unwrap();
            assert!(crate::qops::hermiticity_defect_max(dm.matrix()) < 1e-14);
            assert_abs_diff_eq!(dm.matrix().trace().re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn recorded_magnitude_tracks_nominal() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let mut mean = 0.0;
        let trials = 200;
        for _ in 0..trials {
            let dm = perturb_flat(n(2), 0.1, &mut rng).unwrap();
            mean += frobenius_distance(dm.matrix(), flat_state(n(2)).matrix()).unwrap();
        }
        mean /= trials as f64;
        assert!((0.04..0.25).contains(&mean), "mean recorded {mean}");
    }

    #[test]
    fn identical_seed_and_stream_reproduce_draws() {
        let mut a = ChaCha12Rng::seed_from_u64(99);
        a.set_stream(5);
        let mut b = ChaCha12Rng::seed_from_u64(99);
        b.set_stream(5);
        let da = perturb_flat(n(2), 0.1, &mut a).unwrap();
        let db = perturb_flat(n(2), 0.1, &mut b).unwrap();
        assert_eq!(frobenius_distance(da.matrix(), db.matrix()).unwrap(), 0.0);
    }

    #[test]
    fn least_squares_recovers_line() {
        let points: Vec<(f64, f64)> = (0..10)
            .map(|k| {
                let x = k as f64 * 0.1;
                (x, 0.7 * x + 0.05)
            })
            .collect();
        let (slope, intercept) = least_squares_line(&points).unwrap();
        assert_abs_diff_eq!(slope, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(intercept, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn noise_spec_validation() {
        let mut spec = NoiseSpec::default();
        assert!(spec.validate().is_ok());
        spec.samples = 0;
        assert!(spec.validate().is_err());
        spec.samples = 10;
        spec.magnitudes = vec![0.1, -0.2];
        assert!(spec.validate().is_err());
    }
}
