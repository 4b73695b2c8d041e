//! Forward simulation: real-time evolution under piecewise-constant
//! Hamiltonians, the imaginary-time (temperature) similarity transform, and
//! trajectory capture.
//!
//! Each step is propagated exactly by the unitary exp(i H dt) built from a
//! Hermitian eigendecomposition, so the discrete adjoint downstream is the
//! exact gradient of what was actually computed.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qops::{self, C64, CMat, HermEig, QubitCount, EXP_CLIP};
use crate::schedule::{BetaRamp, ScheduleSet};
use crate::states::DensityMatrix;

/// One compiled forward step: the Hamiltonian's eigendecomposition and the
/// unitary propagator built from it.
#[derive(Debug, Clone)]
pub struct StepOp {
    pub(crate) eig: HermEig,
    pub(crate) unitary: CMat,
}

impl StepOp {
    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    /// Reassembled Hamiltonian V diag(d) V^dagger.
    pub fn hamiltonian(&self) -> CMat {
        self.eig.map_spectrum(|x| C64::new(x, 0.0))
    }
}

/// A schedule compiled into per-step propagators, reusable across initial
/// states (noise sampling runs many states under one schedule).
#[derive(Debug, Clone)]
pub struct Propagator {
    n: QubitCount,
    dt: f64,
    steps: Arc<Vec<StepOp>>,
}

impl Propagator {
    /// Eigendecompose every step's Hamiltonian once.
    pub fn compile(s: &ScheduleSet) -> Result<Self> {
        let mut steps = Vec::with_capacity(s.timesteps());
        for k in 0..s.timesteps() {
            let h = s.hamiltonian(k)?;
            let eig = qops::herm_eig(&h).map_err(|e| annotate_step(e, k))?;
            let unitary = eig.unitary(s.dt());
            steps.push(StepOp { eig, unitary });
        }
        Ok(Propagator { n: s.n(), dt: s.dt(), steps: Arc::new(steps) })
    }

    pub fn n(&self) -> QubitCount {
        self.n
    }

    /// Evolve `rho0` through every step, recording the real-time state after
    /// each one and the inverse temperature along the ramp.
    pub fn run(&self, rho0: &DensityMatrix, ramp: &BetaRamp) -> Result<Trajectory> {
        ramp.validate()?;
        if rho0.n() != self.n {
            return Err(Error::Argument(format!(
                "initial state has {} qubits, schedule has {}",
                rho0.n(),
                self.n
            )));
        }
        let t_total = self.steps.len() as f64 * self.dt;
        if (t_total - ramp.t_f).abs() > 1e-9 * ramp.t_f.max(1.0) {
            return Err(Error::Argument(format!(
                "schedule spans {t_total} but the temperature ramp spans {}",
                ramp.t_f
            )));
        }
        let t = self.steps.len();
        let mut rho_s = Vec::with_capacity(t + 1);
        let mut betas = Vec::with_capacity(t + 1);
        rho_s.push(rho0.matrix().clone());
        betas.push(0.0);
        for (k, step) in self.steps.iter().enumerate() {
            let u = &step.unitary;
            let next = u * rho_s.last().unwrap() * u.adjoint();
            if next.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::Diverged {
                    epoch: 0,
                    detail: format!("non-finite state entries after step {k}"),
                });
            }
            rho_s.push(next);
            let time = (k + 1) as f64 * self.dt;
            betas.push(ramp.beta_f * (time / t_total).min(1.0));
        }
        Ok(Trajectory {
            n: self.n,
            dt: self.dt,
            rho_s,
            betas,
            steps: Arc::clone(&self.steps),
        })
    }
}

fn annotate_step(e: Error, k: usize) -> Error {
    match e {
        Error::Overflow { exponent, limit, .. } => {
            Error::Overflow { step: Some(k), exponent, limit }
        }
        Error::Contract(msg) => Error::Contract(format!("step {k}: {msg}")),
        Error::Argument(msg) => Error::Argument(format!("step {k}: {msg}")),
        other => other,
    }
}

/// The recorded forward evolution: real-time states at every step plus the
/// compiled per-step operators. Interaction-picture states are derived on
/// demand because the large-exponent transform is the costly, delicate part.
#[derive(Debug, Clone)]
pub struct Trajectory {
    n: QubitCount,
    dt: f64,
    /// Real-time states rho_S(t_k) for k = 0..=T.
    rho_s: Vec<CMat>,
    /// Inverse temperature beta(t_k) for k = 0..=T.
    betas: Vec<f64>,
    steps: Arc<Vec<StepOp>>,
}

impl Trajectory {
    pub fn n(&self) -> QubitCount {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps T (the trajectory holds T+1 states).
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rho_s_at(&self, k: usize) -> &CMat {
        &self.rho_s[k]
    }

    pub fn beta_at(&self, k: usize) -> f64 {
        self.betas[k]
    }

    pub(crate) fn step(&self, k: usize) -> &StepOp {
        &self.steps[k]
    }

    pub fn unitary(&self, k: usize) -> &CMat {
        &self.steps[k].unitary
    }

    /// Eigendecomposition governing the transform at state index k: the
    /// Hamiltonian of the step about to be applied, or the final step's at
    /// the end of the run.
    fn eig_for_state(&self, k: usize) -> &HermEig {
        let idx = k.min(self.steps.len() - 1);
        &self.steps[idx].eig
    }

    /// Interaction-picture state rho_I(t_k, beta(t_k)).
    pub fn rho_i_at(&self, k: usize) -> Result<CMat> {
        if k >= self.rho_s.len() {
            return Err(Error::Argument(format!("state index {k} out of range")));
        }
        to_interaction_eig(&self.rho_s[k], self.eig_for_state(k), self.betas[k])
            .map_err(|e| annotate_step(e, k))
    }

    /// The final interaction-picture state rho_I(t_f, beta_f).
    pub fn final_rho_i(&self) -> Result<CMat> {
        self.rho_i_at(self.rho_s.len() - 1)
    }

    /// Frobenius norm of rho_I(t_f) - rho_I(t_f)^dagger; the transform does
    /// not preserve Hermiticity, and this logs how far it drifted.
    pub fn final_hermiticity_defect(&self) -> Result<f64> {
        let rho_i = self.final_rho_i()?;
        let defect = qops::hermiticity_defect(&rho_i);
        log::debug!("final interaction-picture hermiticity defect: {defect:.3e}");
        Ok(defect)
    }

    /// Per-qubit spin averages of rho_I at every recorded state.
    pub fn spin_series(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.rho_s.len())
            .map(|k| {
                let rho_i = self.rho_i_at(k)?;
                crate::states::spin_averages(&rho_i, self.n)
            })
            .collect()
    }
}

/// One exact real-time step: returns (U rho U^dagger, U) with U = exp(i H dt).
pub fn step_real_time(rho: &CMat, h: &CMat, dt: f64) -> Result<(CMat, CMat)> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::Contract(format!("state trace {tr} deviates from 1")));
    }
    let eig = qops::herm_eig(h)?;
    let u = eig.unitary(dt);
    let next = &u * rho * u.adjoint();
    Ok((next, u))
}

/// The imaginary-time similarity transform exp(-beta H) rho exp(+beta H).
///
/// The output may be non-Hermitian and is not renormalized. Fails with an
/// overflow error when any required exponent magnitude exceeds 700.
pub fn to_interaction(rho_s: &CMat, h: &CMat, beta: f64) -> Result<CMat> {
    if beta < 0.0 {
        return Err(Error::Argument(format!("beta {beta} must be >= 0")));
    }
    let eig = qops::herm_eig(h)?;
    to_interaction_eig(rho_s, &eig, beta)
}

/// Same transform with a precomputed eigendecomposition. Working in the
/// eigenbasis keeps the trace exact: entry (i, j) is scaled by
/// exp(-beta (d_i - d_j)) and the diagonal is untouched.
pub(crate) fn to_interaction_eig(rho_s: &CMat, eig: &HermEig, beta: f64) -> Result<CMat> {
    if beta == 0.0 {
        return Ok(rho_s.clone());
    }
    let radius = eig.spectral_radius();
    if beta * radius > EXP_CLIP {
        return Err(Error::Overflow { step: None, exponent: beta * radius, limit: EXP_CLIP });
    }
    let spread = eig.values.max() - eig.values.min();
    if beta * spread > EXP_CLIP {
        // exp(-beta (d_i - d_j)) itself would overflow even though each
        // one-sided factor is representable.
        return Err(Error::Overflow { step: None, exponent: beta * spread, limit: EXP_CLIP });
    }
    let v = &eig.vectors;
    let mut tilde = v.adjoint() * rho_s * v;
    let d = &eig.values;
    for i in 0..tilde.nrows() {
        for j in 0..tilde.ncols() {
            let factor = (-beta * (d[i] - d[j])).exp();
            tilde[(i, j)] *= C64::new(factor, 0.0);
        }
    }
    Ok(v * tilde * v.adjoint())
}

/// Run the full forward simulation for one schedule and temperature ramp.
pub fn run_forward(rho0: &DensityMatrix, s: &ScheduleSet, ramp: &BetaRamp) -> Result<Trajectory> {
    Propagator::compile(s)?.run(rho0, ramp)
}

/// Entrywise root-mean-square difference sqrt(sum |A_ij - B_ij|^2 / 4^n).
pub fn rms_error(rho_i_final: &CMat, rho_des: &CMat) -> Result<f64> {
    let dist = qops::frobenius_distance(rho_i_final, rho_des)?;
    Ok(dist / rho_des.nrows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::{embed_pauli, frobenius_distance, frobenius_norm, herm_expm, PauliAxis};
    use crate::schedule::TrainableMask;
    use crate::states::{flat_state, ghz_state, PureState};
    use approx::assert_abs_diff_eq;

    fn n(k: usize) -> QubitCount {
        QubitCount::new(k).unwrap()
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        }
    }

    fn random_schedule(nn: QubitCount, timesteps: usize, dt: f64, scale: f64, seed: u64) -> ScheduleSet {
        let mut s = ScheduleSet::zeros(nn, timesteps, dt).unwrap();
        let mut next = lcg(seed);
        for p in 0..s.zeta().len() {
            let series: Vec<f64> = (0..timesteps).map(|_| next() * scale).collect();
            s.set_zeta_series(p, series).unwrap();
        }
        for q in 0..nn.get() {
            let series: Vec<f64> = (0..timesteps).map(|_| next() * scale).collect();
            s.set_eps_series(q, series).unwrap();
            let series: Vec<f64> = (0..timesteps).map(|_| next() * scale).collect();
            s.set_kk_series(q, series).unwrap();
        }
        s.set_trainable(TrainableMask::zeta_and_eps());
        s
    }

    fn random_density(nn: QubitCount, seed: u64) -> DensityMatrix {
        let mut next = lcg(seed);
        let dim = nn.dim();
        let raw = CMat::from_fn(dim, dim, |_, _| C64::new(next(), next()));
        let herm = &raw * raw.adjoint();
        let tr = herm.trace().re;
        DensityMatrix::new(nn, herm.map(|x| x / C64::new(tr, 0.0))).unwrap()
    }

    #[test]
    fn zero_hamiltonian_keeps_state() {
        let rho = flat_state(n(2));
        let h = CMat::zeros(4, 4);
        let (next, u) = step_real_time(rho.matrix(), &h, 0.7).unwrap();
        assert!(frobenius_distance(&next, rho.matrix()).unwrap() < 1e-14);
        assert!(frobenius_distance(&u, &CMat::identity(4, 4)).unwrap() < 1e-14);
    }

    #[test]
    fn maximally_mixed_state_is_stationary() {
        let nn = n(2);
        let rho = DensityMatrix::new(nn, CMat::identity(4, 4).map(|x| x * C64::new(0.25, 0.0)))
            .unwrap();
        let s = random_schedule(nn, 8, 0.5, 0.3, 5);
        let h = s.hamiltonian(3).unwrap();
        let (next, _) = step_real_time(rho.matrix(), &h, 0.5).unwrap();
        assert!(frobenius_distance(&next, rho.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn rabi_half_period_transfers_population() {
        // Two-level oracle: for H = sigma_x the population of |1> after the
        // step is sin(dt)^2.
        let nn = n(1);
        let rho0 = PureState::basis(nn, 0).unwrap().density();
        let sx = embed_pauli(PauliAxis::X, 0, nn).unwrap();
        for dt in [std::f64::consts::FRAC_PI_2, 0.3, 1.1] {
            let (next, u) = step_real_time(rho0.matrix(), &sx, dt).unwrap();
            assert_abs_diff_eq!(next[(1, 1)].re, dt.sin().powi(2), epsilon = 1e-12);
            let uu = &u * u.adjoint();
            assert!(frobenius_distance(&uu, &CMat::identity(2, 2)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn interaction_transform_trivial_cases() {
        let nn = n(2);
        let rho = random_density(nn, 9);
        let s = random_schedule(nn, 4, 1.0, 0.4, 11);
        let h = s.hamiltonian(0).unwrap();
        let same = to_interaction(rho.matrix(), &h, 0.0).unwrap();
        assert_eq!(
            frobenius_distance(&same, rho.matrix()).unwrap(),
            0.0,
            "beta = 0 must be the exact identity transform"
        );
        // Commuting case: diagonal rho and diagonal H.
        let diag_rho = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.4, 0.0),
            C64::new(0.3, 0.0),
            C64::new(0.2, 0.0),
            C64::new(0.1, 0.0),
        ]));
        let mut sz = ScheduleSet::zeros(nn, 2, 1.0).unwrap();
        sz.set_zeta_series(0, vec![0.8; 2]).unwrap();
        sz.set_eps_series(0, vec![-0.3; 2]).unwrap();
        let hz = sz.hamiltonian(0).unwrap();
        let moved = to_interaction(&diag_rho, &hz, 3.0).unwrap();
        assert!(frobenius_distance(&moved, &diag_rho).unwrap() < 1e-12);
    }

    #[test]
    fn interaction_transform_matches_expm_product() {
        let nn = n(2);
        let rho = random_density(nn, 21);
        let s = random_schedule(nn, 4, 1.0, 0.4, 22);
        let h = s.hamiltonian(1).unwrap();
        let beta = 1.7;
        let via_eig = to_interaction(rho.matrix(), &h, beta).unwrap();
        let via_products =
            herm_expm(&h, -beta).unwrap() * rho.matrix() * herm_expm(&h, beta).unwrap();
        assert!(frobenius_distance(&via_eig, &via_products).unwrap() < 1e-10);
    }

    #[test]
    fn interaction_transform_matches_commutator_series() {
        // Oracle: exp(-bH) rho exp(bH) = rho - b[H,rho] + b^2/2 [H,[H,rho]]
        //         - b^3/6 [H,[H,[H,rho]]] + O(b^4).
        let nn = n(2);
        let rho = random_density(nn, 33);
        let s = random_schedule(nn, 4, 1.0, 0.5, 34);
        let h = s.hamiltonian(2).unwrap();
        let beta = 1e-2;
        let exact = to_interaction(rho.matrix(), &h, beta).unwrap();
        let c1 = crate::qops::commutator(&h, rho.matrix()).unwrap();
        let c2 = crate::qops::commutator(&h, &c1).unwrap();
        let c3 = crate::qops::commutator(&h, &c2).unwrap();
        let series = rho.matrix() - c1.map(|x| x * C64::new(beta, 0.0))
            + c2.map(|x| x * C64::new(beta * beta / 2.0, 0.0))
            - c3.map(|x| x * C64::new(beta.powi(3) / 6.0, 0.0));
        let err = frobenius_distance(&exact, &series).unwrap();
        assert!(err < 20.0 * beta.powi(4), "series mismatch {err:.3e}");
    }

    #[test]
    fn interaction_transform_overflow_is_loud() {
        let nn = n(1);
        let rho = flat_state(nn);
        let mut s = ScheduleSet::zeros(nn, 2, 1.0).unwrap();
        s.set_eps_series(0, vec![1.0; 2]).unwrap();
        let h = s.hamiltonian(0).unwrap();
        match to_interaction(rho.matrix(), &h, 800.0) {
            Err(Error::Overflow { exponent, .. }) => assert!(exponent > 700.0),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn zero_schedule_run_keeps_flat_state() {
        let nn = n(2);
        let s = ScheduleSet::zeros(nn, 10, 1.0).unwrap();
        let ramp = BetaRamp { beta_f: 10.0, t_f: 10.0 };
        let traj = run_forward(&flat_state(nn), &s, &ramp).unwrap();
        for k in 0..=10 {
            assert!(
                frobenius_distance(traj.rho_s_at(k), flat_state(nn).matrix()).unwrap() < 1e-12
            );
        }
        let rho_i = traj.final_rho_i().unwrap();
        assert!(frobenius_distance(&rho_i, flat_state(nn).matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn conservation_along_random_trajectory() {
        for (seed, nq) in [(1u64, 2usize), (2, 3), (3, 4)] {
            let nn = n(nq);
            let s = random_schedule(nn, 40, 0.5, 0.01, seed);
            let ramp = BetaRamp { beta_f: 5.0, t_f: 20.0 };
            let rho0 = flat_state(nn);
            let traj = run_forward(&rho0, &s, &ramp).unwrap();
            let purity0 = (rho0.matrix() * rho0.matrix()).trace().re;
            for k in 0..=traj.len() {
                let rs = traj.rho_s_at(k);
                let tr = rs.trace();
                assert!((tr.re - 1.0).abs() < 1e-8 && tr.im.abs() < 1e-8);
                let purity = (rs * rs).trace().re;
                assert!((purity - purity0).abs() < 1e-8);
                assert!(crate::qops::hermiticity_defect_max(rs) < 1e-9);
                let ri = traj.rho_i_at(k).unwrap();
                assert!((ri.trace() - tr).norm() < 1e-8);
            }
            for k in 0..traj.len() {
                let u = traj.unitary(k);
                let uu = u * u.adjoint();
                let dim = nn.dim();
                assert!(
                    frobenius_distance(&uu, &CMat::identity(dim, dim)).unwrap() < 1e-10
                );
            }
        }
    }

    #[test]
    fn reversed_conjugated_propagators_recover_initial_state() {
        let nn = n(2);
        let s = random_schedule(nn, 30, 0.7, 0.05, 77);
        let ramp = BetaRamp { beta_f: 1.0, t_f: 21.0 };
        let rho0 = random_density(nn, 78);
        let traj = run_forward(&rho0, &s, &ramp).unwrap();
        let mut rho = traj.rho_s_at(traj.len()).clone();
        for k in (0..traj.len()).rev() {
            let u = traj.unitary(k);
            rho = u.adjoint() * rho * u;
        }
        assert!(frobenius_distance(&rho, rho0.matrix()).unwrap() < 1e-8);
    }

    #[test]
    fn constant_schedule_composes_to_single_exponential() {
        let nn = n(2);
        let timesteps = 16;
        let dt = 0.3;
        let mut s = ScheduleSet::zeros(nn, timesteps, dt).unwrap();
        s.set_zeta_series(0, vec![0.2; timesteps]).unwrap();
        s.set_eps_series(0, vec![-0.1; timesteps]).unwrap();
        s.set_kk_series(1, vec![0.15; timesteps]).unwrap();
        let ramp = BetaRamp { beta_f: 0.0, t_f: timesteps as f64 * dt };
        let rho0 = flat_state(nn);
        let traj = run_forward(&rho0, &s, &ramp).unwrap();
        let h = s.hamiltonian(0).unwrap();
        let eig = crate::qops::herm_eig(&h).unwrap();
        let u_total = eig.unitary(dt * timesteps as f64);
        let direct = &u_total * rho0.matrix() * u_total.adjoint();
        assert!(
            frobenius_distance(traj.rho_s_at(timesteps), &direct).unwrap() < 1e-9
        );
    }

    #[test]
    fn rms_error_scaling_identity() {
        let nn = n(2);
        let flat = flat_state(nn);
        let ghz = ghz_state(nn).unwrap();
        assert_eq!(rms_error(flat.matrix(), flat.matrix()).unwrap(), 0.0);
        let rms = rms_error(flat.matrix(), ghz.matrix()).unwrap();
        let dist = frobenius_distance(flat.matrix(), ghz.matrix()).unwrap();
        assert_abs_diff_eq!(rms, dist / 4.0, epsilon = 1e-15);
        // Hand arithmetic on the two constant matrices: every one of the 16
        // entry differences has magnitude 1/4, so the distance is exactly 1.
        assert_abs_diff_eq!(dist, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rms, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn trajectory_spin_series_flat_run_is_zero() {
        let nn = n(2);
        let s = ScheduleSet::annealing_init(nn, 10, 1.0, 1.5e-3, 0.5).unwrap();
        let ramp = BetaRamp { beta_f: 5.0, t_f: 10.0 };
        let traj = run_forward(&flat_state(nn), &s, &ramp).unwrap();
        for spins in traj.spin_series().unwrap() {
            for v in spins {
                assert!(v.abs() < 1e-10);
            }
        }
    }
}
