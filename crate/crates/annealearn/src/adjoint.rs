//! The learning engine: loss, exact discrete-adjoint gradients for all
//! trainable schedule values, a finite-difference oracle, the gradient
//! descent epoch loop, and the bootstrapping entry points.
//!
//! The gradient is the exact adjoint of the discretized forward pass: the
//! terminal co-state comes from the loss at the final interaction-picture
//! state, is pulled back through the temperature transform and through each
//! step's propagator, and picks up one insertion of dH/dw per step. Matrix
//! exponentials are differentiated with divided-difference (Daleckii-Krein)
//! tables in the eigenbasis of each step's Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagate::{run_forward, to_interaction_eig, Trajectory};
use crate::qops::{
    dd_exp_real, dd_exp_unitary, hermitian_part, herm_eig, x_flip_mask, z_sign, C64, CMat,
    EXP_CLIP,
};
use crate::schedule::{pair_list, BetaRamp, MonotoneSchedule, ParamClass, ScheduleSet};
use crate::states::{path_state, spin_averages, DensityMatrix, PathSpec};

/// Loss and error summary for one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub epoch: usize,
    /// Half the squared Frobenius distance between achieved and desired
    /// final interaction-picture states.
    pub loss: f64,
    /// Entrywise root-mean-square error, sqrt(2 loss / 4^n).
    pub rms: f64,
}

/// Gradients of the loss with respect to every per-step schedule value.
///
/// Shapes mirror [`ScheduleSet`]: `d_zeta[pair][step]`, `d_eps[qubit][step]`.
/// Tunneling gradients are only computed when the tunneling amplitudes are
/// trainable (the monotone mode). The finite-difference oracle leaves frozen
/// classes at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub d_zeta: Vec<Vec<f64>>,
    pub d_eps: Vec<Vec<f64>>,
    pub d_kk: Option<Vec<Vec<f64>>>,
    pub d_monotone: Option<MonotoneGradient>,
}

impl GradientSet {
    fn zeros_like(s: &ScheduleSet, include_kk: bool) -> Self {
        let t = s.timesteps();
        let pairs = s.zeta().len();
        GradientSet {
            d_zeta: vec![vec![0.0; t]; pairs],
            d_eps: vec![vec![0.0; t]; s.n().get()],
            d_kk: include_kk.then(|| vec![vec![0.0; t]; s.n().get()]),
            d_monotone: None,
        }
    }

    /// Largest absolute component across all present classes.
    pub fn max_abs(&self) -> f64 {
        let flat = |v: &Vec<Vec<f64>>| {
            v.iter()
                .flat_map(|s| s.iter())
                .fold(0.0f64, |a, &x| a.max(x.abs()))
        };
        let mut m = flat(&self.d_zeta).max(flat(&self.d_eps));
        if let Some(kk) = &self.d_kk {
            m = m.max(flat(kk));
        }
        m
    }

    fn is_finite(&self) -> bool {
        let ok = |v: &Vec<Vec<f64>>| v.iter().all(|s| s.iter().all(|x| x.is_finite()));
        ok(&self.d_zeta)
            && ok(&self.d_eps)
            && self.d_kk.as_ref().map_or(true, ok)
            && self.d_monotone.as_ref().map_or(true, |m| {
                m.d_increments.iter().all(|x| x.is_finite())
                    && m.d_zeta_end.iter().all(|x| x.is_finite())
                    && m.d_eps_end.iter().all(|x| x.is_finite())
            })
    }
}

/// Gradients for the constrained monotone parametrization.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneGradient {
    pub d_increments: Vec<f64>,
    pub d_zeta_end: Vec<f64>,
    pub d_eps_end: Vec<f64>,
}

/// How the first training run of an experiment initializes its schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitPolicy {
    /// Couplings and biases start at zero.
    Zeros,
    /// Couplings are seeded from a previously trained schedule file.
    SeedSchedule,
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    /// Learning rate for couplings (and for the monotone increments).
    pub eta_zeta: f64,
    /// Learning rate for biases.
    pub eta_eps: f64,
    pub max_epochs: usize,
    /// Stop as soon as the epoch rms error reaches this value.
    pub stop_rms: f64,
    pub init_policy: InitPolicy,
    pub trainable: crate::schedule::TrainableMask,
}

impl Default for TrainingConfig {
    /// The flat-to-Bell baseline values.
    fn default() -> Self {
        TrainingConfig {
            eta_zeta: 1.25e-5,
            eta_eps: 5e-6,
            max_epochs: 200,
            stop_rms: 0.005,
            init_policy: InitPolicy::Zeros,
            trainable: crate::schedule::TrainableMask::zeta_only(),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_zeta > 0.0) || !(self.eta_eps > 0.0) {
            return Err(Error::Argument("learning rates must be positive".into()));
        }
        if self.max_epochs < 1 {
            return Err(Error::Argument("max_epochs must be at least 1".into()));
        }
        if self.stop_rms < 0.0 {
            return Err(Error::Argument("stop_rms must be >= 0".into()));
        }
        Ok(())
    }
}

/// Loss of a completed trajectory against the desired state:
/// 1/2 sum_ij |rho_des,ij - rho_I,ij(t_f)|^2.
pub fn loss(traj: &Trajectory, rho_des: &DensityMatrix) -> Result<LossReport> {
    if rho_des.n() != traj.n() {
        return Err(Error::Argument(format!(
            "target has {} qubits, trajectory has {}",
            rho_des.n(),
            traj.n()
        )));
    }
    let rho_i = traj.final_rho_i()?;
    let dist = crate::qops::frobenius_distance(&rho_i, rho_des.matrix())?;
    let dim = traj.n().dim() as f64;
    Ok(LossReport { epoch: 0, loss: 0.5 * dist * dist, rms: dist / dim })
}

fn check_match(traj: &Trajectory, s: &ScheduleSet) -> Result<()> {
    if traj.n() != s.n() || traj.len() != s.timesteps() || traj.dt() != s.dt() {
        return Err(Error::Argument(
            "trajectory was not produced by this schedule (shape mismatch)".into(),
        ));
    }
    Ok(())
}

fn scale_cols(m: &mut CMat, s: &[C64]) {
    for (j, mut col) in m.column_iter_mut().enumerate() {
        let f = s[j];
        for e in col.iter_mut() {
            *e *= f;
        }
    }
}

fn scale_rows(m: &mut CMat, s: &[C64]) {
    for (i, mut row) in m.row_iter_mut().enumerate() {
        let f = s[i];
        for e in row.iter_mut() {
            *e *= f;
        }
    }
}

/// Seed co-state (Hermitian part, full basis) and, when the final inverse
/// temperature is nonzero, the final-step insertion block carrying the
/// derivative of exp(-+beta H) in the final eigenbasis.
fn seed_and_beta_block(
    traj: &Trajectory,
    rho_des: &DensityMatrix,
    beta_f: f64,
) -> Result<(CMat, Option<CMat>)> {
    let t = traj.len();
    let final_step = traj.step(t - 1);
    let v = &final_step.eig.vectors;
    let d = &final_step.eig.values;
    let rho_t = traj.rho_s_at(t);

    if beta_f == 0.0 {
        let delta = rho_t - rho_des.matrix();
        return Ok((hermitian_part(&delta), None));
    }

    let radius = final_step.eig.spectral_radius();
    let spread = d.max() - d.min();
    if beta_f * radius > EXP_CLIP || beta_f * spread > EXP_CLIP {
        return Err(Error::Overflow {
            step: Some(t - 1),
            exponent: (beta_f * radius).max(beta_f * spread),
            limit: EXP_CLIP,
        });
    }

    let dim = v.nrows();
    let rho_tilde = v.adjoint() * rho_t * v;
    let des_tilde = v.adjoint() * rho_des.matrix() * v;
    // rho_I in the final eigenbasis: entry (i, j) scaled by exp(-beta (d_i - d_j)).
    let mut rho_i_tilde = rho_tilde.clone();
    for i in 0..dim {
        for j in 0..dim {
            rho_i_tilde[(i, j)] *= C64::new((-beta_f * (d[i] - d[j])).exp(), 0.0);
        }
    }
    let delta_tilde = &rho_i_tilde - &des_tilde;

    // Co-state seed: Hermitian part of exp(-beta H) Delta exp(+beta H).
    let mut seed_tilde = delta_tilde.clone();
    for i in 0..dim {
        for j in 0..dim {
            seed_tilde[(i, j)] *= C64::new((-beta_f * (d[i] - d[j])).exp(), 0.0);
        }
    }
    let seed = v * hermitian_part(&seed_tilde) * v.adjoint();

    // Insertion through the temperature transform itself:
    //   d rho_I = Dexp(-beta H)[P] rho_T exp(beta H)
    //           + exp(-beta H) rho_T Dexp(beta H)[P].
    let e_plus: Vec<C64> = d.iter().map(|&x| C64::new((beta_f * x).exp(), 0.0)).collect();
    let e_minus: Vec<C64> = d.iter().map(|&x| C64::new((-beta_f * x).exp(), 0.0)).collect();
    let delta_adj = delta_tilde.adjoint();
    let mut d1 = rho_tilde.clone();
    scale_cols(&mut d1, &e_plus);
    let d1 = d1 * &delta_adj;
    let mut d2 = delta_adj;
    scale_cols(&mut d2, &e_minus);
    let d2 = d2 * &rho_tilde;
    let h1 = hermitian_part(&d1);
    let h2 = hermitian_part(&d2);
    let g_minus = dd_exp_real(d, -beta_f);
    let g_plus = dd_exp_real(d, beta_f);
    let m_beta = CMat::from_fn(dim, dim, |i, j| {
        h1[(j, i)] * g_minus[(i, j)] + h2[(j, i)] * g_plus[(i, j)]
    });
    Ok((seed, Some(m_beta)))
}

/// Shared backward pass. `seed` is the Hermitian co-state at the final real
/// time, `m_beta` the optional final-step temperature-insertion block.
fn backward_pass(
    traj: &Trajectory,
    s: &ScheduleSet,
    seed: CMat,
    m_beta: Option<&CMat>,
    include_kk: bool,
) -> GradientSet {
    let n = s.n();
    let dim = n.dim();
    let t = traj.len();
    let pairs = pair_list(n);
    let dt = s.dt();

    let signs: Vec<Vec<f64>> = (0..n.get())
        .map(|q| (0..dim).map(|m| z_sign(q, n, m)).collect())
        .collect();
    let masks: Vec<usize> = (0..n.get()).map(|q| x_flip_mask(q, n)).collect();

    let mut out = GradientSet::zeros_like(s, include_kk);
    let mut adj = seed;

    for k in (0..t).rev() {
        let step = traj.step(k);
        let v = &step.eig.vectors;
        let d = &step.eig.values;
        let a_tilde = v.adjoint() * &adj * v;
        let rho_tilde = v.adjoint() * traj.rho_s_at(k) * v;
        let phases: Vec<C64> = d.iter().map(|&x| C64::from_polar(1.0, dt * x)).collect();
        let conj_phases: Vec<C64> = phases.iter().map(|p| p.conj()).collect();

        // B = rho~ diag(conj u) A~ ; M = G . B^T + conj(G . B).
        let mut b = rho_tilde;
        scale_cols(&mut b, &conj_phases);
        let b = b * &a_tilde;
        let g = dd_exp_unitary(d, dt);
        let mut m = CMat::from_fn(dim, dim, |i, j| {
            g[(i, j)] * b[(j, i)] + (g[(i, j)] * b[(i, j)]).conj()
        });
        if k == t - 1 {
            if let Some(mb) = m_beta {
                m += mb;
            }
        }
        let r = v.conjugate() * m * v.transpose();

        for (p, &(qa, qb)) in pairs.iter().enumerate() {
            let mut c = C64::new(0.0, 0.0);
            for mm in 0..dim {
                c += r[(mm, mm)] * C64::new(signs[qa][mm] * signs[qb][mm], 0.0);
            }
            debug_assert!(c.im.abs() <= 1e-10 * c.re.abs().max(1.0), "imag leak {c:?}");
            out.d_zeta[p][k] = c.re;
        }
        for q in 0..n.get() {
            let mut c = C64::new(0.0, 0.0);
            for mm in 0..dim {
                c += r[(mm, mm)] * C64::new(signs[q][mm], 0.0);
            }
            debug_assert!(c.im.abs() <= 1e-10 * c.re.abs().max(1.0), "imag leak {c:?}");
            out.d_eps[q][k] = c.re;
        }
        if let Some(d_kk) = &mut out.d_kk {
            for q in 0..n.get() {
                let mut c = C64::new(0.0, 0.0);
                for mm in 0..dim {
                    c += r[(mm, mm ^ masks[q])];
                }
                debug_assert!(c.im.abs() <= 1e-10 * c.re.abs().max(1.0), "imag leak {c:?}");
                d_kk[q][k] = c.re;
            }
        }

        // Pull the co-state back through this step: A <- U^dagger A U.
        let mut inner = a_tilde;
        scale_rows(&mut inner, &conj_phases);
        scale_cols(&mut inner, &phases);
        adj = v * inner * v.adjoint();
    }
    out
}

/// Exact gradient of [`loss`] with respect to every per-step schedule value.
///
/// Tunneling gradients are included when the schedule marks them trainable.
pub fn gradient(
    traj: &Trajectory,
    s: &ScheduleSet,
    ramp: &BetaRamp,
    rho_des: &DensityMatrix,
) -> Result<GradientSet> {
    gradient_impl(traj, s, ramp, rho_des, s.trainable().kk)
}

fn gradient_impl(
    traj: &Trajectory,
    s: &ScheduleSet,
    ramp: &BetaRamp,
    rho_des: &DensityMatrix,
    include_kk: bool,
) -> Result<GradientSet> {
    check_match(traj, s)?;
    ramp.validate()?;
    if rho_des.n() != s.n() {
        return Err(Error::Argument("target dimension mismatch".into()));
    }
    let beta_f = traj.beta_at(traj.len());
    let (seed, m_beta) = seed_and_beta_block(traj, rho_des, beta_f)?;
    Ok(backward_pass(traj, s, seed, m_beta.as_ref(), include_kk))
}

/// The adjoint gradient split into its zero-temperature part and the two
/// temperature corrections (the reshaped co-state seed and the final-step
/// insertion through exp(-+beta H)). Both corrections are identically zero
/// when the final inverse temperature is zero.
#[derive(Debug, Clone)]
pub struct GradientParts {
    pub zero_temperature: GradientSet,
    pub beta_seed: GradientSet,
    pub beta_direct: GradientSet,
}

/// Structural decomposition of [`gradient`]; costs three backward passes.
pub fn gradient_parts(
    traj: &Trajectory,
    s: &ScheduleSet,
    ramp: &BetaRamp,
    rho_des: &DensityMatrix,
) -> Result<GradientParts> {
    check_match(traj, s)?;
    ramp.validate()?;
    let include_kk = s.trainable().kk;
    let beta_f = traj.beta_at(traj.len());
    let t = traj.len();
    let dim = s.n().dim();

    let delta0 = traj.rho_s_at(t) - rho_des.matrix();
    let seed0 = hermitian_part(&delta0);
    let (seed_full, m_beta) = seed_and_beta_block(traj, rho_des, beta_f)?;
    let seed_corr = if beta_f == 0.0 { CMat::zeros(dim, dim) } else { &seed_full - &seed0 };

    let zero_temperature = backward_pass(traj, s, seed0, None, include_kk);
    let beta_seed = backward_pass(traj, s, seed_corr, None, include_kk);
    let beta_direct = backward_pass(
        traj,
        s,
        CMat::zeros(dim, dim),
        m_beta.as_ref(),
        include_kk,
    );
    Ok(GradientParts { zero_temperature, beta_seed, beta_direct })
}

/// Independent zero-temperature adjoint, written in the plain trace form
/// (materializing the propagator derivative per parameter). Used as a
/// cross-check of the fast contraction path; cost is O(params d^3) per step.
pub fn zero_temperature_gradient(
    traj: &Trajectory,
    s: &ScheduleSet,
    rho_des: &DensityMatrix,
) -> Result<GradientSet> {
    check_match(traj, s)?;
    let n = s.n();
    let dim = n.dim();
    let t = traj.len();
    let pairs = pair_list(n);
    let include_kk = s.trainable().kk;

    // Hermitian generators per parameter class.
    let mut generators: Vec<(ParamClass, usize, CMat)> = Vec::new();
    for (p, &(a, b)) in pairs.iter().enumerate() {
        let mut m = CMat::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(z_sign(a, n, i) * z_sign(b, n, i), 0.0);
        }
        generators.push((ParamClass::Zeta, p, m));
    }
    for q in 0..n.get() {
        let mut m = CMat::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(z_sign(q, n, i), 0.0);
        }
        generators.push((ParamClass::Eps, q, m));
    }
    if include_kk {
        for q in 0..n.get() {
            let mask = x_flip_mask(q, n);
            let mut m = CMat::zeros(dim, dim);
            for i in 0..dim {
                m[(i, i ^ mask)] = C64::new(1.0, 0.0);
            }
            generators.push((ParamClass::Kk, q, m));
        }
    }

    let delta = traj.rho_s_at(t) - rho_des.matrix();
    let mut adj = hermitian_part(&delta);
    let mut out = GradientSet::zeros_like(s, include_kk);

    for k in (0..t).rev() {
        let step = traj.step(k);
        let v = &step.eig.vectors;
        let d = &step.eig.values;
        let u = step.unitary();
        let g = dd_exp_unitary(d, s.dt());
        let rho = traj.rho_s_at(k);
        for (class, idx, gen) in &generators {
            // dU in direction gen: V ((V^dagger gen V) . G) V^dagger.
            let p_tilde = v.adjoint() * gen * v;
            let du = v * p_tilde.component_mul(&g) * v.adjoint();
            // d loss = 2 Re tr(A dU rho U^dagger) for Hermitian A.
            let val = 2.0 * (&adj * du * rho * u.adjoint()).trace().re;
            match class {
                ParamClass::Zeta => out.d_zeta[*idx][k] = val,
                ParamClass::Eps => out.d_eps[*idx][k] = val,
                ParamClass::Kk => out.d_kk.as_mut().unwrap()[*idx][k] = val,
            }
        }
        adj = u.adjoint() * adj * u;
    }
    Ok(out)
}

/// Central finite differences of the loss over every trainable schedule
/// value; the verification oracle for [`gradient`].
///
/// Frozen classes are left at zero. Each probe reuses the unperturbed prefix
/// states and cached suffix propagators, so the cost is one fresh
/// eigendecomposition plus the remaining steps per probe.
pub fn fd_gradient(
    s: &ScheduleSet,
    ramp: &BetaRamp,
    rho0: &DensityMatrix,
    rho_des: &DensityMatrix,
    h: f64,
) -> Result<GradientSet> {
    if !(h > 0.0) {
        return Err(Error::Argument(format!("fd step must be positive, got {h}")));
    }
    let base = run_forward(rho0, s, ramp)?;
    let t = s.timesteps();
    let mask = s.trainable();
    let mut out = GradientSet::zeros_like(s, mask.kk);

    let probe = |class: ParamClass, idx: usize, k: usize| -> Result<f64> {
        let at = |delta: f64| -> Result<f64> {
            fd_loss_with_perturbation(&base, s, ramp, rho_des, class, idx, k, delta)
        };
        Ok((at(h)? - at(-h)?) / (2.0 * h))
    };

    if mask.zeta {
        for p in 0..s.zeta().len() {
            for k in 0..t {
                out.d_zeta[p][k] = probe(ParamClass::Zeta, p, k)?;
            }
        }
    }
    if mask.eps {
        for q in 0..s.n().get() {
            for k in 0..t {
                out.d_eps[q][k] = probe(ParamClass::Eps, q, k)?;
            }
        }
    }
    if mask.kk {
        let d_kk = out.d_kk.as_mut().unwrap();
        for q in 0..s.n().get() {
            for k in 0..t {
                let at = |delta: f64| -> Result<f64> {
                    fd_loss_with_perturbation(&base, s, ramp, rho_des, ParamClass::Kk, q, k, delta)
                };
                d_kk[q][k] = (at(h)? - at(-h)?) / (2.0 * h);
            }
        }
    }
    Ok(out)
}

/// Loss of the trajectory obtained by shifting one schedule value at one
/// step, reusing the unperturbed prefix and the cached suffix unitaries.
#[allow(clippy::too_many_arguments)]
fn fd_loss_with_perturbation(
    base: &Trajectory,
    s: &ScheduleSet,
    ramp: &BetaRamp,
    rho_des: &DensityMatrix,
    class: ParamClass,
    idx: usize,
    k: usize,
    delta: f64,
) -> Result<f64> {
    let t = s.timesteps();
    let h_pert = s.hamiltonian_perturbed(k, class, idx, delta)?;
    let eig = herm_eig(&h_pert)?;
    let u = eig.unitary(s.dt());
    let mut rho = &u * base.rho_s_at(k) * u.adjoint();
    for j in k + 1..t {
        let uj = base.unitary(j);
        rho = uj * rho * uj.adjoint();
    }
    let rho_i = if k == t - 1 {
        to_interaction_eig(&rho, &eig, ramp.beta_f)?
    } else {
        to_interaction_eig(&rho, &base.step(t - 1).eig, ramp.beta_f)?
    };
    let dist = crate::qops::frobenius_distance(&rho_i, rho_des.matrix())?;
    Ok(0.5 * dist * dist)
}

fn finite_or_diverged(report: &LossReport) -> Result<()> {
    if !report.loss.is_finite() || !report.rms.is_finite() {
        return Err(Error::Diverged {
            epoch: report.epoch,
            detail: format!("non-finite loss {:.3e}", report.loss),
        });
    }
    Ok(())
}

/// Plain gradient descent over the trainable schedule classes.
///
/// Each epoch runs the forward simulation, records a [`LossReport`], and
/// updates every trainable value by its class learning rate. The loop stops
/// at `max_epochs` reports or as soon as the rms error reaches `stop_rms`;
/// the final epoch is evaluation-only, so the returned schedule is exactly
/// the one described by the last report. Fully deterministic.
pub fn train(
    cfg: &TrainingConfig,
    s0: &ScheduleSet,
    ramp: &BetaRamp,
    rho0: &DensityMatrix,
    rho_des: &DensityMatrix,
) -> Result<(ScheduleSet, Vec<LossReport>)> {
    cfg.validate()?;
    if cfg.trainable.kk {
        return Err(Error::Argument(
            "per-step tunneling training is not supported; use the monotone mode".into(),
        ));
    }
    let mut s = s0.clone();
    s.set_trainable(cfg.trainable);
    let mut reports = Vec::new();
    for epoch in 0..cfg.max_epochs {
        let traj = run_forward(rho0, &s, ramp).map_err(|e| diverged_at(e, epoch))?;
        let mut report = loss(&traj, rho_des)?;
        report.epoch = epoch;
        finite_or_diverged(&report)?;
        reports.push(report);
        if report.rms <= cfg.stop_rms || epoch + 1 == cfg.max_epochs {
            break;
        }
        let g = gradient_impl(&traj, &s, ramp, rho_des, false)?;
        if !g.is_finite() {
            return Err(Error::Diverged { epoch, detail: "non-finite gradient".into() });
        }
        if cfg.trainable.zeta {
            for (series, grads) in s.zeta_mut().iter_mut().zip(&g.d_zeta) {
                for (w, dg) in series.iter_mut().zip(grads) {
                    *w -= cfg.eta_zeta * dg;
                }
            }
        }
        if cfg.trainable.eps {
            for (series, grads) in s.eps_mut().iter_mut().zip(&g.d_eps) {
                for (w, dg) in series.iter_mut().zip(grads) {
                    *w -= cfg.eta_eps * dg;
                }
            }
        }
    }
    Ok((s, reports))
}

fn diverged_at(e: Error, epoch: usize) -> Error {
    match e {
        Error::Diverged { detail, .. } => Error::Diverged { epoch, detail },
        other => other,
    }
}

/// Projected gradient descent in the constrained monotone parametrization.
///
/// The trainable unknowns are the per-step increments of the annealing
/// function plus the endpoint coupling/bias values; gradients reach them by
/// the chain rule through the linear expansion. After every update negative
/// increments are clamped to exactly zero, so the reconstructed annealing
/// function never decreases.
pub fn train_monotone(
    cfg: &TrainingConfig,
    m0: &MonotoneSchedule,
    k0: f64,
    ramp: &BetaRamp,
    rho0: &DensityMatrix,
    rho_des: &DensityMatrix,
) -> Result<(MonotoneSchedule, Vec<LossReport>)> {
    cfg.validate()?;
    let mut m = m0.clone();
    let mut reports = Vec::new();
    for epoch in 0..cfg.max_epochs {
        let s = m.expand(k0)?;
        let traj = run_forward(rho0, &s, ramp).map_err(|e| diverged_at(e, epoch))?;
        let mut report = loss(&traj, rho_des)?;
        report.epoch = epoch;
        finite_or_diverged(&report)?;
        reports.push(report);
        if report.rms <= cfg.stop_rms || epoch + 1 == cfg.max_epochs {
            break;
        }
        let per_step = gradient_impl(&traj, &s, ramp, rho_des, true)?;
        let mg = monotone_chain_rule(&m, k0, &per_step)?;
        if !per_step.is_finite()
            || mg.d_increments.iter().any(|x| !x.is_finite())
            || mg.d_zeta_end.iter().any(|x| !x.is_finite())
            || mg.d_eps_end.iter().any(|x| !x.is_finite())
        {
            return Err(Error::Diverged { epoch, detail: "non-finite gradient".into() });
        }
        for (inc, dg) in m.increments.iter_mut().zip(&mg.d_increments) {
            *inc -= cfg.eta_zeta * dg;
            if *inc < 0.0 {
                *inc = 0.0;
            }
        }
        if cfg.trainable.zeta {
            for (w, dg) in m.zeta_end.iter_mut().zip(&mg.d_zeta_end) {
                *w -= cfg.eta_zeta * dg;
            }
        }
        if cfg.trainable.eps {
            for (w, dg) in m.eps_end.iter_mut().zip(&mg.d_eps_end) {
                *w -= cfg.eta_eps * dg;
            }
        }
        // Fails loudly if clamping has collapsed the annealing range.
        m.normalized_positions()?;
    }
    Ok((m, reports))
}

/// Chain rule from per-step schedule gradients to the monotone unknowns.
pub(crate) fn monotone_chain_rule(
    m: &MonotoneSchedule,
    k0: f64,
    per_step: &GradientSet,
) -> Result<MonotoneGradient> {
    let t = m.timesteps();
    let r = m.normalized_positions()?;
    let total: f64 = m.increments.iter().sum();
    let d_kk = per_step
        .d_kk
        .as_ref()
        .ok_or_else(|| Error::Argument("monotone chain rule needs tunneling gradients".into()))?;

    // u_k = d loss / d r_k.
    let mut u = vec![0.0; t];
    for k in 0..t {
        let mut acc = 0.0;
        for (p, &end) in m.zeta_end.iter().enumerate() {
            acc += per_step.d_zeta[p][k] * end;
        }
        for (q, &end) in m.eps_end.iter().enumerate() {
            acc += per_step.d_eps[q][k] * end;
        }
        for series in d_kk {
            acc -= k0 * series[k];
        }
        u[k] = acc;
    }
    // d r_k / d inc_j = (1_{j<=k} - r_k) / total.
    let weighted: f64 = (0..t).map(|k| r[k] * u[k]).sum();
    let mut suffix = vec![0.0; t + 1];
    for k in (0..t).rev() {
        suffix[k] = suffix[k + 1] + u[k];
    }
    let d_increments: Vec<f64> = (0..t).map(|j| (suffix[j] - weighted) / total).collect();
    let d_zeta_end: Vec<f64> = (0..m.zeta_end.len())
        .map(|p| (0..t).map(|k| r[k] * per_step.d_zeta[p][k]).sum())
        .collect();
    let d_eps_end: Vec<f64> = (0..m.eps_end.len())
        .map(|q| (0..t).map(|k| r[k] * per_step.d_eps[q][k]).sum())
        .collect();
    Ok(MonotoneGradient { d_increments, d_zeta_end, d_eps_end })
}

/// Warm-start an (n)-qubit run from schedules trained at a smaller size:
/// every unordered pair receives the trained coupling series, biases stay at
/// zero, every qubit keeps the standard tunneling ramp, and training
/// proceeds to the given target with the same learning rates.
pub fn bootstrap_size(
    trained: &ScheduleSet,
    n: crate::qops::QubitCount,
    cfg: &TrainingConfig,
    ramp: &BetaRamp,
    rho_des: &DensityMatrix,
) -> Result<(ScheduleSet, Vec<LossReport>)> {
    if n.get() < 3 {
        return Err(Error::Argument("size bootstrapping needs at least 3 qubits".into()));
    }
    if rho_des.n() != n {
        return Err(Error::Argument("target dimension mismatch".into()));
    }
    let s0 = ScheduleSet::seeded_from_pair(
        n,
        trained.timesteps(),
        trained.dt(),
        &trained.zeta()[0],
        &trained.kk()[0],
        trained.trainable(),
    )?;
    let rho0 = crate::states::flat_state(n);
    train(cfg, &s0, ramp, &rho0, rho_des)
}

/// Outcome of one path-parameter value inside [`bootstrap_gamma`].
#[derive(Debug, Clone)]
pub struct GammaResult {
    pub gamma: f64,
    pub schedules: ScheduleSet,
    pub reports: Vec<LossReport>,
    /// Spin averages of the trained run's final interaction-picture state.
    pub spins: Vec<f64>,
    pub final_rms: f64,
}

/// Sweep the path parameter along its grid, warm-starting each value's
/// training from the previous value's trained schedules.
pub fn bootstrap_gamma(
    path: &PathSpec,
    cfg: &TrainingConfig,
    s0: &ScheduleSet,
    ramp: &BetaRamp,
) -> Result<Vec<GammaResult>> {
    path.validate()?;
    let n = path.qubits()?;
    if s0.n() != n {
        return Err(Error::Argument("seed schedule dimension mismatch".into()));
    }
    let rho0 = path_state(path, path.gamma_grid[0])?.density();
    let mut results = Vec::with_capacity(path.gamma_grid.len());
    let mut prev = s0.clone();
    for &gamma in &path.gamma_grid {
        let target = path_state(path, gamma)?.density();
        let (trained, reports) = train(cfg, &prev, ramp, &rho0, &target)
            .map_err(|e| annotate_gamma(e, gamma))?;
        let traj = run_forward(&rho0, &trained, ramp).map_err(|e| annotate_gamma(e, gamma))?;
        let rho_i = traj.final_rho_i().map_err(|e| annotate_gamma(e, gamma))?;
        let spins = spin_averages(&rho_i, n)?;
        let final_rms = crate::propagate::rms_error(&rho_i, target.matrix())?;
        prev = trained.clone();
        results.push(GammaResult { gamma, schedules: trained, reports, spins, final_rms });
    }
    Ok(results)
}

fn annotate_gamma(e: Error, gamma: f64) -> Error {
    match e {
        Error::Diverged { epoch, detail } => Error::Diverged {
            epoch,
            detail: format!("at gamma {gamma}: {detail}"),
        },
        Error::Argument(msg) => Error::Argument(format!("at gamma {gamma}: {msg}")),
        other => other,
    }
}
