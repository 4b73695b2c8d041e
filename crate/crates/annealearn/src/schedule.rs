//! Trainable piecewise-constant parameter schedules, the fixed tunneling
//! ramp, the linear inverse-temperature ramp, and the constrained
//! single-parameter monotone schedule.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qops::{x_flip_mask, z_sign, C64, CMat, QubitCount};

/// Which parameter classes gradient descent is allowed to update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainableMask {
    pub zeta: bool,
    pub eps: bool,
    pub kk: bool,
}

impl Default for TrainableMask {
    /// Couplings only, as in the flat-to-Bell baseline.
    fn default() -> Self {
        TrainableMask { zeta: true, eps: false, kk: false }
    }
}

impl TrainableMask {
    pub fn zeta_only() -> Self {
        TrainableMask { zeta: true, eps: false, kk: false }
    }

    pub fn zeta_and_eps() -> Self {
        TrainableMask { zeta: true, eps: true, kk: false }
    }
}

/// Unordered qubit pairs (a, b) with a < b, in lexicographic order.
pub fn pair_list(n: QubitCount) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n.get() * (n.get() - 1) / 2);
    for a in 0..n.get() {
        for b in a + 1..n.get() {
            pairs.push((a, b));
        }
    }
    pairs
}

/// Qubit label A..H used in serialized parameter names.
pub(crate) fn qubit_label(q: usize) -> char {
    (b'A' + q as u8) as char
}

/// Piecewise-constant time series for every Hamiltonian parameter.
///
/// Each series holds one value per timestep; the value at index k applies on
/// the interval [k dt, (k+1) dt). Couplings are stored once per unordered
/// pair and enter the Hamiltonian once.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSet {
    n: QubitCount,
    timesteps: usize,
    dt: f64,
    /// Pair couplings, indexed like [`pair_list`].
    zeta: Vec<Vec<f64>>,
    /// Per-qubit biases.
    eps: Vec<Vec<f64>>,
    /// Per-qubit tunneling amplitudes.
    kk: Vec<Vec<f64>>,
    trainable: TrainableMask,
}

impl ScheduleSet {
    /// All-zero schedules.
    pub fn zeros(n: QubitCount, timesteps: usize, dt: f64) -> Result<Self> {
        if timesteps < 2 {
            return Err(Error::Argument("need at least 2 timesteps".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::Argument(format!("dt must be positive, got {dt}")));
        }
        let pairs = n.get() * (n.get() - 1) / 2;
        Ok(ScheduleSet {
            n,
            timesteps,
            dt,
            zeta: vec![vec![0.0; timesteps]; pairs],
            eps: vec![vec![0.0; timesteps]; n.get()],
            kk: vec![vec![0.0; timesteps]; n.get()],
            trainable: TrainableMask::default(),
        })
    }

    /// Zero couplings and biases with the standard tunneling ramp on every
    /// qubit: linear from `k0` down to zero at `ramp_end_fraction` of the run.
    pub fn annealing_init(
        n: QubitCount,
        timesteps: usize,
        dt: f64,
        k0: f64,
        ramp_end_fraction: f64,
    ) -> Result<Self> {
        let mut s = ScheduleSet::zeros(n, timesteps, dt)?;
        let ramp = tunneling_ramp(timesteps, k0, ramp_end_fraction)?;
        for series in &mut s.kk {
            series.clone_from(&ramp);
        }
        Ok(s)
    }

    pub fn n(&self) -> QubitCount {
        self.n
    }

    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Total evolution time T * dt.
    pub fn t_f(&self) -> f64 {
        self.timesteps as f64 * self.dt
    }

    pub fn trainable(&self) -> TrainableMask {
        self.trainable
    }

    pub fn set_trainable(&mut self, mask: TrainableMask) {
        self.trainable = mask;
    }

    pub fn zeta(&self) -> &[Vec<f64>] {
        &self.zeta
    }

    pub fn eps(&self) -> &[Vec<f64>] {
        &self.eps
    }

    pub fn kk(&self) -> &[Vec<f64>] {
        &self.kk
    }

    pub(crate) fn zeta_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.zeta
    }

    pub(crate) fn eps_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.eps
    }

    pub(crate) fn kk_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.kk
    }

    /// Replace one full series; used by tests and seeding helpers.
    pub fn set_zeta_series(&mut self, pair: usize, series: Vec<f64>) -> Result<()> {
        if pair >= self.zeta.len() || series.len() != self.timesteps {
            return Err(Error::Argument("zeta series index or length mismatch".into()));
        }
        self.zeta[pair] = series;
        Ok(())
    }

    pub fn set_eps_series(&mut self, qubit: usize, series: Vec<f64>) -> Result<()> {
        if qubit >= self.eps.len() || series.len() != self.timesteps {
            return Err(Error::Argument("eps series index or length mismatch".into()));
        }
        self.eps[qubit] = series;
        Ok(())
    }

    pub fn set_kk_series(&mut self, qubit: usize, series: Vec<f64>) -> Result<()> {
        if qubit >= self.kk.len() || series.len() != self.timesteps {
            return Err(Error::Argument("kk series index or length mismatch".into()));
        }
        self.kk[qubit] = series;
        Ok(())
    }

    fn check_step(&self, k: usize) -> Result<()> {
        if k >= self.timesteps {
            return Err(Error::Argument(format!(
                "step {k} out of range, schedule has {} steps",
                self.timesteps
            )));
        }
        Ok(())
    }

    /// H(t_k) = sum_a K_a sigma_xa + eps_a sigma_za
    ///        + sum_{a<b} zeta_ab sigma_za sigma_zb.
    ///
    /// Hermitian by construction. Each unordered pair coupling is added once.
    pub fn hamiltonian(&self, k: usize) -> Result<CMat> {
        self.check_step(k)?;
        Ok(self.assemble(k, None))
    }

    /// Hamiltonian at step `k` with a single parameter value shifted by
    /// `delta`; used by the finite-difference oracle.
    pub(crate) fn hamiltonian_perturbed(
        &self,
        k: usize,
        class: ParamClass,
        index: usize,
        delta: f64,
    ) -> Result<CMat> {
        self.check_step(k)?;
        Ok(self.assemble(k, Some((class, index, delta))))
    }

    fn assemble(&self, k: usize, perturb: Option<(ParamClass, usize, f64)>) -> CMat {
        let n = self.n;
        let dim = n.dim();
        let mut zeta_k: Vec<f64> = self.zeta.iter().map(|s| s[k]).collect();
        let mut eps_k: Vec<f64> = self.eps.iter().map(|s| s[k]).collect();
        let mut kk_k: Vec<f64> = self.kk.iter().map(|s| s[k]).collect();
        if let Some((class, index, delta)) = perturb {
            match class {
                ParamClass::Zeta => zeta_k[index] += delta,
                ParamClass::Eps => eps_k[index] += delta,
                ParamClass::Kk => kk_k[index] += delta,
            }
        }
        let mut m = CMat::zeros(dim, dim);
        let pairs = pair_list(n);
        for i in 0..dim {
            let mut d = 0.0;
            for q in 0..n.get() {
                d += eps_k[q] * z_sign(q, n, i);
            }
            for (p, &(a, b)) in pairs.iter().enumerate() {
                d += zeta_k[p] * z_sign(a, n, i) * z_sign(b, n, i);
            }
            m[(i, i)] = C64::new(d, 0.0);
        }
        for q in 0..n.get() {
            if kk_k[q] == 0.0 {
                continue;
            }
            let mask = x_flip_mask(q, n);
            for i in 0..dim {
                m[(i, i ^ mask)] += C64::new(kk_k[q], 0.0);
            }
        }
        m
    }

    /// Copy one pair-coupling series into every pair slot of a fresh
    /// larger-system schedule (the size-bootstrapping seed). Biases stay
    /// zero and every qubit gets the same tunneling ramp as the seed system.
    pub fn seeded_from_pair(
        n: QubitCount,
        timesteps: usize,
        dt: f64,
        zeta_seed: &[f64],
        kk_seed: &[f64],
        trainable: TrainableMask,
    ) -> Result<Self> {
        let mut s = ScheduleSet::zeros(n, timesteps, dt)?;
        let lifted = lift_pair_schedule(zeta_seed, n)?;
        if kk_seed.len() != timesteps || zeta_seed.len() != timesteps {
            return Err(Error::Argument("seed series length mismatch".into()));
        }
        s.zeta = lifted;
        for series in &mut s.kk {
            series.clone_from(&kk_seed.to_vec());
        }
        s.trainable = trainable;
        Ok(s)
    }

    /// Serialized parameter names, one per series, in file order.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for q in 0..self.n.get() {
            names.push(format!("K_{}", qubit_label(q)));
        }
        for q in 0..self.n.get() {
            names.push(format!("eps_{}", qubit_label(q)));
        }
        for (a, b) in pair_list(self.n) {
            names.push(format!("zeta_{}{}", qubit_label(a), qubit_label(b)));
        }
        names
    }

    /// Write the schedule as CSV (`step,time,param_name,value`) plus a JSON
    /// metadata sidecar next to it. Values are printed with 17 significant
    /// digits so the round trip is bit-exact.
    pub fn write_csv(&self, csv_path: &Path) -> Result<()> {
        let file = std::fs::File::create(csv_path)
            .map_err(|e| Error::io(format!("creating {}", csv_path.display()), e))?;
        let mut out = std::io::BufWriter::new(file);
        let ctx = || format!("writing {}", csv_path.display());
        writeln!(out, "step,time,param_name,value").map_err(|e| Error::io(ctx(), e))?;
        let names = self.param_names();
        for k in 0..self.timesteps {
            let t = k as f64 * self.dt;
            let mut col = 0;
            let mut write_row = |name: &str, v: f64| -> Result<()> {
                writeln!(out, "{k},{t:.16e},{name},{v:.16e}").map_err(|e| Error::io(ctx(), e))
            };
            for q in 0..self.n.get() {
                write_row(&names[col], self.kk[q][k])?;
                col += 1;
            }
            for q in 0..self.n.get() {
                write_row(&names[col], self.eps[q][k])?;
                col += 1;
            }
            for p in 0..self.zeta.len() {
                write_row(&names[col], self.zeta[p][k])?;
                col += 1;
            }
        }
        out.flush().map_err(|e| Error::io(ctx(), e))?;
        let sidecar = sidecar_path(csv_path);
        let meta = ScheduleMeta {
            n: self.n.get(),
            timesteps: self.timesteps,
            dt: self.dt,
            trainable_mask: self.trainable,
        };
        let json = serde_json::to_string_pretty(&meta).expect("schedule meta serializes");
        std::fs::write(&sidecar, json)
            .map_err(|e| Error::io(format!("writing {}", sidecar.display()), e))?;
        Ok(())
    }

    /// Read a schedule written by [`ScheduleSet::write_csv`].
    pub fn read_csv(csv_path: &Path) -> Result<Self> {
        let sidecar = sidecar_path(csv_path);
        let meta_text = std::fs::read_to_string(&sidecar)
            .map_err(|e| Error::io(format!("reading {}", sidecar.display()), e))?;
        let meta: ScheduleMeta = serde_json::from_str(&meta_text).map_err(|e| Error::Parse {
            file: sidecar.display().to_string(),
            detail: e.to_string(),
        })?;
        let n = QubitCount::new(meta.n)?;
        let mut s = ScheduleSet::zeros(n, meta.timesteps, meta.dt)?;
        s.trainable = meta.trainable_mask;

        let file = std::fs::File::open(csv_path)
            .map_err(|e| Error::io(format!("opening {}", csv_path.display()), e))?;
        let reader = BufReader::new(file);
        let parse_err = |line: usize, detail: String| Error::Parse {
            file: csv_path.display().to_string(),
            detail: format!("line {line}: {detail}"),
        };
        let pairs = pair_list(n);
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(format!("reading {}", csv_path.display()), e))?;
            if lineno == 0 {
                if line.trim() != "step,time,param_name,value" {
                    return Err(parse_err(1, format!("unexpected header {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut next = |what: &str| {
                fields
                    .next()
                    .ok_or_else(|| parse_err(lineno + 1, format!("missing {what} field")))
            };
            let step: usize = next("step")?
                .parse()
                .map_err(|e| parse_err(lineno + 1, format!("bad step: {e}")))?;
            let _time = next("time")?;
            let name = next("param_name")?.to_string();
            let value: f64 = next("value")?
                .parse()
                .map_err(|e| parse_err(lineno + 1, format!("bad value: {e}")))?;
            if step >= meta.timesteps {
                return Err(parse_err(lineno + 1, format!("step {step} out of range")));
            }
            let (class, label) = name
                .split_once('_')
                .ok_or_else(|| parse_err(lineno + 1, format!("bad param name {name:?}")))?;
            let qidx = |c: char| c as usize - 'A' as usize;
            match class {
                "K" | "eps" => {
                    let q = qidx(label.chars().next().unwrap_or('?'));
                    if q >= n.get() {
                        return Err(parse_err(lineno + 1, format!("bad qubit in {name:?}")));
                    }
                    if class == "K" {
                        s.kk[q][step] = value;
                    } else {
                        s.eps[q][step] = value;
                    }
                }
                "zeta" => {
                    let chars: Vec<char> = label.chars().collect();
                    if chars.len() != 2 {
                        return Err(parse_err(lineno + 1, format!("bad pair in {name:?}")));
                    }
                    let pair = (qidx(chars[0]), qidx(chars[1]));
                    let p = pairs
                        .iter()
                        .position(|&x| x == pair)
                        .ok_or_else(|| parse_err(lineno + 1, format!("unknown pair {name:?}")))?;
                    s.zeta[p][step] = value;
                }
                _ => return Err(parse_err(lineno + 1, format!("unknown class in {name:?}"))),
            }
        }
        Ok(s)
    }
}

fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("json")
}

#[derive(Serialize, Deserialize)]
struct ScheduleMeta {
    n: usize,
    timesteps: usize,
    dt: f64,
    trainable_mask: TrainableMask,
}

/// Parameter class selector used by gradient bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamClass {
    Zeta,
    Eps,
    Kk,
}

/// The standard tunneling ramp: linear from `k0` at step 0 down to zero at
/// step floor(T/2), and zero afterwards.
pub fn default_tunneling_ramp(timesteps: usize, k0: f64) -> Result<Vec<f64>> {
    tunneling_ramp(timesteps, k0, 0.5)
}

/// Tunneling ramp reaching zero at `end_fraction` of the run.
pub fn tunneling_ramp(timesteps: usize, k0: f64, end_fraction: f64) -> Result<Vec<f64>> {
    if timesteps < 2 {
        return Err(Error::Argument("ramp needs at least 2 steps".into()));
    }
    if !(k0 > 0.0) {
        return Err(Error::Argument(format!("ramp start must be positive, got {k0}")));
    }
    if !(0.0 < end_fraction && end_fraction <= 1.0) {
        return Err(Error::Argument(format!(
            "ramp end fraction {end_fraction} outside (0, 1]"
        )));
    }
    let end = ((timesteps as f64) * end_fraction).floor() as usize;
    let end = end.max(1);
    Ok((0..timesteps)
        .map(|k| {
            if k >= end {
                0.0
            } else {
                k0 * (1.0 - k as f64 / end as f64)
            }
        })
        .collect())
}

/// Copy one 2-qubit coupling series to every unordered pair of an n-qubit
/// system; the seed for size bootstrapping.
pub fn lift_pair_schedule(zeta2: &[f64], n: QubitCount) -> Result<Vec<Vec<f64>>> {
    if n.get() < 3 {
        return Err(Error::Argument("pair lifting needs at least 3 qubits".into()));
    }
    let pairs = n.get() * (n.get() - 1) / 2;
    Ok(vec![zeta2.to_vec(); pairs])
}

/// Linear inverse-temperature ramp from 0 at t=0 to `beta_f` at `t_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaRamp {
    pub beta_f: f64,
    pub t_f: f64,
}

impl Default for BetaRamp {
    fn default() -> Self {
        BetaRamp { beta_f: 2500.0, t_f: 5000.0 }
    }
}

impl BetaRamp {
    pub fn validate(&self) -> Result<()> {
        if self.beta_f < 0.0 {
            return Err(Error::Argument(format!("beta_f {} must be >= 0", self.beta_f)));
        }
        if !(self.t_f > 0.0) {
            return Err(Error::Argument(format!("t_f {} must be positive", self.t_f)));
        }
        Ok(())
    }

    /// beta(t) = beta_f * t / t_f.
    pub fn beta_at(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.t_f).contains(&t) {
            return Err(Error::Argument(format!(
                "time {t} outside [0, {}]",
                self.t_f
            )));
        }
        Ok(self.beta_f * t / self.t_f)
    }
}

/// Constrained schedule parametrization: a single non-decreasing annealing
/// function S_w (stored as per-step non-negative increments) that generates
/// every Hamiltonian parameter by a linear map onto trainable endpoint
/// values, with the tunneling amplitude pinned to zero at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneSchedule {
    pub n: usize,
    pub dt: f64,
    /// Non-negative per-step increments of S_w.
    pub increments: Vec<f64>,
    /// S_w value at t = 0, before the first increment.
    pub s0: f64,
    /// Trainable final coupling per unordered pair.
    pub zeta_end: Vec<f64>,
    /// Trainable final bias per qubit.
    pub eps_end: Vec<f64>,
}

impl MonotoneSchedule {
    /// Uniform increments (linear S_w) with all endpoints at zero.
    pub fn uniform_init(n: QubitCount, timesteps: usize, dt: f64) -> Result<Self> {
        if timesteps < 2 {
            return Err(Error::Argument("need at least 2 timesteps".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::Argument(format!("dt must be positive, got {dt}")));
        }
        Ok(MonotoneSchedule {
            n: n.get(),
            dt,
            increments: vec![1.0 / timesteps as f64; timesteps],
            s0: 0.0,
            zeta_end: vec![0.0; n.get() * (n.get() - 1) / 2],
            eps_end: vec![0.0; n.get()],
        })
    }

    pub fn qubits(&self) -> Result<QubitCount> {
        QubitCount::new(self.n)
    }

    pub fn timesteps(&self) -> usize {
        self.increments.len()
    }

    /// S_w at each step: S_w(k) = s0 + sum of the first k+1 increments.
    pub fn s_w_series(&self) -> Vec<f64> {
        let mut acc = self.s0;
        self.increments
            .iter()
            .map(|&inc| {
                acc += inc;
                acc
            })
            .collect()
    }

    /// Normalized positions r_k = (S_w(k) - s0) / (S_w(end) - s0) in [0, 1].
    pub fn normalized_positions(&self) -> Result<Vec<f64>> {
        let s = self.s_w_series();
        let total = s.last().copied().unwrap_or(self.s0) - self.s0;
        if total <= 1e-12 {
            return Err(Error::DegenerateSchedule(format!(
                "S_w range {total:.3e} is not strictly positive"
            )));
        }
        Ok(s.iter().map(|&v| (v - self.s0) / total).collect())
    }

    /// Expand into full per-step schedules: couplings and biases rise
    /// linearly in S_w to their endpoint values, and the tunneling amplitude
    /// falls linearly in S_w from `k0` to exactly zero at the last step.
    pub fn expand(&self, k0: f64) -> Result<ScheduleSet> {
        let n = self.qubits()?;
        let timesteps = self.timesteps();
        if self.zeta_end.len() != n.get() * (n.get() - 1) / 2 || self.eps_end.len() != n.get() {
            return Err(Error::Argument("endpoint vector lengths mismatch n".into()));
        }
        if self.increments.iter().any(|&x| x < 0.0) {
            return Err(Error::Contract("negative S_w increment".into()));
        }
        let r = self.normalized_positions()?;
        let mut s = ScheduleSet::zeros(n, timesteps, self.dt)?;
        for (p, &end) in self.zeta_end.iter().enumerate() {
            for k in 0..timesteps {
                s.zeta[p][k] = r[k] * end;
            }
        }
        for (q, &end) in self.eps_end.iter().enumerate() {
            for k in 0..timesteps {
                s.eps[q][k] = r[k] * end;
            }
        }
        for q in 0..n.get() {
            for k in 0..timesteps {
                s.kk[q][k] = k0 * (1.0 - r[k]);
            }
        }
        s.trainable = TrainableMask { zeta: true, eps: true, kk: true };
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::{embed_pauli, hermiticity_defect_max, PauliAxis};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn n(k: usize) -> QubitCount {
        QubitCount::new(k).unwrap()
    }

    #[test]
    fn ramp_matches_example() {
        let ramp = default_tunneling_ramp(4, 1.0).unwrap();
        assert_eq!(ramp, vec![1.0, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn ramp_starts_at_k0_and_ends_zero() {
        let ramp = default_tunneling_ramp(2000, 1.5e-3).unwrap();
        assert_eq!(ramp[0], 1.5e-3);
        for &v in &ramp[1000..] {
            assert_eq!(v, 0.0);
        }
        assert!(ramp[999] > 0.0);
    }

    #[test]
    fn ramp_end_fraction_configurable() {
        let ramp = tunneling_ramp(10, 1.0, 0.8).unwrap();
        assert_eq!(ramp[8], 0.0);
        assert!(ramp[7] > 0.0);
        assert!(tunneling_ramp(10, 1.0, 0.0).is_err());
        assert!(tunneling_ramp(10, -1.0, 0.5).is_err());
    }

    #[test]
    fn beta_ramp_is_linear() {
        let ramp = BetaRamp::default();
        assert_eq!(ramp.beta_at(0.0).unwrap(), 0.0);
        assert_eq!(ramp.beta_at(5000.0).unwrap(), 2500.0);
        assert_eq!(ramp.beta_at(2500.0).unwrap(), 1250.0);
        assert!(ramp.beta_at(-1.0).is_err());
        assert!(ramp.beta_at(5000.1).is_err());
    }

    #[test]
    fn hamiltonian_trivial_cases() {
        let s = ScheduleSet::zeros(n(2), 4, 1.0).unwrap();
        let h = s.hamiltonian(0).unwrap();
        assert_eq!(crate::qops::frobenius_norm(&h), 0.0);
        assert!(s.hamiltonian(4).is_err());

        let mut s1 = ScheduleSet::zeros(n(1), 4, 1.0).unwrap();
        s1.set_kk_series(0, vec![1.0; 4]).unwrap();
        let h1 = s1.hamiltonian(0).unwrap();
        let sx = embed_pauli(PauliAxis::X, 0, n(1)).unwrap();
        assert_eq!(crate::qops::frobenius_distance(&h1, &sx).unwrap(), 0.0);

        let mut s2 = ScheduleSet::zeros(n(2), 4, 1.0).unwrap();
        s2.set_zeta_series(0, vec![1.0; 4]).unwrap();
        let h2 = s2.hamiltonian(2).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| h2[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn hamiltonian_matches_pauli_sum() {
        // Cross-check the fast assembly against the explicit operator sum.
        let nn = n(3);
        let mut s = ScheduleSet::zeros(nn, 3, 1.0).unwrap();
        let vals = [0.3, -0.7, 0.11, 0.23, -0.5, 0.9, 0.41, -0.13, 0.77];
        let mut it = vals.iter().copied().cycle();
        for p in 0..3 {
            let v = it.next().unwrap();
            s.set_zeta_series(p, vec![v; 3]).unwrap();
        }
        for q in 0..3 {
            let v = it.next().unwrap();
            s.set_eps_series(q, vec![v; 3]).unwrap();
            let v = it.next().unwrap();
            s.set_kk_series(q, vec![v; 3]).unwrap();
        }
        let fast = s.hamiltonian(1).unwrap();
        let mut explicit = CMat::zeros(8, 8);
        for q in 0..3 {
            let sx = embed_pauli(PauliAxis::X, q, nn).unwrap();
            let sz = embed_pauli(PauliAxis::Z, q, nn).unwrap();
            explicit += sx.map(|x| x * C64::new(s.kk()[q][1], 0.0));
            explicit += sz.map(|x| x * C64::new(s.eps()[q][1], 0.0));
        }
        for (p, (a, b)) in pair_list(nn).into_iter().enumerate() {
            let za = embed_pauli(PauliAxis::Z, a, nn).unwrap();
            let zb = embed_pauli(PauliAxis::Z, b, nn).unwrap();
            explicit += (za * zb).map(|x| x * C64::new(s.zeta()[p][1], 0.0));
        }
        assert!(crate::qops::frobenius_distance(&fast, &explicit).unwrap() < 1e-13);
        assert!(hermiticity_defect_max(&fast) < 1e-14);
    }

    #[test]
    fn lift_preserves_seed_exactly() {
        let seed = vec![0.1, -0.2, 0.3];
        let lifted = lift_pair_schedule(&seed, n(3)).unwrap();
        assert_eq!(lifted.len(), 3);
        for series in &lifted {
            assert_eq!(series, &seed);
        }
        assert_eq!(lift_pair_schedule(&seed, n(4)).unwrap().len(), 6);
        let zeros = lift_pair_schedule(&[0.0; 3], n(4)).unwrap();
        assert!(zeros.iter().all(|s| s.iter().all(|&v| v == 0.0)));
        assert!(lift_pair_schedule(&seed, n(2)).is_err());
    }

    #[test]
    fn monotone_uniform_expands_linearly() {
        let nn = n(2);
        let mut m = MonotoneSchedule::uniform_init(nn, 10, 1.0).unwrap();
        m.zeta_end[0] = 0.5;
        let s = m.expand(1.0).unwrap();
        for k in 0..10 {
            let expect = 0.5 * (k + 1) as f64 / 10.0;
            assert_abs_diff_eq!(s.zeta()[0][k], expect, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(s.zeta()[0][9], 0.5, epsilon = 1e-15);
        // K drops to exactly zero at the end regardless of the increments.
        assert_eq!(s.kk()[0][9], 0.0);
        assert_eq!(s.kk()[1][9], 0.0);
    }

    #[test]
    fn monotone_step_at_end() {
        let nn = n(2);
        let mut m = MonotoneSchedule::uniform_init(nn, 5, 1.0).unwrap();
        m.increments = vec![0.0, 0.0, 0.0, 0.0, 2.0];
        m.zeta_end[0] = 0.7;
        let s = m.expand(1.0).unwrap();
        assert_eq!(&s.zeta()[0][..4], &[0.0; 4]);
        assert_abs_diff_eq!(s.zeta()[0][4], 0.7, epsilon = 1e-15);
        assert_eq!(s.kk()[0][4], 0.0);
        assert_eq!(s.kk()[0][0], 1.0);
    }

    #[test]
    fn monotone_degenerate_range_rejected() {
        let nn = n(2);
        let mut m = MonotoneSchedule::uniform_init(nn, 5, 1.0).unwrap();
        m.increments = vec![0.0; 5];
        assert!(matches!(m.expand(1.0), Err(Error::DegenerateSchedule(_))));
    }

    #[test]
    fn schedule_csv_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("schedule.csv");
        let nn = n(3);
        let mut s = ScheduleSet::annealing_init(nn, 7, 2.5, 1.5e-3, 0.5).unwrap();
        let mut v = 0.123456789012345e-3;
        for p in 0..3 {
            let series: Vec<f64> = (0..7)
                .map(|k| {
                    v = (v * 1.7 + k as f64 * 1e-7).sin() * 1e-2;
                    v
                })
                .collect();
            s.set_zeta_series(p, series).unwrap();
        }
        s.set_eps_series(1, vec![std::f64::consts::PI * 1e-4; 7]).unwrap();
        s.set_trainable(TrainableMask::zeta_and_eps());
        s.write_csv(&path).unwrap();
        let back = ScheduleSet::read_csv(&path).unwrap();
        assert_eq!(back.n(), s.n());
        assert_eq!(back.dt(), s.dt());
        assert_eq!(back.trainable(), s.trainable());
        for (a, b) in s.zeta().iter().zip(back.zeta()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        for (a, b) in s.kk().iter().zip(back.kk()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        for (a, b) in s.eps().iter().zip(back.eps()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn assembled_hamiltonian_hermitian(seed in 0u64..500) {
            let nn = n(2 + (seed % 3) as usize);
            let mut s = ScheduleSet::zeros(nn, 3, 1.0).unwrap();
            let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            let mut next = || {
                state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            for p in 0..s.zeta().len() {
                s.set_zeta_series(p, (0..3).map(|_| next()).collect()).unwrap();
            }
            for q in 0..nn.get() {
                s.set_eps_series(q, (0..3).map(|_| next()).collect()).unwrap();
                s.set_kk_series(q, (0..3).map(|_| next()).collect()).unwrap();
            }
            let h = s.hamiltonian(1).unwrap();
            prop_assert!(hermiticity_defect_max(&h) < 1e-14);
        }

        #[test]
        fn monotone_reconstruction_non_decreasing(
            incs in proptest::collection::vec(0.0f64..1.0, 5..40),
        ) {
            prop_assume!(incs.iter().sum::<f64>() > 1e-9);
            let m = MonotoneSchedule {
                n: 2,
                dt: 1.0,
                increments: incs,
                s0: -0.3,
                zeta_end: vec![0.4],
                eps_end: vec![0.0, 0.1],
            };
            let s_w = m.s_w_series();
            prop_assert!(s_w.windows(2).all(|w| w[1] >= w[0]));
            let r = m.normalized_positions().unwrap();
            prop_assert!(r.windows(2).all(|w| w[1] >= w[0]));
            prop_assert!(r.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
        }
    }
}
