//! Initial, target, and broken-path state constructors.
//!
//! Basis convention: the bit string b1 b2 .. bN maps to the integer with
//! qubit 0 (named A) as the most significant bit, and sigma_z |0> = +|0>.
//! Every constructor here follows that convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qops::{z_sign, C64, CMat, QubitCount};

/// A normalized pure state as a list of 2^n complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: QubitCount,
    amps: Vec<C64>,
}

impl PureState {
    /// Normalize raw amplitudes into a pure state.
    pub fn from_unnormalized(n: QubitCount, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != n.dim() {
            return Err(Error::Argument(format!(
                "expected {} amplitudes for {n} qubits, got {}",
                n.dim(),
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-14 {
            return Err(Error::Argument("cannot normalize the zero vector".into()));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(PureState { n, amps })
    }

    /// The computational basis state |index>.
    pub fn basis(n: QubitCount, index: usize) -> Result<Self> {
        if index >= n.dim() {
            return Err(Error::Argument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n.dim()];
        amps[index] = C64::new(1.0, 0.0);
        Ok(PureState { n, amps })
    }

    pub fn n(&self) -> QubitCount {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// The rank-1 density matrix |psi><psi|.
    pub fn density(&self) -> DensityMatrix {
        let dim = self.n.dim();
        let mat = CMat::from_fn(dim, dim, |i, j| self.amps[i] * self.amps[j].conj());
        DensityMatrix { n: self.n, mat }
    }

    /// Largest entrywise amplitude difference to another state.
    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A physical density matrix: Hermitian with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: QubitCount,
    mat: CMat,
}

impl DensityMatrix {
    /// Validate and wrap a raw matrix (Hermitian within 1e-10, trace 1 within 1e-8).
    pub fn new(n: QubitCount, mat: CMat) -> Result<Self> {
        if mat.nrows() != n.dim() || mat.ncols() != n.dim() {
            return Err(Error::Argument(format!(
                "density matrix is {}x{}, expected {dim}x{dim} for {n} qubits",
                mat.nrows(),
                mat.ncols(),
                dim = n.dim()
            )));
        }
        crate::qops::check_hermitian(&mat, 1e-10, "density matrix")?;
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::Contract(format!(
                "density matrix trace {tr} deviates from 1"
            )));
        }
        Ok(DensityMatrix { n, mat })
    }

    pub fn n(&self) -> QubitCount {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    /// Purity tr(rho^2).
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

/// The uniform coherent superposition: every matrix entry equals 1/2^n.
pub fn flat_state(n: QubitCount) -> DensityMatrix {
    let dim = n.dim();
    let v = C64::new(1.0 / dim as f64, 0.0);
    DensityMatrix { n, mat: CMat::from_element(dim, dim, v) }
}

/// The flat state as a pure state (all amplitudes 1/sqrt(2^n)).
pub fn flat_pure(n: QubitCount) -> PureState {
    PureState::from_unnormalized(n, vec![C64::new(1.0, 0.0); n.dim()]).expect("nonzero")
}

/// The N-qubit GHZ state (|0..0> + |1..1>)/sqrt(2) as a density matrix.
pub fn ghz_state(n: QubitCount) -> Result<DensityMatrix> {
    if n.get() < 2 {
        return Err(Error::Argument("GHZ state needs at least 2 qubits".into()));
    }
    let dim = n.dim();
    let mut mat = CMat::zeros(dim, dim);
    let half = C64::new(0.5, 0.0);
    mat[(0, 0)] = half;
    mat[(0, dim - 1)] = half;
    mat[(dim - 1, 0)] = half;
    mat[(dim - 1, dim - 1)] = half;
    Ok(DensityMatrix { n, mat })
}

/// The N-qubit W state (equal superposition of single-excitation basis
/// states, amplitude 1/sqrt(n) each) as a density matrix.
pub fn w_state(n: QubitCount) -> Result<DensityMatrix> {
    if n.get() < 2 {
        return Err(Error::Argument("W state needs at least 2 qubits".into()));
    }
    Ok(w_pure(n)?.density())
}

fn w_pure(n: QubitCount) -> Result<PureState> {
    let mut amps = vec![C64::new(0.0, 0.0); n.dim()];
    for q in 0..n.get() {
        amps[1usize << q] = C64::new(1.0, 0.0);
    }
    PureState::from_unnormalized(n, amps)
}

fn ghz_pure(n: QubitCount) -> Result<PureState> {
    let mut amps = vec![C64::new(0.0, 0.0); n.dim()];
    amps[0] = C64::new(1.0, 0.0);
    amps[n.dim() - 1] = C64::new(1.0, 0.0);
    PureState::from_unnormalized(n, amps)
}

/// Per-qubit averages <sigma_z,i> = Re tr(rho sigma_z,i).
///
/// Accepts any matrix with unit trace (within 1e-8); the interaction-picture
/// state may be non-Hermitian, so only the real part is reported.
pub fn spin_averages(rho: &CMat, n: QubitCount) -> Result<Vec<f64>> {
    if rho.nrows() != n.dim() || rho.ncols() != n.dim() {
        return Err(Error::Argument(format!(
            "matrix is {}x{}, expected {dim}x{dim}",
            rho.nrows(),
            rho.ncols(),
            dim = n.dim()
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::Contract(format!("trace {tr} deviates from 1")));
    }
    Ok((0..n.get())
        .map(|q| {
            (0..n.dim())
                .map(|i| rho[(i, i)].re * z_sign(q, n, i))
                .sum()
        })
        .collect())
}

/// The state families appearing along the broken annealing paths, plus the
/// constant flat/GHZ/W generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathFamily {
    /// Constant: the flat state (any n).
    Flat,
    /// 2-qubit first leg: |00> + (1-gamma)(|01> + |10> + |11>), normalized.
    Y,
    /// 2-qubit second leg: |00> + gamma |11>, normalized.
    YPrime,
    /// 3-qubit first leg: |000> + |011> + (1-gamma)(all six others), normalized.
    X,
    /// 3-qubit second leg: |000> + (1-gamma)|011> + gamma|111>, normalized.
    XPrime,
    /// 2-qubit first leg toward W: |01> + (1-gamma)(|00> + |11> + |10>), normalized.
    V,
    /// 2-qubit second leg toward W: |01> + gamma |10>, normalized.
    VPrime,
    /// 3-qubit first leg toward W: |001> + (1-gamma)(all seven others), normalized.
    V3,
    /// Constant: the GHZ state (n >= 2).
    Ghz,
    /// Constant: the W state (n >= 2).
    W,
}

impl PathFamily {
    /// Qubit count this family is defined for, or None when any n works.
    pub fn required_qubits(self) -> Option<usize> {
        match self {
            PathFamily::Y | PathFamily::YPrime | PathFamily::V | PathFamily::VPrime => Some(2),
            PathFamily::X | PathFamily::XPrime | PathFamily::V3 => Some(3),
            PathFamily::Flat | PathFamily::Ghz | PathFamily::W => None,
        }
    }
}

impl std::fmt::Display for PathFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            PathFamily::Flat => "flat",
            PathFamily::Y => "y",
            PathFamily::YPrime => "y-prime",
            PathFamily::X => "x",
            PathFamily::XPrime => "x-prime",
            PathFamily::V => "v",
            PathFamily::VPrime => "v-prime",
            PathFamily::V3 => "v3",
            PathFamily::Ghz => "ghz",
            PathFamily::W => "w",
        };
        f.write_str(name)
    }
}

/// A parametrized family of target states defining one leg of a broken path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub family: PathFamily,
    pub n: usize,
    /// Ascending values in [0, 1]; must start at 0 and end at 1.
    pub gamma_grid: Vec<f64>,
}

impl PathSpec {
    /// A path over the default grid {0.0, 0.1, .., 1.0}.
    pub fn with_default_grid(family: PathFamily, n: usize) -> Self {
        PathSpec { family, n, gamma_grid: default_gamma_grid() }
    }

    pub fn qubits(&self) -> Result<QubitCount> {
        QubitCount::new(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        let n = QubitCount::new(self.n)?;
        if let Some(req) = self.family.required_qubits() {
            if n.get() != req {
                return Err(Error::Argument(format!(
                    "family {} is defined for {req} qubits, got {n}",
                    self.family
                )));
            }
        }
        if self.family != PathFamily::Flat && n.get() < 2 && self.family.required_qubits().is_none()
        {
            return Err(Error::Argument(format!(
                "family {} needs at least 2 qubits",
                self.family
            )));
        }
        let g = &self.gamma_grid;
        if g.len() < 2 || g[0] != 0.0 || *g.last().unwrap() != 1.0 {
            return Err(Error::Argument(
                "gamma grid must start at 0.0 and end at 1.0".into(),
            ));
        }
        if g.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("gamma grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// The default ten-step grid: eleven gamma values 0.0, 0.1, .., 1.0.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// The closed-form state of `spec.family` at path parameter `gamma`.
pub fn path_state(spec: &PathSpec, gamma: f64) -> Result<PureState> {
    spec.validate()?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Argument(format!("gamma {gamma} outside [0, 1]")));
    }
    let n = spec.qubits()?;
    let dim = n.dim();
    let one = C64::new(1.0, 0.0);
    let rest = C64::new(1.0 - gamma, 0.0);
    let g = C64::new(gamma, 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    match spec.family {
        PathFamily::Flat => return Ok(flat_pure(n)),
        PathFamily::Ghz => return ghz_pure(n),
        PathFamily::W => return w_pure(n),
        PathFamily::Y => {
            amps[0b00] = one;
            amps[0b01] = rest;
            amps[0b10] = rest;
            amps[0b11] = rest;
        }
        PathFamily::YPrime => {
            amps[0b00] = one;
            amps[0b11] = g;
        }
        PathFamily::X => {
            amps[0b000] = one;
            amps[0b011] = one;
            for idx in [0b001, 0b010, 0b100, 0b110, 0b101, 0b111] {
                amps[idx] = rest;
            }
        }
        PathFamily::XPrime => {
            amps[0b000] = one;
            amps[0b011] = rest;
            amps[0b111] = g;
        }
        PathFamily::V => {
            amps[0b01] = one;
            amps[0b00] = rest;
            amps[0b11] = rest;
            amps[0b10] = rest;
        }
        PathFamily::VPrime => {
            amps[0b01] = one;
            amps[0b10] = g;
        }
        PathFamily::V3 => {
            amps[0b001] = one;
            for idx in [0b000, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111] {
                amps[idx] = rest;
            }
        }
    }
    PureState::from_unnormalized(n, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn n(k: usize) -> QubitCount {
        QubitCount::new(k).unwrap()
    }

    fn spec(family: PathFamily, nq: usize) -> PathSpec {
        PathSpec::with_default_grid(family, nq)
    }

    #[test]
    fn flat_state_entries_and_trace() {
        let rho = flat_state(n(2));
        for entry in rho.matrix().iter() {
            assert_eq!(*entry, C64::new(0.25, 0.0));
        }
        let rho1 = flat_state(n(1));
        assert_eq!(rho1.matrix()[(0, 1)], C64::new(0.5, 0.0));
        assert_abs_diff_eq!(flat_state(n(3)).matrix().trace().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(flat_state(n(2)).purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ghz_state_entries() {
        let rho = ghz_state(n(2)).unwrap();
        let m = rho.matrix();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i == 0 || i == 3) && (j == 0 || j == 3) { 0.5 } else { 0.0 };
                assert_eq!(m[(i, j)], C64::new(expect, 0.0));
            }
        }
        let rho3 = ghz_state(n(3)).unwrap();
        assert_eq!(rho3.matrix()[(0, 7)], C64::new(0.5, 0.0));
        assert_eq!(rho3.matrix()[(7, 7)], C64::new(0.5, 0.0));
        assert_abs_diff_eq!(ghz_state(n(4)).unwrap().purity(), 1.0, epsilon = 1e-12);
        assert!(matches!(ghz_state(n(1)), Err(Error::Argument(_))));
    }

    #[test]
    fn w_state_entries() {
        let rho = w_state(n(2)).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(1, 2)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.matrix()[(1, 1)].re, 0.5, epsilon = 1e-15);
        let rho3 = w_state(n(3)).unwrap();
        for i in 0..8 {
            let expect = if [1, 2, 4].contains(&i) { 1.0 / 3.0 } else { 0.0 };
            assert_abs_diff_eq!(rho3.matrix()[(i, i)].re, expect, epsilon = 1e-14);
        }
        assert!(matches!(w_state(n(1)), Err(Error::Argument(_))));
    }

    #[test]
    fn y_path_midpoint_amplitudes() {
        let psi = path_state(&spec(PathFamily::Y, 2), 0.5).unwrap();
        let norm = 1.75f64.sqrt();
        let expected = [1.0 / norm, 0.5 / norm, 0.5 / norm, 0.5 / norm];
        for (a, e) in psi.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-14);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn endpoint_identities_all_families() {
        let tol = 1e-12;
        let cases: Vec<(PathFamily, usize, PureState, PureState)> = vec![
            (PathFamily::Y, 2, flat_pure(n(2)), PureState::basis(n(2), 0).unwrap()),
            (
                PathFamily::YPrime,
                2,
                PureState::basis(n(2), 0).unwrap(),
                ghz_pure(n(2)).unwrap(),
            ),
            (
                PathFamily::X,
                3,
                flat_pure(n(3)),
                PureState::from_unnormalized(
                    n(3),
                    {
                        let mut a = vec![C64::new(0.0, 0.0); 8];
                        a[0] = C64::new(1.0, 0.0);
                        a[3] = C64::new(1.0, 0.0);
                        a
                    },
                )
                .unwrap(),
            ),
            (
                PathFamily::XPrime,
                3,
                PureState::from_unnormalized(
                    n(3),
                    {
                        let mut a = vec![C64::new(0.0, 0.0); 8];
                        a[0] = C64::new(1.0, 0.0);
                        a[3] = C64::new(1.0, 0.0);
                        a
                    },
                )
                .unwrap(),
                ghz_pure(n(3)).unwrap(),
            ),
            (PathFamily::V, 2, flat_pure(n(2)), PureState::basis(n(2), 1).unwrap()),
            (
                PathFamily::VPrime,
                2,
                PureState::basis(n(2), 1).unwrap(),
                w_pure(n(2)).unwrap(),
            ),
            (PathFamily::V3, 3, flat_pure(n(3)), PureState::basis(n(3), 1).unwrap()),
            (PathFamily::Flat, 2, flat_pure(n(2)), flat_pure(n(2))),
            (PathFamily::Ghz, 3, ghz_pure(n(3)).unwrap(), ghz_pure(n(3)).unwrap()),
            (PathFamily::W, 3, w_pure(n(3)).unwrap(), w_pure(n(3)).unwrap()),
        ];
        for (family, nq, at0, at1) in cases {
            let s = spec(family, nq);
            let p0 = path_state(&s, 0.0).unwrap();
            let p1 = path_state(&s, 1.0).unwrap();
            assert!(p0.max_abs_diff(&at0) < tol, "{family} at gamma=0");
            assert!(p1.max_abs_diff(&at1) < tol, "{family} at gamma=1");
        }
    }

    #[test]
    fn path_states_unit_norm_everywhere() {
        let families = [
            (PathFamily::Y, 2),
            (PathFamily::YPrime, 2),
            (PathFamily::X, 3),
            (PathFamily::XPrime, 3),
            (PathFamily::V, 2),
            (PathFamily::VPrime, 2),
            (PathFamily::V3, 3),
            (PathFamily::Ghz, 2),
            (PathFamily::W, 3),
        ];
        for (family, nq) in families {
            let s = spec(family, nq);
            for k in 0..=100 {
                let gamma = k as f64 / 100.0;
                let psi = path_state(&s, gamma).unwrap();
                let norm: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr()).sum();
                assert!((norm - 1.0).abs() < 1e-12, "{family} at gamma={gamma}");
            }
        }
    }

    #[test]
    fn path_state_rejects_bad_inputs() {
        assert!(matches!(
            path_state(&spec(PathFamily::Y, 3), 0.5),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            path_state(&spec(PathFamily::Y, 2), 1.5),
            Err(Error::Argument(_))
        ));
        let mut bad = spec(PathFamily::Y, 2);
        bad.gamma_grid = vec![0.0, 0.5];
        assert!(bad.validate().is_err());
        bad.gamma_grid = vec![0.0, 0.6, 0.4, 1.0];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn spin_averages_conventions() {
        let zero_zero = PureState::basis(n(2), 0).unwrap().density();
        assert_eq!(spin_averages(zero_zero.matrix(), n(2)).unwrap(), vec![1.0, 1.0]);

        let flat = flat_state(n(2));
        for s in spin_averages(flat.matrix(), n(2)).unwrap() {
            assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
        }
        let ghz3 = ghz_state(n(3)).unwrap();
        for s in spin_averages(ghz3.matrix(), n(3)).unwrap() {
            assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
        }
        let w3 = w_state(n(3)).unwrap();
        // Each qubit carries the excitation with probability 1/3.
        for s in spin_averages(w3.matrix(), n(3)).unwrap() {
            assert_abs_diff_eq!(s, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn spin_averages_nonzero_along_y() {
        let psi = path_state(&spec(PathFamily::Y, 2), 0.5).unwrap();
        let spins = spin_averages(psi.density().matrix(), n(2)).unwrap();
        let mean = spins.iter().sum::<f64>() / spins.len() as f64;
        assert!(mean.abs() > 0.0);
        // Closed form: <sigma_z> = (1 - (1-gamma)^2) / (1 + 3 (1-gamma)^2).
        let expect = (1.0 - 0.25) / 1.75;
        assert_abs_diff_eq!(spins[0], expect, epsilon = 1e-12);
        assert_abs_diff_eq!(spins[1], expect, epsilon = 1e-12);
    }

    #[test]
    fn spin_averages_rejects_bad_trace() {
        let m = CMat::identity(4, 4);
        assert!(matches!(spin_averages(&m, n(2)), Err(Error::Contract(_))));
    }

    #[test]
    fn constructors_produce_physical_states() {
        for dm in [
            flat_state(n(3)),
            ghz_state(n(3)).unwrap(),
            w_state(n(3)).unwrap(),
            path_state(&spec(PathFamily::V3, 3), 0.4).unwrap().density(),
        ] {
            let m = dm.matrix();
            assert!(crate::qops::hermiticity_defect_max(m) < 1e-14);
            assert_abs_diff_eq!(m.trace().re, 1.0, epsilon = 1e-12);
            let eig = crate::qops::herm_eig(m).unwrap();
            assert!(eig.values.iter().all(|&x| x > -1e-10));
            // Pure states are idempotent.
            let sq = m * m;
            assert!(crate::qops::frobenius_distance(&sq, m).unwrap() < 1e-12);
        }
    }
}
