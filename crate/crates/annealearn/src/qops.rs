//! Dense complex linear algebra for registers of up to eight qubits: Pauli
//! embeddings, Hermitian matrix exponentials via eigendecomposition,
//! commutators, and Frobenius norms.
//!
//! All operations are pure functions on immutable inputs. Matrices are dense
//! `nalgebra` matrices of `Complex<f64>`; with at most eight qubits the
//! largest matrix is 256x256, so no sparse machinery is used.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

/// Complex scalar used everywhere in the crate.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMat = DMatrix<C64>;

/// Entrywise tolerance below which a matrix is accepted as Hermitian.
pub const HERM_TOL: f64 = 1e-10;

/// Largest real exponent fed to `exp`; beyond this f64 overflows.
pub const EXP_CLIP: f64 = 700.0;

/// Number of qubits in the register, restricted to 1..=8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitCount(u8);

impl QubitCount {
    pub fn new(n: usize) -> Result<Self> {
        if (1..=8).contains(&n) {
            Ok(QubitCount(n as u8))
        } else {
            Err(Error::Argument(format!("qubit count {n} outside 1..=8")))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Hilbert-space dimension 2^n.
    pub fn dim(self) -> usize {
        1usize << self.0
    }
}

impl std::fmt::Display for QubitCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Pauli axis for single-qubit embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Z,
}

/// Sign of sigma_z on qubit `site` for computational-basis index `index`.
///
/// Basis convention: the bit string b1 b2 .. bN maps to an integer with
/// qubit 0 as the most significant bit, and sigma_z |0> = +|0>.
#[inline]
pub(crate) fn z_sign(site: usize, n: QubitCount, index: usize) -> f64 {
    if index >> (n.get() - 1 - site) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Basis-index bit flipped by sigma_x on qubit `site`.
#[inline]
pub(crate) fn x_flip_mask(site: usize, n: QubitCount) -> usize {
    1usize << (n.get() - 1 - site)
}

/// sigma_axis acting on `site`, tensored with identity on every other qubit.
///
/// The result is Hermitian, squares to the identity and has zero trace.
pub fn embed_pauli(axis: PauliAxis, site: usize, n: QubitCount) -> Result<CMat> {
    if site >= n.get() {
        return Err(Error::Argument(format!(
            "pauli site {site} out of range for {n} qubits"
        )));
    }
    let dim = n.dim();
    let mut m = CMat::zeros(dim, dim);
    match axis {
        PauliAxis::Z => {
            for i in 0..dim {
                m[(i, i)] = C64::new(z_sign(site, n, i), 0.0);
            }
        }
        PauliAxis::X => {
            let mask = x_flip_mask(site, n);
            for i in 0..dim {
                m[(i, i ^ mask)] = C64::new(1.0, 0.0);
            }
        }
    }
    Ok(m)
}

/// Largest entrywise deviation from Hermiticity, max_ij |M_ij - conj(M_ji)|.
pub fn hermiticity_defect_max(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Frobenius norm of M - M^dagger.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let mut acc = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            acc += (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
        }
    }
    acc.sqrt()
}

pub(crate) fn check_hermitian(m: &CMat, tol: f64, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Argument(format!(
            "{what} is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = hermiticity_defect_max(m);
    if defect > tol {
        return Err(Error::Contract(format!(
            "{what} is not Hermitian: max entrywise defect {defect:.3e} > {tol:.1e}"
        )));
    }
    Ok(())
}

fn check_same_dims(a: &CMat, b: &CMat) -> Result<()> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::Argument(format!(
            "dimension mismatch: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix: M = V diag(values) V^dagger.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Real eigenvalues.
    pub values: DVector<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: CMat,
}

impl HermEig {
    /// Apply a scalar function to the spectrum: V diag(f(values)) V^dagger.
    pub fn map_spectrum(&self, mut f: impl FnMut(f64) -> C64) -> CMat {
        let d = DVector::from_iterator(self.values.len(), self.values.iter().map(|&x| f(x)));
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            let fj = d[j];
            for entry in col.iter_mut() {
                *entry *= fj;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// exp(scale * M) with real eigen-exponents clipped at +-[`EXP_CLIP`].
    pub fn expm_scaled(&self, scale: f64) -> CMat {
        let mut clipped = false;
        let out = self.map_spectrum(|x| {
            let mut e = scale * x;
            if e.abs() > EXP_CLIP {
                clipped = true;
                e = e.clamp(-EXP_CLIP, EXP_CLIP);
            }
            C64::new(e.exp(), 0.0)
        });
        if clipped {
            log::warn!(
                "herm_expm: exponent clipped at +-{EXP_CLIP} (scale {scale:.3e}, \
                 spectral radius {:.3e})",
                self.values.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
            );
        }
        out
    }

    /// The unitary exp(i * dt * M).
    pub fn unitary(&self, dt: f64) -> CMat {
        self.map_spectrum(|x| C64::from_polar(1.0, dt * x))
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Fails with a contract error if the input deviates from Hermiticity by more
/// than [`HERM_TOL`] in any entry.
pub fn herm_eig(m: &CMat) -> Result<HermEig> {
    check_hermitian(m, HERM_TOL, "herm_eig input")?;
    let eig = m.clone().symmetric_eigen();
    Ok(HermEig { values: eig.eigenvalues, vectors: eig.eigenvectors })
}

/// exp(scale * M) for Hermitian M, via eigendecomposition.
///
/// Real eigen-exponents beyond +-700 are clipped (with a logged warning) so
/// the result stays finite. `scale == 0` returns the exact identity.
pub fn herm_expm(m: &CMat, scale: f64) -> Result<CMat> {
    if scale == 0.0 {
        check_hermitian(m, HERM_TOL, "herm_expm input")?;
        return Ok(CMat::identity(m.nrows(), m.ncols()));
    }
    Ok(herm_eig(m)?.expm_scaled(scale))
}

/// The commutator AB - BA.
pub fn commutator(a: &CMat, b: &CMat) -> Result<CMat> {
    check_same_dims(a, b)?;
    Ok(a * b - b * a)
}

/// Frobenius norm sqrt(sum |M_ij|^2).
pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius distance sqrt(sum |A_ij - B_ij|^2).
pub fn frobenius_distance(a: &CMat, b: &CMat) -> Result<f64> {
    check_same_dims(a, b)?;
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Hermitian part (M + M^dagger) / 2.
pub(crate) fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// sin(x)/x with a series fallback near zero.
#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// sinh(x)/x with a series fallback near zero.
#[inline]
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sinh() / x
    }
}

/// Divided-difference table of g(x) = exp(i * dt * x) over the eigenvalues:
/// G_ij = (g(d_i) - g(d_j)) / (d_i - d_j), with g'(d_i) on the diagonal.
///
/// Computed in the cancellation-free form
/// G_ij = exp(i dt (d_i+d_j)/2) * i dt * sinc(dt (d_i-d_j)/2).
pub(crate) fn dd_exp_unitary(d: &DVector<f64>, dt: f64) -> CMat {
    let n = d.len();
    CMat::from_fn(n, n, |i, j| {
        let mid = 0.5 * (d[i] + d[j]);
        let half = 0.5 * dt * (d[i] - d[j]);
        let mag = dt * sinc(half);
        C64::from_polar(1.0, dt * mid) * C64::new(0.0, mag)
    })
}

/// Divided-difference table of g(x) = exp(s * x) over the eigenvalues:
/// G_ij = (g(d_i) - g(d_j)) / (d_i - d_j), with g'(d_i) on the diagonal.
///
/// Stable form G_ij = exp(s (d_i+d_j)/2) * s * sinhc(s (d_i-d_j)/2); callers
/// must keep |s * d| within [`EXP_CLIP`].
pub(crate) fn dd_exp_real(d: &DVector<f64>, s: f64) -> DMatrix<f64> {
    let n = d.len();
    DMatrix::from_fn(n, n, |i, j| {
        let mid = 0.5 * (d[i] + d[j]);
        let half = 0.5 * s * (d[i] - d[j]);
        (s * mid).exp() * s * sinhc(half)
    })
}
