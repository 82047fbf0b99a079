//! Dense Hermitian / complex linear-algebra kernels.
//!
//! Everything downstream works with small dense complex matrices (mode
//! counts, truncated Fock spaces of a few hundred levels, maps on `d <= 8`),
//! so the kernels here are thin wrappers around `nalgebra` that add the
//! validation and eigenvalue ordering the rest of the crate relies on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// General dense complex matrix, row/column indexed.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative tolerance below zero for eigenvalues that are still treated as PSD.
pub const PSD_TOL: f64 = 1e-10;

const EIG_MAX_ITER: usize = 0; // 0 = nalgebra default (unbounded sweeps)

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatError {
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian: max |H - H*| = {deviation:.3e} exceeds {allowed:.3e}")]
    NotHermitian { deviation: f64, allowed: f64 },
    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:.6e} below -{allowed:.3e}")]
    NotPsd { min_eigenvalue: f64, allowed: f64 },
    #[error("Hermitian eigensolver failed to converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, MatError>;

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Builds a matrix from row-major entries.
pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<ComplexMatrix> {
    let expected = rows * cols;
    if entries.len() != expected {
        return Err(MatError::EntryCount {
            rows,
            cols,
            expected,
            got: entries.len(),
        });
    }
    Ok(DMatrix::from_row_slice(rows, cols, &entries))
}

pub fn real_diagonal(diag: &[f64]) -> ComplexMatrix {
    DMatrix::from_diagonal(&DVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x))))
}

/// Largest absolute entry; used as the scale for relative tolerances.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = ComplexMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Kronecker product with the first factor as the slow index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// A complex matrix that equals its conjugate transpose.
///
/// Construction checks Hermiticity to [`HERMITIAN_TOL`] relative to the
/// largest entry and then stores the exactly symmetrized matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(MatError::NotSquare { rows, cols });
        }
        let scale = max_abs(&m).max(f64::MIN_POSITIVE);
        let deviation = max_abs(&(&m - m.adjoint()));
        let allowed = HERMITIAN_TOL * scale;
        if deviation > allowed {
            return Err(MatError::NotHermitian { deviation, allowed });
        }
        Ok(Self::symmetrized(m))
    }

    /// Takes `(m + m*) / 2` without checking; callers know `m` is Hermitian
    /// up to rounding.
    pub fn symmetrized(m: ComplexMatrix) -> Self {
        let h = (&m + m.adjoint()).scale(0.5);
        Self(h)
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(real_diagonal(diag))
    }

    /// `a^* a`, always Hermitian PSD.
    pub fn gram(a: &ComplexMatrix) -> Self {
        Self::symmetrized(a.adjoint() * a)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c(shift);
        }
        Self(m)
    }

    /// `x^* H x` for a Hermitian `H`, which is real.
    pub fn quadratic_form(&self, x: &DVector<Complex64>) -> f64 {
        (x.adjoint() * &self.0 * x)[(0, 0)].re
    }

    /// Conjugation `a^* H a`.
    pub fn congruence(&self, a: &ComplexMatrix) -> Self {
        Self::symmetrized(a.adjoint() * &self.0 * a)
    }

    pub fn block_diag(&self, other: &Self) -> Self {
        Self(block_diag(&self.0, &other.0))
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    /// Spectral norm `max |lambda|`.
    pub fn operator_norm(&self) -> Result<f64> {
        let ev = eigenvalues_hermitian(self)?;
        Ok(ev.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())))
    }
}

/// Eigendecomposition `H = U diag(eigenvalues) U*`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub eigenvalues: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        &self.vectors * real_diagonal(&d) * self.vectors.adjoint()
    }
}

pub fn eig_hermitian(h: &HermitianMatrix) -> Result<Eigh> {
    let n = h.dim();
    if n == 0 {
        return Ok(Eigh {
            eigenvalues: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = nalgebra::SymmetricEigen::try_new(h.0.clone(), f64::EPSILON, EIG_MAX_ITER)
        .ok_or(MatError::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok(Eigh {
        eigenvalues,
        vectors,
    })
}

/// Eigenvalues only (ascending); cheaper than [`eig_hermitian`].
pub fn eigenvalues_hermitian(h: &HermitianMatrix) -> Result<Vec<f64>> {
    if h.dim() == 0 {
        return Ok(vec![]);
    }
    let eig = nalgebra::SymmetricEigen::try_new(h.0.clone(), f64::EPSILON, EIG_MAX_ITER)
        .ok_or(MatError::NoConvergence)?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Clamps eigenvalues in `[-PSD_TOL * scale, 0)` to zero, rejecting anything
/// more negative. `scale` is the spectral norm of the matrix.
fn clamp_psd(eigenvalues: &mut [f64]) -> Result<()> {
    let scale = eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let allowed = PSD_TOL * scale;
    for x in eigenvalues.iter_mut() {
        if *x < 0.0 {
            if *x < -allowed {
                return Err(MatError::NotPsd {
                    min_eigenvalue: *x,
                    allowed,
                });
            }
            *x = 0.0;
        }
    }
    Ok(())
}

/// Smallest eigenvalue; `+inf` for an empty matrix.
pub fn min_eigenvalue(h: &HermitianMatrix) -> Result<f64> {
    Ok(eigenvalues_hermitian(h)?
        .first()
        .copied()
        .unwrap_or(f64::INFINITY))
}

/// Eigenvalues of a PSD matrix with rounding negatives clamped to zero.
pub fn psd_eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let mut ev = eigenvalues_hermitian(h)?;
    clamp_psd(&mut ev)?;
    Ok(ev)
}

/// `H^p` for PSD `H`, via the spectral decomposition.
pub fn psd_power(h: &HermitianMatrix, p: f64) -> Result<HermitianMatrix> {
    let mut eig = eig_hermitian(h)?;
    clamp_psd(&mut eig.eigenvalues)?;
    Ok(HermitianMatrix::symmetrized(eig.reconstruct_with(|x| x.powf(p))))
}

/// Determinant of a PSD matrix as the product of its (clamped) eigenvalues.
pub fn det_psd(h: &HermitianMatrix) -> Result<f64> {
    Ok(psd_eigenvalues(h)?.iter().product())
}

/// `ln det H` for PSD `H`; `-inf` when singular.
pub fn log_det_psd(h: &HermitianMatrix) -> Result<f64> {
    Ok(psd_eigenvalues(h)?.iter().map(|x| x.ln()).sum())
}

/// Singular values, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return vec![];
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
