//! Complex Hermitian matrices, eigendecomposition, the norm family, and
//! positive-definiteness utilities used throughout the estimator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix alias used across the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Zero tolerance used by the sparsity-counting norms when none is given.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Hermitian-symmetry tolerance accepted by [`HermitianMatrix::try_new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Errors produced by the matrix utilities.
#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian {
        max_asymmetry: f64,
        tolerance: f64,
    },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix has no nonzero off-diagonal entry")]
    NoOffDiagonal,
    #[error("nuclear norm requires a positive semidefinite matrix (min eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
}

/// A p x p complex Hermitian matrix.
///
/// Construction enforces conjugate symmetry: entries are averaged with their
/// conjugate transpose and diagonal imaginary parts are zeroed, so the stored
/// matrix satisfies `M = M†` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

impl HermitianMatrix {
    /// Builds from a matrix that is already Hermitian within [`HERMITIAN_TOL`]
    /// (scaled by the largest entry modulus). Rejects anything farther away;
    /// use [`hermitize`] to force symmetry on drifted input.
    pub fn try_new(m: CMatrix) -> Result<Self, MatrixError> {
        check_square(&m)?;
        check_finite(&m)?;
        let p = m.nrows();
        let mut scale: f64 = 1.0;
        for v in m.iter() {
            scale = scale.max(v.norm());
        }
        let tol = HERMITIAN_TOL * scale;
        let mut max_asym: f64 = 0.0;
        for i in 0..p {
            max_asym = max_asym.max(m[(i, i)].im.abs());
            for j in (i + 1)..p {
                max_asym = max_asym.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if max_asym > tol {
            return Err(MatrixError::NotHermitian {
                max_asymmetry: max_asym,
                tolerance: tol,
            });
        }
        Ok(Self::enforce(m))
    }

    /// Symmetrizes without tolerance checks. Used internally where hermiticity
    /// holds by construction up to floating-point drift.
    pub(crate) fn enforce(mut m: CMatrix) -> Self {
        let p = m.nrows();
        for i in 0..p {
            m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..p {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Self { data: m }
    }

    /// The p x p zero matrix.
    pub fn zeros(p: usize) -> Self {
        Self {
            data: CMatrix::zeros(p, p),
        }
    }

    /// The p x p identity.
    pub fn identity(p: usize) -> Self {
        Self {
            data: CMatrix::identity(p, p),
        }
    }

    /// Hermitian matrix with the given real diagonal and zero off-diagonal.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let p = diag.len();
        let mut m = CMatrix::zeros(p, p);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self { data: m }
    }

    /// Embeds a real symmetric matrix (symmetrizing drift away).
    pub fn from_real(m: &DMatrix<f64>) -> Result<Self, MatrixError> {
        if m.nrows() != m.ncols() {
            return Err(MatrixError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(Self::enforce(m.map(|v| Complex64::new(v, 0.0))))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    /// Real diagonal of the matrix.
    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    /// Trace; real by hermiticity.
    pub fn trace(&self) -> f64 {
        self.real_diagonal().iter().sum()
    }

    /// Entrywise sum with another Hermitian matrix.
    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.dim() != other.dim() {
            return Err(MatrixError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self {
            data: &self.data + &other.data,
        })
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.dim() != other.dim() {
            return Err(MatrixError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self {
            data: &self.data - &other.data,
        })
    }

    /// Scales by a real factor.
    pub fn scale(&self, factor: f64) -> Self {
        Self {
            data: self.data.map(|v| v * factor),
        }
    }

    /// Count of entries with modulus above `tol`.
    pub fn nonzero_count(&self, tol: f64) -> usize {
        self.data.iter().filter(|v| v.norm() > tol).count()
    }

    /// Count of strict upper-triangle entries with modulus above `tol`,
    /// i.e. half the off-diagonal support size.
    pub fn upper_nonzero_count(&self, tol: f64) -> usize {
        let p = self.dim();
        let mut n = 0;
        for i in 0..p {
            for j in (i + 1)..p {
                if self.data[(i, j)].norm() > tol {
                    n += 1;
                }
            }
        }
        n
    }
}

/// Spectral decomposition of a Hermitian matrix: real eigenvalues in
/// descending order and unitary eigenvectors with a fixed sign convention.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// Rebuilds `U diag(lambda) U†` with a replaced spectrum.
    pub fn rebuild_with(&self, eigenvalues: &[f64]) -> HermitianMatrix {
        let p = self.eigenvectors.nrows();
        let mut m = CMatrix::zeros(p, p);
        for (k, &lam) in eigenvalues.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            let col = self.eigenvectors.column(k);
            for j in 0..p {
                let w = col[j].conj() * lam;
                for i in 0..p {
                    m[(i, j)] += col[i] * w;
                }
            }
        }
        HermitianMatrix::enforce(m)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

fn check_square(m: &CMatrix) -> Result<(), MatrixError> {
    if m.nrows() != m.ncols() {
        return Err(MatrixError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn check_finite(m: &CMatrix) -> Result<(), MatrixError> {
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(MatrixError::NonFinite);
    }
    Ok(())
}

/// Projects a square complex matrix onto the Hermitian subspace: `(M + M†)/2`.
/// Idempotent on Hermitian input.
pub fn hermitize(m: &CMatrix) -> Result<HermitianMatrix, MatrixError> {
    check_square(m)?;
    check_finite(m)?;
    Ok(HermitianMatrix::enforce(m.clone()))
}

/// Full spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted non-increasing. Each eigenvector is rotated so its
/// largest-modulus component is real and positive, which makes repeated runs
/// reproducible up to floating point.
pub fn eigh(m: &HermitianMatrix) -> Result<EigenDecomposition, MatrixError> {
    check_finite(m.as_matrix())?;
    let p = m.dim();
    let se = m.as_matrix().clone().symmetric_eigen();

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .expect("non-finite eigenvalue")
            .then(a.cmp(&b))
    });

    let mut eigenvalues = DVector::zeros(p);
    let mut eigenvectors = CMatrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues[dst] = se.eigenvalues[src];
        let col = se.eigenvectors.column(src);
        // Sign convention: largest-modulus component made real-positive.
        let mut k = 0;
        let mut best = 0.0_f64;
        for (i, v) in col.iter().enumerate() {
            let n = v.norm();
            if n > best {
                best = n;
                k = i;
            }
        }
        let phase = if best > 0.0 {
            col[k].conj() / best
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..p {
            eigenvectors[(i, dst)] = col[i] * phase;
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Matrix norms from the estimator's norm family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixNorm {
    /// Number of nonzero entries.
    L0,
    /// Sum of entry moduli.
    L1,
    /// Square root of the sum of squared moduli.
    Frobenius,
    /// Largest entry modulus.
    Max,
    /// Maximum number of nonzeros in a row.
    L0V,
    /// Maximum column absolute sum.
    L1V,
    /// Maximum row absolute sum.
    LInfV,
    /// Largest singular value.
    Spectral,
    /// Trace; defined for positive semidefinite matrices only.
    Nuclear,
    /// Smallest nonzero off-diagonal modulus.
    MinOff,
}

/// Evaluates a matrix norm with the default zero tolerance for the counting
/// and min-off norms.
pub fn matrix_norm(m: &CMatrix, kind: MatrixNorm) -> Result<f64, MatrixError> {
    matrix_norm_with_tol(m, kind, DEFAULT_ZERO_TOL)
}

/// Evaluates a matrix norm; `zero_tol` decides which entries count as zero
/// for [`MatrixNorm::L0`], [`MatrixNorm::L0V`], and [`MatrixNorm::MinOff`].
pub fn matrix_norm_with_tol(
    m: &CMatrix,
    kind: MatrixNorm,
    zero_tol: f64,
) -> Result<f64, MatrixError> {
    check_finite(m)?;
    let (rows, cols) = (m.nrows(), m.ncols());
    let value = match kind {
        MatrixNorm::L0 => m.iter().filter(|v| v.norm() > zero_tol).count() as f64,
        MatrixNorm::L1 => m.iter().map(|v| v.norm()).sum(),
        MatrixNorm::Frobenius => m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
        MatrixNorm::Max => m.iter().map(|v| v.norm()).fold(0.0, f64::max),
        MatrixNorm::L0V => (0..rows)
            .map(|i| (0..cols).filter(|&j| m[(i, j)].norm() > zero_tol).count())
            .max()
            .unwrap_or(0) as f64,
        MatrixNorm::L1V => (0..cols)
            .map(|j| (0..rows).map(|i| m[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max),
        MatrixNorm::LInfV => (0..rows)
            .map(|i| (0..cols).map(|j| m[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max),
        MatrixNorm::Spectral => {
            check_square(m)?;
            // sqrt of the top eigenvalue of the (Hermitian PSD) Gram matrix.
            let gram = HermitianMatrix::enforce(m * m.adjoint());
            let eig = eigh(&gram)?;
            eig.max_eigenvalue().max(0.0).sqrt()
        }
        MatrixNorm::Nuclear => {
            let h = HermitianMatrix::try_new(m.clone())?;
            let eig = eigh(&h)?;
            let min = eig.min_eigenvalue();
            let scale = eig.max_eigenvalue().abs().max(1.0);
            if min < -1e-10 * scale {
                return Err(MatrixError::NotPositiveSemidefinite {
                    min_eigenvalue: min,
                });
            }
            h.trace()
        }
        MatrixNorm::MinOff => {
            check_square(m)?;
            let mut min: Option<f64> = None;
            for i in 0..rows {
                for j in 0..cols {
                    if i == j {
                        continue;
                    }
                    let n = m[(i, j)].norm();
                    if n > zero_tol {
                        min = Some(min.map_or(n, |cur: f64| cur.min(n)));
                    }
                }
            }
            min.ok_or(MatrixError::NoOffDiagonal)?
        }
    };
    Ok(value)
}

/// True iff the smallest eigenvalue exceeds `tol`.
pub fn is_positive_definite(m: &HermitianMatrix, tol: f64) -> Result<bool, MatrixError> {
    let eig = eigh(m)?;
    Ok(eig.min_eigenvalue() > tol)
}

/// Inverse of a positive definite matrix via its eigendecomposition.
///
/// The eigenvalues are needed anyway for the definiteness gate, so the
/// inverse is rebuilt as `U diag(1/lambda) U†`.
pub fn inverse_if_pd(m: &HermitianMatrix, tol: f64) -> Result<HermitianMatrix, MatrixError> {
    let eig = eigh(m)?;
    let min = eig.min_eigenvalue();
    if min <= tol {
        return Err(MatrixError::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    let inv: Vec<f64> = eig.eigenvalues.iter().map(|&l| 1.0 / l).collect();
    Ok(eig.rebuild_with(&inv))
}
