//! Post-processing of the solver output: latent eigenvalues get the
//! threshold back, the residual diagonal is repaired by difference.

use thiserror::Error;

use crate::matrix::{eigh, is_positive_definite, HermitianMatrix, MatrixError};
use crate::solver::{AlseSolution, RANK_TOL};

#[derive(Debug, Error)]
pub enum UnshrinkError {
    #[error("unshrink threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Which low-rank diagonal is subtracted when repairing the residual
/// diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalRepair {
    /// `diag(S_u) = diag(Sigma_hat) - diag(L_u)`: the total estimated
    /// diagonal is preserved exactly.
    #[default]
    PreserveTotal,
    /// `diag(S_u) = diag(Sigma_hat) - diag(L_hat)`, subtracting the shrunk
    /// low-rank diagonal; the unshrunk eigenvalues then inflate the total.
    SubtractShrunk,
}

/// Final estimates after unshrinkage.
#[derive(Debug, Clone)]
pub struct UnalseEstimate {
    pub l_u: HermitianMatrix,
    pub s_u: HermitianMatrix,
    /// `l_u + s_u`.
    pub sigma_u: HermitianMatrix,
    pub psi_used: f64,
    pub rank: usize,
    /// Positive definiteness of `s_u` at tolerance zero.
    pub s_pd: bool,
    /// Positive definiteness of `sigma_u` at tolerance zero.
    pub sigma_pd: bool,
}

/// Adds `psi` back to every retained latent eigenvalue and repairs the
/// residual diagonal so that `diag(sigma_u) = diag(sigma_hat)`. The
/// off-diagonal sparsity pattern of the solver output is kept untouched;
/// a negative resulting residual diagonal is only flagged, never clamped.
pub fn unshrink(solution: &AlseSolution, psi: f64) -> Result<UnalseEstimate, UnshrinkError> {
    unshrink_with(solution, psi, DiagonalRepair::PreserveTotal)
}

/// [`unshrink`] with an explicit diagonal-repair convention.
pub fn unshrink_with(
    solution: &AlseSolution,
    psi: f64,
    repair: DiagonalRepair,
) -> Result<UnalseEstimate, UnshrinkError> {
    if !(psi > 0.0) {
        return Err(UnshrinkError::NonPositiveThreshold(psi));
    }
    let eig = eigh(&solution.l_hat)?;
    let unshrunk: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l > RANK_TOL { l + psi } else { 0.0 })
        .collect();
    let rank = unshrunk.iter().filter(|&&l| l > 0.0).count();
    let l_u = eig.rebuild_with(&unshrunk);

    let sigma_diag = solution.sigma_hat.real_diagonal();
    let low_diag = match repair {
        DiagonalRepair::PreserveTotal => l_u.real_diagonal(),
        DiagonalRepair::SubtractShrunk => solution.l_hat.real_diagonal(),
    };
    let mut s_u = solution.s_hat.as_matrix().clone();
    for i in 0..s_u.nrows() {
        s_u[(i, i)] = num_complex::Complex64::new(sigma_diag[i] - low_diag[i], 0.0);
    }
    let s_u = HermitianMatrix::enforce(s_u);
    let sigma_u = l_u.add(&s_u)?;

    let s_pd = is_positive_definite(&s_u, 0.0)?;
    let sigma_pd = is_positive_definite(&sigma_u, 0.0)?;

    Ok(UnalseEstimate {
        l_u,
        s_u,
        sigma_u,
        psi_used: psi,
        rank,
        s_pd,
        sigma_pd,
    })
}
