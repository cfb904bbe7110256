//! UNALSE: low-rank plus sparse estimation of large spectral density matrices
//! of multivariate time series.
//!
//! The pipeline runs in four stages. A lag-window smoothed periodogram turns a
//! p x T panel into Hermitian spectral matrices on a frequency grid
//! ([`periodogram`]). At each frequency an accelerated proximal-gradient
//! solver splits that matrix into a low-rank part (nuclear-norm penalty) and a
//! sparse part (l1 penalty) ([`solver`]). The two thresholds are picked by a
//! mini-max criterion over automatically tuned grids ([`selection`]). Finally
//! the retained latent eigenvalues are unshrunk and the residual diagonal
//! repaired ([`unshrink`]).
//!
//! [`simulate`] generates ground-truth panels with known low-rank plus sparse
//! spectra, [`metrics`] scores estimates against such truths, and [`io`] /
//! [`pipeline`] provide the on-disk formats and the batch entry points used
//! by the `unalse` command-line tool.

pub mod io;
pub mod matrix;
pub mod metrics;
pub mod periodogram;
pub mod pipeline;
pub mod selection;
pub mod simulate;
pub mod solver;
pub mod unshrink;

pub use matrix::{
    eigh, hermitize, inverse_if_pd, is_positive_definite, matrix_norm, matrix_norm_with_tol,
    CMatrix, EigenDecomposition, HermitianMatrix, MatrixError, MatrixNorm,
};
pub use periodogram::{
    frequency_grid, sample_autocov, smoothed_periodogram, smoothed_periodogram_at, FrequencyGrid,
    Kernel, PeriodogramError, TimeSeriesPanel,
};
pub use selection::{
    auto_tune, gamma_grid, gini, incoherence_proxy, mc_criterion, psi_grid, rho_grid,
    select_thresholds, GridCell, SelectionError, SelectionResult, ThresholdConfig,
};
pub use solver::{alse_solve, objective, soft_threshold, svt, AlseSolution, SolverConfig, SolverError};
pub use unshrink::{unshrink, unshrink_with, DiagonalRepair, UnalseEstimate, UnshrinkError};
