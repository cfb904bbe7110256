//! Lag-window smoothed-periodogram pre-estimator over a frequency grid.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::matrix::{CMatrix, HermitianMatrix};

#[derive(Debug, Error)]
pub enum PeriodogramError {
    #[error("panel must have at least one series and two observations, got p={p}, T={t}")]
    TooSmall { p: usize, t: usize },
    #[error("panel contains a non-finite value at series {series}, time {time}")]
    NonFinite { series: usize, time: usize },
    #[error("lag {lag} out of range for sample size {t}")]
    LagOutOfRange { lag: i64, t: usize },
    #[error("bandwidth must be at least 1")]
    ZeroBandwidth,
    #[error("bandwidth {m_t} must be smaller than the sample size {t}")]
    BandwidthTooLarge { m_t: usize, t: usize },
}

/// A p x T panel of real observations; column t holds the observation vector
/// at time t.
#[derive(Debug, Clone)]
pub struct TimeSeriesPanel {
    values: DMatrix<f64>,
}

impl TimeSeriesPanel {
    pub fn new(values: DMatrix<f64>) -> Result<Self, PeriodogramError> {
        let (p, t) = (values.nrows(), values.ncols());
        if p < 1 || t < 2 {
            return Err(PeriodogramError::TooSmall { p, t });
        }
        for j in 0..t {
            for i in 0..p {
                if !values[(i, j)].is_finite() {
                    return Err(PeriodogramError::NonFinite { series: i, time: j });
                }
            }
        }
        Ok(Self { values })
    }

    /// Number of series p.
    pub fn series_count(&self) -> usize {
        self.values.nrows()
    }

    /// Sample size T.
    pub fn sample_size(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Panel with each series centered at its sample mean.
    pub fn demeaned(&self) -> Self {
        let t = self.sample_size() as f64;
        let mut values = self.values.clone();
        for mut row in values.row_iter_mut() {
            let mean = row.iter().sum::<f64>() / t;
            row.iter_mut().for_each(|v| *v -= mean);
        }
        Self { values }
    }
}

/// Lag-window kernels with support [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Bartlett,
    Parzen,
}

impl Kernel {
    /// Kernel weight K(u). K(0) = 1, K is even, and K vanishes outside
    /// [-1, 1].
    pub fn weight(self, u: f64) -> f64 {
        let a = u.abs();
        match self {
            Kernel::Bartlett => {
                if a <= 1.0 {
                    1.0 - a
                } else {
                    0.0
                }
            }
            Kernel::Parzen => {
                if a <= 0.5 {
                    1.0 - 6.0 * a * a + 6.0 * a * a * a
                } else if a <= 1.0 {
                    2.0 * (1.0 - a).powi(3)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Bartlett => "bartlett",
            Kernel::Parzen => "parzen",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bartlett" => Ok(Kernel::Bartlett),
            "parzen" => Ok(Kernel::Parzen),
            other => Err(format!("unknown kernel '{other}'")),
        }
    }
}

/// Frequencies theta_h = h*pi/M_T for h = 0..=M_T.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    bandwidth: usize,
    frequencies: Vec<f64>,
}

impl FrequencyGrid {
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// Builds the canonical grid 0, pi/M_T, ..., pi.
pub fn frequency_grid(m_t: usize) -> Result<FrequencyGrid, PeriodogramError> {
    if m_t == 0 {
        return Err(PeriodogramError::ZeroBandwidth);
    }
    let frequencies = (0..=m_t)
        .map(|h| h as f64 * std::f64::consts::PI / m_t as f64)
        .collect();
    Ok(FrequencyGrid {
        bandwidth: m_t,
        frequencies,
    })
}

/// Sample autocovariance at lag k with the 1/T normalization:
/// `Gamma(k) = T^-1 sum_{t=1}^{T-|k|} X_t X_{t+k}'`, after optional
/// per-series demeaning. `Gamma(-k) = Gamma(k)'`.
pub fn sample_autocov(
    x: &TimeSeriesPanel,
    k: i64,
    demean: bool,
) -> Result<DMatrix<f64>, PeriodogramError> {
    let t = x.sample_size();
    if k.unsigned_abs() as usize >= t {
        return Err(PeriodogramError::LagOutOfRange { lag: k, t });
    }
    let centered;
    let values = if demean {
        centered = x.demeaned();
        centered.values()
    } else {
        x.values()
    };
    let lag = k.unsigned_abs() as usize;
    let n = t - lag;
    let head = values.columns(0, n);
    let tail = values.columns(lag, n);
    let mut gamma = &head * tail.transpose();
    gamma /= t as f64;
    if k < 0 {
        gamma = gamma.transpose();
    }
    Ok(gamma)
}

/// Smoothed periodogram on the canonical grid theta_h = h*pi/M_T,
/// h = 0..=M_T. Negative frequencies are entrywise conjugates and are not
/// stored.
pub fn smoothed_periodogram(
    x: &TimeSeriesPanel,
    kernel: Kernel,
    m_t: usize,
    demean: bool,
) -> Result<Vec<HermitianMatrix>, PeriodogramError> {
    let grid = frequency_grid(m_t)?;
    smoothed_periodogram_at(x, kernel, m_t, demean, grid.frequencies())
}

/// Smoothed periodogram evaluated at arbitrary frequencies (radians):
/// `(1/2pi) sum_k K(k/M_T) e^{-i theta k} Gamma(k)`, truncated to the kernel
/// support |k| <= M_T. Each output is hermitized.
pub fn smoothed_periodogram_at(
    x: &TimeSeriesPanel,
    kernel: Kernel,
    m_t: usize,
    demean: bool,
    frequencies: &[f64],
) -> Result<Vec<HermitianMatrix>, PeriodogramError> {
    if m_t == 0 {
        return Err(PeriodogramError::ZeroBandwidth);
    }
    let t = x.sample_size();
    if m_t >= t {
        return Err(PeriodogramError::BandwidthTooLarge { m_t, t });
    }
    let centered;
    let values = if demean {
        centered = x.demeaned();
        centered
    } else {
        x.clone()
    };

    let kmax = m_t.min(t - 1);
    let weighted: Vec<(f64, DMatrix<f64>)> = (0..=kmax)
        .map(|k| {
            let w = kernel.weight(k as f64 / m_t as f64);
            let g = sample_autocov(&values, k as i64, false)
                .expect("lag bounded by T-1");
            (w, g)
        })
        .collect();

    let p = x.series_count();
    let two_pi = 2.0 * std::f64::consts::PI;
    let spectra = frequencies
        .par_iter()
        .map(|&theta| {
            let mut acc = CMatrix::zeros(p, p);
            for (k, (w, gamma)) in weighted.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                if k == 0 {
                    for j in 0..p {
                        for i in 0..p {
                            acc[(i, j)] += Complex64::new(w * gamma[(i, j)], 0.0);
                        }
                    }
                } else {
                    // K(k)e^{-i theta k} Gamma(k) + K(k)e^{+i theta k} Gamma(k)'
                    let phase = Complex64::from_polar(*w, -theta * k as f64);
                    let conj = phase.conj();
                    for j in 0..p {
                        for i in 0..p {
                            acc[(i, j)] += phase * gamma[(i, j)] + conj * gamma[(j, i)];
                        }
                    }
                }
            }
            acc /= Complex64::new(two_pi, 0.0);
            HermitianMatrix::enforce(acc)
        })
        .collect();
    Ok(spectra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{eigh, matrix_norm, MatrixNorm};
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn panel_from_rows(rows: &[&[f64]]) -> TimeSeriesPanel {
        let p = rows.len();
        let t = rows[0].len();
        let m = DMatrix::from_fn(p, t, |i, j| rows[i][j]);
        TimeSeriesPanel::new(m).unwrap()
    }

    fn random_panel(p: usize, t: usize, seed: u64) -> TimeSeriesPanel {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = DMatrix::from_fn(p, t, |_, _| rng.gen_range(-1.0..1.0));
        TimeSeriesPanel::new(m).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert_eq!(Kernel::Bartlett.weight(0.0), 1.0);
        assert_eq!(Kernel::Bartlett.weight(0.5), 0.5);
        assert_eq!(Kernel::Bartlett.weight(1.5), 0.0);
        assert_eq!(Kernel::Parzen.weight(0.0), 1.0);
        // Both Parzen branch formulas agree at |u| = 1/2.
        assert_relative_eq!(Kernel::Parzen.weight(0.5), 0.25, epsilon = 1e-15);
        assert_relative_eq!(
            Kernel::Parzen.weight(0.5),
            2.0 * (1.0 - 0.5_f64).powi(3),
            epsilon = 1e-15
        );
        assert_eq!(Kernel::Parzen.weight(-0.25), Kernel::Parzen.weight(0.25));
    }

    #[test]
    fn autocov_scalar_examples() {
        let x = panel_from_rows(&[&[1.0, -1.0]]);
        let g0 = sample_autocov(&x, 0, false).unwrap();
        assert_relative_eq!(g0[(0, 0)], 1.0, epsilon = 1e-15);
        let g1 = sample_autocov(&x, 1, false).unwrap();
        assert_relative_eq!(g1[(0, 0)], -0.5, epsilon = 1e-15);
    }

    #[test]
    fn autocov_negative_lag_is_transpose() {
        let x = random_panel(3, 40, 9);
        let g2 = sample_autocov(&x, 2, true).unwrap();
        let gm2 = sample_autocov(&x, -2, true).unwrap();
        assert!((g2.transpose() - gm2).norm() < 1e-14);
    }

    #[test]
    fn autocov_matches_brute_force() {
        let x = random_panel(3, 50, 4);
        let k = 2usize;
        let got = sample_autocov(&x, k as i64, false).unwrap();
        let p = 3;
        let t = 50;
        let v = x.values();
        let mut expect = DMatrix::zeros(p, p);
        for s in 0..(t - k) {
            for i in 0..p {
                for j in 0..p {
                    expect[(i, j)] += v[(i, s)] * v[(j, s + k)];
                }
            }
        }
        expect /= t as f64;
        assert!((got - expect).norm() < 1e-12);
    }

    #[test]
    fn autocov_lag_out_of_range() {
        let x = panel_from_rows(&[&[1.0, 2.0, 3.0]]);
        assert!(matches!(
            sample_autocov(&x, 3, false),
            Err(PeriodogramError::LagOutOfRange { .. })
        ));
    }

    #[test]
    fn grid_examples() {
        let g = frequency_grid(2).unwrap();
        assert_eq!(g.frequencies().len(), 3);
        assert_relative_eq!(g.frequencies()[1], PI / 2.0);
        assert_relative_eq!(g.frequencies()[2], PI);
        let g1 = frequency_grid(1).unwrap();
        assert_eq!(g1.frequencies(), &[0.0, PI]);
        let g12 = frequency_grid(12).unwrap();
        assert_eq!(g12.len(), 13);
        assert_relative_eq!(g12.frequencies()[12], PI);
        assert!(matches!(
            frequency_grid(0),
            Err(PeriodogramError::ZeroBandwidth)
        ));
    }

    #[test]
    fn periodogram_two_point_series() {
        // With M_T = 1 the Bartlett weight kills the lag-1 term, leaving
        // Gamma(0)/(2 pi) = 1/(2 pi) at every frequency.
        let x = panel_from_rows(&[&[1.0, -1.0]]);
        let spectra = smoothed_periodogram(&x, Kernel::Bartlett, 1, false).unwrap();
        assert_eq!(spectra.len(), 2);
        for s in &spectra {
            assert_relative_eq!(s.as_matrix()[(0, 0)].re, 1.0 / (2.0 * PI), epsilon = 1e-12);
        }
    }

    #[test]
    fn periodogram_demeaning_annihilates_constants() {
        let x = panel_from_rows(&[&[3.0; 20]]);
        let raw = smoothed_periodogram(&x, Kernel::Bartlett, 4, false).unwrap();
        assert!(raw[0].as_matrix()[(0, 0)].re > 1.0);
        let centered = smoothed_periodogram(&x, Kernel::Bartlett, 4, true).unwrap();
        for s in &centered {
            assert!(s.as_matrix().norm() < 1e-12);
        }
    }

    #[test]
    fn periodogram_rejects_large_bandwidth() {
        let x = panel_from_rows(&[&[1.0, 2.0, 3.0]]);
        assert!(matches!(
            smoothed_periodogram(&x, Kernel::Bartlett, 3, false),
            Err(PeriodogramError::BandwidthTooLarge { .. })
        ));
    }

    #[test]
    fn bartlett_outputs_are_nearly_psd() {
        for seed in 0..100 {
            let x = random_panel(3, 60, seed);
            let spectra = smoothed_periodogram(&x, Kernel::Bartlett, 7, true).unwrap();
            for s in &spectra {
                let eig = eigh(s).unwrap();
                let spec = matrix_norm(s.as_matrix(), MatrixNorm::Spectral).unwrap();
                assert!(
                    eig.min_eigenvalue() >= -1e-8 * spec.max(1e-12),
                    "seed {seed}: min eigenvalue {} vs norm {spec}",
                    eig.min_eigenvalue()
                );
            }
        }
    }

    #[test]
    fn discrete_parseval_recovers_lag_zero() {
        let x = random_panel(2, 120, 21);
        let gamma0 = sample_autocov(&x, 0, true).unwrap();
        let mut errors = Vec::new();
        for m_t in [16usize, 64] {
            let spectra = smoothed_periodogram(&x, Kernel::Bartlett, m_t, true).unwrap();
            let p = 2;
            let mut sum = DMatrix::<f64>::zeros(p, p);
            for (h, s) in spectra.iter().enumerate() {
                let weight = if h == 0 || h == m_t { 1.0 } else { 2.0 };
                for i in 0..p {
                    for j in 0..p {
                        sum[(i, j)] += weight * s.as_matrix()[(i, j)].re;
                    }
                }
            }
            sum *= PI / m_t as f64;
            errors.push((sum - &gamma0).norm() / gamma0.norm());
        }
        // The integrand is a trigonometric polynomial whose degree stays
        // below the Nyquist index of the grid, so the trapezoid sum is exact
        // up to rounding at both bandwidths.
        assert!(errors[0] < 1.0 / 16.0, "error {} at M_T=16", errors[0]);
        assert!(errors[1] < 1.0 / 64.0, "error {} at M_T=64", errors[1]);
        assert!(
            errors[1] <= 0.5 * errors[0] || errors[1] < 1e-12,
            "no halving: {errors:?}"
        );
    }

    #[test]
    fn conjugate_symmetry_at_negated_frequency() {
        let x = random_panel(2, 50, 33);
        let theta = 0.7;
        let plus = smoothed_periodogram_at(&x, Kernel::Parzen, 6, true, &[theta]).unwrap();
        let minus = smoothed_periodogram_at(&x, Kernel::Parzen, 6, true, &[-theta]).unwrap();
        let conj = minus[0].as_matrix().map(|v| v.conj());
        assert!((plus[0].as_matrix() - conj).norm() < 1e-12);
    }

    #[test]
    fn white_noise_spectrum_is_flat() {
        // Every entry of the deviation from identity/(2 pi), averaged over
        // frequencies, stays below 0.02; averaged over seeds to damp the
        // per-panel noise.
        use rand_distr::StandardNormal;
        let seeds = 10u64;
        let mut per_entry = [[0.0f64; 2]; 2];
        for seed in 0..seeds {
            let mut rng = StdRng::seed_from_u64(seed);
            let m = DMatrix::from_fn(2, 5000, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = TimeSeriesPanel::new(m).unwrap();
            let spectra = smoothed_periodogram(&x, Kernel::Bartlett, 70, true).unwrap();
            let target = 1.0 / (2.0 * PI);
            for s in &spectra {
                for (i, row) in per_entry.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        let mut d = s.as_matrix()[(i, j)];
                        if i == j {
                            d -= Complex64::new(target, 0.0);
                        }
                        *cell += d.norm() / (spectra.len() as f64 * seeds as f64);
                    }
                }
            }
        }
        for (i, row) in per_entry.iter().enumerate() {
            for (j, &avg) in row.iter().enumerate() {
                assert!(avg < 0.02, "entry ({i},{j}) average deviation {avg}");
            }
        }
    }
}
