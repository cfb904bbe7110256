//! Evaluation metrics for simulation studies: variance proportions, rank and
//! sparsity-pattern recovery rates, Frobenius losses, the composite loss, and
//! the dynamic-PCA baseline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{
    eigh, matrix_norm, HermitianMatrix, MatrixError, MatrixNorm,
};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("trace of the total estimate is not positive")]
    ZeroTrace,
    #[error("off-diagonal mass of the total estimate is zero; proportion undefined")]
    DiagonalTotal,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("at least one replication is required")]
    EmptyReplications,
    #[error("loss of the input estimator is zero; ratio undefined")]
    ZeroInputLoss,
    #[error("gamma must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("rank {r} out of range 1..={p}")]
    RankOutOfRange { r: usize, p: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

fn check_dims(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<(), MetricsError> {
    if a.dim() != b.dim() {
        return Err(MetricsError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// Latent variance proportion `tr(L) / tr(Sigma)`.
pub fn beta_hat(l: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64, MetricsError> {
    check_dims(l, sigma)?;
    let denom = sigma.trace();
    if !(denom > 0.0) {
        return Err(MetricsError::ZeroTrace);
    }
    Ok(l.trace() / denom)
}

/// Residual covariance proportion
/// `sum_{i<j} |S_ij| / sum_{i<j} |Sigma_ij|`.
pub fn zeta_hat(s: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64, MetricsError> {
    check_dims(s, sigma)?;
    let p = s.dim();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..p {
        for j in (i + 1)..p {
            num += s.as_matrix()[(i, j)].norm();
            den += sigma.as_matrix()[(i, j)].norm();
        }
    }
    if den == 0.0 {
        return Err(MetricsError::DiagonalTotal);
    }
    Ok(num / den)
}

/// Upper-triangle recovery rates for the residual sparsity pattern. Signs are
/// taken on real parts. A rate whose reference set is empty is reported as
/// `None` and excluded from averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveRates {
    /// Fraction of predicted nonzeros that are truly nonzero.
    pub nzpv: Option<f64>,
    /// Fraction of truly positive entries predicted positive.
    pub ppv: Option<f64>,
    /// Fraction of truly negative entries predicted negative.
    pub npv: Option<f64>,
}

pub fn sparsity_predictive(
    s_hat: &HermitianMatrix,
    s_true: &HermitianMatrix,
    tol: f64,
) -> Result<PredictiveRates, MetricsError> {
    check_dims(s_hat, s_true)?;
    let p = s_hat.dim();
    let mut predicted_nonzero = 0usize;
    let mut hit_nonzero = 0usize;
    let mut true_pos = 0usize;
    let mut hit_pos = 0usize;
    let mut true_neg = 0usize;
    let mut hit_neg = 0usize;
    for i in 0..p {
        for j in (i + 1)..p {
            let est = s_hat.as_matrix()[(i, j)];
            let tru = s_true.as_matrix()[(i, j)];
            let est_nz = est.norm() > tol;
            let tru_nz = tru.norm() > tol;
            if est_nz {
                predicted_nonzero += 1;
                if tru_nz {
                    hit_nonzero += 1;
                }
            }
            if tru.re > tol {
                true_pos += 1;
                if est.re > tol {
                    hit_pos += 1;
                }
            }
            if tru.re < -tol {
                true_neg += 1;
                if est.re < -tol {
                    hit_neg += 1;
                }
            }
        }
    }
    let rate = |hits: usize, total: usize| {
        (total > 0).then(|| hits as f64 / total as f64)
    };
    Ok(PredictiveRates {
        nzpv: rate(hit_nonzero, predicted_nonzero),
        ppv: rate(hit_pos, true_pos),
        npv: rate(hit_neg, true_neg),
    })
}

/// Per-variable maximum, over partners, of the number of replications in
/// which the recovered residual entry is nonzero.
pub fn mnz(estimates: &[HermitianMatrix], tol: f64) -> Result<Vec<usize>, MetricsError> {
    let first = estimates.first().ok_or(MetricsError::EmptyReplications)?;
    let p = first.dim();
    for e in estimates {
        check_dims(first, e)?;
    }
    let mut out = vec![0usize; p];
    for i in 0..p {
        let mut best = 0usize;
        for j in 0..p {
            if i == j {
                continue;
            }
            let count = estimates
                .iter()
                .filter(|e| e.as_matrix()[(i, j)].norm() > tol)
                .count();
            best = best.max(count);
        }
        out[i] = best;
    }
    Ok(out)
}

/// Dimension-rescaled Frobenius loss `||M_hat - M_true||_F / p`.
pub fn err_frobenius(
    m_hat: &HermitianMatrix,
    m_true: &HermitianMatrix,
    p: usize,
) -> Result<f64, MetricsError> {
    check_dims(m_hat, m_true)?;
    let diff = m_hat.as_matrix() - m_true.as_matrix();
    Ok(matrix_norm(&diff, MatrixNorm::Frobenius)? / p as f64)
}

/// Frobenius-loss ratio of the final estimate over the pre-estimator,
/// both against the truth.
pub fn err_ratio(
    sigma_hat: &HermitianMatrix,
    sigma_tilde: &HermitianMatrix,
    sigma_true: &HermitianMatrix,
) -> Result<f64, MetricsError> {
    check_dims(sigma_hat, sigma_true)?;
    check_dims(sigma_tilde, sigma_true)?;
    let input = matrix_norm(
        &(sigma_tilde.as_matrix() - sigma_true.as_matrix()),
        MatrixNorm::Frobenius,
    )?;
    if input == 0.0 {
        return Err(MetricsError::ZeroInputLoss);
    }
    let ours = matrix_norm(
        &(sigma_hat.as_matrix() - sigma_true.as_matrix()),
        MatrixNorm::Frobenius,
    )?;
    Ok(ours / input)
}

/// Composite loss `max(||S_hat - S||_inf / gamma, ||L_hat - L||_2)`.
pub fn g_gamma_loss(
    l_hat: &HermitianMatrix,
    l_true: &HermitianMatrix,
    s_hat: &HermitianMatrix,
    s_true: &HermitianMatrix,
    gamma: f64,
) -> Result<f64, MetricsError> {
    if !(gamma > 0.0) {
        return Err(MetricsError::NonPositiveGamma(gamma));
    }
    check_dims(l_hat, l_true)?;
    check_dims(s_hat, s_true)?;
    let s_inf = matrix_norm(
        &(s_hat.as_matrix() - s_true.as_matrix()),
        MatrixNorm::Max,
    )?;
    let l_spec = matrix_norm(
        &(l_hat.as_matrix() - l_true.as_matrix()),
        MatrixNorm::Spectral,
    )?;
    Ok((s_inf / gamma).max(l_spec))
}

/// Dynamic-PCA baseline: the rank-r truncation of the eigendecomposition,
/// `sum_{j<=r} lambda_j u_j u_j†`.
pub fn dyn_pca(sigma_tilde: &HermitianMatrix, r: usize) -> Result<HermitianMatrix, MetricsError> {
    let p = sigma_tilde.dim();
    if r < 1 || r > p {
        return Err(MetricsError::RankOutOfRange { r, p });
    }
    let eig = eigh(sigma_tilde)?;
    let truncated: Vec<f64> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, &l)| if j < r { l } else { 0.0 })
        .collect();
    Ok(eig.rebuild_with(&truncated))
}

/// Average per-frequency count of replications recovering the true rank:
/// `(1/H) sum_b sum_h 1{rank_hat = r}` with `H` grid frequencies.
pub fn rank_correct_count(rank_hats: &[Vec<usize>], r_true: usize) -> f64 {
    if rank_hats.is_empty() {
        return 0.0;
    }
    let h = rank_hats[0].len().max(1) as f64;
    let hits: usize = rank_hats
        .iter()
        .flat_map(|per_freq| per_freq.iter())
        .filter(|&&r| r == r_true)
        .count();
    hits as f64 / h
}

/// Mean and standard deviation over the replications where a metric was
/// defined.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
    /// How many replications contributed (undefined values are excluded).
    pub count: usize,
}

impl MeanSd {
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                sd: f64::NAN,
                count: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count as f64 - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, sd, count }
    }

    pub fn from_options(values: &[Option<f64>]) -> Self {
        let defined: Vec<f64> = values.iter().flatten().copied().collect();
        Self::from_values(&defined)
    }
}

/// Per-frequency aggregate of the study metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub frequency: f64,
    pub beta_hat: MeanSd,
    pub zeta_hat: MeanSd,
    pub rank_hat: MeanSd,
    pub nzpv: MeanSd,
    pub ppv: MeanSd,
    pub npv: MeanSd,
    pub err_l: MeanSd,
    pub err_ratio: MeanSd,
    pub g_gamma: MeanSd,
    /// Per-variable maximum nonzero-recovery counts across replications.
    pub mnz: Vec<usize>,
}

/// Full study report across replications and frequencies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub replications: usize,
    pub r_true: usize,
    /// `(1/H) sum_b sum_h 1{rank_hat = r_true}`.
    pub rank_correct: f64,
    pub per_frequency: Vec<FrequencyReport>,
}

impl EvaluationReport {
    /// Writes one CSV per metric (rows: frequency, mean, sd, count) plus an
    /// `mnz.csv` with one row per frequency and one column per variable.
    pub fn write_csv(&self, dir: &std::path::Path) -> std::io::Result<()> {
        use std::io::Write;
        std::fs::create_dir_all(dir)?;
        let metrics: [(&str, fn(&FrequencyReport) -> MeanSd); 9] = [
            ("beta_hat", |f| f.beta_hat),
            ("zeta_hat", |f| f.zeta_hat),
            ("rank_hat", |f| f.rank_hat),
            ("nzpv", |f| f.nzpv),
            ("ppv", |f| f.ppv),
            ("npv", |f| f.npv),
            ("err_l", |f| f.err_l),
            ("err_ratio", |f| f.err_ratio),
            ("g_gamma", |f| f.g_gamma),
        ];
        for (name, get) in metrics {
            let mut file = std::fs::File::create(dir.join(format!("{name}.csv")))?;
            writeln!(file, "frequency,mean,sd,count")?;
            for row in &self.per_frequency {
                let m = get(row);
                writeln!(
                    file,
                    "{:.16e},{:.16e},{:.16e},{}",
                    row.frequency, m.mean, m.sd, m.count
                )?;
            }
        }
        let mut file = std::fs::File::create(dir.join("mnz.csv"))?;
        for row in &self.per_frequency {
            let cells: Vec<String> = std::iter::once(format!("{:.16e}", row.frequency))
                .chain(row.mnz.iter().map(|v| v.to_string()))
                .collect();
            writeln!(file, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CMatrix;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_psd(p: usize, seed: u64) -> HermitianMatrix {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = CMatrix::from_fn(p, p, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        HermitianMatrix::try_new(&a * a.adjoint()).unwrap()
    }

    fn herm(entries: &[(usize, usize, f64, f64)], p: usize) -> HermitianMatrix {
        let mut m = CMatrix::zeros(p, p);
        for &(i, j, re, im) in entries {
            m[(i, j)] = Complex64::new(re, im);
            if i != j {
                m[(j, i)] = Complex64::new(re, -im);
            }
        }
        HermitianMatrix::try_new(m).unwrap()
    }

    #[test]
    fn beta_hat_cases() {
        let l = HermitianMatrix::from_real_diagonal(&[1.0, 1.0]);
        let sigma = HermitianMatrix::from_real_diagonal(&[2.0, 2.0]);
        assert_relative_eq!(beta_hat(&l, &sigma).unwrap(), 0.5);
        assert_relative_eq!(beta_hat(&HermitianMatrix::zeros(2), &sigma).unwrap(), 0.0);
        assert_relative_eq!(beta_hat(&sigma, &sigma).unwrap(), 1.0);
        assert!(matches!(
            beta_hat(&l, &HermitianMatrix::zeros(2)),
            Err(MetricsError::ZeroTrace)
        ));
    }

    #[test]
    fn zeta_hat_cases() {
        let sigma = herm(&[(0, 0, 1.0, 0.0), (1, 1, 1.0, 0.0), (0, 1, 0.5, 0.2)], 2);
        let s_same = herm(&[(0, 1, 0.5, 0.2)], 2);
        assert_relative_eq!(zeta_hat(&s_same, &sigma).unwrap(), 1.0, epsilon = 1e-12);
        let diag = HermitianMatrix::from_real_diagonal(&[1.0, 1.0]);
        assert_relative_eq!(zeta_hat(&diag, &sigma).unwrap(), 0.0);
        assert!(matches!(
            zeta_hat(&s_same, &diag),
            Err(MetricsError::DiagonalTotal)
        ));
    }

    #[test]
    fn zeta_hat_hand_case() {
        let sigma = herm(
            &[
                (0, 0, 1.0, 0.0),
                (1, 1, 1.0, 0.0),
                (2, 2, 1.0, 0.0),
                (0, 1, 0.3, 0.4),
                (0, 2, -0.6, 0.0),
                (1, 2, 0.0, 0.1),
            ],
            3,
        );
        let s = herm(&[(0, 1, 0.3, 0.4), (1, 2, 0.0, 0.1)], 3);
        let expect = (0.5 + 0.1) / (0.5 + 0.6 + 0.1);
        assert_relative_eq!(zeta_hat(&s, &sigma).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn predictive_rates_exact_match() {
        let s = herm(&[(0, 1, 0.5, 0.0), (1, 2, -0.3, 0.1)], 3);
        let rates = sparsity_predictive(&s, &s, 1e-12).unwrap();
        assert_eq!(rates.nzpv, Some(1.0));
        assert_eq!(rates.ppv, Some(1.0));
        assert_eq!(rates.npv, Some(1.0));
    }

    #[test]
    fn predictive_rates_degenerate_prediction() {
        let truth = herm(&[(0, 1, 0.5, 0.0)], 3);
        let diag = HermitianMatrix::from_real_diagonal(&[1.0, 1.0, 1.0]);
        let rates = sparsity_predictive(&diag, &truth, 1e-12).unwrap();
        assert_eq!(rates.nzpv, None);
        assert_eq!(rates.ppv, Some(0.0));
        assert_eq!(rates.npv, None);
    }

    #[test]
    fn predictive_rates_wrong_sign_counts() {
        // 4x4 truth with three positives and one negative; estimate flips one
        // positive's sign.
        let truth = herm(
            &[
                (0, 1, 0.5, 0.0),
                (0, 2, 0.4, 0.0),
                (1, 2, 0.3, 0.0),
                (2, 3, -0.2, 0.0),
            ],
            4,
        );
        let est = herm(
            &[
                (0, 1, 0.5, 0.0),
                (0, 2, -0.4, 0.0),
                (1, 2, 0.3, 0.0),
                (2, 3, -0.2, 0.0),
            ],
            4,
        );
        let rates = sparsity_predictive(&est, &truth, 1e-12).unwrap();
        assert_relative_eq!(rates.ppv.unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        assert_eq!(rates.npv, Some(1.0));
        assert_eq!(rates.nzpv, Some(1.0));
    }

    #[test]
    fn mnz_cases() {
        let diag = HermitianMatrix::from_real_diagonal(&[1.0, 1.0, 1.0]);
        assert_eq!(mnz(&[diag], 1e-12).unwrap(), vec![0, 0, 0]);

        let with_pair = herm(&[(0, 1, 0.5, 0.0)], 3);
        let stack = vec![with_pair.clone(), with_pair.clone(), with_pair];
        assert_eq!(mnz(&stack, 1e-12).unwrap(), vec![3, 3, 0]);

        assert!(matches!(
            mnz(&[], 1e-12),
            Err(MetricsError::EmptyReplications)
        ));
    }

    #[test]
    fn mnz_matches_brute_force() {
        let mut rng = StdRng::seed_from_u64(5);
        let p = 5;
        let stack: Vec<HermitianMatrix> = (0..7)
            .map(|_| {
                let mut m = CMatrix::zeros(p, p);
                for i in 0..p {
                    for j in (i + 1)..p {
                        if rng.gen_bool(0.4) {
                            let v = Complex64::new(rng.gen_range(0.1..1.0), 0.0);
                            m[(i, j)] = v;
                            m[(j, i)] = v;
                        }
                    }
                }
                HermitianMatrix::try_new(m).unwrap()
            })
            .collect();
        let got = mnz(&stack, 1e-12).unwrap();
        for i in 0..p {
            let mut best = 0;
            for j in 0..p {
                if i == j {
                    continue;
                }
                let mut count = 0;
                for e in &stack {
                    if e.as_matrix()[(i, j)].norm() > 1e-12 {
                        count += 1;
                    }
                }
                best = best.max(count);
            }
            assert_eq!(got[i], best, "variable {i}");
        }
    }

    #[test]
    fn err_frobenius_cases() {
        let m = random_psd(4, 3);
        assert_relative_eq!(err_frobenius(&m, &m, 4).unwrap(), 0.0);
        let shifted = m.add(&HermitianMatrix::identity(4)).unwrap();
        assert_relative_eq!(
            err_frobenius(&shifted, &m, 4).unwrap(),
            2.0 / 4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn err_ratio_cases() {
        let truth = random_psd(3, 7);
        let tilde = truth.add(&HermitianMatrix::identity(3)).unwrap();
        assert_relative_eq!(err_ratio(&truth, &tilde, &truth).unwrap(), 0.0);
        assert_relative_eq!(err_ratio(&tilde, &tilde, &truth).unwrap(), 1.0);
        assert!(matches!(
            err_ratio(&tilde, &truth, &truth),
            Err(MetricsError::ZeroInputLoss)
        ));
    }

    #[test]
    fn g_gamma_cases() {
        let l = random_psd(3, 9);
        let s = random_psd(3, 10);
        assert_relative_eq!(g_gamma_loss(&l, &l, &s, &s, 0.5).unwrap(), 0.0);

        // Large gamma reduces the loss to the spectral term.
        let l_off = l.add(&HermitianMatrix::identity(3)).unwrap();
        let s_off = s.add(&HermitianMatrix::from_real_diagonal(&[0.5, 0.0, 0.0])).unwrap();
        let loss = g_gamma_loss(&l_off, &l, &s_off, &s, 1e12).unwrap();
        assert_relative_eq!(loss, 1.0, epsilon = 1e-9);

        // Hand 2x2 evaluation.
        let l_true = HermitianMatrix::from_real_diagonal(&[1.0, 1.0]);
        let l_hat = HermitianMatrix::from_real_diagonal(&[1.5, 1.0]);
        let s_true = HermitianMatrix::zeros(2);
        let s_hat = herm(&[(0, 1, 0.2, 0.0)], 2);
        let loss = g_gamma_loss(&l_hat, &l_true, &s_hat, &s_true, 0.1).unwrap();
        assert_relative_eq!(loss, 2.0, epsilon = 1e-12);

        assert!(matches!(
            g_gamma_loss(&l, &l, &s, &s, 0.0),
            Err(MetricsError::NonPositiveGamma(_))
        ));
    }

    #[test]
    fn dyn_pca_cases() {
        let m = HermitianMatrix::from_real_diagonal(&[4.0, 1.0]);
        let rank1 = dyn_pca(&m, 1).unwrap();
        assert_relative_eq!(rank1.as_matrix()[(0, 0)].re, 4.0, epsilon = 1e-10);
        assert_relative_eq!(rank1.as_matrix()[(1, 1)].re, 0.0, epsilon = 1e-10);

        let full = dyn_pca(&m, 2).unwrap();
        assert!((full.as_matrix() - m.as_matrix()).norm() < 1e-10);

        assert!(matches!(
            dyn_pca(&m, 3),
            Err(MetricsError::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn dyn_pca_is_best_truncation() {
        // Among all rank-2 rebuilds from the eigenpairs, keeping the top two
        // eigenvalues minimizes the Frobenius distance.
        let sigma = random_psd(5, 11);
        let eig = eigh(&sigma).unwrap();
        let best = dyn_pca(&sigma, 2).unwrap();
        let best_err = (best.as_matrix() - sigma.as_matrix()).norm();
        for a in 0..5 {
            for b in (a + 1)..5 {
                let vals: Vec<f64> = (0..5)
                    .map(|j| {
                        if j == a || j == b {
                            eig.eigenvalues[j]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let candidate = eig.rebuild_with(&vals);
                let err = (candidate.as_matrix() - sigma.as_matrix()).norm();
                assert!(best_err <= err + 1e-10, "pair ({a},{b}) beats the truncation");
            }
        }
    }

    #[test]
    fn rank_count_cases() {
        let all_correct = vec![vec![2usize; 6]; 100];
        assert_relative_eq!(rank_correct_count(&all_correct, 2), 100.0);
        let none = vec![vec![1usize; 6]; 100];
        assert_relative_eq!(rank_correct_count(&none, 2), 0.0);
        let half: Vec<Vec<usize>> = (0..100)
            .map(|b| vec![if b % 2 == 0 { 2 } else { 1 }; 6])
            .collect();
        assert_relative_eq!(rank_correct_count(&half, 2), 50.0);
    }

    #[test]
    fn mean_sd_handles_undefined() {
        let stats = MeanSd::from_options(&[Some(1.0), None, Some(3.0)]);
        assert_relative_eq!(stats.mean, 2.0);
        assert_eq!(stats.count, 2);
        let empty = MeanSd::from_options(&[None, None]);
        assert!(empty.mean.is_nan());
        assert_eq!(empty.count, 0);
    }
}
