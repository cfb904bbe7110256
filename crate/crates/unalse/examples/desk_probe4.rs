//! scratch scan probe (deleted before finalizing)
use std::f64::consts::PI;
use unalse::pipeline::{estimate_panel, EstimateOptions, ThresholdSpec};
use unalse::selection::ThresholdConfig;
use unalse::simulate::{simulate, Scenario, SimulationConfig};
use unalse::{metrics, eigh};

fn run(tau: f64, beta: f64, delta: f64, delta_bis: f64, c: f64, reps: u64) {
    let (mut rank_cells, mut total, mut pd, mut pd_sigma) = (0usize, 0usize, 0usize, 0usize);
    let (mut ppv, mut npv, mut errr) = (Vec::new(), Vec::new(), Vec::new());
    let mut lmin_su: Vec<f64> = Vec::new();
    let mut surv = Vec::new();
    let mut surv_min: f64 = f64::INFINITY;
    for rep in 0..reps {
        let config = SimulationConfig {
            p: 50, t: 500, r: 2,
            condition_number: c,
            beta, tau, delta, delta_bis,
            lambda_coeffs: vec![0.8, 0.2],
            normalize_lambda: true,
            scenario: Scenario::Basic,
            kappa_pert: 0.1,
            seed: 9000 + rep * 13,
            frequencies: (0..=5).map(|h| h as f64 * PI / 12.0).collect(),
            burn_in: None,
        };
        let truth = simulate(&config).unwrap();
        // truth survivor stats at h=0
        let st = &truth.s_true[0];
        let mut count = 0;
        for i in 0..50 { for j in (i+1)..50 {
            let v = st.as_matrix()[(i,j)].norm();
            if v > 1e-12 { count += 1; surv_min = surv_min.min(v); }
        }}
        surv.push(count);
        let options = EstimateOptions {
            grid: Some((12, 5)),
            thresholds: ThresholdSpec::Auto {
                config: ThresholdConfig { n_thr: 4, max_outer: 6, ..Default::default() },
                pin: false,
            },
            ..Default::default()
        };
        let out = estimate_panel(&truth.panel, &options).unwrap();
        for (h, row) in out.bundle.manifest.per_frequency.iter().enumerate() {
            total += 1;
            if row.rank == 2 { rank_cells += 1; }
            if row.s_pd { pd += 1; }
            if row.sigma_pd { pd_sigma += 1; }
            let s_hat = &out.bundle.matrices["S"][h];
            let sigma_hat = &out.bundle.matrices["Sigma"][h];
            let sigma_tilde = &out.bundle.matrices["SigmaTilde"][h];
            let sigma_true = truth.l_true[h].add(&truth.s_true[h]).unwrap();
            let rates = metrics::sparsity_predictive(s_hat, &truth.s_true[h], 1e-12).unwrap();
            if let Some(v) = rates.ppv { ppv.push(v); }
            if let Some(v) = rates.npv { npv.push(v); }
            errr.push(metrics::err_ratio(sigma_hat, sigma_tilde, &sigma_true).unwrap());
            lmin_su.push(eigh(s_hat).unwrap().min_eigenvalue());
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    let mut l = lmin_su.clone();
    l.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "tau={tau} beta={beta} delta={delta:<5} dbis={delta_bis:<5} c={c} | rank2={:<5.2} ppv={:<5.2} npv={:<5.2} errr={:<5.2} pdS={:<5.2} pdSig={:<5.2} | surv~{:<4.0} survmin={:.2} lminSu[5%]={:.3} med={:.3}",
        rank_cells as f64 / total as f64, mean(&ppv), mean(&npv), mean(&errr),
        pd as f64 / total as f64, pd_sigma as f64 / total as f64,
        mean(&surv.iter().map(|&v| v as f64).collect::<Vec<_>>()), surv_min,
        l[l.len()/20], l[l.len()/2]
    );
}

fn main() {
    let reps = 4;
    for &(delta, dbis) in &[(0.5, 0.95), (0.7, 0.95), (0.9, 0.98), (0.7, 0.98), (0.5, 0.98)] {
        run(3.0, 0.4, delta, dbis, 2.0, reps);
    }
    run(3.0, 0.3, 0.7, 0.97, 2.0, reps);
    run(3.0, 0.4, 0.7, 0.97, 1.5, reps);
}
