//! scratch scan probe (deleted before finalizing)
use std::f64::consts::PI;
use unalse::pipeline::{estimate_panel, EstimateOptions, ThresholdSpec};
use unalse::selection::ThresholdConfig;
use unalse::simulate::{simulate, Scenario, SimulationConfig};
use unalse::metrics;

fn run(tau: f64, beta: f64, delta: f64, delta_bis: f64, reps: u64) {
    let mut rank_cells = 0usize;
    let mut total = 0usize;
    let mut ppv = Vec::new();
    let mut npv = Vec::new();
    let mut errr = Vec::new();
    let mut pd = 0usize;
    for rep in 0..reps {
        let config = SimulationConfig {
            p: 50, t: 500, r: 2,
            condition_number: 2.0,
            beta, tau, delta, delta_bis,
            lambda_coeffs: vec![0.8, 0.2],
            normalize_lambda: true,
            scenario: Scenario::Basic,
            kappa_pert: 0.1,
            seed: 7000 + rep * 13,
            frequencies: (0..=5).map(|h| h as f64 * PI / 12.0).collect(),
            burn_in: None,
        };
        let truth = simulate(&config).unwrap();
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
            if row.s_pd && row.sigma_pd { pd += 1; }
            let s_hat = &out.bundle.matrices["S"][h];
            let sigma_hat = &out.bundle.matrices["Sigma"][h];
            let sigma_tilde = &out.bundle.matrices["SigmaTilde"][h];
            let sigma_true = truth.l_true[h].add(&truth.s_true[h]).unwrap();
            let rates = metrics::sparsity_predictive(s_hat, &truth.s_true[h], 1e-12).unwrap();
            if let Some(v) = rates.ppv { ppv.push(v); }
            if let Some(v) = rates.npv { npv.push(v); }
            errr.push(metrics::err_ratio(sigma_hat, sigma_tilde, &sigma_true).unwrap());
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    println!(
        "tau={tau:<4} beta={beta:<5} delta={delta:<4} dbis={delta_bis:<5} | rank2={:<6.3} ppv={:<6.3}({}) npv={:<6.3}({}) errr={:<6.3} pd={:<6.3}",
        rank_cells as f64 / total as f64, mean(&ppv), ppv.len(), mean(&npv), npv.len(), mean(&errr), pd as f64 / total as f64
    );
}

fn main() {
    let reps = 4;
    for &(tau, beta, delta, dbis) in &[
        (3.0, 0.4, 0.9, 0.9),
        (3.0, 0.4, 0.9, 0.95),
        (3.0, 0.35, 0.9, 0.95),
        (3.0, 0.45, 0.95, 0.93),
        (4.0, 0.4, 0.9, 0.95),
        (3.0, 0.5, 0.9, 0.95),
    ] {
        run(tau, beta, delta, dbis, reps);
    }
}
