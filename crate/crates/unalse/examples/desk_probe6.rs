//! scratch scan probe (deleted before finalizing)
use std::f64::consts::PI;
use unalse::pipeline::{estimate_panel, EstimateOptions, ThresholdSpec};
use unalse::selection::ThresholdConfig;
use unalse::simulate::{simulate, Scenario, SimulationConfig};
use unalse::metrics;

fn run(tau: f64, beta: f64, delta: f64, delta_bis: f64, reps: u64) {
    let (mut total, mut pd_both) = (0usize, 0usize);
    let (mut ppv, mut npv, mut errr) = (Vec::new(), Vec::new(), Vec::new());
    let mut ranks = std::collections::BTreeMap::<usize, usize>::new();
    for rep in 0..reps {
        let config = SimulationConfig {
            p: 50, t: 500, r: 2,
            condition_number: 2.0,
            beta, tau, delta, delta_bis,
            lambda_coeffs: vec![0.8, 0.2],
            normalize_lambda: true,
            scenario: Scenario::Basic,
            kappa_pert: 0.1,
            seed: 11000 + rep * 13,
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
            *ranks.entry(row.rank).or_default() += 1;
            if row.s_pd && row.sigma_pd { pd_both += 1; }
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
    let rank2 = *ranks.get(&2).unwrap_or(&0) as f64 / total as f64;
    println!(
        "tau={tau} beta={beta:<5} delta={delta:<5} dbis={delta_bis:<5} | rank2={rank2:<5.2} ppv={:<5.2} npv={:<5.2} errr={:<5.2} pd={:<5.2} ranks={:?}",
        mean(&ppv), mean(&npv), mean(&errr), pd_both as f64 / total as f64, ranks
    );
}

fn main() {
    let reps = 4;
    run(4.0, 0.25, 0.55, 0.97, reps);
    run(4.0, 0.25, 0.7, 0.97, reps);
    run(4.0, 0.3, 0.55, 0.95, reps);
    run(5.0, 0.2, 0.55, 0.97, reps);
    run(4.0, 0.25, 0.55, 0.93, reps);
    run(3.0, 0.25, 0.55, 0.95, reps);
}
