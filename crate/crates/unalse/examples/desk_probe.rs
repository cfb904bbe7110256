//! scratch probe for study parameter tuning (deleted before finalizing)
use std::f64::consts::PI;
use unalse::pipeline::{estimate_panel, EstimateOptions, ThresholdSpec};
use unalse::selection::ThresholdConfig;
use unalse::simulate::{simulate, Scenario, SimulationConfig};
use unalse::metrics;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let tau: f64 = args.get(1).and_then(|v| v.parse().ok()).unwrap_or(3.0);
    let beta: f64 = args.get(2).and_then(|v| v.parse().ok()).unwrap_or(0.4);
    let delta: f64 = args.get(3).and_then(|v| v.parse().ok()).unwrap_or(0.9);
    let reps: u64 = args.get(4).and_then(|v| v.parse().ok()).unwrap_or(4);
    let n_thr: usize = args.get(5).and_then(|v| v.parse().ok()).unwrap_or(4);

    let mut rank_cells = 0usize;
    let mut total_cells = 0usize;
    let mut ppv_acc = Vec::new();
    let mut npv_acc = Vec::new();
    let mut err_ratio_acc = Vec::new();
    let mut pd_ok = 0usize;
    let start = std::time::Instant::now();
    for rep in 0..reps {
        let config = SimulationConfig {
            p: 50, t: 500, r: 2,
            condition_number: 2.0,
            beta, tau, delta,
            delta_bis: 0.5,
            lambda_coeffs: vec![0.8, 0.2],
            normalize_lambda: true,
            scenario: Scenario::Basic,
            kappa_pert: 0.1,
            seed: 5000 + rep,
            frequencies: (0..=5).map(|h| h as f64 * PI / 12.0).collect(),
            burn_in: None,
        };
        let truth = simulate(&config).unwrap();
        let options = EstimateOptions {
            grid: Some((12, 5)),
            thresholds: ThresholdSpec::Auto {
                config: ThresholdConfig { n_thr, max_outer: 6, ..Default::default() },
                pin: false,
            },
            ..Default::default()
        };
        let out = estimate_panel(&truth.panel, &options).unwrap();
        for (h, row) in out.bundle.manifest.per_frequency.iter().enumerate() {
            total_cells += 1;
            if row.rank == 2 { rank_cells += 1; }
            if row.s_pd && row.sigma_pd { pd_ok += 1; }
            let s_hat = &out.bundle.matrices["S"][h];
            let sigma_hat = &out.bundle.matrices["Sigma"][h];
            let sigma_tilde = &out.bundle.matrices["SigmaTilde"][h];
            let sigma_true = truth.l_true[h].add(&truth.s_true[h]).unwrap();
            let rates = metrics::sparsity_predictive(s_hat, &truth.s_true[h], 1e-12).unwrap();
            if let Some(v) = rates.ppv { ppv_acc.push(v); }
            if let Some(v) = rates.npv { npv_acc.push(v); }
            err_ratio_acc.push(metrics::err_ratio(sigma_hat, sigma_tilde, &sigma_true).unwrap());
            if rep == 0 {
                println!("  h={h} rank={} psi={:.3} rho={:.3} beta={:.3} nz={} mc={:.2} bnd={:?} ppv={:?} npv={:?} errr={:.3}",
                    row.rank, row.psi, row.rho, row.beta_hat, row.nonzero_count,
                    row.mc_value.unwrap_or(f64::NAN), row.boundary_flag, rates.ppv, rates.npv,
                    err_ratio_acc.last().unwrap());
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    println!("tau={tau} beta={beta} delta={delta} reps={reps} n_thr={n_thr}");
    println!("rank2: {}/{} = {:.3}", rank_cells, total_cells, rank_cells as f64 / total_cells as f64);
    println!("ppv mean: {:.3} ({}) npv mean: {:.3} ({})", mean(&ppv_acc), ppv_acc.len(), mean(&npv_acc), npv_acc.len());
    println!("err_ratio mean: {:.3}", mean(&err_ratio_acc));
    println!("pd both: {}/{}", pd_ok, total_cells);
    println!("elapsed: {:.1?}", start.elapsed());
}
