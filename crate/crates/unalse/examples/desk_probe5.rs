//! scratch probe (deleted before finalizing)
use std::f64::consts::PI;
use unalse::pipeline::{estimate_panel, EstimateOptions, ThresholdSpec};
use unalse::selection::ThresholdConfig;
use unalse::simulate::{simulate, Scenario, SimulationConfig};

fn main() {
    let config = SimulationConfig {
        p: 50, t: 500, r: 2,
        condition_number: 2.0,
        beta: 0.4, tau: 3.0, delta: 0.7, delta_bis: 0.95,
        lambda_coeffs: vec![0.8, 0.2],
        normalize_lambda: true,
        scenario: Scenario::Basic,
        kappa_pert: 0.1,
        seed: 9000,
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
    for h in [0usize, 3] {
        let row = &out.bundle.manifest.per_frequency[h];
        println!("h={h}: rank={} psi={:.3} rho={:.3} bnd={:?} nz={}", row.rank, row.psi, row.rho, row.boundary_flag, row.nonzero_count);
        let st = &truth.s_true[h];
        let se = &out.bundle.matrices["S"][h];
        let te = &out.bundle.matrices["SigmaTilde"][h];
        let lt = &truth.l_true[h];
        for i in 0..50 {
            for j in (i+1)..50 {
                let t = st.as_matrix()[(i, j)];
                let e = se.as_matrix()[(i, j)];
                if t.norm() > 1e-12 || e.norm() > 1e-12 {
                    let tl = te.as_matrix()[(i, j)];
                    let l = lt.as_matrix()[(i, j)];
                    println!("  ({i:2},{j:2}) Strue={:+.4} Ltrue={:+.4} tilde={:+.3} Shat={:+.3}",
                        t.re, l.re, tl.re, e.re);
                }
            }
        }
    }
}
