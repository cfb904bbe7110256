//! scratch probe - where do true nonzeros go (deleted before finalizing)
use std::f64::consts::PI;
use unalse::periodogram::{smoothed_periodogram_at, Kernel};
use unalse::simulate::{simulate, Scenario, SimulationConfig};
use unalse::solver::{alse_solve, SolverConfig};

fn main() {
    let config = SimulationConfig {
        p: 50, t: 500, r: 2,
        condition_number: 2.0,
        beta: 0.4, tau: 3.0, delta: 0.9,
        delta_bis: 0.5,
        lambda_coeffs: vec![0.8, 0.2],
        normalize_lambda: true,
        scenario: Scenario::Basic,
        kappa_pert: 0.1,
        seed: 5000,
        frequencies: (0..=5).map(|h| h as f64 * PI / 12.0).collect(),
        burn_in: None,
    };
    let truth = simulate(&config).unwrap();
    let spectra = smoothed_periodogram_at(&truth.panel, Kernel::Bartlett, 22, true, &config.frequencies).unwrap();
    let h = 0;
    let s_true = &truth.s_true[h];
    let tilde = &spectra[h];
    // solve at the pair the probe found: psi=0.841 rho=0.158
    let solver = SolverConfig::new(0.841, 0.158).unwrap();
    let sol = alse_solve(tilde, &solver).unwrap();
    println!("true off-diag nonzeros at h=0 (upper), their estimates:");
    let mut count = 0;
    for i in 0..50 {
        for j in (i+1)..50 {
            let t = s_true.as_matrix()[(i, j)];
            if t.norm() > 1e-12 {
                count += 1;
                let raw = tilde.as_matrix()[(i, j)];
                let es = sol.s_hat.as_matrix()[(i, j)];
                let el = sol.l_hat.as_matrix()[(i, j)];
                println!("  ({i:2},{j:2}) true={:+.3} tilde={:+.3}{:+.3}i  S_hat={:+.3}{:+.3}i  L_hat={:+.3}{:+.3}i",
                    t.re, raw.re, raw.im, es.re, es.im, el.re, el.im);
            }
        }
    }
    println!("total true nonzero pairs: {count}");
    println!("rank={} nz={} conv={} iters={}", sol.rank, sol.nonzero_count, sol.converged, sol.iterations);
    let d_true: Vec<f64> = (0..50).map(|i| s_true.as_matrix()[(i,i)].re).collect();
    let mut sorted = d_true.clone();
    sorted.sort_by(|a,b| b.partial_cmp(a).unwrap());
    println!("true S(0) diag top5: {:?}", &sorted[..5]);
}
