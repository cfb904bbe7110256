//! Batch command-line interface: simulate, estimate, evaluate, summary.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use unalse::io::{self, PanelReadOptions};
use unalse::pipeline::{
    self, EstimateOptions, PipelineError, ThresholdSpec,
};
use unalse::selection::ThresholdConfig;
use unalse::simulate::{self, Scenario, SimulationConfig};
use unalse::Kernel;

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Parser)]
#[command(
    name = "unalse",
    version,
    about = "Low-rank plus sparse spectral density matrix estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads; defaults to UNALSE_THREADS or all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate ground-truth replications with known spectra.
    Simulate(SimulateArgs),
    /// Estimate the spectral density decomposition of a panel.
    Estimate(EstimateArgs),
    /// Score estimate bundles against simulated truths.
    Evaluate(EvaluateArgs),
    /// Per-frequency summary statistics of an estimate bundle.
    Summary(SummaryArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario preset: A (basic), B (general, very sparse), C (general,
    /// less sparse).
    #[arg(long)]
    scenario: Option<char>,
    /// Setting preset 1-5 fixing p and T.
    #[arg(long)]
    setting: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, name = "T")]
    t: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    /// Condition number of the latent eigenvalues.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    delta_bis: Option<f64>,
    /// Comma-separated lag coefficients, e.g. "0.8,0.2".
    #[arg(long)]
    lambda: Option<String>,
    /// Rescale the lag coefficients to unit sum of squares.
    #[arg(long, default_value_t = false)]
    normalize_lambda: bool,
    #[arg(long)]
    kappa_pert: Option<f64>,
    /// Basic or general filters, overriding the scenario preset.
    #[arg(long)]
    filters: Option<Scenario>,
    /// Frequency grid denominator: theta_h = h*pi/<grid>.
    #[arg(long, default_value_t = 12)]
    grid: usize,
    /// Largest grid index h.
    #[arg(long, default_value_t = 5)]
    grid_max: usize,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Input panel (delimited numeric table).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Skip a header line.
    #[arg(long, default_value_t = false)]
    header: bool,
    /// Input rows are time points instead of series.
    #[arg(long, default_value_t = false)]
    transpose: bool,
    #[arg(long, default_value = "bartlett")]
    kernel: Kernel,
    /// Lag-window bandwidth: "auto" picks floor(sqrt(T)).
    #[arg(long, default_value = "auto")]
    bandwidth: String,
    /// Frequency grid denominator; omit to use the bandwidth grid.
    #[arg(long)]
    grid: Option<usize>,
    /// Largest grid index h (defaults to the denominator).
    #[arg(long)]
    grid_max: Option<usize>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    demean: bool,
    /// Manual eigenvalue threshold (requires --rho, conflicts with
    /// --auto-select).
    #[arg(long)]
    psi: Option<f64>,
    /// Manual sparsity threshold.
    #[arg(long)]
    rho: Option<f64>,
    /// Select thresholds by the grid criterion.
    #[arg(long, default_value_t = false)]
    auto_select: bool,
    #[arg(long, default_value_t = 1)]
    r_thr: usize,
    #[arg(long, default_value_t = 1.0)]
    s_thr: f64,
    #[arg(long, default_value_t = 8)]
    n_thr: usize,
    #[arg(long, default_value_t = 10)]
    max_outer: usize,
    /// Select one threshold pair at a reference frequency and reuse it.
    #[arg(long, default_value_t = false)]
    pin_thresholds: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    gini_adaptation: bool,
    #[arg(long, default_value_t = 0.01)]
    varsigma: f64,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    /// Emit residual and total inverses when positive definite.
    #[arg(long, default_value_t = false)]
    with_inverse: bool,
    /// Write per-frequency selection grid traces.
    #[arg(long, default_value_t = false)]
    export_grid_trace: bool,
    /// Fail (exit 4) when any frequency does not converge.
    #[arg(long, default_value_t = false)]
    strict: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Root of estimate bundles (one subdirectory per replication).
    #[arg(long)]
    estimates: PathBuf,
    /// Root of truth bundles.
    #[arg(long)]
    truth: PathBuf,
    /// JSON report path.
    #[arg(long)]
    report: PathBuf,
    /// Also write per-metric CSV tables into this directory.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Zero tolerance for sparsity-pattern comparisons.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct SummaryArgs {
    /// Estimate bundle directory.
    #[arg(long)]
    estimates: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// How many leading eigenvalues to report.
    #[arg(long, default_value_t = 4)]
    top_eigs: usize,
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn pipeline_exit(err: &PipelineError) -> u8 {
    match err {
        PipelineError::Io(io_err) => match io_err {
            io::IoError::Parse { .. }
            | io::IoError::NaN { .. }
            | io::IoError::Ragged { .. }
            | io::IoError::Empty { .. } => EXIT_PARSE,
            _ => EXIT_PARSE,
        },
        PipelineError::InvalidOption(_) => EXIT_USAGE,
        PipelineError::Periodogram(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

fn run_simulate(args: &SimulateArgs) -> ExitCode {
    let mut config = match (args.scenario, args.setting) {
        (Some(label), Some(setting)) => match simulate::preset(label, setting) {
            Some(c) => c,
            None => {
                return fail(
                    EXIT_USAGE,
                    format!("unknown scenario/setting pair {label}{setting}"),
                )
            }
        },
        (None, None) => SimulationConfig {
            p: 0,
            t: 0,
            r: 2,
            condition_number: 2.0,
            beta: 0.5,
            tau: 1.0,
            delta: 0.5,
            delta_bis: 0.5,
            lambda_coeffs: vec![0.8, 0.2],
            normalize_lambda: false,
            scenario: Scenario::Basic,
            kappa_pert: 0.1,
            seed: 0,
            frequencies: Vec::new(),
            burn_in: None,
        },
        _ => {
            return fail(
                EXIT_USAGE,
                "--scenario and --setting must be given together",
            )
        }
    };

    if let Some(p) = args.p {
        config.p = p;
    }
    if let Some(t) = args.t {
        config.t = t;
    }
    if let Some(r) = args.r {
        config.r = r;
    }
    if let Some(c) = args.c {
        config.condition_number = c;
    }
    if let Some(beta) = args.beta {
        config.beta = beta;
    }
    if let Some(tau) = args.tau {
        config.tau = tau;
    }
    if let Some(delta) = args.delta {
        config.delta = delta;
    }
    if let Some(delta_bis) = args.delta_bis {
        config.delta_bis = delta_bis;
    }
    if let Some(lambda) = &args.lambda {
        match lambda
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
        {
            Ok(coeffs) => config.lambda_coeffs = coeffs,
            Err(_) => return fail(EXIT_USAGE, format!("cannot parse --lambda '{lambda}'")),
        }
    }
    config.normalize_lambda = args.normalize_lambda;
    if let Some(kappa) = args.kappa_pert {
        config.kappa_pert = kappa;
    }
    if let Some(filters) = args.filters {
        config.scenario = filters;
    }
    if args.grid == 0 {
        return fail(EXIT_USAGE, "--grid must be positive");
    }
    config.frequencies = (0..=args.grid_max.min(args.grid))
        .map(|h| h as f64 * std::f64::consts::PI / args.grid as f64)
        .collect();
    if config.p == 0 || config.t == 0 {
        return fail(
            EXIT_USAGE,
            "dimensions are unset; pass --scenario/--setting or --p and --T",
        );
    }

    for rep in 0..args.reps {
        let mut rep_config = config.clone();
        rep_config.seed = args.seed.wrapping_add(rep as u64);
        let truth = match simulate::simulate(&rep_config) {
            Ok(t) => t,
            Err(e) => return fail(EXIT_NUMERIC, e),
        };
        let dir = args.out.join(format!("rep{rep:03}"));
        if let Err(e) = io::write_truth(&truth, &rep_config, &dir) {
            return fail(EXIT_PARSE, e);
        }
        println!("wrote {}", dir.display());
    }
    ExitCode::SUCCESS
}

fn run_estimate(args: &EstimateArgs) -> ExitCode {
    let bandwidth = match args.bandwidth.as_str() {
        "auto" => None,
        other => match other.parse::<usize>() {
            Ok(v) if v >= 1 => Some(v),
            _ => {
                return fail(
                    EXIT_USAGE,
                    format!("--bandwidth must be 'auto' or a positive integer, got '{other}'"),
                )
            }
        },
    };
    let thresholds = match (args.psi, args.rho, args.auto_select) {
        (Some(psi), Some(rho), false) => ThresholdSpec::Manual { psi, rho },
        (None, None, true) => ThresholdSpec::Auto {
            config: ThresholdConfig {
                r_thr: args.r_thr,
                s_thr: args.s_thr,
                n_thr: args.n_thr,
                max_outer: args.max_outer,
            },
            pin: args.pin_thresholds,
        },
        (None, None, false) => {
            return fail(
                EXIT_USAGE,
                "choose thresholds: either --psi and --rho, or --auto-select",
            )
        }
        _ => {
            return fail(
                EXIT_USAGE,
                "--psi/--rho and --auto-select are mutually exclusive (and psi, rho come as a pair)",
            )
        }
    };

    let options = PanelReadOptions {
        delimiter: args.delimiter,
        header: args.header,
        transpose: args.transpose,
    };
    let panel = match io::read_panel(&args.input, &options) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_PARSE, e),
    };

    let grid = match (args.grid, args.grid_max) {
        (Some(denom), max) => Some((denom, max.unwrap_or(denom))),
        (None, Some(_)) => {
            return fail(EXIT_USAGE, "--grid-max requires --grid");
        }
        (None, None) => None,
    };

    let estimate_options = EstimateOptions {
        kernel: args.kernel,
        bandwidth,
        demean: args.demean,
        grid,
        thresholds,
        varsigma: args.varsigma,
        max_iterations: args.max_iterations,
        gini_adaptation: args.gini_adaptation,
        with_inverse: args.with_inverse,
        seed: args.seed,
    };

    let output = match pipeline::estimate_panel(&panel, &estimate_options) {
        Ok(o) => o,
        Err(e) => return fail(pipeline_exit(&e), e),
    };
    if args.strict && !output.all_converged {
        return fail(
            EXIT_NUMERIC,
            "solver did not converge at every frequency (strict mode)",
        );
    }
    if let Err(e) = io::write_estimate(&output.bundle, &args.out) {
        return fail(EXIT_PARSE, e);
    }
    if args.export_grid_trace {
        for (h, trace) in output.grid_traces.iter().enumerate() {
            if let Some(cells) = trace {
                let path = args.out.join(format!("grid_trace_h{h}.csv"));
                if let Err(e) = pipeline::write_grid_trace_csv(cells, &path) {
                    return fail(EXIT_PARSE, e);
                }
            }
        }
    }
    for row in &output.bundle.manifest.per_frequency {
        println!(
            "h={} f={:.4} rank={} psi={:.4} rho={:.4} beta={:.4} converged={}",
            row.h,
            row.frequency / std::f64::consts::PI,
            row.rank,
            row.psi,
            row.rho,
            row.beta_hat,
            row.converged
        );
    }
    println!("wrote {}", args.out.display());
    ExitCode::SUCCESS
}

fn run_evaluate(args: &EvaluateArgs) -> ExitCode {
    let report = match pipeline::evaluate_dirs(&args.estimates, &args.truth, args.tol) {
        Ok(r) => r,
        Err(e) => return fail(pipeline_exit(&e), e),
    };
    let json = match serde_json::to_string_pretty(&report) {
        Ok(j) => j,
        Err(e) => return fail(EXIT_NUMERIC, e),
    };
    if let Err(e) = std::fs::write(&args.report, json + "\n") {
        return fail(EXIT_PARSE, e);
    }
    if let Some(csv_dir) = &args.out_csv {
        if let Err(e) = report.write_csv(csv_dir) {
            return fail(EXIT_PARSE, e);
        }
    }
    println!(
        "replications={} rank_correct={:.2} (true rank {})",
        report.replications, report.rank_correct, report.r_true
    );
    ExitCode::SUCCESS
}

fn run_summary(args: &SummaryArgs) -> ExitCode {
    let bundle = match io::read_estimate(&args.estimates) {
        Ok(b) => b,
        Err(e) => return fail(EXIT_PARSE, e),
    };
    let rows = match pipeline::summarize_bundle(&bundle, args.top_eigs) {
        Ok(r) => r,
        Err(e) => return fail(pipeline_exit(&e), e),
    };
    if let Err(e) = pipeline::write_summary_csv(&rows, &args.out) {
        return fail(EXIT_PARSE, e);
    }
    println!("wrote {}", args.out.display());
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("UNALSE_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if n == 0 {
            return fail(EXIT_USAGE, "--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(EXIT_USAGE, e);
        }
    }
    match &cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Estimate(args) => run_estimate(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Summary(args) => run_summary(args),
    }
}
