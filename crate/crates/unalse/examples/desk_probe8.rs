use std::f64::consts::PI;
use unalse::pipeline::{estimate_panel, EstimateOptions, ThresholdSpec};
use unalse::selection::ThresholdConfig;
use unalse::simulate::{simulate, Scenario, SimulationConfig};
use unalse::metrics;

include!("desk_probe7_body.rs");

fn main() {
    let reps = 8;
    run(3.8, 0.25, 0.7, 0.97, Some(10), reps);
    run(3.5, 0.25, 0.75, 0.98, Some(10), reps);
    run(4.0, 0.25, 0.7, 0.98, Some(10), reps);
    run(3.5, 0.25, 0.7, 0.97, Some(10), reps);
}
