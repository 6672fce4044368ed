//! Signature plot: microstructure noise across sampling scales.
//!
//! Simulates independent trading sessions of the univariate model, then
//! compares the day-averaged realized signature plot against the closed
//! form, from the microstructural variance at small scales down to the
//! diffusive variance at large ones.
//!
//! Run with: cargo run --release --example signature_plot

use hawkes_micro::analytics::univariate::SignaturePlotParams;
use hawkes_micro::analytics::signature_plot;
use hawkes_micro::empirics::{aggregate_days, realized_signature_plot};
use hawkes_micro::model::{Asset, ModelParams, PricePath, UnivariateParams};
use hawkes_micro::simulate::{simulate_days, SimulationOptions};

fn main() {
    let truth = UnivariateParams::default();
    let params = ModelParams::Univariate(truth);
    let shape = SignaturePlotParams::from_params(&truth).unwrap();
    println!("univariate model: mu = {}, alpha = {}, beta = {}", truth.mu, truth.kernel.alpha, truth.kernel.beta);
    println!("kernel norm      : {:.4} (stable below 1)", truth.spectral_radius());
    println!("microstructural variance V0     = {:.6} /s", shape.v0());
    println!("diffusive variance       V_inf  = {:.6} /s", shape.v_inf());
    println!("crossover rate           gamma  = {:.4} /s\n", shape.gamma);

    let days = 200;
    let horizon = 7200.0;
    println!("simulating {days} sessions of {horizon} s ...");
    let logs = simulate_days(&params, horizon, days, 42, &SimulationOptions::default()).unwrap();
    let events: usize = logs.iter().map(|l| l.len()).sum();
    println!("total events: {events}\n");

    let taus = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];
    let curves: Vec<_> = logs
        .iter()
        .map(|log| {
            let path = PricePath::from_log(log, Asset::First);
            realized_signature_plot(&path, &taus).unwrap()
        })
        .collect();
    let agg = aggregate_days(&curves).unwrap();

    println!("{:>8} {:>12} {:>12} {:>10} {:>8}", "tau (s)", "realized", "closed form", "stderr", "|z|");
    let mut worst_z = 0.0f64;
    for point in agg.points() {
        let closed = signature_plot(&truth, point.tau).unwrap();
        let se = point.stderr.unwrap_or(0.0);
        let z = (point.value - closed).abs() / se.max(1e-12);
        worst_z = worst_z.max(z);
        println!(
            "{:>8} {:>12.6} {:>12.6} {:>10.6} {:>8.2}",
            point.tau, point.value, closed, se, z
        );
    }
    println!("\nworst |z| = {worst_z:.2} (3 would be the usual alarm line)");
    println!("the curve falls from V0 toward V_inf as the scale grows: microstructure");
    println!("noise inflates small-scale variance, and averages out in the diffusion.");
}
