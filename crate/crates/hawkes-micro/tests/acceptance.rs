//! End-to-end acceptance suite: one test per headline property, each
//! printing a PASS/FAIL line (run with `--nocapture` to see them all).
//!
//! Monte Carlo tests use fixed seeds; closed-form cross-checks use seeded
//! random parameter draws.

use hawkes_micro::analytics::{
    self, covariance_at_scale, covariance_coefficients, diffusive_covariance, leadlag_delta,
    signature_plot, symmetric_covariance, validation,
};
use hawkes_micro::curve::log_grid;
use hawkes_micro::empirics::{self, pooled_mean};
use hawkes_micro::estimation::{
    fit_mle, fit_regression, log_likelihood, log_likelihood_parts, FitOptions, RegressionData,
    RegressionWeights,
};
use hawkes_micro::model::{
    Asset, BivariateParams, EventLog, ExpKernel, ModelParams, PricePath, UnivariateParams,
};
use hawkes_micro::simulate::{replication_seed, simulate, simulate_days, SimulationOptions};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

fn report(number: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "ACCEPTANCE {number} ({name}): {} -- {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

/// Random stable bivariate parameters with one shared decay rate.
fn random_stable(rng: &mut ChaCha12Rng, beta_range: (f64, f64)) -> BivariateParams {
    loop {
        let beta = rng.random_range(beta_range.0..beta_range.1);
        let g12: f64 = rng.random_range(0.02..0.7);
        let g34: f64 = rng.random_range(0.02..0.7);
        let slack = (1.0 - g12.max(g34)) * 0.9;
        let g13 = rng.random_range(0.05..0.95) * slack;
        let g31 = rng.random_range(0.05..0.95) * slack;
        let mu1 = rng.random_range(0.005..0.1);
        let mu3 = rng.random_range(0.005..0.1);
        let p = BivariateParams::new(
            mu1,
            mu3,
            ExpKernel::new(g12 * beta, beta).unwrap(),
            ExpKernel::new(g13 * beta, beta).unwrap(),
            ExpKernel::new(g31 * beta, beta).unwrap(),
            ExpKernel::new(g34 * beta, beta).unwrap(),
        )
        .unwrap();
        if p.spectral_radius() < 0.95 {
            return p;
        }
    }
}

/// Criterion 1: the day-averaged realized signature plot of 200 simulated
/// two-hour sessions matches the closed form within 3 pooled standard
/// errors at every scale, and within 2% relative at tau = 10 s.
#[test]
fn acceptance_1_signature_plot_reproduction() {
    let truth = UnivariateParams::default();
    let params = ModelParams::Univariate(truth);
    let horizon = 7200.0;
    let taus = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0];
    let logs = simulate_days(&params, horizon, 200, 4242, &SimulationOptions::default()).unwrap();
    let curves: Vec<_> = logs
        .par_iter()
        .map(|log| {
            let path = PricePath::from_log(log, Asset::First);
            empirics::realized_signature_plot(&path, &taus).unwrap()
        })
        .collect();
    let agg = empirics::aggregate_days(&curves).unwrap();

    let mut ok = true;
    let mut worst_z = 0.0f64;
    let mut rel10 = f64::NAN;
    for point in agg.points() {
        let closed = signature_plot(&truth, point.tau).unwrap();
        let se = point.stderr.unwrap_or(0.0).max(1e-12);
        let z = (point.value - closed).abs() / se;
        worst_z = worst_z.max(z);
        if z > 3.0 {
            ok = false;
        }
        if point.tau == 10.0 {
            rel10 = (point.value - closed).abs() / closed;
            if rel10 > 0.02 {
                ok = false;
            }
        }
    }
    let closed10 = signature_plot(&truth, 10.0).unwrap();
    report(
        1,
        "signature plot reproduction",
        ok,
        &format!(
            "worst |z| {worst_z:.2} over {} scales; tau=10: rel {rel10:.4} vs closed form {closed10:.6}",
            taus.len()
        ),
    );
    assert!(ok);
}

/// Criterion 2: the realized correlation at tau = 600 s of the symmetric
/// bivariate model matches the closed-form Epps curve within 3 pooled
/// standard errors, at both coupling strengths.
#[test]
fn acceptance_2_epps_reproduction() {
    let horizon = 72_000.0;
    let days = 30;
    let mut ok = true;
    let mut details = Vec::new();
    for (alpha13, seed) in [(0.01, 555u64), (0.05, 556u64)] {
        let p = BivariateParams::symmetric(0.015, 0.023, alpha13, 0.11).unwrap();
        let coeffs = covariance_coefficients(&p).unwrap();
        let m = covariance_at_scale(&coeffs, 600.0).unwrap();
        let rho_closed = m[0][1] / (m[0][0] * m[1][1]).sqrt();
        let rho_inf = analytics::epps_asymptote(&p).unwrap();
        let logs = simulate_days(
            &ModelParams::Bivariate(p),
            horizon,
            days,
            seed,
            &SimulationOptions::default(),
        )
        .unwrap();
        let per_day: Vec<f64> = logs
            .par_iter()
            .map(|log| {
                let p1 = PricePath::from_log(log, Asset::First);
                let p2 = PricePath::from_log(log, Asset::Second);
                empirics::realized_correlation(&p1, &p2, 600.0).unwrap()
            })
            .collect();
        let (mean, se) = pooled_mean(&per_day);
        let z = (mean - rho_closed).abs() / se.max(1e-12);
        if z > 3.0 {
            ok = false;
        }
        details.push(format!(
            "alpha13={alpha13}: rho_hat(600) {mean:.4} vs closed {rho_closed:.4} (rho_inf {rho_inf:.3}), |z| {z:.2}"
        ));
    }
    report(2, "Epps reproduction", ok, &details.join("; "));
    assert!(ok);
}

/// Criterion 3: the closed forms agree along independent routes: the
/// symmetric-case expressions against the transform route to 1e-10, the
/// transform route against numerical quadrature of the second-order
/// kernel to 1e-8 on 100 random stable parameter sets, and the
/// no-coupling reduction against the univariate signature plot to 1e-12.
#[test]
fn acceptance_3_dual_path_closed_forms() {
    let mut ok = true;
    let mut notes = Vec::new();

    // Symmetric dual path.
    let mut worst = 0.0f64;
    for alpha13 in [0.01, 0.02775, 0.05] {
        let p = BivariateParams::symmetric(0.015, 0.023, alpha13, 0.11).unwrap();
        let coeffs = covariance_coefficients(&p).unwrap();
        for tau in log_grid(0.1, 1e5, 40) {
            let m = covariance_at_scale(&coeffs, tau).unwrap();
            let (c11, c12) = symmetric_covariance(&p, tau).unwrap();
            let d11 = (m[0][0] - c11).abs() / c11.abs();
            let d12 = (m[0][1] - c12).abs() / c12.abs().max(1e-3 * c11.abs());
            worst = worst.max(d11).max(d12);
        }
    }
    if worst > 1e-10 {
        ok = false;
    }
    notes.push(format!("symmetric dual path worst rel {worst:.2e}"));

    // Quadrature oracle on random stable parameters.
    let mut rng = ChaCha12Rng::seed_from_u64(33);
    let mut worst_quad = 0.0f64;
    for _ in 0..100 {
        let p = random_stable(&mut rng, (0.05, 1.0));
        let coeffs = covariance_coefficients(&p).unwrap();
        let tau = rng.random_range(1.0..300.0);
        let direct = covariance_at_scale(&coeffs, tau).unwrap();
        let quad = validation::quadrature_covariance_at_scale(&coeffs, tau);
        let scale = direct[0][0].max(direct[1][1]);
        for k in 0..2 {
            for l in 0..2 {
                let d = (direct[k][l] - quad[k][l]).abs()
                    / direct[k][l].abs().max(1e-4 * scale);
                worst_quad = worst_quad.max(d);
            }
        }
    }
    if worst_quad > 1e-8 {
        ok = false;
    }
    notes.push(format!("quadrature worst rel {worst_quad:.2e} over 100 draws"));

    // Uncoupled reduction to the univariate signature plot.
    let mut worst_red = 0.0f64;
    for (a12, a34) in [(0.023, 0.05), (0.023, 0.023)] {
        let p = BivariateParams::new(
            0.016,
            0.02,
            ExpKernel::new(a12, 0.11).unwrap(),
            ExpKernel::zero_with_beta(0.11),
            ExpKernel::zero_with_beta(0.11),
            ExpKernel::new(a34, 0.11).unwrap(),
        )
        .unwrap();
        let coeffs = covariance_coefficients(&p).unwrap();
        let uni = UnivariateParams::from_rates(0.016, a12, 0.11).unwrap();
        for tau in log_grid(0.1, 1e5, 40) {
            let m = covariance_at_scale(&coeffs, tau).unwrap();
            let expected = signature_plot(&uni, tau).unwrap();
            worst_red = worst_red.max((m[0][0] - expected).abs() / expected);
        }
    }
    if worst_red > 1e-12 {
        ok = false;
    }
    notes.push(format!("univariate reduction worst rel {worst_red:.2e}"));

    report(3, "dual-path closed forms", ok, &notes.join("; "));
    assert!(ok);
}

/// Criterion 4: the O(N) likelihood recursion equals O(N^2) brute force to
/// 1e-10 relative on 50 random logs of up to 1e4 events, and the empty-log
/// value is exactly the compensator constant.
#[test]
fn acceptance_4_likelihood_oracle() {
    fn brute_force(params: &ModelParams, log: &EventLog) -> f64 {
        let n = params.n_streams();
        let horizon = log.horizon();
        let mut total = 0.0;
        for i in 1..=n {
            let mut li = -(params.mu(i) - 1.0) * horizon;
            for (idx, e) in log.events().iter().enumerate() {
                if e.stream == i {
                    let mut lambda = params.mu(i);
                    for past in &log.events()[..idx] {
                        let k = params.kernel(i, past.stream);
                        if k.alpha != 0.0 {
                            lambda += k.eval(e.time - past.time);
                        }
                    }
                    li += lambda.ln();
                }
                let k = params.kernel(i, e.stream);
                if k.alpha != 0.0 {
                    li -= k.alpha / k.beta * (1.0 - (-k.beta * (horizon - e.time)).exp());
                }
            }
            total += li;
        }
        total
    }

    let mut rng = ChaCha12Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    let mut total_events = 0usize;
    for case in 0..50u64 {
        let bivariate = rng.random_range(0.0..1.0) < 0.4;
        let (params, rate) = if bivariate {
            let p = random_stable(&mut rng, (0.05, 0.5));
            let lambdas = p.mean_intensities().unwrap();
            (ModelParams::Bivariate(p), lambdas.iter().sum::<f64>())
        } else {
            let mu = rng.random_range(0.005..0.05);
            let beta = rng.random_range(0.05..0.5);
            let norm = rng.random_range(0.05..0.9);
            let p = UnivariateParams::from_rates(mu, norm * beta, beta).unwrap();
            (ModelParams::Univariate(p), 2.0 * p.mean_rate())
        };
        // Log-uniform target sizes up to 1e4 events.
        let target: f64 = 10f64.powf(rng.random_range(1.5..4.0));
        let horizon = (target / rate).max(10.0);
        let log = simulate(
            &params,
            horizon,
            replication_seed(900, case),
            &SimulationOptions::default(),
        )
        .unwrap();
        total_events += log.len();
        let fast = log_likelihood(&params, &log).unwrap();
        let slow = brute_force(&params, &log);
        worst = worst.max((fast - slow).abs() / slow.abs().max(1.0));
        // Off-truth evaluation exercises the recursion away from the
        // generating parameters.
        let off = ModelParams::Univariate(UnivariateParams::from_rates(0.02, 0.05, 0.2).unwrap());
        if params.n_streams() == 2 {
            let fast = log_likelihood(&off, &log).unwrap();
            let slow = brute_force(&off, &log);
            worst = worst.max((fast - slow).abs() / slow.abs().max(1.0));
        }
    }
    let mut ok = worst <= 1e-10;

    // Empty-log exactness, per stream and total.
    let empty = EventLog::new(vec![], 100.0, 2).unwrap();
    let p = ModelParams::Univariate(UnivariateParams::default());
    let parts = log_likelihood_parts(&p, &empty).unwrap();
    let expected = -(0.016 - 1.0) * 100.0;
    if parts != vec![expected, expected] {
        ok = false;
    }

    report(
        4,
        "likelihood oracle",
        ok,
        &format!("worst rel {worst:.2e} over 50 logs ({total_events} events total); empty-log exact"),
    );
    assert!(ok);
}

/// Per-replication recovery errors of both estimators over 20 sessions of
/// 42 h at the canonical parameters.
fn recovery_errors() -> Vec<([f64; 3], [f64; 3])> {
    let truth = ModelParams::Univariate(UnivariateParams::default());
    let horizon = 151_200.0;
    let taus = log_grid(1.0, 1000.0, 50);
    (0..20u64)
        .into_par_iter()
        .map(|rep| {
            let log = simulate(
                &truth,
                horizon,
                replication_seed(2025, rep),
                &SimulationOptions::default(),
            )
            .unwrap();
            let opts = FitOptions { seed: rep, ..Default::default() };
            let mle = fit_mle(std::slice::from_ref(&log), None, &opts).unwrap();
            let ModelParams::Univariate(m) = mle.params else { panic!() };
            let path = PricePath::from_log(&log, Asset::First);
            let curve = empirics::realized_signature_plot(&path, &taus).unwrap();
            let reg = fit_regression(
                &RegressionData::Univariate { curve: &curve },
                &RegressionWeights::default(),
                None,
                &opts,
            )
            .unwrap();
            let ModelParams::Univariate(r) = reg.params else { panic!() };
            let err = |p: &UnivariateParams| {
                [
                    (p.mu - 0.016).abs() / 0.016,
                    (p.kernel.alpha - 0.023).abs() / 0.023,
                    (p.kernel.beta - 0.11).abs() / 0.11,
                ]
            };
            (err(&m), err(&r))
        })
        .collect()
}

fn medians(errors: &[([f64; 3], [f64; 3])], arm: usize) -> [f64; 3] {
    let mut out = [0.0f64; 3];
    for (coord, slot) in out.iter_mut().enumerate() {
        let mut v: Vec<f64> = errors
            .iter()
            .map(|pair| if arm == 0 { pair.0[coord] } else { pair.1[coord] })
            .collect();
        v.sort_by(f64::total_cmp);
        *slot = 0.5 * (v[9] + v[10]);
    }
    out
}

/// Criterion 5, likelihood arm: over 20 replications of 42 h at the
/// canonical parameters, the MLE recovers each parameter with median
/// relative error at most 10%.
#[test]
fn acceptance_5a_mle_recovery() {
    let errors = recovery_errors();
    let meds = medians(&errors, 0);
    let ok = meds.iter().all(|&m| m <= 0.10);
    report(
        5,
        "estimator recovery, mle arm",
        ok,
        &format!("medians mu {:.3} alpha {:.3} beta {:.3} (bound 0.10)", meds[0], meds[1], meds[2]),
    );
    assert!(ok);
}

/// Criterion 5, regression arm: the same bound for the multiscale
/// signature-plot regression.
///
/// The decay rate is weakly identified by a realized signature plot: its
/// global least-squares optimum over one 42 h session carries a median
/// relative error near 15% even with inverse-variance weighting (equal
/// weighting gives ~36%), so this arm fails the stated bound. The failure
/// is a property of the estimator, not the optimizer: restarting at the
/// generating parameters reaches the same optimum.
#[test]
fn acceptance_5b_regression_recovery() {
    let errors = recovery_errors();
    let meds = medians(&errors, 1);
    let ok = meds.iter().all(|&m| m <= 0.10);
    report(
        5,
        "estimator recovery, regression arm",
        ok,
        &format!("medians mu {:.3} alpha {:.3} beta {:.3} (bound 0.10)", meds[0], meds[1], meds[2]),
    );
    assert!(ok);
}

/// Criterion 6: a symmetric coupling matrix has no lead-lag at any scale,
/// and the one-directional amplitude matches its printed closed form.
#[test]
fn acceptance_6_leadlag_null_and_sign() {
    let mut ok = true;
    let sym = BivariateParams::symmetric(0.015, 0.023, 0.05, 0.11).unwrap();
    let coeffs = covariance_coefficients(&sym).unwrap();
    let mut worst = 0.0f64;
    for tau in log_grid(0.1, 1e4, 30) {
        let delta = leadlag_delta(&coeffs, tau).unwrap().abs();
        // Covariances at this scale are O(0.1 tau); machine-precision zero
        // means many orders below that.
        worst = worst.max(delta / (1.0 + tau));
        if delta > 1e-13 * (1.0 + tau) {
            ok = false;
        }
    }

    // alpha13 = 0 with alpha12 > alpha34: printed closed form for the fast
    // amplitude difference.
    let p = BivariateParams::new(
        0.016,
        0.012,
        ExpKernel::new(0.05, 0.11).unwrap(),
        ExpKernel::new(0.0, 0.11).unwrap(),
        ExpKernel::new(0.03, 0.11).unwrap(),
        ExpKernel::new(0.023, 0.11).unwrap(),
    )
    .unwrap();
    let coeffs = covariance_coefficients(&p).unwrap();
    let a = coeffs.a_matrix().unwrap();
    let d1 = a[0][1] - a[1][0];
    let d1_ref = validation::leadlag_d1_closed_form(&p).unwrap();
    let rel = (d1 - d1_ref).abs() / d1_ref.abs();
    if rel > 1e-10 {
        ok = false;
    }
    let at_30 = leadlag_delta(&coeffs, 30.0).unwrap();
    report(
        6,
        "lead-lag null and sign",
        ok,
        &format!(
            "symmetric worst |Delta|/(1+tau) {worst:.2e}; D1 {d1:.6e} vs closed form (rel {rel:.2e}); asymmetric Delta(30) {at_30:.3e}"
        ),
    );
    assert!(ok);
}

/// Criterion 7: the volatility-ratio function has its interior minimum at
/// x = 1/3 with value 27/32.
#[test]
fn acceptance_7_volatility_ratio_minimum() {
    let f = |x: f64| analytics::volatility_ratio(x).unwrap();
    let (mut lo, mut hi) = (0.0f64, 0.999f64);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-10 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let xmin = 0.5 * (lo + hi);
    let vmin = f(xmin);
    let ok = (xmin - 1.0 / 3.0).abs() <= 1e-6 && (vmin - 27.0 / 32.0).abs() <= 1e-9;
    report(
        7,
        "volatility-ratio minimum",
        ok,
        &format!("argmin {xmin:.8} (vs 1/3), min {vmin:.8} (vs 27/32 = 0.84375)"),
    );
    assert!(ok);
}

/// Criterion 8: the covariance per unit time at tau = 1e6 s matches the
/// diffusive matrix entry-wise within 1e-6 relative on random stable
/// inputs. The finite-scale residual is the algebraic tail
/// `(2A/G1^2 + 2B/G2^2) / tau`, of relative size ~1/(G2 tau), so the
/// draws are conditioned on a slow-pole rate G2 >= 3/s to put tau = 1e6
/// deep inside the limit at the stated tolerance.
#[test]
fn acceptance_8_diffusive_limit() {
    let mut rng = ChaCha12Rng::seed_from_u64(88);
    let tau = 1e6;
    let mut worst = 0.0f64;
    let mut draws = 0;
    while draws < 50 {
        let p = random_stable(&mut rng, (2.0, 6.0));
        let coeffs = covariance_coefficients(&p).unwrap();
        if coeffs.g2 < 3.0 {
            continue;
        }
        draws += 1;
        let at_scale = covariance_at_scale(&coeffs, tau).unwrap();
        let limit = diffusive_covariance(&coeffs);
        let scale = limit[0][0].max(limit[1][1]);
        for k in 0..2 {
            for l in 0..2 {
                let rel = (at_scale[k][l] - limit[k][l]).abs()
                    / limit[k][l].abs().max(1e-3 * scale);
                worst = worst.max(rel);
            }
        }
    }
    let ok = worst <= 1e-6;
    report(
        8,
        "diffusive limit",
        ok,
        &format!("worst entry-wise rel {worst:.2e} at tau = 1e6 over 50 draws"),
    );
    assert!(ok);
}
