//! End-to-end checks of the command-line driver: reproducibility,
//! manifest hashing, the simulate -> signature -> fit round trip, tick
//! ingestion, and machine-readable failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hawkes-micro"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hawkes-cli-{}-{name}", std::process::id()));
    fs::remove_dir_all(&dir).ok();
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(&dir.join("manifest.json"))).unwrap()
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let a = tmp("rerun-a");
    let b = tmp("rerun-b");
    for dir in [&a, &b] {
        let status = bin()
            .args(["--seed", "12", "--out"])
            .arg(dir)
            .args(["simulate", "--model", "uni", "--horizon", "5000", "--days", "3"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["day_000.csv", "day_001.csv", "day_002.csv", "days.json"] {
        assert_eq!(read(&a.join(name)), read(&b.join(name)), "{name} differs between reruns");
    }
    // Manifests agree up to the output path they record.
    assert_eq!(manifest(&a)["config_hash"], manifest(&b)["config_hash"]);
    // Different job counts must not change the outputs either.
    let c = tmp("rerun-c");
    let status = bin()
        .args(["--seed", "12", "--jobs", "1", "--out"])
        .arg(&c)
        .args(["simulate", "--model", "uni", "--horizon", "5000", "--days", "3"])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read(&a.join("day_002.csv")), read(&c.join("day_002.csv")));
}

#[test]
fn manifest_hash_tracks_semantics_only() {
    let a = tmp("hash-a");
    let b = tmp("hash-b");
    let c = tmp("hash-c");
    for (dir, jobs, mu) in [(&a, "1", "0.016"), (&b, "3", "0.016"), (&c, "1", "0.017")] {
        let status = bin()
            .args(["--seed", "5", "--jobs", jobs, "--out"])
            .arg(dir)
            .args(["simulate", "--horizon", "1000", "--days", "1", "--mu", mu])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let (ha, hb, hc) = (
        manifest(&a)["config_hash"].clone(),
        manifest(&b)["config_hash"].clone(),
        manifest(&c)["config_hash"].clone(),
    );
    assert_eq!(ha, hb, "jobs and out dir are not semantic");
    assert_ne!(ha, hc, "mu is semantic");
}

#[test]
fn analytic_univariate_limits_match_closed_form() {
    let dir = tmp("analytic");
    let status =
        bin().args(["--out"]).arg(&dir).args(["analytic", "--model", "uni"]).status().unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&read(&dir.join("summary.json"))).unwrap();
    let v0 = summary["v0"].as_f64().unwrap();
    let v_inf = summary["v_inf"].as_f64().unwrap();
    assert!((v0 - 0.040459770114942534).abs() < 1e-12);
    assert!((v_inf - 0.02767613875237745).abs() < 1e-12);
    // The curve files exist in both encodings.
    assert!(dir.join("signature.csv").exists());
    assert!(dir.join("signature.json").exists());
    assert!(dir.join("volatility_ratio.csv").exists());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tmp("config");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "model = uni\nmu = 0.02\nhorizon = 2000\ndays = 1\n").unwrap();
    let status = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--seed", "9", "--out"])
        .arg(&dir)
        .args(["simulate", "--mu", "0.03"])
        .status()
        .unwrap();
    assert!(status.success());
    let m = manifest(&dir);
    assert_eq!(m["options"]["mu"], "0.03", "flag overrides config");
    assert_eq!(m["options"]["horizon"], "2000", "config fills the rest");
}

#[test]
fn roundtrip_simulate_signature_fit_recovers_defaults() {
    // simulate -> signature (aggregated realized curve) -> fit-reg; the
    // fitted parameters land near the generating ones. One fixed seed and
    // 40 sessions of 2 h keep this a plumbing test rather than a
    // statistical one; the statistical bounds live in the acceptance
    // suite.
    let sim = tmp("roundtrip-sim");
    let status = bin()
        .args(["--seed", "31", "--out"])
        .arg(&sim)
        .args(["simulate", "--model", "uni", "--horizon", "7200", "--days", "40"])
        .status()
        .unwrap();
    assert!(status.success());
    let logs: Vec<String> = (0..40).map(|i| sim.join(format!("day_{i:03}.csv")).display().to_string()).collect();

    let sig = tmp("roundtrip-sig");
    let status = bin()
        .args(["--out"])
        .arg(&sig)
        .args(["--tau-grid", "1:1000:40", "signature", "--horizon", "7200", "--logs"])
        .args(&logs)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(sig.join("signature.csv").exists());

    let fit_dir = tmp("roundtrip-fit");
    let status = bin()
        .args(["--seed", "1", "--out"])
        .arg(&fit_dir)
        .args(["--tau-grid", "1:1000:40", "fit-reg", "--model", "uni", "--horizon", "7200", "--logs"])
        .args(&logs)
        .status()
        .unwrap();
    assert!(status.success());
    let fit: serde_json::Value = serde_json::from_str(&read(&fit_dir.join("fit.json"))).unwrap();
    let mu = fit["params"]["mu"].as_f64().unwrap();
    let alpha = fit["params"]["kernel"]["alpha"].as_f64().unwrap();
    let beta = fit["params"]["kernel"]["beta"].as_f64().unwrap();
    assert!((mu - 0.016).abs() / 0.016 < 0.10, "mu {mu}");
    assert!((alpha - 0.023).abs() / 0.023 < 0.25, "alpha {alpha}");
    assert!((beta - 0.11).abs() / 0.11 < 0.25, "beta {beta}");

    // The MLE route on the same logs is tighter on all coordinates.
    let mle_dir = tmp("roundtrip-mle");
    let status = bin()
        .args(["--seed", "1", "--out"])
        .arg(&mle_dir)
        .args(["fit-mle", "--horizon", "7200", "--logs"])
        .args(&logs)
        .status()
        .unwrap();
    assert!(status.success());
    let fit: serde_json::Value = serde_json::from_str(&read(&mle_dir.join("fit.json"))).unwrap();
    let mu = fit["params"]["mu"].as_f64().unwrap();
    let alpha = fit["params"]["kernel"]["alpha"].as_f64().unwrap();
    let beta = fit["params"]["kernel"]["beta"].as_f64().unwrap();
    assert!((mu - 0.016).abs() / 0.016 < 0.10, "mu {mu}");
    assert!((alpha - 0.023).abs() / 0.023 < 0.10, "alpha {alpha}");
    assert!((beta - 0.11).abs() / 0.11 < 0.10, "beta {beta}");
}

#[test]
fn ingest_writes_per_day_logs_and_warnings() {
    let dir = tmp("ingest");
    let ticks = dir.join("ticks.csv");
    fs::write(
        &ticks,
        "timestamp,price,volume,side\n\
         2009-11-03T09:00:01+01:00,122.50,10,B\n\
         2009-11-03T09:05:00+01:00,122.53,5,B\n\
         2009-11-03T09:06:00+01:00,122.52,5,B\n\
         2009-11-04T09:30:00+01:00,130.00,1,B\n",
    )
    .unwrap();
    let status = bin()
        .args(["--out"])
        .arg(&dir)
        .args(["ingest", "--tick-size", "0.01"])
        .args(["--ticks"])
        .arg(&ticks)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.join("day_2009-11-03.csv").exists());
    // The single-trade day produces no price changes and is skipped.
    assert!(!dir.join("day_2009-11-04.csv").exists());
    let m = manifest(&dir);
    let warnings = m["warnings"].as_array().unwrap();
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].as_str().unwrap().contains("2009-11-04"));
    // Three up ticks then one down tick.
    let day = read(&dir.join("day_2009-11-03.csv"));
    assert_eq!(day.lines().count(), 5);
    assert!(day.starts_with("time,stream\n"));
}

#[test]
fn epps_command_emits_correlation_or_covariance() {
    let sim = tmp("epps-sim");
    let status = bin()
        .args(["--seed", "8", "--out"])
        .arg(&sim)
        .args(["simulate", "--model", "bi", "--horizon", "20000", "--days", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let logs = [
        sim.join("day_000.csv").display().to_string(),
        sim.join("day_001.csv").display().to_string(),
    ];
    let rho_dir = tmp("epps-rho");
    let status = bin()
        .args(["--out"])
        .arg(&rho_dir)
        .args(["--tau-grid", "10:600:5", "epps", "--horizon", "20000", "--logs"])
        .args(&logs)
        .status()
        .unwrap();
    assert!(status.success());
    let curve = read(&rho_dir.join("epps.csv"));
    assert!(curve.starts_with("tau,value,stderr\n"));
    // Correlations grow with the scale for this strongly coupled model.
    let rows: Vec<f64> = curve
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .collect();
    assert!(rows.last().unwrap() > rows.first().unwrap());

    let cov_dir = tmp("epps-cov");
    let status = bin()
        .args(["--out"])
        .arg(&cov_dir)
        .args(["--tau-grid", "10:600:5", "epps", "--raw-covariance", "--horizon", "20000", "--logs"])
        .args(&logs)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(cov_dir.join("c12.csv").exists());
}

#[test]
fn histogram_x_concentrates_near_the_generating_norm() {
    let sim = tmp("hist-sim");
    let status = bin()
        .args(["--seed", "3", "--out"])
        .arg(&sim)
        .args(["simulate", "--model", "uni", "--horizon", "42000", "--days", "8"])
        .status()
        .unwrap();
    assert!(status.success());
    let logs: Vec<String> =
        (0..8).map(|i| sim.join(format!("day_{i:03}.csv")).display().to_string()).collect();
    let dir = tmp("hist-out");
    let status = bin()
        .args(["--out"])
        .arg(&dir)
        .args(["--tau-grid", "2:900:25", "histogram-x", "--bins", "10", "--horizon", "42000", "--logs"])
        .args(&logs)
        .status()
        .unwrap();
    assert!(status.success());
    let fits = read(&dir.join("fits.csv"));
    let mut xs: Vec<f64> = fits
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .collect();
    assert_eq!(xs.len(), 8);
    xs.sort_by(f64::total_cmp);
    let median = 0.5 * (xs[3] + xs[4]);
    // Generating norm is 0.209; day fits scatter but the middle lands near it.
    assert!((0.05..0.5).contains(&median), "median fitted norm {median}");
    let hist = read(&dir.join("histogram.csv"));
    let total: usize = hist
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 8);
}

#[test]
fn errors_are_machine_readable_and_nonzero() {
    let dir = tmp("errors");
    let output = bin()
        .args(["--out"])
        .arg(&dir)
        .args(["simulate", "--model", "uni", "--alpha", "0.2", "--beta", "0.1"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    let parsed: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert!(parsed["error"].as_str().unwrap().contains("spectral radius"));
}
