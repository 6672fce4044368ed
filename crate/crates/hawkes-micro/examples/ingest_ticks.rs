//! Trade-tape ingestion: from a raw tick CSV to per-day event logs and
//! per-day fitted kernel norms.
//!
//! Builds a synthetic multi-day tape by simulating the price model and
//! dressing it as trades (timestamps, prices on a tick grid, sides), then
//! runs the full pipeline: parse, sessionize, reconstruct, and fit each
//! day's signature plot, ending with the histogram of fitted norms.
//!
//! Run with: cargo run --release --example ingest_ticks

use chrono::NaiveDate;
use hawkes_micro::curve::log_grid;
use hawkes_micro::empirics::realized_signature_plot;
use hawkes_micro::estimation::{fit_regression, FitOptions, RegressionData, RegressionWeights};
use hawkes_micro::ingest::{
    parse_ticks, to_event_logs, write_ticks, IngestOptions, SessionSpec, Side, TickRecord,
};
use hawkes_micro::model::{Asset, ModelParams, PricePath, UnivariateParams};
use hawkes_micro::simulate::{simulate, replication_seed, SimulationOptions};

fn main() {
    let truth = UnivariateParams::default();
    let params = ModelParams::Univariate(truth);
    let tick = 0.01;
    let session = SessionSpec::morning(tick);
    let days = 10;

    // Dress simulated unit-jump paths as a trade tape: one buy trade per
    // price change, at 09:00 + event time, plus sell noise that the buy
    // filter must ignore.
    let mut records: Vec<TickRecord> = Vec::new();
    for day in 0..days {
        let date = NaiveDate::from_ymd_opt(2009, 11, 2).unwrap() + chrono::Days::new(day);
        let log = simulate(&params, session.length(), replication_seed(31, day as u64), &SimulationOptions::default())
            .unwrap();
        let mut price = 122.50f64;
        let base = date.and_hms_opt(9, 0, 0).unwrap().and_utc().fixed_offset();
        records.push(TickRecord { timestamp: base, price, volume: 1, side: Side::Buy });
        for e in log.events() {
            price += tick * if e.stream == 1 { 1.0 } else { -1.0 };
            price = (price / tick).round() * tick;
            let ts = base + chrono::Duration::nanoseconds((e.time * 1e9) as i64);
            records.push(TickRecord { timestamp: ts, price, volume: 1 + e.stream as u64, side: Side::Buy });
            // A sell print at a bounced price, to be filtered out.
            if e.time as u64 % 7 == 0 {
                records.push(TickRecord {
                    timestamp: ts,
                    price: price - tick,
                    volume: 1,
                    side: Side::Sell,
                });
            }
        }
    }
    let mut tape = Vec::new();
    write_ticks(&records, &mut tape).unwrap();
    println!("synthetic tape: {} trades, {} bytes of CSV", records.len(), tape.len());

    // Full pipeline from the serialized tape.
    let parsed = parse_ticks(&tape[..]).unwrap();
    assert_eq!(parsed.len(), records.len());
    let out = to_event_logs(&parsed, &session, &IngestOptions::default()).unwrap();
    println!("ingested {} trading days ({} warnings)\n", out.days.len(), out.warnings.len());

    let taus = log_grid(1.0, 1000.0, 40);
    println!(
        "{:>12} {:>7} {:>7} {:>9} {:>9} {:>8}",
        "date", "up", "down", "net move", "x fitted", "recon"
    );
    let mut norms = Vec::new();
    for day in &out.days {
        let path = PricePath::from_log(&day.log, Asset::First);
        // Reconstruction: cumulative unit jumps recover the net move.
        let recon = path.final_value() == day.net_ticks;
        let curve = realized_signature_plot(&path, &taus).unwrap();
        let fit = fit_regression(
            &RegressionData::Univariate { curve: &curve },
            &RegressionWeights::default(),
            None,
            &FitOptions::default(),
        )
        .unwrap();
        let x = fit.params.spectral_radius();
        norms.push(x);
        println!(
            "{:>12} {:>7} {:>7} {:>9} {:>9.4} {:>8}",
            day.date,
            day.up_events,
            day.down_events,
            format!("{:+}", day.net_ticks),
            x,
            if recon { "ok" } else { "MISMATCH" }
        );
    }

    // Histogram of fitted norms, the per-day mean-reversion strengths.
    let bins = 10;
    let mut counts = vec![0usize; bins];
    for &x in &norms {
        counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
    }
    println!("\nhistogram of fitted kernel norms (truth {:.3}):", truth.spectral_radius());
    for (b, count) in counts.iter().enumerate() {
        println!(
            "  [{:.2}, {:.2}) {}",
            b as f64 / bins as f64,
            (b + 1) as f64 / bins as f64,
            "#".repeat(*count)
        );
    }
}
