//! Model-free realized estimators computed from price paths, simulated or
//! ingested: signature plot, cross-covariance at scale and lag, Epps curve,
//! lead-lag estimate, and the multi-day aggregation that treats sessions as
//! independent draws of one process.
//!
//! Estimators normalize by the number of complete windows times the scale,
//! `1 / (N_tau tau)`, which is unbiased whether or not `tau` divides the
//! horizon. Grid points between jumps sample the previous tick.

use crate::curve::{Curve, CurveError};
use crate::model::{ModelError, PricePath};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmpiricsError {
    #[error("invalid scale tau = {0}; must be positive")]
    InvalidScale(f64),
    #[error("horizons differ: {left} vs {right}")]
    MisalignedHorizons { left: f64, right: f64 },
    #[error("not enough complete windows at tau = {tau} (horizon {horizon})")]
    NoWindows { tau: f64, horizon: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Realized variance per unit time at one scale:
/// `(1 / (N tau)) * sum |X((n+1) tau) - X(n tau)|^2` over complete windows.
pub fn realized_variance(path: &PricePath, tau: f64) -> Result<f64, EmpiricsError> {
    if !(tau > 0.0) {
        return Err(EmpiricsError::InvalidScale(tau));
    }
    let inc = path.increments(tau, 0.0).map_err(|_| EmpiricsError::NoWindows {
        tau,
        horizon: path.horizon(),
    })?;
    if inc.is_empty() {
        return Err(EmpiricsError::NoWindows { tau, horizon: path.horizon() });
    }
    let sum: i64 = inc.iter().map(|&d| d * d).sum();
    Ok(sum as f64 / (inc.len() as f64 * tau))
}

/// Realized signature plot over a grid of scales.
pub fn realized_signature_plot(path: &PricePath, taus: &[f64]) -> Result<Curve, EmpiricsError> {
    let values = taus
        .iter()
        .map(|&tau| realized_variance(path, tau))
        .collect::<Result<Vec<f64>, EmpiricsError>>()?;
    Curve::from_values(taus, &values).map_err(EmpiricsError::from)
}

/// Realized cross-covariance per unit time at scale `tau` and lag `t`:
/// `(1 / (N tau)) * sum Delta_tau X1(n tau) * Delta_tau X2(n tau + t)`.
pub fn realized_cross_covariance(
    path1: &PricePath,
    path2: &PricePath,
    tau: f64,
    lag: f64,
) -> Result<f64, EmpiricsError> {
    if !(tau > 0.0) {
        return Err(EmpiricsError::InvalidScale(tau));
    }
    if path1.horizon() != path2.horizon() {
        return Err(EmpiricsError::MisalignedHorizons {
            left: path1.horizon(),
            right: path2.horizon(),
        });
    }
    let a = path1
        .increments(tau, 0.0)
        .map_err(|_| EmpiricsError::NoWindows { tau, horizon: path1.horizon() })?;
    let b = path2
        .increments(tau, lag)
        .map_err(|_| EmpiricsError::NoWindows { tau, horizon: path2.horizon() })?;
    let n = a.len().min(b.len());
    if n == 0 {
        return Err(EmpiricsError::NoWindows { tau, horizon: path1.horizon() });
    }
    let sum: i64 = a[..n].iter().zip(&b[..n]).map(|(&x, &y)| x * y).sum();
    Ok(sum as f64 / (n as f64 * tau))
}

/// Realized correlation `C12 / sqrt(C11 C22)` at one scale, lag zero.
pub fn realized_correlation(
    path1: &PricePath,
    path2: &PricePath,
    tau: f64,
) -> Result<f64, EmpiricsError> {
    let c12 = realized_cross_covariance(path1, path2, tau, 0.0)?;
    let c11 = realized_variance(path1, tau)?;
    let c22 = realized_variance(path2, tau)?;
    let denom = (c11 * c22).sqrt();
    Ok(if denom == 0.0 { 0.0 } else { c12 / denom })
}

/// Realized Epps curve over a grid of scales.
pub fn realized_epps(
    path1: &PricePath,
    path2: &PricePath,
    taus: &[f64],
) -> Result<Curve, EmpiricsError> {
    let values = taus
        .iter()
        .map(|&tau| realized_correlation(path1, path2, tau))
        .collect::<Result<Vec<f64>, EmpiricsError>>()?;
    Curve::from_values(taus, &values).map_err(EmpiricsError::from)
}

/// Realized lead-lag asymmetry
/// `Delta(tau) = C12(tau, lag=tau) - C21(tau, lag=tau)` in covariance units
/// (the per-unit-time estimates are rescaled by `tau`).
pub fn realized_leadlag(
    path1: &PricePath,
    path2: &PricePath,
    tau: f64,
) -> Result<f64, EmpiricsError> {
    let c12 = realized_cross_covariance(path1, path2, tau, tau)?;
    let c21 = realized_cross_covariance(path2, path1, tau, tau)?;
    Ok((c12 - c21) * tau)
}

/// Pointwise mean and standard error of per-day curves sharing one grid.
pub fn aggregate_days(curves: &[Curve]) -> Result<Curve, EmpiricsError> {
    Curve::aggregate(curves).map_err(EmpiricsError::from)
}

/// Pooled scalar summary: mean and standard error of per-day values.
pub fn pooled_mean(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Asset, Event, EventLog};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn path_from(events: Vec<Event>, horizon: f64) -> PricePath {
        PricePath::from_log(&EventLog::new(events, horizon, 2).unwrap(), Asset::First)
    }

    #[test]
    fn constant_path_has_zero_variance() {
        let path = path_from(vec![], 100.0);
        for tau in [1.0, 7.0, 50.0] {
            assert_eq!(realized_variance(&path, tau).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_jump_gives_one_over_t() {
        // One unit jump, tau dividing T: exactly one nonzero increment.
        let path = path_from(vec![Event { time: 30.0, stream: 1 }], 100.0);
        let tau = 10.0;
        assert_relative_eq!(realized_variance(&path, tau).unwrap(), 1.0 / 100.0);
        // tau not dividing T: normalization is per complete window.
        let tau = 30.0;
        assert_relative_eq!(realized_variance(&path, tau).unwrap(), 1.0 / (3.0 * 30.0));
    }

    #[test]
    fn rejects_bad_scales() {
        let path = path_from(vec![], 100.0);
        assert!(realized_variance(&path, 0.0).is_err());
        assert!(realized_variance(&path, -2.0).is_err());
        assert!(realized_variance(&path, 101.0).is_err());
    }

    #[test]
    fn identical_paths_have_unit_correlation() {
        let events = vec![
            Event { time: 3.0, stream: 1 },
            Event { time: 12.0, stream: 2 },
            Event { time: 45.5, stream: 1 },
            Event { time: 80.0, stream: 1 },
        ];
        let path = path_from(events, 100.0);
        let c12 = realized_cross_covariance(&path, &path, 10.0, 0.0).unwrap();
        let c11 = realized_variance(&path, 10.0).unwrap();
        assert_relative_eq!(c12, c11);
        assert_relative_eq!(realized_correlation(&path, &path, 10.0).unwrap(), 1.0);
    }

    #[test]
    fn misaligned_horizons_are_rejected() {
        let a = path_from(vec![], 100.0);
        let b = path_from(vec![], 101.0);
        assert!(matches!(
            realized_cross_covariance(&a, &b, 10.0, 0.0),
            Err(EmpiricsError::MisalignedHorizons { .. })
        ));
    }

    #[test]
    fn lagged_windows_shrink_the_sample() {
        let path = path_from(vec![Event { time: 95.0, stream: 1 }], 100.0);
        // At lag 60 only floor((100 - 60) / 10) = 4 windows fit.
        let c = realized_cross_covariance(&path, &path, 10.0, 60.0).unwrap();
        assert_eq!(c, 0.0);
        assert!(realized_cross_covariance(&path, &path, 60.0, 60.0).is_err());
    }

    #[test]
    fn aggregate_days_single_day() {
        let c = Curve::from_values(&[1.0, 2.0], &[0.5, 0.25]).unwrap();
        let agg = aggregate_days(std::slice::from_ref(&c)).unwrap();
        assert_eq!(agg.values(), c.values());
        assert!(agg.points().iter().all(|p| p.stderr == Some(0.0)));
    }

    #[test]
    fn pooled_mean_and_stderr() {
        let (m, se) = pooled_mean(&[1.0, 2.0, 3.0]);
        assert_relative_eq!(m, 2.0);
        assert_relative_eq!(se, (1.0f64 / 3.0).sqrt());
        assert_eq!(pooled_mean(&[5.0]), (5.0, 0.0));
    }

    proptest! {
        /// Realized variance is nonnegative and the correlation obeys
        /// |rho| <= 1 (Cauchy-Schwarz).
        #[test]
        fn cauchy_schwarz(
            times1 in proptest::collection::vec(0.0f64..200.0, 1..80),
            times2 in proptest::collection::vec(0.0f64..200.0, 1..80),
            streams1 in proptest::collection::vec(1u8..=2, 80),
            streams2 in proptest::collection::vec(1u8..=2, 80),
            tau in 0.5f64..60.0,
        ) {
            let build = |mut ts: Vec<f64>, ss: &[u8]| {
                ts.sort_by(f64::total_cmp);
                let events = ts.iter().zip(ss).map(|(&time, &stream)| Event { time, stream }).collect();
                path_from(events, 200.0)
            };
            let p1 = build(times1, &streams1);
            let p2 = build(times2, &streams2);
            let c11 = realized_variance(&p1, tau).unwrap();
            let c22 = realized_variance(&p2, tau).unwrap();
            let c12 = realized_cross_covariance(&p1, &p2, tau, 0.0).unwrap();
            prop_assert!(c11 >= 0.0 && c22 >= 0.0);
            prop_assert!(c12 * c12 <= c11 * c22 * (1.0 + 1e-12));
            let rho = realized_correlation(&p1, &p2, tau).unwrap();
            prop_assert!(rho.abs() <= 1.0 + 1e-12);
        }

        /// Adding a constant to the path leaves every estimator unchanged:
        /// increments see only differences, so a level shift at the origin
        /// cancels out of variance, covariance, and correlation alike.
        #[test]
        fn translation_invariance(
            times in proptest::collection::vec(1e-6f64..200.0, 1..60),
            streams in proptest::collection::vec(1u8..=2, 60),
            shift in 1i64..50,
            tau in 0.5f64..60.0,
            lag in 0.0f64..40.0,
        ) {
            let mut ts = times;
            ts.sort_by(f64::total_cmp);
            let jumps: Vec<(f64, i64)> = ts
                .iter()
                .zip(&streams)
                .map(|(&t, &s)| (t, if s == 1 { 1 } else { -1 }))
                .collect();
            let base = PricePath::from_jumps(&jumps, 200.0);
            let mut shifted_jumps = vec![(0.0, shift)];
            shifted_jumps.extend_from_slice(&jumps);
            let shifted = PricePath::from_jumps(&shifted_jumps, 200.0);
            prop_assert_eq!(
                realized_variance(&base, tau).unwrap(),
                realized_variance(&shifted, tau).unwrap()
            );
            prop_assert_eq!(
                realized_cross_covariance(&base, &base, tau, lag).unwrap(),
                realized_cross_covariance(&shifted, &shifted, tau, lag).unwrap()
            );
            if realized_variance(&base, tau).unwrap() > 0.0 {
                prop_assert_eq!(realized_correlation(&base, &shifted, tau).unwrap(), 1.0);
            }
        }
    }
}
