//! Closed-form second-order analytics of the mutually exciting price
//! models: mean signature plot, covariance across scales, Epps curve,
//! lead-lag asymmetry, and the diffusive (large-scale) covariance.

pub mod bivariate;
pub mod univariate;
pub mod validation;

pub use bivariate::{
    covariance_at_scale, covariance_coefficients, diffusive_covariance, epps_asymptote,
    epps_curve, epps_slope, leadlag_curve, leadlag_delta, symmetric_covariance,
    CovarianceCoefficients, SecondOrderKernel,
};
pub use univariate::{
    covariance_density, signature_curve, signature_plot, CovarianceDensity, SignaturePlotParams,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("unstable parameters: spectral radius {radius} >= 1")]
    Unstable { radius: f64 },
    #[error("closed forms need one shared decay rate; found beta = {found} against {expected}")]
    MismatchedBeta { expected: f64, found: f64 },
    #[error("operation needs fully symmetric parameters: {0}")]
    NotSymmetric(String),
    #[error("invalid scale tau = {0}")]
    InvalidScale(f64),
    #[error("volatility ratio needs 0 <= x < 1, got {0}")]
    VolatilityRatioDomain(f64),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Curve(#[from] crate::curve::CurveError),
}

/// `(1 - exp(-x)) / x` for `x >= 0`, with a short Taylor expansion below
/// `x = 1e-6` where the direct form loses precision to cancellation.
pub(crate) fn one_minus_exp_over(x: f64) -> f64 {
    if x < 1e-6 {
        1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0
    } else {
        (1.0 - (-x).exp()) / x
    }
}

/// Scale response `H(g, tau) = (1/tau) * int_0^tau (tau - z) e^{-g z} dz`
/// `= 1/g - (1 - e^{-g tau}) / (g^2 tau)`; rises from 0 at `tau = 0` to
/// `1/g` as `tau -> inf`. Accepts `tau = 0` (returns the limit 0).
pub(crate) fn scale_response(g: f64, tau: f64) -> f64 {
    (1.0 - one_minus_exp_over(g * tau)) / g
}

/// Ratio of the large-scale (diffusive) variance to its value at zero mean
/// reversion, as a function of the kernel norm `x`: `1 / ((1-x)(1+x)^2)`.
///
/// The unique interior minimum on `[0, 1)` sits at `x = 1/3` with value
/// `27/32`.
pub fn volatility_ratio(x: f64) -> Result<f64, AnalyticsError> {
    if !(0.0..1.0).contains(&x) {
        return Err(AnalyticsError::VolatilityRatioDomain(x));
    }
    Ok(1.0 / ((1.0 - x) * (1.0 + x) * (1.0 + x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn volatility_ratio_endpoints() {
        assert_eq!(volatility_ratio(0.0).unwrap(), 1.0);
        assert_relative_eq!(volatility_ratio(1.0 / 3.0).unwrap(), 27.0 / 32.0, epsilon = 1e-15);
        assert_relative_eq!(volatility_ratio(0.9).unwrap(), 1.0 / (0.1 * 3.61), max_relative = 1e-12);
        assert!(volatility_ratio(1.0).is_err());
        assert!(volatility_ratio(-0.1).is_err());
    }

    #[test]
    fn volatility_ratio_minimum_at_one_third() {
        // Golden-section search over [0, 0.999].
        let f = |x: f64| volatility_ratio(x).unwrap();
        let (mut lo, mut hi) = (0.0f64, 0.999f64);
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        while hi - lo > 1e-12 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if f(a) < f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let xmin = 0.5 * (lo + hi);
        assert!((xmin - 1.0 / 3.0).abs() < 1e-6, "argmin {xmin}");
        assert_relative_eq!(f(xmin), 27.0 / 32.0, max_relative = 1e-10);
    }

    #[test]
    fn taylor_branch_is_continuous() {
        // The series branch tracks exp_m1 tightly below the switch; just
        // above it the direct form is only cancellation-limited.
        for &x in &[1e-9, 1e-7, 9.9e-7] {
            let exact = -f64::exp_m1(-x) / x;
            assert_relative_eq!(one_minus_exp_over(x), exact, max_relative = 1e-14);
        }
        for &x in &[1.01e-6, 1e-5, 1e-3] {
            let exact = -f64::exp_m1(-x) / x;
            assert_relative_eq!(one_minus_exp_over(x), exact, max_relative = 1e-9);
        }
        assert_eq!(one_minus_exp_over(0.0), 1.0);
    }
}
