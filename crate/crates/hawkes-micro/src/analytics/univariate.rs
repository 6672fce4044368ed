//! Closed-form mean signature plot of the univariate model and the
//! exponential autocovariance density behind it.
//!
//! With branching ratio `n = alpha / beta`, the mean signature plot is
//!
//! ```text
//! C(tau) = Lambda * (kappa^2 + (1 - kappa^2) * (1 - e^{-gamma tau}) / (gamma tau))
//! Lambda = 2 mu / (1 - n),  kappa = 1 / (1 + n),  gamma = alpha + beta
//! ```
//!
//! decreasing from the microstructural variance `Lambda` at `tau -> 0` to
//! the diffusive variance `Lambda kappa^2` at large scales.

use super::{one_minus_exp_over, AnalyticsError};
use crate::curve::{Curve, CurveError};
use crate::model::UnivariateParams;
use serde::{Deserialize, Serialize};

/// The three constants that shape the univariate mean signature plot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignaturePlotParams {
    /// Small-scale variance per unit time `2 mu / (1 - n)` (1/s).
    pub lambda: f64,
    /// Diffusive attenuation `1 / (1 + n)`, in (0, 1].
    pub kappa: f64,
    /// Crossover rate `alpha + beta` (1/s).
    pub gamma: f64,
}

impl SignaturePlotParams {
    pub fn from_params(p: &UnivariateParams) -> Result<Self, AnalyticsError> {
        let n = p.spectral_radius();
        if n >= 1.0 {
            return Err(AnalyticsError::Unstable { radius: n });
        }
        Ok(Self {
            lambda: 2.0 * p.mu / (1.0 - n),
            kappa: 1.0 / (1.0 + n),
            gamma: p.kernel.alpha + p.kernel.beta,
        })
    }

    /// Variance per unit time at scale `tau`; `tau = 0` returns the limit
    /// `lambda`.
    pub fn eval(&self, tau: f64) -> f64 {
        let k2 = self.kappa * self.kappa;
        self.lambda * (k2 + (1.0 - k2) * one_minus_exp_over(self.gamma * tau))
    }

    /// Microstructural variance, the `tau -> 0` limit.
    pub fn v0(&self) -> f64 {
        self.lambda
    }

    /// Diffusive variance, the `tau -> inf` limit.
    pub fn v_inf(&self) -> f64 {
        self.lambda * self.kappa * self.kappa
    }
}

/// Mean signature plot `C(tau)` of a stable univariate model.
pub fn signature_plot(p: &UnivariateParams, tau: f64) -> Result<f64, AnalyticsError> {
    if !(tau >= 0.0) {
        return Err(AnalyticsError::InvalidScale(tau));
    }
    Ok(SignaturePlotParams::from_params(p)?.eval(tau))
}

/// The signature plot sampled on a grid of scales.
pub fn signature_curve(p: &UnivariateParams, taus: &[f64]) -> Result<Curve, AnalyticsError> {
    let shape = SignaturePlotParams::from_params(p)?;
    let values: Vec<f64> = taus.iter().map(|&t| shape.eval(t)).collect();
    Curve::from_values(taus, &values).map_err(CurveError::into)
}

/// Exponential solution `M(x) = amplitude * e^{-rate |x|}` of the
/// stationary autocovariance-density equation for the difference of the up
/// and down stream densities. Integrated twice over `[0, tau]^2` it
/// reproduces the signature plot, which makes it an independent oracle for
/// [`signature_plot`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceDensity {
    /// Amplitude at zero lag (1/s^2); negative for mean-reverting kernels.
    pub amplitude: f64,
    /// Decay rate `alpha + beta` (1/s).
    pub rate: f64,
    /// Stationary per-stream event rate `mu beta / (beta - alpha)` (1/s).
    pub mean_rate: f64,
}

impl CovarianceDensity {
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * (-self.rate * x.abs()).exp()
    }
}

/// Autocovariance density of a stable univariate model.
pub fn covariance_density(p: &UnivariateParams) -> Result<CovarianceDensity, AnalyticsError> {
    let radius = p.spectral_radius();
    if radius >= 1.0 {
        return Err(AnalyticsError::Unstable { radius });
    }
    let (alpha, beta) = (p.kernel.alpha, p.kernel.beta);
    let mean_rate = p.mean_rate();
    let rate = alpha + beta;
    let amplitude = -mean_rate * alpha * (alpha + 2.0 * beta) / (2.0 * (alpha + beta));
    Ok(CovarianceDensity { amplitude, rate, mean_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::validation::quadrature_signature_plot;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn defaults() -> UnivariateParams {
        UnivariateParams::default()
    }

    #[test]
    fn limits_at_defaults() {
        let shape = SignaturePlotParams::from_params(&defaults()).unwrap();
        assert_relative_eq!(shape.v0(), 0.040459770114942528, max_relative = 1e-12);
        assert_relative_eq!(shape.v_inf(), 0.02767613875237745, max_relative = 1e-12);
        assert_eq!(signature_plot(&defaults(), 0.0).unwrap(), shape.v0());
    }

    #[test]
    fn value_at_ten_seconds() {
        // Frozen from direct evaluation of the closed form.
        let c10 = signature_plot(&defaults(), 10.0).unwrap();
        assert_relative_eq!(c10, 0.034745801572172434, max_relative = 1e-12);
    }

    #[test]
    fn rejects_negative_tau() {
        assert!(signature_plot(&defaults(), -1.0).is_err());
    }

    #[test]
    fn poisson_kernel_has_no_covariance_density() {
        let p = UnivariateParams::from_rates(0.016, 0.0, 0.11).unwrap();
        let d = covariance_density(&p).unwrap();
        assert_eq!(d.amplitude, 0.0);
        // And the signature plot is flat at 2 mu.
        for tau in [0.0, 1.0, 100.0] {
            assert_relative_eq!(signature_plot(&p, tau).unwrap(), 0.032, max_relative = 1e-14);
        }
    }

    #[test]
    fn covariance_density_at_defaults() {
        let d = covariance_density(&defaults()).unwrap();
        assert_relative_eq!(d.rate, 0.133, max_relative = 1e-14);
        assert_relative_eq!(d.mean_rate, 0.020229885057471263, max_relative = 1e-12);
        // -mean_rate * alpha * (alpha + 2 beta) / (2 (alpha + beta))
        assert_relative_eq!(d.amplitude, -4.2505574280528904e-4, max_relative = 1e-12);
    }

    #[test]
    fn quadrature_oracle_reproduces_closed_form() {
        // Double integral of the covariance density against the closed form.
        let p = defaults();
        for tau in [0.5, 2.0, 10.0, 50.0, 300.0] {
            let direct = signature_plot(&p, tau).unwrap();
            let quad = quadrature_signature_plot(&p, tau).unwrap();
            assert_relative_eq!(direct, quad, max_relative = 1e-8);
        }
    }

    proptest! {
        /// The signature plot decreases from Lambda to Lambda kappa^2.
        #[test]
        fn signature_plot_is_decreasing(
            mu in 1e-3f64..0.2,
            n in 1e-3f64..0.95,
            beta in 0.01f64..2.0,
        ) {
            let p = UnivariateParams::from_rates(mu, n * beta, beta).unwrap();
            let shape = SignaturePlotParams::from_params(&p).unwrap();
            let taus = crate::curve::log_grid(1e-3, 1e5, 40);
            let mut prev = shape.v0();
            for &tau in &taus {
                let c = shape.eval(tau);
                prop_assert!(c <= prev * (1.0 + 1e-12), "rising at tau = {tau}");
                prop_assert!(c >= shape.v_inf() * (1.0 - 1e-12));
                prev = c;
            }
        }

        /// Quadrature of the covariance density matches the closed form on
        /// random stable parameters.
        #[test]
        fn quadrature_matches_random_params(
            mu in 1e-3f64..0.2,
            n in 1e-2f64..0.9,
            beta in 0.02f64..1.0,
            tau in 0.5f64..200.0,
        ) {
            let p = UnivariateParams::from_rates(mu, n * beta, beta).unwrap();
            let direct = signature_plot(&p, tau).unwrap();
            let quad = quadrature_signature_plot(&p, tau).unwrap();
            prop_assert!((direct - quad).abs() <= 1e-8 * direct.abs());
        }
    }
}
