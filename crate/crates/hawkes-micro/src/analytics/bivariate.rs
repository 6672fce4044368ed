//! Closed-form covariance of the bivariate model across time scales: the
//! per-asset signature plots, the cross-asset covariance and correlation
//! (Epps curve), the lead-lag asymmetry, and the diffusive limit.
//!
//! # Second-order kernel
//!
//! With one shared decay rate `beta`, the stationary covariance densities
//! of the price-direction differentials reduce to a 2x2 matrix of kernels
//!
//! ```text
//! K_kl(t) = rate delta(t) [diagonal only] + A_kl e^{-G1 t} + B_kl e^{-G2 t}
//! ```
//!
//! whose decay rates are `G1 = Y + Z`, `G2 = Y - Z` with
//! `Y = beta + (alpha12 + alpha34) / 2` and
//! `Z = sqrt((alpha12 - alpha34)^2 + 4 alpha13 alpha31) / 2`. The
//! amplitudes come out of a linear system for the four Laplace-transform
//! constants `Q1..Q4` evaluated at `beta`, followed by a partial-fraction
//! split at the two poles. When `Z = 0` the poles merge and the kernel
//! degenerates to `(C_kl + D_kl t) e^{-Y t}`; that confluent case is
//! handled exactly.
//!
//! Covariances at scale `tau` and lag `t` are double integrals of `K` over
//! the sampling windows; all the curve evaluators below are those integrals
//! in closed form.

use super::{one_minus_exp_over, scale_response, AnalyticsError};
use crate::curve::{Curve, CurveError};
use crate::model::BivariateParams;
use serde::{Deserialize, Serialize};

/// Relative tolerance under which the two decay rates are treated as one
/// (confluent double pole).
const CONFLUENT_Z_TOL: f64 = 1e-7;

/// Exponential decomposition of the second-order kernel matrix.
///
/// Entry `(k, l)` is the covariance density between asset `l`'s direction
/// differential and asset `k`'s one lag `t` later (row = later stream, the
/// orientation of the density evolution equation). Lag-zero covariance
/// windows symmetrize the blocks; the lagged lead-lag windows pick the
/// transposed off-diagonal block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SecondOrderKernel {
    /// `K_kl(t) = A_kl e^{-G1 t} + B_kl e^{-G2 t}` plus the diagonal atom.
    TwoExponentials {
        a: [[f64; 2]; 2],
        b: [[f64; 2]; 2],
    },
    /// Merged poles: `K_kl(t) = (C_kl + D_kl t) e^{-Y t}` plus the atom.
    Confluent {
        c: [[f64; 2]; 2],
        d: [[f64; 2]; 2],
    },
}

/// All constants that parameterize the closed-form covariance curves of a
/// stable bivariate model with one shared decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceCoefficients {
    /// Stationary rate of streams 1 and 2 (1/s).
    pub lambda1: f64,
    /// Stationary rate of streams 3 and 4 (1/s).
    pub lambda3: f64,
    /// Laplace-transform constants of the cross-density blocks at `beta`.
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q4: f64,
    /// Pole midpoint `beta + (alpha12 + alpha34) / 2` (1/s).
    pub y: f64,
    /// Pole half-split `sqrt((alpha12 - alpha34)^2 + 4 a13 a31) / 2` (1/s).
    pub z: f64,
    /// Fast decay rate `Y + Z`.
    pub g1: f64,
    /// Slow decay rate `Y - Z`.
    pub g2: f64,
    /// Amplitudes of the kernel matrix.
    pub kernel: SecondOrderKernel,
    // Raw parameters, kept for the symmetric-case accessors.
    mu1: f64,
    mu3: f64,
    alpha12: f64,
    alpha13: f64,
    alpha31: f64,
    alpha34: f64,
    beta: f64,
}

impl CovarianceCoefficients {
    /// Kernel amplitudes on the fast pole; `None` in the confluent case.
    pub fn a_matrix(&self) -> Option<[[f64; 2]; 2]> {
        match self.kernel {
            SecondOrderKernel::TwoExponentials { a, .. } => Some(a),
            SecondOrderKernel::Confluent { .. } => None,
        }
    }

    /// Kernel amplitudes on the slow pole; `None` in the confluent case.
    pub fn b_matrix(&self) -> Option<[[f64; 2]; 2]> {
        match self.kernel {
            SecondOrderKernel::TwoExponentials { b, .. } => Some(b),
            SecondOrderKernel::Confluent { .. } => None,
        }
    }

    /// Kernel value `K_kl(t)` for `t > 0`, excluding the diagonal atom.
    /// Indices are 0-based assets.
    pub fn kernel_at(&self, k: usize, l: usize, t: f64) -> f64 {
        match self.kernel {
            SecondOrderKernel::TwoExponentials { a, b } => {
                a[k][l] * (-self.g1 * t).exp() + b[k][l] * (-self.g2 * t).exp()
            }
            SecondOrderKernel::Confluent { c, d } => {
                (c[k][l] + d[k][l] * t) * (-self.y * t).exp()
            }
        }
    }

    fn is_symmetric(&self) -> bool {
        relative_eq(self.alpha12, self.alpha34)
            && relative_eq(self.alpha13, self.alpha31)
            && relative_eq(self.mu1, self.mu3)
    }

    fn symmetric_gammas(&self) -> Result<(f64, f64), AnalyticsError> {
        if !self.is_symmetric() {
            return Err(AnalyticsError::NotSymmetric(
                "fully symmetric parameters required".into(),
            ));
        }
        Ok((self.alpha12 / self.beta, self.alpha13 / self.beta))
    }

    /// Overall level constant `R = beta mu / (g12 + g13 - 1)` of the
    /// symmetric-case covariance; negative for stable parameters.
    pub fn symmetric_r(&self) -> Result<f64, AnalyticsError> {
        let (g12, g13) = self.symmetric_gammas()?;
        Ok(self.beta * self.mu1 / (g12 + g13 - 1.0))
    }

    /// Fast-pole shape constant of the symmetric-case covariance.
    pub fn symmetric_c1(&self) -> Result<f64, AnalyticsError> {
        let (g12, g13) = self.symmetric_gammas()?;
        let s = g12 + g13;
        Ok((2.0 + s) * s / (1.0 + s))
    }

    /// Slow-pole shape constant of the symmetric-case covariance.
    pub fn symmetric_c2(&self) -> Result<f64, AnalyticsError> {
        let (g12, g13) = self.symmetric_gammas()?;
        let d = g12 - g13;
        Ok((2.0 + d) * d / (1.0 + d))
    }
}

fn relative_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

/// Closed-form covariance constants of a stable bivariate model. All four
/// kernels must share one decay rate.
pub fn covariance_coefficients(
    p: &BivariateParams,
) -> Result<CovarianceCoefficients, AnalyticsError> {
    let beta = p.k12.beta;
    for k in [&p.k13, &p.k31, &p.k34] {
        if !relative_eq(k.beta, beta) {
            return Err(AnalyticsError::MismatchedBeta { expected: beta, found: k.beta });
        }
    }
    let radius = p.spectral_radius();
    if radius >= 1.0 {
        return Err(AnalyticsError::Unstable { radius });
    }
    let (a12, a13, a31, a34) = (p.k12.alpha, p.k13.alpha, p.k31.alpha, p.k34.alpha);
    let lambdas = p.mean_intensities()?;
    let (lambda1, lambda3) = (lambdas[0], lambdas[2]);

    // Laplace constants from the closed-form rational solution of the
    // transform system evaluated at s = beta. The common denominator
    // factors as (2 beta + a12 + a34) (a13 a31 - (beta + a12)(beta + a34)),
    // which is -2 Y G1 G2 and therefore negative for stable parameters.
    let den = (2.0 * beta + a12 + a34) * (a13 * a31 - (beta + a12) * (beta + a34));
    let q1 = -(lambda1
        * (a31 * a13 * (a34 + beta + a12) - a12 * (beta + a34) * (2.0 * beta + a12 + a34))
        + beta * lambda3 * a13 * a13)
        / den;
    let q4 = -(lambda3
        * (a31 * a13 * (a12 + beta + a34) - a34 * (beta + a12) * (2.0 * beta + a12 + a34))
        + beta * lambda1 * a31 * a31)
        / den;
    let q2 = -(lambda3 * a13 * (2.0 * beta * beta + 2.0 * beta * a12 + beta * a34 + a12 * a34 - a13 * a31)
        + lambda1 * a31 * (a13 * a31 - beta * a12 - a12 * a34))
        / den;
    let q3 = -(lambda1 * a31 * (2.0 * beta * beta + 2.0 * beta * a34 + beta * a12 + a12 * a34 - a13 * a31)
        + lambda3 * a13 * (a13 * a31 - beta * a34 - a12 * a34))
        / den;

    let y = beta + 0.5 * (a12 + a34);
    let z = 0.5 * ((a12 - a34) * (a12 - a34) + 4.0 * a13 * a31).sqrt();
    let g1 = y + z;
    let g2 = y - z;

    // Numerators of the transform blocks are linear in sigma = s + beta:
    // N_kl(sigma) = n1_kl sigma + n0_kl, with poles at sigma = sigma0 +- Z.
    let p1 = 2.0 * lambda1 + q1;
    let p3 = 2.0 * lambda3 + q4;
    let n1 = [
        [a13 * q2 - a12 * p1, a13 * p3 - a12 * q3],
        [a31 * p1 - a34 * q2, a31 * q3 - a34 * p3],
    ];
    let cross = a13 * a31 - a12 * a34;
    let n0 = [[cross * p1, cross * q3], [cross * q2, cross * p3]];
    let sigma0 = -0.5 * (a12 + a34);

    let kernel = if z <= CONFLUENT_Z_TOL * y {
        // Double pole at -Y: K_kl(t) = (C + D t) e^{-Y t}.
        let mut c = [[0.0; 2]; 2];
        let mut d = [[0.0; 2]; 2];
        for k in 0..2 {
            for l in 0..2 {
                c[k][l] = n1[k][l];
                d[k][l] = n1[k][l] * sigma0 + n0[k][l];
            }
        }
        SecondOrderKernel::Confluent { c, d }
    } else {
        // Residues at the two simple poles sigma = sigma0 -+ Z.
        let (sig_minus, sig_plus) = (sigma0 - z, sigma0 + z);
        let mut a = [[0.0; 2]; 2];
        let mut b = [[0.0; 2]; 2];
        for k in 0..2 {
            for l in 0..2 {
                a[k][l] = -(n1[k][l] * sig_minus + n0[k][l]) / (2.0 * z);
                b[k][l] = (n1[k][l] * sig_plus + n0[k][l]) / (2.0 * z);
            }
        }
        SecondOrderKernel::TwoExponentials { a, b }
    };

    Ok(CovarianceCoefficients {
        lambda1,
        lambda3,
        q1,
        q2,
        q3,
        q4,
        y,
        z,
        g1,
        g2,
        kernel,
        mu1: p.mu1,
        mu3: p.mu3,
        alpha12: a12,
        alpha13: a13,
        alpha31: a31,
        alpha34: a34,
        beta,
    })
}

/// `(1/tau) int_0^tau (tau - z) z e^{-g z} dz`, the response of the linear
/// kernel term, with a series branch for small `g tau`.
fn linear_scale_response(g: f64, tau: f64) -> f64 {
    let x = g * tau;
    if x < 1e-3 {
        tau * tau * (1.0 / 6.0 - x / 12.0 + x * x / 40.0 - x * x * x / 180.0)
    } else {
        let e = (-x).exp();
        let j1 = (1.0 - e * (1.0 + x)) / (g * g);
        let j2 = (2.0 - e * (x * x + 2.0 * x + 2.0)) / (g * g * g);
        j1 - j2 / tau
    }
}

/// Covariance per unit time at scale `tau` and lag zero, as the symmetric
/// 2x2 matrix `[C_kl(tau) / tau]`. `tau = 0` returns the limit
/// `diag(2 lambda1, 2 lambda3)`.
pub fn covariance_at_scale(
    c: &CovarianceCoefficients,
    tau: f64,
) -> Result<[[f64; 2]; 2], AnalyticsError> {
    if !(tau >= 0.0) {
        return Err(AnalyticsError::InvalidScale(tau));
    }
    let diag = [2.0 * c.lambda1, 2.0 * c.lambda3];
    if tau == 0.0 {
        return Ok([[diag[0], 0.0], [0.0, diag[1]]]);
    }
    let mut m = [[0.0; 2]; 2];
    match c.kernel {
        SecondOrderKernel::TwoExponentials { a, b } => {
            let h1 = scale_response(c.g1, tau);
            let h2 = scale_response(c.g2, tau);
            for k in 0..2 {
                for l in 0..2 {
                    m[k][l] = (a[k][l] + a[l][k]) * h1 + (b[k][l] + b[l][k]) * h2;
                }
            }
        }
        SecondOrderKernel::Confluent { c: c0, d } => {
            let e0 = scale_response(c.y, tau);
            let e1 = linear_scale_response(c.y, tau);
            for k in 0..2 {
                for l in 0..2 {
                    m[k][l] = (c0[k][l] + c0[l][k]) * e0 + (d[k][l] + d[l][k]) * e1;
                }
            }
        }
    }
    m[0][0] += diag[0];
    m[1][1] += diag[1];
    Ok(m)
}

/// Large-scale covariance matrix per unit time, the `tau -> inf` limit of
/// [`covariance_at_scale`].
pub fn diffusive_covariance(c: &CovarianceCoefficients) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    match c.kernel {
        SecondOrderKernel::TwoExponentials { a, b } => {
            for k in 0..2 {
                for l in 0..2 {
                    m[k][l] = (a[k][l] + a[l][k]) / c.g1 + (b[k][l] + b[l][k]) / c.g2;
                }
            }
        }
        SecondOrderKernel::Confluent { c: c0, d } => {
            for k in 0..2 {
                for l in 0..2 {
                    m[k][l] =
                        (c0[k][l] + c0[l][k]) / c.y + (d[k][l] + d[l][k]) / (c.y * c.y);
                }
            }
        }
    }
    m[0][0] += 2.0 * c.lambda1;
    m[1][1] += 2.0 * c.lambda3;
    m
}

/// Symmetric-case covariance per unit time `(C11/tau, C12/tau)` along an
/// independent route: the four shape constants of the fully symmetric model
/// evaluated directly from the parameters, bypassing the transform-system
/// machinery. Used as a cross-check of [`covariance_at_scale`].
pub fn symmetric_covariance(
    p: &BivariateParams,
    tau: f64,
) -> Result<(f64, f64), AnalyticsError> {
    if !(tau >= 0.0) {
        return Err(AnalyticsError::InvalidScale(tau));
    }
    if !(relative_eq(p.k12.alpha, p.k34.alpha)
        && relative_eq(p.k13.alpha, p.k31.alpha)
        && relative_eq(p.mu1, p.mu3)
        && relative_eq(p.k12.beta, p.k34.beta)
        && relative_eq(p.k13.beta, p.k12.beta)
        && relative_eq(p.k31.beta, p.k12.beta))
    {
        return Err(AnalyticsError::NotSymmetric(
            "symmetric covariance needs k12 = k34, k13 = k31, mu1 = mu3".into(),
        ));
    }
    let radius = p.spectral_radius();
    if radius >= 1.0 {
        return Err(AnalyticsError::Unstable { radius });
    }
    let beta = p.k12.beta;
    let (g12, g13) = (p.k12.alpha / beta, p.k13.alpha / beta);
    let mu = p.mu1;
    let lambda = mu / (1.0 - g12 - g13);
    let r = beta * mu / (g12 + g13 - 1.0);
    let s = g12 + g13;
    let d = g12 - g13;
    let c1 = (2.0 + s) * s / (1.0 + s);
    let c2 = (2.0 + d) * d / (1.0 + d);
    let g1 = beta * (1.0 + s);
    let g2 = beta * (1.0 + d);
    let h1 = scale_response(g1, tau);
    let h2 = scale_response(g2, tau);
    let c11 = 2.0 * lambda + r * (c1 * h1 + c2 * h2);
    let c12 = r * (-c1 * h1 + c2 * h2);
    Ok((c11, c12))
}

/// Closed-form Epps curve `rho(tau) = C12(tau) / sqrt(C11(tau) C22(tau))`.
pub fn epps_curve(c: &CovarianceCoefficients, taus: &[f64]) -> Result<Curve, AnalyticsError> {
    let values = taus
        .iter()
        .map(|&tau| {
            let m = covariance_at_scale(c, tau)?;
            Ok(m[0][1] / (m[0][0] * m[1][1]).sqrt())
        })
        .collect::<Result<Vec<f64>, AnalyticsError>>()?;
    Curve::from_values(taus, &values).map_err(CurveError::into)
}

/// Large-scale limit of the correlation in the fully symmetric case:
/// `2 g13 (1 + g12) / (1 + g13^2 + 2 g12 + g12^2)`.
pub fn epps_asymptote(p: &BivariateParams) -> Result<f64, AnalyticsError> {
    let c = covariance_coefficients(p)?;
    let (g12, g13) = c.symmetric_gammas()?;
    Ok(2.0 * g13 * (1.0 + g12) / (1.0 + g13 * g13 + 2.0 * g12 + g12 * g12))
}

/// Initial slope `d rho / d tau` at `tau = 0` in the fully symmetric case;
/// the correlation vanishes linearly at small scales.
pub fn epps_slope(p: &BivariateParams) -> Result<f64, AnalyticsError> {
    let c = covariance_coefficients(p)?;
    let r = c.symmetric_r()?;
    let c1 = c.symmetric_c1()?;
    let c2 = c.symmetric_c2()?;
    let lambda = c.lambda1;
    Ok(r * (c2 - c1) / (4.0 * lambda))
}

/// `int_0^tau du int_tau^{2 tau} dv e^{-g (v - u)} = (1 - e^{-g tau})^2 / g^2`.
fn lagged_window_response(g: f64, tau: f64) -> f64 {
    let w = tau * one_minus_exp_over(g * tau);
    w * w
}

/// `int_0^tau du int_tau^{2 tau} dv (v - u) e^{-g (v - u)}`, the companion
/// integral for the linear kernel term, with a series branch for small
/// `g tau` where the direct form cancels.
fn lagged_window_linear_response(g: f64, tau: f64) -> f64 {
    let x = g * tau;
    let w = one_minus_exp_over(x);
    let w_minus_e = if x < 1e-3 {
        x / 2.0 - x * x / 3.0 + x * x * x / 8.0 - x * x * x * x / 30.0
    } else {
        w - (-x).exp()
    };
    2.0 * tau * tau / g * w * w_minus_e
}

/// Lead-lag asymmetry `Delta(tau) = C12(tau, tau) - C21(tau, tau)`: the
/// covariance between an increment of asset 1 and the *following* window's
/// increment of asset 2, minus the reverse pairing. Positive when asset 1
/// anticipates asset 2; zero for a symmetric coupling matrix.
///
/// The kernel matrix is stored with row = later stream (the orientation of
/// its evolution equation), while the increment pairing above puts the
/// first index earlier, so the lagged windows integrate the transposed
/// off-diagonal blocks: `C12(tau, tau)` draws on `K[1][0]`.
pub fn leadlag_delta(c: &CovarianceCoefficients, tau: f64) -> Result<f64, AnalyticsError> {
    if !(tau >= 0.0) {
        return Err(AnalyticsError::InvalidScale(tau));
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    Ok(match c.kernel {
        SecondOrderKernel::TwoExponentials { a, b } => {
            let d1 = a[1][0] - a[0][1];
            let d2 = b[1][0] - b[0][1];
            d1 * lagged_window_response(c.g1, tau) + d2 * lagged_window_response(c.g2, tau)
        }
        SecondOrderKernel::Confluent { c: c0, d } => {
            (c0[1][0] - c0[0][1]) * lagged_window_response(c.y, tau)
                + (d[1][0] - d[0][1]) * lagged_window_linear_response(c.y, tau)
        }
    })
}

/// Lead-lag asymmetry sampled on a grid of scales.
pub fn leadlag_curve(c: &CovarianceCoefficients, taus: &[f64]) -> Result<Curve, AnalyticsError> {
    let values = taus
        .iter()
        .map(|&tau| leadlag_delta(c, tau))
        .collect::<Result<Vec<f64>, AnalyticsError>>()?;
    Curve::from_values(taus, &values).map_err(CurveError::into)
}

/// Per-asset signature plot `C_kk(tau) / tau` of the bivariate model on a
/// grid of scales.
pub fn bivariate_signature_curve(
    c: &CovarianceCoefficients,
    asset: usize,
    taus: &[f64],
) -> Result<Curve, AnalyticsError> {
    assert!(asset < 2);
    let values = taus
        .iter()
        .map(|&tau| Ok(covariance_at_scale(c, tau)?[asset][asset]))
        .collect::<Result<Vec<f64>, AnalyticsError>>()?;
    Curve::from_values(taus, &values).map_err(CurveError::into)
}

/// Cross-covariance per unit time `C12(tau) / tau` on a grid of scales.
pub fn cross_covariance_curve(
    c: &CovarianceCoefficients,
    taus: &[f64],
) -> Result<Curve, AnalyticsError> {
    let values = taus
        .iter()
        .map(|&tau| Ok(covariance_at_scale(c, tau)?[0][1]))
        .collect::<Result<Vec<f64>, AnalyticsError>>()?;
    Curve::from_values(taus, &values).map_err(CurveError::into)
}

/// Univariate parameters seen by asset 1 when the cross coupling vanishes.
#[cfg(test)]
fn univariate_reduction(p: &BivariateParams) -> crate::model::UnivariateParams {
    crate::model::UnivariateParams::from_rates(p.mu1, p.k12.alpha, p.k12.beta)
        .expect("stable bivariate parameters reduce to stable univariate ones")
}
