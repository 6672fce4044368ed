//! Independent numerical routes to the closed-form quantities: adaptive
//! quadrature of the second-order kernel, a direct linear solve for the
//! transform constants, and transcriptions of the heavier rational
//! expressions. These exist to cross-check the closed forms and are kept
//! deliberately free of the code paths they validate.

use super::bivariate::CovarianceCoefficients;
use super::AnalyticsError;
use crate::model::{BivariateParams, UnivariateParams};

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 40)
}

/// Univariate signature plot by double quadrature of the autocovariance
/// density: `C(tau) = 2 (rate_bar + (2/tau) int_0^tau (tau - z) M(z) dz)`.
pub fn quadrature_signature_plot(p: &UnivariateParams, tau: f64) -> Result<f64, AnalyticsError> {
    let d = super::univariate::covariance_density(p)?;
    let f = |z: f64| (tau - z) * d.eval(z);
    let scale = (d.amplitude.abs() * tau * tau).max(1e-30);
    let inner = adaptive_simpson(&f, 0.0, tau, 1e-13 * scale);
    Ok(2.0 * (d.mean_rate + 2.0 * inner / tau))
}

/// Covariance per unit time at scale `tau` by quadrature of the kernel
/// matrix: `C_kl(tau)/tau = atom + (1/tau) int_0^tau (tau - z)(K_kl + K_lk)(z) dz`.
pub fn quadrature_covariance_at_scale(c: &CovarianceCoefficients, tau: f64) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    let scale = (c.lambda1 + c.lambda3) * tau;
    for k in 0..2 {
        for l in 0..2 {
            let f = |z: f64| (tau - z) * (c.kernel_at(k, l, z) + c.kernel_at(l, k, z));
            m[k][l] = adaptive_simpson(&f, 0.0, tau, 1e-13 * scale.max(1e-30)) / tau;
        }
    }
    m[0][0] += 2.0 * c.lambda1;
    m[1][1] += 2.0 * c.lambda3;
    m
}

/// The four Laplace-transform constants by a direct linear solve of the
/// fixed-point system at `s = beta`, independent of the closed-form
/// rational expressions.
pub fn q_via_linear_system(p: &BivariateParams) -> Result<[f64; 4], AnalyticsError> {
    let beta = p.k12.beta;
    let (a12, a13, a31, a34) = (p.k12.alpha, p.k13.alpha, p.k31.alpha, p.k34.alpha);
    let lambdas = p.mean_intensities()?;
    let (l1, l3) = (lambdas[0], lambdas[2]);
    let (p12, p13) = (a12 / (2.0 * beta), a13 / (2.0 * beta));
    let (p31, p34) = (a31 / (2.0 * beta), a34 / (2.0 * beta));
    // Unknowns (q1, q2, q3, q4).
    let a = [
        [1.0 + 2.0 * p12, -p13, -p13, 0.0],
        [0.0, 1.0 + p12, p12, -2.0 * p13],
        [-2.0 * p31, p34, 1.0 + p34, 0.0],
        [0.0, -p31, -p31, 1.0 + 2.0 * p34],
    ];
    let rhs = [
        -2.0 * p12 * l1,
        2.0 * p13 * l3,
        2.0 * p31 * l1,
        -2.0 * p34 * l3,
    ];
    solve4(a, rhs).ok_or(AnalyticsError::Unstable { radius: p.spectral_radius() })
}

/// Kernel amplitudes transcribed from the explicit `/(4Z)` rational
/// expressions, as an alternative route to the partial-fraction residues.
/// Only defined away from the confluent case `Z = 0`.
pub fn amplitudes_via_rational_expressions(
    p: &BivariateParams,
) -> Result<([[f64; 2]; 2], [[f64; 2]; 2]), AnalyticsError> {
    let c = super::bivariate::covariance_coefficients(p)?;
    let (q1, q2, q3, q4) = (c.q1, c.q2, c.q3, c.q4);
    let (l1, l3) = (c.lambda1, c.lambda3);
    let (a12, a13) = (p.k12.alpha, p.k13.alpha);
    let (a31, a34) = (p.k31.alpha, p.k34.alpha);
    let z = c.z;
    if z == 0.0 {
        return Err(AnalyticsError::NotSymmetric(
            "rational amplitude expressions need distinct decay rates (Z > 0)".into(),
        ));
    }
    let a11 = -(q1 * (2.0 * a13 * a31 + a12 * a12 + 2.0 * z * a12 - a34 * a12)
        - q2 * (a12 * a13 + 2.0 * z * a13 + a34 * a13)
        + l1 * (4.0 * a13 * a31 + 2.0 * a12 * a12 + 4.0 * z * a12 - 2.0 * a34 * a12))
        / (4.0 * z);
    let b11 = -(q1 * (a34 * a12 - 2.0 * a13 * a31 - a12 * a12 + 2.0 * z * a12)
        + q2 * (a13 * a12 - 2.0 * z * a13 + a34 * a13)
        + l1 * (2.0 * a34 * a12 + 4.0 * z * a12 - 2.0 * a12 * a12 - 4.0 * a13 * a31))
        / (4.0 * z);
    let a12c = -(q3 * (2.0 * a13 * a31 + 2.0 * z * a12 + a12 * a12 - a34 * a12)
        - q4 * (a13 * a12 + 2.0 * z * a13 + a34 * a13)
        - l3 * (4.0 * z * a13 + 2.0 * a34 * a13 + 2.0 * a12 * a13))
        / (4.0 * z);
    let b12 = -(q3 * (a34 * a12 - 2.0 * a13 * a31 + 2.0 * z * a12 - a12 * a12)
        + q4 * (a34 * a13 + a12 * a13 - 2.0 * z * a13)
        + l3 * (2.0 * a13 * a12 - 4.0 * z * a13 + 2.0 * a13 * a34))
        / (4.0 * z);
    let a21 = (q1 * (a12 * a31 + 2.0 * z * a31 + a34 * a31)
        + q2 * (a12 * a34 - a34 * a34 - 2.0 * a13 * a31 - 2.0 * z * a34)
        + l1 * (2.0 * a12 * a31 + 2.0 * a34 * a31 + 4.0 * z * a31))
        / (4.0 * z);
    let b21 = (q2 * (a34 * a34 - a12 * a34 + 2.0 * a13 * a31 - 2.0 * z * a34)
        - q1 * (a12 * a31 + a34 * a31 - 2.0 * z * a31)
        + l1 * (4.0 * z * a31 - 2.0 * a12 * a31 - 2.0 * a34 * a31))
        / (4.0 * z);
    let a22 = (q4 * (a12 * a34 - 2.0 * a13 * a31 - 2.0 * z * a34 - a34 * a34)
        + q3 * (a31 * a34 + 2.0 * z * a31 + a31 * a12)
        + l3 * (2.0 * a12 * a34 - 2.0 * a34 * a34 - 4.0 * a13 * a31 - 4.0 * z * a34))
        / (4.0 * z);
    let b22 = (q4 * (2.0 * a13 * a31 - a12 * a34 + a34 * a34 - 2.0 * z * a34)
        + q3 * (2.0 * z * a31 - a12 * a31 - a34 * a31)
        + l3 * (4.0 * a13 * a31 - 4.0 * z * a34 + 2.0 * a34 * a34 - 2.0 * a12 * a34))
        / (4.0 * z);
    Ok(([[a11, a12c], [a21, a22]], [[b11, b12], [b21, b22]]))
}

/// Lead-lag amplitude `D1 = A12 - A21` in the one-directional case
/// `alpha13 = 0`, from its explicit closed form (valid for
/// `alpha12 > alpha34`):
///
/// ```text
/// D1 = -2 a12 a31 beta mu1 (2 beta + a12)
///      / ((a12 - a34)(2 beta + a34 + a12)(beta - a12))
/// ```
pub fn leadlag_d1_closed_form(p: &BivariateParams) -> Result<f64, AnalyticsError> {
    if p.k13.alpha != 0.0 {
        return Err(AnalyticsError::NotSymmetric(
            "closed-form D1 needs alpha13 = 0".into(),
        ));
    }
    let (a12, a31, a34) = (p.k12.alpha, p.k31.alpha, p.k34.alpha);
    let beta = p.k12.beta;
    let mu1 = p.mu1;
    Ok(-2.0 * a12 * a31 * beta * mu1 * (2.0 * beta + a12)
        / ((a12 - a34) * (2.0 * beta + a34 + a12) * (beta - a12)))
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite")
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in row + 1..4 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}
