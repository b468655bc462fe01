//! Scalar numerics: normal distribution tails and adaptive 1-D quadrature.
//!
//! The adaptive integrator is deliberately unrelated to Gauss-Hermite rules
//! so it can serve as an independent check on the Hermite machinery.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

use crate::error::{Error, Result};

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF, evaluated through erfc on the short tail.
pub fn normal_cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * erfc(-x * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * erfc(x * FRAC_1_SQRT_2)
    }
}

/// Two-sided tail `P(|J| > x) = 2 (1 - Phi(|x|))`.
pub fn two_sided_tail(x: f64) -> f64 {
    erfc(x.abs() * FRAC_1_SQRT_2)
}

/// `ln P(|J| > x)`, finite far beyond the point where the tail underflows.
pub fn ln_two_sided_tail(x: f64) -> f64 {
    let z = x.abs() * FRAC_1_SQRT_2;
    if z < 25.0 {
        return erfc(z).ln();
    }
    // erfc(z) ~ exp(-z^2)/(z sqrt(pi)) * (1 - 1/(2z^2) + 3/(4z^4) - 15/(8 z^6))
    let z2 = z * z;
    let series = 1.0 - 0.5 / z2 + 0.75 / (z2 * z2) - 1.875 / (z2 * z2 * z2);
    -z2 - (z * PI.sqrt()).ln() + series.ln()
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for Kronrod nodes 1, 3, 5 and the centre.
const GAUSS_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for k in 0..7 {
        let dx = h * KRONROD_NODES[k];
        let pair = f(c - dx) + f(c + dx);
        kronrod += KRONROD_WEIGHTS[k] * pair;
        if k % 2 == 1 {
            gauss += GAUSS_WEIGHTS[k / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 20_000;
    let (v, e) = gauss_kronrod(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        if total_err <= abs_tol {
            break;
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not reach {abs_tol:e} (error estimate {total_err:e})"
            )));
        }
        let worst = parts.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).map(|(i, _)| i).unwrap_or(0);
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gauss_kronrod(&f, lo, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let value: f64 = parts.iter().map(|p| p.2).sum();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Numerical("non-finite integrand".into()))
    }
}

/// `E f(J)` for standard Gaussian `J`, by adaptive quadrature on `[-14, 14]`.
///
/// The truncated mass is below 1e-43, negligible for integrands with
/// polynomial growth.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(f: F, abs_tol: f64) -> Result<f64> {
    let g = |x: f64| f(x) * normal_pdf(x);
    Ok(integrate(g, -14.0, 0.0, 0.5 * abs_tol)? + integrate(g, 0.0, 14.0, 0.5 * abs_tol)?)
}

/// `E[J tanh(beta J)]`, the single-edge first Hermite coefficient.
pub fn mean_j_tanh(beta: f64) -> Result<f64> {
    gaussian_expectation(|x| x * (beta * x).tanh(), 1e-14)
}
