//! Gamma-family special functions and the chi-squared quantile.

use crate::error::{HdsError, Result};

/// Confidence level of the chi-squared critical value behind the radial scale.
pub const RADIAL_ALPHA: f64 = 0.9999;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let series = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, &c)| acc + c / (x + i as f64 + 1.0));
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

const MAX_TERMS: usize = 100_000;

fn gamma_prefactor(a: f64, x: f64) -> f64 {
    (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Series expansion of P(a, x); converges quickly for `x < a + 1`.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_TERMS {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * gamma_prefactor(a, x)
}

/// Continued fraction for Q(a, x) (modified Lentz); used for `x >= a + 1`.
fn upper_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    gamma_prefactor(a, x) * h
}

/// Regularized lower incomplete gamma function P(a, x).
pub fn regularized_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_series(a, x).min(1.0)
    } else {
        (1.0 - upper_fraction(a, x)).max(0.0)
    }
}

/// Chi-squared CDF with `dof` degrees of freedom.
pub fn chi2_cdf(x: f64, dof: u32) -> f64 {
    regularized_lower_gamma(f64::from(dof) / 2.0, x / 2.0)
}

/// Inverse chi-squared CDF by bisection on [`chi2_cdf`].
pub fn chi2_quantile(alpha: f64, dof: u32) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HdsError::Domain(format!(
            "chi-squared quantile needs 0 < alpha < 1, got {alpha}"
        )));
    }
    if dof == 0 {
        return Err(HdsError::Domain(
            "chi-squared quantile needs dof >= 1".into(),
        ));
    }
    let mut lo = 0.0;
    let mut hi = 2.0 * f64::from(dof).max(1.0);
    while chi2_cdf(hi, dof) < alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chi2_cdf(mid, dof) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Dimension-dependent constant `C_D = 0.55 - 0.01 ln D`.
pub fn dimension_constant(dims: usize) -> f64 {
    0.55 - 0.01 * (dims as f64).ln()
}

/// Global radial scale `lambda = C_D * sqrt(chi2_{0.9999, D})`.
pub fn radial_scale_factor(dims: usize) -> Result<f64> {
    let c = dimension_constant(dims);
    if dims == 0 || c <= 0.0 {
        return Err(HdsError::Domain(format!(
            "radial scale undefined for D = {dims}"
        )));
    }
    let dof = u32::try_from(dims).map_err(|_| HdsError::Domain(format!("D = {dims} too large")))?;
    Ok(c * chi2_quantile(RADIAL_ALPHA, dof)?.sqrt())
}
