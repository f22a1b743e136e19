//! Modified Bessel functions of the first kind, I_ν(x), for real ν ≥ 0 and x > 0.
//!
//! `log_bessel_i` switches between two evaluations at the seam
//! `x = max(30, 2ν)`:
//!
//! * below the seam, the ascending power series
//!   `I_ν(x) = (x/2)^ν Σ_k (x²/4)^k / (k! Γ(ν+k+1))`, summed in scaled form;
//! * above it, the uniform (Debye) asymptotic expansion
//!   `I_ν(x) ~ e^{νη} / sqrt(2π sqrt(ν²+x²)) Σ_k U_k(τ)/ν^k`, τ = ν/sqrt(ν²+x²).
//!
//! Above the seam sqrt(ν²+x²) ≥ 30 and τ ≤ 1/√5, so the expansion terms shrink
//! roughly like (1/30)^k; 20 Debye polynomials are tabulated.
//!
//! Ratios I_{ν+ℓ}/I_ν never go through the logarithms: the top ratio is a
//! continued fraction and the rest come from the downward recurrence
//! `I_{μ-1}/I_μ = 2μ/x + I_{μ+1}/I_μ`, which is stable in that direction.

use std::sync::OnceLock;

use super::gamma::ln_gamma;
use crate::error::{Error, Result};
use crate::Real;

/// Series/asymptotic switch point is `max(BESSEL_SERIES_SEAM, 2ν)`.
pub const BESSEL_SERIES_SEAM: f64 = 30.0;

const DEBYE_TERMS: usize = 20;

fn check_args<T: Real>(nu: T, x: T) -> Result<()> {
    if !(nu >= T::zero()) || !nu.is_finite() {
        return Err(Error::domain("nu", nu.as_f64()));
    }
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::domain("x", x.as_f64()));
    }
    Ok(())
}

/// ln I_ν(x).
pub fn log_bessel_i<T: Real>(nu: T, x: T) -> Result<T> {
    check_args(nu, x)?;
    Ok(log_bessel_i_unchecked(nu, x))
}

pub(crate) fn log_bessel_i_unchecked<T: Real>(nu: T, x: T) -> T {
    let seam = T::c(BESSEL_SERIES_SEAM).max(T::c(2.0) * nu);
    if x < seam {
        log_bessel_series(nu, x)
    } else {
        log_bessel_debye(nu, x)
    }
}

pub(crate) fn log_bessel_series<T: Real>(nu: T, x: T) -> T {
    let q = x * x * T::c(0.25);
    // Rescale whenever the partial sum gets large so f32 does not overflow.
    let big = T::max_value().sqrt();
    let mut log_scale = T::zero();
    let mut term = T::one();
    let mut sum = T::one();
    let mut k = 0usize;
    loop {
        k += 1;
        let kf = T::of(k);
        term = term * q / (kf * (nu + kf));
        sum = sum + term;
        if sum > big {
            log_scale = log_scale + sum.ln();
            term = term / sum;
            sum = T::one();
        }
        if term <= T::epsilon() * T::c(0.25) * sum && kf * kf > q {
            break;
        }
        if k > 100_000 {
            break;
        }
    }
    nu * (x * T::c(0.5)).ln() - ln_gamma(nu + T::one()) + sum.ln() + log_scale
}

/// Coefficients of the Debye polynomials in the form U_k(τ) = τ^k V_k(τ²):
/// `debye_table()[k][j]` is the coefficient of τ^{k+2j} in U_k.
fn debye_table() -> &'static [Vec<f64>] {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Dense power-basis coefficients of U_k; U_{k+1}(τ) =
        // ½τ²(1-τ²)U_k'(τ) + ⅛∫_0^τ (1-5s²)U_k(s) ds.
        let mut dense: Vec<Vec<f64>> = vec![vec![1.0]];
        for k in 0..DEBYE_TERMS - 1 {
            let cur = &dense[k];
            let mut next = vec![0.0; cur.len() + 3];
            for (i, &a) in cur.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let fi = i as f64;
                if i > 0 {
                    next[i + 1] += 0.5 * fi * a;
                    next[i + 3] -= 0.5 * fi * a;
                }
                next[i + 1] += a / (8.0 * (fi + 1.0));
                next[i + 3] -= 5.0 * a / (8.0 * (fi + 3.0));
            }
            dense.push(next);
        }
        dense
            .iter()
            .enumerate()
            .map(|(k, poly)| (0..=k).map(|j| poly.get(k + 2 * j).copied().unwrap_or(0.0)).collect())
            .collect()
    })
}

pub(crate) fn log_bessel_debye<T: Real>(nu: T, x: T) -> T {
    let r = (nu * nu + x * x).sqrt();
    let s = T::one() / r;
    let tau = nu * s;
    let tau2 = tau * tau;
    // ν·η with η = sqrt(1+z²) + ln(z / (1 + sqrt(1+z²))), z = x/ν; finite as ν → 0.
    let nu_eta = if nu > T::zero() {
        r + nu * (x / (nu + r)).ln()
    } else {
        x
    };
    let mut sum = T::one();
    let mut s_pow = T::one();
    // Individual terms can nearly vanish where a U_k changes sign, so the
    // stopping test looks at two consecutive terms.
    let mut prev = T::infinity();
    for poly in debye_table().iter().skip(1) {
        s_pow = s_pow * s;
        let mut v = T::zero();
        for &c in poly.iter().rev() {
            v = v * tau2 + T::c(c);
        }
        let term = s_pow * v;
        sum = sum + term;
        let tol = T::epsilon() * T::c(0.1) * sum.abs();
        if term.abs() <= tol && prev <= tol {
            break;
        }
        prev = term.abs();
    }
    nu_eta - T::c(0.5) * (T::c(2.0) * T::PI()).ln() - T::c(0.25) * (r * r).ln() + sum.ln()
}

/// I_{ν+1}(x)/I_ν(x) by modified Lentz on
/// `1/(2(ν+1)/x + 1/(2(ν+2)/x + …))`.
fn ratio_continued_fraction<T: Real>(nu: T, x: T) -> T {
    let tiny = T::min_positive_value().sqrt();
    let eps = T::epsilon();
    let mut f = tiny;
    let mut c = f;
    let mut d = T::zero();
    let max_iter = (10.0 * (x.as_f64() + nu.as_f64())) as usize + 10_000;
    for k in 1..=max_iter {
        let b = T::c(2.0) * (nu + T::of(k)) / x;
        d = b + d;
        if d == T::zero() {
            d = tiny;
        }
        c = b + T::one() / c;
        if c == T::zero() {
            c = tiny;
        }
        d = T::one() / d;
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= eps {
            break;
        }
    }
    f
}

/// I_{ν+ℓ}(x)/I_ν(x) ∈ [0, 1].
pub fn bessel_i_ratio<T: Real>(nu: T, ell: usize, x: T) -> Result<T> {
    check_args(nu, x)?;
    Ok(*ratio_sequence_unchecked(nu, x, ell).last().expect("non-empty"))
}

/// [I_{ν+ℓ}(x)/I_ν(x) for ℓ = 0..=ell_max], from one continued fraction at the
/// top order followed by downward recurrence.
pub fn bessel_i_ratio_sequence<T: Real>(nu: T, x: T, ell_max: usize) -> Result<Vec<T>> {
    check_args(nu, x)?;
    Ok(ratio_sequence_unchecked(nu, x, ell_max))
}

pub(crate) fn ratio_sequence_unchecked<T: Real>(nu: T, x: T, ell_max: usize) -> Vec<T> {
    let mut out = vec![T::one(); ell_max + 1];
    if ell_max == 0 {
        return out;
    }
    // step[j] = I_{ν+j}/I_{ν+j-1}
    let mut step = vec![T::zero(); ell_max + 1];
    step[ell_max] = ratio_continued_fraction(nu + T::of(ell_max - 1), x);
    for j in (1..ell_max).rev() {
        step[j] = T::one() / (T::c(2.0) * (nu + T::of(j)) / x + step[j + 1]);
    }
    let mut acc = T::one();
    for j in 1..=ell_max {
        acc = acc * step[j];
        out[j] = acc;
    }
    out
}
