use crate::Real;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
///
/// Relative accuracy is around 1e-15 in `f64`. Returns `+inf` at `x = 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x <= T::zero() {
        return if x == T::zero() { T::infinity() } else { T::nan() };
    }
    if x < T::c(0.5) {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let mut acc = T::c(LANCZOS_COEFFS[0]);
    for (i, &coef) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc = acc + T::c(coef) / (z + T::of(i));
    }
    let t = z + T::c(LANCZOS_G + 0.5);
    T::c(0.5) * (T::c(2.0) * T::PI()).ln() + (z + T::c(0.5)) * t.ln() - t + acc.ln()
}

/// ln B(a, b).
pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        let mut fact = 1.0f64;
        for n in 1..30 {
            fact *= n as f64;
            let got = ln_gamma((n + 1) as f64);
            assert!((got - fact.ln()).abs() <= 1e-13 * fact.ln().max(1.0), "n={n}");
        }
        assert!(ln_gamma(1.0f64).abs() < 1e-15);
        assert!(ln_gamma(2.0f64).abs() < 1e-15);
    }

    #[test]
    fn half_integers() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((ln_gamma(0.5f64) - sqrt_pi.ln()).abs() < 1e-14);
        assert!((ln_gamma(1.5f64) - (0.5 * sqrt_pi).ln()).abs() < 1e-14);
        assert!((ln_gamma(2.5f64) - (0.75 * sqrt_pi).ln()).abs() < 1e-14);
    }

    #[test]
    fn large_argument_stirling() {
        let x = 1.0e4f64;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
            + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        assert!((ln_gamma(x) - stirling).abs() / stirling < 1e-14);
    }

    #[test]
    fn f32_agrees() {
        assert!((ln_gamma(5.0f32) - 24.0f32.ln()).abs() < 1e-5);
    }
}
