//! Dimension-p Legendre polynomials, i.e. Gegenbauer polynomials
//! C_ℓ^{(p-2)/2} rescaled so that P_ℓ(1) = 1.
//!
//! The recurrence runs on the normalized sequence directly:
//!
//! ```text
//! (ℓ + p - 2) P_{ℓ+1}(t) = (2ℓ + p - 2) t P_ℓ(t) - ℓ P_{ℓ-1}(t),   ℓ ≥ 1
//! ```
//!
//! with P_0 = 1 and P_1 = t for every p. Values stay in [-1, 1].

use super::{ln_gamma, sphere_area};
use crate::error::{Error, Result};
use crate::Real;

fn check_args<T: Real>(p: usize, t: T) -> Result<()> {
    if p < 2 {
        return Err(Error::invalid("p", format!("dimension must be >= 2, got {p}")));
    }
    if !(t.abs() <= T::one()) {
        return Err(Error::domain("t", t.as_f64()));
    }
    Ok(())
}

/// Stateful three-term recurrence; yields P_0(t), P_1(t), ...
#[derive(Debug, Clone)]
pub struct LegendreRecurrence<T> {
    p: T,
    t: T,
    ell: usize,
    prev: T,
    cur: T,
}

impl<T: Real> LegendreRecurrence<T> {
    /// Unchecked: caller guarantees `p >= 2` and `|t| <= 1`.
    pub fn new(p: usize, t: T) -> Self {
        LegendreRecurrence {
            p: T::of(p),
            t,
            ell: 0,
            prev: T::zero(),
            cur: T::one(),
        }
    }
}

impl<T: Real> Iterator for LegendreRecurrence<T> {
    type Item = T;

    #[inline]
    fn next(&mut self) -> Option<T> {
        let out = self.cur;
        let next = if self.ell == 0 {
            self.t
        } else {
            let l = T::of(self.ell);
            let two = T::c(2.0);
            ((two * l + self.p - two) * self.t * self.cur - l * self.prev) / (l + self.p - two)
        };
        self.prev = self.cur;
        self.cur = next;
        self.ell += 1;
        Some(out)
    }
}

/// P_ℓ(t) in dimension p.
pub fn legendre_p<T: Real>(ell: usize, p: usize, t: T) -> Result<T> {
    check_args(p, t)?;
    Ok(LegendreRecurrence::new(p, t).nth(ell).expect("infinite iterator"))
}

/// [P_0(t), …, P_{ell_max}(t)].
pub fn legendre_sequence<T: Real>(ell_max: usize, p: usize, t: T) -> Result<Vec<T>> {
    check_args(p, t)?;
    Ok(LegendreRecurrence::new(p, t).take(ell_max + 1).collect())
}

/// ln c_{p,ℓ}, where c_{p,ℓ}^{-1} = ∫_{S^{p-1}} P_ℓ(μᵀx)² dx.
pub fn ln_normalizing_constant<T: Real>(p: usize, ell: usize) -> T {
    let ln_area = sphere_area::<T>(p).ln();
    if ell == 0 {
        return -ln_area;
    }
    let pf = T::of(p);
    let l = T::of(ell);
    let two = T::c(2.0);
    // (2ℓ+p-2)Γ(ℓ+p-2) / (ℓ! Γ(p-1)) = (2ℓ+p-2)/(ℓ+p-2) · Γ(ℓ+p-1) / (Γ(ℓ+1) Γ(p-1))
    let ratio = (two * l + pf - two) / (l + pf - two);
    ratio.ln() + ln_gamma(l + pf - T::one()) - ln_gamma(l + T::one()) - ln_gamma(pf - T::one())
        - ln_area
}

/// c_{p,ℓ} = (2ℓ+p-2)Γ(ℓ+p-2) / (ω_{p-1} ℓ! Γ(p-1)), with ω_{p-1} the area of S^{p-1}.
pub fn normalizing_constant<T: Real>(p: usize, ell: usize) -> Result<T> {
    if p < 2 {
        return Err(Error::invalid("p", format!("dimension must be >= 2, got {p}")));
    }
    Ok(ln_normalizing_constant::<T>(p, ell).exp())
}

/// c_{p,0}, …, c_{p,L} by the ratio c_{p,ℓ+1}/c_{p,ℓ}; avoids one lgamma per term.
pub fn normalizing_constants<T: Real>(p: usize, ell_max: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(ell_max + 1);
    let pf = T::of(p);
    let two = T::c(2.0);
    let mut c = T::one() / sphere_area::<T>(p);
    out.push(c);
    if ell_max == 0 {
        return out;
    }
    c = ln_normalizing_constant::<T>(p, 1).exp();
    out.push(c);
    for ell in 1..ell_max {
        let l = T::of(ell);
        // c_{ℓ+1}/c_ℓ = (2ℓ+p)/(2ℓ+p-2) · (ℓ+p-2)/(ℓ+1)
        c = c * (two * l + pf) / (two * l + pf - two) * (l + pf - two) / (l + T::one());
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quadrature::{integrate_zonal, QuadratureRule};

    #[test]
    fn normalization_and_low_orders() {
        for p in 2..8 {
            for ell in 0..20 {
                assert!((legendre_p(ell, p, 1.0f64).unwrap() - 1.0).abs() < 1e-13);
            }
            assert_eq!(legendre_p(0, p, 0.37f64).unwrap(), 1.0);
            assert_eq!(legendre_p(1, 5, 0.3f64).unwrap(), 0.3);
        }
        assert!((legendre_p(2, 3, 0.5f64).unwrap() + 0.125).abs() < 1e-15);
        assert_eq!(legendre_sequence(2, 3, 1.0f64).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(legendre_sequence(1, 4, -0.7f64).unwrap(), vec![1.0, -0.7]);
        let s = legendre_sequence(5, 3, 0.5f64).unwrap();
        assert!((s[2] + 0.125).abs() < 1e-15);
    }

    #[test]
    fn p2_is_chebyshev() {
        for ell in 0..30 {
            let t: f64 = 0.3;
            let want = (ell as f64 * t.acos()).cos();
            assert!((legendre_p(ell, 2, t).unwrap() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn p4_closed_form() {
        // p = 4: P_ℓ(cos θ) = sin((ℓ+1)θ) / ((ℓ+1) sin θ)
        let theta: f64 = 0.9;
        for ell in 0..25 {
            let want = ((ell as f64 + 1.0) * theta).sin() / ((ell as f64 + 1.0) * theta.sin());
            assert!((legendre_p(ell, 4, theta.cos()).unwrap() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn sequence_matches_pointwise() {
        let seq = legendre_sequence(40, 5, -0.31f64).unwrap();
        for (ell, v) in seq.iter().enumerate() {
            assert!((legendre_p(ell, 5, -0.31).unwrap() - v).abs() < 1e-14);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(legendre_p(2, 3, 1.0001f64).is_err());
        assert!(legendre_sequence(2, 1, 0.0f64).is_err());
        assert!(legendre_p(2, 3, f64::NAN).is_err());
    }

    #[test]
    fn normalizing_constant_p3() {
        for ell in 0..50 {
            let c: f64 = normalizing_constant(3, ell).unwrap();
            let want = (2.0 * ell as f64 + 1.0) / (4.0 * std::f64::consts::PI);
            assert!((c - want).abs() < 1e-13 * want);
        }
        let c0: f64 = normalizing_constant(3, 0).unwrap();
        assert!((c0 - 0.0795775).abs() < 1e-7);
    }

    #[test]
    fn ratio_table_matches_log_form() {
        for p in 2..7 {
            let table = normalizing_constants::<f64>(p, 200);
            for (ell, c) in table.iter().enumerate() {
                let direct: f64 = normalizing_constant(p, ell).unwrap();
                assert!((c - direct).abs() <= 1e-11 * direct, "p={p} ell={ell}");
            }
        }
    }

    #[test]
    fn orthogonality_by_quadrature() {
        let rule = QuadratureRule::<f64>::gauss_legendre(256);
        for p in 2..=6 {
            for ell in 0..=20 {
                for m in 0..=20 {
                    let ip = integrate_zonal(&rule, p, |t| {
                        let seq = legendre_sequence(20, p, t).unwrap();
                        seq[ell] * seq[m]
                    });
                    let want = if ell == m {
                        1.0 / normalizing_constant::<f64>(p, ell).unwrap()
                    } else {
                        0.0
                    };
                    assert!((ip - want).abs() < 1e-9, "p={p} l={ell} m={m} got {ip} want {want}");
                }
            }
        }
    }

    #[test]
    fn large_order_stays_bounded() {
        for p in [2usize, 3, 5, 10] {
            for i in 0..=200 {
                let t = -1.0 + i as f64 / 100.0;
                for v in legendre_sequence(100, p, t).unwrap() {
                    assert!(v.abs() <= 1.0 + 1e-12, "p={p} t={t} v={v}");
                }
            }
        }
    }
}
