//! Special functions: modified Bessel functions of the first kind,
//! dimension-p Legendre polynomials, log-gamma and Gauss-Legendre quadrature.
//!
//! Everything here is a pure function of its arguments.

pub(crate) mod bessel;
mod gamma;
mod legendre;
pub mod quadrature;

pub use bessel::{bessel_i_ratio, bessel_i_ratio_sequence, log_bessel_i, BESSEL_SERIES_SEAM};
pub use gamma::{ln_beta, ln_gamma};
pub use legendre::{
    legendre_p, legendre_sequence, ln_normalizing_constant, normalizing_constant,
    normalizing_constants, LegendreRecurrence,
};
pub use quadrature::{integrate_adaptive, integrate_zonal, QuadratureRule};

use crate::Real;

/// Surface area of the unit sphere S^{p-1} ⊂ R^p: 2π^{p/2} / Γ(p/2).
pub fn sphere_area<T: Real>(p: usize) -> T {
    let half = T::of(p) * T::c(0.5);
    (T::c(2.0).ln() + half * T::PI().ln() - ln_gamma(half)).exp()
}
