//! Geometry of the unit sphere S^{p-1}: unit vectors, the tangent-normal
//! decomposition x = t·μ + sqrt(1-t²)·ξ with ξ ⊥ μ, and uniform sampling on
//! the normal subsphere μ^⊥ ∩ S^{p-1}.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// Inputs whose norm is within this of 1 are renormalized; others rejected.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// A point on S^{p-1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitVector<T> {
    coords: Vec<T>,
}

impl<T: Real> UnitVector<T> {
    /// Accepts vectors of norm 1 ± `RENORMALIZE_TOL` and renormalizes them.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid("dim", format!("need p >= 2, got {}", coords.len())));
        }
        let norm = norm(&coords);
        if !((norm - T::one()).abs() <= T::c(RENORMALIZE_TOL)) {
            return Err(Error::domain("norm", norm.as_f64()));
        }
        Ok(UnitVector {
            coords: coords.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// Normalizes any nonzero finite vector.
    pub fn normalize(coords: Vec<T>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid("dim", format!("need p >= 2, got {}", coords.len())));
        }
        let norm = norm(&coords);
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::domain("norm", norm.as_f64()));
        }
        Ok(UnitVector {
            coords: coords.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// The k-th standard basis vector of R^p.
    pub fn basis(p: usize, k: usize) -> Result<Self> {
        if p < 2 || k >= p {
            return Err(Error::invalid("dim", format!("basis({p}, {k})")));
        }
        let mut coords = vec![T::zero(); p];
        coords[k] = T::one();
        Ok(UnitVector { coords })
    }

    /// e_p, the "north pole" used as default mean direction.
    pub fn north_pole(p: usize) -> Result<Self> {
        Self::basis(p, p.saturating_sub(1))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        check_same_dim(self, other)?;
        Ok(dot(&self.coords, &other.coords))
    }

    /// Cosine to `other`, clamped to [-1, 1].
    pub fn cosine(&self, other: &Self) -> Result<T> {
        Ok(self.dot(other)?.max(-T::one()).min(T::one()))
    }

    pub fn neg(&self) -> Self {
        UnitVector {
            coords: self.coords.iter().map(|&c| -c).collect(),
        }
    }

    /// Builds t·self + s·xi, then renormalizes to absorb rounding.
    /// `s` is passed separately so callers can supply an accurate sqrt(1-t²).
    pub(crate) fn combine(&self, t: T, s: T, xi: &Self) -> Self {
        let coords: Vec<T> = self
            .coords
            .iter()
            .zip(&xi.coords)
            .map(|(&m, &x)| t * m + s * x)
            .collect();
        let n = norm(&coords);
        UnitVector {
            coords: coords.into_iter().map(|c| c / n).collect(),
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm<T: Real>(a: &[T]) -> T {
    // scaled to stay finite for large entries
    let scale = a.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let s = a.iter().fold(T::zero(), |acc, &x| {
        let y = x / scale;
        acc + y * y
    });
    scale * s.sqrt()
}

fn check_same_dim<T: Real>(a: &UnitVector<T>, b: &UnitVector<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Tangent-normal parts of x about μ.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentNormal<T> {
    /// t = μᵀx.
    pub t: T,
    /// (x - tμ)/‖x - tμ‖; `None` when x = ±μ and the direction is undefined.
    pub xi: Option<UnitVector<T>>,
}

impl<T: Real> TangentNormal<T> {
    /// t·μ + sqrt(1-t²)·ξ. With an undefined ξ this is only meaningful for t = ±1.
    pub fn recompose(&self, mu: &UnitVector<T>) -> Result<UnitVector<T>> {
        match &self.xi {
            Some(xi) => {
                check_same_dim(mu, xi)?;
                let s = ((T::one() - self.t) * (T::one() + self.t)).max(T::zero()).sqrt();
                Ok(mu.combine(self.t, s, xi))
            }
            None if self.t >= T::zero() => Ok(mu.clone()),
            None => Ok(mu.neg()),
        }
    }
}

/// Splits x into its cosine t = μᵀx and unit normal direction ξ ∈ μ^⊥.
pub fn decompose<T: Real>(x: &UnitVector<T>, mu: &UnitVector<T>) -> Result<TangentNormal<T>> {
    let t = x.cosine(mu)?;
    let resid: Vec<T> = x
        .coords
        .iter()
        .zip(&mu.coords)
        .map(|(&a, &m)| a - t * m)
        .collect();
    let r = norm(&resid);
    let xi = if r <= T::c(1e-12) {
        None
    } else {
        // one Gram-Schmidt refinement keeps ξ ⊥ μ to rounding level
        let mut v: Vec<T> = resid.iter().map(|&c| c / r).collect();
        let d = dot(&v, &mu.coords);
        for (vi, &m) in v.iter_mut().zip(&mu.coords) {
            *vi = *vi - d * m;
        }
        let n = norm(&v);
        Some(UnitVector {
            coords: v.into_iter().map(|c| c / n).collect(),
        })
    };
    Ok(TangentNormal { t, xi })
}

/// Uniform draw on μ^⊥ ∩ S^{p-1}: Gaussian vector, project out μ, normalize.
/// For p = 2 the subsphere is two points and each is returned with probability ½.
pub fn sample_normal_subsphere<T: Real, R: Rng + ?Sized>(
    mu: &UnitVector<T>,
    rng: &mut R,
) -> UnitVector<T> {
    let p = mu.dim();
    if p == 2 {
        let perp = vec![-mu.coords[1], mu.coords[0]];
        let sign = if rng.random::<bool>() { T::one() } else { -T::one() };
        return UnitVector {
            coords: perp.into_iter().map(|c| sign * c).collect(),
        };
    }
    loop {
        let mut v: Vec<T> = (0..p).map(|_| T::standard_normal(rng)).collect();
        let d = dot(&v, &mu.coords);
        for (vi, &m) in v.iter_mut().zip(&mu.coords) {
            *vi = *vi - d * m;
        }
        let n = norm(&v);
        if n > T::c(1e-8) {
            // second projection removes rounding leftovers along μ
            let mut w: Vec<T> = v.into_iter().map(|c| c / n).collect();
            let d = dot(&w, &mu.coords);
            for (wi, &m) in w.iter_mut().zip(&mu.coords) {
                *wi = *wi - d * m;
            }
            let n = norm(&w);
            return UnitVector {
                coords: w.into_iter().map(|c| c / n).collect(),
            };
        }
    }
}

/// Uniform draw on S^{p-1}.
pub fn sample_uniform<T: Real, R: Rng + ?Sized>(p: usize, rng: &mut R) -> UnitVector<T> {
    loop {
        let v: Vec<T> = (0..p).map(|_| T::standard_normal(rng)).collect();
        let n = norm(&v);
        if n > T::c(1e-8) {
            return UnitVector {
                coords: v.into_iter().map(|c| c / n).collect(),
            };
        }
    }
}

/// Geodesic distance arccos(xᵀy) ∈ [0, π].
pub fn riemannian_distance<T: Real>(x: &UnitVector<T>, y: &UnitVector<T>) -> Result<T> {
    Ok(x.cosine(y)?.acos())
}
