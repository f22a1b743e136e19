//! Isotropic random walks on S^{p-1} through their zonal (Legendre) coefficients.
//!
//! A distribution that is rotationally symmetric about μ is represented by
//! its Legendre moments f̂_ℓ = E[P_ℓ(μᵀx)]. Convolution of such laws is the
//! entrywise product of the moment sequences, and the density is recovered
//! from the series g(t) = Σ_ℓ c_{p,ℓ} f̂_ℓ P_ℓ(t).
//!
//! Truncation: a sequence stored up to order L carries an estimate of the
//! remainder Σ_{ℓ>L} c_{p,ℓ}|f̂_ℓ|, which bounds the pointwise series error
//! because |P_ℓ| ≤ 1. Generated sequences are cut once the current term and a
//! geometric continuation at the current term ratio fall below the requested
//! tolerance; the term ratio is nonincreasing for the Bessel-ratio sequences
//! produced here, so the continuation dominates the true remainder.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{par_generate, StreamRng};
use crate::specfun::{normalizing_constants, sphere_area, LegendreRecurrence};
use crate::sphere::UnitVector;
use crate::vmf::{self, sample_around, CosineSampler};
use crate::Real;

/// Default bound on the neglected series remainder.
pub const DEFAULT_SERIES_TOL: f64 = 1e-8;

/// Highest order a generated sequence may reach before giving up.
pub const DEFAULT_MAX_ORDER: usize = 10_000;

/// Grid decrease tolerated by [`check_unimodality`] (series truncation noise).
pub const UNIMODALITY_TOL: f64 = 1e-7;

/// Legendre moments (f̂_0, …, f̂_L) of a zonal law on S^{p-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalCoefficients<T> {
    p: usize,
    coeffs: Vec<T>,
    tail: T,
}

fn check_p(p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::invalid("p", format!("dimension must be >= 2, got {p}")));
    }
    Ok(())
}

impl<T: Real> ZonalCoefficients<T> {
    /// Coefficients of a probability law: f̂_0 = 1 and |f̂_ℓ| ≤ 1.
    pub fn new(p: usize, coeffs: Vec<T>, tail: T) -> Result<Self> {
        check_p(p)?;
        let slack = T::c(1e-12);
        match coeffs.first() {
            Some(&c0) if (c0 - T::one()).abs() <= slack => {}
            Some(&c0) => return Err(Error::invalid("coeffs", format!("f_0 must be 1, got {c0}"))),
            None => return Err(Error::invalid("coeffs", "empty sequence")),
        }
        Self::unnormalized(p, coeffs, tail)
    }

    /// Moments of a finite positive measure: |ĥ_ℓ| ≤ ĥ_0.
    pub fn unnormalized(p: usize, coeffs: Vec<T>, tail: T) -> Result<Self> {
        check_p(p)?;
        let Some(&c0) = coeffs.first() else {
            return Err(Error::invalid("coeffs", "empty sequence"));
        };
        let bound = c0.abs() * (T::one() + T::c(1e-12)) + T::c(1e-15);
        if let Some((ell, c)) = coeffs.iter().enumerate().find(|(_, c)| !(c.abs() <= bound)) {
            return Err(Error::invalid("coeffs", format!("|coefficient {ell}| = {c} exceeds {c0}")));
        }
        if !(tail >= T::zero()) {
            return Err(Error::invalid("tail", format!("{tail}")));
        }
        Ok(ZonalCoefficients { p, coeffs, tail })
    }

    /// The uniform law: (1, 0, 0, …).
    pub fn uniform(p: usize) -> Result<Self> {
        check_p(p)?;
        Ok(ZonalCoefficients {
            p,
            coeffs: vec![T::one()],
            tail: T::zero(),
        })
    }

    /// The point mass at μ: all moments equal 1. Its series never converges.
    pub fn point_mass(p: usize, order: usize) -> Result<Self> {
        check_p(p)?;
        Ok(ZonalCoefficients {
            p,
            coeffs: vec![T::one(); order + 1],
            tail: T::infinity(),
        })
    }

    /// Generates f̂_ℓ = `coeff(ℓ)` for ℓ = 0, 1, … until the estimated
    /// remainder is below `tol`.
    pub fn from_fn<F: FnMut(usize) -> T>(
        p: usize,
        mut coeff: F,
        tol: T,
        max_order: usize,
    ) -> Result<Self> {
        check_p(p)?;
        let c = normalizing_constants::<T>(p, max_order);
        let mut coeffs = Vec::new();
        for ell in 0..=max_order {
            coeffs.push(coeff(ell));
            if let Some(tail) = remainder_estimate(&coeffs, &c, tol) {
                return Ok(ZonalCoefficients { p, coeffs, tail });
            }
        }
        Err(Error::NonConvergence {
            what: "zonal coefficient sequence",
            order: max_order,
            tail: f64::INFINITY,
        })
    }

    /// Moments of M_p(μ, κ), f̂_ℓ = I_{ℓ+ν}(κ)/I_ν(κ), truncated at remainder `tol`.
    pub fn vmf(p: usize, kappa: T, tol: T) -> Result<Self> {
        check_p(p)?;
        if kappa == T::zero() {
            vmf::fourier_coefficients(p, kappa, 0)?;
            return Self::uniform(p);
        }
        let mut order = 64usize;
        loop {
            let coeffs = vmf::fourier_coefficients(p, kappa, order)?;
            let c = normalizing_constants::<T>(p, order);
            for end in 1..=order {
                if let Some(tail) = remainder_estimate(&coeffs[..=end], &c, tol) {
                    return Ok(ZonalCoefficients {
                        p,
                        coeffs: coeffs[..=end].to_vec(),
                        tail,
                    });
                }
            }
            if order >= DEFAULT_MAX_ORDER {
                return Err(Error::NonConvergence {
                    what: "von Mises-Fisher coefficients",
                    order,
                    tail: f64::INFINITY,
                });
            }
            order = (order * 2).min(DEFAULT_MAX_ORDER);
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Truncation order L.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Estimated Σ_{ℓ>L} c_{p,ℓ}|f̂_ℓ|.
    pub fn tail(&self) -> T {
        self.tail
    }

    /// f̂_ℓ, or `None` beyond the truncation order.
    pub fn get(&self, ell: usize) -> Option<T> {
        self.coeffs.get(ell).copied()
    }

    /// Applies `g` entrywise. `lipschitz` must bound |g(a)| / |a| on [-1, 1]
    /// (so g(0) = 0 beyond order 0); the remainder is scaled by it.
    pub fn map_unnormalized<F: Fn(T) -> T>(&self, g: F, lipschitz: T) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|&c| g(c)).collect();
        Self::unnormalized(self.p, coeffs, self.tail * lipschitz.abs())
    }

    /// Drops trailing coefficients while the accumulated remainder stays below `tol`.
    pub fn trimmed(mut self, tol: T) -> Self {
        if !(self.tail <= tol) {
            return self;
        }
        let c = normalizing_constants::<T>(self.p, self.order());
        while self.coeffs.len() > 1 {
            let ell = self.coeffs.len() - 1;
            let extra = c[ell] * self.coeffs[ell].abs();
            if self.tail + extra > tol {
                break;
            }
            self.tail = self.tail + extra;
            self.coeffs.pop();
        }
        self
    }

    /// Whether the stored remainder is within `tol`.
    pub fn converged(&self, tol: T) -> bool {
        self.tail.is_finite() && self.tail <= tol
    }

    /// Density evaluator; fails when the remainder exceeds [`DEFAULT_SERIES_TOL`].
    pub fn series(&self) -> Result<ZonalSeries<T>> {
        self.series_with_tol(T::c(DEFAULT_SERIES_TOL))
    }

    pub fn series_with_tol(&self, tol: T) -> Result<ZonalSeries<T>> {
        if !self.converged(tol) {
            return Err(Error::NonConvergence {
                what: "zonal density series",
                order: self.order(),
                tail: self.tail.as_f64(),
            });
        }
        let c = normalizing_constants::<T>(self.p, self.order());
        Ok(ZonalSeries {
            p: self.p,
            weights: c.iter().zip(&self.coeffs).map(|(&c, &f)| c * f).collect(),
            tail: self.tail,
        })
    }

    /// Density with respect to surface measure at any x with μᵀx = t.
    pub fn directional_pdf(&self, t: T) -> Result<T> {
        self.series()?.directional(t)
    }

    /// Density of the cosine t = μᵀx on [-1, 1].
    pub fn projected_pdf(&self, t: T) -> Result<T> {
        self.series()?.projected(t)
    }
}

/// Σ_{ℓ>L} c_ℓ|f̂_ℓ| estimate for the sequence ending at L, if it is below `tol`.
fn remainder_estimate<T: Real>(coeffs: &[T], c: &[T], tol: T) -> Option<T> {
    let n = coeffs.len();
    if n < 4 {
        return None;
    }
    let last = c[n - 1] * coeffs[n - 1].abs() + c[n - 2] * coeffs[n - 2].abs();
    let tail = pair_remainder(coeffs, c)?;
    (last <= tol && tail <= tol).then_some(tail)
}

/// Geometric continuation of the last two pairs of terms c_ℓ|f̂_ℓ|. Pairs
/// rather than single terms so parity-alternating zeros do not stop early.
/// `None` when the pairs are not decreasing.
pub(crate) fn pair_remainder<T: Real>(coeffs: &[T], c: &[T]) -> Option<T> {
    let n = coeffs.len();
    if n < 4 {
        return None;
    }
    let term = |l: usize| c[l] * coeffs[l].abs();
    let last = term(n - 1) + term(n - 2);
    let prev = term(n - 3) + term(n - 4);
    if last == T::zero() && prev == T::zero() {
        return Some(T::zero());
    }
    if prev == T::zero() {
        return None;
    }
    let ratio = last / prev;
    if ratio >= T::one() {
        return None;
    }
    Some(last * ratio / (T::one() - ratio))
}

/// Precomputed weights c_{p,ℓ} f̂_ℓ for repeated evaluation of the density series.
#[derive(Debug, Clone)]
pub struct ZonalSeries<T> {
    p: usize,
    weights: Vec<T>,
    tail: T,
}

impl<T: Real> ZonalSeries<T> {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn tail(&self) -> T {
        self.tail
    }

    /// Σ c_{p,ℓ} f̂_ℓ P_ℓ(t). Truncation can leave small negative values; they
    /// are returned as is.
    pub fn directional(&self, t: T) -> Result<T> {
        if !(t.abs() <= T::one()) {
            return Err(Error::domain("t", t.as_f64()));
        }
        Ok(self.directional_unchecked(t))
    }

    #[inline]
    pub(crate) fn directional_unchecked(&self, t: T) -> T {
        self.weights
            .iter()
            .zip(LegendreRecurrence::new(self.p, t))
            .fold(T::zero(), |acc, (&w, pl)| acc + w * pl)
    }

    /// ω_{p-2} (1-t²)^{(p-3)/2} g(t), the density of the cosine.
    pub fn projected(&self, t: T) -> Result<T> {
        Ok(projection_factor(self.p, t) * self.directional(t)?)
    }
}

/// ω_{p-2}(1-t²)^{(p-3)/2}: converts a zonal surface density into the density of t.
pub fn projection_factor<T: Real>(p: usize, t: T) -> T {
    let area = sphere_area::<T>(p - 1);
    match p {
        3 => area,
        _ => {
            let s = (T::one() - t) * (T::one() + t);
            area * s.max(T::zero()).powf(T::c((p as f64 - 3.0) / 2.0))
        }
    }
}

/// Entrywise product, i.e. the law of the composed isotropic steps.
pub fn convolve<T: Real>(
    a: &ZonalCoefficients<T>,
    b: &ZonalCoefficients<T>,
) -> Result<ZonalCoefficients<T>> {
    if a.p != b.p {
        return Err(Error::DimensionMismatch {
            expected: a.p,
            found: b.p,
        });
    }
    let len = a.coeffs.len().min(b.coeffs.len());
    let coeffs: Vec<T> = a.coeffs[..len]
        .iter()
        .zip(&b.coeffs[..len])
        .map(|(&x, &y)| x * y)
        .collect();
    // Beyond its own order each sequence is bounded by its order-0 entry.
    let (a0, b0) = (a.coeffs[0].abs(), b.coeffs[0].abs());
    let tail_a = if a.coeffs.len() <= len { a.tail * b0 } else { T::infinity() };
    let tail_b = if b.coeffs.len() <= len { b.tail * a0 } else { T::infinity() };
    let mut tail = tail_a.min(tail_b);
    if tail.is_nan() {
        tail = T::infinity();
    }
    Ok(ZonalCoefficients {
        p: a.p,
        coeffs,
        tail,
    })
}

/// (f̂_ℓ)^n: the n-step walk with identical steps. n = 0 gives the point mass.
pub fn walk_coefficients<T: Real>(
    step: &ZonalCoefficients<T>,
    n: usize,
) -> Result<ZonalCoefficients<T>> {
    if n == 0 {
        return ZonalCoefficients::point_mass(step.p, step.order());
    }
    let coeffs = step.coeffs.iter().map(|&c| c.powi(n as i32)).collect();
    let c0 = step.coeffs[0].abs();
    Ok(ZonalCoefficients {
        p: step.p,
        coeffs,
        tail: step.tail * c0.powi(n as i32 - 1),
    })
}

/// Running products ĝ_1, ĝ_1ĝ_2, … for a walk with heterogeneous steps.
pub fn walk_coefficients_heterogeneous<T: Real>(
    steps: &[ZonalCoefficients<T>],
) -> Result<Vec<ZonalCoefficients<T>>> {
    let mut out: Vec<ZonalCoefficients<T>> = Vec::with_capacity(steps.len());
    for step in steps {
        let next = match out.last() {
            Some(prev) => convolve(prev, step)?,
            None => step.clone(),
        };
        out.push(next);
    }
    Ok(out)
}

/// Moments of the n-step vMF walk, computed through the identical-step power.
pub fn vmf_walk_coefficients<T: Real>(
    p: usize,
    kappa: T,
    n: usize,
    tol: T,
) -> Result<ZonalCoefficients<T>> {
    let step = ZonalCoefficients::vmf(p, kappa, tol)?;
    Ok(walk_coefficients(&step, n)?.trimmed(tol))
}

/// Identical-step vMF walk sampler: x_k | x_{k-1} ~ M_p(x_{k-1}, κ).
#[derive(Debug, Clone)]
pub struct WalkSampler<T: Real> {
    step: CosineSampler<T>,
}

impl<T: Real> WalkSampler<T> {
    pub fn new(p: usize, kappa: T) -> Result<Self> {
        Ok(WalkSampler {
            step: CosineSampler::new(p, kappa)?,
        })
    }

    /// x_n starting from x_0 = mu.
    pub fn sample<R: Rng + ?Sized>(&self, mu: &UnitVector<T>, n: usize, rng: &mut R) -> UnitVector<T> {
        let mut x = mu.clone();
        for _ in 0..n {
            x = sample_around(&x, &self.step, rng).0;
        }
        x
    }
}

/// x_n of the vMF walk with step concentration κ; n = 0 returns μ.
pub fn sample_walk<T: Real, R: Rng + ?Sized>(
    p: usize,
    kappa: T,
    n: usize,
    mu: &UnitVector<T>,
    rng: &mut R,
) -> Result<UnitVector<T>> {
    if mu.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: mu.dim(),
        });
    }
    Ok(WalkSampler::new(p, kappa)?.sample(mu, n, rng))
}

/// Cosines μᵀx_n of `count` independent walks, over parallel seeded streams.
pub fn sample_walk_cosines<T: Real>(
    p: usize,
    kappa: T,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<T>> {
    let mu = UnitVector::north_pole(p)?;
    let sampler = WalkSampler::new(p, kappa)?;
    Ok(par_generate(seed, count, |rng: &mut StreamRng| {
        let x = sampler.sample(&mu, n, rng);
        x.coords()[p - 1].max(-T::one()).min(T::one())
    }))
}

/// Result of a grid monotonicity check of a zonal density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnimodalityReport<T> {
    /// Nondecreasing in t up to [`UNIMODALITY_TOL`], i.e. unimodal with mode μ.
    pub unimodal: bool,
    /// Most negative increment g(t_{i+1}) - g(t_i) on the grid (0 if none).
    pub worst_violation: T,
    /// Smallest density value on the grid; negative values expose truncation.
    pub min_density: T,
}

/// Evaluates the directional density on a uniform grid of `grid_size` points
/// in [-1, 1] and checks that it is nondecreasing in t.
pub fn check_unimodality<T: Real>(
    z: &ZonalCoefficients<T>,
    grid_size: usize,
) -> Result<UnimodalityReport<T>> {
    if grid_size < 2 {
        return Err(Error::invalid("grid_size", "need at least two points"));
    }
    let series = z.series()?;
    Ok(unimodality_on_grid(grid_size, |t| series.directional_unchecked(t)))
}

pub(crate) fn unimodality_on_grid<T: Real, F: Fn(T) -> T>(
    grid_size: usize,
    density: F,
) -> UnimodalityReport<T> {
    let step = T::c(2.0) / T::of(grid_size - 1);
    let values: Vec<T> = (0..grid_size)
        .map(|i| density((-T::one() + step * T::of(i)).min(T::one())))
        .collect();
    let worst = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(T::zero(), |m, d| m.min(d));
    let min_density = values.iter().fold(T::infinity(), |m, &v| m.min(v));
    UnimodalityReport {
        unimodal: worst >= -T::c(UNIMODALITY_TOL),
        worst_violation: worst,
        min_density,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{integrate_zonal, legendre_p, QuadratureRule};
    use crate::vmf::{fourier_coefficient, log_pdf_cosine, mean_resultant_length};

    fn vmf_z(p: usize, kappa: f64) -> ZonalCoefficients<f64> {
        ZonalCoefficients::vmf(p, kappa, DEFAULT_SERIES_TOL).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(ZonalCoefficients::new(3, vec![0.9f64, 0.1], 0.0).is_err());
        assert!(ZonalCoefficients::new(3, vec![1.0f64, 1.2], 0.0).is_err());
        assert!(ZonalCoefficients::new(1, vec![1.0f64], 0.0).is_err());
        assert!(ZonalCoefficients::new(3, Vec::<f64>::new(), 0.0).is_err());
        assert!(ZonalCoefficients::new(3, vec![1.0f64, 0.5], f64::NAN).is_err());
        assert!(ZonalCoefficients::unnormalized(3, vec![0.5f64, 0.4], 0.0).is_ok());
    }

    #[test]
    fn convolution_identities() {
        let a = vmf_z(3, 7.0);
        let uniform = ZonalCoefficients::uniform(3).unwrap();
        let u = convolve(&a, &uniform).unwrap();
        assert_eq!(u.coeffs(), &[1.0]);
        assert_eq!(u.tail(), 0.0);

        let delta = ZonalCoefficients::point_mass(3, a.order() + 10).unwrap();
        let d = convolve(&a, &delta).unwrap();
        assert_eq!(d.coeffs(), a.coeffs());
        assert_eq!(d.tail(), a.tail());

        let b = vmf_z(3, 20.0);
        let ab = convolve(&a, &b).unwrap();
        let ba = convolve(&b, &a).unwrap();
        assert_eq!(ab, ba);
        assert!(convolve(&a, &vmf_z(4, 1.0)).is_err());
    }

    #[test]
    fn walk_powers() {
        let step = vmf_z(3, 2.0);
        assert_eq!(walk_coefficients(&step, 1).unwrap(), step);
        let w0 = walk_coefficients(&step, 0).unwrap();
        assert!(w0.coeffs().iter().all(|&c| c == 1.0));
        assert!(w0.series().is_err());

        let w3 = walk_coefficients(&step, 3).unwrap();
        let f2 = fourier_coefficient(3, 2.0f64, 2).unwrap();
        assert!((w3.get(2).unwrap() - f2.powi(3)).abs() < 1e-15);

        for p in [3usize, 5] {
            let a = mean_resultant_length(p, 10.0f64).unwrap();
            let w = vmf_walk_coefficients(p, 10.0f64, 6, 1e-8).unwrap();
            assert!((w.get(1).unwrap() - a.powi(6)).abs() < 1e-14);
        }
    }

    #[test]
    fn heterogeneous_running_product() {
        let steps = vec![vmf_z(3, 5.0), vmf_z(3, 20.0), vmf_z(3, 50.0)];
        let prods = walk_coefficients_heterogeneous(&steps).unwrap();
        assert_eq!(prods.len(), 3);
        let rho: f64 = [5.0, 20.0, 50.0]
            .iter()
            .map(|&k| mean_resultant_length(3, k).unwrap())
            .product();
        assert!((prods[2].get(1).unwrap() - rho).abs() < 1e-14 * rho);
    }

    #[test]
    fn dispersion_grows_with_steps() {
        let step = vmf_z(4, 3.0);
        let mut prev = 1.0;
        for n in 1..30 {
            let r = walk_coefficients(&step, n).unwrap().get(1).unwrap();
            assert!(r <= prev);
            prev = r;
        }
    }

    #[test]
    fn uniform_density() {
        for p in 2..6 {
            let u = ZonalCoefficients::<f64>::uniform(p).unwrap();
            let want = 1.0 / sphere_area::<f64>(p);
            for t in [-1.0, -0.3, 0.0, 0.8, 1.0] {
                assert!((u.directional_pdf(t).unwrap() - want).abs() < 1e-15);
            }
        }
        let u3 = ZonalCoefficients::<f64>::uniform(3).unwrap();
        assert!((u3.projected_pdf(0.4).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn series_reproduces_vmf_density() {
        let z = vmf_z(3, 10.0);
        for i in 0..=40 {
            let t = -1.0 + i as f64 * 0.05;
            let want = log_pdf_cosine(3, 10.0, t).exp();
            assert!((z.directional_pdf(t).unwrap() - want).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        let rule = QuadratureRule::<f64>::gauss_legendre(512);
        for (p, kappa, n) in [(3usize, 10.0, 4usize), (4, 30.0, 2), (5, 3.0, 1), (2, 6.0, 3)] {
            let z = vmf_walk_coefficients(p, kappa, n, 1e-8).unwrap();
            let series = z.series().unwrap();
            let total = integrate_zonal(&rule, p, |t| series.directional(t).unwrap());
            assert!((total - 1.0).abs() < 1e-6, "p={p}");
            let projected = rule.integrate(-1.0, 1.0, |t| series.projected(t).unwrap());
            if p != 2 {
                assert!((projected - 1.0).abs() < 1e-6, "p={p}: {projected}");
            }
        }
    }

    #[test]
    fn halving_tolerance_is_stable() {
        let coarse = vmf_walk_coefficients(3, 50.0f64, 3, 1e-8).unwrap().series().unwrap();
        let fine = vmf_walk_coefficients(3, 50.0f64, 3, 5e-9).unwrap().series().unwrap();
        for i in 0..=100 {
            let t = -1.0 + i as f64 * 0.02;
            let d = coarse.directional(t).unwrap() - fine.directional(t).unwrap();
            assert!(d.abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn point_mass_does_not_converge() {
        let delta = ZonalCoefficients::<f64>::point_mass(3, 50).unwrap();
        assert!(matches!(delta.directional_pdf(0.5), Err(Error::NonConvergence { .. })));
        assert!(ZonalCoefficients::<f64>::from_fn(3, |_| 1.0, 1e-8, 500).is_err());
    }

    #[test]
    fn from_fn_matches_vmf_builder() {
        let direct = vmf_z(3, 15.0);
        let seq = crate::vmf::fourier_coefficients(3, 15.0f64, 400).unwrap();
        let generated = ZonalCoefficients::from_fn(3, |l| seq[l], 1e-8, 400).unwrap();
        assert_eq!(generated.order(), direct.order());
    }

    #[test]
    fn remainder_estimate_bounds_true_tail() {
        for (p, kappa) in [(3usize, 5.0f64), (3, 200.0), (5, 40.0), (2, 1.0)] {
            let z = vmf_z(p, kappa);
            let long = crate::vmf::fourier_coefficients(p, kappa, z.order() + 400).unwrap();
            let c = normalizing_constants::<f64>(p, z.order() + 400);
            let true_tail: f64 = (z.order() + 1..=z.order() + 400).map(|l| c[l] * long[l]).sum();
            assert!(true_tail <= z.tail() * (1.0 + 1e-9), "p={p} k={kappa}: {true_tail} > {}", z.tail());
            assert!(z.tail() <= DEFAULT_SERIES_TOL);
        }
    }

    #[test]
    fn unimodality_examples() {
        let step = vmf_z(3, 10.0);
        assert!(check_unimodality(&step, 401).unwrap().unimodal);
        for n in [2usize, 5, 10] {
            let w = walk_coefficients(&step, n).unwrap();
            let r = check_unimodality(&w, 401).unwrap();
            assert!(r.unimodal, "n={n}: {:?}", r);
        }
        let u = ZonalCoefficients::<f64>::uniform(3).unwrap();
        let r = check_unimodality(&u, 11).unwrap();
        assert!(r.unimodal && r.worst_violation == 0.0);
        // a bimodal (antipodal) law fails: f̂_ℓ nonzero for even ℓ only
        let bimodal = ZonalCoefficients::from_fn(
            3,
            |l| if l % 2 == 0 { crate::vmf::fourier_coefficient(3, 5.0, l).unwrap() } else { 0.0 },
            1e-8,
            2000,
        )
        .unwrap();
        assert!(bimodal.order() > 10);
        assert!(!check_unimodality(&bimodal, 401).unwrap().unimodal);
        assert!(check_unimodality(&ZonalCoefficients::<f64>::point_mass(3, 5).unwrap(), 11).is_err());
    }

    #[test]
    fn walk_sampler_moments() {
        let (p, kappa, n) = (3usize, 2.0f64, 3usize);
        let count = 1_000_000;
        let cosines = sample_walk_cosines(p, kappa, n, count, 99).unwrap();
        let z = walk_coefficients(&vmf_z(p, kappa), n).unwrap();
        for ell in 1..=5 {
            let vals: Vec<f64> = cosines.iter().map(|&t| legendre_p(ell, p, t).unwrap()).collect();
            let m = vals.iter().sum::<f64>() / count as f64;
            let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (count - 1) as f64;
            let want = z.get(ell).unwrap();
            assert!((m - want).abs() < 4.0 * (var / count as f64).sqrt(), "l={ell}: {m} vs {want}");
        }
    }

    #[test]
    fn sample_walk_zero_steps() {
        let mu = UnitVector::normalize(vec![1.0f64, 2.0, 2.0]).unwrap();
        let mut rng = crate::rng::stream_rng(1, 0);
        assert_eq!(sample_walk(3, 5.0, 0, &mu, &mut rng).unwrap(), mu);
        assert!(sample_walk(4, 5.0, 1, &mu, &mut rng).is_err());
    }
}
