//! The von Mises-Fisher law M_p(μ, κ) on S^{p-1}, with density
//! κ^{p/2-1} / ((2π)^{p/2} I_{p/2-1}(κ)) · exp(κ μᵀx).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{par_generate, StreamRng};
use crate::specfun::{self, bessel};
use crate::sphere::{sample_normal_subsphere, sample_uniform, UnitVector};
use crate::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmfParams<T> {
    mu: UnitVector<T>,
    kappa: T,
}

impl<T: Real> VmfParams<T> {
    pub fn new(mu: UnitVector<T>, kappa: T) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(VmfParams { mu, kappa })
    }

    pub fn mu(&self) -> &UnitVector<T> {
        &self.mu
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }
}

fn check_kappa<T: Real>(kappa: T) -> Result<()> {
    if !(kappa >= T::zero()) || !kappa.is_finite() {
        return Err(Error::domain("kappa", kappa.as_f64()));
    }
    Ok(())
}

fn check_p(p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::invalid("p", format!("dimension must be >= 2, got {p}")));
    }
    Ok(())
}

fn order<T: Real>(p: usize) -> T {
    T::of(p) * T::c(0.5) - T::one()
}

/// ln of the normalizer κ^{p/2-1} / ((2π)^{p/2} I_{p/2-1}(κ)); at κ = 0 this
/// is -ln ω_{p-1}.
pub fn log_normalizer<T: Real>(p: usize, kappa: T) -> T {
    if kappa == T::zero() {
        return -specfun::sphere_area::<T>(p).ln();
    }
    let nu = order::<T>(p);
    let half_p = T::of(p) * T::c(0.5);
    if kappa < T::c(1e-3) {
        // I_ν(κ) = (κ/2)^ν/Γ(ν+1) · (1 + κ²/(4(ν+1)) + …): cancel κ^ν analytically
        let q = kappa * kappa * T::c(0.25);
        let series = T::one() + q / (nu + T::one()) * (T::one() + q / (T::c(2.0) * (nu + T::c(2.0))));
        return nu * T::c(2.0).ln() + specfun::ln_gamma(nu + T::one())
            - half_p * (T::c(2.0) * T::PI()).ln()
            - series.ln();
    }
    nu * kappa.ln() - half_p * (T::c(2.0) * T::PI()).ln() - bessel::log_bessel_i_unchecked(nu, kappa)
}

/// Log density as a function of the cosine t = μᵀx.
pub fn log_pdf_cosine<T: Real>(p: usize, kappa: T, t: T) -> T {
    log_normalizer(p, kappa) + kappa * t
}

pub fn log_pdf<T: Real>(x: &UnitVector<T>, params: &VmfParams<T>) -> Result<T> {
    let t = x.cosine(&params.mu)?;
    Ok(log_pdf_cosine(params.dim(), params.kappa, t))
}

/// A_p(κ) = I_{p/2}(κ) / I_{p/2-1}(κ), the mean resultant length.
pub fn mean_resultant_length<T: Real>(p: usize, kappa: T) -> Result<T> {
    check_p(p)?;
    check_kappa(kappa)?;
    if kappa == T::zero() {
        return Ok(T::zero());
    }
    Ok(bessel::ratio_sequence_unchecked(order::<T>(p), kappa, 1)[1])
}

/// A_p'(κ) = 1 - A² - (p-1)A/κ.
pub fn mean_resultant_length_derivative<T: Real>(p: usize, kappa: T) -> Result<T> {
    let a = mean_resultant_length(p, kappa)?;
    if kappa < T::c(1e-6) {
        return Ok(T::one() / T::of(p));
    }
    Ok(T::one() - a * a - T::of(p - 1) * a / kappa)
}

/// A_p^{-1}(ρ) by Newton's method safeguarded with bisection.
pub fn concentration_from_rho<T: Real>(p: usize, rho: T) -> Result<T> {
    check_p(p)?;
    if !(rho >= T::zero() && rho < T::one()) {
        return Err(Error::domain("rho", rho.as_f64()));
    }
    if rho == T::zero() {
        return Ok(T::zero());
    }
    let pf = T::of(p);
    let k0 = rho * (pf - rho * rho) / (T::one() - rho * rho);
    let mut lo = T::zero();
    let mut hi = T::c(2.0) * k0 + T::c(50.0);
    while mean_resultant_length(p, hi)? < rho {
        lo = hi;
        hi = hi * T::c(2.0);
    }
    let tol = T::c(1e-12).max(T::c(8.0) * T::epsilon());
    let mut kappa = k0.max(lo).min(hi);
    for _ in 0..200 {
        let a = mean_resultant_length(p, kappa)?;
        let f = a - rho;
        if f.abs() <= tol {
            return Ok(kappa);
        }
        if f > T::zero() {
            hi = kappa;
        } else {
            lo = kappa;
        }
        let slope = mean_resultant_length_derivative(p, kappa)?;
        let newton = kappa - f / slope;
        kappa = if slope > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) * T::c(0.5)
        };
        if hi - lo <= T::epsilon() * hi {
            return Ok(kappa);
        }
    }
    Ok(kappa)
}

/// f̂_ℓ(κ) = E[P_ℓ(μᵀx)] = I_{ℓ+ν}(κ)/I_ν(κ), ν = p/2 - 1.
pub fn fourier_coefficient<T: Real>(p: usize, kappa: T, ell: usize) -> Result<T> {
    Ok(fourier_coefficients(p, kappa, ell)?[ell])
}

/// [f̂_0(κ), …, f̂_L(κ)].
pub fn fourier_coefficients<T: Real>(p: usize, kappa: T, ell_max: usize) -> Result<Vec<T>> {
    check_p(p)?;
    check_kappa(kappa)?;
    if kappa == T::zero() {
        let mut out = vec![T::zero(); ell_max + 1];
        out[0] = T::one();
        return Ok(out);
    }
    Ok(bessel::ratio_sequence_unchecked(order::<T>(p), kappa, ell_max))
}

/// Exact sampler for the cosine t = μᵀx of M_p(μ, κ), whose density is
/// proportional to e^{κt}(1-t²)^{(p-3)/2}. Wood's rejection scheme with a
/// Beta((p-1)/2, (p-1)/2) proposal.
#[derive(Debug, Clone)]
pub struct CosineSampler<T: Real> {
    p: usize,
    kappa: T,
    b: T,
    x0: T,
    ln_one_minus_x0_sq: T,
    beta: T::BetaDist,
}

/// A sampled cosine, carrying 1 - t separately since t rounds to 1 for large κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineDraw<T> {
    pub t: T,
    pub one_minus_t: T,
    /// Proposals used, ≥ 1.
    pub tries: u32,
}

impl<T: Real> CosineSampler<T> {
    pub fn new(p: usize, kappa: T) -> Result<Self> {
        check_p(p)?;
        check_kappa(kappa)?;
        let pm1 = T::of(p - 1);
        let b = pm1 / (T::c(2.0) * kappa + (T::c(4.0) * kappa * kappa + pm1 * pm1).sqrt());
        let x0 = (T::one() - b) / (T::one() + b);
        let ln_one_minus_x0_sq = (T::c(4.0) * b / ((T::one() + b) * (T::one() + b))).ln();
        let half = pm1 * T::c(0.5);
        let beta = T::beta_distribution(half, half)
            .ok_or_else(|| Error::invalid("p", "beta proposal"))?;
        Ok(CosineSampler {
            p,
            kappa,
            b,
            x0,
            ln_one_minus_x0_sq,
            beta,
        })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CosineDraw<T> {
        use rand_distr::Distribution;
        let one = T::one();
        let two = T::c(2.0);
        let pm1 = T::of(self.p - 1);
        let b = self.b;
        let mut tries = 0;
        loop {
            tries += 1;
            let z = self.beta.sample(rng);
            let denom = one - (one - b) * z;
            let one_minus_w = two * b * z / denom;
            let w = (one - (one + b) * z) / denom;
            // 1 - x0·w = 2b/(1+b) + x0(1-w), without cancellation
            let one_minus_x0w = two * b / (one + b) + self.x0 * one_minus_w;
            let lhs = self.kappa * (two * b / (one + b) - one_minus_w)
                + pm1 * (one_minus_x0w.ln() - self.ln_one_minus_x0_sq);
            let u = T::open01(rng);
            if lhs >= u.ln() {
                return CosineDraw {
                    t: w.max(-one).min(one),
                    one_minus_t: one_minus_w.max(T::zero()).min(two),
                    tries,
                };
            }
        }
    }
}

/// One draw from M_p(mu, κ) given a prepared cosine sampler for κ.
pub fn sample_around<T: Real, R: Rng + ?Sized>(
    mu: &UnitVector<T>,
    sampler: &CosineSampler<T>,
    rng: &mut R,
) -> (UnitVector<T>, u32) {
    if sampler.kappa == T::zero() {
        return (sample_uniform(mu.dim(), rng), 1);
    }
    let d = sampler.draw(rng);
    let xi = sample_normal_subsphere(mu, rng);
    let s = (d.one_minus_t * (T::c(2.0) - d.one_minus_t)).max(T::zero()).sqrt();
    (mu.combine(d.t, s, &xi), d.tries)
}

/// n i.i.d. draws using the caller's generator.
pub fn sample<T: Real, R: Rng + ?Sized>(
    params: &VmfParams<T>,
    n: usize,
    rng: &mut R,
) -> Result<Vec<UnitVector<T>>> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one draw"));
    }
    let sampler = CosineSampler::new(params.dim(), params.kappa)?;
    let mut tries = 0u64;
    let out = (0..n)
        .map(|_| {
            let (x, k) = sample_around(&params.mu, &sampler, rng);
            tries += k as u64;
            x
        })
        .collect();
    log::debug!(
        "vmf sampler p={} kappa={}: acceptance rate {:.4}",
        params.dim(),
        params.kappa,
        n as f64 / tries as f64
    );
    Ok(out)
}

/// n draws split over parallel seeded streams; deterministic for a given seed.
pub fn sample_par<T: Real>(params: &VmfParams<T>, n: usize, seed: u64) -> Result<Vec<UnitVector<T>>> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one draw"));
    }
    let sampler = CosineSampler::new(params.dim(), params.kappa)?;
    Ok(par_generate(seed, n, |rng: &mut StreamRng| {
        sample_around(&params.mu, &sampler, rng).0
    }))
}
