//! Compound Cox multiple scattering on S^{p-1}.
//!
//! A direction starts at μ and undergoes N_t isotropic scattering events,
//! each drawn from a zonal step law. N_t is Poisson (deterministic intensity)
//! or negative binomial (Gamma intensity). The law of x_t is a mixture of an
//! atom at μ with mass P₀ = P(N_t = 0) and a continuous part whose Legendre
//! moments are ĥ_ℓ = G(f̂_ℓ) - G(0), G being the probability generating
//! function of N_t. The atom is always reported on its own.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{par_generate, StreamRng};
use crate::specfun::{ln_gamma, normalizing_constants, sphere_area, QuadratureRule};
use crate::sphere::UnitVector;
use crate::vmf::{self, sample_around, CosineSampler};
use crate::walk::{self, projection_factor, UnimodalityReport, WalkSampler, ZonalCoefficients, ZonalSeries};
use crate::Real;

/// Default bound on the omitted count probability.
pub const DEFAULT_WEIGHT_TAIL: f64 = 1e-12;

/// Default omitted weight of the asymptotic mixture.
pub const DEFAULT_MIXTURE_TOL: f64 = 1e-10;

/// Below this κ/N* the vMF mixture approximation is not trusted.
pub const MIXTURE_VALIDITY_RATIO: f64 = 10.0;

const MAX_COUNT: usize = 10_000_000;

/// Law of the number of scattering events N_t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountingModel<T> {
    Poisson { lambda_t: T },
    NegativeBinomial { r_t: T, q: T },
}

/// Weights P(N = 0..=n_max) and a bound on the omitted mass.
#[derive(Debug, Clone, PartialEq)]
pub struct CountWeights<T> {
    pub weights: Vec<T>,
    pub tail: T,
}

impl<T: Real> CountingModel<T> {
    pub fn poisson(lambda_t: T) -> Result<Self> {
        let m = CountingModel::Poisson { lambda_t };
        m.validate()?;
        Ok(m)
    }

    pub fn negative_binomial(r_t: T, q: T) -> Result<Self> {
        let m = CountingModel::NegativeBinomial { r_t, q };
        m.validate()?;
        Ok(m)
    }

    /// Gamma intensity with shape ξ_t and rate θ: r_t = ξ_t, q = 1/(θ+1).
    pub fn from_gamma_cox(xi_t: T, theta: T) -> Result<Self> {
        if !(theta > T::zero()) || !theta.is_finite() {
            return Err(Error::domain("theta", theta.as_f64()));
        }
        Self::negative_binomial(xi_t, T::one() / (theta + T::one()))
    }

    /// (ξ_t, θ) for a negative binomial model.
    pub fn gamma_cox_params(&self) -> Option<(T, T)> {
        match *self {
            CountingModel::NegativeBinomial { r_t, q } => Some((r_t, (T::one() - q) / q)),
            CountingModel::Poisson { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CountingModel::Poisson { lambda_t } => {
                if !(lambda_t > T::zero()) || !lambda_t.is_finite() {
                    return Err(Error::domain("lambda_t", lambda_t.as_f64()));
                }
            }
            CountingModel::NegativeBinomial { r_t, q } => {
                if !(r_t > T::zero()) || !r_t.is_finite() {
                    return Err(Error::domain("r_t", r_t.as_f64()));
                }
                if !(q > T::zero() && q < T::one()) {
                    return Err(Error::domain("q", q.as_f64()));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> T {
        match *self {
            CountingModel::Poisson { lambda_t } => lambda_t,
            CountingModel::NegativeBinomial { r_t, q } => r_t * q / (T::one() - q),
        }
    }

    /// ln P(N = n), evaluated without forming factorials.
    pub fn ln_weight(&self, n: usize) -> T {
        let nt = T::of(n);
        match *self {
            CountingModel::Poisson { lambda_t } => {
                let head = if n == 0 { T::zero() } else { nt * lambda_t.ln() };
                head - lambda_t - ln_gamma(nt + T::one())
            }
            CountingModel::NegativeBinomial { r_t, q } => {
                let head = if n == 0 { T::zero() } else { nt * q.ln() };
                ln_gamma(nt + r_t) - ln_gamma(r_t) - ln_gamma(nt + T::one())
                    + r_t * (-q).ln_1p()
                    + head
            }
        }
    }

    pub fn weight(&self, n: usize) -> T {
        self.ln_weight(n).exp()
    }

    /// [P(N=0), …, P(N=n_max)].
    pub fn count_weights(&self, n_max: usize) -> Vec<T> {
        (0..=n_max).map(|n| self.weight(n)).collect()
    }

    /// Weights up to the first n_max whose omitted tail is certified below `tail_tol`.
    ///
    /// Past the mode the ratio P(n+1)/P(n) is bounded by R_n (λ/(n+1), or
    /// q·max(1, (n+r)/(n+1))), so the tail is at most P(n)·R_n/(1-R_n).
    pub fn adaptive_weights(&self, tail_tol: T) -> Result<CountWeights<T>> {
        self.validate()?;
        let mut weights = Vec::new();
        for n in 0..MAX_COUNT {
            let w = self.weight(n);
            weights.push(w);
            let ratio = self.ratio_bound(n);
            if ratio < T::one() {
                let tail = w * ratio / (T::one() - ratio);
                if tail < tail_tol {
                    return Ok(CountWeights { weights, tail });
                }
            }
        }
        Err(Error::NonConvergence {
            what: "counting weights",
            order: MAX_COUNT,
            tail: f64::INFINITY,
        })
    }

    /// Upper bound on P(m+1)/P(m) for all m ≥ n.
    fn ratio_bound(&self, n: usize) -> T {
        let nt = T::of(n);
        match *self {
            CountingModel::Poisson { lambda_t } => lambda_t / (nt + T::one()),
            CountingModel::NegativeBinomial { r_t, q } => {
                q * T::one().max((nt + r_t) / (nt + T::one()))
            }
        }
    }

    /// Probability generating function E[z^N] for |z| ≤ 1.
    pub fn pgf(&self, z: T) -> Result<T> {
        check_z(z)?;
        Ok(self.pgf_unchecked(z))
    }

    fn pgf_unchecked(&self, z: T) -> T {
        match *self {
            CountingModel::Poisson { lambda_t } => (-lambda_t * (T::one() - z)).exp(),
            CountingModel::NegativeBinomial { r_t, q } => {
                (r_t * ((-q).ln_1p() - (-q * z).ln_1p())).exp()
            }
        }
    }

    /// G(z) - G(0), accurate when z is tiny.
    pub fn pgf_increment(&self, z: T) -> Result<T> {
        check_z(z)?;
        Ok(self.pgf_increment_unchecked(z))
    }

    fn pgf_increment_unchecked(&self, z: T) -> T {
        match *self {
            CountingModel::Poisson { lambda_t } => (-lambda_t).exp() * (lambda_t * z).exp_m1(),
            CountingModel::NegativeBinomial { r_t, q } => {
                (r_t * (-q).ln_1p()).exp() * (-r_t * (-q * z).ln_1p()).exp_m1()
            }
        }
    }

    /// P(N = 0).
    pub fn p0(&self) -> T {
        self.pgf_unchecked(T::zero())
    }

    /// One draw of N; the negative binomial goes through its Gamma-Poisson mixture.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            CountingModel::Poisson { lambda_t } => T::poisson(lambda_t, rng),
            CountingModel::NegativeBinomial { r_t, q } => {
                let intensity = T::gamma(r_t, q / (T::one() - q), rng);
                T::poisson(intensity, rng)
            }
        }
    }
}

fn check_z<T: Real>(z: T) -> Result<()> {
    if !(z.abs() <= T::one()) {
        return Err(Error::domain("z", z.as_f64()));
    }
    Ok(())
}

/// Law of a single scattering event.
#[derive(Debug, Clone, PartialEq)]
pub enum StepLaw<T> {
    Vmf { kappa: T },
    Zonal(ZonalCoefficients<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringModel<T> {
    mu: UnitVector<T>,
    step: StepLaw<T>,
    counting: CountingModel<T>,
}

impl<T: Real> ScatteringModel<T> {
    /// vMF steps with concentration κ.
    pub fn new(mu: UnitVector<T>, kappa: T, counting: CountingModel<T>) -> Result<Self> {
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(Error::domain("kappa", kappa.as_f64()));
        }
        counting.validate()?;
        Ok(ScatteringModel {
            mu,
            step: StepLaw::Vmf { kappa },
            counting,
        })
    }

    /// Generic zonal steps; supports the analytic operations but not sampling.
    pub fn with_step(mu: UnitVector<T>, step: ZonalCoefficients<T>, counting: CountingModel<T>) -> Result<Self> {
        if step.p() != mu.dim() {
            return Err(Error::DimensionMismatch {
                expected: mu.dim(),
                found: step.p(),
            });
        }
        counting.validate()?;
        Ok(ScatteringModel {
            mu,
            step: StepLaw::Zonal(step),
            counting,
        })
    }

    pub fn p(&self) -> usize {
        self.mu.dim()
    }

    pub fn mu(&self) -> &UnitVector<T> {
        &self.mu
    }

    pub fn step(&self) -> &StepLaw<T> {
        &self.step
    }

    pub fn counting(&self) -> &CountingModel<T> {
        &self.counting
    }

    pub fn step_kappa(&self) -> Option<T> {
        match self.step {
            StepLaw::Vmf { kappa } => Some(kappa),
            StepLaw::Zonal(_) => None,
        }
    }

    /// Mass of the atom at μ.
    pub fn direct_path_probability(&self) -> T {
        self.counting.p0()
    }

    fn step_moments(&self, ell_max: usize) -> Result<Vec<T>> {
        match &self.step {
            StepLaw::Vmf { kappa } => vmf::fourier_coefficients(self.p(), *kappa, ell_max),
            StepLaw::Zonal(z) => {
                if ell_max > z.order() {
                    return Err(Error::invalid(
                        "ell_max",
                        format!("step coefficients stop at order {}", z.order()),
                    ));
                }
                Ok(z.coeffs()[..=ell_max].to_vec())
            }
        }
    }

    /// E[P_ℓ(μᵀx_t)] = G(f̂_ℓ) for ℓ = 0..=ell_max.
    pub fn legendre_moments(&self, ell_max: usize) -> Result<Vec<T>> {
        Ok(self
            .step_moments(ell_max)?
            .into_iter()
            .map(|f| self.counting.pgf_unchecked(f.max(-T::one()).min(T::one())))
            .collect())
    }

    /// ĥ_ℓ = G(f̂_ℓ) - G(0) for ℓ = 0..=ell_max, the moments of the continuous part.
    pub fn continuous_moments(&self, ell_max: usize) -> Result<Vec<T>> {
        Ok(self
            .step_moments(ell_max)?
            .into_iter()
            .map(|f| self.counting.pgf_increment_unchecked(f.max(-T::one()).min(T::one())))
            .collect())
    }

    /// Continuous part truncated so its series remainder is below `tol`.
    pub fn continuous_part(&self, tol: T) -> Result<ContinuousPart<T>> {
        let step = match &self.step {
            StepLaw::Vmf { kappa } => ZonalCoefficients::vmf(self.p(), *kappa, tol)?,
            StepLaw::Zonal(z) => z.clone(),
        };
        let p0 = self.counting.p0();
        // |G(f) - G(0)| ≤ (1 - P₀)|f| on [-1, 1]
        let counting = self.counting;
        let coeffs = step
            .map_unnormalized(
                |f| counting.pgf_increment_unchecked(f.max(-T::one()).min(T::one())),
                T::one() - p0,
            )?
            .trimmed(tol);
        let series = coeffs.series_with_tol(tol.max(T::c(walk::DEFAULT_SERIES_TOL)))?;
        Ok(ContinuousPart { coeffs, series, p0 })
    }

    /// Continuous part cut at a fixed order, with the remainder estimated from
    /// the last terms. Nearby models cut at the same order give densities that
    /// vary smoothly with the parameters, as finite differences need.
    pub fn continuous_part_at_order(&self, order: usize, tol: T) -> Result<ContinuousPart<T>> {
        let p = self.p();
        let h = self.continuous_moments(order)?;
        let c = normalizing_constants::<T>(p, order);
        let tail = walk::pair_remainder(&h, &c).unwrap_or(T::infinity());
        let coeffs = ZonalCoefficients::unnormalized(p, h, tail)?;
        let series = coeffs.series_with_tol(tol)?;
        Ok(ContinuousPart {
            coeffs,
            series,
            p0: self.counting.p0(),
        })
    }

    /// Atom mass and continuous density at cosine t, using the default tolerance.
    pub fn scattering_pdf(&self, t: T) -> Result<ScatteringPdf<T>> {
        self.continuous_part(T::c(walk::DEFAULT_SERIES_TOL))?.pdf(t)
    }

    fn walk_sampler(&self) -> Result<WalkSampler<T>> {
        match self.step {
            StepLaw::Vmf { kappa } => WalkSampler::new(self.p(), kappa),
            StepLaw::Zonal(_) => Err(Error::invalid("step", "sampling needs a vMF step law")),
        }
    }

    /// One realisation of x_t and the number of events it went through.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ProcessDraw<T>> {
        let sampler = self.walk_sampler()?;
        Ok(self.draw_with(&sampler, rng))
    }

    fn draw_with<R: Rng + ?Sized>(&self, sampler: &WalkSampler<T>, rng: &mut R) -> ProcessDraw<T> {
        let n = self.counting.sample(rng);
        let x = sampler.sample(&self.mu, n as usize, rng);
        ProcessDraw::new(&self.mu, x, n)
    }

    /// `count` draws over parallel seeded streams.
    pub fn sample_process(&self, count: usize, seed: u64) -> Result<Vec<ProcessDraw<T>>> {
        if count == 0 {
            return Err(Error::invalid("count", "need at least one draw"));
        }
        let sampler = self.walk_sampler()?;
        Ok(par_generate(seed, count, |rng: &mut StreamRng| self.draw_with(&sampler, rng)))
    }

    /// vMF mixture approximation of the continuous part.
    pub fn asymptotic_mixture(&self, weight_tol: T) -> Result<AsymptoticMixture<T>> {
        self.step_kappa()
            .ok_or_else(|| Error::invalid("step", "the asymptotic mixture needs a vMF step law"))?;
        if !(weight_tol > T::zero() && weight_tol < T::one()) {
            return Err(Error::domain("weight_tol", weight_tol.as_f64()));
        }
        let cw = self.counting.adaptive_weights(weight_tol)?;
        self.asymptotic_mixture_with_events(cw.weights.len() - 1)
    }

    /// Mixture over n = 1..=max_events, whatever weight that leaves out.
    pub fn asymptotic_mixture_with_events(&self, max_events: usize) -> Result<AsymptoticMixture<T>> {
        let kappa = self
            .step_kappa()
            .ok_or_else(|| Error::invalid("step", "the asymptotic mixture needs a vMF step law"))?;
        let components = (1..=max_events.max(1))
            .map(|n| MixtureComponent::new(n, self.counting.weight(n), kappa))
            .collect();
        AsymptoticMixture::from_components(self.p(), kappa, self.counting.p0(), components)
    }
}

/// A simulated direction, its cosine to μ and the number of scattering events.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessDraw<T> {
    pub x: UnitVector<T>,
    /// μᵀx, exactly 1 on the direct path.
    pub cosine: T,
    pub n_events: u64,
}

impl<T: Real> ProcessDraw<T> {
    fn new(mu: &UnitVector<T>, x: UnitVector<T>, n_events: u64) -> Self {
        let cosine = if n_events == 0 {
            T::one()
        } else {
            mu.cosine(&x).unwrap_or(T::one())
        };
        ProcessDraw { x, cosine, n_events }
    }

    pub fn is_direct(&self) -> bool {
        self.n_events == 0
    }
}

/// The atom at μ and the continuous density at one cosine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringPdf<T> {
    pub mass: T,
    pub density: T,
}

/// Moments ĥ_ℓ of the continuous part with its evaluator and P₀.
#[derive(Debug, Clone)]
pub struct ContinuousPart<T> {
    coeffs: ZonalCoefficients<T>,
    series: ZonalSeries<T>,
    p0: T,
}

impl<T: Real> ContinuousPart<T> {
    pub fn coefficients(&self) -> &ZonalCoefficients<T> {
        &self.coeffs
    }

    pub fn mass(&self) -> T {
        self.p0
    }

    /// Unnormalized continuous density (total mass 1 - P₀) at cosine t.
    pub fn density(&self, t: T) -> Result<T> {
        self.series.directional(t)
    }

    /// ln of [`Self::density`]; fails on non-positive values from truncation.
    pub fn log_density(&self, t: T) -> Result<T> {
        let d = self.density(t)?;
        if !(d > T::zero()) {
            return Err(Error::NonPositiveDensity {
                t: t.as_f64(),
                density: d.as_f64(),
            });
        }
        Ok(d.ln())
    }

    /// Continuous density of the cosine μᵀx on [-1, 1].
    pub fn projected_density(&self, t: T) -> Result<T> {
        self.series.projected(t)
    }

    pub fn pdf(&self, t: T) -> Result<ScatteringPdf<T>> {
        Ok(ScatteringPdf {
            mass: self.p0,
            density: self.density(t)?,
        })
    }

    /// Grid monotonicity check of the continuous density.
    pub fn check_unimodality(&self, grid_size: usize) -> Result<UnimodalityReport<T>> {
        walk::check_unimodality(&self.coeffs, grid_size)
    }
}

/// Component n of the mixture: weight P(N=n) and concentration κ̃_n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent<T> {
    pub n: usize,
    pub weight: T,
    pub kappa: T,
}

impl<T: Real> MixtureComponent<T> {
    fn new(n: usize, weight: T, kappa: T) -> Self {
        MixtureComponent {
            n,
            weight,
            kappa: equivalent_concentration(kappa, n),
        }
    }
}

/// κ̃_n = (κ - 1/2)/n + 1/2, the concentration of the vMF law matching an
/// n-step vMF(κ) walk to third order in 1/κ.
pub fn equivalent_concentration<T: Real>(kappa: T, n: usize) -> T {
    let half = T::c(0.5);
    (kappa - half) / T::of(n) + half
}

/// Σ_n w_n M_p(μ, κ̃_n): the high-concentration approximation of a walk or
/// of the continuous part of a scattering law.
#[derive(Debug, Clone)]
pub struct AsymptoticMixture<T: Real> {
    p: usize,
    kappa: T,
    p0: T,
    components: Vec<MixtureComponent<T>>,
    log_norms: Vec<T>,
    samplers: Vec<CosineSampler<T>>,
}

impl<T: Real> AsymptoticMixture<T> {
    /// Single component approximating the n-step walk with step concentration κ.
    pub fn walk(p: usize, kappa: T, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "the zero-step walk is a point mass"));
        }
        Self::from_components(p, kappa, T::zero(), vec![MixtureComponent::new(n, T::one(), kappa)])
    }

    fn from_components(p: usize, kappa: T, p0: T, components: Vec<MixtureComponent<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("components", "empty mixture"));
        }
        let log_norms = components.iter().map(|c| vmf::log_normalizer(p, c.kappa)).collect();
        let samplers = components
            .iter()
            .map(|c| CosineSampler::new(p, c.kappa))
            .collect::<Result<Vec<_>>>()?;
        let m = AsymptoticMixture {
            p,
            kappa,
            p0,
            components,
            log_norms,
            samplers,
        };
        let ratio = m.validity_ratio();
        if ratio < T::c(MIXTURE_VALIDITY_RATIO) {
            log::debug!(
                "asymptotic mixture: kappa/N* = {ratio} < {MIXTURE_VALIDITY_RATIO}; the vMF approximation is unreliable"
            );
        }
        Ok(m)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn components(&self) -> &[MixtureComponent<T>] {
        &self.components
    }

    /// Mass of the atom at μ (not part of the mixture).
    pub fn mass(&self) -> T {
        self.p0
    }

    /// Largest retained event count N*.
    pub fn max_events(&self) -> usize {
        self.components.last().map_or(0, |c| c.n)
    }

    /// κ/N*; the approximation is meant for values of 10 and above.
    pub fn validity_ratio(&self) -> T {
        self.kappa / T::of(self.max_events())
    }

    /// Total weight of the retained components.
    pub fn total_weight(&self) -> T {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// ln Σ w_n vMF(t; κ̃_n) at cosine t.
    pub fn log_density(&self, t: T) -> Result<T> {
        if !(t.abs() <= T::one()) {
            return Err(Error::domain("t", t.as_f64()));
        }
        Ok(self.log_density_unchecked(t))
    }

    fn log_density_unchecked(&self, t: T) -> T {
        let terms = self
            .components
            .iter()
            .zip(&self.log_norms)
            .map(|(c, &ln_c)| c.weight.ln() + ln_c + c.kappa * t);
        log_sum_exp(terms)
    }

    pub fn density(&self, t: T) -> Result<T> {
        Ok(self.log_density(t)?.exp())
    }

    pub fn projected_density(&self, t: T) -> Result<T> {
        Ok(projection_factor(self.p, t) * self.density(t)?)
    }

    /// Σ w_n f̂_ℓ(κ̃_n) for ℓ = 0..=ell_max.
    pub fn coefficients(&self, ell_max: usize) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); ell_max + 1];
        for c in &self.components {
            let f = vmf::fourier_coefficients(self.p, c.kappa, ell_max)?;
            for (o, fl) in out.iter_mut().zip(f) {
                *o = *o + c.weight * fl;
            }
        }
        Ok(out)
    }

    /// Cosine draw from M_p(μ, κ̃_n), reusing the prepared sampler when n is a component.
    pub fn sample_cosine_given_events<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<T> {
        if n == 0 {
            return Err(Error::invalid("n", "no scattering event means the direct path"));
        }
        Ok(match self.components.iter().position(|c| c.n == n) {
            Some(k) => self.samplers[k].draw(rng).t,
            None => CosineSampler::new(self.p, equivalent_concentration(self.kappa, n))?.draw(rng).t,
        })
    }

    /// Draws from the mixture renormalized to a probability law, with the component index n.
    pub fn sample<R: Rng + ?Sized>(&self, mu: &UnitVector<T>, rng: &mut R) -> (UnitVector<T>, usize) {
        let total = self.total_weight();
        let mut u = T::open01(rng) * total;
        let mut k = self.components.len() - 1;
        for (i, c) in self.components.iter().enumerate() {
            if u < c.weight {
                k = i;
                break;
            }
            u = u - c.weight;
        }
        (sample_around(mu, &self.samplers[k], rng).0, self.components[k].n)
    }

    /// Quantiles t with P(μᵀx ≤ t) = u under the renormalized mixture, from a tabulated CDF.
    pub fn cosine_quantiles(&self, probs: &[T]) -> Result<Vec<T>> {
        if let Some(&bad) = probs.iter().find(|&&u| !(u >= T::zero() && u <= T::one())) {
            return Err(Error::domain("probability", bad.as_f64()));
        }
        let table = CosineCdf::new(self.p, |t| self.log_density_unchecked(t));
        Ok(probs.iter().map(|&u| table.upper_quantile(T::one() - u)).collect())
    }
}

fn log_sum_exp<T: Real, I: Iterator<Item = T> + Clone>(terms: I) -> T {
    let max = terms.clone().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    max + terms.map(|v| (v - max).exp()).sum::<T>().ln()
}

/// CDF of the cosine for a zonal density, tabulated in the polar angle θ
/// from μ on a grid refined quadratically toward θ = 0.
struct CosineCdf<T, F> {
    p: usize,
    log_density: F,
    breaks: Vec<T>,
    cdf: Vec<T>,
    rule: QuadratureRule<T>,
    shift: T,
}

const CDF_PIECES: usize = 2000;

impl<T: Real, F: Fn(T) -> T> CosineCdf<T, F> {
    fn new(p: usize, log_density: F) -> Self {
        let breaks: Vec<T> = (0..=CDF_PIECES)
            .map(|i| {
                let s = T::of(i) / T::of(CDF_PIECES);
                T::PI() * s * s
            })
            .collect();
        let shift = log_density(T::one());
        let rule = QuadratureRule::gauss_legendre(8);
        let mut table = CosineCdf {
            p,
            log_density,
            breaks,
            cdf: Vec::with_capacity(CDF_PIECES + 1),
            rule,
            shift,
        };
        let mut acc = T::zero();
        table.cdf.push(acc);
        for i in 0..CDF_PIECES {
            acc = acc + table.piece(table.breaks[i], table.breaks[i + 1]);
            table.cdf.push(acc);
        }
        table
    }

    /// Angular density, scaled by the density at the mode to avoid overflow.
    fn angular(&self, theta: T) -> T {
        let area = sphere_area::<T>(self.p - 1);
        area * ((self.log_density)(theta.cos()) - self.shift).exp() * theta.sin().powi(self.p as i32 - 2)
    }

    fn piece(&self, a: T, b: T) -> T {
        self.rule.integrate(a, b, |th| self.angular(th))
    }

    /// Cosine t with P(μᵀx ≥ t) = u.
    fn upper_quantile(&self, u: T) -> T {
        let total = self.cdf[CDF_PIECES];
        let target = u * total;
        if u <= T::zero() {
            return T::one();
        }
        if u >= T::one() {
            return -T::one();
        }
        let i = match self.cdf.iter().position(|&c| c > target) {
            Some(j) => j - 1,
            None => CDF_PIECES - 1,
        };
        let (mut lo, mut hi) = (self.breaks[i], self.breaks[i + 1]);
        let base = self.cdf[i];
        let span = self.cdf[i + 1] - base;
        let mut theta = if span > T::zero() {
            lo + (hi - lo) * (target - base) / span
        } else {
            lo
        };
        for _ in 0..30 {
            let f = base + self.piece(self.breaks[i], theta) - target;
            if f > T::zero() {
                hi = theta;
            } else {
                lo = theta;
            }
            let d = self.angular(theta);
            let mut next = if d > T::zero() { theta - f / d } else { (lo + hi) * T::c(0.5) };
            if !(next > lo && next < hi) {
                next = (lo + hi) * T::c(0.5);
            }
            if (next - theta).abs() <= T::epsilon() * T::c(4.0) * theta.max(T::min_positive_value()) {
                theta = next;
                break;
            }
            theta = next;
        }
        theta.cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{integrate_zonal, legendre_p};
    use crate::vmf::fourier_coefficient;

    fn north() -> UnitVector<f64> {
        UnitVector::north_pole(3).unwrap()
    }

    #[test]
    fn count_weight_examples() {
        let p = CountingModel::poisson(2.0f64).unwrap();
        assert!((p.weight(0) - 0.1353352832366127).abs() < 1e-15);
        let g = CountingModel::from_gamma_cox(1.0f64, 1.0).unwrap();
        for (n, w) in g.count_weights(6).iter().enumerate() {
            assert!((w - 0.5f64.powi(n as i32 + 1)).abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn adaptive_weights_sum_to_one() {
        for m in [
            CountingModel::poisson(0.3f64).unwrap(),
            CountingModel::poisson(10.0).unwrap(),
            CountingModel::poisson(200.0).unwrap(),
            CountingModel::negative_binomial(10.0, 0.5).unwrap(),
            CountingModel::negative_binomial(0.2, 0.9).unwrap(),
            CountingModel::from_gamma_cox(10.0, 0.5).unwrap(),
        ] {
            let cw = m.adaptive_weights(1e-12).unwrap();
            let s: f64 = cw.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "{m:?}: {s}");
            assert!(cw.tail < 1e-12);
        }
    }

    #[test]
    fn negative_binomial_does_not_underflow() {
        let m = CountingModel::negative_binomial(10.0f64, 0.5).unwrap();
        let w = m.ln_weight(5000);
        assert!(w.is_finite() && w < -3000.0);
        assert!(m.weight(5000) >= 0.0);
    }

    #[test]
    fn gamma_cox_round_trip() {
        for (xi, theta) in [(1.0f64, 1.0f64), (10.0, 0.5), (3.7, 12.0)] {
            let m = CountingModel::from_gamma_cox(xi, theta).unwrap();
            let (x2, t2) = m.gamma_cox_params().unwrap();
            assert_eq!(x2, xi);
            assert!((t2 - theta).abs() <= 4.0 * f64::EPSILON * theta);
        }
        assert!(CountingModel::<f64>::poisson(1.0).unwrap().gamma_cox_params().is_none());
    }

    #[test]
    fn invalid_parameters() {
        assert!(CountingModel::poisson(0.0f64).is_err());
        assert!(CountingModel::poisson(f64::NAN).is_err());
        assert!(CountingModel::negative_binomial(1.0f64, 1.0).is_err());
        assert!(CountingModel::negative_binomial(-1.0f64, 0.5).is_err());
        assert!(CountingModel::from_gamma_cox(1.0f64, 0.0).is_err());
        assert!(ScatteringModel::new(north(), 0.0, CountingModel::poisson(1.0).unwrap()).is_err());
    }

    #[test]
    fn pgf_examples() {
        let p = CountingModel::poisson(10.0f64).unwrap();
        assert!((p.pgf(0.9).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(p.pgf(1.5).is_err());
        for m in [p, CountingModel::negative_binomial(10.0, 0.5).unwrap()] {
            assert!((m.pgf(1.0).unwrap() - 1.0).abs() < 1e-15);
            assert!((m.pgf(0.0).unwrap() - m.count_weights(0)[0]).abs() < 1e-14);
            for z in [-1.0, -0.3, 1e-9, 0.5, 0.99] {
                let inc = m.pgf_increment(z).unwrap();
                assert!((inc - (m.pgf(z).unwrap() - m.p0())).abs() < 1e-15);
            }
            let z = 1e-12;
            let want = m.weight(1) * z;
            let got = m.pgf_increment(z).unwrap();
            assert!(((got - want) / want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn pgf_matches_weight_series() {
        for m in [
            CountingModel::poisson(4.0f64).unwrap(),
            CountingModel::negative_binomial(2.5, 0.6).unwrap(),
        ] {
            let cw = m.adaptive_weights(1e-14).unwrap();
            for z in [-0.7f64, 0.2, 0.8] {
                let s: f64 = cw.weights.iter().enumerate().map(|(n, w)| w * z.powi(n as i32)).sum();
                assert!((s - m.pgf(z).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn moments_and_continuous_part() {
        let m = ScatteringModel::new(north(), 100.0, CountingModel::poisson(10.0).unwrap()).unwrap();
        let g = m.legendre_moments(20).unwrap();
        let h = m.continuous_moments(20).unwrap();
        let p0 = m.direct_path_probability();
        assert!((g[0] - 1.0).abs() < 1e-15);
        for l in 0..=20 {
            assert!((h[l] + p0 - g[l]).abs() < 1e-14);
            let f = fourier_coefficient(3, 100.0f64, l).unwrap();
            let closed = (-10.0f64).exp() * ((10.0 * f).exp() - 1.0);
            assert!((h[l] - closed).abs() < 1e-12 * closed.max(1e-300) + 1e-300);
        }
        let a = crate::vmf::mean_resultant_length(3, 100.0f64).unwrap();
        assert!((g[1] - (-10.0 * (1.0 - a)).exp()).abs() < 1e-14);
    }

    #[test]
    fn continuous_moments_match_mixture_series() {
        for counting in [
            CountingModel::poisson(10.0f64).unwrap(),
            CountingModel::negative_binomial(10.0, 0.5).unwrap(),
        ] {
            let m = ScatteringModel::new(north(), 30.0, counting).unwrap();
            let h = m.continuous_moments(15).unwrap();
            let cw = counting.adaptive_weights(1e-13).unwrap();
            for l in 0..=15 {
                let f = fourier_coefficient(3, 30.0f64, l).unwrap();
                let s: f64 = cw.weights.iter().enumerate().skip(1).map(|(n, w)| w * f.powi(n as i32)).sum();
                assert!((s - h[l]).abs() < 1e-10, "l={l}");
            }
        }
    }

    #[test]
    fn continuous_moments_vanish_at_high_order() {
        let m = ScatteringModel::new(north(), 10.0, CountingModel::poisson(3.0).unwrap()).unwrap();
        let part = m.continuous_part(1e-10).unwrap();
        let last = *part.coefficients().coeffs().last().unwrap();
        assert!(last.abs() < 1e-10);
    }

    #[test]
    fn total_measure_is_one() {
        let rule = QuadratureRule::<f64>::gauss_legendre(1024);
        for counting in [
            CountingModel::poisson(10.0f64).unwrap(),
            CountingModel::negative_binomial(10.0, 0.5).unwrap(),
            CountingModel::poisson(0.5).unwrap(),
        ] {
            for p in [3usize, 4] {
                let mu = UnitVector::north_pole(p).unwrap();
                let m = ScatteringModel::new(mu, 100.0, counting).unwrap();
                let part = m.continuous_part(1e-9).unwrap();
                let total = integrate_zonal(&rule, p, |t| part.density(t).unwrap()) + part.mass();
                assert!((total - 1.0).abs() < 1e-6, "p={p} {counting:?}: {total}");
            }
        }
    }

    #[test]
    fn fixed_order_part_matches_adaptive() {
        let m = ScatteringModel::new(north(), 80.0, CountingModel::negative_binomial(10.0, 0.5).unwrap()).unwrap();
        let adaptive = m.continuous_part(1e-12).unwrap();
        let fixed = m.continuous_part_at_order(adaptive.coefficients().order(), 1e-10).unwrap();
        assert!(fixed.coefficients().tail() < 1e-10);
        for t in [-0.5, 0.9, 0.999] {
            assert_eq!(fixed.density(t).unwrap(), adaptive.density(t).unwrap());
        }
        assert!(m.continuous_part_at_order(3, 1e-8).is_err());
    }

    #[test]
    fn large_intensity_tends_to_uniform() {
        let m = ScatteringModel::new(north(), 5.0, CountingModel::poisson(400.0).unwrap()).unwrap();
        let part = m.continuous_part(1e-10).unwrap();
        for t in [-1.0, 0.0, 0.7, 1.0] {
            assert!((part.density(t).unwrap() - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-10);
        }
    }

    #[test]
    fn scattering_pdf_reports_mass_separately() {
        let m = ScatteringModel::new(north(), 50.0, CountingModel::poisson(2.0).unwrap()).unwrap();
        let pdf = m.scattering_pdf(1.0).unwrap();
        assert!((pdf.mass - (-2.0f64).exp()).abs() < 1e-15);
        let part = m.continuous_part(1e-8).unwrap();
        assert!((pdf.density - part.density(1.0).unwrap()).abs() < 1e-12);
        assert!(part.log_density(2.0).is_err());
    }

    #[test]
    fn continuous_part_is_unimodal() {
        for counting in [
            CountingModel::poisson(10.0f64).unwrap(),
            CountingModel::negative_binomial(10.0, 0.5).unwrap(),
        ] {
            let m = ScatteringModel::new(north(), 100.0, counting).unwrap();
            let r = m.continuous_part(1e-8).unwrap().check_unimodality(401).unwrap();
            assert!(r.unimodal, "{r:?}");
        }
    }

    #[test]
    fn process_direct_path_and_moments() {
        let m = ScatteringModel::new(north(), 20.0, CountingModel::poisson(1.5).unwrap()).unwrap();
        let count = 200_000;
        let draws = m.sample_process(count, 5).unwrap();
        let direct = draws.iter().filter(|d| d.is_direct()).count();
        for d in draws.iter().filter(|d| d.is_direct()) {
            assert_eq!(&d.x, m.mu());
            assert_eq!(d.cosine, 1.0);
        }
        let p0 = m.direct_path_probability();
        let sd = (p0 * (1.0 - p0) / count as f64).sqrt();
        assert!((direct as f64 / count as f64 - p0).abs() < 4.0 * sd);

        let g = m.legendre_moments(4).unwrap();
        for l in 1..=4 {
            let vals: Vec<f64> = draws.iter().map(|d| legendre_p(l, 3, d.cosine).unwrap()).collect();
            let mean = vals.iter().sum::<f64>() / count as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            assert!((mean - g[l]).abs() < 4.0 * (var / count as f64).sqrt(), "l={l}");
        }
    }

    #[test]
    fn negative_binomial_sampler_law() {
        let m = CountingModel::negative_binomial(3.0f64, 0.4).unwrap();
        let count = 400_000;
        let draws = par_generate(11, count, |rng: &mut StreamRng| m.sample(rng));
        for n in 0..5u64 {
            let freq = draws.iter().filter(|&&d| d == n).count() as f64 / count as f64;
            let w = m.weight(n as usize);
            assert!((freq - w).abs() < 4.0 * (w * (1.0 - w) / count as f64).sqrt(), "n={n}");
        }
    }

    #[test]
    fn equivalent_concentration_examples() {
        assert!((equivalent_concentration(1000.0f64, 10) - 100.45).abs() < 1e-12);
        assert_eq!(equivalent_concentration(37.0f64, 1), 37.0);
    }

    #[test]
    fn mixture_truncation_and_moments() {
        let m = ScatteringModel::new(north(), 1000.0, CountingModel::poisson(5.0).unwrap()).unwrap();
        let mix = m.asymptotic_mixture(1e-10).unwrap();
        let retained = mix.total_weight() + mix.mass();
        assert!(1.0 - retained <= 1e-10);
        let exact = m.continuous_moments(10).unwrap();
        let approx = mix.coefficients(10).unwrap();
        for l in 0..=10 {
            assert!((exact[l] - approx[l]).abs() < 1e-4, "l={l}");
        }
        assert!(mix.validity_ratio() >= 10.0);
    }

    #[test]
    fn mixture_density_integrates_to_weight() {
        let rule = QuadratureRule::<f64>::gauss_legendre(1024);
        let m = ScatteringModel::new(north(), 200.0, CountingModel::negative_binomial(4.0, 0.5).unwrap()).unwrap();
        let mix = m.asymptotic_mixture(1e-10).unwrap();
        let total = integrate_zonal(&rule, 3, |t| mix.density(t).unwrap());
        assert!((total - mix.total_weight()).abs() < 1e-8);
    }

    #[test]
    fn walk_mixture_quantiles_match_closed_form() {
        // p = 3: F(t) = (e^{κt} - e^{-κ}) / (e^{κ} - e^{-κ}) for a single vMF component
        let mix = AsymptoticMixture::walk(3, 50.0f64, 4).unwrap();
        let k = mix.components()[0].kappa;
        let probs = [0.001, 0.1, 0.5, 0.9, 0.999];
        let q = mix.cosine_quantiles(&probs).unwrap();
        for (&u, &t) in probs.iter().zip(&q) {
            let want = 1.0 + (u + (1.0 - u) * (-2.0 * k).exp()).ln() / k;
            assert!((t - want).abs() < 1e-10, "u={u}: {t} vs {want}");
        }
    }

    #[test]
    fn mixture_sampler_moments() {
        let m = ScatteringModel::new(north(), 300.0, CountingModel::poisson(3.0).unwrap()).unwrap();
        let mix = m.asymptotic_mixture(1e-10).unwrap();
        let count = 200_000;
        let mu = north();
        let cos = par_generate(3, count, |rng: &mut StreamRng| {
            mix.sample(&mu, rng).0.coords()[2]
        });
        let want = mix.coefficients(1).unwrap()[1] / mix.total_weight();
        let mean = cos.iter().sum::<f64>() / count as f64;
        let var = cos.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / count as f64;
        assert!((mean - want).abs() < 4.0 * (var / count as f64).sqrt());
    }
}
