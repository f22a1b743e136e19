//! Monte-Carlo Fisher information and Cramér-Rao bounds for scattering models.
//!
//! Observations are drawn once from the base model. Scores are central finite
//! differences of the log-likelihood of those fixed observations, and the
//! information is the empirical mean of the score outer products. The step
//! concentration enters through ρ = A_p(κ); the finite difference in ρ carries
//! the chain-rule factor implicitly.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{par_generate, StreamRng};
use crate::scatter::{AsymptoticMixture, ContinuousPart, CountingModel, ScatteringModel, DEFAULT_MIXTURE_TOL, MIXTURE_VALIDITY_RATIO};
use crate::sphere::UnitVector;
use crate::vmf::{self, CosineSampler};
use crate::walk::WalkSampler;

/// Series tolerance used for likelihood evaluation.
pub const LIKELIHOOD_SERIES_TOL: f64 = 1e-12;

/// Relative finite-difference step, h = STEP · max(|θ|, 1).
pub const RELATIVE_STEP: f64 = 1e-4;

/// Condition number above which the inverse becomes a pseudo-inverse.
pub const MAX_CONDITION: f64 = 1e12;

/// Minimum number of Monte-Carlo observations.
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Observations whose cosine is this close to 1 must be flagged direct to
/// be treated as the atom.
pub const DIRECT_COSINE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Zonal series of the continuous part.
    Exact,
    /// vMF mixture with equivalent concentrations.
    Asymptotic,
}

/// Parametric families with their parameter order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// (ρ, λ_t)
    Poisson,
    /// (ρ, θ, ξ_t), Gamma intensity
    NegativeBinomial,
    /// (κ): one vMF step, no direct path
    SingleStepKappa,
    /// (ρ): one vMF step, no direct path
    SingleStepRho,
}

impl Family {
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Poisson => &["rho", "lambda_t"],
            Family::NegativeBinomial => &["rho", "theta", "xi_t"],
            Family::SingleStepKappa => &["kappa"],
            Family::SingleStepRho => &["rho"],
        }
    }
}

/// A point of a parametric family in dimension p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub p: usize,
    pub params: Vec<f64>,
}

/// The law a [`ModelSpec`] resolves to.
#[derive(Debug, Clone)]
pub enum ResolvedModel {
    Scattering(ScatteringModel<f64>),
    SingleStep { p: usize, kappa: f64 },
}

impl ModelSpec {
    pub fn new(family: Family, p: usize, params: Vec<f64>) -> Result<Self> {
        let spec = ModelSpec { family, p, params };
        spec.validate()?;
        Ok(spec)
    }

    pub fn poisson(p: usize, rho: f64, lambda_t: f64) -> Result<Self> {
        Self::new(Family::Poisson, p, vec![rho, lambda_t])
    }

    pub fn negative_binomial(p: usize, rho: f64, theta: f64, xi_t: f64) -> Result<Self> {
        Self::new(Family::NegativeBinomial, p, vec![rho, theta, xi_t])
    }

    pub fn single_step_kappa(p: usize, kappa: f64) -> Result<Self> {
        Self::new(Family::SingleStepKappa, p, vec![kappa])
    }

    pub fn single_step_rho(p: usize, rho: f64) -> Result<Self> {
        Self::new(Family::SingleStepRho, p, vec![rho])
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        self.family.param_names()
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::invalid("p", format!("dimension must be >= 2, got {}", self.p)));
        }
        let names = self.param_names();
        if self.params.len() != names.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                found: self.params.len(),
            });
        }
        for (&name, &v) in names.iter().zip(&self.params) {
            let ok = match name {
                "rho" => v > 0.0 && v < 1.0,
                _ => v > 0.0 && v.is_finite(),
            };
            if !ok {
                return Err(Error::domain(name, v));
            }
        }
        Ok(())
    }

    fn with_param(&self, j: usize, value: f64) -> ModelSpec {
        let mut params = self.params.clone();
        params[j] = value;
        ModelSpec {
            family: self.family,
            p: self.p,
            params,
        }
    }

    /// Step concentration κ implied by the parameters.
    pub fn kappa(&self) -> Result<f64> {
        match self.family {
            Family::SingleStepKappa => Ok(self.params[0]),
            _ => vmf::concentration_from_rho(self.p, self.params[0]),
        }
    }

    pub fn resolve(&self) -> Result<ResolvedModel> {
        self.validate()?;
        let kappa = self.kappa()?;
        let counting = match self.family {
            Family::Poisson => CountingModel::poisson(self.params[1])?,
            Family::NegativeBinomial => CountingModel::from_gamma_cox(self.params[2], self.params[1])?,
            Family::SingleStepKappa | Family::SingleStepRho => {
                return Ok(ResolvedModel::SingleStep { p: self.p, kappa });
            }
        };
        let mu = UnitVector::north_pole(self.p)?;
        Ok(ResolvedModel::Scattering(ScatteringModel::new(mu, kappa, counting)?))
    }

    /// Finite-difference step for parameter j, shrunk to stay inside the domain.
    pub fn step(&self, j: usize) -> f64 {
        let v = self.params[j];
        let h = RELATIVE_STEP * v.abs().max(1.0);
        match self.param_names()[j] {
            "rho" => h.min(0.5 * v.min(1.0 - v)),
            _ => h.min(0.5 * v),
        }
    }
}

/// A scattered or direct-path observation, described by its cosine to μ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub cosine: f64,
    /// Known from the simulator: no scattering event happened.
    pub direct: bool,
}

impl Observation {
    pub fn scattered(cosine: f64) -> Self {
        Observation { cosine, direct: false }
    }

    pub fn direct() -> Self {
        Observation { cosine: 1.0, direct: true }
    }
}

/// Log-likelihood evaluator with respect to the atom at μ plus surface measure.
#[derive(Debug, Clone)]
pub enum LogLikelihood {
    Exact { ln_p0: f64, part: ContinuousPart<f64> },
    Asymptotic { ln_p0: f64, mixture: AsymptoticMixture<f64> },
    SingleStep { p: usize, kappa: f64 },
}

/// Truncation shared by the base model and its finite-difference neighbours.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Truncation {
    Order(usize),
    Events(usize),
    None,
}

impl LogLikelihood {
    pub fn new(spec: &ModelSpec, backend: Backend) -> Result<Self> {
        Self::build(spec, backend, None).map(|(ll, _)| ll)
    }

    fn build(spec: &ModelSpec, backend: Backend, trunc: Option<Truncation>) -> Result<(Self, Truncation)> {
        let model = match spec.resolve()? {
            ResolvedModel::SingleStep { p, kappa } => {
                return Ok((LogLikelihood::SingleStep { p, kappa }, Truncation::None));
            }
            ResolvedModel::Scattering(m) => m,
        };
        let ln_p0 = model.counting().p0().ln();
        match backend {
            Backend::Exact => {
                let part = match trunc {
                    Some(Truncation::Order(order)) => model.continuous_part_at_order(order, 1e-10)?,
                    _ => model.continuous_part(LIKELIHOOD_SERIES_TOL)?,
                };
                let order = part.coefficients().order();
                Ok((LogLikelihood::Exact { ln_p0, part }, Truncation::Order(order)))
            }
            Backend::Asymptotic => {
                let mixture = match trunc {
                    Some(Truncation::Events(n)) => model.asymptotic_mixture_with_events(n)?,
                    _ => model.asymptotic_mixture(DEFAULT_MIXTURE_TOL)?,
                };
                let n = mixture.max_events();
                Ok((LogLikelihood::Asymptotic { ln_p0, mixture }, Truncation::Events(n)))
            }
        }
    }

    pub fn eval(&self, obs: &Observation) -> Result<f64> {
        match self {
            LogLikelihood::SingleStep { p, kappa } => {
                check_cosine(obs.cosine)?;
                Ok(vmf::log_pdf_cosine(*p, *kappa, obs.cosine))
            }
            LogLikelihood::Exact { ln_p0, part } => {
                if obs.direct {
                    return Ok(*ln_p0);
                }
                check_scattered(obs.cosine)?;
                part.log_density(obs.cosine)
            }
            LogLikelihood::Asymptotic { ln_p0, mixture } => {
                if obs.direct {
                    return Ok(*ln_p0);
                }
                check_scattered(obs.cosine)?;
                let v = mixture.log_density(obs.cosine)?;
                if !v.is_finite() {
                    return Err(Error::NonPositiveDensity {
                        t: obs.cosine,
                        density: 0.0,
                    });
                }
                Ok(v)
            }
        }
    }
}

fn check_cosine(t: f64) -> Result<()> {
    if !(t.abs() <= 1.0) {
        return Err(Error::domain("cosine", t));
    }
    Ok(())
}

fn check_scattered(t: f64) -> Result<()> {
    check_cosine(t)?;
    if 1.0 - t < DIRECT_COSINE_TOL {
        return Err(Error::invalid(
            "observation",
            "cosine equals 1 but the observation is not flagged as direct path",
        ));
    }
    Ok(())
}

/// ln-likelihood of one observation under `spec`.
pub fn log_likelihood(spec: &ModelSpec, obs: &Observation, backend: Backend) -> Result<f64> {
    LogLikelihood::new(spec, backend)?.eval(obs)
}

/// Draws observations from the model matching the backend: the exact
/// process, or the vMF mixture law itself for the asymptotic backend.
pub fn draw_observations(spec: &ModelSpec, backend: Backend, count: usize, seed: u64) -> Result<Vec<Observation>> {
    match spec.resolve()? {
        ResolvedModel::SingleStep { p, kappa } => {
            let sampler = CosineSampler::new(p, kappa)?;
            Ok(par_generate(seed, count, |rng: &mut StreamRng| {
                Observation::scattered(sampler.draw(rng).t)
            }))
        }
        ResolvedModel::Scattering(model) => match backend {
            Backend::Exact => {
                let kappa = model.step_kappa().expect("families use vMF steps");
                let walker = WalkSampler::new(spec.p, kappa)?;
                let mu = model.mu().clone();
                let counting = *model.counting();
                Ok(par_generate(seed, count, |rng: &mut StreamRng| {
                    draw_exact(&walker, &mu, &counting, rng)
                }))
            }
            Backend::Asymptotic => {
                let mixture = model.asymptotic_mixture(DEFAULT_MIXTURE_TOL)?;
                warn_validity(&mixture);
                let counting = *model.counting();
                let draws = par_generate(seed, count, |rng: &mut StreamRng| {
                    match counting.sample(rng) as usize {
                        0 => Ok(Observation::direct()),
                        n => mixture.sample_cosine_given_events(n, rng).map(Observation::scattered),
                    }
                });
                draws.into_iter().collect()
            }
        },
    }
}

fn draw_exact<R: Rng + ?Sized>(
    walker: &WalkSampler<f64>,
    mu: &UnitVector<f64>,
    counting: &CountingModel<f64>,
    rng: &mut R,
) -> Observation {
    let n = counting.sample(rng) as usize;
    if n == 0 {
        return Observation::direct();
    }
    let x = walker.sample(mu, n, rng);
    let t = mu.cosine(&x).unwrap_or(1.0);
    // a scattered draw that lands on μ to rounding keeps its flag; nudge it off the atom
    Observation::scattered(t.min(1.0 - DIRECT_COSINE_TOL))
}

/// Compensated (Neumaier) summation.
fn warn_validity(mixture: &AsymptoticMixture<f64>) {
    let ratio = mixture.validity_ratio();
    if ratio < MIXTURE_VALIDITY_RATIO {
        log::warn!("asymptotic backend: kappa/N* = {ratio:.3} < {MIXTURE_VALIDITY_RATIO}; the vMF approximation is unreliable");
    }
}

pub(crate) fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Monte-Carlo Fisher information per observation and the derived bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherEstimate {
    pub params: Vec<String>,
    pub values: Vec<f64>,
    /// Row-major d×d information matrix.
    pub matrix: Vec<Vec<f64>>,
    /// Monte-Carlo standard error of each matrix entry.
    pub matrix_se: Vec<Vec<f64>>,
    /// Diagonal of the (pseudo-)inverse.
    pub crlb: Vec<f64>,
    /// Delta-method Monte-Carlo standard error of each bound.
    pub crlb_se: Vec<f64>,
    pub score_mean: Vec<f64>,
    pub score_mean_se: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub pseudo_inverse: bool,
    /// Largest relative change of the diagonal when the steps are halved.
    pub richardson_rel_change: Option<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub backend: Backend,
}

impl FisherEstimate {
    pub fn crlb_of(&self, name: &str) -> Option<(f64, f64)> {
        let j = self.params.iter().position(|p| p == name)?;
        Some((self.crlb[j], self.crlb_se[j]))
    }
}

/// Options for [`fisher_information`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherOptions {
    pub mc_samples: usize,
    pub seed: u64,
    pub backend: Backend,
    /// Also recompute the scores with halved steps.
    pub richardson_check: bool,
}

impl FisherOptions {
    pub fn new(mc_samples: usize, seed: u64, backend: Backend) -> Self {
        FisherOptions {
            mc_samples,
            seed,
            backend,
            richardson_check: false,
        }
    }
}

fn neighbour_likelihoods(spec: &ModelSpec, backend: Backend, steps: &[f64]) -> Result<Vec<(LogLikelihood, LogLikelihood)>> {
    let (_, trunc) = LogLikelihood::build(spec, backend, None)?;
    (0..spec.params.len())
        .map(|j| {
            let v = spec.params[j];
            let plus = LogLikelihood::build(&spec.with_param(j, v + steps[j]), backend, Some(trunc))?.0;
            let minus = LogLikelihood::build(&spec.with_param(j, v - steps[j]), backend, Some(trunc))?.0;
            Ok((plus, minus))
        })
        .collect()
}

fn scores(spec: &ModelSpec, backend: Backend, obs: &[Observation], scale: f64) -> Result<Vec<Vec<f64>>> {
    let steps: Vec<f64> = (0..spec.params.len()).map(|j| spec.step(j) * scale).collect();
    let lls = neighbour_likelihoods(spec, backend, &steps)?;
    obs.par_iter()
        .map(|o| {
            lls.iter()
                .zip(&steps)
                .map(|((plus, minus), h)| Ok((plus.eval(o)? - minus.eval(o)?) / (2.0 * h)))
                .collect()
        })
        .collect()
}

fn information(scores: &[Vec<f64>], d: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = scores.len() as f64;
    let mut mean = DMatrix::zeros(d, d);
    let mut se = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let m = neumaier_sum(scores.iter().map(|s| s[i] * s[j])) / n;
            let var = neumaier_sum(scores.iter().map(|s| (s[i] * s[j] - m).powi(2))) / (n - 1.0);
            mean[(i, j)] = m;
            mean[(j, i)] = m;
            se[(i, j)] = (var / n).sqrt();
            se[(j, i)] = se[(i, j)];
        }
    }
    (mean, se)
}

/// Monte-Carlo Fisher information of `spec` per observation.
pub fn fisher_information(spec: &ModelSpec, opts: &FisherOptions) -> Result<FisherEstimate> {
    spec.validate()?;
    if opts.mc_samples < MIN_MC_SAMPLES {
        return Err(Error::invalid(
            "mc_samples",
            format!("need at least {MIN_MC_SAMPLES}, got {}", opts.mc_samples),
        ));
    }
    let d = spec.params.len();
    let obs = draw_observations(spec, opts.backend, opts.mc_samples, opts.seed)?;
    let s = scores(spec, opts.backend, &obs, 1.0)?;
    let (info, info_se) = information(&s, d);
    let n = s.len() as f64;

    let trace = info.trace();
    let eig = SymmetricEigen::new(info.clone());
    let min_eig = eig.eigenvalues.min();
    if min_eig < -1e-8 * trace.abs() {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min_eig,
            trace,
        });
    }
    let max_eig = eig.eigenvalues.max();
    let pseudo = !(min_eig > 0.0 && max_eig / min_eig <= MAX_CONDITION);
    let cutoff = if pseudo { max_eig / MAX_CONDITION } else { 0.0 };
    let mut inv = DMatrix::zeros(d, d);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > cutoff {
            let v = eig.eigenvectors.column(k);
            inv += (v * v.transpose()) / lam;
        }
    }
    if pseudo {
        log::warn!("Fisher information ill-conditioned (eigenvalues {min_eig:e}..{max_eig:e}); using a pseudo-inverse");
    }
    let crlb: Vec<f64> = (0..d).map(|k| inv[(k, k)]).collect();
    // per observation the bound k moves by -(A s)_k² to first order
    let crlb_se = (0..d)
        .map(|k| {
            let y: Vec<f64> = s
                .iter()
                .map(|si| {
                    let a: f64 = (0..d).map(|j| inv[(k, j)] * si[j]).sum();
                    a * a
                })
                .collect();
            let m = neumaier_sum(y.iter().copied()) / n;
            (neumaier_sum(y.iter().map(|v| (v - m).powi(2))) / (n - 1.0) / n).sqrt()
        })
        .collect();
    let score_mean: Vec<f64> = (0..d).map(|j| neumaier_sum(s.iter().map(|si| si[j])) / n).collect();
    let score_mean_se = (0..d).map(|j| (info[(j, j)] / n).sqrt()).collect();

    let richardson_rel_change = if opts.richardson_check {
        let half = scores(spec, opts.backend, &obs, 0.5)?;
        let (info_half, _) = information(&half, d);
        let change = (0..d)
            .map(|j| ((info_half[(j, j)] - info[(j, j)]) / info[(j, j)]).abs())
            .fold(0.0, f64::max);
        if change > 1e-2 {
            log::warn!("finite-difference scores sensitive to the step: relative change {change:e}");
        }
        Some(change)
    } else {
        None
    };

    let to_rows = |m: &DMatrix<f64>| (0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect();
    Ok(FisherEstimate {
        params: spec.param_names().iter().map(|s| s.to_string()).collect(),
        values: spec.params.clone(),
        matrix: to_rows(&info),
        matrix_se: to_rows(&info_se),
        crlb,
        crlb_se,
        score_mean,
        score_mean_se,
        eigenvalues: eig.eigenvalues.iter().copied().collect(),
        pseudo_inverse: pseudo,
        richardson_rel_change,
        n_samples: s.len(),
        seed: opts.seed,
        backend: opts.backend,
    })
}

/// Quantity varied along a CRLB curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Step concentration; sets ρ = A_p(κ) (or κ for the κ-parametrized family).
    Kappa,
    Rho,
    LambdaT,
    Theta,
    XiT,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Kappa => "kappa",
            SweepVariable::Rho => "rho",
            SweepVariable::LambdaT => "lambda_t",
            SweepVariable::Theta => "theta",
            SweepVariable::XiT => "xi_t",
        }
    }

    /// `spec` with this variable set to `value`.
    pub fn apply(self, spec: &ModelSpec, value: f64) -> Result<ModelSpec> {
        let names = spec.param_names();
        let (name, v) = match self {
            SweepVariable::Kappa if spec.family == Family::SingleStepKappa => ("kappa", value),
            SweepVariable::Kappa => ("rho", vmf::mean_resultant_length(spec.p, value)?),
            other => (other.name(), value),
        };
        let j = names.iter().position(|&n| n == name).ok_or_else(|| {
            Error::invalid("sweep", format!("{} is not a parameter of {:?}", self.name(), spec.family))
        })?;
        let out = spec.with_param(j, v);
        out.validate()?;
        Ok(out)
    }
}

/// One point of a CRLB curve; failures are kept and the sweep continues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub value: f64,
    pub estimate: std::result::Result<FisherEstimate, String>,
}

/// Fisher estimates along `values` of `variable`, each from the same seed.
/// The step-halving check runs at the first point that succeeds.
pub fn crlb_curve(
    base: &ModelSpec,
    variable: SweepVariable,
    values: &[f64],
    opts: &FisherOptions,
) -> Vec<CurvePoint> {
    let mut checked = false;
    let mut out = Vec::with_capacity(values.len());
    for &value in values {
        let point_opts = FisherOptions {
            richardson_check: opts.richardson_check || !checked,
            ..*opts
        };
        let estimate = variable
            .apply(base, value)
            .and_then(|spec| fisher_information(&spec, &point_opts))
            .map_err(|e| {
                log::warn!("crlb sweep {}={value}: {e}", variable.name());
                e.to_string()
            });
        checked |= estimate.is_ok();
        out.push(CurvePoint { value, estimate });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{integrate_zonal, QuadratureRule};
    use crate::vmf::{mean_resultant_length, mean_resultant_length_derivative};

    #[test]
    fn direct_path_log_likelihood() {
        let pois = ModelSpec::poisson(3, 0.9, 10.0).unwrap();
        let ll = log_likelihood(&pois, &Observation::direct(), Backend::Exact).unwrap();
        assert!((ll + 10.0).abs() < 1e-12);
        // r_t = 10, q = 1/2 is θ = 1, ξ_t = 10
        let nb = ModelSpec::negative_binomial(3, 0.9, 1.0, 10.0).unwrap();
        let ll = log_likelihood(&nb, &Observation::direct(), Backend::Asymptotic).unwrap();
        assert!((ll - 10.0 * 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn likelihood_is_normalized() {
        let rule = QuadratureRule::<f64>::gauss_legendre(1024);
        for spec in [
            ModelSpec::poisson(3, 0.98, 5.0).unwrap(),
            ModelSpec::negative_binomial(3, 0.95, 1.0, 10.0).unwrap(),
        ] {
            for backend in [Backend::Exact, Backend::Asymptotic] {
                let ll = LogLikelihood::new(&spec, backend).unwrap();
                let p0 = ll.eval(&Observation::direct()).unwrap().exp();
                let cont = integrate_zonal(&rule, 3, |t| {
                    if 1.0 - t < DIRECT_COSINE_TOL {
                        return ll.eval(&Observation::scattered(1.0 - DIRECT_COSINE_TOL)).unwrap().exp();
                    }
                    ll.eval(&Observation::scattered(t)).unwrap().exp()
                });
                assert!((cont + p0 - 1.0).abs() < 1e-6, "{spec:?} {backend:?}: {}", cont + p0);
            }
        }
    }

    #[test]
    fn unflagged_unit_cosine_is_rejected() {
        let spec = ModelSpec::poisson(3, 0.9, 1.0).unwrap();
        assert!(log_likelihood(&spec, &Observation::scattered(1.0), Backend::Exact).is_err());
        assert!(log_likelihood(&spec, &Observation::scattered(1.5), Backend::Exact).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::poisson(3, 1.0, 1.0).is_err());
        assert!(ModelSpec::poisson(3, 0.5, -1.0).is_err());
        assert!(ModelSpec::new(Family::Poisson, 3, vec![0.5]).is_err());
        assert!(ModelSpec::single_step_kappa(1, 2.0).is_err());
        let s = ModelSpec::poisson(3, 0.99995, 1.0).unwrap();
        assert!(s.step(0) < 0.5e-4 + 1e-12);
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
    }

    #[test]
    fn single_step_information() {
        let spec = ModelSpec::single_step_kappa(3, 2.0).unwrap();
        let est = fisher_information(&spec, &FisherOptions::new(100_000, 7, Backend::Exact)).unwrap();
        let want = 0.25 - 1.0 / 2.0f64.sinh().powi(2);
        assert!((est.matrix[0][0] - want).abs() < 3.0 * est.matrix_se[0][0]);
        assert!(est.score_mean[0].abs() < 3.0 * est.score_mean_se[0]);
    }

    #[test]
    fn reparametrization() {
        let kappa = 5.0;
        let rho = mean_resultant_length(3, kappa).unwrap();
        let opts = FisherOptions::new(50_000, 3, Backend::Exact);
        let ek = fisher_information(&ModelSpec::single_step_kappa(3, kappa).unwrap(), &opts).unwrap();
        let er = fisher_information(&ModelSpec::single_step_rho(3, rho).unwrap(), &opts).unwrap();
        let d = mean_resultant_length_derivative(3, kappa).unwrap();
        let predicted = d * d * ek.crlb[0];
        let se = d * d * ek.crlb_se[0] + er.crlb_se[0];
        assert!((er.crlb[0] - predicted).abs() < 3.0 * se, "{} vs {predicted}", er.crlb[0]);
    }

    #[test]
    fn deterministic_in_seed() {
        let spec = ModelSpec::poisson(3, 0.95, 3.0).unwrap();
        let opts = FisherOptions::new(10_000, 42, Backend::Exact);
        let a = fisher_information(&spec, &opts).unwrap();
        let b = fisher_information(&spec, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_samples() {
        let spec = ModelSpec::single_step_kappa(3, 2.0).unwrap();
        assert!(fisher_information(&spec, &FisherOptions::new(100, 1, Backend::Exact)).is_err());
    }

    #[test]
    fn sweep_records_failures() {
        let base = ModelSpec::poisson(3, 0.9, 2.0).unwrap();
        let opts = FisherOptions::new(10_000, 1, Backend::Exact);
        let curve = crlb_curve(&base, SweepVariable::LambdaT, &[-1.0, 2.0], &opts);
        assert!(curve[0].estimate.is_err());
        let ok = curve[1].estimate.as_ref().unwrap();
        assert!(ok.richardson_rel_change.unwrap() < 1e-2);
        assert!(crlb_curve(&base, SweepVariable::Theta, &[1.0], &opts)[0].estimate.is_err());
    }
}
