use serde::Serialize;
use serde_json::{json, Value};

use sphere_scatter::estimate::{self, Backend, Family, FisherOptions, ModelSpec, SweepVariable};
use sphere_scatter::scatter::{ContinuousPart, DEFAULT_MIXTURE_TOL, MIXTURE_VALIDITY_RATIO};
use sphere_scatter::{AsymptoticMixture, CountingModel, ScatteringModel};
use sphere_scatter::UnitVector;
use sphere_scatter::vmf::{self, CosineSampler};
use sphere_scatter::walk::{self, ZonalCoefficients, ZonalSeries};
use sphere_scatter::rng::{par_generate, StreamRng};

use crate::args::*;
use crate::fail::{CliResult, Failure};
use crate::output::{emit, Artifact, Cell, Table};

/// Resolved configuration echoed into every artifact.
#[derive(Debug, Clone, Serialize, Default)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    pub p: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_t: Option<f64>,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lmax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qq_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
}

impl RunConfig {
    fn from_model(command: &'static str, m: &ModelArgs) -> CliResult<Self> {
        if m.p < 2 {
            return Err(Failure::config("p", format!("dimension must be >= 2, got {}", m.p)));
        }
        if !(m.tol > 0.0 && m.tol < 1.0) {
            return Err(Failure::config("tol", format!("must lie in (0, 1), got {}", m.tol)));
        }
        let positive = |name: &str, v: Option<f64>| -> CliResult<()> {
            match v {
                Some(x) if !(x > 0.0 && x.is_finite()) => Err(Failure::config(name, format!("must be positive, got {x}"))),
                _ => Ok(()),
            }
        };
        positive("lambda-t", m.lambda_t)?;
        positive("theta", m.theta)?;
        positive("xi-t", m.xi_t)?;
        if let Some(k) = m.kappa {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Failure::config("kappa", format!("must be >= 0, got {k}")));
            }
        }
        if let Some(r) = m.rho {
            if !(0.0..1.0).contains(&r) {
                return Err(Failure::config("rho", format!("must lie in [0, 1), got {r}")));
            }
        }
        Ok(RunConfig {
            command,
            model: Some(m.model),
            p: m.p,
            kappa: m.kappa,
            rho: m.rho,
            n: m.n,
            lambda_t: m.lambda_t,
            theta: m.theta,
            xi_t: m.xi_t,
            tol: m.tol,
            ..Default::default()
        })
    }

    fn grid(mut self, g: &GridArgs) -> CliResult<Self> {
        if g.grid < 2 {
            return Err(Failure::config("grid", "need at least two points"));
        }
        if !(g.t_min >= -1.0 && g.t_max <= 1.0 && g.t_min < g.t_max) {
            return Err(Failure::config("t-min", "need -1 <= t-min < t-max <= 1"));
        }
        self.grid = Some(g.grid);
        self.t_min = Some(g.t_min);
        self.t_max = Some(g.t_max);
        Ok(self)
    }
}

fn kappa_of(m: &ModelArgs) -> CliResult<f64> {
    match (m.kappa, m.rho) {
        (Some(k), _) => Ok(k),
        (None, Some(r)) => Ok(vmf::concentration_from_rho(m.p, r)?),
        (None, None) => Err(Failure::config("kappa", "give --kappa or --rho")),
    }
}

fn require<T: Copy>(v: Option<T>, field: &str, model: &str) -> CliResult<T> {
    v.ok_or_else(|| Failure::config(field, format!("--{field} is required for the {model} model")))
}

fn walk_steps(m: &ModelArgs) -> CliResult<usize> {
    require(m.n, "n", "walk")
}

fn counting_of(m: &ModelArgs) -> CliResult<CountingModel> {
    match m.model {
        ModelKind::Poisson => Ok(CountingModel::poisson(require(m.lambda_t, "lambda-t", "poisson")?)?),
        ModelKind::Negbin => Ok(CountingModel::from_gamma_cox(
            require(m.xi_t, "xi-t", "negbin")?,
            require(m.theta, "theta", "negbin")?,
        )?),
        other => Err(Failure::config("model", format!("{other:?} is not a scattering model"))),
    }
}

fn scattering_of(m: &ModelArgs) -> CliResult<ScatteringModel> {
    let kappa = kappa_of(m)?;
    Ok(ScatteringModel::new(UnitVector::north_pole(m.p)?, kappa, counting_of(m)?)?)
}

fn t_grid(g: &GridArgs) -> Vec<f64> {
    let step = (g.t_max - g.t_min) / (g.grid - 1) as f64;
    (0..g.grid)
        .map(|i| if i + 1 == g.grid { g.t_max } else { g.t_min + step * i as f64 })
        .collect()
}

pub fn fourier(a: &FourierArgs) -> CliResult<()> {
    let mut config = RunConfig::from_model("fourier", &a.model)?;
    config.lmax = Some(a.lmax);
    let kappa = kappa_of(&a.model)?;
    let n = walk_steps(&a.model)?;
    if n == 0 {
        return Err(Failure::config("n", "need at least one step"));
    }
    let p = a.model.p;
    let step = vmf::fourier_coefficients(p, kappa, a.lmax)?;
    let kt = sphere_scatter::scatter::equivalent_concentration(kappa, n);
    let approx = vmf::fourier_coefficients(p, kt, a.lmax)?;
    let mut table = Table::new(["ell", "step", "walk", "asymptotic"]);
    for l in 0..=a.lmax {
        table.push(vec![l.into(), step[l].into(), step[l].powi(n as i32).into(), approx[l].into()]);
    }
    emit(
        &a.output,
        &Artifact {
            config,
            table,
            extra: vec![],
            meta: Some(json!({ "equivalent_kappa": kt })),
        },
    )
}

/// Exact and asymptotic projected densities for the configured model.
enum Densities {
    Walk {
        exact: Option<ZonalSeries<f64>>,
        asym: Option<AsymptoticMixture>,
    },
    Scatter {
        model: ScatteringModel,
        exact: Option<ContinuousPart<f64>>,
        asym: Option<AsymptoticMixture>,
    },
}

impl Densities {
    fn build(m: &ModelArgs, backend: BackendChoice) -> CliResult<Self> {
        let want_exact = backend != BackendChoice::Asymptotic;
        let want_asym = backend != BackendChoice::Exact;
        match m.model {
            ModelKind::Walk => {
                let kappa = kappa_of(m)?;
                let n = walk_steps(m)?;
                let exact = if want_exact {
                    let step = ZonalCoefficients::vmf(m.p, kappa, m.tol)?;
                    let z = walk::walk_coefficients(&step, n)?.trimmed(m.tol);
                    Some(z.series_with_tol(m.tol)?)
                } else {
                    None
                };
                let asym = if want_asym { Some(AsymptoticMixture::walk(m.p, kappa, n)?) } else { None };
                Ok(Densities::Walk { exact, asym })
            }
            ModelKind::Poisson | ModelKind::Negbin => {
                let model = scattering_of(m)?;
                let exact = if want_exact { Some(model.continuous_part(m.tol)?) } else { None };
                let asym = if want_asym { Some(model.asymptotic_mixture(DEFAULT_MIXTURE_TOL)?) } else { None };
                Ok(Densities::Scatter { model, exact, asym })
            }
            ModelKind::Vmf => Err(Failure::config("model", "use --model walk --n 1 for a single vMF step")),
        }
    }

    fn exact(&self, t: f64) -> CliResult<Option<f64>> {
        Ok(match self {
            Densities::Walk { exact: Some(s), .. } => Some(s.projected(t)?),
            Densities::Scatter { exact: Some(c), .. } => Some(c.projected_density(t)?),
            _ => None,
        })
    }

    fn asym(&self) -> Option<&AsymptoticMixture> {
        match self {
            Densities::Walk { asym, .. } | Densities::Scatter { asym, .. } => asym.as_ref(),
        }
    }

    fn warn_validity(&self) {
        if let Some(a) = self.asym() {
            let ratio = a.validity_ratio();
            if ratio < MIXTURE_VALIDITY_RATIO {
                log::warn!("kappa/N* = {ratio:.3} < {MIXTURE_VALIDITY_RATIO}; the vMF approximation is unreliable");
            }
        }
    }

    fn meta(&self) -> Value {
        let mut meta = json!({});
        if let Densities::Scatter { model, .. } = self {
            meta["p0"] = json!(model.direct_path_probability());
        }
        if let Some(a) = self.asym() {
            meta["max_events"] = json!(a.max_events());
            meta["validity_ratio"] = json!(a.validity_ratio());
        }
        meta
    }
}

/// Pointwise max |a-e|/e and max |a-e| / max e over the grid.
fn gaps(exact: &[f64], asym: &[f64]) -> (f64, f64) {
    let peak = exact.iter().cloned().fold(0.0, f64::max);
    let mut rel = 0.0f64;
    let mut abs = 0.0f64;
    for (&e, &a) in exact.iter().zip(asym) {
        let d = (a - e).abs();
        abs = abs.max(d);
        if e > 0.0 {
            rel = rel.max(d / e);
        }
    }
    (rel, abs / peak)
}

fn pdf_table(d: &Densities, g: &GridArgs, backend: BackendChoice) -> CliResult<(Table, Value)> {
    let ts = t_grid(g);
    let exact: Vec<f64> = match backend {
        BackendChoice::Asymptotic => vec![],
        _ => ts.iter().map(|&t| d.exact(t).map(|v| v.unwrap_or(f64::NAN))).collect::<CliResult<_>>()?,
    };
    let asym: Vec<f64> = match d.asym() {
        Some(a) => ts.iter().map(|&t| a.projected_density(t)).collect::<Result<_, _>>()?,
        None => vec![],
    };
    let columns: Vec<&str> = match backend {
        BackendChoice::Exact => vec!["t", "density"],
        BackendChoice::Asymptotic => vec!["t", "density_asym"],
        BackendChoice::Both => vec!["t", "density", "density_asym"],
    };
    let mut table = Table::new(columns);
    for (i, &t) in ts.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.into()];
        if !exact.is_empty() {
            row.push(exact[i].into());
        }
        if !asym.is_empty() {
            row.push(asym[i].into());
        }
        table.push(row);
    }
    let mut meta = d.meta();
    if !exact.is_empty() {
        meta["min_density"] = json!(exact.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    if backend == BackendChoice::Both {
        let (rel, scaled) = gaps(&exact, &asym);
        meta["max_rel_gap"] = json!(rel);
        meta["max_scaled_gap"] = json!(scaled);
    }
    Ok((table, meta))
}

pub fn pdf(a: &PdfArgs) -> CliResult<()> {
    let mut config = RunConfig::from_model("pdf", &a.model)?.grid(&a.grid)?;
    config.backend = Some(a.backend);
    let d = Densities::build(&a.model, a.backend)?;
    d.warn_validity();
    let (table, meta) = pdf_table(&d, &a.grid, a.backend)?;
    emit(
        &a.output,
        &Artifact {
            config,
            table,
            extra: vec![],
            meta: Some(meta),
        },
    )
}

/// (cosine, n_events) draws of the configured model.
fn simulate(m: &ModelArgs, count: usize, seed: u64) -> CliResult<Vec<(f64, u64)>> {
    if count == 0 {
        return Err(Failure::config("count", "need at least one draw"));
    }
    match m.model {
        ModelKind::Walk => {
            let kappa = kappa_of(m)?;
            let n = walk_steps(m)?;
            let cos = walk::sample_walk_cosines(m.p, kappa, n, count, seed)?;
            Ok(cos.into_iter().map(|c| (c, n as u64)).collect())
        }
        ModelKind::Vmf => {
            let sampler = CosineSampler::new(m.p, kappa_of(m)?)?;
            Ok(par_generate(seed, count, |rng: &mut StreamRng| (sampler.draw(rng).t, 1)))
        }
        ModelKind::Poisson | ModelKind::Negbin => {
            let model = scattering_of(m)?;
            Ok(model
                .sample_process(count, seed)?
                .into_iter()
                .map(|d| (d.cosine, d.n_events))
                .collect())
        }
    }
}

pub fn sample(a: &SampleArgs) -> CliResult<()> {
    let mut config = RunConfig::from_model("sample", &a.model)?;
    config.count = Some(a.count);
    config.seed = Some(a.seed);
    let draws = simulate(&a.model, a.count, a.seed)?;
    let mut table = Table::new(["cosine", "n_events"]);
    for (c, n) in draws {
        table.push(vec![c.into(), n.into()]);
    }
    let meta = match a.model.model {
        ModelKind::Poisson | ModelKind::Negbin => Some(json!({ "p0": counting_of(&a.model)?.p0() })),
        _ => None,
    };
    emit(&a.output, &Artifact { config, table, extra: vec![], meta })
}

fn parse_sweep(s: &str) -> CliResult<(SweepVariable, Vec<f64>)> {
    let (name, values) = s
        .split_once('=')
        .ok_or_else(|| Failure::config("sweep", "expected name=v1,v2,..."))?;
    let var = match name.trim() {
        "kappa" => SweepVariable::Kappa,
        "rho" => SweepVariable::Rho,
        "lambda-t" | "lambda_t" => SweepVariable::LambdaT,
        "theta" => SweepVariable::Theta,
        "xi-t" | "xi_t" => SweepVariable::XiT,
        other => return Err(Failure::config("sweep", format!("unknown sweep variable `{other}`"))),
    };
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Failure::config("sweep", format!("`{v}`: {e}")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Failure::config("sweep", "no values"));
    }
    Ok((var, values))
}

/// Base model spec; a parameter left out on the command line may be supplied by the sweep.
fn crlb_spec(m: &ModelArgs, sweep: Option<(SweepVariable, f64)>) -> CliResult<ModelSpec> {
    let swept = |v: SweepVariable| sweep.filter(|(s, _)| *s == v).map(|(_, x)| x);
    let step_rho = || -> CliResult<f64> {
        if let Some(x) = swept(SweepVariable::Rho) {
            return Ok(x);
        }
        if let Some(k) = swept(SweepVariable::Kappa).or(m.kappa) {
            return Ok(vmf::mean_resultant_length(m.p, k)?);
        }
        require(m.rho, "rho", "crlb")
    };
    let value = |v: SweepVariable, given: Option<f64>, field: &str, model: &str| -> CliResult<f64> {
        swept(v).or(given).ok_or_else(|| Failure::config(field, format!("--{field} is required for the {model} model")))
    };
    let spec = match m.model {
        ModelKind::Poisson => ModelSpec::poisson(m.p, step_rho()?, value(SweepVariable::LambdaT, m.lambda_t, "lambda-t", "poisson")?),
        ModelKind::Negbin => ModelSpec::negative_binomial(
            m.p,
            step_rho()?,
            value(SweepVariable::Theta, m.theta, "theta", "negbin")?,
            value(SweepVariable::XiT, m.xi_t, "xi-t", "negbin")?,
        ),
        ModelKind::Vmf if m.rho.is_some() || swept(SweepVariable::Rho).is_some() => ModelSpec::single_step_rho(m.p, step_rho()?),
        ModelKind::Vmf => ModelSpec::single_step_kappa(m.p, value(SweepVariable::Kappa, m.kappa, "kappa", "vmf")?),
        ModelKind::Walk => return Err(Failure::config("model", "crlb needs poisson, negbin or vmf")),
    };
    Ok(spec?)
}

pub fn crlb(a: &CrlbArgs) -> CliResult<()> {
    let mut config = RunConfig::from_model("crlb", &a.model)?;
    config.mc_samples = Some(a.mc_samples);
    config.seed = Some(a.seed);
    config.backend = Some(a.backend);
    config.sweep = a.sweep.clone();
    if a.mc_samples < estimate::MIN_MC_SAMPLES {
        return Err(Failure::config(
            "mc-samples",
            format!("need at least {}, got {}", estimate::MIN_MC_SAMPLES, a.mc_samples),
        ));
    }
    let sweep = a.sweep.as_deref().map(parse_sweep).transpose()?;
    let base = crlb_spec(&a.model, sweep.as_ref().map(|(v, xs)| (*v, xs[0])))?;
    let (var, values) = match sweep {
        Some((v, xs)) => {
            for &x in &xs {
                v.apply(&base, x)?;
            }
            (Some(v), xs)
        }
        None => (None, vec![f64::NAN]),
    };
    let backends: Vec<(Backend, &str)> = match a.backend {
        BackendChoice::Exact => vec![(Backend::Exact, "")],
        BackendChoice::Asymptotic => vec![(Backend::Asymptotic, "")],
        BackendChoice::Both => vec![(Backend::Exact, "_exact"), (Backend::Asymptotic, "_asymptotic")],
    };
    let single_step = matches!(base.family, Family::SingleStepKappa | Family::SingleStepRho);
    if single_step && a.backend != BackendChoice::Exact {
        return Err(Failure::config("backend", "the single-step model has only the exact backend"));
    }
    let names = base.param_names();
    let mut columns = vec![var.map_or("point", |v| v.name()).to_string()];
    for (_, sfx) in &backends {
        for n in names {
            columns.push(format!("crlb_{n}{sfx}"));
            columns.push(format!("se_{n}{sfx}"));
        }
        columns.push(format!("pseudo_inverse{sfx}"));
        columns.push(format!("error{sfx}"));
    }
    let curves: Vec<Vec<estimate::CurvePoint>> = backends
        .iter()
        .map(|(b, _)| {
            let opts = FisherOptions::new(a.mc_samples, a.seed, *b);
            match var {
                Some(v) => estimate::crlb_curve(&base, v, &values, &opts),
                None => vec![estimate::CurvePoint {
                    value: f64::NAN,
                    estimate: estimate::fisher_information(&base, &FisherOptions { richardson_check: true, ..opts })
                        .map_err(|e| e.to_string()),
                }],
            }
        })
        .collect();

    let mut table = Table::new(columns);
    let mut richardson = Vec::new();
    let mut failures = 0;
    for (i, &x) in values.iter().enumerate() {
        let mut row: Vec<Cell> = vec![if var.is_some() { x.into() } else { (i as u64).into() }];
        for curve in &curves {
            match &curve[i].estimate {
                Ok(e) => {
                    for k in 0..names.len() {
                        row.push(e.crlb[k].into());
                        row.push(e.crlb_se[k].into());
                    }
                    row.push(Cell::Text(e.pseudo_inverse.to_string()));
                    row.push(Cell::Empty);
                    if let Some(r) = e.richardson_rel_change {
                        richardson.push(r);
                    }
                }
                Err(msg) => {
                    failures += 1;
                    row.extend(std::iter::repeat_n(Cell::Empty, 2 * names.len() + 1));
                    row.push(Cell::Text(msg.clone()));
                }
            }
        }
        table.push(row);
    }
    let meta = json!({ "params": names, "richardson_rel_change": richardson, "failures": failures });
    emit(&a.output, &Artifact { config, table, extra: vec![], meta: Some(meta) })?;
    if failures == values.len() * curves.len() {
        return Err(Failure::monte_carlo("every sweep point failed"));
    }
    Ok(())
}

fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy * sxy / (sxx * syy)
}

pub fn compare(a: &CompareArgs) -> CliResult<()> {
    let mut config = RunConfig::from_model("compare-asymptotic", &a.model)?.grid(&a.grid)?;
    config.backend = Some(BackendChoice::Both);
    config.count = Some(a.count);
    config.qq_points = Some(a.qq_points);
    config.seed = Some(a.seed);
    if a.qq_points < 2 {
        return Err(Failure::config("qq-points", "need at least two levels"));
    }
    let d = Densities::build(&a.model, BackendChoice::Both)?;
    d.warn_validity();
    let (table, mut meta) = pdf_table(&d, &a.grid, BackendChoice::Both)?;

    let mut scattered: Vec<f64> = simulate(&a.model, a.count, a.seed)?
        .into_iter()
        .filter(|&(_, n)| n > 0)
        .map(|(c, _)| c)
        .collect();
    if scattered.len() < a.qq_points {
        return Err(Failure::monte_carlo(format!(
            "only {} scattered draws for {} qq levels",
            scattered.len(),
            a.qq_points
        )));
    }
    scattered.sort_by(f64::total_cmp);
    let probs: Vec<f64> = (0..a.qq_points).map(|i| (i as f64 + 0.5) / a.qq_points as f64).collect();
    let sample_q: Vec<f64> = probs
        .iter()
        .map(|&u| scattered[((u * scattered.len() as f64) as usize).min(scattered.len() - 1)])
        .collect();
    let asym_q = d.asym().expect("both backends built").cosine_quantiles(&probs)?;
    let mut qq = Table::new(["prob", "sample_quantile", "asymptotic_quantile"]);
    for i in 0..probs.len() {
        qq.push(vec![probs[i].into(), sample_q[i].into(), asym_q[i].into()]);
    }
    meta["qq_r_squared"] = json!(r_squared(&asym_q, &sample_q));
    meta["scattered_draws"] = json!(scattered.len());
    emit(
        &a.output,
        &Artifact {
            config,
            table,
            extra: vec![("qq", qq)],
            meta: Some(meta),
        },
    )
}
