use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "sphere-scatter", version, about = "Random walks and multiple scattering on hyperspheres")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Legendre coefficients of one vMF step, the n-step walk and its vMF approximation.
    Fourier(FourierArgs),
    /// Projected densities of the cosine on a t grid.
    Pdf(PdfArgs),
    /// Simulated cosines and scattering event counts.
    Sample(SampleArgs),
    /// Monte-Carlo Cramér-Rao bounds along a parameter sweep.
    Crlb(CrlbArgs),
    /// Exact vs asymptotic densities plus qq data against simulated cosines.
    CompareAsymptotic(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Walk,
    Poisson,
    Negbin,
    /// One vMF step (degenerate scattering model; crlb only).
    Vmf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    Exact,
    Asymptotic,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "walk")]
    pub model: ModelKind,
    /// Ambient dimension; directions live on S^{p-1}.
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    /// Step concentration.
    #[arg(long, conflicts_with = "rho", allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Step mean resultant length, converted to κ.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Number of walk steps.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "lambda-t", allow_negative_numbers = true)]
    pub lambda_t: Option<f64>,
    /// Gamma intensity rate.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Gamma intensity shape.
    #[arg(long = "xi-t", allow_negative_numbers = true)]
    pub xi_t: Option<f64>,
    /// Bound on the neglected series remainder.
    #[arg(long, default_value_t = 1e-8, allow_negative_numbers = true)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads for Monte-Carlo work (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Number of t grid points.
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    #[arg(long = "t-min", default_value_t = -1.0, allow_negative_numbers = true)]
    pub t_min: f64,
    #[arg(long = "t-max", default_value_t = 1.0, allow_negative_numbers = true)]
    pub t_max: f64,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 20)]
    pub lmax: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PdfArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "exact")]
    pub backend: BackendChoice,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 100_000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CrlbArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sweep as name=v1,v2,… with name in kappa, rho, lambda-t, theta, xi-t.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long = "mc-samples", default_value_t = 100_000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    pub backend: BackendChoice,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Simulated draws for the qq table.
    #[arg(long, default_value_t = 100_000)]
    pub count: usize,
    /// Probability levels in the qq table.
    #[arg(long = "qq-points", default_value_t = 1000)]
    pub qq_points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}
