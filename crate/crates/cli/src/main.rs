//! `euler-lab`: spectra of the linearized Euler chains, truncated-model
//! simulation, closed-form orbit checks and torus-field verifications.
//!
//! Machine-readable results go to `--output` (written atomically) or to
//! stdout; human-readable summaries go to stderr.
//!
//! Exit codes: 0 ok, 2 usage, 3 non-convergence, 4 verification failure.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use euler_lab::{LabError, WaveVector};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NONCONVERGENCE: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        let code = match &e {
            LabError::Evaluation(_) | LabError::Integration(_) => EXIT_NONCONVERGENCE,
            LabError::Precondition(_) => EXIT_VERIFICATION,
            LabError::Domain(_) | LabError::Config(_) | LabError::Resource(_) | LabError::Io(_) | LabError::Json(_) => {
                EXIT_USAGE
            }
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("i/o error: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "euler-lab",
    version,
    about = "Spectral and dynamical checks for the 2D Euler equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Point spectrum and band of one class chain.
    Spectrum(SpectrumArgs),
    /// Point spectra of many (class, Γ) pairs in parallel.
    Sweep(SweepArgs),
    /// Integrate the five-mode model.
    Simulate(SimulateArgs),
    /// Evaluate and verify the closed-form orbits of the five-mode model.
    Homoclinic(HomoclinicArgs),
    /// Residuals of the gauge (Darboux) transformation on a torus grid.
    Darboux(DarbouxArgs),
    /// Jacobi-identity residuals of the Poisson bracket on random fields.
    Jacobi(JacobiArgs),
    /// Eigen-defects of the Lax pair along the flow of a steady base state.
    Lax(LaxArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Formula,
    PaperTable,
}

impl From<ConventionArg> for euler_lab::spectra::Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Formula => euler_lab::spectra::Convention::Formula,
            ConventionArg::PaperTable => euler_lab::spectra::Convention::PaperTable,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cf,
    Truncation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

fn parse_wave_vector(s: &str) -> Result<WaveVector, String> {
    s.parse().map_err(|e: LabError| e.to_string())
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "paper-table")]
    pub convention: ConventionArg,
    #[arg(long, value_enum, default_value = "cf")]
    pub method: MethodArg,
    /// Half-width N of the (2N+1)-square section for --method truncation.
    #[arg(long, default_value_t = 200)]
    pub truncation_n: usize,
    #[arg(long, default_value_t = 400)]
    pub cf_depth: usize,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub junction: i64,
    /// Root acceptance threshold on |F(λ)|.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Largest dense section dimension.
    #[arg(long, default_value_t = euler_lab::spectra::DEFAULT_MAX_DIM)]
    pub max_dim: usize,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    /// Base mode, `k1,k2`.
    #[arg(long, value_parser = parse_wave_vector, allow_hyphen_values = true)]
    pub p: WaveVector,
    /// Class representative, `k1,k2`.
    #[arg(long, value_parser = parse_wave_vector, allow_hyphen_values = true)]
    pub khat: WaveVector,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_wave_vector, allow_hyphen_values = true)]
    pub p: WaveVector,
    /// Every class with a member of norm at most this radius.
    #[arg(long, conflicts_with = "khat")]
    pub radius: Option<f64>,
    /// Explicit class representatives (repeatable).
    #[arg(long, value_parser = parse_wave_vector, allow_hyphen_values = true)]
    pub khat: Vec<WaveVector>,
    /// Comma-separated amplitudes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
    pub gamma: Vec<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    FiveMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum IntegratorArg {
    Rk4,
    Rk45,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("initial").required(true).args(["ic", "fixed_point"])))]
#[command(group(clap::ArgGroup::new("step").required(true).args(["dt", "tol"])))]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "five-mode")]
    pub model: ModelArg,
    /// JSON file with fields w1, w2, w3, w4, wp and optionally w0, w5.
    #[arg(long)]
    pub ic: Option<PathBuf>,
    /// Start on the fixed point ω_p = Γ.
    #[arg(long, allow_hyphen_values = true)]
    pub fixed_point: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: f64,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Defaults to rk4 with --dt and rk45 with --tol.
    #[arg(long, value_enum)]
    pub integrator: Option<IntegratorArg>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Exit 4 if the relative drift of I, U or J exceeds this.
    #[arg(long)]
    pub max_drift: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

#[derive(Args, Debug)]
pub struct HomoclinicArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub tau0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta0: f64,
    #[arg(long, value_enum, default_value = "plus")]
    pub branch: BranchArg,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub tau_max: f64,
    /// Exit 4 if the maximum residual exceeds --threshold.
    #[arg(long)]
    pub check_residual: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub threshold: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the sampled orbit as a trajectory CSV.
    #[arg(long)]
    pub orbit_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExampleArg {
    Cosine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldFormatArg {
    Csv,
    Binary,
}

impl From<FieldFormatArg> for euler_lab::torus::FieldFormat {
    fn from(f: FieldFormatArg) -> Self {
        match f {
            FieldFormatArg::Csv => euler_lab::torus::FieldFormat::Csv,
            FieldFormatArg::Binary => euler_lab::torus::FieldFormat::Binary,
        }
    }
}

#[derive(Args, Debug)]
pub struct DarbouxArgs {
    #[arg(long, value_enum, default_value = "cosine", conflicts_with = "input_dir")]
    pub example: ExampleArg,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    /// Use p = f, the kernel direction of the gauge transform.
    #[arg(long)]
    pub degenerate: bool,
    /// Read omega, f, p and big_f fields (with sidecars) from this directory.
    #[arg(long)]
    pub input_dir: Option<PathBuf>,
    /// Write the four input fields (with sidecars) to this directory.
    #[arg(long)]
    pub dump_fields: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub field_format: FieldFormatArg,
    #[arg(long, default_value_t = 1e-8)]
    pub threshold: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct JacobiArgs {
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    #[arg(long, default_value_t = 5)]
    pub degree: i64,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub threshold: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PhiArg {
    /// φ = Ω², a λ = 0 eigenfunction.
    Square,
    /// Random real trigonometric polynomial.
    Random,
}

#[derive(Args, Debug)]
pub struct LaxArgs {
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value = "square")]
    pub phi: PhiArg,
    #[arg(long, default_value_t = 8)]
    pub degree: i64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda_im: f64,
    #[arg(long, default_value_t = 5.0)]
    pub t1: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub dt: f64,
    #[arg(long, default_value_t = 11)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub threshold: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Homoclinic(a) => commands::homoclinic(a),
        Command::Darboux(a) => commands::darboux(a),
        Command::Jacobi(a) => commands::jacobi(a),
        Command::Lax(a) => commands::lax(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
