use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "kraw",
    version,
    about = "Exact Krawtchouk polynomials, their Hermite-type expansions, and convergence checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate k_n, K_n, rho and H_n at one point, with the expansions and their residuals.
    Eval(EvalArgs),
    /// Print the coefficients c_j(v) of k_n(Np + v) in powers of N.
    Expand(ExpandArgs),
    /// Run a convergence sweep for one claim and report the fitted order.
    Verify(VerifyArgs),
    /// Dump k_n, K_n and rho over a range of lattice points.
    Table(TableArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Text => "text",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Printed,
    Corrected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PsiBoundArg {
    Literal,
    Matched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Uniform,
    Lattice,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Success probability as an exact literal, e.g. 3/10.
    #[arg(long = "p", default_value = "1/2")]
    pub p: String,
    /// Working precision in bits.
    #[arg(long, default_value_t = 256)]
    pub prec: u32,
    /// Which version of the closed-form displays to use.
    #[arg(long, value_enum, default_value_t = FormArg::Corrected)]
    pub form: FormArg,
    /// Output format; tables default to csv, everything else to text.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "N")]
    pub big_n: u64,
    #[arg(long = "n")]
    pub n: u32,
    /// Order of the Hermite expansion of rho*k_n.
    #[arg(long = "M", default_value_t = 2)]
    pub m: u32,
    /// Lattice coordinate x̂ (exact).
    #[arg(long, group = "point", allow_hyphen_values = true)]
    pub xhat: Option<String>,
    /// Offset v = x̂ − Np (exact).
    #[arg(long = "v", group = "point", allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Scaled coordinate x = v/√(2Npq).
    #[arg(long = "x", group = "point", allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, value_enum, default_value_t = PsiBoundArg::Matched)]
    pub psi_bound: PsiBoundArg,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "n")]
    pub n: u32,
    /// Number of powers of N to produce.
    #[arg(long, default_value_t = 2)]
    pub terms: u32,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Claim tag: thm1, thm1_diff, thm2, cor1, cor2, sharapudinov, lemma1,
    /// m_v_simplified, orthogonality, classical_limit.
    #[arg(long)]
    pub claim: String,
    #[arg(long = "n", default_value_t = 0)]
    pub n: u32,
    #[arg(long = "M", default_value_t = 0)]
    pub m: u32,
    /// Shift of N for cor2.
    #[arg(long = "i", default_value_t = 0)]
    pub i: u32,
    /// Derivative order for thm1_diff.
    #[arg(long = "r", default_value_t = 0)]
    pub r: u32,
    /// Sample size N for orthogonality.
    #[arg(long = "N", default_value_t = 20)]
    pub big_n: u64,
    /// Half-width A of the sampled x range.
    #[arg(long = "A", default_value = "1")]
    pub a: String,
    /// Sample at this fixed x.
    #[arg(long = "x", group = "where", allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Sample at this fixed v.
    #[arg(long = "v", group = "where", allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Sample at v = N^alpha.
    #[arg(long, group = "where")]
    pub v_power: Option<f64>,
    /// Sample |x| <= A on a uniform grid or on the lattice.
    #[arg(long, value_enum, group = "where")]
    pub sampling: Option<SamplingArg>,
    #[arg(long, default_value_t = 64)]
    pub points_per_unit: u32,
    #[arg(long, default_value_t = 1024)]
    pub grid_base: u64,
    #[arg(long, default_value_t = 2)]
    pub grid_ratio: u64,
    #[arg(long, default_value_t = 8)]
    pub grid_count: usize,
    #[arg(long, value_enum, default_value_t = PsiBoundArg::Matched)]
    pub psi_bound: PsiBoundArg,
    /// Skip the rerun at doubled precision.
    #[arg(long)]
    pub no_precision_check: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "N")]
    pub big_n: u64,
    #[arg(long = "n")]
    pub n: u32,
    /// First lattice point (default 0).
    #[arg(long)]
    pub from: Option<u64>,
    /// Last lattice point (default N).
    #[arg(long)]
    pub to: Option<u64>,
}
