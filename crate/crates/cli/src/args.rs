use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "ckn-lab", version, about = "Numerical checks for the weighted Caffarelli–Kohn–Nirenberg inequality")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long = "rel-tol", global = true, default_value_t = 1e-12)]
    pub rel_tol: f64,
    /// Output file (written atomically); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for grids and scans.
    #[arg(long, global = true, env = "CKN_LAB_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct ParamArgs {
    #[arg(long = "N")]
    pub n: u32,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub s: f64,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct RadiusRange {
    #[arg(long = "rho-min", default_value_t = 1e-3)]
    pub rho_min: f64,
    #[arg(long = "rho-max", default_value_t = 1e3)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 60)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ConstantArg {
    C1,
    C2,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Validate a parameter tuple and print the derived exponents.
    Validate {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Sample U_λ and W₀ on a log grid.
    Bubble {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        range: RadiusRange,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Euler–Lagrange residual of the bubble.
    Residual {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        range: RadiusRange,
    },
    /// Best constant by both routes.
    Constant {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Eigenvalues of one spherical mode.
    Spectrum {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0)]
        mode: u32,
        #[arg(long, default_value_t = 3)]
        neigs: usize,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        /// Include eigenfunction samples in JSON output.
        #[arg(long)]
        eigenfunctions: bool,
    },
    /// Known eigenvalues, simplicity and the k ≥ 1 margins.
    Nondegeneracy {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        #[arg(long = "k-max", default_value_t = 3)]
        k_max: u32,
    },
    /// Spectral gap τ̂.
    Gap {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        #[arg(long = "k-max", default_value_t = 3)]
        k_max: u32,
    },
    /// Distance from a sampled profile (CSV: radius,value[,derivative]) to the extremal manifold.
    Distance {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        input: PathBuf,
    },
    /// Deficit against distance along U + εw.
    Scan {
        #[command(flatten)]
        params: ParamArgs,
        /// Which of the three built-in orthogonal directions.
        #[arg(long, default_value_t = 0)]
        direction: usize,
        #[arg(long = "eps-min", default_value_t = 1e-3)]
        eps_min: f64,
        #[arg(long = "eps-max", default_value_t = 1e-1)]
        eps_max: f64,
        #[arg(long, default_value_t = 12)]
        points: usize,
    },
    /// Integrated second-order expansions around cU_λ.
    Expansion {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.1)]
        d: f64,
        #[arg(long, default_value_t = 0.1)]
        kappa: f64,
        #[arg(long, default_value_t = 0)]
        direction: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
    },
    /// Search and verify the constants of the pointwise expansions.
    Ineq {
        #[arg(long, value_enum)]
        kind: ConstantArg,
        /// `p` for C1, `r` for C2.
        #[arg(long)]
        exponent: f64,
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Fresh samples for the verification pass.
        #[arg(long, default_value_t = 100_000)]
        verify: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// Classify one point or map a rectangle of the (a, b) plane.
    Regions {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        map: bool,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        #[arg(long = "a-min", default_value_t = -3.0, allow_hyphen_values = true)]
        a_min: f64,
        #[arg(long = "a-max", allow_hyphen_values = true)]
        a_max: Option<f64>,
        #[arg(long = "b-min", default_value_t = -3.0, allow_hyphen_values = true)]
        b_min: f64,
        #[arg(long = "b-max", allow_hyphen_values = true)]
        b_max: Option<f64>,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// The acceptance suite.
    All {
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        #[arg(long = "ineq-samples", default_value_t = 100_000)]
        ineq_samples: usize,
        /// Run only these criteria (1–10).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}
