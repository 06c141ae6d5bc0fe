use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "painleve-tau",
    version,
    about = "Extended-precision LUE generating function, tau sequences and their checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

/// Flags shared by every command; each command reads the ones it needs.
#[derive(Args, Debug, Clone, Default)]
pub struct Opts {
    /// Matrix size / determinant order.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Evaluation point, e.g. `1/10`, `0.1` or `1e6` (read exactly).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Comma-separated list of evaluation points.
    #[arg(long = "t-grid", global = true, allow_hyphen_values = true)]
    pub t_grid: Option<String>,
    /// Bessel order of the combination `a I_v + b e^{vπi} K_v`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Series order.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Recurrence steps.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// Starting precision in bits (default 256, or `PAINLEVE_TAU_BITS`).
    #[arg(long, global = true)]
    pub bits: Option<u32>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-bits", global = true)]
    pub max_bits: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write records here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// M_n(t) by one route or all of them.
    Mgf,
    /// Exact cumulants and moments of L.
    Cumulants,
    /// Coefficients of the scaled limits Y, F or the auxiliary r.
    LimitSeries {
        #[arg(value_enum)]
        which: SeriesKind,
    },
    /// The (p_n, q_n) orbit with discrete-equation residuals.
    Recurrence,
    /// Tau sequence by three routes and the Toda residual.
    Toda {
        /// Gauge exponent: the Wronskian of t^kappa L_v(sqrt t).
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<String>,
    },
    /// Residual of a differential equation at a computed jet.
    Residual {
        #[arg(value_enum)]
        kind: ResidualKind,
    },
    /// Hard-edge determinant and its log-derivative.
    HardEdge,
    /// Generalized gap probability E_n(s).
    Gap,
    /// Apply a Backlund transformation to an exact state.
    Backlund {
        #[arg(value_enum)]
        op: BacklundOp,
        #[arg(long, allow_hyphen_values = true)]
        v1: String,
        #[arg(long, allow_hyphen_values = true)]
        v2: String,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// Monte-Carlo LUE samples of L.
    Sample {
        #[arg(long)]
        count: Option<usize>,
    },
    /// Run a cross-check suite.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::Quick)]
        suite: Suite,
    },
    /// M_n over a t-grid (plot data).
    Sweep,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    #[value(name = "Y")]
    Y,
    #[value(name = "F")]
    F,
    #[value(name = "r")]
    R,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    Siii,
    Sv,
    Y,
    Piii,
    H,
    Jacobi,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BacklundOp {
    S0,
    S1,
    S2,
    T1,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Quick,
    Full,
}
