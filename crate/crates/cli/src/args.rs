use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dyadint",
    version,
    about = "Rigorous integration by upper and lower sums over dyadic cubes"
)]
pub struct Cli {
    /// Worker threads for cube evaluation. Output does not depend on it.
    #[arg(long, global = true, env = "DYADINT_THREADS")]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    pub output: Output,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Uniform,
    Adaptive,
}

#[derive(Debug, Args)]
pub struct Budget {
    /// Target gap between the upper and lower sums.
    #[arg(long = "eps", value_name = "EPSILON")]
    pub epsilon: Option<f64>,

    /// Finest dyadic level.
    #[arg(long)]
    pub k_max: Option<u32>,

    #[arg(long, value_enum, default_value_t = StrategyArg::Adaptive)]
    pub strategy: StrategyArg,
}

#[derive(Debug, Args)]
pub struct Integrand {
    /// Number of variables.
    #[arg(long)]
    pub dim: Option<usize>,

    /// Expression in x1, x2, ...
    #[arg(long, conflicts_with = "oracle", allow_hyphen_values = true)]
    pub expr: Option<String>,

    /// Box outside which the integrand vanishes, e.g. "[0,1)x[0,1)".
    #[arg(long, conflicts_with = "oracle")]
    pub support: Option<String>,

    /// Oracle pipeline, e.g. `expr "x1" on [0,1] | abs`.
    #[arg(long)]
    pub oracle: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate an expression or oracle pipeline.
    Integrate {
        #[command(flatten)]
        integrand: Integrand,
        #[command(flatten)]
        budget: Budget,
        /// Include the final step-function sandwich in the report.
        #[arg(long)]
        step_function: bool,
        /// Report non-convergence when an indicator's gap stalls.
        #[arg(long)]
        detect_stall: bool,
    },
    /// Jordan measure of a region.
    Measure {
        /// Region JSON, inline or as a file path.
        #[arg(long)]
        region: String,
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        budget: Budget,
        #[arg(long)]
        detect_stall: bool,
    },
    /// Decide whether a region can be covered by dyadic cubes of small total volume.
    VerySmall {
        #[arg(long)]
        region: String,
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Compare a direct integral with the repeated integral.
    FubiniCheck {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        /// Integrate over this box.
        #[arg(long, conflicts_with_all = ["region", "outer"])]
        support: Option<String>,
        /// Integrate over this region.
        #[arg(long, conflicts_with = "outer")]
        region: Option<String>,
        /// Outer box of a graph domain `lower <= x_m <= upper`.
        #[arg(long, requires_all = ["lower", "upper"])]
        outer: Option<String>,
        #[arg(long, requires = "outer", allow_hyphen_values = true)]
        lower: Option<String>,
        #[arg(long, requires = "outer", allow_hyphen_values = true)]
        upper: Option<String>,
        /// Also integrate with the first and last variables exchanged.
        #[arg(long)]
        swap: bool,
        #[command(flatten)]
        budget: Budget,
    },
    /// Compare the integral of g over [a, b) with F(b) - F(a).
    NlCheck {
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long = "F", value_name = "F", allow_hyphen_values = true)]
        antiderivative: String,
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[command(flatten)]
        budget: Budget,
    },
    /// Semiclosed, closed and classical brackets side by side.
    EquivalenceReport {
        #[command(flatten)]
        integrand: Integrand,
        #[arg(long)]
        k_max: Option<u32>,
        /// Seed for the random partitions.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Finest schedule partition has 2^finest cells per axis.
        #[arg(long)]
        finest: Option<u32>,
        /// Extra partition JSON files, evaluated after the schedule.
        #[arg(long)]
        partition: Vec<String>,
    },
}
