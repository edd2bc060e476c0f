use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Train and evaluate optimal margin distribution machines.
#[derive(Debug, Parser)]
#[command(name = "odm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model with explicit hyperparameters (or a grid search with --cv).
    Train(TrainArgs),
    /// Classify a LIBSVM file with a saved model.
    Predict(PredictArgs),
    /// Grid search by k-fold cross-validation, then refit the winner.
    Cv(CvArgs),
    /// Export the cumulative margin distribution as CSV.
    Margins(MarginsArgs),
    /// Leave-one-out bound of a model trained with --keep-alpha.
    LooBound(LooBoundArgs),
    /// Repeated half/half evaluation over a directory of datasets.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Svm,
    Odml,
    Odm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Dcd,
    Svrg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SnapshotArg {
    Random,
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GridArg {
    Coarse,
    Paper,
}

#[derive(Debug, Clone, Args)]
struct HyperArgs {
    /// Hinge weight (svm, odml).
    #[arg(long)]
    c: Option<f64>,
    /// Margin-variance weight (odml).
    #[arg(long)]
    lambda1: Option<f64>,
    /// Margin-mean weight (odml).
    #[arg(long)]
    lambda2: Option<f64>,
    /// Weight below the band (odm).
    #[arg(long)]
    c1: Option<f64>,
    /// Weight above the band (odm).
    #[arg(long)]
    c2: Option<f64>,
    /// Band half-width (odm).
    #[arg(long)]
    d: Option<f64>,
    /// RBF width; defaults to the mean pairwise distance of the training set.
    #[arg(long)]
    width: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverArg::Dcd)]
    solver: SolverArg,
    /// DCD stopping threshold on the max projected gradient.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    max_passes: usize,
    /// SVRG step size; defaults to 0.1 over a Lipschitz estimate.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 30)]
    stages: usize,
    #[arg(long, value_enum, default_value_t = SnapshotArg::Random)]
    snapshot: SnapshotArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip min-max feature scaling.
    #[arg(long)]
    no_normalize: bool,
    /// Append a constant feature with this value.
    #[arg(long)]
    bias: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    /// Base grid; the per-parameter lists below override it.
    #[arg(long, value_enum, default_value_t = GridArg::Coarse)]
    grid: GridArg,
    #[arg(long, value_delimiter = ',')]
    c_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambda1_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambda2_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    c1_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    c2_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    d_values: Option<Vec<f64>>,
    /// RBF widths as multiples of the mean pairwise distance.
    #[arg(long, value_delimiter = ',')]
    width_factors: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
}

#[derive(Debug, Clone, Args)]
struct TrainArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = KernelArg::Linear)]
    kernel: KernelArg,
    #[arg(long)]
    model_out: PathBuf,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Store the dual solution for loo-bound.
    #[arg(long)]
    keep_alpha: bool,
    /// Pick hyperparameters by cross-validation instead of flags.
    #[arg(long)]
    cv: bool,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct CvArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = KernelArg::Linear)]
    kernel: KernelArg,
    #[arg(long)]
    model_out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    keep_alpha: bool,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
struct MarginsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct LooBoundArgs {
    #[arg(long)]
    model: PathBuf,
    /// Also count exact leave-one-out errors by retraining (needs --input).
    #[arg(long)]
    exact: bool,
    /// The training set, for --exact.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Largest training set --exact will retrain on.
    #[arg(long, default_value_t = 200)]
    max_m: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    max_passes: usize,
}

#[derive(Debug, Clone, Args)]
struct BenchArgs {
    /// Directory of LIBSVM files; each file is one dataset.
    #[arg(long)]
    datasets: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "svm,odml,odm")]
    methods: Vec<VariantArg>,
    #[arg(long, value_enum, default_value_t = KernelArg::Linear)]
    kernel: KernelArg,
    #[arg(long, default_value_t = 30)]
    repeats: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write NA for seconds so the CSV depends only on inputs and seed.
    #[arg(long)]
    no_timing: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Cv(a) => commands::cv(a),
        Command::Margins(a) => commands::margins(a),
        Command::LooBound(a) => commands::loo_bound(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
