//! Command-line interface: dataset generation, discovery runs, path export,
//! gradient checks, and the benchmark-table reproduction.
//!
//! Exit codes: 0 success, 1 runtime/solver failure, 2 usage error. Human
//! summaries go to standard output, machine artifacts to `--out`.

mod bench;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hyperfit::datasets::{
    add_noise, generate_truth, read_csv, write_csv, SamplingGrid, TruthModel, ALL_TRUTH_MODELS,
};
use hyperfit::discovery::{
    linear_lasso_path, nonlinear_pathwise, path_to_csv, run_linear_discovery,
    run_nonlinear_discovery, LinearMethod, NonlinearMethod, SelectionCriterion, StartPoint,
};
use hyperfit::hyperelastic::{nonlinear_objective, Dataset, HyperelasticLibrary};
use hyperfit::proximal::{check_gradient, IstaConfig};

#[derive(Parser)]
#[command(name = "hyperfit", version, about = "Sparse discovery of hyperelastic material models")]
struct Cli {
    /// Seed for anything stochastic; the default keeps runs reproducible.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output file (or directory for `bench`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Artifact format for `discover`: full report or plot-ready path.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset as CSV.
    Generate(GenerateArgs),
    /// Run a discovery pipeline on a dataset file.
    Discover(DiscoverArgs),
    /// Export a regularization path as CSV without selection or refit.
    PathExport(DiscoverArgs),
    /// Validate the analytic gradient against finite differences.
    GradCheck(GradCheckArgs),
    /// Rerun every benchmark row and emit a comparison table.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Truth model name.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 50)]
    n_utc: usize,
    #[arg(long, default_value_t = 50)]
    n_ss: usize,
    /// Standard deviation of the Gaussian stress noise.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Cd,
    LarsLasso,
    Ista,
    Pathwise,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum W0 {
    Zeros,
    Ones,
    Ols,
}

#[derive(Args)]
struct DiscoverArgs {
    /// Dataset CSV produced by `generate` (or matching its format).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    /// Regularization weight (required for cd and ista).
    #[arg(long)]
    alpha: Option<f64>,
    /// Schedule length (required for pathwise).
    #[arg(long)]
    n_alpha: Option<usize>,
    /// Initial guess for ista.
    #[arg(long, value_enum, default_value_t = W0::Ones)]
    w0: W0,
    /// Mooney polynomial order.
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Include the Ogden pair (nonlinear methods only).
    #[arg(long, default_value_t = false)]
    ogden: bool,
    /// Knot selection: `sparsity:<k>` or `plateau:<rel_drop>`.
    #[arg(long, default_value = "plateau:0.05")]
    select: String,
}

#[derive(Args)]
struct GradCheckArgs {
    /// Dataset CSV; a noise-free mixed-model dataset is generated when
    /// omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "mixed")]
    model: String,
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Restrict to one noise level (0 or 5); both run by default.
    #[arg(long)]
    sigma: Option<f64>,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<hyperfit::Error> for CliError {
    fn from(e: hyperfit::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Generate(args) => cmd_generate(&cli, args),
        Command::Discover(args) => cmd_discover(&cli, args, false),
        Command::PathExport(args) => cmd_discover(&cli, args, true),
        Command::GradCheck(args) => cmd_grad_check(&cli, args),
        Command::Bench(args) => bench::cmd_bench(&cli, args),
    }
}

fn parse_model(name: &str) -> Result<TruthModel, CliError> {
    TruthModel::parse(name).ok_or_else(|| {
        let names: Vec<&str> = ALL_TRUTH_MODELS.iter().map(|m| m.name()).collect();
        usage(format!(
            "unknown model {name:?}; valid models: {}",
            names.join(", ")
        ))
    })
}

fn parse_selection(text: &str) -> Result<SelectionCriterion<f64>, CliError> {
    let invalid = || usage(format!("bad --select {text:?}; use sparsity:<k> or plateau:<r>"));
    let (kind, value) = text.split_once(':').ok_or_else(invalid)?;
    match kind {
        "sparsity" => Ok(SelectionCriterion::SparsityTarget(
            value.parse::<usize>().map_err(|_| invalid())?,
        )),
        "plateau" => {
            let r = value.parse::<f64>().map_err(|_| invalid())?;
            if !(r > 0.0 && r < 1.0) {
                return Err(invalid());
            }
            Ok(SelectionCriterion::MismatchPlateau(r))
        }
        _ => Err(invalid()),
    }
}

/// Generous initial step for the normalized mismatch (the backtracking line
/// search calibrates it on the first iteration) and a budget sized for the
/// nearly collinear Ogden/Mooney valleys.
fn nonlinear_config() -> IstaConfig<f64> {
    IstaConfig {
        step: 1e6,
        max_steps: 5_000_000,
        ..IstaConfig::default()
    }
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs) -> CliResult {
    let model = parse_model(&args.model)?;
    if args.sigma < 0.0 {
        return Err(usage("--sigma must be nonnegative"));
    }
    let grid = SamplingGrid::new(args.n_utc, args.n_ss)
        .map_err(|_| usage("at least one sample is required"))?;
    let clean = generate_truth::<f64>(model, &grid);
    let data = add_noise(&clean, args.sigma, cli.seed);
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("dataset.csv"));
    write_csv(&data, &out)?;
    println!(
        "model {} | n_utc {} | n_ss {} | sigma {} | seed {}",
        model.name(),
        args.n_utc,
        args.n_ss,
        args.sigma,
        cli.seed
    );
    println!(
        "P11_max {:.6} | P12_max {:.6} | wrote {}",
        data.p11_max(),
        data.p12_max(),
        out.display()
    );
    Ok(())
}

fn load_dataset(path: &PathBuf) -> Result<Dataset<f64>, CliError> {
    Ok(read_csv::<f64>(path)?)
}

fn cmd_discover(cli: &Cli, args: &DiscoverArgs, export_only: bool) -> CliResult {
    if args.order < 1 {
        return Err(usage("--order must be at least 1"));
    }
    let selection = parse_selection(&args.select)?;
    match args.method {
        Method::Cd | Method::LarsLasso => {
            if args.ogden {
                return Err(usage("--ogden requires a nonlinear method (ista or pathwise)"));
            }
        }
        Method::Ista | Method::Pathwise => {}
    }
    let alpha = || {
        args.alpha
            .ok_or_else(|| usage("--alpha is required for this method"))
    };

    let data = load_dataset(&args.data)?;

    if export_only {
        let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("path.csv"));
        let (library, knots) = match args.method {
            Method::LarsLasso => {
                let (library, path, _) = linear_lasso_path(&data, args.order)?;
                (library, path.knots)
            }
            Method::Pathwise => {
                let n_alpha = args
                    .n_alpha
                    .ok_or_else(|| usage("--n-alpha is required for pathwise"))?;
                if n_alpha < 2 {
                    return Err(usage("--n-alpha must be at least 2"));
                }
                let library = HyperelasticLibrary::new(args.order, args.ogden);
                let path = nonlinear_pathwise(&data, library, n_alpha, &nonlinear_config())?;
                (library, path.knots)
            }
            _ => return Err(usage("path-export needs --method lars-lasso or pathwise")),
        };
        std::fs::write(&out, path_to_csv(&library, &knots)).map_err(hyperfit::Error::from)?;
        println!("{} knots | wrote {}", knots.len(), out.display());
        return Ok(());
    }

    let report = match args.method {
        Method::Cd => run_linear_discovery(
            &data,
            args.order,
            &LinearMethod::Cd { alpha: alpha()? },
            &selection,
        )?,
        Method::LarsLasso => {
            run_linear_discovery(&data, args.order, &LinearMethod::LarsLasso, &selection)?
        }
        Method::Ista => {
            let library = HyperelasticLibrary::new(args.order, args.ogden);
            let start = match args.w0 {
                W0::Zeros => StartPoint::Zeros,
                W0::Ones => StartPoint::Ones,
                W0::Ols => StartPoint::Ols,
            };
            run_nonlinear_discovery(
                &data,
                library,
                &NonlinearMethod::Ista {
                    alpha: alpha()?,
                    start,
                },
                &selection,
                &nonlinear_config(),
            )?
        }
        Method::Pathwise => {
            let n_alpha = args
                .n_alpha
                .ok_or_else(|| usage("--n-alpha is required for pathwise"))?;
            if n_alpha < 2 {
                return Err(usage("--n-alpha must be at least 2"));
            }
            let library = HyperelasticLibrary::new(args.order, args.ogden);
            run_nonlinear_discovery(
                &data,
                library,
                &NonlinearMethod::Pathwise { n_alpha },
                &selection,
                &nonlinear_config(),
            )?
        }
    };

    let (out, artifact) = match cli.format {
        Format::Json => (
            cli.out
                .clone()
                .unwrap_or_else(|| PathBuf::from("report.json")),
            report.to_json(),
        ),
        Format::Csv => (
            cli.out.clone().unwrap_or_else(|| PathBuf::from("path.csv")),
            report.path_csv(),
        ),
    };
    std::fs::write(&out, artifact).map_err(hyperfit::Error::from)?;
    println!("energy: {}", report.energy);
    println!("refit mismatch: {:e}", report.refit.mismatch);
    println!("selected knot {} of {} | wrote {}", report.selected, report.path.len(), out.display());
    Ok(())
}

fn cmd_grad_check(cli: &Cli, args: &GradCheckArgs) -> CliResult {
    let model = parse_model(&args.model)?;
    if args.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let data = match &args.data {
        Some(path) => load_dataset(path)?,
        None => generate_truth::<f64>(model, &SamplingGrid::default()),
    };
    let library = HyperelasticLibrary::new(args.order, true);
    let objective = nonlinear_objective(&data, library)?;
    let report = check_gradient(&objective, args.trials, cli.seed);
    println!(
        "trials {} | max relative error {:.3e} (trial {}, coordinate {})",
        report.trials, report.max_rel_err, report.worst_trial, report.worst_coord
    );
    if report.pass {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(CliError::Runtime(
            "analytic gradient disagrees with finite differences".to_string(),
        ))
    }
}

