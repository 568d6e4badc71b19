//! `wglasso`: robust sparse precision-matrix estimation from the command
//! line.
//!
//! Exit codes: 0 success, 2 input/parse error, 3 numerical failure,
//! 4 estimator hit its iteration cap (outputs are still written).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use wglasso_cli::commands::{self, ConvergenceOpts, EstimateOpts, ExportGraphOpts, SimulateOpts};
use wglasso_cli::graph::GraphFormat;
use wglasso_cli::harness::{BenchSpec, MethodKind, ModelChoice, RhoPolicy};
use wglasso_core::error::Error;
use wglasso_core::wglasso::Initializer;

#[derive(Parser)]
#[command(
    name = "wglasso",
    about = "Robust sparse precision matrix estimation via adaptively weighted graphical lasso",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_grid(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("grid must be lo:hi:count".to_string());
    }
    let lo: f64 = parts[0].parse().map_err(|_| "bad grid lower bound")?;
    let hi: f64 = parts[1].parse().map_err(|_| "bad grid upper bound")?;
    let count: usize = parts[2].parse().map_err(|_| "bad grid count")?;
    if lo <= 0.0 || lo.is_nan() || hi < lo || count == 0 {
        return Err("grid must satisfy 0 < lo <= hi, count >= 1".to_string());
    }
    Ok((lo, hi, count))
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err("expected on|off".to_string()),
    }
}

fn parse_model(s: &str) -> Result<ModelChoice, String> {
    match s {
        "identity" => Ok(ModelChoice::Identity),
        "ar1" => Ok(ModelChoice::Ar1),
        "perm-ar1" => Ok(ModelChoice::PermAr1),
        _ => Err("expected identity|ar1|perm-ar1".to_string()),
    }
}

fn parse_method(s: &str) -> Result<MethodKind, String> {
    match s {
        "wglasso" => Ok(MethodKind::Wglasso),
        "glasso" => Ok(MethodKind::Glasso),
        "lw" => Ok(MethodKind::Lw),
        "spearman-init-wglasso" => Ok(MethodKind::SpearmanInitWglasso),
        _ => Err("expected wglasso|glasso|lw|spearman-init-wglasso".to_string()),
    }
}

fn parse_init(s: &str) -> Result<Initializer, String> {
    match s {
        "sample" => Ok(Initializer::SampleCov),
        "spearman" => Ok(Initializer::SpearmanCov),
        _ => Err("expected sample|spearman".to_string()),
    }
}

fn parse_format(s: &str) -> Result<GraphFormat, String> {
    match s {
        "edgelist" => Ok(GraphFormat::EdgeList),
        "dot" => Ok(GraphFormat::Dot),
        _ => Err("expected edgelist|dot".to_string()),
    }
}

#[derive(Args)]
struct FitArgs {
    /// Input dataset CSV (one observation per line)
    #[arg(long)]
    input: PathBuf,
    /// Skip one header row
    #[arg(long, default_value_t = false)]
    header: bool,
    /// Fixed tuning parameter
    #[arg(long)]
    rho: Option<f64>,
    /// Select the tuning parameter by cross-validation
    #[arg(long, default_value_t = false)]
    cv: bool,
    /// Log-spaced rho grid as lo:hi:count
    #[arg(long, value_parser = parse_grid, default_value = "0.01:1:20")]
    grid: (f64, f64, usize),
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Squared-Frobenius stopping threshold of the refit loop
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    /// Cap on refit iterations
    #[arg(long = "max-iter", default_value_t = 100)]
    max_iter: usize,
    /// Penalize the diagonal (full l1) or off-diagonals only
    #[arg(long = "penalize-diagonal", value_parser = parse_switch, default_value = "on")]
    penalize_diagonal: bool,
    /// Initial estimate: inverse sample or inverse Spearman covariance
    #[arg(long, value_parser = parse_init, default_value = "sample")]
    init: Initializer,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for omega.csv / summary.json / cv.json
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

impl FitArgs {
    fn into_opts(self) -> EstimateOpts {
        EstimateOpts {
            input: self.input,
            has_header: self.header,
            rho: self.rho,
            cv: self.cv,
            grid: self.grid,
            folds: self.folds,
            delta: self.delta,
            max_iter: self.max_iter,
            penalize_diagonal: self.penalize_diagonal,
            init: self.init,
            seed: self.seed,
            out_dir: self.out_dir,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit the weighted estimator on a dataset
    Estimate(FitArgs),
    /// Cross-validation scan only
    Cv(FitArgs),
    /// Generate a contaminated dataset
    Simulate {
        #[arg(long, value_parser = parse_model, default_value = "ar1")]
        model: ModelChoice,
        #[arg(long, default_value_t = 20)]
        p: usize,
        #[arg(long, default_value_t = 50)]
        n1: usize,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 2.0)]
        mu: f64,
        /// First off-diagonal of the banded models
        #[arg(long, default_value_t = 0.2)]
        offdiag: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        /// Also write the true precision matrix
        #[arg(long = "truth-out")]
        truth_out: Option<PathBuf>,
        /// Also write the inlier mask (1 inlier / 0 outlier per line)
        #[arg(long = "mask-out")]
        mask_out: Option<PathBuf>,
    },
    /// Run a simulation benchmark grid
    Bench {
        /// JSON file with the full grid; flags below override its fields
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "model", value_parser = parse_model, value_delimiter = ',')]
        models: Option<Vec<ModelChoice>>,
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        gamma: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        mu: Option<Vec<f64>>,
        #[arg(long)]
        n1: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long = "method", value_parser = parse_method, value_delimiter = ',')]
        methods: Option<Vec<MethodKind>>,
        #[arg(long)]
        seed: Option<u64>,
        /// Fix rho instead of cross-validating
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(f64, f64, usize)>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long, default_value = "bench_results.csv")]
        output: PathBuf,
    },
    /// Distance-to-truth trend over growing sample sizes
    Convergence {
        #[arg(long, value_parser = parse_model, default_value = "identity")]
        model: ModelChoice,
        #[arg(long, default_value_t = 10)]
        p: usize,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 5.0)]
        mu: f64,
        /// Ascending total sample sizes, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, value_parser = parse_grid, default_value = "0.01:1:20")]
        grid: (f64, f64, usize),
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value = "convergence.csv")]
        output: PathBuf,
    },
    /// Export the support of a precision matrix as a graph
    ExportGraph {
        /// Square matrix CSV, as written by `estimate`
        #[arg(long)]
        input: PathBuf,
        /// Optional node labels, one per line
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, value_parser = parse_format, default_value = "edgelist")]
        format: GraphFormat,
        #[arg(long)]
        output: PathBuf,
    },
}

fn load_bench_spec(path: &PathBuf) -> Result<BenchSpec, Error> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        field: e.column(),
        message: format!("bench config: {e}"),
    })
}

fn run() -> Result<i32, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Estimate(args) => commands::cmd_estimate(&args.into_opts()),
        Command::Cv(args) => commands::cmd_cv(&args.into_opts()),
        Command::Simulate {
            model,
            p,
            n1,
            gamma,
            mu,
            offdiag,
            seed,
            output,
            truth_out,
            mask_out,
        } => commands::cmd_simulate(&SimulateOpts {
            model,
            p,
            n1,
            gamma,
            mu,
            offdiag,
            seed,
            output,
            truth_out,
            mask_out,
        }),
        Command::Bench {
            config,
            models,
            p,
            gamma,
            mu,
            n1,
            reps,
            methods,
            seed,
            rho,
            grid,
            folds,
            output,
        } => {
            let mut spec = match config {
                Some(path) => load_bench_spec(&path)?,
                None => BenchSpec::default(),
            };
            if let Some(v) = models {
                spec.models = v;
            }
            if let Some(v) = p {
                spec.p = v;
            }
            if let Some(v) = gamma {
                spec.gamma = v;
            }
            if let Some(v) = mu {
                spec.mu = v;
            }
            if let Some(v) = n1 {
                spec.n1 = v;
            }
            if let Some(v) = reps {
                spec.reps = v;
            }
            if let Some(v) = methods {
                spec.methods = v;
            }
            if let Some(v) = seed {
                spec.seed = v;
            }
            if let Some(value) = rho {
                spec.rho = RhoPolicy::Fixed { value };
            } else if grid.is_some() || folds.is_some() {
                let (lo, hi, count) = grid.unwrap_or((0.01, 1.0, 20));
                spec.rho = RhoPolicy::Cv {
                    lo,
                    hi,
                    count,
                    folds: folds.unwrap_or(5),
                };
            }
            commands::cmd_bench(&spec, &output)
        }
        Command::Convergence {
            model,
            p,
            gamma,
            mu,
            n,
            reps,
            seed,
            rho,
            grid,
            folds,
            output,
        } => {
            let policy = match rho {
                Some(value) => RhoPolicy::Fixed { value },
                None => {
                    let (lo, hi, count) = grid;
                    RhoPolicy::Cv {
                        lo,
                        hi,
                        count,
                        folds,
                    }
                }
            };
            commands::cmd_convergence(&ConvergenceOpts {
                model,
                p,
                gamma,
                mu,
                n,
                reps,
                seed,
                rho: policy,
                output,
            })
        }
        Command::ExportGraph {
            input,
            labels,
            format,
            output,
        } => commands::cmd_export_graph(&ExportGraphOpts {
            input,
            labels,
            format,
            output,
        }),
    }
}

fn main() {
    let code = match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Parse { .. } | Error::Io(_) => 2,
                _ => 3,
            }
        }
    };
    std::process::exit(code);
}
