//! Implementations behind the CLI subcommands. Each returns the process
//! exit code; errors bubble up to `main` for exit-code mapping.

use std::path::{Path, PathBuf};

use serde::Serialize;

use wglasso_core::dataset;
use wglasso_core::error::Result;
use wglasso_core::selection;
use wglasso_core::simgen::{self, ContaminationSpec, MuShift};
use wglasso_core::wglasso::{self, Initializer, WglassoConfig};

use crate::graph::{GraphExport, GraphFormat};
use crate::harness::{self, BenchSpec, ModelChoice, RhoPolicy};
use crate::matio;

/// Exit code for a fit that hit its iteration cap (outputs are written
/// regardless).
pub const EXIT_NO_CONVERGENCE: i32 = 4;

#[derive(Debug, Clone)]
pub struct EstimateOpts {
    pub input: PathBuf,
    pub has_header: bool,
    pub rho: Option<f64>,
    pub cv: bool,
    pub grid: (f64, f64, usize),
    pub folds: usize,
    pub delta: f64,
    pub max_iter: usize,
    pub penalize_diagonal: bool,
    pub init: Initializer,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct CvCellJson {
    rho: f64,
    mean_ise: f64,
    failures: usize,
}

#[derive(Serialize)]
struct CvJson {
    best_rho: f64,
    table: Vec<CvCellJson>,
}

#[derive(Serialize)]
struct EstimateSummary {
    rho: f64,
    iterations: usize,
    converged: bool,
    objective: f64,
    weights: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cv: Option<CvJson>,
}

fn build_config(opts: &EstimateOpts, rho: f64) -> WglassoConfig {
    let mut cfg = WglassoConfig::new(rho);
    cfg.glasso.penalize_diagonal = opts.penalize_diagonal;
    cfg.delta = opts.delta;
    cfg.max_outer_iters = opts.max_iter;
    cfg.initializer = opts.init.clone();
    cfg
}

fn cv_json(sel: &selection::RhoSelection) -> CvJson {
    CvJson {
        best_rho: sel.best_rho,
        table: sel
            .table
            .iter()
            .map(|c| CvCellJson {
                rho: c.rho,
                mean_ise: c.mean_score,
                failures: c.failures,
            })
            .collect(),
    }
}

/// `estimate`: fit one dataset, write `omega.csv` and `summary.json`.
pub fn cmd_estimate(opts: &EstimateOpts) -> Result<i32> {
    let raw = dataset::load_csv(&opts.input, opts.has_header)?;
    let data = dataset::center(&raw);

    let (rho, cv) = if opts.cv {
        let cfg = build_config(opts, 0.1);
        let (lo, hi, count) = opts.grid;
        let sel = selection::select_rho(
            &data,
            &harness::log_grid(lo, hi, count),
            &cfg,
            opts.folds,
            opts.seed,
        )?;
        (sel.best_rho, Some(cv_json(&sel)))
    } else {
        (opts.rho.unwrap_or(0.1), None)
    };

    let cfg = build_config(opts, rho);
    let res = wglasso::fit(&data, &cfg)?;
    let objective = res
        .trace
        .last()
        .map(|t| t.objective)
        .unwrap_or(f64::NAN);

    std::fs::create_dir_all(&opts.out_dir)?;
    matio::write_matrix_csv(&res.omega, opts.out_dir.join("omega.csv"))?;
    let summary = EstimateSummary {
        rho,
        iterations: res.outer_iters,
        converged: res.converged,
        objective,
        weights: res.weights.as_slice().to_vec(),
        cv,
    };
    std::fs::write(
        opts.out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;

    if res.converged {
        Ok(0)
    } else {
        eprintln!(
            "warning: no convergence after {} iterations (outputs written)",
            res.outer_iters
        );
        Ok(EXIT_NO_CONVERGENCE)
    }
}

/// `cv`: run the cross-validation scan only and write `cv.json`.
pub fn cmd_cv(opts: &EstimateOpts) -> Result<i32> {
    let raw = dataset::load_csv(&opts.input, opts.has_header)?;
    let data = dataset::center(&raw);
    let cfg = build_config(opts, 0.1);
    let (lo, hi, count) = opts.grid;
    let sel = selection::select_rho(
        &data,
        &harness::log_grid(lo, hi, count),
        &cfg,
        opts.folds,
        opts.seed,
    )?;
    std::fs::create_dir_all(&opts.out_dir)?;
    std::fs::write(
        opts.out_dir.join("cv.json"),
        serde_json::to_string_pretty(&cv_json(&sel)).expect("cv table serializes"),
    )?;
    println!("best_rho {}", sel.best_rho);
    Ok(0)
}

#[derive(Debug, Clone)]
pub struct SimulateOpts {
    pub model: ModelChoice,
    pub p: usize,
    pub n1: usize,
    pub gamma: f64,
    pub mu: f64,
    pub offdiag: f64,
    pub seed: u64,
    pub output: PathBuf,
    pub truth_out: Option<PathBuf>,
    pub mask_out: Option<PathBuf>,
}

/// `simulate`: write one contaminated dataset (and optionally the true
/// precision matrix and the inlier mask).
pub fn cmd_simulate(opts: &SimulateOpts) -> Result<i32> {
    let model =
        simgen::build_model_with_offdiag(opts.model.kind(), opts.p, opts.seed, opts.offdiag);
    let spec = ContaminationSpec::new(opts.n1, opts.gamma, MuShift::Scalar(opts.mu), opts.seed);
    let (data, mask) = simgen::sample(&model, &spec)?;
    dataset::write_csv(&data, &opts.output)?;
    if let Some(path) = &opts.truth_out {
        matio::write_matrix_csv(&model.omega, path)?;
    }
    if let Some(path) = &opts.mask_out {
        let text: String = mask
            .iter()
            .map(|&m| if m { "1\n" } else { "0\n" })
            .collect();
        std::fs::write(path, text)?;
    }
    Ok(0)
}

/// `bench`: run the scenario grid and write the results CSV.
pub fn cmd_bench(spec: &BenchSpec, output: &Path) -> Result<i32> {
    let table = harness::run_bench(spec)?;
    std::fs::write(output, table.to_csv())?;
    Ok(0)
}

#[derive(Debug, Clone)]
pub struct ConvergenceOpts {
    pub model: ModelChoice,
    pub p: usize,
    pub gamma: f64,
    pub mu: f64,
    pub n: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub rho: RhoPolicy,
    pub output: PathBuf,
}

/// `convergence`: distance-to-truth trend over ascending sample sizes.
pub fn cmd_convergence(opts: &ConvergenceOpts) -> Result<i32> {
    let table = harness::run_convergence(
        opts.model,
        opts.p,
        opts.gamma,
        opts.mu,
        &opts.n,
        opts.reps,
        opts.seed,
        &opts.rho,
    )?;
    std::fs::write(&opts.output, table.to_csv())?;
    Ok(0)
}

#[derive(Debug, Clone)]
pub struct ExportGraphOpts {
    pub input: PathBuf,
    pub labels: Option<PathBuf>,
    pub format: GraphFormat,
    pub output: PathBuf,
}

/// `export-graph`: support of a precision matrix as an edge list or DOT
/// file; the hub ranking goes to stdout.
pub fn cmd_export_graph(opts: &ExportGraphOpts) -> Result<i32> {
    let omega = matio::read_matrix_csv(&opts.input)?;
    let labels = match &opts.labels {
        Some(path) => Some(
            std::fs::read_to_string(path)?
                .lines()
                .map(str::to_string)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>(),
        ),
        None => None,
    };
    let graph = GraphExport::from_matrix(&omega, labels)?;
    std::fs::write(&opts.output, graph.render(opts.format))?;
    print!("{}", graph.hub_ranking_text());
    Ok(0)
}
