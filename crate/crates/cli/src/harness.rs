//! Monte Carlo benchmark harness: runs estimator-method grids over
//! simulated scenarios and aggregates per-cell means and standard errors.
//!
//! Replications execute in a worker pool; results are keyed by replication
//! index and reduced in index order, so the emitted tables are
//! byte-identical across runs for a fixed seed regardless of scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use wglasso_core::baselines;
use wglasso_core::dataset::{self, Dataset};
use wglasso_core::error::Result;
use wglasso_core::glasso::{self, GlassoConfig};
use wglasso_core::linalg::SymMatrix;
use wglasso_core::metrics::{self, EvalReport};
use wglasso_core::selection;
use wglasso_core::simgen::{build_model, sample, ContaminationSpec, ModelKind, MuShift, TrueModel};
use wglasso_core::wglasso::{self, Initializer, WglassoConfig};

/// splitmix64 step, used to derive independent sub-seeds from a master
/// seed and an index path.
fn mix(mut state: u64, parts: &[u64]) -> u64 {
    for &p in parts {
        state = state.wrapping_add(0x9e3779b97f4a7c15).wrapping_add(p);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        state = z ^ (z >> 31);
    }
    state
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    Identity,
    Ar1,
    PermAr1,
}

impl ModelChoice {
    pub fn kind(self) -> ModelKind {
        match self {
            ModelChoice::Identity => ModelKind::Identity,
            ModelChoice::Ar1 => ModelKind::Ar1,
            ModelChoice::PermAr1 => ModelKind::PermutedAr1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelChoice::Identity => "identity",
            ModelChoice::Ar1 => "ar1",
            ModelChoice::PermAr1 => "perm-ar1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Wglasso,
    Glasso,
    Lw,
    SpearmanInitWglasso,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Wglasso => "wglasso",
            MethodKind::Glasso => "glasso",
            MethodKind::Lw => "lw",
            MethodKind::SpearmanInitWglasso => "spearman-init-wglasso",
        }
    }
}

/// How the tuning parameter is chosen for each fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum RhoPolicy {
    /// Cross-validate per replication over a log-spaced grid.
    Cv {
        lo: f64,
        hi: f64,
        count: usize,
        folds: usize,
    },
    /// Use one fixed value everywhere.
    Fixed { value: f64 },
}

impl Default for RhoPolicy {
    fn default() -> Self {
        RhoPolicy::Cv {
            lo: 0.01,
            hi: 1.0,
            count: 20,
            folds: 5,
        }
    }
}

impl RhoPolicy {
    pub fn describe(&self) -> String {
        match self {
            RhoPolicy::Cv { lo, hi, count, folds } => {
                format!("cv[{lo}:{hi}:{count} k={folds}]")
            }
            RhoPolicy::Fixed { value } => format!("fixed[{value}]"),
        }
    }
}

/// Log-spaced grid over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 1);
    if count == 1 {
        return vec![lo];
    }
    let (ll, lh) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (ll + (lh - ll) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// The full benchmark grid. Scenario rows are enumerated in the order
/// models x p x gamma x mu x methods.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSpec {
    pub models: Vec<ModelChoice>,
    pub p: Vec<usize>,
    pub gamma: Vec<f64>,
    pub mu: Vec<f64>,
    pub n1: usize,
    pub reps: usize,
    pub methods: Vec<MethodKind>,
    pub seed: u64,
    pub rho: RhoPolicy,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            models: vec![ModelChoice::Ar1],
            p: vec![20, 30],
            gamma: vec![0.0, 0.06, 0.10],
            mu: vec![2.0, 5.0],
            n1: 50,
            reps: 20,
            methods: vec![MethodKind::Wglasso, MethodKind::Glasso, MethodKind::Lw],
            seed: 20240101,
            rho: RhoPolicy::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub model: &'static str,
    pub p: usize,
    pub n1: usize,
    pub gamma: f64,
    pub mu: f64,
    pub method: &'static str,
    pub reps_ok: usize,
    pub failures: usize,
    pub f1_mean: f64,
    pub f1_se: f64,
    pub fnorm_mean: f64,
    pub fnorm_se: f64,
    pub kl_mean: f64,
    pub kl_se: f64,
    pub rho_mean: f64,
}

#[derive(Debug, Clone)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

impl BenchTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "model,p,n1,gamma,mu,method,reps_ok,failures,f1_mean,f1_se,fnorm_mean,fnorm_se,kl_mean,kl_se,rho_mean\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                r.model,
                r.p,
                r.n1,
                r.gamma,
                r.mu,
                r.method,
                r.reps_ok,
                r.failures,
                r.f1_mean,
                r.f1_se,
                r.fnorm_mean,
                r.fnorm_se,
                r.kl_mean,
                r.kl_se,
                r.rho_mean,
            ));
        }
        out
    }
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

/// Ordinary k-fold assignment: shuffled indices dealt round-robin.
fn plain_folds(n: usize, k: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut assignment = vec![0usize; n];
    for (pos, &row) in order.iter().enumerate() {
        assignment[row] = pos % k;
    }
    assignment
}

/// Held-out Gaussian fit score for the plain graphical lasso:
/// `-log det(O) + tr(O S_test)`, averaged over folds. Standard
/// likelihood-based cross-validation for the likelihood-based baseline.
fn glasso_cv_rho(d: &Dataset, grid: &[f64], folds: usize, seed: u64) -> f64 {
    let assignment = plain_folds(d.n(), folds, seed);
    let mut best = (grid[0], f64::INFINITY);
    for &rho in grid {
        let cfg = GlassoConfig::new(rho).with_offdiagonal_penalty();
        let mut total = 0.0;
        for fold in 0..folds {
            let train: Vec<usize> = (0..d.n()).filter(|i| assignment[*i] != fold).collect();
            let test: Vec<usize> = (0..d.n()).filter(|i| assignment[*i] == fold).collect();
            let s_train = dataset::sample_cov(&d.subset(&train));
            let s_test = dataset::sample_cov(&d.subset(&test));
            let score = match glasso::glasso(&s_train, &cfg) {
                Ok(sol) => {
                    let tr: f64 = sol
                        .omega
                        .entries()
                        .iter()
                        .zip(s_test.entries())
                        .map(|(a, b)| a * b)
                        .sum();
                    match wglasso_core::linalg::log_det(&sol.omega) {
                        Ok(ld) => -ld + tr,
                        Err(_) => f64::INFINITY,
                    }
                }
                Err(_) => f64::INFINITY,
            };
            total += score;
        }
        let mean = total / folds as f64;
        let mean = if mean.is_nan() { f64::INFINITY } else { mean };
        if mean <= best.1 {
            best = (rho, mean);
        }
    }
    best.0
}

/// Fits one method on a centered dataset, resolving the tuning parameter
/// per the policy. Returns the estimate and the rho actually used
/// (0 for the shrinkage baseline, which has no tuning parameter).
pub fn estimate_method(
    data: &Dataset,
    method: MethodKind,
    policy: &RhoPolicy,
    cv_seed: u64,
) -> Result<(SymMatrix, f64)> {
    match method {
        MethodKind::Lw => {
            let est = baselines::ledoit_wolf(data)?;
            Ok((est.omega_hat, 0.0))
        }
        MethodKind::Glasso => {
            let rho = match policy {
                RhoPolicy::Fixed { value } => *value,
                RhoPolicy::Cv { lo, hi, count, folds } => {
                    glasso_cv_rho(data, &log_grid(*lo, *hi, *count), *folds, cv_seed)
                }
            };
            let cfg = GlassoConfig::new(rho).with_offdiagonal_penalty();
            let sol = glasso::glasso(&dataset::sample_cov(data), &cfg)?;
            Ok((sol.omega, rho))
        }
        MethodKind::Wglasso | MethodKind::SpearmanInitWglasso => {
            let mut cfg = WglassoConfig::new(0.1);
            if method == MethodKind::SpearmanInitWglasso {
                cfg.initializer = Initializer::SpearmanCov;
            }
            let rho = match policy {
                RhoPolicy::Fixed { value } => *value,
                RhoPolicy::Cv { lo, hi, count, folds } => {
                    selection::select_rho(
                        data,
                        &log_grid(*lo, *hi, *count),
                        &cfg,
                        *folds,
                        cv_seed,
                    )?
                    .best_rho
                }
            };
            let res = wglasso::fit(data, &cfg.with_rho(rho))?;
            Ok((res.omega, rho))
        }
    }
}

struct RepOutcome {
    report: EvalReport,
    rho: f64,
}

/// Runs replication `rep` of one scenario and evaluates every method on
/// the shared dataset.
#[allow(clippy::too_many_arguments)]
fn run_rep(
    model: &TrueModel,
    n1: usize,
    gamma: f64,
    mu: f64,
    methods: &[MethodKind],
    policy: &RhoPolicy,
    seed: u64,
    scenario: u64,
    rep: u64,
) -> Vec<Option<RepOutcome>> {
    let data_seed = mix(seed, &[scenario, rep, 0]);
    let spec = ContaminationSpec::new(n1, gamma, MuShift::Scalar(mu), data_seed);
    let sampled = match sample(model, &spec) {
        Ok((d, _)) => dataset::center(&d),
        Err(_) => return methods.iter().map(|_| None).collect(),
    };
    methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let cv_seed = mix(seed, &[scenario, rep, 1 + mi as u64]);
            estimate_method(&sampled, method, policy, cv_seed)
                .and_then(|(omega, rho)| {
                    metrics::evaluate(&omega, &model.omega).map(|report| RepOutcome { report, rho })
                })
                .ok()
        })
        .collect()
}

/// Runs the full grid and aggregates one row per scenario x method.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchTable> {
    assert!(spec.reps >= 1, "need at least one replication");
    let mut rows = Vec::new();
    let mut scenario_idx: u64 = 0;
    for &model_choice in &spec.models {
        for &p in &spec.p {
            let perm_seed = mix(spec.seed, &[scenario_idx, 0xA11CE]);
            let model = build_model(model_choice.kind(), p, perm_seed);
            for &gamma in &spec.gamma {
                for &mu in &spec.mu {
                    let outcomes: Vec<Vec<Option<RepOutcome>>> = (0..spec.reps as u64)
                        .into_par_iter()
                        .map(|rep| {
                            run_rep(
                                &model,
                                spec.n1,
                                gamma,
                                mu,
                                &spec.methods,
                                &spec.rho,
                                spec.seed,
                                scenario_idx,
                                rep,
                            )
                        })
                        .collect();
                    for (mi, &method) in spec.methods.iter().enumerate() {
                        let ok: Vec<&RepOutcome> =
                            outcomes.iter().filter_map(|r| r[mi].as_ref()).collect();
                        let f1: Vec<f64> = ok.iter().map(|o| o.report.f1).collect();
                        let fnorm: Vec<f64> = ok.iter().map(|o| o.report.fnorm).collect();
                        let kl: Vec<f64> = ok.iter().map(|o| o.report.kl).collect();
                        let rhos: Vec<f64> = ok.iter().map(|o| o.rho).collect();
                        let (f1_mean, f1_se) = mean_se(&f1);
                        let (fnorm_mean, fnorm_se) = mean_se(&fnorm);
                        let (kl_mean, kl_se) = mean_se(&kl);
                        let (rho_mean, _) = mean_se(&rhos);
                        rows.push(BenchRow {
                            model: model_choice.name(),
                            p,
                            n1: spec.n1,
                            gamma,
                            mu,
                            method: method.name(),
                            reps_ok: ok.len(),
                            failures: spec.reps - ok.len(),
                            f1_mean,
                            f1_se,
                            fnorm_mean,
                            fnorm_se,
                            kl_mean,
                            kl_se,
                            rho_mean,
                        });
                    }
                    scenario_idx += 1;
                }
            }
        }
    }
    Ok(BenchTable { rows })
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub model: &'static str,
    pub p: usize,
    pub gamma: f64,
    pub mu: f64,
    pub n: usize,
    pub method: &'static str,
    pub reps_ok: usize,
    pub failures: usize,
    pub fnorm_mean: f64,
    pub fnorm_se: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "model,p,gamma,mu,n,method,reps_ok,failures,fnorm_mean,fnorm_se\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{:.6},{:.6}\n",
                r.model,
                r.p,
                r.gamma,
                r.mu,
                r.n,
                r.method,
                r.reps_ok,
                r.failures,
                r.fnorm_mean,
                r.fnorm_se,
            ));
        }
        out
    }
}

/// Distance-to-truth trend as the total sample size grows, at a fixed
/// outlier-to-signal ratio. `n` is the total sample size; the inlier count
/// is `round(n / (1 + gamma))`.
#[allow(clippy::too_many_arguments)]
pub fn run_convergence(
    model_choice: ModelChoice,
    p: usize,
    gamma: f64,
    mu: f64,
    n_list: &[usize],
    reps: usize,
    seed: u64,
    policy: &RhoPolicy,
) -> Result<ConvergenceTable> {
    assert!(
        n_list.windows(2).all(|w| w[0] < w[1]),
        "sample sizes must be ascending"
    );
    let methods = [MethodKind::Wglasso, MethodKind::Glasso];
    let perm_seed = mix(seed, &[0xA11CE]);
    let model = build_model(model_choice.kind(), p, perm_seed);
    let mut rows = Vec::new();
    for (ni, &n) in n_list.iter().enumerate() {
        let n1 = ((n as f64) / (1.0 + gamma)).round() as usize;
        let outcomes: Vec<Vec<Option<RepOutcome>>> = (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                run_rep(
                    &model,
                    n1,
                    gamma,
                    mu,
                    &methods,
                    policy,
                    seed,
                    ni as u64,
                    rep,
                )
            })
            .collect();
        for (mi, method) in methods.iter().enumerate() {
            let ok: Vec<&RepOutcome> = outcomes.iter().filter_map(|r| r[mi].as_ref()).collect();
            let fnorm: Vec<f64> = ok.iter().map(|o| o.report.fnorm).collect();
            let (fnorm_mean, fnorm_se) = mean_se(&fnorm);
            rows.push(ConvergenceRow {
                model: model_choice.name(),
                p,
                gamma,
                mu,
                n,
                method: method.name(),
                reps_ok: ok.len(),
                failures: reps - ok.len(),
                fnorm_mean,
                fnorm_se,
            });
        }
    }
    Ok(ConvergenceTable { rows })
}
