//! Command-line front end: configuration merging, the five commands and
//! their output files.
//!
//! Every run writes into its output directory:
//! `trace.csv` (`fevals,objective,p1..pn`), `curve.csv`
//! (`fevals,rho_psi_star`, best so far), `summary.txt` and `summary.json`.
//! Only the first line of `summary.txt` and the `wall_time_s` line of
//! `summary.json` vary between identical runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counter::EvalCounter;
use crate::eigen::GradientMode;
use crate::error::Error;
use crate::fourier::{rho_psi_on_grid, smoothing_factor};
use crate::mgvalidate::{measure_convergence, Boundary, CycleVariant, Grid1D};
use crate::optim::{
    brute_force, fixed_inner_minimize, outer_approx_minimize, sigma_stationarity, BruteForceOptions,
    FixedInnerOptions, Method, OuterApproxOptions, Trace,
};
use crate::problems::{problem_by_name, ProblemOverrides, ProblemSpec, PROBLEM_NAMES};

/// Points per parameter for brute force unless configured.
pub const DEFAULT_NP: usize = 20;
/// Frequencies per dimension for fixed-inner runs unless configured.
pub const DEFAULT_FIXED_NTHETA: usize = 3;
/// Frequencies per dimension for brute force unless configured.
pub const DEFAULT_BRUTE_NTHETA: usize = 33;
/// Default output directory.
pub const DEFAULT_OUT: &str = "lfa-out";
/// Identifiers accepted by `reproduce`.
pub const REPRODUCE_IDS: [&str; 7] = ["fig-4.2", "fig-4.3", "fig-4.5", "fig-4.6", "fig-4.7", "table-b1", "table-b2-subset"];

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::UnknownProblem { .. } | Error::Unsupported(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Optional settings as given on the command line or in a TOML file.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigArgs {
    /// Registered problem name.
    #[arg(long)]
    pub problem: Option<String>,
    /// brute-force, fixed-inner or outer-approx.
    #[arg(long)]
    pub method: Option<Method>,
    /// analytic, fd:<step> or none.
    #[arg(long)]
    pub grad: Option<GradientMode>,
    /// Frequencies per dimension of the fixed or brute-force grid.
    #[arg(long)]
    pub ntheta: Option<usize>,
    /// Parameter points per dimension for brute force.
    #[arg(long)]
    pub np: Option<usize>,
    /// Maximum number of charged spectral-radius evaluations.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated parameter vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<f64>>,
    /// Regularization weight of the control problem.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Mesh size (control problem, MAC problems, discrete validation).
    #[arg(long)]
    pub h: Option<f64>,
    /// Boundary condition for `validate`: dirichlet or periodic.
    #[arg(long)]
    pub boundary: Option<Boundary>,
    /// Frequencies per dimension used for reported ρΨ* and σ.
    #[arg(long)]
    pub report_ntheta: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with any of the settings above; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl ConfigArgs {
    /// Fill unset fields from `other`.
    fn or(self, other: ConfigArgs) -> ConfigArgs {
        ConfigArgs {
            problem: self.problem.or(other.problem),
            method: self.method.or(other.method),
            grad: self.grad.or(other.grad),
            ntheta: self.ntheta.or(other.ntheta),
            np: self.np.or(other.np),
            budget: self.budget.or(other.budget),
            seed: self.seed.or(other.seed),
            params: self.params.or(other.params),
            beta: self.beta.or(other.beta),
            h: self.h.or(other.h),
            boundary: self.boundary.or(other.boundary),
            report_ntheta: self.report_ntheta.or(other.report_ntheta),
            out: self.out.or(other.out),
            config: self.config,
        }
    }
}

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: String,
    pub method: Method,
    pub grad: GradientMode,
    pub ntheta: usize,
    pub np: usize,
    pub budget: u64,
    pub seed: u64,
    pub params: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub h: Option<f64>,
    pub boundary: Boundary,
    pub report_ntheta: usize,
    pub output: PathBuf,
}

impl RunConfig {
    pub fn overrides(&self) -> ProblemOverrides {
        ProblemOverrides { beta: self.beta, h: self.h }
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec, CliError> {
        Ok(problem_by_name(&self.problem, self.overrides())?)
    }

    /// Explicit parameters or the problem's starting point.
    pub fn start(&self, problem: &ProblemSpec) -> Vec<f64> {
        self.params.clone().unwrap_or_else(|| problem.initial.clone())
    }
}

/// Budget sized to the x-axis of the corresponding experiment.
pub fn default_budget(problem: &str, grad: GradientMode) -> u64 {
    match (problem, grad) {
        ("laplace1d-p1", _) => 1000,
        ("laplace1d-p1-2sweep", _) => 1500,
        ("laplace1d-p1-c3", _) => 1000,
        ("stokes-mac-uzawa", GradientMode::CentralDiff(_)) => 4000,
        _ => 2000,
    }
}

/// Reporting grid resolution: 33 per dimension, 9 for the 3D problem.
pub fn default_report_ntheta(problem: &str) -> usize {
    if problem == "control3d-q1" {
        9
    } else {
        crate::fourier::REPORTING_NTHETA
    }
}

/// Merge flags over a config file over defaults and check the combination.
pub fn resolve(args: ConfigArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            toml::from_str::<ConfigArgs>(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => ConfigArgs::default(),
    };
    let a = args.or(file);
    let problem = a.problem.ok_or_else(|| {
        CliError::Usage(format!("--problem is required; known problems: {}", PROBLEM_NAMES.join(", ")))
    })?;
    let spec = problem_by_name(&problem, ProblemOverrides { beta: a.beta, h: a.h })?;
    let method = a.method.unwrap_or(Method::OuterApprox);
    let grad = a.grad.unwrap_or(GradientMode::Analytic);
    if grad == GradientMode::None && method == Method::FixedInner {
        return Err(CliError::Usage("--grad none is only available with --method outer-approx".into()));
    }
    let ntheta = a.ntheta.unwrap_or(if method == Method::BruteForce { DEFAULT_BRUTE_NTHETA } else { DEFAULT_FIXED_NTHETA });
    let np = a.np.unwrap_or(DEFAULT_NP);
    let budget = match (a.budget, method) {
        (Some(b), _) => b,
        (None, Method::BruteForce) => brute_force_cost(&spec, np, ntheta),
        (None, _) => default_budget(&problem, grad),
    };
    if budget == 0 {
        return Err(CliError::Usage("--budget must be positive".into()));
    }
    if let Some(p) = &a.params {
        spec.check_len(p)?;
    }
    Ok(RunConfig {
        report_ntheta: a.report_ntheta.unwrap_or_else(|| default_report_ntheta(&problem)),
        problem,
        method,
        grad,
        ntheta,
        np,
        budget,
        seed: a.seed.unwrap_or(0),
        params: a.params,
        beta: a.beta,
        h: a.h,
        boundary: a.boundary.unwrap_or(Boundary::Dirichlet),
        output: a.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    })
}

/// Evaluations charged by a full brute-force scan.
pub fn brute_force_cost(problem: &ProblemSpec, np: usize, ntheta: usize) -> u64 {
    (np as u64).saturating_pow(problem.n_params() as u32).saturating_mul((ntheta as u64).saturating_pow(problem.dim as u32))
}

/// Discrete measurement attached to a `validate` summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub h: f64,
    pub boundary: Boundary,
    pub cycles: usize,
    pub rho_m1: f64,
    pub rho_m2: f64,
    pub floor_hit: bool,
    pub diverged: bool,
}

/// Outcome of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub wall_time_s: f64,
    pub command: String,
    pub config: RunConfig,
    pub params: Vec<f64>,
    /// Ψ over the reporting grid; absent where the relaxation is undefined.
    pub rho_psi_star: Option<f64>,
    pub smoothing_factor: Option<f64>,
    pub sigma: Option<f64>,
    /// Gradient mode behind σ.
    pub sigma_mode: Option<String>,
    pub sigma_fallbacks: Option<usize>,
    pub fevals: u64,
    pub gradient_fallbacks: u64,
    pub incomplete: bool,
    pub validation: Option<ValidationSummary>,
}

impl ResultSummary {
    fn new(command: &str, config: &RunConfig, params: Vec<f64>) -> Self {
        Self {
            wall_time_s: 0.0,
            command: command.into(),
            config: config.clone(),
            params,
            rho_psi_star: None,
            smoothing_factor: None,
            sigma: None,
            sigma_mode: None,
            sigma_fallbacks: None,
            fevals: 0,
            gradient_fallbacks: 0,
            incomplete: false,
            validation: None,
        }
    }

    /// Human-readable table; the first line carries the timestamp.
    pub fn render(&self) -> String {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut s = format!("# lfa-tune {} finished at unix time {secs} after {:.3} s\n", self.command, self.wall_time_s);
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
        let c = &self.config;
        let _ = writeln!(s, "problem            {}", c.problem);
        if self.command == "optimize" {
            let _ = writeln!(s, "method             {}", c.method);
            if c.method != Method::BruteForce {
                let _ = writeln!(s, "grad               {}", c.grad);
            }
            let _ = writeln!(s, "budget             {}", c.budget);
            let _ = writeln!(s, "seed               {}", c.seed);
        }
        let params: Vec<String> = self.params.iter().map(|p| format!("{p:.6}")).collect();
        let _ = writeln!(s, "params             [{}]", params.join(", "));
        let _ = writeln!(s, "rho_psi_star       {} (ntheta = {})", opt(self.rho_psi_star), c.report_ntheta);
        if self.smoothing_factor.is_some() {
            let _ = writeln!(s, "smoothing_factor   {}", opt(self.smoothing_factor));
        }
        if self.sigma.is_some() {
            let _ = writeln!(
                s,
                "sigma              {} ({}, {} fallbacks)",
                opt(self.sigma),
                self.sigma_mode.as_deref().unwrap_or("-"),
                self.sigma_fallbacks.unwrap_or(0)
            );
        }
        if let Some(v) = &self.validation {
            let _ = writeln!(s, "grid               h = {}, {}", v.h, v.boundary);
            let _ = writeln!(s, "cycles             {}", v.cycles);
            let _ = writeln!(s, "rho_m1             {:.6}", v.rho_m1);
            let _ = writeln!(s, "rho_m2             {:.6}", v.rho_m2);
            let _ = writeln!(s, "floor_hit          {}", v.floor_hit);
            let _ = writeln!(s, "diverged           {}", v.diverged);
        }
        let _ = writeln!(s, "fevals             {}", self.fevals);
        let _ = writeln!(s, "gradient_fallbacks {}", self.gradient_fallbacks);
        let _ = writeln!(s, "incomplete         {}", self.incomplete);
        s
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn write_summary(summary: &ResultSummary) -> Result<(), CliError> {
    let dir = &summary.config.output;
    write_file(&dir.join("summary.txt"), &summary.render())?;
    let json = serde_json::to_string_pretty(summary).expect("summary is serializable");
    write_file(&dir.join("summary.json"), &(json + "\n"))
}

/// `fevals,objective,p1..pn` rows.
pub fn trace_csv(trace: &Trace, n: usize) -> String {
    let mut s = String::from("fevals,objective");
    for i in 1..=n {
        let _ = write!(s, ",p{i}");
    }
    s.push('\n');
    for r in trace.records() {
        let _ = write!(s, "{},{}", r.fevals, r.objective);
        for p in &r.candidate {
            let _ = write!(s, ",{p}");
        }
        s.push('\n');
    }
    s
}

/// Best-so-far ρΨ* along a trace, computed on an uncharged counter.
pub fn best_so_far_curve(problem: &ProblemSpec, trace: &Trace, ntheta: usize) -> Result<Vec<(u64, f64)>, CliError> {
    let values: Vec<f64> = trace
        .records()
        .par_iter()
        .map(|r| rho_psi_on_grid(problem, &r.candidate, ntheta))
        .collect::<crate::Result<_>>()?;
    let mut best = f64::INFINITY;
    Ok(trace
        .records()
        .iter()
        .zip(values)
        .map(|(r, v)| {
            best = best.min(v);
            (r.fevals, best)
        })
        .collect())
}

pub fn curve_csv(curve: &[(u64, f64)]) -> String {
    let mut s = String::from("fevals,rho_psi_star\n");
    for (f, v) in curve {
        let _ = writeln!(s, "{f},{v}");
    }
    s
}

/// ρΨ*(params) and, where defined, the smoothing factor.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<ResultSummary, CliError> {
    let t0 = Instant::now();
    let problem = cfg.problem_spec()?;
    let params = cfg.params.clone().ok_or_else(|| CliError::Usage("evaluate needs --params".into()))?;
    problem.check_len(&params)?;
    let mut s = ResultSummary::new("evaluate", cfg, params.clone());
    s.rho_psi_star = finite(rho_psi_on_grid(&problem, &params, cfg.report_ntheta)?);
    if problem.relaxation_symbol(&params, &crate::fourier::Frequency::splat(problem.dim, 1.0)).is_some() {
        s.smoothing_factor = finite(smoothing_factor(&problem, &params, cfg.report_ntheta)?);
    }
    s.wall_time_s = t0.elapsed().as_secs_f64();
    write_summary(&s)?;
    Ok(s)
}

/// σ(params) with analytic gradients (central-difference fallback).
pub fn cmd_sigma(cfg: &RunConfig) -> Result<ResultSummary, CliError> {
    let t0 = Instant::now();
    let problem = cfg.problem_spec()?;
    let params = cfg.params.clone().ok_or_else(|| CliError::Usage("sigma needs --params".into()))?;
    problem.check_len(&params)?;
    let counter = EvalCounter::new();
    let rep = sigma_stationarity(&problem, &params, cfg.report_ntheta, &counter)?;
    let mut s = ResultSummary::new("sigma", cfg, params.clone());
    s.rho_psi_star = finite(rho_psi_on_grid(&problem, &params, cfg.report_ntheta)?);
    s.sigma = Some(rep.sigma);
    s.sigma_mode = Some("analytic, fd:1e-8 fallback".into());
    s.sigma_fallbacks = Some(rep.fallbacks);
    s.fevals = counter.count();
    s.wall_time_s = t0.elapsed().as_secs_f64();
    write_summary(&s)?;
    Ok(s)
}

/// Run the configured optimizer, then report ρΨ* and σ at the result.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<ResultSummary, CliError> {
    let t0 = Instant::now();
    let problem = cfg.problem_spec()?;
    let p0 = cfg.start(&problem);
    problem.check_len(&p0)?;
    let counter = EvalCounter::new();
    let budget = Some(cfg.budget);
    let (params, trace, incomplete, fallbacks) = match cfg.method {
        Method::BruteForce => {
            let cost = brute_force_cost(&problem, cfg.np, cfg.ntheta);
            eprintln!(
                "brute force on {}: {}^{} parameter points x {}^{} frequencies = {cost} evaluations",
                problem.name,
                cfg.np,
                problem.n_params(),
                cfg.ntheta,
                problem.dim
            );
            let opts = BruteForceOptions { budget, ..BruteForceOptions::new(cfg.np, cfg.ntheta) };
            match brute_force(&problem, &opts, &counter) {
                Ok(r) => (r.params, r.trace, false, 0),
                Err(Error::BudgetExhausted { best: Some((p, v)), fevals, .. }) => {
                    let mut t = Trace::default();
                    t.push(fevals, &p, v);
                    (p, t, true, 0)
                }
                Err(Error::BudgetExhausted { best: None, .. }) => {
                    return Err(CliError::Usage(format!("budget {} does not cover one parameter point", cfg.budget)))
                }
                Err(e) => return Err(e.into()),
            }
        }
        Method::FixedInner => {
            let mut opts = FixedInnerOptions::new(cfg.ntheta, cfg.grad);
            opts.budget = budget;
            opts.gs.seed = cfg.seed;
            let r = fixed_inner_minimize(&problem, &p0, &opts, &counter)?;
            (r.params, r.trace, r.incomplete, r.fallbacks)
        }
        Method::OuterApprox => {
            let mut opts = OuterApproxOptions::new(cfg.grad);
            opts.budget = budget;
            opts.gs.seed = cfg.seed;
            let r = outer_approx_minimize(&problem, &p0, &opts, &counter)?;
            (r.run.params, r.run.trace, r.run.incomplete, r.run.fallbacks)
        }
    };
    let curve = best_so_far_curve(&problem, &trace, cfg.report_ntheta)?;
    let mut s = ResultSummary::new("optimize", cfg, params.clone());
    s.fevals = counter.count();
    s.incomplete = incomplete;
    s.gradient_fallbacks = fallbacks;
    s.rho_psi_star = finite(rho_psi_on_grid(&problem, &params, cfg.report_ntheta)?);
    if s.rho_psi_star.is_some() {
        let rep = sigma_stationarity(&problem, &params, cfg.report_ntheta, &EvalCounter::new())?;
        s.sigma = Some(rep.sigma);
        s.sigma_mode = Some("analytic, fd:1e-8 fallback".into());
        s.sigma_fallbacks = Some(rep.fallbacks);
    }
    write_file(&cfg.output.join("trace.csv"), &trace_csv(&trace, problem.n_params()))?;
    write_file(&cfg.output.join("curve.csv"), &curve_csv(&curve))?;
    s.wall_time_s = t0.elapsed().as_secs_f64();
    write_summary(&s)?;
    Ok(s)
}

/// Default validation mesh: 1/64, or 1/243 when coarsening by three.
pub fn default_validation_h(problem: &str) -> f64 {
    if problem == "laplace1d-p1-c3" {
        1.0 / 243.0
    } else {
        1.0 / 64.0
    }
}

/// Measure discrete convergence factors next to the LFA prediction.
pub fn cmd_validate(cfg: &RunConfig) -> Result<ResultSummary, CliError> {
    let t0 = Instant::now();
    let variant = CycleVariant::for_problem(&cfg.problem)?;
    let problem = problem_by_name(&cfg.problem, ProblemOverrides::default())?;
    let params = cfg.start(&problem);
    problem.check_len(&params)?;
    let h = cfg.h.unwrap_or_else(|| default_validation_h(&cfg.problem));
    let grid = Grid1D::new(h, cfg.boundary)?;
    let rep = measure_convergence(variant, &params, grid, cfg.seed)?;
    let mut defects = String::from("cycle,defect_norm\n");
    for (k, d) in rep.defect_norms.iter().enumerate() {
        let _ = writeln!(defects, "{k},{d}");
    }
    write_file(&cfg.output.join("defects.csv"), &defects)?;
    let mut s = ResultSummary::new("validate", cfg, params.clone());
    s.rho_psi_star = finite(rho_psi_on_grid(&problem, &params, cfg.report_ntheta)?);
    s.validation = Some(ValidationSummary {
        h,
        boundary: cfg.boundary,
        cycles: rep.defect_norms.len() - 1,
        rho_m1: rep.rho_m1,
        rho_m2: rep.rho_m2,
        floor_hit: rep.floor_hit,
        diverged: rep.diverged,
    });
    s.wall_time_s = t0.elapsed().as_secs_f64();
    write_summary(&s)?;
    Ok(s)
}

/// Which command a planned run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    Evaluate,
    Optimize,
}

/// One entry of a reproduction batch.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedRun {
    pub name: String,
    pub kind: RunKind,
    pub config: RunConfig,
}

fn planned(out: &Path, name: &str, kind: RunKind, args: ConfigArgs) -> Result<PlannedRun, CliError> {
    let config = resolve(ConfigArgs { out: Some(out.join(name)), ..args })?;
    Ok(PlannedRun { name: name.into(), kind, config })
}

fn optimizer_runs(out: &Path, problem: &str, prefix: &str, grad: GradientMode, budget: u64) -> Result<Vec<PlannedRun>, CliError> {
    let base = ConfigArgs { problem: Some(problem.into()), budget: Some(budget), ..Default::default() };
    Ok(vec![
        planned(
            out,
            &format!("{prefix}outer-approx-{}", mode_tag(grad)),
            RunKind::Optimize,
            ConfigArgs { method: Some(Method::OuterApprox), grad: Some(grad), ..base.clone() },
        )?,
        planned(
            out,
            &format!("{prefix}outer-approx-none"),
            RunKind::Optimize,
            ConfigArgs { method: Some(Method::OuterApprox), grad: Some(GradientMode::None), ..base.clone() },
        )?,
        planned(
            out,
            &format!("{prefix}fixed-inner-{}-ntheta3", mode_tag(grad)),
            RunKind::Optimize,
            ConfigArgs { method: Some(Method::FixedInner), grad: Some(grad), ntheta: Some(3), ..base },
        )?,
    ])
}

fn mode_tag(m: GradientMode) -> String {
    match m {
        GradientMode::Analytic => "analytic".into(),
        GradientMode::CentralDiff(t) => format!("fd{t:e}"),
        GradientMode::None => "none".into(),
    }
}

/// The run matrix behind a figure or table identifier.
pub fn reproduce_plan(id: &str, out: &Path) -> Result<Vec<PlannedRun>, CliError> {
    let dir = out.join(id);
    match id {
        "fig-4.2" => optimizer_runs(&dir, "laplace1d-p1", "", GradientMode::Analytic, 1000),
        "fig-4.3" => optimizer_runs(&dir, "laplace1d-p1-2sweep", "", GradientMode::Analytic, 1500),
        "fig-4.5" => optimizer_runs(&dir, "laplace1d-p1-c3", "", GradientMode::CentralDiff(1e-8), 1000),
        "fig-4.6" => optimizer_runs(&dir, "stokes-mac-bsr", "", GradientMode::Analytic, 2000),
        "fig-4.7" => {
            let mut runs = optimizer_runs(&dir, "stokes-mac-uzawa", "", GradientMode::Analytic, 2000)?;
            runs.push(planned(
                &dir,
                "fixed-inner-fd1e-12-ntheta3",
                RunKind::Optimize,
                ConfigArgs {
                    problem: Some("stokes-mac-uzawa".into()),
                    method: Some(Method::FixedInner),
                    grad: Some(GradientMode::CentralDiff(1e-12)),
                    ntheta: Some(3),
                    budget: Some(4000),
                    ..Default::default()
                },
            )?);
            Ok(runs)
        }
        "table-b1" => {
            let mut runs = Vec::new();
            for (problem, budget) in [
                ("laplace1d-p1", 1000),
                ("laplace1d-p1-2sweep", 1500),
                ("laplace1d-p1-c3", 1000),
                ("stokes-mac-bsr", 2000),
                ("stokes-mac-uzawa", 2000),
            ] {
                runs.extend(optimizer_runs(&dir, problem, &format!("{problem}-"), GradientMode::Analytic, budget)?);
            }
            Ok(runs)
        }
        "table-b2-subset" => {
            let mut runs = Vec::new();
            for beta in [1e-6, 1e-4, 1e-2, 1.0] {
                runs.push(planned(
                    &dir,
                    &format!("evaluate-beta{beta:e}"),
                    RunKind::Evaluate,
                    ConfigArgs {
                        problem: Some("control3d-q1".into()),
                        params: Some(vec![0.842, 1.527]),
                        beta: Some(beta),
                        ..Default::default()
                    },
                )?);
            }
            runs.push(planned(
                &dir,
                "outer-approx-none",
                RunKind::Optimize,
                ConfigArgs {
                    problem: Some("control3d-q1".into()),
                    method: Some(Method::OuterApprox),
                    grad: Some(GradientMode::None),
                    budget: Some(2000),
                    ..Default::default()
                },
            )?);
            Ok(runs)
        }
        _ => Err(CliError::Usage(format!("unknown reproduce id `{id}`; known ids: {}", REPRODUCE_IDS.join(", ")))),
    }
}

/// Summaries of a reproduction batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceReport {
    pub id: String,
    pub runs: Vec<(String, ResultSummary)>,
}

impl ReproduceReport {
    pub fn render(&self) -> String {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut s = format!("# lfa-tune reproduce {} at unix time {secs}\n", self.id);
        let _ = writeln!(
            s,
            "{:<48} {:<13} {:<18} {:>12} {:>12} {:>8} {:>10}  params",
            "run", "command", "problem", "rho_psi_star", "sigma", "fevals", "incomplete"
        );
        for (name, r) in &self.runs {
            let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4e}"));
            let params: Vec<String> = r.params.iter().map(|p| format!("{p:.4}")).collect();
            let _ = writeln!(
                s,
                "{:<48} {:<13} {:<18} {:>12} {:>12} {:>8} {:>10}  [{}]",
                name,
                r.command,
                r.config.problem,
                f(r.rho_psi_star),
                f(r.sigma.or(r.smoothing_factor)),
                r.fevals,
                r.incomplete,
                params.join(", ")
            );
        }
        s
    }
}

/// Execute a reproduction batch concurrently, one output directory per run,
/// and write `report.txt` and `report.json` next to them.
pub fn cmd_reproduce(id: &str, out: &Path) -> Result<ReproduceReport, CliError> {
    let plan = reproduce_plan(id, out)?;
    let runs: Vec<(String, ResultSummary)> = plan
        .par_iter()
        .map(|r| {
            let s = match r.kind {
                RunKind::Evaluate => cmd_evaluate(&r.config)?,
                RunKind::Optimize => cmd_optimize(&r.config)?,
            };
            Ok((r.name.clone(), s))
        })
        .collect::<Result<_, CliError>>()?;
    let report = ReproduceReport { id: id.into(), runs };
    let dir = out.join(id);
    write_file(&dir.join("report.txt"), &report.render())?;
    let json = serde_json::to_string_pretty(&report).expect("report is serializable");
    write_file(&dir.join("report.json"), &(json + "\n"))?;
    Ok(report)
}

#[derive(Debug, Parser)]
#[command(name = "lfa-tune", version, about = "Tune multigrid parameters by minimizing LFA two-grid convergence factors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report ρΨ* (and the smoothing factor) at --params.
    Evaluate(ConfigArgs),
    /// Minimize ρΨ with the selected method.
    Optimize(ConfigArgs),
    /// Report the stationarity measure σ at --params.
    Sigma(ConfigArgs),
    /// Measure discrete two-grid convergence for a 1D problem.
    Validate(ConfigArgs),
    /// Run the batch behind a figure or table.
    Reproduce {
        /// One of fig-4.2, fig-4.3, fig-4.5, fig-4.6, fig-4.7, table-b1, table-b2-subset.
        id: String,
        #[arg(long, default_value = DEFAULT_OUT)]
        out: PathBuf,
    },
}

/// Dispatch a parsed command line; prints the summary to stdout.
pub fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let summary = match cli.command {
        Command::Evaluate(a) => cmd_evaluate(&resolve(a)?)?,
        Command::Optimize(a) => cmd_optimize(&resolve(a)?)?,
        Command::Sigma(a) => cmd_sigma(&resolve(a)?)?,
        Command::Validate(a) => cmd_validate(&resolve(a)?)?,
        Command::Reproduce { id, out } => {
            let report = cmd_reproduce(&id, &out)?;
            print!("{}", report.render());
            let incomplete = report.runs.iter().any(|r| r.1.incomplete);
            return Ok(ExitCode::from(if incomplete { 4 } else { 0 }));
        }
    };
    print!("{}", summary.render());
    Ok(ExitCode::from(if summary.incomplete { 4 } else { 0 }))
}
