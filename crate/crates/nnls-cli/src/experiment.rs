//! Resolution of a config into a solver context, and the run pipeline.

use std::path::Path;

use nnls_core::constants::{cached_table, ConstantsTable};
use nnls_core::model::{
    check_hypotheses, potential_norms_default, validate_params, ProblemParams, RadialPotential, ValidatedParams,
};
use nnls_core::radial::{energy_balance_residual, io::write_binary};
use nnls_core::solvers::{
    build_mp_endpoints_and_path, continuation_in_r, rn_limit_solve, s_homotopy, solve_local_min, solve_mountain_pass,
    Branch, Context, SolveOptions, SolveResult, SolverError,
};
use nnls_core::thresholds::{alpha_tilde_v, alpha_v, Regime, ThresholdError, ThresholdInputs};
use serde::{Deserialize, Serialize};

use crate::config::{AlphaRef, AlphaSpec, BranchChoice, ExperimentConfig, RadiusSpec};
use crate::report::{
    exit_status, write_csv, write_json, Check, Environment, LambdaScanReport, ResultRow, RunReport,
};
use crate::CliError;

pub fn regime_for(branch: BranchChoice, beta: f64) -> Regime {
    match branch {
        BranchChoice::Local => Regime::BetaPositiveLocalMin,
        BranchChoice::Mp if beta > 0.0 => Regime::BetaPositiveMP,
        BranchChoice::Mp => Regime::BetaNonpositiveMP,
    }
}

fn from_solver(e: SolverError) -> CliError {
    match e {
        SolverError::Threshold(ThresholdError::RegimeMismatch(m)) => CliError::Regime(m),
        SolverError::Threshold(ThresholdError::HypothesisViolated(m)) => CliError::Regime(format!("hypothesis: {m}")),
        SolverError::Model(m) => CliError::ConfigInvalid { path: "params".into(), reason: m.to_string() },
        other => CliError::Solver(other.to_string()),
    }
}

/// A config bound to its constants, potential and solver context.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub table: ConstantsTable<f64>,
    pub potential: RadialPotential<f64>,
    pub ctx: Context<f64>,
    pub alpha: f64,
    pub r: f64,
    pub opts: SolveOptions<f64>,
}

fn validated(cfg: &ExperimentConfig, alpha: f64) -> Result<ValidatedParams<f64>, CliError> {
    let p = &cfg.params;
    validate_params(ProblemParams { n: p.n, p: p.p, q: p.q, beta: p.beta, alpha })
        .map_err(|e| CliError::ConfigInvalid { path: "params".into(), reason: e.to_string() })
}

/// Absolute mass of an `AlphaSpec`; relative masses scale α_V or ã_V, which do not depend on α.
pub fn resolve_alpha(
    cfg: &ExperimentConfig,
    spec: AlphaSpec,
    potential: &RadialPotential<f64>,
    table: &ConstantsTable<f64>,
) -> Result<f64, CliError> {
    let (fraction, of) = match spec {
        AlphaSpec::Value(a) => return Ok(a),
        AlphaSpec::Relative { fraction, of } => (fraction, of),
    };
    let norms = potential_norms_default(potential, cfg.params.n)
        .map_err(|e| CliError::ConfigInvalid { path: "potential".into(), reason: e.to_string() })?;
    let inp = ThresholdInputs::new(validated(cfg, 1.0)?, norms, table).map_err(|e| from_solver(e.into()))?;
    let base = match of {
        AlphaRef::AlphaV => alpha_v(&inp),
        AlphaRef::AlphaTildeV => alpha_tilde_v(&inp),
    }
    .map_err(|e| from_solver(e.into()))?;
    Ok(fraction * base)
}

fn resolve_r(spec: RadiusSpec, ctx: &Context<f64>) -> Result<f64, CliError> {
    let ra = ctx.thresholds.r_alpha;
    let r = match spec {
        RadiusSpec::Value(r) => r,
        RadiusSpec::Relative { r_alpha_multiple } => r_alpha_multiple * ra,
    };
    if r > ra {
        Ok(r)
    } else {
        Err(CliError::Regime(format!("r = {r} must exceed r_alpha = {ra}")))
    }
}

pub fn resolve(config: &ExperimentConfig) -> Result<Resolved, CliError> {
    let mut config = config.clone();
    config.validate()?;
    config.tolerances.solver.cells = config.grid.cells;
    let p = &config.params;
    let table = cached_table(p.n, &[p.p, p.q], &config.tolerances.constants.into())
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let potential = RadialPotential::try_from(config.potential.clone())
        .map_err(|e| CliError::ConfigInvalid { path: "potential".into(), reason: e.to_string() })?;
    let alpha = resolve_alpha(&config, config.params.alpha, &potential, &table)?;
    let regime = regime_for(config.branch, config.params.beta);
    let ctx = Context::new(validated(&config, alpha)?, potential.clone(), &table, regime).map_err(from_solver)?;
    let r = resolve_r(config.grid.r, &ctx)?;
    let opts = config.tolerances.solver;
    Ok(Resolved { config, table, potential, ctx, alpha, r, opts })
}

fn operation(branch: Branch) -> &'static str {
    match branch {
        Branch::LocalMin => "solve_local_min",
        Branch::MountainPass => "solve_mountain_pass",
    }
}

pub fn solve_at(ctx: &Context<f64>, r: f64, opts: &SolveOptions<f64>) -> Result<SolveResult<f64>, SolverError> {
    let grid = ctx.grid(r, opts.cells)?;
    match ctx.branch() {
        Branch::LocalMin => solve_local_min(ctx, grid, opts, None),
        Branch::MountainPass => solve_mountain_pass(ctx, build_mp_endpoints_and_path(ctx, grid, 1.0, opts)?, opts),
    }
}

/// Identity, sign and bound checks on one converged profile; `tag` prefixes the names.
pub fn solution_checks(ctx: &Context<f64>, res: &SolveResult<f64>, opts: &SolveOptions<f64>, tag: &str) -> Vec<Check> {
    let op = operation(res.branch);
    let name = |n: &str| format!("{tag}{n}");
    let alpha = ctx.params.alpha();
    let e = res.energy.total;
    let k = res.diagnostics.grad_norm_sq;
    let mut out = vec![
        Check::at_most(&name("residual"), op, res.residual_norm, res.tol_res),
        Check::at_most(&name("mass_error"), op, res.mass_error, opts.tol_mass),
        Check::at_most(&name("pohozaev"), op, res.pohozaev, opts.tol_poh),
        Check::above(&name("min_u"), op, res.u.min(), -f64::MIN_POSITIVE).detail("profile is nonnegative"),
    ];
    match res.branch {
        Branch::LocalMin => {
            out.push(Check::below(&name("energy"), op, e, 0.0));
            out.push(Check::above(&name("lambda"), op, res.lambda, 0.0));
            if let Some(t) = ctx.thresholds.points.t_alpha_radius {
                out.push(Check::below(&name("grad_norm_sq"), op, k, t * t).detail("inside the trust region"));
            }
            out.push(Check::above(&name("lambda_alpha_plus_2e"), op, res.lambda * alpha + 2.0 * e, 0.0));
        }
        Branch::MountainPass => {
            out.push(Check::above(&name("energy"), op, e, 0.0));
            if let (Some(lo), Some(hi)) = (ctx.thresholds.mp_lower, ctx.thresholds.mp_upper) {
                out.push(Check::within(&name("level_sandwich"), op, e, lo, hi));
            }
            if let Some(bound) = ctx.thresholds.h1_apriori {
                if ctx.regime == Regime::BetaNonpositiveMP {
                    out.push(Check::at_most(&name("grad_norm_sq_apriori"), op, k, bound));
                }
            }
        }
    }
    out
}

fn write_profile(dir: &Path, name: &str, res: &SolveResult<f64>) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let f = std::fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    write_binary(&res.u, std::io::BufWriter::new(f)).map_err(|e| CliError::Io(e.to_string()))
}

/// Continuation over r_α multiples for every sweep mass, one thread per mass; rows come back in
/// (α, r) order.
pub fn run_sweep(res: &Resolved, multiples: &[f64]) -> Result<(Vec<ResultRow>, Vec<Check>), CliError> {
    let cfg = &res.config;
    let alphas: Vec<f64> = if cfg.sweep.alphas.is_empty() {
        vec![res.alpha]
    } else {
        cfg.sweep.alphas.iter().map(|a| resolve_alpha(cfg, *a, &res.potential, &res.table)).collect::<Result<_, _>>()?
    };
    let contexts: Vec<Context<f64>> =
        alphas.iter().map(|a| res.ctx.with_alpha(*a).map_err(from_solver)).collect::<Result<_, _>>()?;
    let slack = cfg.tolerances.checks.energy_slack;
    let outcomes: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = contexts
            .iter()
            .map(|ctx| {
                let radii: Vec<f64> = multiples.iter().map(|m| m * ctx.thresholds.r_alpha).collect();
                scope.spawn(move || (continuation_in_r(ctx, &radii, slack, &res.opts), radii))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker")).collect()
    });
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let tol = &cfg.tolerances.checks;
    let beta = cfg.params.beta;
    for ((ctx, alpha), (outcome, radii)) in contexts.iter().zip(&alphas).zip(outcomes) {
        let tag = format!("sweep[alpha={alpha}]");
        let sweep = outcome.map_err(|e| CliError::Solver(e.to_string()))?;
        for (i, r) in radii.iter().enumerate() {
            match sweep.results.get(i) {
                Some(sr) => {
                    rows.push(ResultRow::from_result(sr, *alpha, beta));
                    checks.extend(solution_checks(ctx, sr, &res.opts, &format!("{tag}[r={}].", sr.r)));
                }
                None => rows.push(ResultRow::lost(*r, *alpha, beta, 1.0, ctx.branch())),
            }
        }
        let op = "continuation_in_r";
        match &sweep.lost {
            Some(e) => checks.push(Check::failed(&format!("{tag}.branch_kept"), op, e)),
            None => checks.push(Check::holds(&format!("{tag}.branch_kept"), op, true)),
        }
        let Some(c) = &sweep.checks else { continue };
        checks.push(Check::holds(&format!("{tag}.lambda_positive"), op, c.lambda_positive));
        if let Some(ok) = c.energy_nonincreasing {
            checks.push(Check::holds(&format!("{tag}.energy_nonincreasing"), op, ok));
        }
        checks.push(Check::below(&format!("{tag}.sup_plateau"), op, c.sup_ratio, tol.sup_plateau).soft());
        checks.push(Check::holds(&format!("{tag}.single_origin_bump"), op, c.single_origin_bump).soft());
        if sweep.results.len() >= 3 {
            checks.push(Check::holds(&format!("{tag}.h1_differences_decreasing"), op, c.h1_decreasing).soft());
        }
        if sweep.lost.is_none() {
            let last = sweep.results.last().expect("nonempty sweep");
            match rn_limit_solve(last, &res.opts) {
                Ok(lim) => {
                    let op = "rn_limit_solve";
                    let wp = lim.whole_space_pohozaev.abs();
                    checks.push(Check::at_most(&format!("{tag}.whole_space_pohozaev"), op, wp, tol.whole_space_pohozaev));
                    checks.push(Check::above(&format!("{tag}.tail_fit_quality"), op, lim.tail.quality, tol.tail_quality).soft());
                }
                Err(e) => checks.push(Check::failed(&format!("{tag}.tail_decayed"), "rn_limit_solve", &e).soft()),
            }
        }
    }
    Ok((rows, checks))
}

/// s-chain on the main grid, compared against the direct s = 1 solve.
pub fn run_homotopy(
    res: &Resolved,
    s_grid: &[f64],
    direct: Option<&SolveResult<f64>>,
) -> Result<(Vec<ResultRow>, Vec<Check>), CliError> {
    if res.ctx.branch() != Branch::MountainPass {
        return Err(CliError::ConfigInvalid { path: "sweep.s_grid".into(), reason: "homotopy needs branch \"mp\"".into() });
    }
    let tol = &res.config.tolerances.checks;
    let grid = res.ctx.grid(res.r, res.opts.cells).map_err(from_solver)?;
    let op = "s_homotopy";
    let (alpha, beta) = (res.alpha, res.config.params.beta);
    let chain = match s_homotopy(&res.ctx, grid, s_grid, tol.homotopy_slack, &res.opts) {
        Ok(c) => c,
        Err(e) => return Ok((Vec::new(), vec![Check::failed("homotopy.monotone", op, &e)])),
    };
    let rows = chain.iter().map(|c| ResultRow::from_result(c, alpha, beta)).collect();
    let mut checks = vec![Check::holds("homotopy.monotone", op, true)];
    for c in &chain {
        checks.push(Check::at_most(&format!("homotopy[s={}].residual", c.s), op, c.residual_norm, c.tol_res));
    }
    if let Some(d) = direct {
        let end = chain.last().expect("s-grid ends at 1").energy.total;
        let rel = (end - d.energy.total).abs() / d.energy.total.abs();
        checks.push(Check::at_most("homotopy.endpoint_vs_direct", op, rel, tol.homotopy_endpoint));
    }
    Ok((rows, checks))
}

/// Bisection on [lo, hi] for the sign change of λ along the β ≤ 0 mountain-pass branch.
pub fn run_lambda_scan(res: &Resolved) -> Result<(LambdaScanReport, Vec<Check>), CliError> {
    let Some(scan) = res.config.lambda_scan else {
        return Err(CliError::ConfigInvalid { path: "lambda_scan".into(), reason: "missing".into() });
    };
    if res.ctx.regime != Regime::BetaNonpositiveMP {
        return Err(CliError::ConfigInvalid {
            path: "lambda_scan".into(),
            reason: "the lambda scan runs on the beta <= 0 mountain-pass branch".into(),
        });
    }
    let mut tested = Vec::new();
    let mut checks = Vec::new();
    let mut lambda_at = |alpha: f64| -> Option<f64> {
        let attempt = res.ctx.with_alpha(alpha).and_then(|ctx| {
            let r = resolve_r(res.config.grid.r, &ctx).map_err(|e| SolverError::InvalidInput(e.to_string()))?;
            solve_at(&ctx, r, &res.opts)
        });
        match attempt {
            Ok(sr) => {
                tested.push((alpha, sr.lambda));
                Some(sr.lambda)
            }
            Err(e) => {
                checks.push(Check::failed(&format!("lambda_scan[alpha={alpha}]"), "solve_mountain_pass", &e).soft());
                None
            }
        }
    };
    let (mut lo, mut hi) = (scan.alpha_lo, scan.alpha_hi);
    let mut smallest = None;
    if lambda_at(hi).is_some_and(|l| l > 0.0) {
        smallest = Some(hi);
        for _ in 0..scan.steps {
            let mid = 0.5 * (lo + hi);
            match lambda_at(mid) {
                Some(l) if l > 0.0 => {
                    hi = mid;
                    smallest = Some(mid);
                }
                Some(_) => lo = mid,
                None => break,
            }
        }
    }
    Ok((LambdaScanReport { tested, smallest_positive_alpha: smallest, empirical: true }, checks))
}

/// Pohozaev and energy-balance residual ratios of the converged profile on M and 2M cells.
pub fn order_checks(res: &Resolved, main: &SolveResult<f64>) -> Vec<Check> {
    let op = "order_check";
    let cells = main.u.grid().cells();
    let fine = match main.refined(&res.ctx, 2 * cells, &res.opts) {
        Ok(f) => f,
        Err(e) => return vec![Check::failed("order.refine", op, &e)],
    };
    let balance = |sr: &SolveResult<f64>| {
        energy_balance_residual(&res.ctx.problem(sr.u.grid().clone(), sr.s), &sr.u, sr.lambda).abs()
    };
    let [lo, hi] = res.config.tolerances.checks.order_band;
    vec![
        Check::within("order.pohozaev_ratio", op, main.pohozaev / fine.pohozaev, lo, hi),
        Check::within("order.energy_balance_ratio", op, balance(main) / balance(&fine), lo, hi),
    ]
}

/// A solve written by `nnls solve`; `nnls verify` re-derives everything from `config` and `result.u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredSolution {
    pub config: ExperimentConfig,
    pub alpha: f64,
    pub r: f64,
    pub result: SolveResult<f64>,
    pub checks: Vec<Check>,
}

pub fn solve_stored(res: &Resolved) -> Result<StoredSolution, CliError> {
    let sr = solve_at(&res.ctx, res.r, &res.opts).map_err(|e| CliError::Solver(e.to_string()))?;
    let checks = solution_checks(&res.ctx, &sr, &res.opts, "");
    Ok(StoredSolution { config: res.config.clone(), alpha: res.alpha, r: res.r, result: sr, checks })
}

/// Thresholds, hypotheses, the main solve, then sweep, homotopy, λ-scan and order checks as
/// configured. Solver failures become failed checks; only config and regime errors abort.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport, CliError> {
    let res = resolve(config)?;
    let cfg = &res.config;
    let hypothesis = check_hypotheses(&res.potential, res.table.s(), &res.ctx.inputs.norms);
    let mut checks = vec![Check::holds("hypothesis.v0", "check_hypotheses", hypothesis.v0_holds)];
    if !res.potential.is_zero() {
        checks.push(Check::holds("hypothesis.v1_sufficient", "check_hypotheses", hypothesis.v1_sufficient_holds).soft());
    }
    let mut results = Vec::new();
    let main = solve_at(&res.ctx, res.r, &res.opts);
    match &main {
        Ok(sr) => {
            results.push(ResultRow::from_result(sr, res.alpha, cfg.params.beta));
            checks.extend(solution_checks(&res.ctx, sr, &res.opts, "solve."));
            if let Some(dir) = &cfg.output.profiles {
                write_profile(dir, "solve.bin", sr)?;
            }
        }
        Err(e) => checks.push(Check::failed("solve", operation(res.ctx.branch()), e)),
    }
    if !cfg.sweep.r_multiples.is_empty() {
        let (rows, c) = run_sweep(&res, &cfg.sweep.r_multiples)?;
        results.extend(rows);
        checks.extend(c);
    }
    if !cfg.sweep.s_grid.is_empty() {
        let (rows, c) = run_homotopy(&res, &cfg.sweep.s_grid, main.as_ref().ok())?;
        results.extend(rows);
        checks.extend(c);
    }
    let lambda_scan = match cfg.lambda_scan {
        Some(_) => {
            let (scan, c) = run_lambda_scan(&res)?;
            checks.extend(c);
            Some(scan)
        }
        None => None,
    };
    if cfg.verify.order_check {
        if let Ok(sr) = &main {
            checks.extend(order_checks(&res, sr));
        }
    }
    let report = RunReport {
        config: cfg.clone(),
        alpha: res.alpha,
        r: res.r,
        thresholds: res.ctx.thresholds.clone(),
        hypothesis,
        results,
        lambda_scan,
        checks,
        environment: Environment { nnls_version: env!("CARGO_PKG_VERSION").into(), constants: res.table.clone() },
    };
    if let Some(path) = &cfg.output.report {
        write_json(&report, path)?;
    }
    if let Some(path) = &cfg.output.csv {
        write_csv(&report.results, path)?;
    }
    Ok(report)
}

pub fn report_status(report: &RunReport) -> u8 {
    exit_status(&report.checks)
}
