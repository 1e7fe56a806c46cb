//! Experiment driver.

use std::path::Path;
use std::time::Instant;

use branchmax_core::engine::{Mode, SimConfig, TreeOutcome};
use branchmax_core::estimator::{compare_constant, estimate_tail_with_confidence, fit_exponent};
use branchmax_core::motion::{LatticeStep, MotionModel};
use branchmax_core::offspring::OffspringKind;
use branchmax_core::theory::{
    boundary_sensitivity, discrete_fixed_point, finite_variance_constant, limit_constant, ode_residual,
    phi_closed_form, solve_bvp_shooting, theory_table, FixedPointOptions, TheoryParams,
};
use serde_json::{json, Map, Value};

use crate::config::{Experiment, MotionSpec, RunConfig};
use crate::ensemble::run_ensemble;
use crate::error::RunError;
use crate::output::{real, render_json, Cell, Table};

/// One pass/fail comparison against a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= limit`; NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit,
            pass: value <= limit,
        }
    }

    fn to_json(&self) -> Value {
        json!({ "name": self.name, "value": real(self.value), "limit": real(self.limit), "pass": self.pass })
    }
}

/// Everything a run produces, before it is written out.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: Table,
    pub summary: Value,
    pub checks: Vec<Check>,
}

impl RunOutput {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Compute the experiment without touching the file system.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let start = Instant::now();
    let mut results = Map::new();
    let mut constants = Map::new();
    let mut fit = Value::Null;
    let mut censored = Value::Null;
    let (table, checks) = match cfg.experiment {
        Experiment::TailMc => tail_mc(cfg, &mut results, &mut constants, &mut fit, &mut censored)?,
        Experiment::FixedPoint => fixed_point(cfg, &mut results, &mut constants)?,
        Experiment::Bvp => bvp(cfg, &mut results, &mut constants)?,
        Experiment::TheoryTable => table_of_constants(cfg, &mut constants)?,
        Experiment::Lemma2Check => lemma2(cfg, &mut constants)?,
    };
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "master_seed": cfg.seed,
        "config": Value::Object(cfg.effective.to_map()),
        "constants": constants,
        "fit": fit,
        "censored_fraction": censored,
        "results": results,
        "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        "wall_time_s": real(start.elapsed().as_secs_f64()),
    });
    Ok(RunOutput { table, summary, checks })
}

/// Compute, write both artifacts, and report failed checks when `assert` is set.
pub fn run(cfg: &RunConfig, assert: bool) -> Result<RunOutput, RunError> {
    let out = execute(cfg)?;
    write(&cfg.out_csv, &out.table.to_csv())?;
    write(&cfg.out_json, &render_json(&out.summary))?;
    let failed = out.checks.iter().filter(|c| !c.pass).count();
    if assert && failed > 0 {
        return Err(RunError::ChecksFailed { failed });
    }
    Ok(out)
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| RunError::Write {
            path: path.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| RunError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Predicted tail exponent and constant for a law/motion pair.
fn prediction(
    cfg: &RunConfig,
    kind: &OffspringKind,
    sigma2: Option<f64>,
    eta2_total: f64,
    discrete: bool,
    constants: &mut Map<String, Value>,
) -> Result<(f64, f64), RunError> {
    constants.insert("eta2_total".into(), real(eta2_total));
    Ok(match kind {
        OffspringKind::StableTail { alpha, kappa } => {
            let params = TheoryParams::stable(*alpha, *kappa, cfg.beta, eta2_total)?;
            let table = theory_table(&params)?;
            constants.insert("theta".into(), real(table.theta));
            constants.insert("c_star".into(), real(table.c_star));
            constants.insert("lemma2_constant".into(), real(table.lemma2_constant));
            constants.insert("tail_exponent".into(), real(table.tail_exponent));
            (table.tail_exponent, table.c_star)
        }
        OffspringKind::Explicit { .. } => {
            let sigma2 = sigma2.ok_or(branchmax_core::Error::MissingSigma2)?;
            let params = TheoryParams::finite_variance(cfg.beta, eta2_total, sigma2)?;
            let c = finite_variance_constant(&params, discrete)?;
            constants.insert("sigma2".into(), real(sigma2));
            constants.insert("finite_variance_constant".into(), real(c));
            constants.insert("tail_exponent".into(), real(2.0));
            (2.0, c)
        }
    })
}

fn tail_mc(
    cfg: &RunConfig,
    results: &mut Map<String, Value>,
    constants: &mut Map<String, Value>,
    fit_out: &mut Value,
    censored_out: &mut Value,
) -> Result<(Table, Vec<Check>), RunError> {
    let law = cfg.law()?;
    let model = cfg.motion_model()?;
    let discrete = model.is_discrete_time();
    let sim = SimConfig {
        mode: if discrete {
            Mode::DiscreteTime
        } else {
            Mode::ContinuousTime { beta: cfg.beta }
        },
        budget: cfg.budget,
        stop_threshold: cfg.x_stop,
        master_seed: cfg.seed,
    };
    let outcomes = run_ensemble(&law, &model, &sim, cfg.n_trees, cfg.workers)?;
    let est = estimate_tail_with_confidence(&outcomes, &cfg.x_grid, cfg.confidence)?;
    let (exponent, constant) = prediction(cfg, law.kind(), law.sigma2(), model.eta2_total(), discrete, constants)?;

    let mut table = Table::new(&[
        "x",
        "n",
        "count_low",
        "count_high",
        "p_low",
        "p_high",
        "ci_lo",
        "ci_hi",
        "scaled_low",
        "scaled_high",
    ]);
    let rows = compare_constant(&est, exponent, constant);
    for (i, row) in rows.iter().enumerate() {
        table.push(vec![
            Cell::Real(row.x),
            Cell::Int(est.n_trees),
            Cell::Int(est.counts_low[i]),
            Cell::Int(est.counts_high[i]),
            Cell::Real(est.p_low[i]),
            Cell::Real(est.p_high[i]),
            Cell::Real(est.ci_low[i].0),
            Cell::Real(est.ci_high[i].1),
            Cell::Real(row.scaled_low),
            Cell::Real(row.scaled_high),
        ]);
    }

    let mut checks = Vec::new();
    let predicted_slope = -exponent;
    match fit_exponent(&est, cfg.fit_window) {
        Ok(fit) => {
            *fit_out = json!({
                "slope": real(fit.slope),
                "stderr": real(fit.stderr),
                "intercept": real(fit.intercept),
                "points": fit.points,
                "window": [real(cfg.fit_window.0), real(cfg.fit_window.1)],
                "predicted_slope": real(predicted_slope),
            });
            checks.push(Check::at_most(
                "slope",
                (fit.slope - predicted_slope).abs(),
                cfg.assert_slope_tol,
            ));
        }
        Err(e) => {
            *fit_out = json!({ "error": e.to_string() });
            checks.push(Check::at_most("slope", f64::NAN, cfg.assert_slope_tol));
        }
    }
    for row in rows
        .iter()
        .filter(|r| r.x >= cfg.check_window.0 && r.x <= cfg.check_window.1)
    {
        checks.push(Check::at_most(
            format!("scaled_tail_at_{}", row.x),
            row.rel_deviation.abs(),
            cfg.assert_tol,
        ));
    }

    *censored_out = real(est.censored_fraction());
    summarize_outcomes(&outcomes, results);
    Ok((table, checks))
}

fn summarize_outcomes(outcomes: &[TreeOutcome], results: &mut Map<String, Value>) {
    let stopped = outcomes.iter().filter(|o| o.stopped_early).count() as u64;
    let censored = outcomes.iter().filter(|o| o.censored).count() as u64;
    let particles: u64 = outcomes.iter().map(|o| o.particles_created).sum();
    let max_m = outcomes.iter().map(|o| o.m_observed).fold(0.0, f64::max);
    let max_generations = outcomes.iter().map(|o| o.generations).max().unwrap_or(0);
    results.insert("n_trees".into(), (outcomes.len() as u64).into());
    results.insert("n_censored".into(), censored.into());
    results.insert("n_stopped_early".into(), stopped.into());
    results.insert("particles_created".into(), particles.into());
    results.insert("max_m_observed".into(), real(max_m));
    results.insert("max_generations".into(), max_generations.into());
}

fn lattice_step(cfg: &RunConfig) -> Result<LatticeStep, RunError> {
    match cfg.motion_model()? {
        MotionModel::LatticeWalk { step } => Ok(step),
        _ => unreachable!("validated as lattice"),
    }
}

fn fixed_point(
    cfg: &RunConfig,
    results: &mut Map<String, Value>,
    constants: &mut Map<String, Value>,
) -> Result<(Table, Vec<Check>), RunError> {
    debug_assert!(matches!(cfg.motion, MotionSpec::Lattice { .. }));
    let law = cfg.law()?;
    let step = lattice_step(cfg)?;
    let opts = FixedPointOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        method: cfg.method,
    };
    let sol = discrete_fixed_point(&law, &step, cfg.x_max, &opts)?;
    let (_, constant) = prediction(cfg, law.kind(), law.sigma2(), step.second_moment(), true, constants)?;

    let mut table = Table::new(&["x", "v", "scaled"]);
    for x in 1..=cfg.x_max / 10 {
        let v = sol.value(x as i64);
        table.push(vec![Cell::Int(x as u64), Cell::Real(v), Cell::Real((x * x) as f64 * v)]);
    }

    let lo = cfg.check_window.0.ceil() as i64;
    let hi = cfg.check_window.1.floor() as i64;
    let points: Vec<i64> = (lo..=hi).collect();
    let worst = points
        .iter()
        .map(|&x| ((x * x) as f64 * sol.value(x) - constant).abs() / constant)
        .fold(0.0, f64::max);
    let doubling = boundary_sensitivity(&law, &step, cfg.x_max, &points, &opts)?;
    results.insert("iterations".into(), sol.iterations.into());
    results.insert("last_change".into(), real(sol.last_change));
    results.insert("boundary_doubling_change".into(), real(doubling));
    let checks = vec![
        Check::at_most("scaled_relative_deviation", worst, cfg.assert_tol),
        Check::at_most("boundary_doubling_change", doubling, 10.0 * cfg.tol),
    ];
    Ok((table, checks))
}

fn bvp(
    cfg: &RunConfig,
    results: &mut Map<String, Value>,
    constants: &mut Map<String, Value>,
) -> Result<(Table, Vec<Check>), RunError> {
    let params = TheoryParams::stable(cfg.alpha, cfg.kappa, cfg.beta, cfg.eta2)?;
    let t = theory_table(&params)?;
    constants.insert("theta".into(), real(t.theta));
    constants.insert("c_star".into(), real(t.c_star));
    constants.insert("phi_slope_at_zero".into(), real(t.phi_slope_at_zero));

    let sol = solve_bvp_shooting(&params, cfg.y_max, cfg.grid_step)?;
    // rows every 0.1 in y; the error check uses every grid point
    let stride = ((0.1 / cfg.grid_step).round() as usize).max(1);
    let mut table = Table::new(&["y", "phi_num", "phi_closed", "abs_err"]);
    let mut max_err: f64 = 0.0;
    for (i, (&y, &phi)) in sol.y.iter().zip(&sol.phi).enumerate() {
        let closed = phi_closed_form(y, &params)?;
        let err = (phi - closed).abs();
        if y <= 0.5 * cfg.y_max {
            max_err = max_err.max(err);
        }
        if i % stride == 0 || i + 1 == sol.y.len() {
            table.push(vec![Cell::Real(y), Cell::Real(phi), Cell::Real(closed), Cell::Real(err)]);
        }
    }
    results.insert("slope_at_zero".into(), real(sol.slope_at_zero));
    results.insert("bisection_steps".into(), sol.bisection_steps.into());
    results.insert("max_abs_err_first_half".into(), real(max_err));
    Ok((table, vec![Check::at_most("max_abs_err_first_half", max_err, cfg.assert_tol)]))
}

fn table_of_constants(cfg: &RunConfig, constants: &mut Map<String, Value>) -> Result<(Table, Vec<Check>), RunError> {
    let params = TheoryParams::stable(cfg.alpha, cfg.kappa, cfg.beta, cfg.eta2)?;
    let t = theory_table(&params)?;
    let identity = (t.c_star - t.theta.powf(-t.tail_exponent)).abs() / t.c_star;
    let residual = ode_residual(&params, &[0.0, 0.5, 1.0, 5.0, 20.0]);
    let mut entries = vec![
        ("theta", t.theta),
        ("c_star", limit_constant(&params)),
        ("lemma2_constant", t.lemma2_constant),
        ("tail_exponent", t.tail_exponent),
        ("phi_slope_at_zero", t.phi_slope_at_zero),
    ];
    if let Some(sigma2) = cfg.sigma2 {
        let fv = TheoryParams::finite_variance(cfg.beta, cfg.eta2, sigma2)?;
        entries.push(("finite_variance_constant_discrete", finite_variance_constant(&fv, true)?));
        entries.push(("finite_variance_constant_continuous", finite_variance_constant(&fv, false)?));
    }
    let mut table = Table::new(&["quantity", "value"]);
    for (name, value) in &entries {
        constants.insert((*name).into(), real(*value));
    }
    constants.insert(
        "phi_samples".into(),
        t.phi_samples.iter().map(|&(y, p)| json!([real(y), real(p)])).collect(),
    );
    for (name, value) in entries {
        table.push(vec![Cell::Text(name), Cell::Real(value)]);
    }
    let checks = vec![
        Check::at_most("c_star_identity", identity, 1e-12),
        Check::at_most("ode_residual_relative", residual.max_rel, cfg.assert_tol),
    ];
    Ok((table, checks))
}

fn lemma2(cfg: &RunConfig, constants: &mut Map<String, Value>) -> Result<(Table, Vec<Check>), RunError> {
    let law = branchmax_core::offspring::make_stable_tail(cfg.alpha, cfg.kappa)?;
    let limit = law.lemma2_constant(cfg.beta)?;
    constants.insert("lemma2_constant".into(), real(limit));
    let mut table = Table::new(&["v", "f", "ratio", "limit", "rel_err"]);
    let mut smallest = (f64::INFINITY, f64::NAN);
    for &v in &cfg.v_grid {
        let f = law.f_of_v(cfg.beta, v)?;
        let ratio = f / v.powf(cfg.alpha - 1.0);
        let rel = (ratio - limit).abs() / limit;
        if v < smallest.0 {
            smallest = (v, rel);
        }
        table.push(vec![Cell::Real(v), Cell::Real(f), Cell::Real(ratio), Cell::Real(limit), Cell::Real(rel)]);
    }
    let checks = vec![Check::at_most(
        format!("relative_error_at_{}", smallest.0),
        smallest.1,
        cfg.assert_tol,
    )];
    Ok((table, checks))
}
