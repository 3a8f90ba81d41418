//! One function per subcommand. Each returns the assembled report, the
//! resolved output format, and the process exit status (0 unless the result
//! itself fails a documented gate, which maps to 2).

use std::f64::consts::TAU;

use serde_json::{json, Value};

use nmc_core::branch::{self, ContinuationConfig};
use nmc_core::eval::StrategyRegistry;
use nmc_core::setgeom::PlanarSet;
use nmc_core::spectrum;
use nmc_core::verify::{SuiteRegistry, VerifyConfig};
use nmc_core::{CosineSeries, KernelContext, NmcError};

use crate::config::{usage, CliError, Format, RunConfig};
use crate::output::{Cell, Report, Table};

pub struct CmdOutcome {
    pub report: Report,
    pub format: Format,
    pub status: i32,
}

fn common_config(rc: &RunConfig, format: Format) -> Vec<(&'static str, Value)> {
    let mut cfg = vec![
        ("alpha", json!(rc.alpha)),
        ("tol", json!(rc.quad.abs_tol)),
        ("trunc_t", json!(rc.quad.trunc_t)),
        ("graded_levels", json!(rc.quad.graded_levels)),
        ("periodization_m", json!(rc.quad.periodization_m)),
        ("seed", json!(rc.seed)),
        ("format", json!(format.label())),
    ];
    if let Some(out) = &rc.out {
        cfg.push(("out", json!(out.display().to_string())));
    }
    cfg
}

pub fn dispatch(name: &'static str, rc: &RunConfig) -> Result<CmdOutcome, CliError> {
    match name {
        "solve-r" => cmd_solve_r(rc),
        "spectrum" => cmd_spectrum(rc),
        "branch" => cmd_branch(rc),
        "nmc-eval" => cmd_nmc_eval(rc),
        "set-eval" => cmd_set_eval(rc),
        "verify" => cmd_verify(rc),
        other => Err(usage(format!("unknown command {other:?}"))),
    }
}

/// Critical half width: solves `lambda_1(R) = 0`, re-measures the residual
/// independently, and reports the bracketing history.
fn cmd_solve_r(rc: &RunConfig) -> Result<CmdOutcome, CliError> {
    let format = rc.format.unwrap_or(Format::Json);
    let (r_star, trace) = spectrum::solve_r_traced(rc.alpha, &rc.quad)?;
    let ctx = KernelContext::new(rc.alpha, r_star)?;
    let mut tight = rc.quad.clone();
    tight.abs_tol = rc.quad.abs_tol.min(1e-12);
    let residual = spectrum::lambda_k(&ctx, 1, &tight)?;
    if !(residual.abs() <= 1e-10) {
        return Err(CliError::Numerical(format!(
            "recomputed lambda_1({r_star}) = {residual:e} exceeds the 1e-10 residual gate"
        )));
    }

    let mut table = Table::new(&["alpha", "R_star", "lambda1_residual"]);
    table.push(vec![
        Cell::Float(rc.alpha),
        Cell::Float(r_star),
        Cell::Float(residual),
    ]);

    let mut report = Report::new("solve-r", table);
    report.config = common_config(rc, format);
    let bracketing: Vec<Value> = trace
        .iter()
        .map(|(r, l1)| json!({ "r": r, "lambda1": l1 }))
        .collect();
    report.extra_meta.push(("bracketing", Value::Array(bracketing)));
    for (r, l1) in &trace {
        report.csv_comments.push(format!(
            "bracket r={} lambda1={}",
            crate::output::sig17(*r),
            crate::output::sig17(*l1)
        ));
    }
    Ok(CmdOutcome {
        report,
        format,
        status: 0,
    })
}

/// Eigenvalue table of the linearized operator at the straight band of half
/// width `r` (solved from alpha when not configured). Refuses to write a
/// table whose `lambda_k` are not strictly increasing.
fn cmd_spectrum(rc: &RunConfig) -> Result<CmdOutcome, CliError> {
    let format = rc.format.unwrap_or(Format::Csv);
    let (r, r_source) = match rc.r {
        Some(r) => (r, "config"),
        None => (spectrum::solve_r(rc.alpha, &rc.quad)?, "solved"),
    };
    let ctx = KernelContext::new(rc.alpha, r)?;
    let sp = spectrum::compute_spectrum(&ctx, rc.kmax, &rc.quad)?;
    for k in 1..sp.lambdas.len() {
        if !(sp.lambdas[k] > sp.lambdas[k - 1]) {
            return Err(CliError::Numerical(format!(
                "spectrum is not strictly increasing at k = {k}: lambda = {:e} after {:e}",
                sp.lambdas[k],
                sp.lambdas[k - 1]
            )));
        }
    }

    let mut table = Table::new(&["k", "lambda_k", "rescaled_lambda_k", "mu_inf"]);
    for (k, &l) in sp.lambdas.iter().enumerate() {
        let rescaled = if k == 0 {
            f64::NAN
        } else {
            l / (k as f64).powf(1.0 + rc.alpha)
        };
        table.push(vec![
            Cell::Int(k as i64),
            Cell::Float(l),
            Cell::Float(rescaled),
            Cell::Float(sp.mu_inf),
        ]);
    }

    let mut report = Report::new("spectrum", table);
    report.config = common_config(rc, format);
    report.config.push(("kmax", json!(rc.kmax)));
    if rc.r.is_some() {
        report.config.push(("r", json!(r)));
    }
    report.extra_meta.push(("r", json!(r)));
    report.extra_meta.push(("r_source", json!(r_source)));
    report.extra_meta.push(("gamma", json!(sp.gamma)));
    Ok(CmdOutcome {
        report,
        format,
        status: 0,
    })
}

/// Newton continuation of the bifurcating branch from the critical straight
/// band, both amplitude signs. Rows are sorted by amplitude; the exit status
/// reflects whether every point met the residual gate.
fn cmd_branch(rc: &RunConfig) -> Result<CmdOutcome, CliError> {
    let format = rc.format.unwrap_or(Format::Csv);
    let modes = rc.modes.unwrap_or(32);
    let steps = rc.steps.unwrap_or(6);
    let a_max = rc.a_max.unwrap_or(0.03);

    let r_star = spectrum::solve_r(rc.alpha, &rc.quad)?;
    let ctx = KernelContext::new(rc.alpha, r_star)?;
    let cc = ContinuationConfig {
        modes,
        ..ContinuationConfig::default()
    };
    let points = branch::continue_branch(&ctx, a_max, steps, &cc, &rc.quad)?;

    let mut columns = vec![
        "a".to_string(),
        "lambda".to_string(),
        "period".to_string(),
        "v_norm".to_string(),
        "residual".to_string(),
    ];
    for k in 0..=modes {
        columns.push(format!("coeff_{k}"));
    }
    let mut table = Table::with_columns(columns);
    let gate = 1e-9;
    let mut worst = 0.0f64;
    for pt in &points {
        worst = worst.max(pt.residual_norm);
        let mut row = vec![
            Cell::Float(pt.a),
            Cell::Float(pt.lambda),
            Cell::Float(TAU / pt.lambda),
            Cell::Float(pt.v.profile_norm_bound()),
            Cell::Float(pt.residual_norm),
        ];
        for k in 0..=modes {
            row.push(Cell::Float(pt.v.coeff(k)));
        }
        table.push(row);
    }

    let mut report = Report::new("branch", table);
    report.config = common_config(rc, format);
    report.config.push(("a_max", json!(a_max)));
    report.config.push(("steps", json!(steps)));
    report.config.push(("modes", json!(modes)));
    report.extra_meta.push(("r_star", json!(r_star)));
    report.extra_meta.push(("residual_gate", json!(gate)));
    Ok(CmdOutcome {
        report,
        format,
        status: if worst <= gate { 0 } else { 2 },
    })
}

fn lookup<'r>(
    reg: &'r StrategyRegistry,
    method: &str,
    set: &PlanarSet,
) -> Result<&'r dyn nmc_core::eval::NmcStrategy, CliError> {
    let strat = reg.get(method).ok_or_else(|| {
        usage(format!(
            "unknown method {method:?}; valid methods: {}",
            reg.names().join(", ")
        ))
    })?;
    if !strat.supports(set) {
        return Err(usage(format!(
            "method {method:?} does not apply to this shape ({})",
            strat.summary()
        )));
    }
    Ok(strat)
}

/// Curvature of the band bounded by `±u` for the configured cosine profile,
/// sampled at equispaced arc parameters.
fn cmd_nmc_eval(rc: &RunConfig) -> Result<CmdOutcome, CliError> {
    let format = rc.format.unwrap_or(Format::Csv);
    let profile = CosineSeries::new(rc.profile.clone());
    let set = PlanarSet::graph_band(profile).map_err(|e| usage(e.to_string()))?;
    let reg = StrategyRegistry::builtin();
    let method = rc.method.as_deref().unwrap_or("graph");
    let strat = lookup(&reg, method, &set)?;

    let mut table = Table::new(&["s", "h"]);
    for i in 0..rc.points {
        let s = TAU * i as f64 / rc.points as f64;
        let h = strat.evaluate(rc.alpha, &set, s, &rc.quad)?;
        table.push(vec![Cell::Float(s), Cell::Float(h)]);
    }

    let mut report = Report::new("nmc-eval", table);
    report.config = common_config(rc, format);
    report
        .config
        .push(("profile", json!(rc.profile.clone())));
    report.config.push(("points", json!(rc.points)));
    report.config.push(("method", json!(method)));
    Ok(CmdOutcome {
        report,
        format,
        status: 0,
    })
}

fn parse_shape(spec: &str) -> Result<PlanarSet, CliError> {
    const GRAMMAR: &str =
        "expected disc:R, ellipse:A,B, band:R, or graph-band:c0,c1,...";
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| usage(format!("shape {spec:?}: {GRAMMAR}")))?;
    let nums: Result<Vec<f64>, CliError> = rest
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("shape {spec:?}: cannot parse {s:?}")))
        })
        .collect();
    let nums = nums?;
    let built = match (kind, nums.as_slice()) {
        ("disc", [radius]) => PlanarSet::disc(*radius),
        ("ellipse", [a, b]) => PlanarSet::ellipse(*a, *b),
        ("band", [half_width]) => PlanarSet::straight_band(*half_width),
        ("graph-band", coeffs) if !coeffs.is_empty() => {
            PlanarSet::graph_band(CosineSeries::new(coeffs.to_vec()))
        }
        _ => return Err(usage(format!("shape {spec:?}: {GRAMMAR}"))),
    };
    built.map_err(|e| usage(format!("shape {spec:?}: {e}")))
}

/// Curvature of a planar shape at equispaced boundary parameters, through
/// the selected evaluation route.
fn cmd_set_eval(rc: &RunConfig) -> Result<CmdOutcome, CliError> {
    let format = rc.format.unwrap_or(Format::Csv);
    let set = parse_shape(&rc.shape)?;
    let reg = StrategyRegistry::builtin();
    let method = rc.method.as_deref().unwrap_or("set");
    let strat = lookup(&reg, method, &set)?;

    let mut table = Table::new(&["t", "x1", "x2", "h"]);
    for i in 0..rc.points {
        let t = TAU * i as f64 / rc.points as f64;
        let (x, _) = set.boundary_point(t);
        let h = strat.evaluate(rc.alpha, &set, t, &rc.quad)?;
        table.push(vec![
            Cell::Float(t),
            Cell::Float(x[0]),
            Cell::Float(x[1]),
            Cell::Float(h),
        ]);
    }

    let mut report = Report::new("set-eval", table);
    report.config = common_config(rc, format);
    report.config.push(("shape", json!(rc.shape)));
    report.config.push(("points", json!(rc.points)));
    report.config.push(("method", json!(method)));
    Ok(CmdOutcome {
        report,
        format,
        status: 0,
    })
}

/// Runs the named self-check suite (or all of them) and tabulates every
/// check. Exit status 0 only when every check passed.
fn cmd_verify(rc: &RunConfig) -> Result<CmdOutcome, CliError> {
    let format = rc.format.unwrap_or(Format::Csv);
    let modes = rc.modes.unwrap_or(16);
    let steps = rc.steps.unwrap_or(2);
    let a_max = rc.a_max.unwrap_or(0.02);
    let vc = VerifyConfig {
        alpha: rc.alpha,
        modes,
        a_max,
        steps,
        quad: rc.quad.clone(),
    };
    let reg = SuiteRegistry::builtin();
    let results = match reg.run(&rc.suite, &vc) {
        Ok(r) => r,
        Err(NmcError::InvalidParameter(m)) if m.contains("valid suites") => {
            return Err(usage(m));
        }
        Err(e) => return Err(e.into()),
    };

    let mut table = Table::new(&["suite", "check", "status", "measured", "threshold", "detail"]);
    let mut failures = 0usize;
    for cr in &results {
        if !cr.passed {
            failures += 1;
        }
        table.push(vec![
            Cell::Text(cr.suite.into()),
            Cell::Text(cr.name.clone()),
            Cell::Text(if cr.passed { "pass" } else { "fail" }.into()),
            Cell::Float(cr.measured),
            Cell::Float(cr.threshold),
            Cell::Text(cr.detail.clone()),
        ]);
    }

    let mut report = Report::new("verify", table);
    report.config = common_config(rc, format);
    report.config.push(("suite", json!(rc.suite)));
    report.config.push(("modes", json!(modes)));
    report.config.push(("a_max", json!(a_max)));
    report.config.push(("steps", json!(steps)));
    report
        .extra_meta
        .push(("checks", json!(results.len())));
    report.extra_meta.push(("failures", json!(failures)));
    Ok(CmdOutcome {
        report,
        format,
        status: if failures == 0 { 0 } else { 2 },
    })
}
