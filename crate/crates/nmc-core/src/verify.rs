//! Runtime verification suites: the library's invariants re-expressed as
//! named, machine-readable checks.
//!
//! Each module contributes a [`CheckSuite`] to a name-keyed registry; the
//! CLI's `verify` command runs one suite (or all of them) and reports one
//! pass/fail line per invariant with the measured quantity and its
//! threshold. The checks deliberately go through the public API only, so
//! a passing report certifies the crate as callers see it.

use std::f64::consts::{PI, TAU};

use crate::branch::{self, ContinuationConfig};
use crate::error::{NmcError, Result};
use crate::graph;
use crate::kernels::{FArg, KernelContext};
use crate::quad::{self, PeriodizedKernel, QuadratureConfig};
use crate::series::{self, CosineSeries};
use crate::setgeom::{self, PlanarSet};
use crate::spectrum;

/// Outcome of a single named invariant check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    /// The quantity the check measured (usually a worst-case error).
    pub measured: f64,
    /// The bound the measurement must stay within.
    pub threshold: f64,
    pub detail: String,
}

/// Shared knobs for the verification suites.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub alpha: f64,
    /// Highest correction mode for the branch suite.
    pub modes: usize,
    /// Amplitude reach of the branch suite.
    pub a_max: f64,
    /// Continuation steps per sign in the branch suite.
    pub steps: usize,
    pub quad: QuadratureConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            alpha: 0.5,
            modes: 16,
            a_max: 0.02,
            steps: 2,
            quad: QuadratureConfig::default(),
        }
    }
}

impl VerifyConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(NmcError::InvalidParameter(format!(
                "alpha = {} outside (0,1)",
                self.alpha
            )));
        }
        self.quad.validate()
    }
}

/// A named group of checks covering one module.
pub trait CheckSuite {
    fn name(&self) -> &'static str;
    fn run(&self, vc: &VerifyConfig) -> Vec<CheckResult>;
}

/// `measured <= threshold` check (NaN fails).
fn upper(
    suite: &'static str,
    name: &str,
    measured: f64,
    threshold: f64,
    detail: impl Into<String>,
) -> CheckResult {
    CheckResult {
        suite,
        name: name.to_string(),
        passed: measured.is_finite() && measured <= threshold,
        measured,
        threshold,
        detail: detail.into(),
    }
}

/// `measured >= threshold` check (NaN fails).
fn lower(
    suite: &'static str,
    name: &str,
    measured: f64,
    threshold: f64,
    detail: impl Into<String>,
) -> CheckResult {
    CheckResult {
        suite,
        name: name.to_string(),
        passed: measured.is_finite() && measured >= threshold,
        measured,
        threshold,
        detail: detail.into(),
    }
}

/// Runs a fallible check body; an `Err` becomes a failed result rather
/// than aborting the suite.
fn guarded(
    suite: &'static str,
    name: &str,
    body: impl FnOnce() -> Result<CheckResult>,
) -> CheckResult {
    body().unwrap_or_else(|e| CheckResult {
        suite,
        name: name.to_string(),
        passed: false,
        measured: f64::NAN,
        threshold: 0.0,
        detail: format!("error: {e}"),
    })
}

struct KernelsSuite;

impl CheckSuite for KernelsSuite {
    fn name(&self) -> &'static str {
        "kernels"
    }

    fn run(&self, vc: &VerifyConfig) -> Vec<CheckResult> {
        let suite = self.name();
        let alpha = vc.alpha;
        let mut out = Vec::new();

        out.push(guarded(suite, "f-oddness", || {
            let c = KernelContext::new(alpha, 1.0)?;
            let mut worst = 0.0f64;
            for &q in &[0.1, 0.3, 1.0, 2.5, 7.0, 10.0] {
                let plus = c.eval_f(FArg::Finite(q));
                let minus = c.eval_f(FArg::Finite(-q));
                worst = worst.max((plus + minus).abs() / plus.abs());
            }
            Ok(upper(suite, "f-oddness", worst, 1e-13, "max rel |F(q)+F(-q)|"))
        }));

        out.push(guarded(suite, "f-derivative-consistency", || {
            let c = KernelContext::new(alpha, 1.0)?;
            let h = 1e-6;
            let mut err = 0.0f64;
            let mut scale = 0.0f64;
            for i in 0..=20 {
                let q = -10.0 + i as f64;
                let fd = (c.eval_f(FArg::Finite(q + h)) - c.eval_f(FArg::Finite(q - h)))
                    / (2.0 * h);
                let (d1, _) = c.eval_f_derivs(q);
                err = err.max((fd - d1).abs());
                scale = scale.max(d1.abs());
            }
            Ok(upper(
                suite,
                "f-derivative-consistency",
                err / scale,
                1e-7,
                "centered differences of F vs closed-form F', grid norm on [-10,10]",
            ))
        }));

        out.push(guarded(suite, "f2-power-decay", || {
            let c = KernelContext::new(alpha, 1.0)?;
            let t = 1e3 * c.r();
            let mut worst = 0.0f64;
            for &(a, lambda, r) in &[(0.05, 1.0, 0.7), (-0.08, 1.1, 1.4), (0.02, 0.9, 2.0)] {
                let f2 = c.eval_f2(t, a, lambda, r)?;
                worst = worst.max((f2 * t.powf(2.0 + alpha) - 1.0).abs());
            }
            Ok(upper(
                suite,
                "f2-power-decay",
                worst,
                1e-3,
                "|F2 * t^{2+alpha} - 1| at t = 1e3 R",
            ))
        }));

        out.push(guarded(suite, "f2-dual-route", || {
            let c = KernelContext::new(alpha, 1.0)?;
            let (lambda, r) = (1.05, 1.0);
            let c0 = 2.0 * lambda * c.r();
            let mut worst = 0.0f64;
            for &t in &[0.3, 2.0] {
                let mut ar = 1e-7;
                while ar <= 1.1e-2 {
                    let a = ar / r;
                    let closed = c.eval_f2(t, a, lambda, r)?;
                    let direct = quad::adaptive_gk(
                        |tau: f64| {
                            let u = c0 + ar * tau;
                            (t * t + u * u).powf(-0.5 * (2.0 + alpha))
                        },
                        0.0,
                        1.0,
                        1e-13,
                    )?;
                    worst = worst.max((closed - direct).abs() / direct.abs());
                    ar *= 10.0;
                }
            }
            Ok(upper(
                suite,
                "f2-dual-route",
                worst,
                1e-10,
                "closed/series branches vs direct quadrature across the switch band",
            ))
        }));

        out.push(guarded(suite, "f3-symmetrization-identity", || {
            let c = KernelContext::new(alpha, 1.0)?;
            let samples = [
                (0.1, 0.5, 1.2),
                (0.1, -0.5, 0.50004),
                (0.9, 3.0, -1.0),
                (0.05, 1e-5, 2e-5),
                (0.3, -2.0, 2.0 + 5e-5),
            ];
            let mut worst = 0.0f64;
            for &(a, q, p) in &samples {
                let lhs = c.eval_f1(a, q) + c.eval_f1(a, p);
                let rhs = (q + p) * c.eval_f3(a, q, p);
                worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
            }
            Ok(upper(
                suite,
                "f3-symmetrization-identity",
                worst,
                1e-10,
                "F1(a,q) + F1(a,p) = (q+p) F3(a,q,p)",
            ))
        }));

        out.push(guarded(suite, "f3-pr-bounds", || {
            let c = KernelContext::new(alpha, 1.0)?;
            let mut violation = 0.0f64;
            for &(a, q, p) in &[(0.1, 0.5, 1.2), (0.9, 3.0, -1.0), (0.05, 1e-5, 2e-5)] {
                let f3 = c.eval_f3(a, q, p);
                violation = violation.max(-f3).max(f3 - 1.0);
            }
            let cap = (2.0 * c.r()).powf(-(2.0 + alpha));
            for &t in &[0.0, 0.5, 2.0, 25.0] {
                let pr = c.eval_pr(t);
                violation = violation.max(-pr).max(pr - cap);
            }
            Ok(upper(
                suite,
                "f3-pr-bounds",
                violation,
                1e-12,
                "0 < F3 <= 1 and 0 < P_R <= (2R)^{-2-alpha}",
            ))
        }));

        out
    }
}

struct QuadSuite;

impl CheckSuite for QuadSuite {
    fn name(&self) -> &'static str {
        "quad"
    }

    fn run(&self, vc: &VerifyConfig) -> Vec<CheckResult> {
        let suite = self.name();
        let cfg = vc.quad.clone();
        let mut out = Vec::new();

        out.push(guarded(suite, "beta-integral", || {
            let v = quad::pv_symmetric_integral(
                |t: f64| t.powf(-0.5) * (1.0 + t).powi(-3),
                -0.5,
                &cfg,
            )?;
            let exact = 3.0 * PI / 8.0;
            Ok(upper(
                suite,
                "beta-integral",
                (v - exact).abs(),
                2e-10,
                "graded PV route on a Beta-function integrand",
            ))
        }));

        out.push(guarded(suite, "power-tail-exactness", || {
            let alpha = vc.alpha;
            let g = move |t: f64| if t < 1.0 { 0.0 } else { t.powf(-2.0 - alpha) };
            let v = quad::pv_symmetric_integral(g, 0.0, &cfg)?;
            let exact = 1.0 / (1.0 + alpha);
            Ok(upper(
                suite,
                "power-tail-exactness",
                (v - exact).abs(),
                1e-10,
                "analytic tail of |t|^{-2-alpha} beyond the truncation point",
            ))
        }));

        out.push(guarded(suite, "poisson-transform", || {
            let mut worst = 0.0f64;
            for k in [0u32, 1, 3] {
                let v = quad::oscillatory_cos_integral(|t: f64| 1.0 / (1.0 + t * t), k, &cfg)?;
                worst = worst.max((v - PI * (-(k as f64)).exp()).abs());
            }
            Ok(upper(
                suite,
                "poisson-transform",
                worst,
                5e-10,
                "cos transform of the Poisson kernel vs pi e^{-k}",
            ))
        }));

        out.push(guarded(suite, "lattice-periodization", || {
            let alpha = vc.alpha;
            let beta = 2.0 + alpha;
            let s = 0.7;
            let tilde =
                quad::periodized_kernel(&PeriodizedKernel::MuAlphaPlusOne { alpha }, s, &cfg)?;
            let n_max = 2_000_000i64;
            let mut brute = 0.0;
            for n in -n_max..=n_max {
                brute += (s + TAU * n as f64).abs().powf(-beta);
            }
            let y = TAU * (n_max as f64 + 0.5);
            brute += 2.0 * y.powf(1.0 - beta) / (beta - 1.0) / TAU;
            Ok(upper(
                suite,
                "lattice-periodization",
                (tilde - brute).abs(),
                1e-10,
                "periodized kernel vs brute 2e6-point lattice sum",
            ))
        }));

        out.push(guarded(suite, "tolerance-ladder", || {
            let g = |t: f64| {
                let h = (0.5 * t).sin();
                2.0 * h * h * t.powf(-2.5)
            };
            let mut tight = cfg.clone();
            tight.abs_tol = 1e-13;
            let reference = quad::pv_symmetric_integral(g, -0.5, &tight)?;
            let mut worst = 0.0f64;
            for tol in [1e-6, 1e-8, 1e-10] {
                let mut run = cfg.clone();
                run.abs_tol = tol;
                let v = quad::pv_symmetric_integral(g, -0.5, &run)?;
                worst = worst.max((v - reference).abs() / tol);
            }
            Ok(upper(
                suite,
                "tolerance-ladder",
                worst,
                1.0,
                "error/tolerance across the 1e-6..1e-10 ladder",
            ))
        }));

        out
    }
}

struct GraphSuite;

impl CheckSuite for GraphSuite {
    fn name(&self) -> &'static str {
        "graph"
    }

    fn run(&self, vc: &VerifyConfig) -> Vec<CheckResult> {
        let suite = self.name();
        let alpha = vc.alpha;
        let cfg = vc.quad.clone();
        let mut out = Vec::new();

        out.push(guarded(suite, "straight-band-constancy", || {
            let c = KernelContext::new(alpha, 0.9)?;
            let h = graph::straight_band_h(&c, &cfg)?;
            let flat = CosineSeries::constant(0.9);
            let mut worst = 0.0f64;
            for &s in &[0.0, 1.0, 2.5] {
                let v = graph::nmc_of_graph(&c, &flat, s, &cfg)?;
                worst = worst.max((v - h).abs() / h.abs());
            }
            Ok(upper(
                suite,
                "straight-band-constancy",
                worst,
                1e-8,
                "NMC of the constant profile vs the straight-band value",
            ))
        }));

        out.push(guarded(suite, "scaling-law", || {
            let c = KernelContext::new(alpha, 1.0)?;
            let w = CosineSeries::new(vec![1.0, 0.1]);
            let mut worst = 0.0f64;
            for &lam in &[0.5, 2.0] {
                let wl = CosineSeries::with_omega(1.0 / lam, vec![lam, lam * 0.1])?;
                for i in 0..4 {
                    let s = -2.0 + 4.8 * i as f64 / 3.0;
                    let left = graph::nmc_of_graph(&c, &wl, s, &cfg)?;
                    let right = lam.powf(-alpha) * graph::nmc_of_graph(&c, &w, s / lam, &cfg)?;
                    worst = worst.max((left - right).abs());
                }
            }
            Ok(upper(
                suite,
                "scaling-law",
                worst,
                1e-7,
                "H(w^lambda)(s) = lambda^{-alpha} H(w)(s/lambda)",
            ))
        }));

        out.push(guarded(suite, "translation-evenness", || {
            let r = spectrum::solve_r(alpha, &cfg)?;
            let c = KernelContext::new(alpha, r)?;
            let varphi = CosineSeries::new(vec![0.0, 1.0, 0.05]);
            let mut worst = 0.0f64;
            for &s in &[0.4, 1.3] {
                let here = graph::phi(&c, 0.02, 1.01, &varphi, s, &cfg)?;
                let shifted = graph::phi(&c, 0.02, 1.01, &varphi, s + TAU, &cfg)?;
                let mirrored = graph::phi(&c, 0.02, 1.01, &varphi, -s, &cfg)?;
                worst = worst.max((here - shifted).abs()).max((here - mirrored).abs());
            }
            Ok(upper(
                suite,
                "translation-evenness",
                worst,
                1e-9,
                "phi under s -> s + 2pi and s -> -s on even data",
            ))
        }));

        out.push(guarded(suite, "increment-inequalities", || {
            let varphi = CosineSeries::new(vec![0.3, 0.7, -0.2, 0.1]);
            let c1 = varphi.sup_bound() + varphi.slope_bound();
            let curv: f64 = varphi
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| (k * k) as f64 * c.abs())
                .sum();
            let mut violation = 0.0f64;
            for i in 0..12 {
                let s = -PI + TAU * i as f64 / 11.0;
                for &t in &[1e-6, 1e-3, 0.1, 0.9, 2.0, 10.0] {
                    let q = varphi.increment(s, t) / t;
                    let p = varphi.increment(s, -t) / t;
                    violation = violation.max(q.abs() + p.abs() - 2.0 * c1);
                    let qp = varphi.second_increment(s, t) / t;
                    violation = violation.max(qp.abs() - curv * t);
                }
            }
            Ok(upper(
                suite,
                "increment-inequalities",
                violation,
                1e-12,
                "first/second increment bounds on trig polynomials",
            ))
        }));

        out.push(guarded(suite, "frechet-derivatives-fd", || {
            let r = spectrum::solve_r(alpha, &cfg)?;
            let c = KernelContext::new(alpha, r)?;
            let varphi = CosineSeries::new(vec![0.0, 1.0, 0.04]);
            let psi = CosineSeries::new(vec![0.1, 0.0, 1.0]);
            let (a, lambda, s) = (0.015, 1.02, 0.6);
            let h = 1e-5;
            let mut worst = 0.0f64;

            let analytic = graph::dphi_dvarphi(&c, a, lambda, &varphi, &psi, s, &cfg)?;
            let mut bump = varphi.coeffs().to_vec();
            bump.resize(psi.coeffs().len().max(bump.len()), 0.0);
            let plus: Vec<f64> = bump
                .iter()
                .enumerate()
                .map(|(k, v)| v + h * psi.coeff(k))
                .collect();
            let minus: Vec<f64> = bump
                .iter()
                .enumerate()
                .map(|(k, v)| v - h * psi.coeff(k))
                .collect();
            let fd = (graph::phi(&c, a, lambda, &CosineSeries::new(plus), s, &cfg)?
                - graph::phi(&c, a, lambda, &CosineSeries::new(minus), s, &cfg)?)
                / (2.0 * h);
            worst = worst.max((analytic - fd).abs() / analytic.abs().max(1e-3));

            let analytic = graph::dphi_dlambda(&c, a, lambda, &varphi, s, &cfg)?;
            let fd = (graph::phi(&c, a, lambda + h, &varphi, s, &cfg)?
                - graph::phi(&c, a, lambda - h, &varphi, s, &cfg)?)
                / (2.0 * h);
            worst = worst.max((analytic - fd).abs() / analytic.abs().max(1e-3));

            let analytic = graph::dphi_da(&c, a, lambda, &varphi, s, &cfg)?;
            let fd = (graph::phi(&c, a + h, lambda, &varphi, s, &cfg)?
                - graph::phi(&c, a - h, lambda, &varphi, s, &cfg)?)
                / (2.0 * h);
            worst = worst.max((analytic - fd).abs() / analytic.abs().max(1e-3));

            Ok(upper(
                suite,
                "frechet-derivatives-fd",
                worst,
                1e-5,
                "dphi_dvarphi / dphi_dlambda / dphi_da vs centered differences",
            ))
        }));

        out
    }
}

struct SpectrumSuite;

impl CheckSuite for SpectrumSuite {
    fn name(&self) -> &'static str {
        "spectrum"
    }

    fn run(&self, vc: &VerifyConfig) -> Vec<CheckResult> {
        let suite = self.name();
        let alpha = vc.alpha;
        let cfg = vc.quad.clone();
        let mut out = Vec::new();

        let prepared: Result<(KernelContext, spectrum::Spectrum)> = (|| {
            let r = spectrum::solve_r(alpha, &cfg)?;
            let ctx = KernelContext::new(alpha, r)?;
            let sp = spectrum::compute_spectrum(&ctx, 64, &cfg)?;
            Ok((ctx, sp))
        })();
        let (ctx, sp) = match prepared {
            Ok(pair) => pair,
            Err(e) => {
                return vec![CheckResult {
                    suite,
                    name: "critical-width-spectrum".into(),
                    passed: false,
                    measured: f64::NAN,
                    threshold: 0.0,
                    detail: format!("error: {e}"),
                }];
            }
        };

        out.push(upper(
            suite,
            "critical-width-residual",
            sp.lambdas[1].abs(),
            1e-10,
            format!("|lambda_1(R*)| at R* = {:.12}", sp.r),
        ));
        out.push(upper(
            suite,
            "lambda0-negative",
            sp.lambdas[0],
            -1e-6,
            "lambda_0 < 0 at the critical width",
        ));
        let min_gap = sp
            .lambdas
            .windows(2)
            .skip(1)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        out.push(lower(
            suite,
            "strict-ordering",
            min_gap,
            1e-12,
            "min consecutive gap lambda_{k+1} - lambda_k, k in [1,63]",
        ));

        let ratio = |k: usize| sp.lambdas[k] / ((k as f64).powf(1.0 + alpha) * sp.mu_inf);
        let sampled = [2usize, 4, 8, 16, 32, 64];
        let min_step = sampled
            .windows(2)
            .map(|w| ratio(w[1]) - ratio(w[0]))
            .fold(f64::INFINITY, f64::min);
        out.push(lower(
            suite,
            "ratio-monotone",
            min_step,
            -1e-12,
            "lambda_k / (k^{1+alpha} mu_inf) increasing over k = 2..64",
        ));
        out.push(upper(
            suite,
            "ratio-terminal",
            (ratio(64) - 1.0).abs(),
            0.01,
            "asymptotic ratio within 1% of 1 at k = 64",
        ));
        out.push(lower(
            suite,
            "gamma-positive",
            sp.gamma,
            1e-12,
            "the lambda-derivative constant gamma",
        ));

        out.push(guarded(suite, "dlambda-pure-cos", || {
            let nodes = series::collocation_nodes(8);
            let values = nodes
                .iter()
                .map(|&s| {
                    graph::dphi_dlambda(&ctx, 0.0, 1.0, &CosineSeries::mode(1), s, &cfg)
                })
                .collect::<Result<Vec<f64>>>()?;
            let coeffs = series::nodes_to_coeffs(&values);
            let scale = coeffs[1].abs();
            let stray = coeffs
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != 1)
                .fold(0.0f64, |m, (_, c)| m.max(c.abs()));
            Ok(upper(
                suite,
                "dlambda-pure-cos",
                stray / scale,
                1e-10,
                "dphi_dlambda(0,1,cos) carries only the cos mode",
            ))
        }));

        out.push(guarded(suite, "operator-roundtrip", || {
            let w = CosineSeries::new(vec![0.4, 0.0, -0.3, 0.2, 0.05]);
            let back = spectrum::solve_l_on_v2(&ctx, &spectrum::apply_l(&ctx, &w, &cfg)?, &cfg)?;
            let mut worst = 0.0f64;
            for k in 0..w.coeffs().len() {
                if k == 1 {
                    continue;
                }
                worst = worst.max((back.coeff(k) - w.coeff(k)).abs());
            }
            Ok(upper(
                suite,
                "operator-roundtrip",
                worst,
                1e-12,
                "L^{-1} L = id on the cos-free subspace",
            ))
        }));

        out
    }
}

struct BranchSuite;

impl CheckSuite for BranchSuite {
    fn name(&self) -> &'static str {
        "branch"
    }

    fn run(&self, vc: &VerifyConfig) -> Vec<CheckResult> {
        let suite = self.name();
        let alpha = vc.alpha;
        let cfg = vc.quad.clone();
        let cc = ContinuationConfig {
            modes: vc.modes,
            ..ContinuationConfig::default()
        };
        let mut out = Vec::new();

        let prepared: Result<(KernelContext, Vec<branch::BranchPoint>)> = (|| {
            let r = spectrum::solve_r(alpha, &cfg)?;
            let ctx = KernelContext::new(alpha, r)?;
            let pts = branch::continue_branch(&ctx, vc.a_max, vc.steps.max(1), &cc, &cfg)?;
            Ok((ctx, pts))
        })();
        let (ctx, pts) = match prepared {
            Ok(pair) => pair,
            Err(e) => {
                return vec![CheckResult {
                    suite,
                    name: "continuation".into(),
                    passed: false,
                    measured: f64::NAN,
                    threshold: 0.0,
                    detail: format!("error: {e}"),
                }];
            }
        };

        out.push(guarded(suite, "trivial-residual", || {
            let zero = CosineSeries::constant(0.0);
            let nodes = series::collocation_nodes(vc.modes);
            let res = branch::residual(&ctx, 0.0, 1.0, &zero, &nodes, &cfg)?;
            let sup = res.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            Ok(upper(
                suite,
                "trivial-residual",
                sup,
                100.0 * cfg.abs_tol,
                "Phi(0, 1, cos) at the collocation nodes",
            ))
        }));

        let worst_res = pts.iter().fold(0.0f64, |m, p| m.max(p.residual_norm));
        out.push(upper(
            suite,
            "branch-residuals",
            worst_res,
            1e-9,
            format!("sup residual over the {} accepted points", pts.len()),
        ));

        let expected_rows = 2 * vc.steps.max(1) + 1;
        out.push(upper(
            suite,
            "branch-coverage",
            (pts.len() as f64 - expected_rows as f64).abs(),
            0.0,
            "both signs plus the trivial point are reported",
        ));

        out.push(guarded(suite, "amplitude-taper", || {
            let mut violation = 0.0f64;
            for pair in pts.windows(2) {
                let (inner, outer) = if pair[0].a.abs() <= pair[1].a.abs() {
                    (&pair[0], &pair[1])
                } else {
                    (&pair[1], &pair[0])
                };
                let inner_norm = inner.v.profile_norm_bound();
                let outer_norm = outer.v.profile_norm_bound();
                violation = violation.max(inner_norm - outer_norm - 1e-12);
                violation = violation
                    .max((inner.lambda - 1.0).abs() - (outer.lambda - 1.0).abs() - 1e-12);
            }
            Ok(upper(
                suite,
                "amplitude-taper",
                violation,
                0.0,
                "|lambda - 1| and the correction norm shrink toward a = 0",
            ))
        }));

        out.push(guarded(suite, "band-reconstruction", || {
            let tip = pts
                .iter()
                .max_by(|x, y| x.a.abs().total_cmp(&y.a.abs()))
                .expect("continuation returned points");
            let band = branch::reconstruct_band(&ctx, tip, &cfg)?;
            let mut worst = 0.0f64;
            for &s in &[0.0, 1.1] {
                let v = graph::nmc_of_graph(&ctx, &band.profile, s, &cfg)?;
                worst = worst.max((v - band.h).abs() / band.h.abs());
            }
            Ok(upper(
                suite,
                "band-reconstruction",
                worst,
                1e-5,
                "NMC of the unrescaled band vs the straight-band value",
            ))
        }));

        out
    }
}

struct SetgeomSuite;

impl CheckSuite for SetgeomSuite {
    fn name(&self) -> &'static str {
        "setgeom"
    }

    fn run(&self, vc: &VerifyConfig) -> Vec<CheckResult> {
        let suite = self.name();
        let alpha = vc.alpha;
        let cfg = vc.quad.clone();
        let mut out = Vec::new();

        out.push(guarded(suite, "disc-constancy", || {
            let ctx = KernelContext::new(alpha, 1.0)?;
            let disc = PlanarSet::disc(1.0)?;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..8 {
                let t = TAU * i as f64 / 8.0;
                let (x, _) = disc.boundary_point(t);
                let v = setgeom::nmc_of_set(&ctx, &disc, x, &cfg)?;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Ok(upper(
                suite,
                "disc-constancy",
                (hi - lo) / hi.abs(),
                1e-4,
                "relative variation of disc NMC over 8 boundary points",
            ))
        }));

        out.push(guarded(suite, "ellipse-rigidity", || {
            let ctx = KernelContext::new(alpha, 1.0)?;
            let ell = PlanarSet::ellipse(1.5, 1.0)?;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..16 {
                let t = TAU * i as f64 / 16.0;
                let (x, _) = ell.boundary_point(t);
                let v = setgeom::nmc_of_set(&ctx, &ell, x, &cfg)?;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Ok(lower(
                suite,
                "ellipse-rigidity",
                (hi - lo) / hi.abs(),
                100.0 * 1e-4,
                "non-circular shape shows non-constant NMC (Alexandrov, contrapositive)",
            ))
        }));

        out.push(guarded(suite, "formula-agreement", || {
            let ctx = KernelContext::new(alpha, 1.0)?;
            let mut worst = 0.0f64;
            for set in [PlanarSet::disc(1.0)?, PlanarSet::ellipse(2.0, 1.0)?] {
                for i in 0..8 {
                    let t = TAU * i as f64 / 8.0 + 0.1;
                    let (x, _) = set.boundary_point(t);
                    let rays = setgeom::nmc_of_set(&ctx, &set, x, &cfg)?;
                    let boundary = setgeom::nmc_boundary_form(&ctx, &set, x, &cfg)?;
                    worst = worst.max((rays - boundary).abs() / rays.abs());
                }
            }
            Ok(upper(
                suite,
                "formula-agreement",
                worst,
                1e-4,
                "ray-cast vs boundary-integral NMC, 8 points on disc and ellipse",
            ))
        }));

        out.push(guarded(suite, "graph-set-agreement", || {
            let ctx = KernelContext::new(alpha, 1.0)?;
            let u = CosineSeries::new(vec![1.0, 0.05]);
            let band = PlanarSet::graph_band(u.clone())?;
            let mut worst = 0.0f64;
            for &s in &[0.0, PI / 4.0, PI / 2.0, 2.2, 3.0] {
                let (x, _) = band.boundary_point(s);
                let by_set = setgeom::nmc_of_set(&ctx, &band, x, &cfg)?;
                let by_graph = graph::nmc_of_graph(&ctx, &u, s, &cfg)?;
                worst = worst.max((by_set - by_graph).abs() / by_graph.abs());
            }
            Ok(upper(
                suite,
                "graph-set-agreement",
                worst,
                1e-5,
                "set-based vs graph-kernel NMC on a wavy band, 5 points",
            ))
        }));

        out.push(guarded(suite, "dilation-covariance", || {
            let ctx = KernelContext::new(alpha, 1.0)?;
            let mut worst = 0.0f64;
            for (base, t) in [(PlanarSet::disc(1.0)?, 0.4), (PlanarSet::ellipse(2.0, 1.0)?, 0.7)]
            {
                let (x, _) = base.boundary_point(t);
                let h = setgeom::nmc_of_set(&ctx, &base, x, &cfg)?;
                for &s in &[0.5, 2.0] {
                    let scaled = match &base {
                        PlanarSet::Disc { radius } => PlanarSet::disc(s * radius)?,
                        PlanarSet::Ellipse { a_axis, b_axis } => {
                            PlanarSet::ellipse(s * a_axis, s * b_axis)?
                        }
                        _ => unreachable!(),
                    };
                    let hs = setgeom::nmc_of_set(&ctx, &scaled, [s * x[0], s * x[1]], &cfg)?;
                    worst = worst.max((hs - s.powf(-alpha) * h).abs() / h.abs());
                }
            }
            Ok(upper(
                suite,
                "dilation-covariance",
                worst,
                1e-4,
                "H_{sE}(sx) = s^{-alpha} H_E(x) for s in {1/2, 2}",
            ))
        }));

        out
    }
}

/// Name-keyed registry of the verification suites.
pub struct SuiteRegistry {
    entries: Vec<Box<dyn CheckSuite>>,
}

impl SuiteRegistry {
    /// Registry with one suite per core module.
    pub fn builtin() -> Self {
        SuiteRegistry {
            entries: vec![
                Box::new(KernelsSuite),
                Box::new(QuadSuite),
                Box::new(GraphSuite),
                Box::new(SpectrumSuite),
                Box::new(BranchSuite),
                Box::new(SetgeomSuite),
            ],
        }
    }

    /// Registered suite names, in run order; `"all"` is accepted by
    /// [`SuiteRegistry::run`] on top of these.
    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|s| s.name()).collect()
    }

    /// Runs one suite by name, or every suite for `"all"`.
    pub fn run(&self, suite: &str, vc: &VerifyConfig) -> Result<Vec<CheckResult>> {
        vc.validate()?;
        if suite == "all" {
            let mut out = Vec::new();
            for entry in &self.entries {
                out.extend(entry.run(vc));
            }
            return Ok(out);
        }
        match self.entries.iter().find(|s| s.name() == suite) {
            Some(entry) => Ok(entry.run(vc)),
            None => Err(NmcError::InvalidParameter(format!(
                "unknown suite {suite:?}; valid suites: {}, all",
                self.names().join(", ")
            ))),
        }
    }
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        SuiteRegistry::builtin()
    }
}
