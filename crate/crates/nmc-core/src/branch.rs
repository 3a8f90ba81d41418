//! Newton continuation of the band family bifurcating at the critical width.
//!
//! The unknowns are the period parameter λ and an even correction `v` with
//! no cos component; the profile fed to the band operator is `cos + v`.
//! Splitting along `span{cos}` and its complement, the cos mode of the
//! residual determines λ and the remaining modes `{0, 2, …, K}` determine
//! `v`. Both projections are computed by discrete cosine transform of the
//! residual at the `K+1` collocation nodes, so the solved system is
//!
//! ```text
//!     r̂_k(λ, v) = 0 ,   k = 0, …, K ,    r̂ = DCT of  Φ(a, λ, cos + v)(s_j) ,
//! ```
//!
//! a square `(K+1)`-dimensional problem handled by damped Newton with an
//! LU solve. At `a = 0` the Jacobian is the diagonal `(γ, λ_k)` of the
//! spectrum module, so the reduction is nondegenerate and the branch is
//! entered by linear-extrapolation prediction plus Newton correction,
//! halving the amplitude step on failure. The practical amplitude radius
//! is whatever the continuation reaches before steps collapse; it is
//! reported, never asserted.

use crate::error::{NmcError, Result};
use crate::graph::{self, BandOperator};
use crate::kernels::KernelContext;
use crate::quad::QuadratureConfig;
use crate::series::{collocation_nodes, nodes_to_coeffs, CosineSeries};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Solver and continuation knobs. `amplitude_guard` is the runtime radius
/// ν within which the operator is trusted; the hard cap of the graph
/// module still applies on top of it.
#[derive(Debug, Clone)]
pub struct ContinuationConfig {
    /// Highest cosine mode solved for (the correction lives on modes
    /// `{0, 2, …, modes}`).
    pub modes: usize,
    /// Convergence target for the sup norm of the collocation residual.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Runtime amplitude radius ν.
    pub amplitude_guard: f64,
    /// Continuation aborts once step halving pushes |Δa| below this.
    pub min_step: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            modes: 32,
            newton_tol: 1e-11,
            max_newton_iters: 25,
            amplitude_guard: graph::AMP_GUARD,
            min_step: 1e-4,
        }
    }
}

/// One converged point of the branch.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub a: f64,
    pub lambda: f64,
    /// Correction profile; its cos coefficient is zero by construction.
    pub v: CosineSeries,
    /// Sup norm of `Φ(a, λ, cos+v)` over the collocation nodes.
    pub residual_norm: f64,
    pub r: f64,
    pub alpha: f64,
}

/// The unrescaled band a branch point describes.
#[derive(Debug, Clone)]
pub struct Band {
    pub a: f64,
    /// `2π / λ(a)`; for `a = 0` the profile is constant and the value is
    /// only nominal.
    pub period: f64,
    /// `u_a(s) = R + (a/λ) { cos(λ s) + v(λ s) }` as a cosine series of
    /// frequency λ.
    pub profile: CosineSeries,
    /// The NMC all bands of the family share: `h_R` of the straight band.
    pub h: f64,
}

fn compose_profile(coeffs: &[f64]) -> CosineSeries {
    let mut c = vec![0.0; coeffs.len().max(2)];
    c[..coeffs.len()].copy_from_slice(coeffs);
    c[1] += 1.0;
    CosineSeries::new(c)
}

fn check_v2(v: &CosineSeries) -> Result<()> {
    if v.coeff(1) != 0.0 {
        return Err(NmcError::InvalidParameter(
            "the correction v must carry no cos component (coefficient c_1 = 0)".into(),
        ));
    }
    if (v.omega() - 1.0).abs() > 1e-12 {
        return Err(NmcError::InvalidParameter(
            "the correction v must be 2π-periodic (omega = 1)".into(),
        ));
    }
    Ok(())
}

/// Collocation residual `Φ(a, λ, cos + v)(s_j)` at the given nodes.
pub fn residual(
    ctx: &KernelContext,
    a: f64,
    lambda: f64,
    v: &CosineSeries,
    collocation_pts: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    check_v2(v)?;
    let varphi = compose_profile(v.coeffs());
    let op = BandOperator::new(ctx, a, lambda, &varphi, varphi.degree(), cfg)?;
    collocation_pts
        .par_iter()
        .map(|&s| op.phi_at(s))
        .collect()
}

fn sup_norm(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton on the DCT'd collocation system; returns the converged
/// point together with the residual-norm history (one entry per accepted
/// iterate, starting with the initial guess).
pub(crate) fn newton_solve_traced(
    ctx: &KernelContext,
    a: f64,
    init: (f64, &CosineSeries),
    cc: &ContinuationConfig,
    cfg: &QuadratureConfig,
) -> Result<(BranchPoint, Vec<f64>)> {
    if cc.modes < 2 {
        return Err(NmcError::InvalidParameter(
            "the reduction needs modes >= 2 (the correction starts at mode 2)".into(),
        ));
    }
    if a.abs() > cc.amplitude_guard {
        return Err(NmcError::InvalidParameter(format!(
            "amplitude {a} outside the continuation guard ν = {}",
            cc.amplitude_guard
        )));
    }
    check_v2(init.1)?;
    if init.1.degree() > cc.modes {
        return Err(NmcError::InvalidParameter(format!(
            "initial correction has degree {} above the mode cutoff {}",
            init.1.degree(),
            cc.modes
        )));
    }

    let kk = cc.modes;
    let nodes = collocation_nodes(kk);
    let mode_list: Vec<usize> = std::iter::once(0).chain(2..=kk).collect();

    let mut lambda = init.0;
    let mut coeffs = vec![0.0; kk + 1];
    for (k, &x) in init.1.coeffs().iter().enumerate() {
        coeffs[k] = x;
    }

    let eval_res = |lambda: f64, coeffs: &[f64]| -> Result<Vec<f64>> {
        let varphi = compose_profile(coeffs);
        let op = BandOperator::new(ctx, a, lambda, &varphi, kk, cfg)?;
        nodes.par_iter().map(|&s| op.phi_at(s)).collect()
    };

    let mut res = eval_res(lambda, &coeffs)?;
    let mut norm = sup_norm(&res);
    let mut history = vec![norm];

    for _ in 0..cc.max_newton_iters {
        if norm <= cc.newton_tol {
            break;
        }
        let varphi = compose_profile(&coeffs);
        let op = BandOperator::new(ctx, a, lambda, &varphi, kk, cfg)?;
        let rows: Vec<(Vec<f64>, f64)> = nodes
            .par_iter()
            .map(|&s| op.derivative_row(s, &mode_list))
            .collect::<Result<_>>()?;

        // move residual and Jacobian columns to cosine-coefficient space
        let n = kk + 1;
        let rhat = nodes_to_coeffs(&res);
        let mut jhat = DMatrix::zeros(n, n);
        let dlam_col: Vec<f64> = rows.iter().map(|r| r.1).collect();
        for (row, &x) in nodes_to_coeffs(&dlam_col).iter().enumerate() {
            jhat[(row, 0)] = x;
        }
        for (i, _) in mode_list.iter().enumerate() {
            let col: Vec<f64> = rows.iter().map(|r| r.0[i]).collect();
            for (row, &x) in nodes_to_coeffs(&col).iter().enumerate() {
                jhat[(row, i + 1)] = x;
            }
        }
        let rhs = -DVector::from_column_slice(&rhat);
        let delta = jhat
            .lu()
            .solve(&rhs)
            .ok_or_else(|| NmcError::NonConvergence("singular collocation Jacobian".into()))?;

        // Armijo backtracking on the nodal sup norm
        let mut step = 1.0;
        loop {
            let lam_t = lambda + step * delta[0];
            let mut c_t = coeffs.clone();
            for (i, &k) in mode_list.iter().enumerate() {
                c_t[k] += step * delta[i + 1];
            }
            if let Ok(rt) = eval_res(lam_t, &c_t) {
                let nt = sup_norm(&rt);
                if nt <= (1.0 - 1e-4 * step) * norm {
                    lambda = lam_t;
                    coeffs = c_t;
                    res = rt;
                    norm = nt;
                    history.push(norm);
                    break;
                }
            }
            step *= 0.5;
            if step < 1.0 / 256.0 {
                return Err(NmcError::NonConvergence(format!(
                    "line search stalled at a = {a}, residual {norm:.3e}"
                )));
            }
        }
    }

    if norm > cc.newton_tol {
        return Err(NmcError::NonConvergence(format!(
            "newton stopped at residual {norm:.3e} after {} iterations (a = {a})",
            cc.max_newton_iters
        )));
    }
    let band_profile = {
        let varphi = compose_profile(&coeffs);
        let mut w = vec![0.0; varphi.coeffs().len()];
        for (k, &c) in varphi.coeffs().iter().enumerate() {
            w[k] = a * c;
        }
        w[0] += lambda * ctx.r();
        CosineSeries::new(w)
    };
    if band_profile.min_lower_bound() <= 0.0 {
        return Err(NmcError::PositivityViolation(format!(
            "converged band touches zero width at a = {a}"
        )));
    }
    let pt = BranchPoint {
        a,
        lambda,
        v: CosineSeries::new(coeffs),
        residual_norm: norm,
        r: ctx.r(),
        alpha: ctx.alpha(),
    };
    Ok((pt, history))
}

/// Solves the reduced system at fixed amplitude from the supplied initial
/// guess `(λ, v)`.
pub fn newton_solve(
    ctx: &KernelContext,
    a: f64,
    init: (f64, &CosineSeries),
    cc: &ContinuationConfig,
    cfg: &QuadratureConfig,
) -> Result<BranchPoint> {
    newton_solve_traced(ctx, a, init, cc, cfg).map(|(pt, _)| pt)
}

fn predict(cur: &BranchPoint, prev: Option<&BranchPoint>, next_a: f64) -> (f64, CosineSeries) {
    match prev {
        Some(p) if cur.a != p.a => {
            let t = (next_a - cur.a) / (cur.a - p.a);
            let n = cur.v.coeffs().len().max(p.v.coeffs().len());
            let mut c = vec![0.0; n];
            for (k, slot) in c.iter_mut().enumerate() {
                *slot = cur.v.coeff(k) + t * (cur.v.coeff(k) - p.v.coeff(k));
            }
            (
                cur.lambda + t * (cur.lambda - p.lambda),
                CosineSeries::new(c),
            )
        }
        _ => (cur.lambda, cur.v.clone()),
    }
}

fn advance_to(
    ctx: &KernelContext,
    start: &BranchPoint,
    start_prev: Option<&BranchPoint>,
    target: f64,
    cc: &ContinuationConfig,
    cfg: &QuadratureConfig,
) -> Result<BranchPoint> {
    let mut cur = start.clone();
    let mut prev = start_prev.cloned();
    let mut da = target - cur.a;
    while cur.a != target {
        let next = if da.abs() >= (target - cur.a).abs() {
            target
        } else {
            cur.a + da
        };
        let (lam0, v0) = predict(&cur, prev.as_ref(), next);
        match newton_solve(ctx, next, (lam0, &v0), cc, cfg) {
            Ok(pt) => {
                prev = Some(std::mem::replace(&mut cur, pt));
            }
            Err(err) => {
                da *= 0.5;
                if da.abs() < cc.min_step {
                    return Err(NmcError::NonConvergence(format!(
                        "continuation step collapsed below {} near a = {}: {err}",
                        cc.min_step, cur.a
                    )));
                }
            }
        }
    }
    Ok(cur)
}

/// Marches the branch from `a = 0` to `±a_max` in `steps` grid steps per
/// sign (intermediate solves from step halving are not reported). The
/// returned points are sorted by amplitude and include the trivial point.
pub fn continue_branch(
    ctx: &KernelContext,
    a_max: f64,
    steps: usize,
    cc: &ContinuationConfig,
    cfg: &QuadratureConfig,
) -> Result<Vec<BranchPoint>> {
    if steps < 1 {
        return Err(NmcError::InvalidParameter("steps must be >= 1".into()));
    }
    if !(a_max > 0.0) {
        return Err(NmcError::InvalidParameter(format!(
            "a_max = {a_max} must be positive"
        )));
    }
    if a_max > cc.amplitude_guard {
        return Err(NmcError::InvalidParameter(format!(
            "a_max = {a_max} outside the continuation guard ν = {}",
            cc.amplitude_guard
        )));
    }
    let trivial_v = CosineSeries::constant(0.0);
    let p0 = newton_solve(ctx, 0.0, (1.0, &trivial_v), cc, cfg)?;
    let mut out = vec![p0.clone()];
    for dir in [1.0, -1.0] {
        let mut prev: Option<BranchPoint> = None;
        let mut cur = p0.clone();
        for i in 1..=steps {
            let target = dir * a_max * i as f64 / steps as f64;
            let pt = advance_to(ctx, &cur, prev.as_ref(), target, cc, cfg)?;
            prev = Some(std::mem::replace(&mut cur, pt));
            out.push(cur.clone());
        }
    }
    out.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(out)
}

/// Undoes the rescaling: the band of half width profile
/// `u_a(s) = R + (a/λ) { cos(λs) + v(λs) }`, whose NMC is the straight
/// band's `h_R` by the scaling law.
pub fn reconstruct_band(
    ctx: &KernelContext,
    pt: &BranchPoint,
    cfg: &QuadratureConfig,
) -> Result<Band> {
    let scale = pt.a / pt.lambda;
    let n = pt.v.coeffs().len().max(2);
    let mut c = vec![0.0; n];
    c[0] = pt.r + scale * pt.v.coeff(0);
    c[1] = scale;
    for (k, slot) in c.iter_mut().enumerate().skip(2) {
        *slot = scale * pt.v.coeff(k);
    }
    Ok(Band {
        a: pt.a,
        period: std::f64::consts::TAU / pt.lambda,
        profile: CosineSeries::with_omega(pt.lambda, c)?,
        h: graph::straight_band_h(ctx, cfg)?,
    })
}
