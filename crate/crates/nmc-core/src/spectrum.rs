//! Spectrum of the linearized band operator at the straight band.
//!
//! At the straight band the linearization of the curvature operator acts
//! diagonally on the cosine basis e_k(s) = cos(ks):
//!
//! ```text
//!     L e_k = lambda_k e_k,
//!     lambda_k = INT (1 - cos kt) |t|^{-2-a} dt - INT (1 + cos kt) P_R(t) dt,
//! ```
//!
//! with P_R(t) = {(2R)^2 + t^2}^{-(2+a)/2}. The first integral equals
//! k^{1+a} mu_inf where mu_inf = INT (1 - cos t)|t|^{-2-a} dt, and the
//! substitution tb = kt in the second turns the whole eigenvalue into
//! k^{1+a} mu_k with mu_k built from the kernel at half-width kR. The mu_k
//! form is what we evaluate at large k: it trades the oscillatory factor
//! cos(kt) for a wide, smooth kernel.
//!
//! lambda_1(R) is strictly increasing in R with a unique zero R*, the
//! critical half-width. Its derivative is gamma(R)/R where
//!
//! ```text
//!     gamma = (2+a) 4R^2 INT (1 + cos t) {t^2 + 4R^2}^{-(4+a)/2} dt > 0,
//! ```
//!
//! which also equals the cos-projection of the lambda-derivative of the band
//! operator at the bifurcation point.

use rayon::prelude::*;

use crate::error::{NmcError, Result};
use crate::kernels::KernelContext;
use crate::quad::{cos_power_tail, oscillatory_cos_integral, pv_head, QuadratureConfig};
use crate::series::CosineSeries;

/// Largest mode index the eigenvalue routines accept.
pub const MAX_MODE: u32 = 4096;

/// Eigenvalues of the linearized operator at one (alpha, R), together with
/// the asymptotic constant mu_inf and the bifurcation constant gamma.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub alpha: f64,
    pub r: f64,
    /// lambda_0 .. lambda_K
    pub lambdas: Vec<f64>,
    pub mu_inf: f64,
    pub gamma: f64,
}

/// `mu_inf = INT_R (1 - cos t) |t|^{-2-alpha} dt`.
pub fn mu_inf(ctx: &KernelContext, cfg: &QuadratureConfig) -> Result<f64> {
    mu_inf_alpha(ctx.alpha(), cfg)
}

fn mu_inf_alpha(alpha: f64, cfg: &QuadratureConfig) -> Result<f64> {
    // 1 - cos t written as 2 sin^2(t/2): keeps full relative accuracy near
    // the origin where the weight is largest
    let g = |t: f64| {
        let h = (0.5 * t).sin();
        4.0 * h * h * t.powf(-2.0 - alpha)
    };
    let t_end = cfg.trunc_t.max(128.0);
    let head = pv_head(&g, -alpha, t_end, cfg)?;
    // beyond t_end: 2 INT (1 - cos t) t^{-2-a} = 2 t_end^{-1-a}/(1+a) minus
    // the integration-by-parts series for the oscillatory part
    let tail = 2.0 * (t_end.powf(-1.0 - alpha) / (1.0 + alpha)
        - cos_power_tail(t_end, 2.0 + alpha)?);
    Ok(head + tail)
}

/// `INT_R cos(kt) (t^2 + m^2)^{-beta} dt`. The k = 0 mass is reduced to the
/// unit-width kernel by t = m u, which keeps the far tail model exact for
/// every m; oscillatory k go through the alternating half-period route.
fn kernel_mass(beta: f64, m: f64, k: u32, cfg: &QuadratureConfig) -> Result<f64> {
    if k == 0 {
        let unit = oscillatory_cos_integral(move |u: f64| (u * u + 1.0).powf(-beta), 0, cfg)?;
        return Ok(m.powf(1.0 - 2.0 * beta) * unit);
    }
    oscillatory_cos_integral(move |t: f64| (t * t + m * m).powf(-beta), k, cfg)
}

/// Fourier mass of the band kernel at half-width m/2.
fn band_kernel_i(alpha: f64, m: f64, k: u32, cfg: &QuadratureConfig) -> Result<f64> {
    kernel_mass(0.5 * (2.0 + alpha), m, k, cfg)
}

/// Same with the steeper exponent (4+alpha)/2, as appears in R-derivatives.
fn curvature_kernel_j(alpha: f64, m: f64, k: u32, cfg: &QuadratureConfig) -> Result<f64> {
    kernel_mass(0.5 * (4.0 + alpha), m, k, cfg)
}

// The oscillatory Fourier mass decays like e^{-m}; beyond this it is below
// every tolerance in use and the alternating-panel sum is pure noise.
const OSC_NEGLIGIBLE_M: f64 = 40.0;

fn lambda_k_with_mu(
    alpha: f64,
    r: f64,
    mu: f64,
    k: u32,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if k > MAX_MODE {
        return Err(NmcError::InvalidParameter(format!(
            "mode index {k} above the supported {MAX_MODE}"
        )));
    }
    let m = 2.0 * r;
    if k == 0 {
        return Ok(-2.0 * band_kernel_i(alpha, m, 0, cfg)?);
    }
    // mu_k form: lambda_k = k^{1+a} (mu - I_0(km) - I_1(km)). Substituting
    // tb = kt trades cos(kt) against the kernel for a wide smooth kernel, so
    // no high-frequency integral is ever evaluated.
    let kf = k as f64;
    let mk = kf * m;
    let i0 = band_kernel_i(alpha, mk, 0, cfg)?;
    let i1 = if mk > OSC_NEGLIGIBLE_M {
        0.0
    } else {
        band_kernel_i(alpha, mk, 1, cfg)?
    };
    Ok(kf.powf(1.0 + alpha) * (mu - i0 - i1))
}

/// k-th eigenvalue of the linearized operator at the context's (alpha, R).
pub fn lambda_k(ctx: &KernelContext, k: u32, cfg: &QuadratureConfig) -> Result<f64> {
    let mu = mu_inf_alpha(ctx.alpha(), cfg)?;
    lambda_k_with_mu(ctx.alpha(), ctx.r(), mu, k, cfg)
}

fn lambda_1(alpha: f64, r: f64, mu: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let m = 2.0 * r;
    let i0 = band_kernel_i(alpha, m, 0, cfg)?;
    let i1 = band_kernel_i(alpha, m, 1, cfg)?;
    Ok(mu - i0 - i1)
}

/// dlambda_1/dR = 4R (2+alpha) (J_0 + J_1), strictly positive.
fn lambda_1_slope(alpha: f64, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let m = 2.0 * r;
    let j0 = curvature_kernel_j(alpha, m, 0, cfg)?;
    let j1 = curvature_kernel_j(alpha, m, 1, cfg)?;
    Ok(2.0 * m * (2.0 + alpha) * (j0 + j1))
}

/// `dlambda_1/dR` at the context's width, in closed form; strictly
/// positive, which is what makes the critical width unique.
pub fn lambda_1_prime(ctx: &KernelContext, cfg: &QuadratureConfig) -> Result<f64> {
    lambda_1_slope(ctx.alpha(), ctx.r(), cfg)
}

/// Critical half-width: the unique R with lambda_1(R) = 0, to |lambda_1| <=
/// 1e-10. Geometric bracketing from R = 1 followed by bracket-guarded Newton
/// on the analytic slope.
pub fn solve_r(alpha: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(solve_r_traced(alpha, cfg)?.0)
}

/// Same as [`solve_r`], also reporting every `(R, lambda_1(R))` evaluation
/// the bracketing and Newton phases made, in order.
pub fn solve_r_traced(alpha: f64, cfg: &QuadratureConfig) -> Result<(f64, Vec<(f64, f64)>)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(NmcError::InvalidParameter(format!(
            "alpha = {alpha} outside (0,1)"
        )));
    }
    let mut tight = cfg.clone();
    tight.abs_tol = cfg.abs_tol.min(1e-12);
    let mu = mu_inf_alpha(alpha, &tight)?;
    let mut trace = Vec::new();

    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    let mut flo = lambda_1(alpha, lo, mu, &tight)?;
    trace.push((lo, flo));
    let mut fhi = flo;
    let mut guard = 0usize;
    while flo > 0.0 {
        hi = lo;
        lo *= 0.5;
        flo = lambda_1(alpha, lo, mu, &tight)?;
        trace.push((lo, flo));
        guard += 1;
        if guard > 60 {
            return Err(NmcError::Bracketing(format!(
                "lambda_1 stayed positive down to R = {lo:.3e}"
            )));
        }
    }
    guard = 0;
    while fhi < 0.0 {
        lo = hi;
        hi *= 2.0;
        fhi = lambda_1(alpha, hi, mu, &tight)?;
        trace.push((hi, fhi));
        guard += 1;
        if guard > 60 {
            return Err(NmcError::Bracketing(format!(
                "lambda_1 stayed negative up to R = {hi:.3e}"
            )));
        }
    }

    let mut r = 0.5 * (lo + hi);
    for _ in 0..60 {
        let fr = lambda_1(alpha, r, mu, &tight)?;
        trace.push((r, fr));
        if fr.abs() <= 5e-11 {
            return Ok((r, trace));
        }
        if fr < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let slope = lambda_1_slope(alpha, r, &tight)?;
        let mut next = r - fr / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        r = next;
    }
    Err(NmcError::NonConvergence(format!(
        "critical width iteration stalled near R = {r}"
    )))
}

/// The positive constant gamma = (2+alpha) 4R^2 (J_0 + J_1) multiplying cos
/// in the lambda-derivative of the band operator at the bifurcation point.
pub fn gamma_const(ctx: &KernelContext, cfg: &QuadratureConfig) -> Result<f64> {
    let m = 2.0 * ctx.r();
    let j0 = curvature_kernel_j(ctx.alpha(), m, 0, cfg)?;
    let j1 = curvature_kernel_j(ctx.alpha(), m, 1, cfg)?;
    Ok((2.0 + ctx.alpha()) * m * m * (j0 + j1))
}

/// Eigenvalues lambda_0..lambda_kmax plus mu_inf and gamma, computed in
/// parallel over the modes.
pub fn compute_spectrum(
    ctx: &KernelContext,
    kmax: u32,
    cfg: &QuadratureConfig,
) -> Result<Spectrum> {
    if kmax > MAX_MODE {
        return Err(NmcError::InvalidParameter(format!(
            "kmax = {kmax} above the supported {MAX_MODE}"
        )));
    }
    let alpha = ctx.alpha();
    let r = ctx.r();
    let mu = mu_inf_alpha(alpha, cfg)?;
    let lambdas = (0..=kmax)
        .into_par_iter()
        .map(|k| lambda_k_with_mu(alpha, r, mu, k, cfg))
        .collect::<Result<Vec<f64>>>()?;
    let gamma = gamma_const(ctx, cfg)?;
    Ok(Spectrum {
        alpha,
        r,
        lambdas,
        mu_inf: mu,
        gamma,
    })
}

/// Diagonal action of the linearized operator: coefficient k is scaled by
/// lambda_k. The basis is the 2pi-periodic cosine family.
pub fn apply_l(
    ctx: &KernelContext,
    w: &CosineSeries,
    cfg: &QuadratureConfig,
) -> Result<CosineSeries> {
    let alpha = ctx.alpha();
    let r = ctx.r();
    let mu = mu_inf_alpha(alpha, cfg)?;
    let coeffs = w
        .coeffs()
        .par_iter()
        .enumerate()
        .map(|(k, &c)| {
            if c == 0.0 {
                Ok(0.0)
            } else {
                Ok(c * lambda_k_with_mu(alpha, r, mu, k as u32, cfg)?)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CosineSeries::new(coeffs))
}

/// Inverse of the linearized operator on the complement of the cos mode:
/// coefficient k != 1 is divided by lambda_k, the cos slot stays zero. The
/// right-hand side must carry no cos component.
pub fn solve_l_on_v2(
    ctx: &KernelContext,
    f: &CosineSeries,
    cfg: &QuadratureConfig,
) -> Result<CosineSeries> {
    let c = f.coeffs();
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if c.len() > 1 && c[1].abs() > 1e-10 * (1.0 + scale) {
        return Err(NmcError::InvalidParameter(
            "right-hand side has a cos component; the operator is inverted on its complement"
                .into(),
        ));
    }
    let alpha = ctx.alpha();
    let r = ctx.r();
    let mu = mu_inf_alpha(alpha, cfg)?;
    let coeffs = c
        .par_iter()
        .enumerate()
        .map(|(k, &ck)| {
            if k == 1 || ck == 0.0 {
                return Ok(0.0);
            }
            let lk = lambda_k_with_mu(alpha, r, mu, k as u32, cfg)?;
            if lk.abs() < 1e-12 {
                return Err(NmcError::DegenerateEigenvalue(format!(
                    "lambda_{k} = {lk:.3e} is numerically zero"
                )));
            }
            Ok(ck / lk)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CosineSeries::new(coeffs))
}
