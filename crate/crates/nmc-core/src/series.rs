//! Even cosine series, finite increments, and collocation transforms.
//!
//! Band profiles and perturbations are even trigonometric polynomials
//! `u(s) = Σ_k c_k cos(k ω s)`. The base frequency `ω` is 1 for the
//! normalized period 2π; reconstructed bands carry `ω = λ` so the same type
//! represents profiles of minimal period `2π/λ`.

use crate::error::{NmcError, Result};
use std::f64::consts::PI;

/// Even trigonometric polynomial `Σ_k c_k cos(k ω s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineSeries {
    omega: f64,
    coeffs: Vec<f64>,
}

impl CosineSeries {
    /// Series with base frequency 1 (period 2π).
    pub fn new(coeffs: Vec<f64>) -> Self {
        CosineSeries { omega: 1.0, coeffs }
    }

    /// Series with base frequency `omega` (period `2π/omega`).
    pub fn with_omega(omega: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(NmcError::InvalidParameter(format!(
                "base frequency must be positive and finite, got {omega}"
            )));
        }
        Ok(CosineSeries { omega, coeffs })
    }

    pub fn constant(c: f64) -> Self {
        CosineSeries { omega: 1.0, coeffs: vec![c] }
    }

    /// The pure mode `cos(k s)`.
    pub fn mode(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        CosineSeries { omega: 1.0, coeffs }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient `c_k`, zero beyond the stored range.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Index of the highest stored mode.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let ws = self.omega * s;
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            acc += c * (k as f64 * ws).cos();
        }
        acc
    }

    pub fn eval_deriv(&self, s: f64) -> f64 {
        let ws = self.omega * s;
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            let kw = k as f64 * self.omega;
            acc -= c * kw * (k as f64 * ws).sin();
        }
        acc
    }

    /// Second derivative, for curvature of graph boundaries.
    pub fn eval_deriv2(&self, s: f64) -> f64 {
        let ws = self.omega * s;
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            let kw = k as f64 * self.omega;
            acc -= c * kw * kw * (k as f64 * ws).cos();
        }
        acc
    }

    /// `u(s) - u(s - t)`, evaluated through the product identity
    /// `cos A - cos B = -2 sin((A+B)/2) sin((A-B)/2)` so that tiny `t`
    /// (down to the chord scale of ray casting) loses no precision.
    pub fn increment(&self, s: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            let kw = k as f64 * self.omega;
            acc += c * -2.0 * (kw * (s - 0.5 * t)).sin() * (0.5 * kw * t).sin();
        }
        acc
    }

    /// `2u(s) - u(s-t) - u(s+t)`, written as `Σ_k 4 c_k cos(kωs) sin²(kωt/2)`.
    ///
    /// The two one-sided increments cancel to `O(t²)` as `t -> 0`; forming
    /// their sum from `increment` loses all of that scale, this form loses
    /// none.
    pub fn second_increment(&self, s: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            let kw = k as f64 * self.omega;
            let h = (0.5 * kw * t).sin();
            acc += c * 4.0 * (kw * s).cos() * h * h;
        }
        acc
    }

    /// Lower bound `c_0 - Σ_{k>=1} |c_k|` for the minimum of the series.
    pub fn min_lower_bound(&self) -> f64 {
        let mut acc = self.coeff(0);
        for &c in self.coeffs.iter().skip(1) {
            acc -= c.abs();
        }
        acc
    }

    /// Upper bound `Σ_k |c_k|` for the sup norm.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Upper bound `Σ_k k ω |c_k|` for the slope.
    pub fn slope_bound(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| k as f64 * self.omega * c.abs())
            .sum()
    }

    /// Bound for the profile norm `‖u‖_∞ + ‖u'‖_∞` used by validity guards.
    pub fn profile_norm_bound(&self) -> f64 {
        self.sup_bound() + self.slope_bound()
    }
}

/// Finite increment values of a profile at one `(s, t)` pair:
///
/// ```text
///     δ₋φ = (φ(s) - φ(s-t)) / |t| ,
///     δ₊φ = (φ(s) - φ(s+t)) / |t| ,
///     δ₀φ = φ(s) + φ(s-t) .
/// ```
#[derive(Debug, Clone, Copy)]
pub struct Increments {
    pub delta_minus: f64,
    pub delta_plus: f64,
    pub delta_zero: f64,
}

impl Increments {
    /// Increments of `phi` at `(s, t)`; `t` must be nonzero.
    pub fn of(phi: &CosineSeries, s: f64, t: f64) -> Result<Increments> {
        if t == 0.0 {
            return Err(NmcError::InvalidParameter(
                "increments are undefined at t = 0".into(),
            ));
        }
        let ta = t.abs();
        let inc_m = phi.increment(s, t);
        let inc_p = phi.increment(s, -t);
        Ok(Increments {
            delta_minus: inc_m / ta,
            delta_plus: inc_p / ta,
            delta_zero: 2.0 * phi.eval(s) - inc_m,
        })
    }
}

/// Collocation nodes `s_j = π (2j+1) / (2(K+1))`, `j = 0..=K`: the zeros of
/// `cos((K+1)s)` in `(0, π)`, giving exact discrete orthogonality of the
/// modes `cos(k s)`, `k <= K`.
pub fn collocation_nodes(kmax: usize) -> Vec<f64> {
    let n = kmax + 1;
    (0..n)
        .map(|j| PI * (2.0 * j as f64 + 1.0) / (2.0 * n as f64))
        .collect()
}

/// Discrete cosine coefficients from values at [`collocation_nodes`]:
/// exact for trigonometric polynomials of degree `<= K`.
pub fn nodes_to_coeffs(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut coeffs = vec![0.0; n];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, &v) in values.iter().enumerate() {
            let s = PI * (2.0 * j as f64 + 1.0) / (2.0 * n as f64);
            acc += v * (k as f64 * s).cos();
        }
        let norm = if k == 0 { 1.0 } else { 2.0 };
        *c = norm * acc / n as f64;
    }
    coeffs
}

/// Values of a coefficient vector at [`collocation_nodes`] (base frequency 1).
pub fn coeffs_to_nodes(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    collocation_nodes(n - 1)
        .iter()
        .map(|&s| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c * (k as f64 * s).cos())
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_stream(seed: u64, n: usize) -> Vec<f64> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn eval_matches_naive_sum() {
        let u = CosineSeries::new(vec![1.0, 0.3, -0.2, 0.05]);
        let s = 0.77f64;
        let naive = 1.0 + 0.3 * s.cos() - 0.2 * (2.0 * s).cos() + 0.05 * (3.0 * s).cos();
        assert!((u.eval(s) - naive).abs() < 1e-15);
    }

    #[test]
    fn omega_rescales_the_argument() {
        let u = CosineSeries::with_omega(2.0, vec![0.0, 1.0]).unwrap();
        assert!((u.eval(0.25 * PI)).abs() < 1e-15); // cos(π/2)
        assert!(CosineSeries::with_omega(0.0, vec![1.0]).is_err());
        assert!(CosineSeries::with_omega(-1.0, vec![1.0]).is_err());
    }

    #[test]
    fn stable_increment_agrees_with_direct_difference() {
        let u = CosineSeries::new(vec![0.5, 0.3, 0.0, 0.1, 0.0, 0.02]);
        for &t in &[1.5, 1e-3, 1e-7] {
            let direct = u.eval(0.9) - u.eval(0.9 - t);
            let stable = u.increment(0.9, t);
            assert!(
                (direct - stable).abs() < 1e-12,
                "t={t}: {direct} vs {stable}"
            );
        }
        // at chord scale the stable form keeps full relative precision
        let t = 1e-12;
        let stable = u.increment(0.9, t);
        let deriv = u.eval_deriv(0.9);
        assert!((stable / t - deriv).abs() < 1e-9 * (1.0 + deriv.abs()));
    }

    #[test]
    fn second_increment_keeps_the_quadratic_scale() {
        let u = CosineSeries::new(vec![0.5, 0.3, 0.0, 0.1, 0.0, 0.02]);
        let s = 0.9;
        let direct = 2.0 * u.eval(s) - u.eval(s - 0.7) - u.eval(s + 0.7);
        assert!((u.second_increment(s, 0.7) - direct).abs() < 1e-13);
        // at t = 1e-8 the true value is ~1e-16; the stable form still has it
        let t = 1e-8;
        let d2 = -u.eval_deriv2(s);
        let stable = u.second_increment(s, t);
        assert!((stable / (t * t) - d2).abs() < 1e-6 * (1.0 + d2.abs()));
    }

    #[test]
    fn increments_follow_their_definitions() {
        let u = CosineSeries::new(vec![1.0, 0.4, 0.1]);
        let (s, t) = (0.3, 0.8);
        let inc = Increments::of(&u, s, t).unwrap();
        assert!((inc.delta_minus - (u.eval(s) - u.eval(s - t)) / t).abs() < 1e-14);
        assert!((inc.delta_plus - (u.eval(s) - u.eval(s + t)) / t).abs() < 1e-14);
        assert!((inc.delta_zero - (u.eval(s) + u.eval(s - t))).abs() < 1e-13);
        assert!(Increments::of(&u, s, 0.0).is_err());
    }

    #[test]
    fn derivative_bounds_hold_on_a_sample_sweep() {
        let u = CosineSeries::new(vec![0.8, -0.3, 0.2, -0.07]);
        let mut max_val = 0.0f64;
        let mut max_slope = 0.0f64;
        let mut min_val = f64::INFINITY;
        for i in 0..2000 {
            let s = 2.0 * PI * i as f64 / 2000.0;
            max_val = max_val.max(u.eval(s).abs());
            max_slope = max_slope.max(u.eval_deriv(s).abs());
            min_val = min_val.min(u.eval(s));
        }
        assert!(max_val <= u.sup_bound() + 1e-12);
        assert!(max_slope <= u.slope_bound() + 1e-12);
        assert!(min_val >= u.min_lower_bound() - 1e-12);
    }

    #[test]
    fn collocation_transform_roundtrips_exactly() {
        for kmax in [0usize, 1, 7, 32] {
            let coeffs = lcg_stream(kmax as u64 + 17, kmax + 1);
            let values = coeffs_to_nodes(&coeffs);
            let back = nodes_to_coeffs(&values);
            for k in 0..=kmax {
                assert!(
                    (coeffs[k] - back[k]).abs() < 1e-12,
                    "kmax={kmax}, mode {k}: {} vs {}",
                    coeffs[k],
                    back[k]
                );
            }
        }
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        let u = CosineSeries::new(vec![0.0, 1.0, 0.5]);
        let h = 1e-5;
        for &s in &[0.0, 0.4, 2.2] {
            let fd = (u.eval(s + h) - 2.0 * u.eval(s) + u.eval(s - h)) / (h * h);
            assert!((u.eval_deriv2(s) - fd).abs() < 1e-5);
        }
    }
}
