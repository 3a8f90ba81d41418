//! Acceptance gates for the crate, one test per criterion. Each test prints
//! a single machine-greppable verdict line `acceptance <n> <name>: PASS`
//! before returning; a failure panics with the measured quantity.
//!
//! The oracles here deliberately avoid the library's quadrature engines:
//! plain composite Simpson rules plus analytic tail expansions, written
//! against the defining integrals.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nmc_core::branch::{self, ContinuationConfig};
use nmc_core::graph;
use nmc_core::series;
use nmc_core::setgeom::{self, PlanarSet};
use nmc_core::spectrum;
use nmc_core::{CosineSeries, KernelContext, QuadratureConfig};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Composite Simpson rule with `2 n_half` intervals.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n_half: usize) -> f64 {
    let n = 2 * n_half;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// `∫_{t0}^∞ cos(kt) t^{-s} dt` by two rounds of integration by parts;
/// the dropped remainder is below `s(s+1)(s+2)(k t0)^{-s-3}`.
fn cos_integral_tail(k: f64, t0: f64, s: f64) -> f64 {
    let x0 = k * t0;
    let (sn, cs) = x0.sin_cos();
    let c2 = -sn * x0.powf(-s - 2.0) + (s + 2.0) * cs * x0.powf(-s - 3.0);
    let c0 = -sn * x0.powf(-s) + s * cs * x0.powf(-s - 1.0) - s * (s + 1.0) * c2;
    k.powf(s - 1.0) * c0
}

/// `∫_R (1 - cos t) |t|^{-2-alpha} dt`: alternating series on [0,1],
/// Simpson on [1, 1000], analytic algebraic-minus-oscillatory tail.
fn brute_mu_inf(alpha: f64) -> f64 {
    let s = 2.0 + alpha;
    let mut head = 0.0;
    let mut fac = 1.0f64;
    let mut sign = 1.0f64;
    for m in 1..=25u64 {
        fac *= ((2 * m - 1) * (2 * m)) as f64;
        head += sign / (fac * (2.0 * m as f64 - 1.0 - alpha));
        sign = -sign;
    }
    let g = |t: f64| (1.0 - t.cos()) * t.powf(-s);
    let t_end = 1000.0;
    let mid = simpson(&g, 1.0, t_end, 220_000);
    let tail = t_end.powf(1.0 - s) / (s - 1.0) - cos_integral_tail(1.0, t_end, s);
    2.0 * (head + mid + tail)
}

/// `∫_R cos(kt) ((2R)² + t²)^{-(2+alpha)/2} dt` by Simpson plus a tail that
/// treats the kernel as `t^{-s}(1 - (s/2)(2R)²/t² + …)` beyond the cutoff.
fn brute_kernel_mass(alpha: f64, r: f64, k: f64) -> f64 {
    let s = 2.0 + alpha;
    let m = 2.0 * r;
    let g = |t: f64| (k * t).cos() * (t * t + m * m).powf(-0.5 * s);
    let t_end = 1000.0;
    let head = simpson(&g, 0.0, t_end, 220_000);
    let tail = if k == 0.0 {
        t_end.powf(1.0 - s) / (s - 1.0) - 0.5 * s * m * m * t_end.powf(-1.0 - s) / (s + 1.0)
    } else {
        cos_integral_tail(k, t_end, s) - 0.5 * s * m * m * cos_integral_tail(k, t_end, s + 2.0)
    };
    2.0 * (head + tail)
}

/// Brute-force `lambda_1(R)`, a code path sharing nothing with the library.
fn brute_lambda_1(alpha: f64, r: f64) -> f64 {
    brute_mu_inf(alpha) - brute_kernel_mass(alpha, r, 0.0) - brute_kernel_mass(alpha, r, 1.0)
}

#[test]
fn acceptance_1_critical_width() {
    let cfg = cfg();
    for &alpha in &[0.25, 0.5, 0.75] {
        let r_star = spectrum::solve_r(alpha, &cfg).unwrap();
        let ctx = KernelContext::new(alpha, r_star).unwrap();
        let mut tight = cfg.clone();
        tight.abs_tol = 1e-12;
        let residual = spectrum::lambda_k(&ctx, 1, &tight).unwrap();
        assert!(
            residual.abs() <= 1e-10,
            "alpha={alpha}: |lambda_1(R*)| = {:e} above 1e-10",
            residual.abs()
        );

        let below = brute_lambda_1(alpha, r_star - 1e-6);
        let above = brute_lambda_1(alpha, r_star + 1e-6);
        assert!(
            below < 0.0 && above > 0.0,
            "alpha={alpha}: brute oracle does not bracket R*={r_star} within 1e-6 \
             (lambda_1 = {below:e} / {above:e})"
        );
    }
    println!("acceptance 1 critical-width: PASS (|lambda_1| <= 1e-10, oracle bracket 1e-6)");
}

#[test]
fn acceptance_2_spectrum_shape() {
    let cfg = cfg();
    let alpha = 0.5;
    let r_star = spectrum::solve_r(alpha, &cfg).unwrap();
    let ctx = KernelContext::new(alpha, r_star).unwrap();
    let sp = spectrum::compute_spectrum(&ctx, 64, &cfg).unwrap();

    assert!(sp.lambdas[0] < 0.0, "lambda_0 = {} not negative", sp.lambdas[0]);
    assert!(
        sp.lambdas[1].abs() <= 1e-8,
        "|lambda_1| = {:e} above 1e-8",
        sp.lambdas[1].abs()
    );
    for k in 1..=64usize {
        assert!(
            sp.lambdas[k] > sp.lambdas[k - 1],
            "ordering breach at k = {k}"
        );
    }
    let ratio = |k: usize| sp.lambdas[k] / ((k as f64).powf(1.0 + alpha) * sp.mu_inf);
    for k in 2..=64usize {
        assert!(
            ratio(k) >= ratio(k - 1) - 1e-12,
            "ratio not increasing at k = {k}: {} after {}",
            ratio(k),
            ratio(k - 1)
        );
    }
    let terminal = (ratio(64) - 1.0).abs();
    assert!(terminal < 0.01, "terminal ratio deviation {terminal:e}");
    println!(
        "acceptance 2 spectrum-shape: PASS (lambda_0 < 0, |lambda_1| <= 1e-8, \
         increasing, terminal deviation {terminal:.2e} < 0.01)"
    );
}

#[test]
fn acceptance_3_alexandrov_rigidity() {
    let cfg = cfg();
    let alpha = 0.5;
    let ctx = KernelContext::new(alpha, 1.0).unwrap();

    let variation = |set: &PlanarSet| -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..16 {
            let t = TAU * i as f64 / 16.0;
            let (x, _) = set.boundary_point(t);
            let h = setgeom::nmc_of_set(&ctx, set, x, &cfg).unwrap();
            lo = lo.min(h);
            hi = hi.max(h);
        }
        (hi - lo) / hi.abs()
    };

    let disc_var = variation(&PlanarSet::disc(1.0).unwrap());
    assert!(disc_var <= 1e-4, "disc variation {disc_var:e} above 1e-4");

    let ell_var = variation(&PlanarSet::ellipse(1.5, 1.0).unwrap());
    assert!(
        ell_var >= 100.0 * 1e-4,
        "ellipse variation {ell_var:e} below 1e-2"
    );
    println!(
        "acceptance 3 alexandrov-rigidity: PASS (disc {disc_var:.2e} <= 1e-4, \
         ellipse {ell_var:.2e} >= 1e-2)"
    );
}

#[test]
fn acceptance_4_formula_concordance() {
    let cfg = cfg();
    let alpha = 0.5;
    let ctx = KernelContext::new(alpha, 1.0).unwrap();

    let mut worst_closed = 0.0f64;
    for set in [
        PlanarSet::disc(1.0).unwrap(),
        PlanarSet::ellipse(2.0, 1.0).unwrap(),
    ] {
        for i in 0..8 {
            let t = TAU * i as f64 / 8.0;
            let (x, _) = set.boundary_point(t);
            let by_set = setgeom::nmc_of_set(&ctx, &set, x, &cfg).unwrap();
            let by_boundary = setgeom::nmc_boundary_form(&ctx, &set, x, &cfg).unwrap();
            worst_closed = worst_closed.max((by_set - by_boundary).abs() / by_set.abs());
        }
    }
    assert!(
        worst_closed <= 1e-4,
        "set vs boundary disagreement {worst_closed:e} above 1e-4"
    );

    let u = CosineSeries::new(vec![1.0, 0.05]);
    let band = PlanarSet::graph_band(u.clone()).unwrap();
    let mut worst_band = 0.0f64;
    for &s in &[0.0, PI / 4.0, PI / 2.0, 2.2, 3.0] {
        let by_graph = graph::nmc_of_graph(&ctx, &u, s, &cfg).unwrap();
        let (x, _) = band.boundary_point(s);
        let by_set = setgeom::nmc_of_set(&ctx, &band, x, &cfg).unwrap();
        worst_band = worst_band.max((by_graph - by_set).abs() / by_graph.abs());
    }
    assert!(
        worst_band <= 1e-5,
        "graph vs set disagreement {worst_band:e} above 1e-5"
    );
    println!(
        "acceptance 4 formula-concordance: PASS (closed shapes {worst_closed:.2e} <= 1e-4, \
         band {worst_band:.2e} <= 1e-5)"
    );
}

#[test]
fn acceptance_5_scaling_law() {
    let cfg = cfg();
    let alpha = 0.5;
    let ctx = KernelContext::new(alpha, 1.0).unwrap();
    let w = CosineSeries::new(vec![1.0, 0.1]);

    let mut worst = 0.0f64;
    for &lambda in &[0.5, 1.0, 2.0] {
        let wl = CosineSeries::with_omega(1.0 / lambda, vec![lambda, 0.1 * lambda]).unwrap();
        for i in 0..8 {
            let s0 = TAU * i as f64 / 8.0;
            let left = graph::nmc_of_graph(&ctx, &wl, lambda * s0, &cfg).unwrap();
            let right = lambda.powf(-alpha) * graph::nmc_of_graph(&ctx, &w, s0, &cfg).unwrap();
            worst = worst.max((left - right).abs());
        }
    }
    assert!(worst <= 1e-7, "scaling defect {worst:e} above 1e-7");
    println!("acceptance 5 scaling-law: PASS (defect {worst:.2e} <= 1e-7)");
}

#[test]
fn acceptance_6_derivative_correctness() {
    let cfg = cfg();
    let alpha = 0.5;
    let r_star = spectrum::solve_r(alpha, &cfg).unwrap();
    let ctx = KernelContext::new(alpha, r_star).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let h = 1e-5;
    let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1e-3);
    let mut worst = 0.0f64;
    let mut points = 0usize;

    let mut draw_a = {
        let mut signs = ChaCha8Rng::seed_from_u64(7);
        move |rng: &mut ChaCha8Rng| {
            let mag = rng.gen_range(0.005..0.02f64);
            if signs.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        }
    };

    // 8 direction derivatives in the profile, along random basis modes
    // (these are exactly the solver's Jacobian columns)
    for _ in 0..8 {
        let a = draw_a(&mut rng);
        let lambda = rng.gen_range(0.95..1.05f64);
        let s = rng.gen_range(0.0..PI);
        let c2 = rng.gen_range(-0.05..0.05f64);
        let varphi = CosineSeries::new(vec![0.0, 1.0, c2]);
        let k = rng.gen_range(0..4usize);
        let psi = CosineSeries::mode(k);

        let got = graph::dphi_dvarphi(&ctx, a, lambda, &varphi, &psi, s, &cfg).unwrap();
        let mut up = vec![0.0, 1.0, c2, 0.0];
        let mut dn = up.clone();
        up[k] += h;
        dn[k] -= h;
        let fp = graph::phi(&ctx, a, lambda, &CosineSeries::new(up), s, &cfg).unwrap();
        let fm = graph::phi(&ctx, a, lambda, &CosineSeries::new(dn), s, &cfg).unwrap();
        worst = worst.max(rel(got, (fp - fm) / (2.0 * h)));
        points += 1;
    }

    // 4 lambda partials
    for _ in 0..4 {
        let a = draw_a(&mut rng);
        let lambda = rng.gen_range(0.95..1.05f64);
        let s = rng.gen_range(0.0..PI);
        let varphi = CosineSeries::new(vec![0.0, 1.0, rng.gen_range(-0.05..0.05f64)]);
        let got = graph::dphi_dlambda(&ctx, a, lambda, &varphi, s, &cfg).unwrap();
        let fp = graph::phi(&ctx, a, lambda + h, &varphi, s, &cfg).unwrap();
        let fm = graph::phi(&ctx, a, lambda - h, &varphi, s, &cfg).unwrap();
        worst = worst.max(rel(got, (fp - fm) / (2.0 * h)));
        points += 1;
    }

    // 4 amplitude partials
    for _ in 0..4 {
        let a = draw_a(&mut rng);
        let lambda = rng.gen_range(0.95..1.05f64);
        let s = rng.gen_range(0.0..PI);
        let varphi = CosineSeries::new(vec![0.0, 1.0, rng.gen_range(-0.05..0.05f64)]);
        let got = graph::dphi_da(&ctx, a, lambda, &varphi, s, &cfg).unwrap();
        let fp = graph::phi(&ctx, a + h, lambda, &varphi, s, &cfg).unwrap();
        let fm = graph::phi(&ctx, a - h, lambda, &varphi, s, &cfg).unwrap();
        worst = worst.max(rel(got, (fp - fm) / (2.0 * h)));
        points += 1;
    }

    // 4 width derivatives of the first eigenvalue
    let mut tight = cfg.clone();
    tight.abs_tol = 1e-12;
    for _ in 0..4 {
        let r = rng.gen_range(0.4..0.7f64);
        let hr = 1e-4;
        let c = KernelContext::new(alpha, r).unwrap();
        let got = spectrum::lambda_1_prime(&c, &tight).unwrap();
        let cp = KernelContext::new(alpha, r + hr).unwrap();
        let cm = KernelContext::new(alpha, r - hr).unwrap();
        let fp = spectrum::lambda_k(&cp, 1, &tight).unwrap();
        let fm = spectrum::lambda_k(&cm, 1, &tight).unwrap();
        worst = worst.max(rel(got, (fp - fm) / (2.0 * hr)));
        points += 1;
    }

    assert_eq!(points, 20);
    assert!(
        worst <= 1e-5,
        "worst derivative-vs-FD relative error {worst:e} above 1e-5"
    );
    println!(
        "acceptance 6 derivative-correctness: PASS (20 randomized points, worst {worst:.2e} <= 1e-5)"
    );
}

#[test]
fn acceptance_7_delaunay_branch() {
    let cfg = cfg();
    let alpha = 0.5;
    let r_star = spectrum::solve_r(alpha, &cfg).unwrap();
    let ctx = KernelContext::new(alpha, r_star).unwrap();
    let h_r = graph::straight_band_h(&ctx, &cfg).unwrap();

    let cc = ContinuationConfig {
        modes: 32,
        ..ContinuationConfig::default()
    };
    let pts = branch::continue_branch(&ctx, 0.03, 3, &cc, &cfg).unwrap();
    assert_eq!(pts.len(), 7);

    let worst_residual = pts
        .iter()
        .map(|p| p.residual_norm)
        .fold(0.0f64, f64::max);
    assert!(
        worst_residual <= 1e-9,
        "worst Newton residual {worst_residual:e} above 1e-9"
    );

    // moving inward on either sign, lambda approaches 1 and the correction
    // shrinks
    for w in pts.windows(2) {
        let (outer, inner) = if w[0].a.abs() > w[1].a.abs() {
            (&w[0], &w[1])
        } else {
            (&w[1], &w[0])
        };
        if (outer.a.abs() - inner.a.abs()).abs() < 1e-15 {
            continue;
        }
        assert!(
            (inner.lambda - 1.0).abs() <= (outer.lambda - 1.0).abs() + 1e-12,
            "lambda not approaching 1: a={} vs a={}",
            inner.a,
            outer.a
        );
        assert!(
            inner.v.profile_norm_bound() <= outer.v.profile_norm_bound() + 1e-12,
            "correction norm not shrinking: a={} vs a={}",
            inner.a,
            outer.a
        );
    }

    // every reconstructed band has the straight-band curvature, measured at
    // off-collocation points
    let mut worst_band = 0.0f64;
    for pt in &pts {
        let band = branch::reconstruct_band(&ctx, pt, &cfg).unwrap();
        let period = TAU / pt.lambda;
        for j in 0..8 {
            let s = (j as f64 + 0.37) * period / 8.0;
            let h = graph::nmc_of_graph(&ctx, &band.profile, s, &cfg).unwrap();
            worst_band = worst_band.max((h - h_r).abs() / h_r);
        }
    }
    assert!(
        worst_band <= 1e-5,
        "band curvature deviation {worst_band:e} above 1e-5"
    );

    // truncation self-certification: a re-solve at 48 modes moves lambda by
    // less than 1e-8 at the shared tip amplitudes, where the correction is
    // largest
    let cc48 = ContinuationConfig {
        modes: 48,
        ..ContinuationConfig::default()
    };
    let pts48 = branch::continue_branch(&ctx, 0.03, 1, &cc48, &cfg).unwrap();
    let mut matched = 0usize;
    let mut worst_shift = 0.0f64;
    for p48 in &pts48 {
        if p48.a == 0.0 {
            continue;
        }
        if let Some(p32) = pts.iter().find(|p| (p.a - p48.a).abs() < 1e-12) {
            worst_shift = worst_shift.max((p32.lambda - p48.lambda).abs());
            matched += 1;
        }
    }
    assert!(matched >= 2, "only {matched} shared amplitudes between runs");
    assert!(
        worst_shift < 1e-8,
        "lambda moved {worst_shift:e} between 32 and 48 modes"
    );
    println!(
        "acceptance 7 delaunay-branch: PASS (residuals {worst_residual:.2e} <= 1e-9, \
         band NMC {worst_band:.2e} <= 1e-5, truncation shift {worst_shift:.2e} < 1e-8)"
    );
}

#[test]
fn acceptance_8_linear_operator_identities() {
    let cfg = cfg();
    let alpha = 0.5;
    let r_star = spectrum::solve_r(alpha, &cfg).unwrap();
    let ctx = KernelContext::new(alpha, r_star).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let cosine = CosineSeries::mode(1);

    let mut worst_apply = 0.0f64;
    let mut worst_round = 0.0f64;
    for _ in 0..3 {
        let mut c: Vec<f64> = (0..9).map(|_| rng.gen_range(-0.5..0.5f64)).collect();
        c[1] = 0.0;
        let w = CosineSeries::new(c.clone());

        let lw = spectrum::apply_l(&ctx, &w, &cfg).unwrap();
        for i in 0..16 {
            let s = TAU * i as f64 / 16.0;
            let direct = graph::dphi_dvarphi(&ctx, 0.0, 1.0, &cosine, &w, s, &cfg).unwrap();
            worst_apply = worst_apply.max((lw.eval(s) - direct).abs());
        }

        let back = spectrum::solve_l_on_v2(&ctx, &lw, &cfg).unwrap();
        for (k, &ck) in c.iter().enumerate() {
            worst_round = worst_round.max((back.coeff(k) - ck).abs());
        }
    }
    assert!(
        worst_apply <= 1e-6,
        "diagonal application off by {worst_apply:e} pointwise"
    );
    assert!(
        worst_round <= 1e-12,
        "inverse round trip off by {worst_round:e}"
    );

    let nodes = series::collocation_nodes(8);
    let vals: Vec<f64> = nodes
        .iter()
        .map(|&s| graph::dphi_dlambda(&ctx, 0.0, 1.0, &cosine, s, &cfg).unwrap())
        .collect();
    let coeffs = series::nodes_to_coeffs(&vals);
    let gamma = spectrum::gamma_const(&ctx, &cfg).unwrap();
    assert!(coeffs[1] > 0.0, "cos projection {} not positive", coeffs[1]);
    assert!(
        (coeffs[1] - gamma).abs() <= 1e-8,
        "cos projection {} vs gamma {gamma}",
        coeffs[1]
    );
    let stray = coeffs
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != 1)
        .map(|(_, c)| c.abs())
        .fold(0.0f64, f64::max);
    assert!(stray < 1e-10, "stray modes at {stray:e}");
    println!(
        "acceptance 8 linear-operator-identities: PASS (pointwise {worst_apply:.2e} <= 1e-6, \
         round trip {worst_round:.2e} <= 1e-12, stray modes {stray:.2e} < 1e-10)"
    );
}
