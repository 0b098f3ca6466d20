//! Soundness checks for the numerical kernels against closed-form values.

mod common;

use proptest::prelude::*;
use radsob::error::Error;
use radsob::numerics::{
    find_root, integrate, integrate_with_breaks, solve_ivp, CubicHermite, Domain, HaltReason,
    OdeConfig, QuadratureConfig,
};
use std::f64::consts::PI;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Exactly known integrals spanning smooth, endpoint-singular, and
/// half-infinite cases. The reported error must honestly bound the true
/// error up to a small safety factor.
#[test]
fn quadrature_soundness_set() {
    let cases: Vec<(&str, Box<dyn Fn(f64) -> f64>, Domain, f64)> = vec![
        ("monomial", Box::new(|r: f64| r * r), Domain::Finite(0.0, 1.0), 1.0 / 3.0),
        ("inverse_sqrt", Box::new(|r: f64| r.powf(-0.5)), Domain::Finite(0.0, 1.0), 2.0),
        ("exp_tail", Box::new(|r: f64| (-r).exp()), Domain::HalfLine(0.0), 1.0),
        ("gaussian", Box::new(|r: f64| (-r * r).exp()), Domain::HalfLine(0.0), PI.sqrt() / 2.0),
        (
            "algebraic_tail",
            Box::new(|r: f64| r * r / (1.0 + r * r).powi(3)),
            Domain::HalfLine(0.0),
            PI / 16.0,
        ),
        ("sine_arch", Box::new(f64::sin), Domain::Finite(0.0, PI), 2.0),
        ("log_singularity", Box::new(|r: f64| (1.0 / r).ln()), Domain::Finite(0.0, 1.0), 1.0),
        (
            "gaussian_moment",
            Box::new(|r: f64| r * r * (-2.0 * r * r).exp()),
            Domain::HalfLine(0.0),
            (2.0 * PI).sqrt() / 16.0,
        ),
        ("power_tail", Box::new(|r: f64| r.powi(-2)), Domain::HalfLine(1.0), 1.0),
        ("sech_squared", Box::new(|r: f64| 1.0 / r.cosh().powi(2)), Domain::HalfLine(0.0), 1.0),
    ];
    for (name, f, domain, exact) in cases {
        let q = integrate(&f, domain, &cfg()).unwrap_or_else(|e| panic!("{name}: {e}"));
        let true_err = (q.value - exact).abs();
        assert!(
            common::rel_err(q.value, exact) < 1e-9,
            "{name}: value {} vs exact {exact}",
            q.value
        );
        assert!(
            true_err <= 10.0 * q.error + 1e-15,
            "{name}: true error {true_err:e} exceeds 10x reported {:e}",
            q.error
        );
    }
}

#[test]
fn quadrature_agrees_with_simpson_oracle() {
    let f = |r: f64| (1.0 + r * r).recip();
    let q = integrate(f, Domain::Finite(0.0, 3.0), &cfg()).unwrap();
    let oracle = common::simpson(f, 0.0, 3.0, 4096);
    assert!((q.value - oracle).abs() < 1e-10, "{} vs {oracle}", q.value);
    assert!((q.value - 3.0f64.atan()).abs() < 1e-12);
}

#[test]
fn divergent_tail_is_reported_not_returned() {
    let err = integrate(|r: f64| 1.0 / (1.0 + r), Domain::HalfLine(0.0), &cfg()).unwrap_err();
    assert!(matches!(err, Error::TailDivergent), "got {err:?}");
    let err = integrate(|r: f64| r.sqrt(), Domain::HalfLine(0.0), &cfg()).unwrap_err();
    assert!(matches!(err, Error::TailDivergent), "got {err:?}");
}

#[test]
fn breaks_handle_derivative_kinks() {
    // |r - 1| integrated over [0, 3]: a kink the plain panels would chase
    let f = |r: f64| (r - 1.0).abs();
    let q = integrate_with_breaks(f, Domain::Finite(0.0, 3.0), &[1.0], &cfg()).unwrap();
    assert!((q.value - 2.5).abs() < 1e-12, "{}", q.value);
    // breaks outside the domain are ignored
    let q = integrate_with_breaks(f, Domain::Finite(0.0, 3.0), &[-2.0, 5.0], &cfg()).unwrap();
    assert!((q.value - 2.5).abs() < 1e-10);
}

#[test]
fn empty_interval_is_a_domain_error() {
    let err = integrate(|_| 1.0, Domain::Finite(2.0, 2.0), &cfg()).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
    let err = integrate(|_| 1.0, Domain::Finite(3.0, 1.0), &cfg()).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Splitting an interval never changes the integral.
    #[test]
    fn quadrature_is_additive(
        a in -3.0f64..0.0,
        len1 in 0.1f64..2.0,
        len2 in 0.1f64..2.0,
        freq in 0.5f64..3.0,
        amp in 0.1f64..5.0,
    ) {
        let f = |r: f64| amp * (freq * r).sin() + r * r;
        let b = a + len1;
        let c = b + len2;
        let whole = integrate(f, Domain::Finite(a, c), &cfg()).unwrap().value;
        let left = integrate(f, Domain::Finite(a, b), &cfg()).unwrap().value;
        let right = integrate(f, Domain::Finite(b, c), &cfg()).unwrap().value;
        prop_assert!((whole - (left + right)).abs() < 1e-9 * (1.0 + whole.abs()));
    }

    /// A nonnegative integrand yields a nonnegative integral bounded by
    /// the coarse supremum times the length.
    #[test]
    fn quadrature_respects_positivity_bracket(
        a in 0.0f64..2.0,
        len in 0.2f64..3.0,
        shift in 0.0f64..4.0,
    ) {
        let f = |r: f64| (r - shift).powi(2) + 0.25;
        let b = a + len;
        let q = integrate(f, Domain::Finite(a, b), &cfg()).unwrap();
        prop_assert!(q.value > 0.0);
        let sup = (0..=200)
            .map(|i| f(a + len * i as f64 / 200.0))
            .fold(f64::MIN, f64::max);
        prop_assert!(q.value <= sup * len * (1.0 + 1e-12));
    }

    /// Brent recovers the unique root of a monotone cubic.
    #[test]
    fn root_finder_recovers_cubic_roots(root in -2.0f64..2.0) {
        let g = |x: f64| (x - root) * ((x - root).powi(2) + 1.0);
        let found = find_root(g, -4.0, 4.0, 1e-13).unwrap();
        prop_assert!((found - root).abs() < 1e-11);
    }
}

#[test]
fn root_finder_needs_a_sign_change() {
    let err = find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
    assert!(matches!(err, Error::NoSignChange { .. }));
}

#[test]
fn root_finder_hits_transcendental_roots() {
    let root = find_root(f64::cos, 1.0, 2.0, 1e-14).unwrap();
    assert!((root - PI / 2.0).abs() < 1e-13);
    let root = find_root(|x| x.powi(3) - 2.0, 0.0, 2.0, 1e-14).unwrap();
    assert!((root - 2.0f64.powf(1.0 / 3.0)).abs() < 1e-13);
}

#[test]
fn hermite_interpolant_reproduces_cubics_exactly() {
    // value and slope data from a cubic pin the cubic itself
    let p = |x: f64| x.powi(3) - 2.0 * x * x + 0.5 * x - 1.0;
    let dp = |x: f64| 3.0 * x * x - 4.0 * x + 0.5;
    let xs: Vec<f64> = (0..=8).map(|i| i as f64 * 0.5).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| p(x)).collect();
    let ds: Vec<f64> = xs.iter().map(|&x| dp(x)).collect();
    let h = CubicHermite::with_slopes(xs, ys, ds).unwrap();
    for i in 0..=100 {
        let x = 4.0 * i as f64 / 100.0;
        assert!((h.value(x) - p(x)).abs() < 1e-12, "value at {x}");
        assert!((h.derivative(x) - dp(x)).abs() < 1e-11, "slope at {x}");
    }
}

#[test]
fn pchip_preserves_monotone_data() {
    let xs: Vec<f64> = vec![0.0, 0.3, 1.0, 1.2, 2.7, 4.0, 5.5];
    let ys: Vec<f64> = xs.iter().map(|&x| x.exp() - 1.0).collect();
    let h = CubicHermite::pchip(xs.clone(), ys).unwrap();
    let mut prev = h.value(0.0);
    for i in 1..=400 {
        let x = 5.5 * i as f64 / 400.0;
        let y = h.value(x);
        assert!(y >= prev - 1e-13, "dip at {x}: {y} < {prev}");
        prev = y;
    }
}

#[test]
fn ode_matches_linear_system_closed_form() {
    // y0' = -y0 + y1, y1' = -2 y1, from (1, 1): y1 = e^{-2t}, y0 = 2e^{-t} - e^{-2t}
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = -y[0] + y[1];
        dy[1] = -2.0 * y[1];
    };
    let cfg = OdeConfig::default();
    let (sol, halt) = solve_ivp(rhs, 0.0, &[1.0, 1.0], 3.0, &cfg, &[]).unwrap();
    assert!(matches!(halt, HaltReason::Completed));
    for i in 0..=60 {
        let t = 3.0 * i as f64 / 60.0;
        let y1 = (-2.0 * t).exp();
        let y0 = 2.0 * (-t).exp() - y1;
        assert!((sol.component(t, 0) - y0).abs() < 1e-9, "y0 at {t}");
        assert!((sol.component(t, 1) - y1).abs() < 1e-9, "y1 at {t}");
    }
}

#[test]
fn ode_dense_derivative_tracks_the_field() {
    let rhs = |t: f64, _y: &[f64], dy: &mut [f64]| {
        dy[0] = t.cos();
    };
    let cfg = OdeConfig::default();
    let (sol, _) = solve_ivp(rhs, 0.0, &[0.0], 6.0, &cfg, &[]).unwrap();
    for i in 0..=120 {
        let t = 6.0 * i as f64 / 120.0;
        assert!((sol.component(t, 0) - t.sin()).abs() < 1e-9);
        assert!((sol.derivative_component(t, 0) - t.cos()).abs() < 1e-7);
    }
}

#[test]
fn ode_event_halts_at_the_crossing() {
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = -y[0];
    };
    let cfg = OdeConfig::default();
    let event = |_t: f64, y: &[f64]| y[0] - 0.5;
    let (sol, halt) = solve_ivp(rhs, 0.0, &[1.0], 10.0, &cfg, &[&event]).unwrap();
    match halt {
        HaltReason::Event(0, t_star) => {
            assert!((t_star - 2.0f64.ln()).abs() < 1e-10, "t* = {t_star}");
            assert!((sol.t_end() - t_star).abs() < 1e-12);
        }
        other => panic!("expected the level event, got {other:?}"),
    }
}

#[test]
fn ode_singular_drift_reproduces_critical_bubble() {
    // u'' + (2/r) u' + u^5 = 0 started on the regular series has the
    // closed solution (1 + r^2/3)^{-1/2} in three dimensions
    let rhs = |r: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -2.0 / r * y[1] - y[0].powi(5);
    };
    let cfg = OdeConfig::default();
    let r0 = cfg.r_start;
    let u0 = 1.0 - r0 * r0 / 6.0;
    let w0 = -r0 / 3.0;
    let (sol, halt) = solve_ivp(rhs, r0, &[u0, w0], 10.0, &cfg, &[]).unwrap();
    assert!(matches!(halt, HaltReason::Completed));
    for i in 1..=40 {
        let r = 10.0 * i as f64 / 40.0;
        let exact = (1.0 + r * r / 3.0).powf(-0.5);
        assert!(
            (sol.component(r, 0) - exact).abs() < 1e-9,
            "u({r}) = {} vs {exact}",
            sol.component(r, 0)
        );
    }
}

#[test]
fn ode_step_budget_returns_partial_solution() {
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = -y[0];
    };
    let cfg = OdeConfig {
        max_steps: 5,
        ..OdeConfig::default()
    };
    let (sol, halt) = solve_ivp(rhs, 0.0, &[1.0], 1e6, &cfg, &[]).unwrap();
    assert!(matches!(halt, HaltReason::StepBudget));
    assert!(sol.t_end() < 1e6);
    let t = sol.t_end();
    assert!((sol.component(t, 0) - (-t).exp()).abs() < 1e-9);
}
