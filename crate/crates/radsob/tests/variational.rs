//! Shooting for the critical Euler-Lagrange equation, the energy
//! identity, heat-kernel comparison, and the assembled flatness report.

mod common;

use radsob::error::Error;
use radsob::manifold::ModelManifold;
use radsob::numerics::{OdeConfig, QuadratureConfig};
use radsob::profiles::{AubinTalenti, Profile};
use radsob::variational::{
    el_residual, el_residual_of_shot, energy_identity_check, euclidean_closed_solution,
    euclidean_heat_kernel, heat_supersolution_residual, profile_energy_discrepancy,
    rigidity_experiment, shoot, RigidityConfig, ShotStatus,
};

fn qcfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn ocfg() -> OdeConfig {
    OdeConfig::default()
}

fn e(n: u32) -> ModelManifold {
    ModelManifold::euclidean(n).unwrap()
}

fn h3() -> ModelManifold {
    ModelManifold::hyperbolic(3, 1.0).unwrap()
}

#[test]
fn closed_solution_solves_the_equation_exactly() {
    for n in [3u32, 4, 5] {
        for c in [0.5, 1.0, 2.0] {
            let u = euclidean_closed_solution(n, c).unwrap();
            assert!(common::rel_err(u.value(0.0), c) < 1e-15);
            for r in [0.1, 0.9, 3.0, 17.0] {
                let res = el_residual(&e(n), &u, r).unwrap();
                assert!(
                    res.abs() < 1e-12 * c.max(1.0),
                    "n={n} c={c} r={r}: {res}"
                );
            }
        }
    }
    // the dilation parameter follows the height
    let u = euclidean_closed_solution(3, 4.0).unwrap();
    assert!(common::rel_err(u.lambda(), 16.0) < 1e-15);
}

/// The bubble family solves the equation only at one specific scale;
/// elsewhere the residual is the closed multiple `u^{2*-1} (n(n-2)b - 1)`.
#[test]
fn bubble_residual_matches_its_closed_multiple() {
    let m = e(3);
    for b in [0.2, 1.0, 5.0] {
        let f = AubinTalenti::new(3, b).unwrap();
        for r in [0.3, 1.0, 2.5] {
            let res = el_residual(&m, &f, r).unwrap();
            let expected = f.value(r).powi(5) * (3.0 * b - 1.0);
            assert!(
                (res - expected).abs() < 1e-12,
                "b={b} r={r}: {res} vs {expected}"
            );
        }
    }
    // b = 1/(n(n-2)) is the solution scale: residual vanishes
    let f = AubinTalenti::new(3, 1.0 / 3.0).unwrap();
    assert!(el_residual(&m, &f, 1.0).unwrap().abs() < 1e-15);
}

#[test]
fn residual_needs_positive_radius_and_second_derivatives() {
    let u = euclidean_closed_solution(3, 1.0).unwrap();
    assert!(matches!(
        el_residual(&e(3), &u, 0.0),
        Err(Error::Domain(_))
    ));
    let tent = radsob::profiles::FnProfile::new(
        |r: f64| (1.0 - r).max(0.0),
        |r: f64| if r < 1.0 { -1.0 } else { 0.0 },
        Some(1.0),
    );
    assert!(el_residual(&e(3), &tent, 0.5).is_err());
}

#[test]
fn flat_shots_reproduce_the_closed_solution() {
    for n in [3u32, 4] {
        for c in [0.5, 1.0, 2.0] {
            let shot = shoot(&e(n), c, 10.0, &ocfg(), &qcfg()).unwrap();
            assert!(matches!(shot.status, ShotStatus::Decayed), "n={n} c={c}");
            let exact = euclidean_closed_solution(n, c).unwrap();
            for r in [0.5, 1.0, 2.0, 5.0, 9.5] {
                let got = shot.solution.component(r, 0);
                let want = exact.value(r);
                assert!(
                    (got - want).abs() < 1e-7 * c,
                    "n={n} c={c} r={r}: {got} vs {want}"
                );
            }
        }
    }
    // spot value: u(1) = (1 + 1/3)^{-1/2} on R^3 at unit height
    let shot = shoot(&e(3), 1.0, 10.0, &ocfg(), &qcfg()).unwrap();
    let got = shot.solution.component(1.0, 0);
    assert!((got - 0.75f64.sqrt()).abs() < 1e-9, "{got}");
}

#[test]
fn curved_shots_match_frozen_trajectory() {
    // curvature -1, unit height: pinned from an independent run; the
    // trajectory decays to a strictly positive floor instead of a bubble
    let shot = shoot(&h3(), 1.0, 30.0, &ocfg(), &qcfg()).unwrap();
    assert!(matches!(shot.status, ShotStatus::Decayed));
    let pins = [
        (0.5, 0.96139174069846856),
        (1.0, 0.87351669509163143),
        (2.0, 0.70826033724673487),
        (3.0, 0.61684858884058946),
        (30.0, 0.35290940851821023),
    ];
    for (r, want) in pins {
        let got = shot.solution.component(r, 0);
        assert!((got - want).abs() < 1e-6, "u({r}) = {got}, want {want}");
    }
    let dpins = [(0.5, -0.14308929452459945), (2.0, -0.12569499461363998)];
    for (r, want) in dpins {
        let got = shot.solution.component(r, 1);
        assert!((got - want).abs() < 1e-6, "u'({r}) = {got}");
    }
}

#[test]
fn shot_residual_vanishes_off_the_nodes() {
    let mut ode = ocfg();
    ode.rel_tol = 1e-12;
    let shot = shoot(&h3(), 1.0, 20.0, &ode, &qcfg()).unwrap();
    // radii chosen irrationally so they avoid accepted step endpoints
    let mut r = 0.7310508;
    while r < 19.0 {
        let res = el_residual_of_shot(&h3(), &shot, r).unwrap();
        assert!(res.abs() < 1e-9, "residual {res} at {r}");
        r *= 1.618033988;
    }
}

#[test]
fn energy_identity_closes_at_finite_range() {
    let shot = shoot(&e(3), 1.0, 10.0, &ocfg(), &qcfg()).unwrap();
    assert!(shot.e_grad > 0.0 && shot.e_pot > 0.0);
    assert!(energy_identity_check(&shot) < 1e-9, "{}", energy_identity_check(&shot));
    let shot = shoot(&h3(), 1.0, 30.0, &ocfg(), &qcfg()).unwrap();
    assert!(energy_identity_check(&shot) < 1e-5, "{}", energy_identity_check(&shot));
}

#[test]
fn non_solutions_fail_the_energy_identity_loudly() {
    // a profile far from any solution shows an O(1) discrepancy
    let f = AubinTalenti::new(3, 25.0).unwrap();
    let d = profile_energy_discrepancy(&e(3), &f, 1e-6, 10.0, &qcfg()).unwrap();
    assert!(d > 0.1, "{d}");
    // while the closed solution passes at the same radii
    let u = euclidean_closed_solution(3, 1.0).unwrap();
    let d = profile_energy_discrepancy(&e(3), &u, 1e-6, 10.0, &qcfg()).unwrap();
    assert!(d < 1e-8, "{d}");
}

#[test]
fn overheight_shots_report_their_halt() {
    // tiny step budget: the solver must hand back a partial answer
    let mut ode = ocfg();
    ode.max_steps = 8;
    let shot = shoot(&e(3), 1.0, 10.0, &ode, &qcfg()).unwrap();
    assert!(matches!(shot.status, ShotStatus::MaxedOut));
    assert!(shot.r_end < 10.0);
    assert!(shoot(&e(3), -1.0, 10.0, &ocfg(), &qcfg()).is_err());
}

#[test]
fn heat_kernel_matches_closed_values() {
    // (4 pi t)^{-3/2} at the origin, t = 1/2: (2 pi)^{-3/2}
    let k = euclidean_heat_kernel(3, 1e-8, 0.5);
    assert!(common::rel_err(k, 0.063493635934240969) < 1e-12);
    // mass decay in r
    assert!(euclidean_heat_kernel(3, 2.0, 0.5) < k);
}

#[test]
fn flat_heat_comparison_is_tight_and_curved_is_one_sided() {
    let mut grid = Vec::new();
    for i in 0..25 {
        for j in 0..20 {
            let r = 0.1 + 4.9 * i as f64 / 24.0;
            let t = 0.1 + 1.9 * j as f64 / 19.0;
            grid.push((r, t));
        }
    }
    // flat space: the kernel is an exact solution, residual at rounding level
    let flat = heat_supersolution_residual(&e(3), &grid).unwrap();
    assert!(flat.abs() < 1e-14, "{flat}");
    // negative curvature: strict supersolution, the minimum stays nonnegative
    let curved = heat_supersolution_residual(&h3(), &grid).unwrap();
    assert!(curved >= 0.0, "{curved}");
}

#[test]
fn flatness_report_flags_curvature_and_clears_flat_space() {
    let sweep = [0.1, 1.0, 10.0];
    let cfg = RigidityConfig::default();

    let curved = rigidity_experiment(&h3(), &sweep, &cfg).unwrap();
    assert_eq!(curved.verdict, "strictly_non_euclidean");
    // every full-space bubble transplant has divergent energy here
    assert_eq!(curved.divergent_scales.len(), sweep.len());
    assert!(curved.optimizer_quotients.is_empty());
    assert!(curved.sup_flattening_deficit > 1e-3);
    assert!(curved.sup_isoperimetric_deficit > 1e-3);
    assert!(!curved.truncated_quotients.is_empty());
    for q in &curved.truncated_quotients {
        assert!(q.quotient > curved.c_e_reference);
    }

    let flat = rigidity_experiment(&e(3), &sweep, &cfg).unwrap();
    assert_eq!(flat.verdict, "euclidean_within_tol");
    assert!(flat.divergent_scales.is_empty());
    assert_eq!(flat.optimizer_quotients.len(), sweep.len());
    for q in &flat.optimizer_quotients {
        assert!(common::rel_err(q.quotient, flat.c_e_reference) < 1e-8);
    }
    assert!(flat.sup_quotient_deficit.abs() <= cfg.tolerance);
    assert!(flat.sup_flattening_deficit.abs() <= cfg.tolerance);
    assert!(flat.sup_isoperimetric_deficit.abs() <= cfg.tolerance);

    assert!(rigidity_experiment(&e(3), &[], &cfg).is_err());
}
