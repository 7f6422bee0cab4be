use std::f64::consts::PI;

use pens::grid::Grid;
use pens::kinetic::*;
use pens::PensError;
use proptest::prelude::*;

fn grids(nx: usize, nv: usize, xi_max: f64) -> (Grid, VelocityGrid) {
    (Grid::new(1, nx, 1.0).unwrap(), VelocityGrid::new(nv, xi_max).unwrap())
}

fn wave(g: &Grid, a: f64, f: fn(f64) -> f64) -> Vec<f64> {
    (0..g.n()).map(|i| a * f(2.0 * PI * g.position(i)[0])).collect()
}

#[test]
fn moments_of_simple_profiles() {
    let (g, vg) = grids(8, 256, 2.0);
    let sigma: f64 = 0.2;
    let s = KineticState::from_moments(g, vg, &[1.3; 8], &[0.0; 8], sigma, 0.1, Background::Constant(0.0)).unwrap();
    let m = s.moments();
    for i in 0..8 {
        assert!((m.rho[i] - 1.3).abs() < 1e-13);
        assert!(m.momentum[i].abs() < 1e-14);
        assert!((m.variance[i] - sigma * sigma).abs() < 1e-3 * sigma * sigma);
    }
    let iso = monokinetic_deviation(&s);
    let expect = (sigma * sigma - grid_temperature(&vg)) * s.mass();
    assert!((iso - expect).abs() < 1e-3 * expect, "{iso} vs {expect}");

    // one-cell column
    let mut f = vec![0.0; 8 * 256];
    for i in 0..8 {
        f[i * 256 + 140] = 2.0;
    }
    let s = KineticState::new(g, vg, f, 0.1, Background::Constant(0.0)).unwrap();
    assert!(s.moments().variance.iter().all(|v| *v <= vg.spacing().powi(2)));
    assert_eq!(monokinetic_deviation(&s), 0.0);
    assert!(kinetic_temperature(&s) <= vg.spacing().powi(2) * s.mass());
}

#[test]
fn cold_initialization_matches_moments() {
    let (g, vg) = grids(16, 64, 1.0);
    let rho = wave(&g, 0.2, f64::sin).iter().map(|r| 1.0 + r).collect::<Vec<_>>();
    let u = wave(&g, 0.3, f64::cos);
    let s = KineticState::from_moments(g, vg, &rho, &u, 0.0, 0.1, Background::Constant(0.0)).unwrap();
    let m = s.moments();
    let uk = m.velocity(1e-12);
    for i in 0..16 {
        assert!((m.rho[i] - rho[i]).abs() < 1e-13);
        assert!((uk[i] - u[i]).abs() < 1e-13);
    }
    assert!(monokinetic_deviation(&s) <= vg.spacing().powi(2) * s.mass());
}

#[test]
fn invalid_states_rejected() {
    let (g, vg) = grids(8, 16, 1.0);
    let mut f = vec![1.0; 8 * 16];
    f[3] = -1e-3;
    assert!(KineticState::new(g, vg, f, 0.1, Background::Constant(0.0)).is_err());
    assert!(KineticState::new(g, vg, vec![1.0; 8 * 16], 0.0, Background::Constant(0.0)).is_err());
    assert!(KineticState::new(g, vg, vec![1.0; 8 * 16], 0.1, Background::Samples(vec![0.0; 3])).is_err());
    assert!(VelocityGrid::new(2, 1.0).is_err());
    assert!(KineticState::new(Grid::new(2, 8, 1.0).unwrap(), vg, vec![1.0; 64 * 16], 0.1, Background::Constant(0.0)).is_err());
}

#[test]
fn step_restrictions() {
    let (g, vg) = grids(16, 32, 1.0);
    let s = KineticState::from_moments(g, vg, &[1.0; 16], &[0.0; 16], 0.1, 0.05, Background::Constant(0.0)).unwrap();
    let lim = kinetic_limits(&s, AlignmentScheme::Explicit);
    assert!(lim.alignment <= 0.05);
    assert!(matches!(
        kinetic_step(&s, 1.5 * lim.transport, AlignmentScheme::Exact),
        Err(PensError::CflViolation { .. })
    ));
    assert!(matches!(
        kinetic_step(&s, 2.0 * lim.alignment, AlignmentScheme::Explicit),
        Err(PensError::CflViolation { .. })
    ));
    assert!(kinetic_step(&s, 0.9 * lim.transport, AlignmentScheme::Exact).is_ok());
}

#[test]
fn boundary_mass_aborts() {
    let (g, vg) = grids(8, 32, 1.0);
    let s = KineticState::from_moments(g, vg, &[1.0; 8], &[0.9; 8], 0.2, 0.1, Background::Constant(0.9)).unwrap();
    let dt = 0.5 * kinetic_limits(&s, AlignmentScheme::Exact).transport;
    assert!(matches!(
        kinetic_step(&s, dt, AlignmentScheme::Exact),
        Err(PensError::VelocityBoundary { .. })
    ));
}

#[test]
fn drifting_equilibrium_is_stationary() {
    let c = 0.3;
    let (g, vg) = grids(32, 128, 2.0);
    for scheme in [AlignmentScheme::Exact, AlignmentScheme::Explicit] {
        let mut s = KineticState::from_moments(g, vg, &[1.0; 32], &[c; 32], 0.05, 0.2, Background::Constant(c)).unwrap();
        let lim = kinetic_limits(&s, scheme);
        let dt = 0.9 * lim.transport.min(lim.alignment);
        let mass0 = s.mass();
        for _ in 0..50 {
            s = kinetic_step(&s, dt, scheme).unwrap();
        }
        let m = s.moments();
        let u = m.velocity(1e-12);
        for i in 0..32 {
            assert!((m.rho[i] - 1.0).abs() < 1e-12, "{scheme:?}");
            assert!((u[i] - c).abs() < 1e-12, "{scheme:?}");
        }
        assert!(((s.mass() - mass0) / mass0).abs() < 1e-13);
    }
}

#[test]
fn uniform_relaxation_matches_closed_form() {
    // spatially uniform: u' = v - u, so u(t) = v + (u0 - v) e^{-t}
    let (g, vg) = grids(8, 256, 1.5);
    let (u0, v) = (0.2, -0.1);
    for (scheme, tol) in [(AlignmentScheme::Exact, 1e-13), (AlignmentScheme::Explicit, 2e-3)] {
        let mut s = KineticState::from_moments(g, vg, &[1.0; 8], &[u0; 8], 0.1, 0.1, Background::Constant(v)).unwrap();
        let lim = kinetic_limits(&s, scheme);
        let n = (0.5 / (0.9 * lim.alignment.min(lim.transport))).ceil() as usize;
        let dt = 0.5 / n as f64;
        for _ in 0..n {
            s = kinetic_step(&s, dt, scheme).unwrap();
        }
        let exact = v + (u0 - v) * (-0.5f64).exp();
        let u = s.moments().velocity(1e-12);
        assert!((u[0] - exact).abs() < tol, "{scheme:?}: {} vs {exact}", u[0]);
    }
}

#[test]
fn alignment_reduces_deviation() {
    let (g, vg) = grids(16, 128, 1.5);
    let u = wave(&g, 0.1, f64::cos);
    for scheme in [AlignmentScheme::Exact, AlignmentScheme::Explicit] {
        let mut s = KineticState::from_moments(g, vg, &[1.0; 16], &u, 0.15, 0.1, Background::Sine { amplitude: 0.1, mode: 1, phase: 0.0 }).unwrap();
        let dt = 0.9 * kinetic_limits(&s, scheme).alignment.min(0.01);
        let slack = grid_temperature(&vg) * s.mass();
        let mut prev = monokinetic_deviation(&s);
        for _ in 0..(0.3 / dt).ceil() as usize {
            s = alignment_step(&s, dt, scheme).unwrap();
            let d = monokinetic_deviation(&s);
            assert!(d <= prev + slack, "{scheme:?}: {d} > {prev}");
            prev = d;
        }
        assert!(prev < 0.5 * 0.15f64.powi(2) * s.mass());
    }
}

#[test]
fn resting_state_matches_euler_exactly() {
    let (g, vg) = grids(32, 64, 1.0);
    let mut k = KineticState::from_moments(g, vg, &[1.0; 32], &[0.0; 32], 0.0, 0.1, Background::Constant(0.0)).unwrap();
    let mut e = EulerDrag::new(g, &[1.0; 32], &[0.0; 32], Background::Constant(0.0), 1.3).unwrap();
    let e0 = limit_comparison(&k, &e).unwrap();
    assert_eq!((e0.rho, e0.u), (0.0, 0.0));
    for _ in 0..20 {
        k = kinetic_step(&k, 0.01, AlignmentScheme::Exact).unwrap();
        e.step(0.01).unwrap();
    }
    let err = limit_comparison(&k, &e).unwrap();
    assert!(err.rho < 1e-14 && err.u < 1e-14, "{err:?}");
    let other = EulerDrag::new(Grid::new(1, 16, 1.0).unwrap(), &[1.0; 16], &[0.0; 16], Background::Constant(0.0), 1.3).unwrap();
    assert!(limit_comparison(&k, &other).is_err());
}

/// Pressureless Euler with drag toward `v = 0`, `u0 = a cos(2 pi x)`, `rho0 = 1`:
/// `x = y + u0(y)(1 - e^{-t})`, `rho = 1 / (1 + u0'(y)(1 - e^{-t}))`.
fn characteristic_density(x: f64, t: f64, a: f64) -> f64 {
    let s = 1.0 - (-t).exp();
    let mut y = x;
    for _ in 0..60 {
        let f = y + a * (2.0 * PI * y).cos() * s - x;
        let df = 1.0 - 2.0 * PI * a * (2.0 * PI * y).sin() * s;
        y -= f / df;
    }
    1.0 / (1.0 - 2.0 * PI * a * (2.0 * PI * y).sin() * s)
}

#[test]
fn cold_limit_converges_to_pressureless_euler() {
    let a = 0.1;
    let mut errors = Vec::new();
    for nx in [128, 256, 512] {
        let (g, vg) = grids(nx, 128, 1.5);
        let u0 = wave(&g, a, f64::cos);
        let mut k = KineticState::from_moments(g, vg, &vec![1.0; nx], &u0, 0.0, 0.01, Background::Constant(0.0)).unwrap();
        let dt = 0.5 / nx as f64;
        for _ in 0..(0.25 / dt).round() as usize {
            k = kinetic_step(&k, dt, AlignmentScheme::Exact).unwrap();
        }
        let rho = k.moments().rho;
        let err = (0..nx)
            .map(|i| (rho[i] - characteristic_density(g.position(i)[0], k.t, a)).abs())
            .fold(0.0, f64::max);
        errors.push(err);
    }
    assert!(errors[0] < 5e-3, "{errors:?}");
    assert!(errors[2] < errors[0], "{errors:?}");
}

#[test]
fn matched_masses_agree() {
    let setup = KineticSetup {
        t_end: 0.1,
        output_times: vec![0.1],
        ..Default::default()
    };
    let run = setup.run(0.1).unwrap();
    assert!(((run.mass0 - run.euler_mass0) / run.euler_mass0).abs() < 1e-10);
    assert!(((run.mass_end - run.mass0) / run.mass0).abs() < 1e-12);
    assert_eq!(run.errors.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn steps_preserve_positivity_and_mass(
        seed in proptest::collection::vec(0.0f64..1.0, 8 * 16),
        eps in 0.05f64..1.0,
        frac in 0.1f64..1.0,
        upwind in any::<bool>(),
    ) {
        let (g, vg) = grids(8, 16, 1.0);
        // keep the outer velocity cells empty
        let f: Vec<f64> = seed.iter().enumerate()
            .map(|(k, v)| { let j = k % 16; if (3..13).contains(&j) { *v } else { 0.0 } })
            .collect();
        prop_assume!(f.iter().sum::<f64>() > 0.0);
        let s = KineticState::new(g, vg, f, eps, Background::Constant(0.0)).unwrap();
        let scheme = if upwind { AlignmentScheme::Explicit } else { AlignmentScheme::Exact };
        let lim = kinetic_limits(&s, scheme);
        let dt = frac * lim.transport.min(lim.alignment);
        let m0 = s.mass();
        match kinetic_step(&s, dt, scheme) {
            Ok(out) => {
                prop_assert!(out.data().iter().all(|v| *v >= 0.0));
                prop_assert!(((out.mass() - m0) / m0).abs() < 1e-13);
            }
            Err(PensError::VelocityBoundary { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
