use std::f64::consts::PI;

use pens::coupler::{drag_exchange, Coupler, DragScheme, FluidState, PhaseMode, StepControl};
use pens::euler::EulerState;
use pens::grid::{Grid, ScalarField, VectorField};
use pens::ns::NsState;
use pens::spectral::Transform;

fn control(dt_max: f64) -> StepControl {
    StepControl {
        cfl: 0.4,
        dt_max,
        t_end: 1.0,
        output_every: 1,
    }
}

fn state(g: Grid, rho: ScalarField, u: &VectorField, v: &VectorField, mu: f64) -> FluidState {
    let t = Transform::new(g);
    FluidState::new(
        EulerState::from_velocity(rho, u).unwrap(),
        NsState::from_velocity(&t, v, mu).unwrap(),
        0.0,
    )
    .unwrap()
}

#[test]
fn stationary_state_is_preserved() {
    let g = Grid::new(2, 16, 1.0).unwrap();
    let s0 = state(g, ScalarField::constant(g, 1.7), &VectorField::zeros(g), &VectorField::zeros(g), 1.0);
    let c = Coupler::new(g, 1.3, 1e-10).unwrap();
    let mut s = s0.clone();
    for _ in 0..5 {
        s = c.step(&s, 0.05, &control(0.05)).unwrap().state;
    }
    assert_eq!(s.euler, s0.euler);
    assert_eq!(s.ns, s0.ns);
    assert!((s.t - 0.25).abs() < 1e-15);
}

#[test]
fn taylor_green_decays_exactly() {
    let g = Grid::new(2, 64, 2.0 * PI).unwrap();
    let tg = |x: [f64; 3], a: f64| [a * x[0].cos() * x[1].sin(), -a * x[0].sin() * x[1].cos(), 0.0];
    let s0 = state(g, ScalarField::zeros(g), &VectorField::zeros(g), &VectorField::from_fn(g, |x| tg(x, 1.0)), 1.0);
    let c = Coupler::new(g, 1.3, 1e-10).unwrap().with_mode(PhaseMode::NsOnly);
    let mut s = s0;
    for _ in 0..1000 {
        s = c.step(&s, 1e-3, &control(1e-3)).unwrap().state;
    }
    let v = s.ns.velocity(c.transform());
    let exact = VectorField::from_fn(g, |x| tg(x, (-2.0 * s.t).exp()));
    let mut diff = v.clone();
    diff.axpy(-1.0, &exact);
    let rel = diff.l2_norm() / exact.l2_norm();
    assert!(rel <= 1e-10, "relative error {rel:e}");
}

/// `u' = -(u - v)`, `v' = rho (u - v)` for spatially uniform data.
fn uniform_oracle(rho: f64, a: f64, b: f64, t: f64) -> (f64, f64) {
    let p = rho * a + b;
    let w = (a - b) * (-(1.0 + rho) * t).exp();
    let u = (p + w) / (1.0 + rho);
    (u, u - w)
}

#[test]
fn uniform_drag_matches_linear_ode() {
    let g = Grid::new(1, 16, 1.0).unwrap();
    let (a, b) = (0.3, -0.2);
    for (scheme, dt, tol) in [(DragScheme::Explicit, 1e-3_f64, 1e-8), (DragScheme::Exact, 0.05, 1e-13)] {
        let s0 = state(
            g,
            ScalarField::constant(g, 1.0),
            &VectorField::from_fn(g, |_| [a, 0.0, 0.0]),
            &VectorField::from_fn(g, |_| [b, 0.0, 0.0]),
            1.0,
        );
        let c = Coupler::new(g, 1.3, 1e-10).unwrap().with_drag(scheme);
        let mut s = s0;
        let steps = (1.0 / dt).round() as usize;
        for _ in 0..steps {
            s = c.step(&s, dt, &control(dt)).unwrap().state;
        }
        let (ue, ve) = uniform_oracle(1.0, a, b, s.t);
        let u = c.particle_velocity(&s.euler).unwrap();
        for &x in u.component(0).data() {
            assert!((x - ue).abs() < tol, "{scheme:?}: u {x} vs {ue}");
        }
        let v = s.ns.momentum()[0] / g.volume();
        assert!((v - ve).abs() < tol, "{scheme:?}: v {v} vs {ve}");
    }
}

#[test]
fn coupled_run_conserves_mass_and_momentum() {
    let g = Grid::new(2, 32, 4.0).unwrap();
    let k = 2.0 * PI / 4.0;
    let rho = ScalarField::from_fn(g, |x| 1.0 + 0.2 * (k * x[0]).sin() * (k * x[1]).cos());
    let u = VectorField::from_fn(g, |x| [0.1 * (k * x[1]).cos() + 0.05, 0.1 * (k * x[0]).sin(), 0.0]);
    let v = VectorField::from_fn(g, |x| [0.2 * (k * x[1]).sin(), -0.03 + 0.1 * (2.0 * k * x[0]).cos(), 0.0]);
    for scheme in [DragScheme::Explicit, DragScheme::Exact] {
        let c = Coupler::new(g, 1.3, 1e-10).unwrap().with_drag(scheme);
        let mut s = state(g, rho.clone(), &u, &v, 1.0);
        let m0 = s.euler.mass();
        let p0 = s.momentum();
        let scale: f64 = 0.3 * g.volume();
        for _ in 0..200 {
            let dt = c.cfl_dt(&s, &control(0.02)).unwrap();
            let out = c.step(&s, dt, &control(0.02)).unwrap();
            assert_eq!(out.clipped, 0);
            s = out.state;
        }
        assert!(((s.euler.mass() - m0) / m0).abs() < 1e-13);
        for (a, b) in s.momentum().iter().zip(&p0) {
            assert!(((a - b) / scale).abs() < 1e-13, "{scheme:?} {a} {b}");
        }
        assert!(s.ns.max_divergence() < 1e-11);
    }
}

#[test]
fn drag_sources_cancel_in_sum() {
    let g = Grid::new(3, 8, 1.0).unwrap();
    let rho = ScalarField::constant(g, 1.0);
    let u = VectorField::from_fn(g, |_| [0.2, -0.1, 0.3]);
    let (a, b) = drag_exchange(&rho, &u, &VectorField::zeros(g)).unwrap();
    let sa = a.integral();
    let sb = b.integral();
    for i in 0..3 {
        assert_eq!(sa[i] + sb[i], 0.0);
        assert!((sb[i] - u.component(i).data()[0]).abs() < 1e-15);
    }
}
