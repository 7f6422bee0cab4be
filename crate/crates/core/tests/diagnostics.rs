use std::f64::consts::PI;

use pens::coupler::FluidState;
use pens::diagnostics::{energy, record_header, sobolev_table, CharacteristicProbe, DiagnosticsConfig, FieldSpectra, Tracker};
use pens::euler::EulerState;
use pens::grid::{Grid, ScalarField, VectorField};
use pens::ns::NsState;
use pens::spectral::Transform;

fn state(rho: ScalarField, u: &VectorField, v: &VectorField, t: &Transform) -> FluidState {
    FluidState::new(EulerState::from_velocity(rho, u).unwrap(), NsState::from_velocity(t, v, 1.0).unwrap(), 0.0).unwrap()
}

#[test]
fn uniform_state_energy_matches_closed_form() {
    for d in 1..=3 {
        let g = Grid::new(d, 8, 1.7).unwrap();
        let t = Transform::new(g);
        let (rho0, uu, vv) = (1.4, [0.3, -0.2, 0.5], [-0.1, 0.25, 0.05]);
        let s = state(ScalarField::constant(g, rho0), &VectorField::from_fn(g, |_| uu), &VectorField::from_fn(g, |_| vv), &t);
        let terms = energy(&t, &s, 1e-10).unwrap();
        let vol = g.volume();
        let sq = |a: &[f64; 3]| a[..d].iter().map(|x| x * x).sum::<f64>();
        let rel: [f64; 3] = std::array::from_fn(|a| uu[a] - vv[a]);
        let e = 0.5 * rho0 * sq(&uu) * vol + 0.5 * sq(&vv) * vol;
        let diss = rho0 * sq(&rel) * vol;
        assert!((terms.energy - e).abs() < 1e-13 * e, "d={d}");
        assert!((terms.dissipation - diss).abs() < 1e-13 * diss, "d={d}");
    }
}

#[test]
fn sobolev_norm_of_a_sine_wave() {
    let g = Grid::new(2, 16, 3.0).unwrap();
    let t = Transform::new(g);
    let (a, m) = (0.2, 3.0);
    let k = 2.0 * PI * m / g.length();
    let rho = ScalarField::from_fn(g, |x| 1.0 + a * (k * x[1]).sin());
    let zero = VectorField::zeros(g);
    let s = state(rho, &zero, &zero, &t);
    let spectra = FieldSpectra::new(&t, &s, &zero).unwrap();
    let table = sobolev_table(&spectra, 2);
    assert_eq!(table[0].label, "H2_rho");
    let exact = ((1.0 + k * k).powi(2) * a * a * g.volume() / 2.0).sqrt();
    assert!((table[0].value - exact).abs() < 1e-12 * exact);
    assert_eq!(table[1].value, 0.0);
    assert_eq!(table[2].value, 0.0);
    assert!((table[3].value - exact * exact).abs() < 1e-12 * exact * exact);
}

#[test]
fn probe_follows_a_uniform_translation() {
    let g = Grid::new(2, 32, 4.0).unwrap();
    let h = g.spacing();
    let rho0 = ScalarField::from_fn(g, |x| 1.0 + 0.1 * (PI * x[0] / 2.0).sin() * (PI * x[1] / 2.0).cos());
    let (ux, uy) = (0.5, -0.25);
    let u = VectorField::from_fn(g, |_| [ux, uy, 0.0]);
    let point = [2.0, 2.0, 0.0];
    let mut probe = CharacteristicProbe::new(&rho0, &[point], 3).unwrap();
    // displacement of exactly (2h, -h) by the final frame
    let t_end = 2.0 * h / ux;
    for i in 0..=10 {
        probe.record(t_end * i as f64 / 10.0, &u).unwrap();
    }
    let out = probe.compare(&rho0).unwrap();
    let x = probe.sample_positions()[0];
    let foot = [x[0] - 2.0 * h, x[1] + h, 0.0];
    assert!((out[0].foot[0] - foot[0]).abs() < 1e-12 && (out[0].foot[1] - foot[1]).abs() < 1e-12);
    let exact = rho0.interpolate(foot);
    assert!((out[0].predicted - exact).abs() < 1e-13);
    assert!(probe.record(0.0, &u).is_err());
}

#[test]
fn probe_integrates_compression_along_a_fixed_point() {
    let g = Grid::new(1, 64, 8.0).unwrap();
    let x0 = 4.0;
    let c = 0.3;
    let rho0 = ScalarField::constant(g, 1.2);
    let u = VectorField::from_fn(g, |x| [-c * g.wrap_displacement(x[0] - x0), 0.0, 0.0]);
    let mut probe = CharacteristicProbe::new(&rho0, &[[x0, 0.0, 0.0]], 2).unwrap();
    let t_end = 0.8;
    for i in 0..=40 {
        probe.record(t_end * i as f64 / 40.0, &u).unwrap();
    }
    let out = probe.compare(&rho0).unwrap();
    assert!((out[0].predicted - 1.2 * (c * t_end).exp()).abs() < 1e-12);
    assert!((out[0].foot[0] - x0).abs() < 1e-14);
}

#[test]
fn record_header_matches_tracker_output() {
    for d in 1..=3 {
        let g = Grid::new(d, 8, 2.0).unwrap();
        let t = Transform::new(g);
        let config = DiagnosticsConfig {
            sobolev_s: 1,
            weighted_orders: vec![0, 2],
            weighted_exponents: vec![0.0, 0.75],
            ..DiagnosticsConfig::default()
        };
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.1 * (PI * x[0]).cos());
        let u = VectorField::from_fn(g, |x| [0.1 * (PI * x[0]).sin(), 0.0, 0.0]);
        let s = state(rho, &u, &VectorField::zeros(g), &t);
        let mut tracker = Tracker::new(&s, config.clone(), 1e-10).unwrap();
        let (uu, terms) = tracker.observe(&t, &s, 0).unwrap();
        let rec = tracker.record(&t, &s, 0, &uu, terms).unwrap();
        assert_eq!(rec.header(), record_header(d, &config));
        assert_eq!(rec.header().len(), rec.values().len());
        assert_eq!(rec.column("mass"), Some(s.euler.mass()));
        assert_eq!(rec.balance_residual, 0.0);
    }
}
