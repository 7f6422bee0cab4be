use pens::config::{parse_config, InitialKind, RunConfig};
use pens::grid::VectorField;
use pens::init::{grid_of, initial_fields, initial_state};
use pens::io::Snapshot;
use pens::run::run_fluid;
use pens::spectral::{divergence, Transform};

fn base() -> RunConfig {
    let mut c = parse_config("[grid]\ndim = 2\nn = 16\nlength = 4\n[time]\nt_end = 0.33\n").unwrap();
    c.time.dt_max = 0.05;
    c.output.diagnostics_every = 2;
    c
}

#[test]
fn run_lands_exactly_on_t_end_with_expected_cadence() {
    let c = base();
    let run = run_fluid(&c, None).unwrap();
    assert!(run.failure.is_none());
    assert_eq!(run.last.t, 0.33);
    assert_eq!(run.steps, 7);
    let steps: Vec<usize> = run.records.iter().map(|r| r.step).collect();
    assert_eq!(steps, vec![0, 2, 4, 6, 7]);
    assert_eq!(run.energy.len(), run.steps + 1);
    assert_eq!(run.records.last().unwrap().t, 0.33);
}

#[test]
fn snapshots_are_written_and_reload() {
    let mut c = base();
    c.output.snapshot_every = 3;
    let dir = tempfile::tempdir().unwrap();
    let run = run_fluid(&c, Some(dir.path())).unwrap();
    let names: Vec<String> = run
        .snapshots
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["snapshot_0000000.bin", "snapshot_0000003.bin", "snapshot_0000006.bin", "snapshot_0000007.bin"]);
    let last = Snapshot::load(run.snapshots.last().unwrap()).unwrap();
    assert_eq!(last.t, run.last.t);
    assert_eq!(last.rho, run.last.euler.rho.data());
}

#[test]
fn unwritable_snapshot_dir_is_reported_as_failure() {
    let mut c = base();
    c.output.snapshot_every = 1;
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("does/not/exist");
    let run = run_fluid(&c, Some(&missing)).unwrap();
    assert!(run.failure.is_some());
    assert_eq!(run.steps, 0);
    assert_eq!(run.records.len(), 1);
    assert!(run.probe.is_empty());
}

#[test]
fn initial_data_shapes() {
    let mut c = base();
    c.grid.dim = 3;
    let g = grid_of(&c).unwrap();
    let t = Transform::new(g);

    // Gaussian: radial u has zero net momentum about the center
    let s = initial_state(&c, &t).unwrap();
    for m in s.euler.momentum.integral() {
        assert!(m.abs() < 1e-12);
    }
    let div = t.inverse(&divergence(&s.ns.vhat));
    assert!(div.max_abs() < 1e-10);

    c.initial.kind = InitialKind::Random;
    c.initial.modes = 3;
    let (r1, u1, v1) = initial_fields(&c, g).unwrap();
    let (r2, u2, v2) = initial_fields(&c, g).unwrap();
    assert_eq!((r1.data(), u1.component(2).data(), v1.component(0).data()), (r2.data(), u2.component(2).data(), v2.component(0).data()));
    c.initial.seed += 1;
    let (r3, _, _) = initial_fields(&c, g).unwrap();
    assert_ne!(r1.data(), r3.data());
    let s = initial_state(&c, &t).unwrap();
    let v: VectorField = s.ns.velocity(&t);
    let expected = c.initial.amplitude * c.initial.v_weight;
    assert!((v.max_magnitude() - expected).abs() < 1e-12 * expected.max(1.0));
    assert!(t.inverse(&divergence(&s.ns.vhat)).max_abs() < 1e-10);
    assert!((s.euler.rho.mean() - c.initial.rho_mean).abs() < c.initial.amplitude);
}

#[test]
fn non_fluid_phases_are_rejected_by_the_fluid_driver() {
    let mut c = base();
    c.phase = pens::config::Phase::Kinetic;
    assert!(run_fluid(&c, None).is_err());
}
