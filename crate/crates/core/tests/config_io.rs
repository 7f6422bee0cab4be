use pens::config::{parse_config, RunConfig};
use pens::error::PensError;
use pens::io::{read_timeseries, table_csv, timeseries_csv, write_timeseries, Snapshot, Table, FLUID_MAGIC};
use pens::presets::{preset, PRESET_NAMES};
use pens::run::run_fluid;

const MINIMAL: &str = "[grid]\ndim = 2\nn = 16\nlength = 3\n\n[time]\nt_end = 0.5\n";

fn config_errors(text: &str) -> Vec<String> {
    match parse_config(text) {
        Err(PensError::Config(errors)) => errors.iter().map(|e| e.to_string()).collect(),
        other => panic!("expected configuration errors, got {other:?}"),
    }
}

#[test]
fn minimal_config_parses() {
    let c = parse_config(MINIMAL).unwrap();
    assert_eq!((c.grid.dim, c.grid.n, c.grid.length, c.time.t_end), (2, 16, 3.0, 0.5));
}

#[test]
fn out_of_range_cfl_names_the_value() {
    let errors = config_errors(&format!("{MINIMAL}cfl = 1.5\n"));
    assert_eq!(errors.len(), 1, "{errors:?}");
    assert!(errors[0].contains("time.cfl") && errors[0].contains("must lie in (0, 1], got 1.5"), "{errors:?}");
}

#[test]
fn duplicate_keys_report_both_lines() {
    let errors = config_errors("[grid]\ndim = 2\nn = 16\nlength = 3\ndim = 3\n[time]\nt_end = 1\n");
    assert_eq!(errors, vec!["line 5: grid.dim: duplicate key, first set on line 2, again on line 5".to_string()]);
}

#[test]
fn unknown_names_and_missing_keys_are_all_reported() {
    let errors = config_errors("[grid]\ndim = 2\nsize = 4\n[plots]\nx = 1\n");
    let joined = errors.join("\n");
    assert!(joined.contains("grid.size: unknown key"), "{joined}");
    assert!(joined.contains("[plots]: unknown section"), "{joined}");
    assert!(joined.contains("x: key outside a known section"), "{joined}");
    for key in ["grid.n", "grid.length", "time.t_end"] {
        assert!(joined.contains(&format!("{key}: missing required key")), "{joined}");
    }
}

#[test]
fn every_preset_validates_and_round_trips() {
    for name in PRESET_NAMES {
        let c = preset(name).unwrap();
        c.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_config(&c.dump()).unwrap(), c, "{name}");
    }
    assert!(preset("no-such-preset").is_none());
}

#[test]
fn overrides_apply_and_revalidate() {
    let c = RunConfig::default().with_overrides(&["time.t_end=2.5", "grid.n = 64"]).unwrap();
    assert_eq!((c.time.t_end, c.grid.n), (2.5, 64));
    assert!(RunConfig::default().with_overrides(&["time.cfl=0"]).is_err());
    assert!(RunConfig::default().with_overrides(&["time.nope=1"]).is_err());
    assert!(RunConfig::default().with_overrides(&["no equals sign"]).is_err());
}

fn small_run() -> RunConfig {
    let mut c = parse_config(MINIMAL).unwrap();
    c.time.t_end = 0.2;
    c.time.dt_max = 0.05;
    c
}

#[test]
fn timeseries_csv_is_reproducible_and_round_trips() {
    let c = small_run();
    let (a, b) = (run_fluid(&c, None).unwrap(), run_fluid(&c, None).unwrap());
    let bytes = timeseries_csv(&a.header, &a.records).unwrap();
    assert_eq!(bytes, timeseries_csv(&b.header, &b.records).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ts.csv");
    write_timeseries(&path, &a.header, &a.records).unwrap();
    let table = read_timeseries(&path).unwrap();
    assert_eq!(table.header, a.header);
    for (row, rec) in table.rows.iter().zip(&a.records) {
        assert_eq!(row, &rec.values());
    }
    let text = String::from_utf8(bytes).unwrap();
    let second = text.lines().nth(1).unwrap();
    assert!(second.split(',').nth(1) == Some("0"), "step column is an integer: {second}");

    let header_only = timeseries_csv(&a.header, &[]).unwrap();
    assert_eq!(String::from_utf8(header_only).unwrap().lines().count(), 1);

    let mut reversed = a.records.clone();
    reversed.reverse();
    assert!(timeseries_csv(&a.header, &reversed).is_err());
}

#[test]
fn table_rows_must_match_header() {
    let t = Table {
        header: vec!["t".into(), "x".into()],
        rows: vec![vec![0.0, 1.0], vec![1.0]],
    };
    let err = table_csv(&t).unwrap_err().to_string();
    assert!(err.contains("row 2 has 1 values for 2 columns"), "{err}");
}

#[test]
fn snapshot_round_trip_and_rejections() {
    let c = small_run();
    let run = run_fluid(&c, None).unwrap();
    let transform = pens::spectral::Transform::new(*run.last.grid());
    let snap = Snapshot::from_state(&transform, &run.last);
    let bytes = snap.to_bytes();
    assert_eq!(&bytes[..6], FLUID_MAGIC);
    assert_eq!(Snapshot::from_bytes(&bytes).unwrap(), snap);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.bin");
    snap.save(&path).unwrap();
    assert_eq!(Snapshot::load(&path).unwrap(), snap);

    let cut = bytes.len() - 5;
    match Snapshot::from_bytes(&bytes[..cut]) {
        Err(PensError::Snapshot { offset, detail }) => {
            assert_eq!(offset, cut);
            assert!(detail.contains("truncated"), "{detail}");
        }
        other => panic!("expected truncation error, got {other:?}"),
    }
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(Snapshot::from_bytes(&bad), Err(PensError::Snapshot { offset: 0, .. })));
    let mut long = bytes.clone();
    long.extend_from_slice(&[0, 0, 0]);
    match Snapshot::from_bytes(&long) {
        Err(PensError::Snapshot { offset, detail }) => {
            assert_eq!(offset, bytes.len());
            assert!(detail.contains("3 trailing bytes"), "{detail}");
        }
        other => panic!("expected trailing-bytes error, got {other:?}"),
    }
}
