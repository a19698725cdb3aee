use kerr_core::fv::Solver;
use kerr_core::scenarios::{
    contact_family, quadrant2d, riemann1d, run_scenario, FieldSpec, InitialData, ScenarioConfig, SnapshotData,
};
use kerr_core::KerrError;

fn small_riemann() -> ScenarioConfig {
    let mut cfg = riemann1d(60, Solver::Godunov66);
    cfg.outputs.snapshot_times_s = vec![0.0, 5e-15];
    cfg.outputs.chi_column = true;
    cfg
}

#[test]
fn written_outputs_are_byte_identical_across_runs() {
    let cfg = small_riemann();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_scenario(&cfg).unwrap().write_to_dir(a.path()).unwrap();
    run_scenario(&cfg).unwrap().write_to_dir(b.path()).unwrap();
    for name in ["snapshot_0.csv", "snapshot_1.csv", "final.csv", "metadata.json"] {
        let (x, y) = (
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
        );
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn metadata_echoes_config_and_both_magnetic_units() {
    let cfg = small_riemann();
    let dir = tempfile::tempdir().unwrap();
    let run = run_scenario(&cfg).unwrap();
    run.write_to_dir(dir.path()).unwrap();
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metadata.json")).unwrap()).unwrap();
    let back: ScenarioConfig = serde_json::from_value(meta["config"].clone()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(meta["steps"], 100);
    assert!((meta["dt_s"].as_f64().unwrap() * 100.0 - 10e-15).abs() < 1e-27);
    assert!(meta["build_id"].as_str().unwrap().starts_with("kerr-core-"));
    // B = 3 T on the left, H = 3/μ0 A/m
    let h3 = meta["initial_states_si"][0]["h"]["z"].as_f64().unwrap();
    assert!((h3 * cfg.material.mu0() - 3.0).abs() < 1e-12);
    let header = std::fs::read_to_string(dir.path().join("final.csv")).unwrap();
    assert!(header
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("x,D1,D2,D3,H1,H2,H3,B1,B2,B3,chi"));
}

#[test]
fn snapshots_are_taken_at_requested_times() {
    let run = run_scenario(&small_riemann()).unwrap();
    let times: Vec<f64> = run.snapshots.iter().map(|s| s.time_s).collect();
    assert_eq!(times.len(), 3);
    assert_eq!(times[0], 0.0);
    let dt = run.metadata.dt_s;
    assert!((times[1] - 5e-15).abs() <= 0.5 * dt + 1e-30);
    assert_eq!(times[2], 10e-15);
}

#[test]
fn read_back_snapshot_matches_field() {
    let cfg = quadrant2d(12, Solver::GodunovTm).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let run = run_scenario(&cfg).unwrap();
    run.write_to_dir(dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("final.csv")).unwrap();
    let parsed = SnapshotData::parse_csv(&text).unwrap();
    let direct = SnapshotData::from_field(run.final_field(), &run.grid);
    assert_eq!(parsed.coords.len(), 144);
    for (p, q) in parsed.values.iter().zip(&direct.values) {
        for k in 0..6 {
            assert!((p[k] - q[k]).abs() <= 1e-15 * q[k].abs());
        }
    }
    assert!(dir.path().join("divergence.csv").exists());
}

#[test]
fn blow_up_keeps_last_good_state() {
    let mut cfg = contact_family(4, 20, Solver::Godunov66);
    cfg.initial_data = InitialData::Riemann {
        left: FieldSpec {
            d: [0.0, 1e300, 0.0],
            b_tesla: [0.0, 0.0, 1e300],
        },
        right: FieldSpec {
            d: [0.0, -1e300, 0.0],
            b_tesla: [0.0, 0.0, -1e300],
        },
        interface_x_m: 0.0,
    };
    let run = match run_scenario(&cfg) {
        Ok(run) => run,
        Err(e) => panic!("expected artifacts with a failure record, got {e}"),
    };
    let (snap, err) = run.failure.as_ref().expect("run should blow up");
    assert!(matches!(err, KerrError::BlowUp { .. }), "{err}");
    assert!(snap.field.interior().all(|(_, _, u)| u.is_finite()));
    let dir = tempfile::tempdir().unwrap();
    run.write_to_dir(dir.path()).unwrap();
    assert!(dir.path().join("last_good.csv").exists());
}
