use std::fs;

use modfold::experiments::{parse_config, plan, render_plotdata, run, ExperimentKind, MANIFEST_FILE};
use modfold::Error;

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn decay_curve_residual_strictly_decreasing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(r#"{"kind": "decay_curve"}"#, None).unwrap();
    let m = run(&cfg, dir.path()).unwrap();
    let csv = fs::read_to_string(dir.path().join("decay.csv")).unwrap();
    assert!(csv.starts_with("N,sample_norm,residual,bound\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 30);
    assert!(r.windows(2).all(|w| w[1][2] < w[0][2]));
    assert!(r.iter().all(|row| row[2] <= row[3]));
    for n in [4, 6, 8] {
        assert!(m.outputs.iter().any(|o| o.path == format!("panel_N{n}.csv")));
    }
    assert!(m.outputs.iter().all(|o| o.bytes > 0));
    assert!(dir.path().join(MANIFEST_FILE).exists());
}

#[test]
fn panel_samples_sit_near_integers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(r#"{"n_max": 8, "panels": [8]}"#, Some(ExperimentKind::DecayCurve)).unwrap();
    run(&cfg, dir.path()).unwrap();
    let r = rows(&fs::read_to_string(dir.path().join("panel_N8_samples.csv")).unwrap());
    // f_8 has samples within 0.1 of the binomial integers on 0.7Z
    assert!(r.iter().all(|row| (row[1] - row[1].round()).abs() < 0.1));
    assert!(r.iter().filter(|row| row[3] == 1.0).count() >= r.len() / 2);
}

#[test]
fn witness_meets_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(r#"{"alpha": 0.7, "lambda": 0.5, "target": 1e-3, "floor": 1.0}"#, Some(ExperimentKind::Witness)).unwrap();
    run(&cfg, dir.path()).unwrap();
    let w: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("witness.json")).unwrap()).unwrap();
    assert!(w["certificate"]["folded_norm"].as_f64().unwrap() < 1e-3);
    assert!(w["certificate"]["energy"].as_f64().unwrap() > 1.0);
    assert!(w["certificate"]["N"].as_u64().unwrap() <= 60);
}

#[test]
fn spectrum_plot_is_linear() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(r#"{"sizes": [16, 32]}"#, Some(ExperimentKind::ProlateSpectrum)).unwrap();
    run(&cfg, dir.path()).unwrap();
    let p = render_plotdata(&dir.path().join("spectrum_N32.csv")).unwrap();
    assert!(!p.log_y);
    assert_eq!(p.x.name, "k");
    assert_eq!(p.series.len(), 1);
    assert_eq!(p.series[0].values.len(), 32);
}

#[test]
fn plotdata_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    assert!(matches!(render_plotdata(&empty), Err(Error::Usage(_))));
    let header_only = dir.path().join("h.csv");
    fs::write(&header_only, "k,mu_k\n").unwrap();
    assert!(matches!(render_plotdata(&header_only), Err(Error::Usage(_))));
    let ragged = dir.path().join("r.csv");
    fs::write(&ragged, "k,mu_k\n1,2,3\n").unwrap();
    assert!(matches!(render_plotdata(&ragged), Err(Error::Usage(_))));
}

#[test]
fn schema_errors_carry_field_paths() {
    let e = parse_config(r#"{"kind": "svp_compare", "alphas": [0.6, "x"]}"#, None).unwrap_err();
    assert!(e.to_string().contains("alphas[1]"), "{e}");
    let e = parse_config(r#"{"kind": "svp_compare", "alphas": [0.6, 1.5]}"#, None).unwrap_err();
    assert!(e.to_string().contains("alphas[1]"), "{e}");
    let e = parse_config(r#"{"kind": "unfold_demo", "x": {"alpha": 0.5, "range": [0, 10]}, "jitter": 0.3}"#, None).unwrap_err();
    assert!(e.to_string().contains("jitter"), "{e}");
    let e = parse_config(r#"{"kind": "nope"}"#, None).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn plan_lists_stages_without_running() {
    let cfg = parse_config(r#"{"trials": 5}"#, Some(ExperimentKind::UnfoldDemo)).unwrap();
    let stages = plan(&cfg).unwrap();
    assert_eq!(stages.len(), 2);
}

#[test]
fn every_kind_runs_with_defaults() {
    for kind in ExperimentKind::ALL {
        let cfg = parse_config("{}", Some(kind)).unwrap();
        assert_eq!(cfg.kind(), kind);
        assert!(!plan(&cfg).unwrap().is_empty());
    }
}
