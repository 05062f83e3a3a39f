use std::fs;
use std::path::Path;

use rollcast::eval::{phi, ArtistForecast};
use rollcast::harness::compare::CompareReport;
use rollcast::harness::sweep::{load_artists, sweep_path};
use rollcast::harness::{
    emit_figures, run_cell, run_compare, run_sweep, ExperimentConfig, ModelKind, StepRange, COLUMNS, METRICS,
};
use rollcast::synth::{emit_dataset, EmitOptions};
use rollcast::Error;

fn dataset(dir: &Path, artists: usize) {
    let opts = EmitOptions {
        silent_artists: vec![1],
        ..Default::default()
    };
    emit_dataset(artists, 183, 5, &dir.join("data"), &opts).unwrap();
}

fn test_config(dir: &Path, out: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        data_dir: dir.join("data"),
        out_dir: dir.join(out),
        ..Default::default()
    };
    cfg.settings.p_range = StepRange::new(2, 6).unwrap();
    cfg.settings.test_mode = true;
    cfg
}

#[test]
fn echo_sweep_fills_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path(), 8);
    let cfg = test_config(dir.path(), "a");
    let result = run_sweep(&cfg).unwrap();
    assert_eq!(result.artists.len(), 7);
    assert_eq!(result.dropped.len(), 1);
    assert_eq!(result.cells.len(), 1 + 2 + 3 + 4 + 5);
    for c in &result.cells {
        assert!(c.failures.is_empty());
        assert!(c.f_score.unwrap().is_finite());
    }
    assert_eq!(result.baselines.len(), 5);
    let best = result.best.unwrap();
    assert!(result.cells.iter().all(|c| c.f_score.unwrap() <= best.f_score));
}

#[test]
fn sweep_json_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path(), 6);
    run_sweep(&test_config(dir.path(), "a")).unwrap();
    run_sweep(&test_config(dir.path(), "b")).unwrap();
    let read = |o: &str| fs::read(sweep_path(&dir.path().join(o), ModelKind::Lstm)).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn best_cell_reproduces_in_isolation() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path(), 5);
    let mut cfg = test_config(dir.path(), "a");
    cfg.settings.test_mode = false;
    cfg.settings.p_range = StepRange::new(2, 3).unwrap();
    cfg.settings.train.max_epochs = 5;
    cfg.settings.train.patience = 5;
    let result = run_sweep(&cfg).unwrap();
    let best = result.best.unwrap();
    let (artists, _) = load_artists(&cfg).unwrap();
    let cell = run_cell(&artists, &cfg.settings, ModelKind::Lstm, best.p, best.l).unwrap();
    assert_eq!(cell.f_score, Some(best.f_score));
    assert_eq!(cell.report.as_ref(), result.best_report());
}

#[test]
fn compare_has_seven_columns_and_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path(), 5);
    let mut cfg = test_config(dir.path(), "a");
    cfg.settings.p_range = StepRange::new(2, 3).unwrap();
    run_sweep(&cfg).unwrap();
    let report = run_compare(&cfg).unwrap();
    let names: Vec<&str> = report.columns.iter().map(|c| c.model.as_str()).collect();
    assert_eq!(names, COLUMNS);
    let csv = fs::read_to_string(cfg.out_dir.join("compare.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + METRICS.len());
    assert_eq!(lines[0], "metric,ARIMA,SMA,LSTM-RPA,LSTM,BiLSTM,GRU,RNN");
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 8));

    let first = fs::read(cfg.out_dir.join("compare.json")).unwrap();
    run_compare(&cfg).unwrap();
    assert_eq!(first, fs::read(cfg.out_dir.join("compare.json")).unwrap());
}

#[test]
fn compare_without_sweep_is_a_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path(), 3);
    let err = run_compare(&test_config(dir.path(), "empty")).unwrap_err();
    assert!(matches!(err, Error::MissingArtifact(_)), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn perfect_forecasts_score_the_same_everywhere() {
    let actuals: Vec<(String, Vec<f64>)> = (0..4)
        .map(|a| (format!("artist{a}"), (0..30).map(|d| ((a * 7 + d) % 11 * 10) as f64).collect()))
        .collect();
    let columns = COLUMNS
        .iter()
        .map(|name| {
            let forecasts = actuals
                .iter()
                .map(|(id, y)| ArtistForecast::new(id, y.clone(), y.clone()).unwrap())
                .collect();
            (name.to_string(), forecasts)
        })
        .collect();
    let report = CompareReport::from_forecasts(columns).unwrap();
    let total: f64 = actuals.iter().map(|(_, y)| phi(y)).sum();
    for c in &report.columns {
        let r = c.report.as_ref().unwrap();
        assert!((r.f_score - total).abs() < 1e-9, "{}", c.model);
        assert_eq!(r.average_error, 0.0);
    }
}

#[test]
fn figures_follow_the_sweep_grid() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path(), 4);
    let mut cfg = test_config(dir.path(), "a");
    cfg.settings.p_range = StepRange::new(2, 3).unwrap();
    let result = run_sweep(&cfg).unwrap();
    let path = emit_figures(&result, &dir.path().join("fig")).unwrap();
    let csv = fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "time_step,l=1,l=2,baseline");
    assert!(lines[1].starts_with("2,") && lines[1].split(',').nth(2) == Some(""));
}
