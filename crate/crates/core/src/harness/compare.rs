use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ModelKind, RunSettings};
use super::sweep::{
    baselines_path, best_baseline, load_artists, load_sweep, read_json, run_baselines, sweep_path, write_json,
    ArtistData, BaselineResult, SweepResult,
};
use crate::classical::{arima_forecast, select_arima_order, sma_forecast, ArimaOrder};
use crate::error::{Error, Result};
use crate::eval::{f_score, ArtistForecast, EvalReport};

pub const COLUMNS: [&str; 7] = ["ARIMA", "SMA", "LSTM-RPA", "LSTM", "BiLSTM", "GRU", "RNN"];
pub const METRICS: [&str; 3] = ["F score", "average error", "mean error variance"];
pub const SMA_WINDOWS: [usize; 4] = [3, 5, 7, 14];

pub const COMPARE_CSV: &str = "compare.csv";
pub const COMPARE_JSON: &str = "compare.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnResult {
    pub model: String,
    /// What was selected for this column, e.g. `p=3 l=1` or `k=7`.
    pub selection: String,
    pub report: Option<EvalReport>,
}

impl ColumnResult {
    fn metrics(&self) -> [Option<f64>; 3] {
        match &self.report {
            Some(r) => [Some(r.f_score), Some(r.average_error), Some(r.mean_error_variance)],
            None => [None; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub columns: Vec<ColumnResult>,
    /// Chosen ARIMA order per artist, in artist order.
    pub arima_orders: Vec<(String, String)>,
}

impl CompareReport {
    /// Scores ready-made forecasts, one list per column.
    pub fn from_forecasts(columns: Vec<(String, Vec<ArtistForecast>)>) -> Result<Self> {
        let columns = columns
            .into_iter()
            .map(|(model, forecasts)| {
                Ok(ColumnResult {
                    model,
                    selection: String::new(),
                    report: Some(f_score(&forecasts)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            columns,
            arima_orders: Vec::new(),
        })
    }

    pub fn column(&self, model: &str) -> Option<&ColumnResult> {
        self.columns.iter().find(|c| c.model == model)
    }

    /// Metric rows by model columns; failed columns are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.model);
        }
        out.push('\n');
        for (i, metric) in METRICS.iter().enumerate() {
            out.push_str(metric);
            for c in &self.columns {
                out.push(',');
                if let Some(v) = c.metrics()[i] {
                    write!(out, "{v}").expect("write to string");
                }
            }
            out.push('\n');
        }
        out
    }
}

fn forecasts_for(artists: &[ArtistData], settings: &RunSettings, preds: Vec<Vec<f64>>) -> Result<Vec<ArtistForecast>> {
    artists
        .iter()
        .zip(preds)
        .map(|(a, p)| ArtistForecast::new(&a.artist_id, p, a.actual(settings).to_vec()))
        .collect()
}

fn arima_column(artists: &[ArtistData], settings: &RunSettings) -> (ColumnResult, Vec<(String, String)>) {
    let fits: Vec<Result<(ArimaOrder, Vec<f64>)>> = artists
        .par_iter()
        .map(|a| {
            let history = a.history(settings);
            let sel = select_arima_order(history)?;
            Ok((sel.order, arima_forecast(&sel.model, history, settings.horizon)?))
        })
        .collect();
    let mut orders = Vec::new();
    let mut preds = Vec::new();
    for (a, fit) in artists.iter().zip(fits) {
        match fit {
            Ok((order, p)) => {
                orders.push((a.artist_id.clone(), order.to_string()));
                preds.push(p);
            }
            Err(e) => {
                warn!("ARIMA failed for artist {}: {e}", a.artist_id);
                orders.push((a.artist_id.clone(), String::new()));
            }
        }
    }
    let report = if preds.len() == artists.len() {
        forecasts_for(artists, settings, preds).and_then(|f| f_score(&f)).ok()
    } else {
        None
    };
    let column = ColumnResult {
        model: "ARIMA".into(),
        selection: "per-artist AIC".into(),
        report,
    };
    (column, orders)
}

fn sma_column(artists: &[ArtistData], settings: &RunSettings) -> Result<ColumnResult> {
    let mut best: Option<(usize, EvalReport)> = None;
    for k in SMA_WINDOWS {
        let preds = artists
            .iter()
            .map(|a| sma_forecast(a.history(settings), k, settings.horizon))
            .collect::<Result<Vec<_>>>()?;
        let report = f_score(&forecasts_for(artists, settings, preds)?)?;
        if best.as_ref().is_none_or(|(_, b)| report.f_score > b.f_score) {
            best = Some((k, report));
        }
    }
    let (k, report) = best.expect("at least one window");
    Ok(ColumnResult {
        model: "SMA".into(),
        selection: format!("k={k}"),
        report: Some(report),
    })
}

fn column_label(model: ModelKind) -> &'static str {
    match model {
        ModelKind::Lstm => "LSTM",
        ModelKind::Bilstm => "BiLSTM",
        ModelKind::Gru => "GRU",
        ModelKind::Rnn => "RNN",
        ModelKind::Arima => "ARIMA",
        ModelKind::Sma => "SMA",
    }
}

fn baseline_column(label: &str, baselines: &[BaselineResult]) -> ColumnResult {
    let best = best_baseline(baselines);
    ColumnResult {
        model: label.into(),
        selection: best.map_or_else(String::new, |b| format!("p={}", b.p)),
        report: best.and_then(|b| baselines.iter().find(|r| r.p == b.p)?.report.clone()),
    }
}

/// Baselines for a neural model: from its sweep when one exists, otherwise
/// trained here and cached as `baselines_<model>.json`.
fn baselines_for(out_dir: &Path, model: ModelKind, artists: &[ArtistData], settings: &RunSettings) -> Result<Vec<BaselineResult>> {
    if sweep_path(out_dir, model).exists() {
        let sweep = load_sweep(out_dir, model)?;
        if sweep.settings == *settings {
            return Ok(sweep.baselines);
        }
        warn!("sweep_{model}.json was run with other settings; retraining baselines");
    }
    let cache = baselines_path(out_dir, model);
    if cache.exists() {
        let (cached_settings, baselines): (RunSettings, Vec<BaselineResult>) = read_json(&cache)?;
        if cached_settings == *settings {
            return Ok(baselines);
        }
    }
    info!("training {model} baselines");
    let baselines = run_baselines(artists, settings, model)?;
    write_json(&cache, &(settings, &baselines))?;
    Ok(baselines)
}

/// Best LSTM rolling cell against ARIMA, SMA and the single-shot neural
/// baselines. Needs `sweep_lstm.json` in the output directory; the run
/// settings are taken from that sweep.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<CompareReport> {
    let sweep: SweepResult = load_sweep(&cfg.out_dir, ModelKind::Lstm)?;
    let run = ExperimentConfig {
        settings: sweep.settings.clone(),
        ..cfg.clone()
    };
    let (artists, _) = load_artists(&run)?;
    let ids: Vec<&str> = artists.iter().map(|a| a.artist_id.as_str()).collect();
    if ids != sweep.artists.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::invalid("dataset artists differ from the sweep's artists"));
    }
    let settings = &sweep.settings;

    let (arima, arima_orders) = arima_column(&artists, settings);
    let mut columns = vec![arima, sma_column(&artists, settings)?];
    columns.push(ColumnResult {
        model: "LSTM-RPA".into(),
        selection: sweep.best.map_or_else(String::new, |b| format!("p={} l={}", b.p, b.l)),
        report: sweep.best_report().cloned(),
    });
    columns.push(baseline_column("LSTM", &sweep.baselines));
    for model in [ModelKind::Bilstm, ModelKind::Gru, ModelKind::Rnn] {
        let baselines = baselines_for(&cfg.out_dir, model, &artists, settings)?;
        columns.push(baseline_column(column_label(model), &baselines));
    }
    let report = CompareReport { columns, arima_orders };
    write_outputs(&cfg.out_dir, &report)?;
    Ok(report)
}

pub fn write_outputs(out_dir: &Path, report: &CompareReport) -> Result<(PathBuf, PathBuf)> {
    let csv_path = out_dir.join(COMPARE_CSV);
    let json_path = out_dir.join(COMPARE_JSON);
    write_json(&json_path, report)?;
    fs::write(&csv_path, report.to_csv()).map_err(|e| Error::io(&csv_path, e))?;
    Ok((csv_path, json_path))
}
