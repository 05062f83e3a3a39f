use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ModelKind, RunSettings};
use crate::error::{Error, Result};
use crate::eval::{f_score, ArtistForecast, EvalReport};
use crate::features::{make_windows, select_features, fit_scaler, Scaler, WindowedDataset};
use crate::ingest::{load_dataset, ArtistSeries};
use crate::matrix::Matrix;
use crate::neural::{train, NetworkSpec, RecurrentKind, TrainConfig};
use crate::rpa::{baseline_forecast, roll_forecast, EchoUnit, Predictor, RollingConfig};
use crate::seeds;

/// One artist's series, scaled with a scaler fitted on the training days.
#[derive(Debug, Clone)]
pub struct ArtistData {
    pub artist_id: String,
    pub scaler: Scaler,
    pub scaled: Matrix,
    /// Raw daily plays over the whole range.
    pub plays: Vec<f64>,
}

impl ArtistData {
    pub fn prepare(series: &ArtistSeries, settings: &RunSettings) -> Result<Self> {
        if series.len() < settings.split.total() {
            return Err(Error::invalid(format!(
                "artist {} has {} days, split needs {}",
                series.artist_id,
                series.len(),
                settings.split.total()
            )));
        }
        let scaler = fit_scaler(series, settings.features, settings.split.train_days)?;
        let scaled = scaler.scale(&select_features(series, settings.features))?;
        Ok(Self {
            artist_id: series.artist_id.clone(),
            scaler,
            scaled,
            plays: series.plays(),
        })
    }

    fn observed(settings: &RunSettings) -> usize {
        settings.split.train_days + settings.split.dev_days
    }

    /// Raw plays before the test period (train and dev days).
    pub fn history(&self, settings: &RunSettings) -> &[f64] {
        &self.plays[..Self::observed(settings)]
    }

    /// Raw plays over the scored horizon.
    pub fn actual(&self, settings: &RunSettings) -> &[f64] {
        let start = Self::observed(settings);
        &self.plays[start..start + settings.horizon]
    }

    /// The last `p` scaled days before the test period.
    pub fn seed_window(&self, settings: &RunSettings, p: usize) -> Matrix {
        let end = Self::observed(settings);
        self.scaled.slice_rows(end - p, end)
    }

    /// Training windows lie inside the training days; dev windows have
    /// their targets inside the dev days and may look back into training.
    pub fn windows(&self, settings: &RunSettings, p: usize, q: usize) -> Result<(WindowedDataset, WindowedDataset)> {
        let train_days = settings.split.train_days;
        let train = make_windows(&self.scaled.slice_rows(0, train_days), p, q)?.with_scaler(self.scaler.clone());
        let dev_rows = self.scaled.slice_rows(train_days - p, Self::observed(settings));
        let dev = if settings.split.dev_days >= q {
            make_windows(&dev_rows, p, q)?
        } else {
            WindowedDataset {
                inputs: Vec::new(),
                targets: Vec::new(),
                p,
                q,
                feature_names: train.feature_names.clone(),
                scaler: None,
            }
        };
        let names = settings.features.names();
        Ok((train.with_feature_names(names.clone()), dev.with_feature_names(names)))
    }

    /// Play counts of a scaled forecast.
    pub fn unscale_plays(&self, forecast: &Matrix) -> Result<Vec<f64>> {
        Ok(self.scaler.inverse_scale(forecast)?.column_values(0))
    }
}

pub fn load_artists(cfg: &ExperimentConfig) -> Result<(Vec<ArtistData>, Vec<(String, u64)>)> {
    let s = &cfg.settings;
    let outcome = load_dataset(&cfg.data_dir, s.date_range()?, s.min_total_plays)?;
    for (id, total) in &outcome.dropped {
        info!("dropping artist {id} with {total} total plays");
    }
    if outcome.kept.is_empty() {
        return Err(Error::invalid("no artist passes the plays threshold"));
    }
    let data = outcome
        .kept
        .iter()
        .map(|series| ArtistData::prepare(series, s))
        .collect::<Result<Vec<_>>>()?;
    Ok((data, outcome.dropped))
}

/// Seed of the unit for `(artist, model, p, q)`; independent of run order.
pub fn unit_seed(master: u64, artist_id: &str, model: ModelKind, p: usize, q: usize) -> u64 {
    seeds::derive(master, &[seeds::fnv1a(artist_id), model.seed_tag(), p as u64, q as u64])
}

/// A trained network or, in test mode, an echo unit.
pub fn build_unit(
    data: &ArtistData,
    settings: &RunSettings,
    kind: RecurrentKind,
    model: ModelKind,
    p: usize,
    q: usize,
) -> Result<Box<dyn Predictor + Send + Sync>> {
    let features = settings.features.width();
    if settings.test_mode {
        return Ok(Box::new(EchoUnit { p, q, features }));
    }
    let (train_set, dev_set) = data.windows(settings, p, q)?;
    let cfg = TrainConfig {
        seed: unit_seed(settings.seed, &data.artist_id, model, p, q),
        ..settings.train.clone()
    };
    let spec = NetworkSpec::for_mode(settings.features, kind, p, q);
    Ok(Box::new(train(spec, &train_set, &dev_set, &cfg)?))
}

fn neural_kind(model: ModelKind) -> Result<RecurrentKind> {
    model
        .recurrent()
        .ok_or_else(|| Error::invalid(format!("{model} has no (p, l) grid; sweep a neural model")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub artist_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub p: usize,
    pub l: usize,
    pub q: usize,
    /// `None` when any artist failed.
    pub f_score: Option<f64>,
    pub report: Option<EvalReport>,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub p: usize,
    pub f_score: Option<f64>,
    pub report: Option<EvalReport>,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestCell {
    pub p: usize,
    pub l: usize,
    pub f_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestBaseline {
    pub p: usize,
    pub f_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: ModelKind,
    pub settings: RunSettings,
    pub artists: Vec<String>,
    pub dropped: Vec<(String, u64)>,
    pub cells: Vec<CellResult>,
    /// Single-shot `q = horizon` units, one per time step.
    pub baselines: Vec<BaselineResult>,
    pub best: Option<BestCell>,
    pub best_baseline: Option<BestBaseline>,
}

impl SweepResult {
    pub fn cell(&self, p: usize, l: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.p == p && c.l == l)
    }

    pub fn best_report(&self) -> Option<&EvalReport> {
        let b = self.best?;
        self.cell(b.p, b.l)?.report.as_ref()
    }

    pub fn best_baseline_report(&self) -> Option<&EvalReport> {
        let b = self.best_baseline?;
        self.baselines.iter().find(|r| r.p == b.p)?.report.as_ref()
    }
}

pub fn sweep_path(out_dir: &Path, model: ModelKind) -> PathBuf {
    out_dir.join(format!("sweep_{model}.json"))
}

pub fn baselines_path(out_dir: &Path, model: ModelKind) -> PathBuf {
    out_dir.join(format!("baselines_{model}.json"))
}

type Outcome = std::result::Result<Vec<f64>, String>;

/// Per-artist forecasts keyed by `(p, l)`.
fn rolling_forecasts(data: &ArtistData, settings: &RunSettings, model: ModelKind, kind: RecurrentKind) -> BTreeMap<(usize, usize), Outcome> {
    let mut out = BTreeMap::new();
    let grid = settings.grid();
    let mut p_values: Vec<usize> = grid.iter().map(|&(p, _)| p).collect();
    p_values.dedup();
    for p in p_values {
        let q = settings.q_for(p);
        let unit = build_unit(data, settings, kind, model, p, q);
        if let Err(e) = &unit {
            warn!("{model} p={p} q={q} artist {}: {e}", data.artist_id);
        }
        let seed = data.seed_window(settings, p);
        for &(_, l) in grid.iter().filter(|(gp, _)| *gp == p) {
            let result = unit.as_ref().map_err(|e| e.to_string()).and_then(|u| {
                let cfg = RollingConfig::new(p, q, l, settings.horizon).map_err(|e| e.to_string())?;
                let forecast = roll_forecast(u.as_ref(), &seed, &cfg).map_err(|e| e.to_string())?;
                data.unscale_plays(&forecast).map_err(|e| e.to_string())
            });
            out.insert((p, l), result);
        }
    }
    out
}

fn baseline_forecasts(data: &ArtistData, settings: &RunSettings, model: ModelKind, kind: RecurrentKind) -> BTreeMap<usize, Outcome> {
    settings
        .p_range
        .values()
        .map(|p| {
            let result = build_unit(data, settings, kind, model, p, settings.horizon)
                .and_then(|u| baseline_forecast(u.as_ref(), &data.seed_window(settings, p), settings.horizon))
                .and_then(|f| data.unscale_plays(&f))
                .map_err(|e| {
                    warn!("{model} baseline p={p} artist {}: {e}", data.artist_id);
                    e.to_string()
                });
            (p, result)
        })
        .collect()
}

/// Scores one grid cell jointly over all artists; any failure fails the cell.
fn score_cell(artists: &[ArtistData], settings: &RunSettings, outcomes: Vec<&Outcome>) -> (Option<EvalReport>, Vec<CellFailure>) {
    let mut forecasts = Vec::with_capacity(artists.len());
    let mut failures = Vec::new();
    for (data, outcome) in artists.iter().zip(outcomes) {
        match outcome {
            Ok(pred) => match ArtistForecast::new(&data.artist_id, pred.clone(), data.actual(settings).to_vec()) {
                Ok(f) => forecasts.push(f),
                Err(e) => failures.push(CellFailure {
                    artist_id: data.artist_id.clone(),
                    reason: e.to_string(),
                }),
            },
            Err(reason) => failures.push(CellFailure {
                artist_id: data.artist_id.clone(),
                reason: reason.clone(),
            }),
        }
    }
    if !failures.is_empty() {
        return (None, failures);
    }
    match f_score(&forecasts) {
        Ok(report) => (Some(report), failures),
        Err(e) => (
            None,
            vec![CellFailure {
                artist_id: String::new(),
                reason: e.to_string(),
            }],
        ),
    }
}

/// Single-shot baselines for `model`, scored per time step.
pub fn run_baselines(artists: &[ArtistData], settings: &RunSettings, model: ModelKind) -> Result<Vec<BaselineResult>> {
    let kind = neural_kind(model)?;
    let per_artist: Vec<BTreeMap<usize, Outcome>> = artists
        .par_iter()
        .map(|data| baseline_forecasts(data, settings, model, kind))
        .collect();
    Ok(settings
        .p_range
        .values()
        .map(|p| {
            let (report, failures) = score_cell(artists, settings, per_artist.iter().map(|m| &m[&p]).collect());
            BaselineResult {
                p,
                f_score: report.as_ref().map(|r| r.f_score),
                report,
                failures,
            }
        })
        .collect())
}

pub fn best_baseline(baselines: &[BaselineResult]) -> Option<BestBaseline> {
    baselines
        .iter()
        .filter_map(|b| b.f_score.map(|f| BestBaseline { p: b.p, f_score: f }))
        .fold(None, |best: Option<BestBaseline>, b| match best {
            Some(x) if x.f_score >= b.f_score => Some(x),
            _ => Some(b),
        })
}

fn best_cell(cells: &[CellResult]) -> Option<BestCell> {
    cells
        .iter()
        .filter_map(|c| c.f_score.map(|f| BestCell { p: c.p, l: c.l, f_score: f }))
        .fold(None, |best: Option<BestCell>, c| match best {
            Some(x) if x.f_score >= c.f_score => Some(x),
            _ => Some(c),
        })
}

/// Trains and scores every `(p, l)` cell plus the single-shot baselines.
/// Artists run in parallel; results are assembled in artist order.
pub fn sweep_artists(artists: &[ArtistData], settings: &RunSettings, model: ModelKind) -> Result<SweepResult> {
    settings.validate()?;
    let kind = neural_kind(model)?;
    let per_artist: Vec<BTreeMap<(usize, usize), Outcome>> = artists
        .par_iter()
        .map(|data| rolling_forecasts(data, settings, model, kind))
        .collect();
    let cells: Vec<CellResult> = settings
        .grid()
        .into_iter()
        .map(|(p, l)| {
            let (report, failures) = score_cell(artists, settings, per_artist.iter().map(|m| &m[&(p, l)]).collect());
            if !failures.is_empty() {
                warn!("cell p={p} l={l} failed for {} artist(s)", failures.len());
            }
            CellResult {
                p,
                l,
                q: settings.q_for(p),
                f_score: report.as_ref().map(|r| r.f_score),
                report,
                failures,
            }
        })
        .collect();
    let baselines = run_baselines(artists, settings, model)?;
    Ok(SweepResult {
        model,
        settings: settings.clone(),
        artists: artists.iter().map(|a| a.artist_id.clone()).collect(),
        dropped: Vec::new(),
        best: best_cell(&cells),
        best_baseline: best_baseline(&baselines),
        cells,
        baselines,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&raw)?)
}

/// Loads the dataset, sweeps `cfg.model` and writes `sweep_<model>.json`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let (artists, dropped) = load_artists(cfg)?;
    info!("sweeping {} over {} artists, grid {:?}", cfg.model, artists.len(), cfg.settings.grid());
    let mut result = sweep_artists(&artists, &cfg.settings, cfg.model)?;
    result.dropped = dropped;
    write_json(&sweep_path(&cfg.out_dir, cfg.model), &result)?;
    Ok(result)
}

pub fn load_sweep(out_dir: &Path, model: ModelKind) -> Result<SweepResult> {
    read_json(&sweep_path(out_dir, model))
}

/// Re-runs one `(p, l)` cell on its own.
pub fn run_cell(artists: &[ArtistData], settings: &RunSettings, model: ModelKind, p: usize, l: usize) -> Result<CellResult> {
    let kind = neural_kind(model)?;
    let single = RunSettings {
        p_range: super::config::StepRange::new(p, p)?,
        l_range: Some(super::config::StepRange::new(l, l)?),
        ..settings.clone()
    };
    single.validate()?;
    let per_artist: Vec<_> = artists
        .par_iter()
        .map(|data| rolling_forecasts(data, &single, model, kind))
        .collect();
    let (report, failures) = score_cell(artists, &single, per_artist.iter().map(|m| &m[&(p, l)]).collect());
    Ok(CellResult {
        p,
        l,
        q: single.q_for(p),
        f_score: report.as_ref().map(|r| r.f_score),
        report,
        failures,
    })
}
