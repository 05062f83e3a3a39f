use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMode, SplitSpec};
use crate::ingest::DateRange;
use crate::neural::{RecurrentKind, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lstm,
    Bilstm,
    Gru,
    Rnn,
    Arima,
    Sma,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lstm => "lstm",
            Self::Bilstm => "bilstm",
            Self::Gru => "gru",
            Self::Rnn => "rnn",
            Self::Arima => "arima",
            Self::Sma => "sma",
        }
    }

    pub fn recurrent(self) -> Option<RecurrentKind> {
        match self {
            Self::Lstm => Some(RecurrentKind::Lstm),
            Self::Bilstm => Some(RecurrentKind::Bilstm),
            Self::Gru => Some(RecurrentKind::Gru),
            Self::Rnn => Some(RecurrentKind::Rnn),
            Self::Arima | Self::Sma => None,
        }
    }

    pub(crate) fn seed_tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "lstm" => Self::Lstm,
            "bilstm" => Self::Bilstm,
            "gru" => Self::Gru,
            "rnn" => Self::Rnn,
            "arima" => Self::Arima,
            "sma" => Self::Sma,
            other => return Err(Error::invalid(format!("unknown model {other:?}"))),
        })
    }
}

/// Inclusive integer range, written `lo..hi` or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRange {
    pub min: usize,
    pub max: usize,
}

impl StepRange {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min > max {
            return Err(Error::invalid(format!("empty range {min}..{max}")));
        }
        Ok(Self { min, max })
    }

    pub fn values(&self) -> impl Iterator<Item = usize> {
        self.min..=self.max
    }

    pub fn contains(&self, v: usize) -> bool {
        (self.min..=self.max).contains(&v)
    }
}

impl fmt::Display for StepRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.min, self.max)
    }
}

impl FromStr for StepRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad range {s:?}, expected LO..HI")))
        };
        match s.split_once("..").or_else(|| s.split_once('-')) {
            Some((lo, hi)) => Self::new(num(lo)?, num(hi.trim_start_matches('='))?),
            None => {
                let v = num(s)?;
                Self::new(v, v)
            }
        }
    }
}

/// Everything a run depends on except file locations. Stored inside sweep
/// results so later stages reuse the same settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSettings {
    pub features: FeatureMode,
    pub p_range: StepRange,
    /// Rolling steps to try; `None` means every `l` in `1..p`.
    pub l_range: Option<StepRange>,
    /// Output steps of the rolling units; `None` means `q = p`.
    pub q: Option<usize>,
    pub horizon: usize,
    pub split: SplitSpec,
    pub train: TrainConfig,
    pub seed: u64,
    pub min_total_plays: u64,
    #[serde(with = "crate::ingest::ymd")]
    pub start_date: NaiveDate,
    pub days: usize,
    /// Replace trained networks by echo units.
    pub test_mode: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            features: FeatureMode::Single,
            p_range: StepRange { min: 2, max: 7 },
            l_range: None,
            q: None,
            horizon: 30,
            split: SplitSpec::default(),
            train: TrainConfig::default(),
            seed: 42,
            min_total_plays: 1,
            start_date: NaiveDate::from_ymd_opt(2015, 3, 1).expect("valid date"),
            days: 183,
            test_mode: false,
        }
    }
}

impl RunSettings {
    pub fn q_for(&self, p: usize) -> usize {
        self.q.unwrap_or(p)
    }

    /// The `(p, l)` grid: every pair allowed by the ranges that also obeys
    /// `1 ≤ l < p` and `p − l ≤ q`.
    pub fn grid(&self) -> Vec<(usize, usize)> {
        self.p_range
            .values()
            .flat_map(|p| {
                let q = self.q_for(p);
                (1..p)
                    .filter(move |&l| self.l_range.is_none_or(|r| r.contains(l)) && p - l <= q)
                    .map(move |l| (p, l))
            })
            .collect()
    }

    pub fn date_range(&self) -> Result<DateRange> {
        DateRange::from_start(self.start_date, self.days)
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.p_range.min < 2 {
            return Err(Error::invalid("time step p must be at least 2"));
        }
        if self.horizon == 0 || self.horizon > self.split.test_days {
            return Err(Error::invalid(format!(
                "horizon {} must lie in 1..={} (test days)",
                self.horizon, self.split.test_days
            )));
        }
        if self.split.total() > self.days {
            return Err(Error::invalid(format!(
                "split needs {} days, range has {}",
                self.split.total(),
                self.days
            )));
        }
        if self.p_range.max + self.horizon > self.split.train_days {
            return Err(Error::invalid("training segment too short for the largest p and the horizon"));
        }
        if self.p_range.max > self.split.train_days + self.split.dev_days {
            return Err(Error::invalid("p exceeds the observed history"));
        }
        if self.q == Some(0) {
            return Err(Error::invalid("q must be at least 1"));
        }
        if self.grid().is_empty() {
            return Err(Error::invalid("no (p, l) pair satisfies 1 <= l < p and p - l <= q"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub model: ModelKind,
    #[serde(flatten)]
    pub settings: RunSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            model: ModelKind::Lstm,
            settings: RunSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&raw)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.settings.validate()
    }
}
