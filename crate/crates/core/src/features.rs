//! Feature selection, min-max scaling, supervised windowing and the
//! calendar split.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ArtistSeries;
use crate::matrix::Matrix;

pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// Daily plays only.
    Single,
    /// Daily plays, downloads and collects.
    Multi,
}

impl FeatureMode {
    pub fn width(self) -> usize {
        match self {
            FeatureMode::Single => 1,
            FeatureMode::Multi => 3,
        }
    }

    pub fn names(self) -> Vec<String> {
        let all = ["plays", "downloads", "collects"];
        all[..self.width()].iter().map(|s| s.to_string()).collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::Single => "single",
            FeatureMode::Multi => "multi",
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Self::Single),
            "multi" => Ok(Self::Multi),
            other => Err(Error::invalid(format!("unknown feature mode {other:?}"))),
        }
    }
}

/// Per-feature min-max scaler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub epsilon: f64,
}

impl Scaler {
    /// Fits on every row of `values`; degenerate columns get `max = min + epsilon`.
    pub fn fit(values: &Matrix, epsilon: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("cannot fit a scaler on zero rows"));
        }
        let mut min = vec![f64::INFINITY; values.cols()];
        let mut max = vec![f64::NEG_INFINITY; values.cols()];
        for row in values.iter_rows() {
            for (c, &v) in row.iter().enumerate() {
                min[c] = min[c].min(v);
                max[c] = max[c].max(v);
            }
        }
        for (lo, hi) in min.iter().zip(max.iter_mut()) {
            if *hi - *lo < epsilon {
                *hi = *lo + epsilon;
            }
        }
        Ok(Self { min, max, epsilon })
    }

    pub fn features(&self) -> usize {
        self.min.len()
    }

    fn check(&self, values: &Matrix) -> Result<()> {
        if values.cols() != self.features() {
            return Err(Error::shape(format!(
                "scaler fitted on {} features, got {}",
                self.features(),
                values.cols()
            )));
        }
        Ok(())
    }

    /// `(x - min) / (max - min)`, unclamped.
    pub fn scale(&self, values: &Matrix) -> Result<Matrix> {
        self.check(values)?;
        let mut out = values.clone();
        let cols = out.cols();
        for (i, v) in out.as_mut_slice().iter_mut().enumerate() {
            let c = i % cols;
            *v = (*v - self.min[c]) / (self.max[c] - self.min[c]);
        }
        Ok(out)
    }

    pub fn inverse_scale(&self, values: &Matrix) -> Result<Matrix> {
        self.check(values)?;
        let mut out = values.clone();
        let cols = out.cols();
        for (i, v) in out.as_mut_slice().iter_mut().enumerate() {
            let c = i % cols;
            *v = *v * (self.max[c] - self.min[c]) + self.min[c];
        }
        Ok(out)
    }
}

/// Daily feature matrix: one row per day, 1 or 3 columns.
pub fn select_features(series: &ArtistSeries, mode: FeatureMode) -> Matrix {
    let width = mode.width();
    let mut data = Vec::with_capacity(series.len() * width);
    for r in &series.rows {
        let all = [r.plays as f64, r.downloads as f64, r.collects as f64];
        data.extend_from_slice(&all[..width]);
    }
    if series.is_empty() {
        return Matrix::zeros(0, width);
    }
    Matrix::from_vec(series.len(), width, data).expect("width-consistent rows")
}

/// Fits a scaler on the first `train_days` days only.
pub fn fit_scaler(series: &ArtistSeries, mode: FeatureMode, train_days: usize) -> Result<Scaler> {
    fit_scaler_with(series, mode, train_days, DEFAULT_EPSILON)
}

pub fn fit_scaler_with(
    series: &ArtistSeries,
    mode: FeatureMode,
    train_days: usize,
    epsilon: f64,
) -> Result<Scaler> {
    if train_days < 2 {
        return Err(Error::invalid("scaler needs at least 2 training days"));
    }
    if train_days > series.len() {
        return Err(Error::invalid(format!(
            "train_days {train_days} exceeds series length {}",
            series.len()
        )));
    }
    let values = select_features(series, mode).slice_rows(0, train_days);
    Scaler::fit(&values, epsilon)
}

/// Supervised (input, target) pairs cut from one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedDataset {
    pub inputs: Vec<Matrix>,
    pub targets: Vec<Matrix>,
    pub p: usize,
    pub q: usize,
    pub feature_names: Vec<String>,
    pub scaler: Option<Scaler>,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn features(&self) -> usize {
        self.inputs.first().map_or(self.feature_names.len(), |m| m.cols())
    }

    pub fn with_scaler(mut self, scaler: Scaler) -> Self {
        self.scaler = Some(scaler);
        self
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Self {
        self.feature_names = names;
        self
    }
}

/// Unit-stride windows: pair `i` is rows `i..i+p` → rows `i+p..i+p+q`.
pub fn make_windows(series: &Matrix, p: usize, q: usize) -> Result<WindowedDataset> {
    if p == 0 || q == 0 {
        return Err(Error::invalid("window steps p and q must be at least 1"));
    }
    let n = series.rows();
    if n < p + q {
        return Err(Error::invalid(format!(
            "series of length {n} is shorter than p + q = {}",
            p + q
        )));
    }
    let count = n - p - q + 1;
    let (inputs, targets) = (0..count)
        .map(|i| (series.slice_rows(i, i + p), series.slice_rows(i + p, i + p + q)))
        .unzip();
    Ok(WindowedDataset {
        inputs,
        targets,
        p,
        q,
        feature_names: (0..series.cols()).map(|c| format!("f{c}")).collect(),
        scaler: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_days: usize,
    pub dev_days: usize,
    pub test_days: usize,
}

impl Default for SplitSpec {
    /// March to July as 122:31 train/dev, August (30 days) as test.
    fn default() -> Self {
        Self {
            train_days: 122,
            dev_days: 31,
            test_days: 30,
        }
    }
}

impl SplitSpec {
    pub fn total(&self) -> usize {
        self.train_days + self.dev_days + self.test_days
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: ArtistSeries,
    pub dev: ArtistSeries,
    pub test: ArtistSeries,
}

/// Contiguous train/dev/test segments in calendar order.
pub fn split_series(series: &ArtistSeries, spec: SplitSpec) -> Result<Split> {
    if spec.total() > series.len() {
        return Err(Error::invalid(format!(
            "split {}/{}/{} needs {} days, series has {}",
            spec.train_days,
            spec.dev_days,
            spec.test_days,
            spec.total(),
            series.len()
        )));
    }
    Ok(Split {
        train: series.segment(0, spec.train_days),
        dev: series.segment(spec.train_days, spec.dev_days),
        test: series.segment(spec.train_days + spec.dev_days, spec.test_days),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_date, DailyCounts};
    use proptest::prelude::*;

    fn series(plays: &[u64]) -> ArtistSeries {
        ArtistSeries {
            artist_id: "a".into(),
            start_date: parse_date("20150301").unwrap(),
            rows: plays.iter().map(|&p| DailyCounts::new(p, p / 10, p / 20)).collect(),
        }
    }

    #[test]
    fn scaler_fits_train_prefix() {
        let s = fit_scaler(&series(&[0, 5, 10, 100]), FeatureMode::Single, 3).unwrap();
        assert_eq!((s.min[0], s.max[0]), (0.0, 10.0));
    }

    #[test]
    fn degenerate_feature_gets_epsilon_range() {
        let s = fit_scaler(&series(&[7, 7, 7]), FeatureMode::Single, 3).unwrap();
        assert_eq!(s.min[0], 7.0);
        assert_eq!(s.max[0], 7.0 + 1e-6);
    }

    #[test]
    fn scaler_rejects_short_series() {
        assert!(fit_scaler(&series(&[1, 2, 3, 4, 5]), FeatureMode::Single, 10).is_err());
        assert!(fit_scaler(&series(&[1, 2, 3]), FeatureMode::Single, 1).is_err());
    }

    #[test]
    fn scale_and_inverse() {
        let s = Scaler {
            min: vec![0.0],
            max: vec![10.0],
            epsilon: DEFAULT_EPSILON,
        };
        let x = Matrix::column(&[0.0, 5.0, 10.0]);
        let scaled = s.scale(&x).unwrap();
        assert_eq!(scaled.as_slice(), &[0.0, 0.5, 1.0]);
        assert_eq!(s.inverse_scale(&scaled).unwrap(), x);
        assert_eq!(s.scale(&Matrix::column(&[20.0])).unwrap().as_slice(), &[2.0]);
        assert!(s.scale(&Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn windows_enumerate_pairs() {
        let x = Matrix::column(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let w = make_windows(&x, 2, 1).unwrap();
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = w
            .inputs
            .iter()
            .zip(&w.targets)
            .map(|(i, t)| (i.as_slice().to_vec(), t.as_slice().to_vec()))
            .collect();
        assert_eq!(
            pairs,
            vec![
                (vec![1.0, 2.0], vec![3.0]),
                (vec![2.0, 3.0], vec![4.0]),
                (vec![3.0, 4.0], vec![5.0]),
            ]
        );
        assert!(make_windows(&Matrix::column(&[1.0, 2.0, 3.0]), 2, 2).is_err());
        let tiny = make_windows(&Matrix::column(&[8.0, 9.0]), 1, 1).unwrap();
        assert_eq!(tiny.len(), 1);
        assert_eq!(tiny.inputs[0].as_slice(), &[8.0]);
        assert_eq!(tiny.targets[0].as_slice(), &[9.0]);
    }

    #[test]
    fn split_default_calendar() {
        let s = series(&vec![1; 183]);
        let split = split_series(&s, SplitSpec::default()).unwrap();
        assert_eq!((split.train.len(), split.dev.len(), split.test.len()), (122, 31, 30));
        assert_eq!(split.test.start_date, parse_date("20150801").unwrap());

        let whole = split_series(
            &s,
            SplitSpec {
                train_days: 183,
                dev_days: 0,
                test_days: 0,
            },
        )
        .unwrap();
        assert_eq!(whole.train, s);

        let over = SplitSpec {
            train_days: 100,
            dev_days: 100,
            test_days: 100,
        };
        assert!(split_series(&s, over).is_err());
    }

    #[test]
    fn select_single_and_multi() {
        let s = ArtistSeries {
            artist_id: "a".into(),
            start_date: parse_date("20150301").unwrap(),
            rows: vec![DailyCounts::new(2, 1, 0)],
        };
        assert_eq!(select_features(&s, FeatureMode::Single).as_slice(), &[2.0]);
        assert_eq!(select_features(&s, FeatureMode::Multi).as_slice(), &[2.0, 1.0, 0.0]);
        let empty = ArtistSeries { rows: vec![], ..s };
        assert!(select_features(&empty, FeatureMode::Multi).is_empty());
    }

    proptest! {
        #[test]
        fn scale_round_trips(values in prop::collection::vec(0.0f64..1e6, 2..60)) {
            let x = Matrix::column(&values);
            let s = Scaler::fit(&x, DEFAULT_EPSILON).unwrap();
            let back = s.inverse_scale(&s.scale(&x).unwrap()).unwrap();
            for (a, b) in back.as_slice().iter().zip(&values) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }

        #[test]
        fn targets_cover_series_tail(len in 3usize..40, p in 1usize..5, q in 1usize..5) {
            prop_assume!(len >= p + q);
            let values: Vec<f64> = (0..len).map(|i| i as f64 * 1.5).collect();
            let w = make_windows(&Matrix::column(&values), p, q).unwrap();
            // Stride-1 targets, de-duplicated: first row of each plus the tail of the last.
            let mut covered: Vec<f64> = w.targets.iter().map(|t| t.get(0, 0)).collect();
            covered.extend_from_slice(&w.targets.last().unwrap().as_slice()[1..]);
            prop_assert_eq!(&covered[..], &values[p..]);
            for (i, t) in w.inputs.iter().zip(&w.targets) {
                prop_assert_eq!(t.get(0, 0) - i.get(p - 1, 0), 1.5);
            }
        }

        #[test]
        fn split_partitions_prefix(train in 0usize..60, dev in 0usize..60, test in 0usize..60) {
            let s = series(&(0..183).collect::<Vec<u64>>());
            let spec = SplitSpec { train_days: train, dev_days: dev, test_days: test };
            let split = split_series(&s, spec).unwrap();
            let mut joined = split.train.rows.clone();
            joined.extend(split.dev.rows.iter().copied());
            joined.extend(split.test.rows.iter().copied());
            prop_assert_eq!(&joined[..], &s.rows[..spec.total()]);
        }
    }
}
