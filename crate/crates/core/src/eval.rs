//! Competition F score and auxiliary error statistics.
//!
//! For artist `a` over `N` days with predictions `X` and actuals `Y`:
//!
//! - `σ_a = sqrt(mean(((X − Y) / Y)²))`, with `Y = 0` floored to 1 in the
//!   denominator
//! - `φ_a = sqrt(ΣY)`
//! - `F = Σ_a max(0, 1 − σ_a) · φ_a`
//!
//! Before scoring, predictions are clamped at zero and rounded to whole plays.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtistForecast {
    pub artist_id: String,
    pub predicted: Vec<f64>,
    pub actual: Vec<f64>,
}

impl ArtistForecast {
    pub fn new(artist_id: impl Into<String>, predicted: Vec<f64>, actual: Vec<f64>) -> Result<Self> {
        let f = Self {
            artist_id: artist_id.into(),
            predicted,
            actual,
        };
        f.check()?;
        Ok(f)
    }

    fn check(&self) -> Result<()> {
        if self.predicted.len() != self.actual.len() {
            return Err(Error::shape(format!(
                "artist {}: {} predictions for {} actual days",
                self.artist_id,
                self.predicted.len(),
                self.actual.len()
            )));
        }
        Ok(())
    }

    pub fn days(&self) -> usize {
        self.actual.len()
    }
}

/// Root-mean-square relative error of one artist's forecast.
pub fn sigma(forecast: &ArtistForecast) -> Result<f64> {
    forecast.check()?;
    let n = forecast.days();
    if n == 0 {
        return Err(Error::invalid(format!("artist {} has no evaluated days", forecast.artist_id)));
    }
    let sum: f64 = forecast
        .predicted
        .iter()
        .zip(&forecast.actual)
        .map(|(x, y)| {
            let denom = if *y == 0.0 { 1.0 } else { *y };
            ((x - y) / denom).powi(2)
        })
        .sum();
    Ok((sum / n as f64).sqrt())
}

/// Artist weight: square root of total actual plays.
pub fn phi(actual: &[f64]) -> f64 {
    actual.iter().sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtistScore {
    pub artist_id: String,
    pub sigma: f64,
    pub phi: f64,
    /// `max(0, 1 − σ) · φ`.
    pub contribution: f64,
    /// Mean absolute daily error.
    pub mean_abs_error: f64,
    /// Predictions that were negative and clamped to zero.
    pub clamped_days: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Sorted by artist id.
    pub artists: Vec<ArtistScore>,
    pub f_score: f64,
    /// Mean over artists of the per-artist mean absolute daily error.
    pub average_error: f64,
    /// Population variance over artists of the same quantity.
    pub mean_error_variance: f64,
    pub horizon: usize,
    pub clamped_days: usize,
}

/// Clamps predictions at zero and rounds them; returns the number clamped.
pub fn prepare_predictions(predicted: &[f64]) -> (Vec<f64>, usize) {
    let mut clamped = 0;
    let out = predicted
        .iter()
        .map(|&x| {
            if x < 0.0 {
                clamped += 1;
                0.0
            } else {
                x.round()
            }
        })
        .collect();
    (out, clamped)
}

fn mean_abs_error(f: &ArtistForecast) -> f64 {
    if f.days() == 0 {
        return 0.0;
    }
    f.predicted.iter().zip(&f.actual).map(|(x, y)| (x - y).abs()).sum::<f64>() / f.days() as f64
}

/// Mean and population variance over artists of the mean absolute daily error.
pub fn error_stats(forecasts: &[ArtistForecast]) -> (f64, f64) {
    if forecasts.is_empty() {
        return (0.0, 0.0);
    }
    let errors: Vec<f64> = forecasts.iter().map(mean_abs_error).collect();
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Scores every artist over a common horizon.
pub fn f_score(forecasts: &[ArtistForecast]) -> Result<EvalReport> {
    let horizon = forecasts.first().map_or(0, ArtistForecast::days);
    let mut prepared = Vec::with_capacity(forecasts.len());
    let mut clamps = Vec::with_capacity(forecasts.len());
    for f in forecasts {
        f.check()?;
        if f.days() != horizon {
            return Err(Error::invalid(format!(
                "artist {} evaluated over {} days, others over {horizon}",
                f.artist_id,
                f.days()
            )));
        }
        let (predicted, clamped) = prepare_predictions(&f.predicted);
        prepared.push(ArtistForecast {
            artist_id: f.artist_id.clone(),
            predicted,
            actual: f.actual.clone(),
        });
        clamps.push(clamped);
    }
    let mut artists = prepared
        .iter()
        .zip(&clamps)
        .map(|(f, &clamped_days)| {
            let s = sigma(f)?;
            let w = phi(&f.actual);
            Ok(ArtistScore {
                artist_id: f.artist_id.clone(),
                sigma: s,
                phi: w,
                contribution: (1.0 - s).max(0.0) * w,
                mean_abs_error: mean_abs_error(f),
                clamped_days,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    artists.sort_by(|a, b| a.artist_id.cmp(&b.artist_id));
    let (average_error, mean_error_variance) = error_stats(&prepared);
    Ok(EvalReport {
        f_score: artists.iter().map(|a| a.contribution).sum(),
        average_error,
        mean_error_variance,
        horizon,
        clamped_days: clamps.iter().sum(),
        artists,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fc(id: &str, x: &[f64], y: &[f64]) -> ArtistForecast {
        ArtistForecast::new(id, x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn sigma_cases() {
        assert_eq!(sigma(&fc("a", &[5.0, 9.0], &[5.0, 9.0])).unwrap(), 0.0);
        assert!((sigma(&fc("a", &[110.0, 90.0], &[100.0, 100.0])).unwrap() - 0.1).abs() < 1e-12);
        // zero actual floored to 1: ((2 - 0) / 1)² and 0
        let s = sigma(&fc("a", &[2.0, 100.0], &[0.0, 100.0])).unwrap();
        assert!((s - 2.0f64.sqrt()).abs() < 1e-12);
        assert!(sigma(&fc("a", &[], &[])).is_err());
    }

    #[test]
    fn phi_cases() {
        assert!((phi(&[100.0, 100.0]) - 14.142_135_623_730_951).abs() < 1e-12);
        assert_eq!(phi(&[0.0, 0.0]), 0.0);
        assert_eq!(phi(&[1.0]), 1.0);
    }

    #[test]
    fn negative_contribution_is_clipped() {
        // σ = 3 exactly: X = 4·Y
        let r = f_score(&[fc("a", &[400.0, 400.0], &[100.0, 100.0]), fc("b", &[50.0], &[50.0])]);
        assert!(r.is_err(), "horizons differ");
        let r = f_score(&[fc("a", &[400.0, 400.0], &[100.0, 100.0]), fc("b", &[50.0, 50.0], &[50.0, 50.0])]).unwrap();
        assert_eq!(r.artists[0].sigma, 3.0);
        assert_eq!(r.artists[0].contribution, 0.0);
        assert_eq!(r.f_score, 100.0f64.sqrt());
    }

    #[test]
    fn predictions_are_clamped_and_rounded() {
        let r = f_score(&[fc("a", &[-3.0, 99.6], &[100.0, 100.0])]).unwrap();
        assert_eq!(r.clamped_days, 1);
        assert_eq!(r.artists[0].clamped_days, 1);
        // (0 − 100)/100 = −1, (100 − 100)/100 = 0
        assert!((r.artists[0].sigma - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn error_stat_cases() {
        assert_eq!(error_stats(&[fc("a", &[3.0], &[3.0])]), (0.0, 0.0));
        let two = [fc("a", &[110.0, 90.0], &[100.0, 100.0]), fc("b", &[130.0, 70.0], &[100.0, 100.0])];
        assert_eq!(error_stats(&two), (20.0, 100.0));
        assert_eq!(error_stats(&two[..1]).1, 0.0);
    }

    proptest! {
        #[test]
        fn f_bounded_and_order_free(
            rows in prop::collection::vec(prop::collection::vec((0u32..500, 0u32..500), 5), 1..8)
        ) {
            let fs: Vec<ArtistForecast> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| fc(&format!("a{i}"), &r.iter().map(|p| p.0 as f64).collect::<Vec<_>>(), &r.iter().map(|p| p.1 as f64).collect::<Vec<_>>()))
                .collect();
            let r = f_score(&fs).unwrap();
            let max: f64 = r.artists.iter().map(|a| a.phi).sum();
            prop_assert!(r.f_score >= 0.0 && r.f_score <= max + 1e-9);
            let mut rev = fs.clone();
            rev.reverse();
            prop_assert_eq!(f_score(&rev).unwrap().f_score, r.f_score);
        }

        #[test]
        fn sigma_scale_free(x in prop::collection::vec(0.0f64..1e4, 1..20), c in 0.01f64..100.0) {
            let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v * 0.7 + i as f64 + 1.0).collect();
            let a = sigma(&fc("a", &x, &y)).unwrap();
            let xs: Vec<f64> = x.iter().map(|v| v * c).collect();
            let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
            let b = sigma(&fc("a", &xs, &ys)).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }

        #[test]
        fn duplicating_days_scales_phi(y in prop::collection::vec(1.0f64..1e3, 1..10), k in 1usize..4) {
            let x: Vec<f64> = y.iter().map(|v| v * 1.3).collect();
            let reps = k * k;
            let xd: Vec<f64> = x.iter().cycle().take(x.len() * reps).copied().collect();
            let yd: Vec<f64> = y.iter().cycle().take(y.len() * reps).copied().collect();
            let s1 = sigma(&fc("a", &x, &y)).unwrap();
            let s2 = sigma(&fc("a", &xd, &yd)).unwrap();
            prop_assert!((s1 - s2).abs() < 1e-9);
            prop_assert!((phi(&yd) - k as f64 * phi(&y)).abs() < 1e-9 * phi(&yd));
        }
    }
}
