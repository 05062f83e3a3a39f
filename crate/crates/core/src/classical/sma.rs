use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iterated simple moving average over the last `window` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmaModel {
    pub window: usize,
    /// The last `window` observed values.
    pub history: Vec<f64>,
}

impl SmaModel {
    pub fn new(history: &[f64], window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::invalid("SMA window must be at least 1"));
        }
        if history.len() < window {
            return Err(Error::invalid(format!(
                "SMA window {window} needs at least {window} values, got {}",
                history.len()
            )));
        }
        Ok(Self {
            window,
            history: history[history.len() - window..].to_vec(),
        })
    }

    /// Each step emits the mean of the last `window` values of the history
    /// extended with the forecasts so far.
    pub fn forecast(&self, horizon: usize) -> Vec<f64> {
        let mut buf = self.history.clone();
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let tail = &buf[buf.len() - self.window..];
            let next = tail.iter().sum::<f64>() / self.window as f64;
            out.push(next);
            buf.push(next);
        }
        out
    }
}

pub fn sma_forecast(history: &[f64], window: usize, horizon: usize) -> Result<Vec<f64>> {
    Ok(SmaModel::new(history, window)?.forecast(horizon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_cases() {
        assert_eq!(sma_forecast(&[1.0, 2.0, 3.0], 3, 1).unwrap(), vec![2.0]);
        for k in 1..=3 {
            assert_eq!(sma_forecast(&[5.0, 5.0, 5.0], k, 4).unwrap(), vec![5.0; 4]);
        }
        assert_eq!(sma_forecast(&[1.0, 2.0, 3.0], 2, 2).unwrap(), vec![2.5, 2.75]);
        assert!(sma_forecast(&[1.0], 2, 2).is_err());
        assert!(sma_forecast(&[1.0], 0, 2).is_err());
    }

    proptest! {
        #[test]
        fn window_one_carries_last_value(h in prop::collection::vec(-1e3f64..1e3, 1..20), n in 0usize..40) {
            let out = sma_forecast(&h, 1, n).unwrap();
            prop_assert!(out.iter().all(|v| *v == *h.last().unwrap()));
            prop_assert_eq!(out.len(), n);
        }
    }
}
