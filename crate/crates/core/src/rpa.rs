//! Rolling prediction: extend a fixed-shape `p → q` predictor to any horizon.
//!
//! Each iteration feeds the current `p`-row window to the unit, commits the
//! first `p − l` predicted rows to the forecast, and builds the next window
//! from the `l` most recent rows of the old window followed by those same
//! `p − l` predicted rows. Committed rows are never revised.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A trained fixed-shape predictor: `p × F` window in, `q × F` out.
pub trait Predictor {
    fn input_steps(&self) -> usize;
    fn output_steps(&self) -> usize;
    fn features(&self) -> usize;
    fn predict(&self, window: &Matrix) -> Result<Matrix>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn input_steps(&self) -> usize {
        (**self).input_steps()
    }
    fn output_steps(&self) -> usize {
        (**self).output_steps()
    }
    fn features(&self) -> usize {
        (**self).features()
    }
    fn predict(&self, window: &Matrix) -> Result<Matrix> {
        (**self).predict(window)
    }
}

/// Repeats the last input row `q` times. Stands in for a trained unit in
/// plumbing tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EchoUnit {
    pub p: usize,
    pub q: usize,
    pub features: usize,
}

impl Predictor for EchoUnit {
    fn input_steps(&self) -> usize {
        self.p
    }
    fn output_steps(&self) -> usize {
        self.q
    }
    fn features(&self) -> usize {
        self.features
    }
    fn predict(&self, window: &Matrix) -> Result<Matrix> {
        check_shape(window, self.p, self.features, "window")?;
        let last = window.row(self.p - 1);
        let rows = vec![last; self.q];
        Matrix::from_rows(&rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub p: usize,
    pub q: usize,
    pub l: usize,
    pub horizon: usize,
}

impl RollingConfig {
    pub fn new(p: usize, q: usize, l: usize, horizon: usize) -> Result<Self> {
        let cfg = Self { p, q, l, horizon };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `1 ≤ l ≤ p − 1`, `p − l ≤ q`, `horizon ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.l >= self.p {
            return Err(Error::invalid(format!(
                "rolling step l = {} must satisfy 1 <= l <= p - 1 (p = {})",
                self.l, self.p
            )));
        }
        if self.p - self.l > self.q {
            return Err(Error::invalid(format!(
                "p - l = {} exceeds output step q = {}",
                self.p - self.l,
                self.q
            )));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        Ok(())
    }

    /// Rows committed per iteration.
    pub fn advance(&self) -> usize {
        self.p - self.l
    }

    pub fn iterations(&self) -> usize {
        self.horizon.div_ceil(self.advance())
    }
}

fn check_shape(m: &Matrix, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::shape(format!(
            "{what} is {}x{}, expected {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Next input window: the last `l` rows of `prev_input` followed by the first
/// `p − l` rows of `prediction`, in time order.
pub fn roll_compose(prev_input: &Matrix, prediction: &Matrix, l: usize) -> Result<Matrix> {
    let p = prev_input.rows();
    if l == 0 || l >= p {
        return Err(Error::invalid(format!("rolling step l = {l} must satisfy 1 <= l <= p - 1 (p = {p})")));
    }
    if prediction.rows() < p - l {
        return Err(Error::invalid(format!(
            "p - l = {} exceeds output step q = {}",
            p - l,
            prediction.rows()
        )));
    }
    if prediction.cols() != prev_input.cols() {
        return Err(Error::shape(format!(
            "prediction has {} features, window has {}",
            prediction.cols(),
            prev_input.cols()
        )));
    }
    let mut data = Vec::with_capacity(p * prev_input.cols());
    data.extend_from_slice(prev_input.slice_rows(p - l, p).as_slice());
    data.extend_from_slice(prediction.slice_rows(0, p - l).as_slice());
    Matrix::from_vec(p, prev_input.cols(), data)
}

/// Window, committed forecast rows and iteration count of a rolling run.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingState {
    pub window: Matrix,
    pub committed: Vec<Vec<f64>>,
    pub step: usize,
}

impl RollingState {
    pub fn new(seed_window: Matrix) -> Self {
        Self {
            window: seed_window,
            committed: Vec::new(),
            step: 0,
        }
    }

    /// One predict–commit–compose iteration.
    pub fn advance<P: Predictor + ?Sized>(&mut self, unit: &P, cfg: &RollingConfig) -> Result<()> {
        let features = self.window.cols();
        let pred = unit.predict(&self.window)?;
        check_shape(&pred, cfg.q, features, "unit prediction")?;
        if !pred.is_finite() {
            return Err(Error::NonFinitePrediction { iteration: self.step });
        }
        for r in 0..cfg.advance() {
            self.committed.push(pred.row(r).to_vec());
        }
        self.window = roll_compose(&self.window, &pred, cfg.l)?;
        self.step += 1;
        Ok(())
    }
}

/// Rolls `unit` forward from `seed_window` (the last `p` observed rows) for
/// `cfg.horizon` rows. Values stay in whatever space the unit works in.
pub fn roll_forecast<P: Predictor + ?Sized>(unit: &P, seed_window: &Matrix, cfg: &RollingConfig) -> Result<Matrix> {
    cfg.validate()?;
    if unit.input_steps() != cfg.p || unit.output_steps() != cfg.q {
        return Err(Error::shape(format!(
            "unit is {} -> {}, rolling config is {} -> {}",
            unit.input_steps(),
            unit.output_steps(),
            cfg.p,
            cfg.q
        )));
    }
    check_shape(seed_window, cfg.p, unit.features(), "seed window")?;
    let mut state = RollingState::new(seed_window.clone());
    for _ in 0..cfg.iterations() {
        state.advance(unit, cfg)?;
    }
    state.committed.truncate(cfg.horizon);
    Matrix::from_rows(&state.committed)
}

/// Single-shot forecast from a unit whose output step already equals the horizon.
pub fn baseline_forecast<P: Predictor + ?Sized>(unit: &P, seed_window: &Matrix, horizon: usize) -> Result<Matrix> {
    if unit.output_steps() != horizon {
        return Err(Error::invalid(format!(
            "baseline unit emits q = {} steps, horizon is {horizon}",
            unit.output_steps()
        )));
    }
    check_shape(seed_window, unit.input_steps(), unit.features(), "seed window")?;
    let pred = unit.predict(seed_window)?;
    check_shape(&pred, horizon, unit.features(), "unit prediction")?;
    if !pred.is_finite() {
        return Err(Error::NonFinitePrediction { iteration: 0 });
    }
    Ok(pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Predicts `last + 1, last + 2, …` per feature.
    struct Ramp {
        p: usize,
        q: usize,
    }

    impl Predictor for Ramp {
        fn input_steps(&self) -> usize {
            self.p
        }
        fn output_steps(&self) -> usize {
            self.q
        }
        fn features(&self) -> usize {
            1
        }
        fn predict(&self, w: &Matrix) -> Result<Matrix> {
            let last = w.get(self.p - 1, 0);
            Ok(Matrix::column(&(1..=self.q).map(|k| last + k as f64).collect::<Vec<_>>()))
        }
    }

    fn col(v: &[f64]) -> Matrix {
        Matrix::column(v)
    }

    #[test]
    fn compose_keeps_recent_inputs_then_predictions() {
        let prev = col(&[1.0, 2.0, 3.0]);
        let pred = col(&[4.0, 5.0, 6.0]);
        assert_eq!(roll_compose(&prev, &pred, 2).unwrap().as_slice(), &[2.0, 3.0, 4.0]);
        assert_eq!(roll_compose(&prev, &pred, 1).unwrap().as_slice(), &[3.0, 4.0, 5.0]);
        assert!(roll_compose(&prev, &pred, 0).is_err());
        assert!(roll_compose(&prev, &pred, 3).is_err());
    }

    #[test]
    fn config_bounds() {
        assert!(RollingConfig::new(3, 3, 0, 5).is_err());
        assert!(RollingConfig::new(3, 3, 3, 5).is_err());
        assert!(RollingConfig::new(5, 2, 1, 5).is_err());
        assert!(RollingConfig::new(3, 3, 1, 0).is_err());
        let cfg = RollingConfig::new(5, 4, 1, 30).unwrap();
        assert_eq!(cfg.iterations(), 8);
    }

    #[test]
    fn echo_unit_is_a_fixed_point() {
        let unit = EchoUnit { p: 4, q: 4, features: 3 };
        let seed = Matrix::from_rows(&vec![[7.0, 1.0, 0.5]; 4]).unwrap();
        for n in [1, 7, 30] {
            let out = roll_forecast(&unit, &seed, &RollingConfig::new(4, 4, 2, n).unwrap()).unwrap();
            assert_eq!(out.rows(), n);
            assert!(out.iter_rows().all(|r| r == [7.0, 1.0, 0.5]));
        }
    }

    #[test]
    fn ramp_matches_hand_simulation() {
        // p=3, q=3, l=2: each iteration commits one row.
        // seed [0,0,0] → predict [1,2,3], commit 1, window [0,0,1]
        // → predict [2,3,4], commit 2, window [0,1,2] → … → 1..=5
        let out = roll_forecast(&Ramp { p: 3, q: 3 }, &col(&[0.0; 3]), &RollingConfig::new(3, 3, 2, 5).unwrap()).unwrap();
        assert_eq!(out.as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn single_day_horizon_uses_first_prediction() {
        let out = roll_forecast(&Ramp { p: 4, q: 4 }, &col(&[1.0, 2.0, 3.0, 9.0]), &RollingConfig::new(4, 4, 1, 1).unwrap()).unwrap();
        assert_eq!(out.as_slice(), &[10.0]);
    }

    #[test]
    fn shape_mismatch_and_non_finite() {
        let cfg = RollingConfig::new(3, 3, 1, 4).unwrap();
        assert!(roll_forecast(&Ramp { p: 4, q: 3 }, &col(&[0.0; 3]), &cfg).is_err());
        struct Nan;
        impl Predictor for Nan {
            fn input_steps(&self) -> usize {
                3
            }
            fn output_steps(&self) -> usize {
                3
            }
            fn features(&self) -> usize {
                1
            }
            fn predict(&self, _: &Matrix) -> Result<Matrix> {
                Ok(col(&[1.0, f64::NAN, 1.0]))
            }
        }
        match roll_forecast(&Nan, &col(&[0.0; 3]), &cfg).unwrap_err() {
            Error::NonFinitePrediction { iteration } => assert_eq!(iteration, 0),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn baseline_is_single_shot() {
        let unit = Ramp { p: 2, q: 30 };
        let out = baseline_forecast(&unit, &col(&[0.0, 5.0]), 30).unwrap();
        assert_eq!(out, unit.predict(&col(&[0.0, 5.0])).unwrap());
        assert_eq!(out, baseline_forecast(&unit, &col(&[0.0, 5.0]), 30).unwrap());
        assert!(baseline_forecast(&Ramp { p: 2, q: 5 }, &col(&[0.0, 5.0]), 30).is_err());
    }

    proptest! {
        #[test]
        fn horizon_is_exact_and_prefix_stable(p in 2usize..8, extra_q in 0usize..4, l_off in 0usize..7, n in 1usize..40, m in 1usize..20) {
            let l = 1 + l_off % (p - 1);
            let q = (p - l) + extra_q;
            let unit = Ramp { p, q };
            let seed = col(&(0..p).map(|i| i as f64 * 0.5).collect::<Vec<_>>());
            let short = roll_forecast(&unit, &seed, &RollingConfig::new(p, q, l, n).unwrap()).unwrap();
            let long = roll_forecast(&unit, &seed, &RollingConfig::new(p, q, l, n + m).unwrap()).unwrap();
            prop_assert_eq!(short.rows(), n);
            prop_assert_eq!(long.rows(), n + m);
            prop_assert_eq!(short.as_slice(), &long.as_slice()[..n]);
        }
    }
}
