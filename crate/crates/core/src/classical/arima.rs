//! ARIMA(p, d, q) fitted by conditional sum of squares.
//!
//! The series is differenced `d` times; the differenced series `w` follows
//!
//! ```text
//! w_t = c + Σ φ_i w_{t-i} + Σ θ_j e_{t-j} + e_t
//! ```
//!
//! with residuals before the first `p` observations taken as zero. The
//! intercept `c` is only estimated when `d = 0`. Coefficients are found by
//! Adam on the CSS of a standardized copy of `w` and mapped back.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::Adam;

/// Coefficient sums are held below this bound during fitting.
const STATIONARITY_BOUND: f64 = 0.99;
const MAX_ITERS: usize = 2000;
const LR: f64 = 0.05;
const LR_HALVING: usize = 400;
const MIN_EXTRA_OBS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        Self { p, d, q }
    }

    pub fn has_intercept(&self) -> bool {
        self.d == 0
    }

    /// Estimated coefficients, intercept included.
    pub fn param_count(&self) -> usize {
        self.p + self.q + usize::from(self.has_intercept())
    }
}

impl fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub order: ArimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub intercept: f64,
    pub residual_variance: f64,
    /// Conditional sum of squares in original units.
    pub css: f64,
    /// Number of residual terms in the CSS.
    pub n_residuals: usize,
}

impl ArimaModel {
    /// `n·ln(CSS/n) + 2·k`; negative infinity for an exact fit.
    pub fn aic(&self) -> f64 {
        let n = self.n_residuals as f64;
        if self.css <= 0.0 {
            return f64::NEG_INFINITY;
        }
        n * (self.css / n).ln() + 2.0 * self.order.param_count() as f64
    }
}

/// Applies first differences `d` times.
pub fn difference(y: &[f64], d: usize) -> Vec<f64> {
    let mut out = y.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}

/// First value of each differencing level `0..d`, the anchors `undifference`
/// needs to invert `difference`.
pub fn difference_anchors(y: &[f64], d: usize) -> Vec<f64> {
    (0..d).map(|k| difference(y, k)[0]).collect()
}

/// Inverts `difference` given the first value of every level, outermost first.
pub fn undifference(diffed: &[f64], anchors: &[f64]) -> Vec<f64> {
    let mut out = diffed.to_vec();
    for &a in anchors.iter().rev() {
        let mut level = Vec::with_capacity(out.len() + 1);
        level.push(a);
        for v in &out {
            let last = *level.last().expect("seeded with anchor");
            level.push(last + v);
        }
        out = level;
    }
    out
}

/// Residuals of `w` under the given coefficients, plus optionally their
/// derivatives with respect to `[c?, φ.., θ..]`.
struct Residuals {
    e: Vec<f64>,
    de: Vec<Vec<f64>>,
}

fn residuals(w: &[f64], order: ArimaOrder, c: f64, ar: &[f64], ma: &[f64], with_grad: bool) -> Residuals {
    let n = w.len();
    let k = order.param_count();
    let off = usize::from(order.has_intercept());
    let mut e = vec![0.0; n];
    let mut de = if with_grad { vec![vec![0.0; k]; n] } else { Vec::new() };
    for t in order.p..n {
        let mut pred = c;
        for (i, phi) in ar.iter().enumerate() {
            pred += phi * w[t - 1 - i];
        }
        for (j, th) in ma.iter().enumerate() {
            if t > j {
                pred += th * e[t - 1 - j];
            }
        }
        e[t] = w[t] - pred;
        if with_grad {
            let mut g = vec![0.0; k];
            if off == 1 {
                g[0] = -1.0;
            }
            for i in 0..order.p {
                g[off + i] = -w[t - 1 - i];
            }
            for j in 0..order.q {
                if t > j {
                    g[off + order.p + j] = -e[t - 1 - j];
                }
            }
            for (j, th) in ma.iter().enumerate() {
                if t > j {
                    for (gi, prev) in g.iter_mut().zip(&de[t - 1 - j]) {
                        *gi -= th * prev;
                    }
                }
            }
            de[t] = g;
        }
    }
    Residuals { e, de }
}

fn project(coefs: &mut [f64]) {
    let s: f64 = coefs.iter().map(|v| v.abs()).sum();
    if s > STATIONARITY_BOUND {
        let f = STATIONARITY_BOUND / s;
        coefs.iter_mut().for_each(|v| *v *= f);
    }
}

/// Fits `order` to `history` by CSS minimization.
pub fn fit_arima(history: &[f64], order: ArimaOrder) -> Result<ArimaModel> {
    if order.d > 2 {
        return Err(Error::invalid(format!("differencing order {} exceeds 2", order.d)));
    }
    let need = MIN_EXTRA_OBS + order.p + order.d + order.q;
    if history.len() < need {
        return Err(Error::invalid(format!(
            "ARIMA{order} needs at least {need} observations, got {}",
            history.len()
        )));
    }
    let w = difference(history, order.d);
    let n_res = w.len() - order.p;
    let center = if order.has_intercept() {
        w.iter().sum::<f64>() / w.len() as f64
    } else {
        0.0
    };
    let spread = (w.iter().map(|v| (v - center).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
    let scale = if spread > 1e-12 { spread } else { 1.0 };
    let ws: Vec<f64> = w.iter().map(|v| (v - center) / scale).collect();

    let k = order.param_count();
    let off = usize::from(order.has_intercept());
    let unpack = |theta: &[f64]| {
        let c = if off == 1 { theta[0] } else { 0.0 };
        (c, theta[off..off + order.p].to_vec(), theta[off + order.p..].to_vec())
    };
    let objective = |theta: &[f64], with_grad: bool| {
        let (c, ar, ma) = unpack(theta);
        let r = residuals(&ws, order, c, &ar, &ma, with_grad);
        let css: f64 = r.e[order.p..].iter().map(|v| v * v).sum();
        let grad = with_grad.then(|| {
            let mut g = vec![0.0; k];
            for t in order.p..ws.len() {
                for (gi, d) in g.iter_mut().zip(&r.de[t]) {
                    *gi += 2.0 * r.e[t] * d / n_res as f64;
                }
            }
            g
        });
        (css, grad)
    };

    let mut theta = vec![0.0; k];
    let (css0, g0) = objective(&theta, true);
    let g0 = g0.expect("gradient requested");
    let mut best = (css0, theta.clone());
    let mut trace = vec![css0];
    if k > 0 {
        let mut adam = Adam::new(k, LR, 0.9, 0.999, 1e-8);
        let mut grad = g0.clone();
        for it in 1..=MAX_ITERS {
            if it % LR_HALVING == 0 {
                adam.lr *= 0.5;
            }
            adam.step(&mut theta, &grad);
            project(&mut theta[off..off + order.p]);
            project(&mut theta[off + order.p..]);
            let (css, g) = objective(&theta, true);
            if !css.is_finite() {
                trace.push(css);
                return Err(Error::NonConvergence { trace });
            }
            if css < best.0 {
                best = (css, theta.clone());
            }
            if it % 100 == 0 {
                trace.push(css);
            }
            grad = g.expect("gradient requested");
        }
    }
    let g0_norm = g0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !best.0.is_finite() || (g0_norm > 1e-6 && best.0 >= css0) {
        return Err(Error::NonConvergence { trace });
    }

    let (c, ar, ma) = unpack(&best.1);
    let intercept = center * (1.0 - ar.iter().sum::<f64>()) + scale * c;
    let css = best.0 * scale * scale;
    Ok(ArimaModel {
        order,
        ar,
        ma,
        intercept,
        residual_variance: css / n_res as f64,
        css,
        n_residuals: n_res,
    })
}

/// Iterated forecast with future shocks at zero, then `d`-fold integration.
pub fn arima_forecast(model: &ArimaModel, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
    let order = model.order;
    if model.ar.len() != order.p || model.ma.len() != order.q {
        return Err(Error::shape("coefficient counts do not match the model order"));
    }
    if history.len() < order.d + order.p.max(1) {
        return Err(Error::invalid(format!(
            "ARIMA{order} forecast needs at least {} history values",
            order.d + order.p.max(1)
        )));
    }
    let w = difference(history, order.d);
    let r = residuals(&w, order, model.intercept, &model.ar, &model.ma, false);
    let mut ext = w.clone();
    let mut shocks = r.e;
    for _ in 0..horizon {
        let t = ext.len();
        let mut next = model.intercept;
        for (i, phi) in model.ar.iter().enumerate() {
            next += phi * ext[t - 1 - i];
        }
        for (j, th) in model.ma.iter().enumerate() {
            if t > j {
                next += th * shocks[t - 1 - j];
            }
        }
        ext.push(next);
        shocks.push(0.0);
    }
    let mut future = ext[w.len()..].to_vec();
    for level in (0..order.d).rev() {
        let mut last = *difference(history, level).last().expect("history long enough");
        for v in future.iter_mut() {
            last += *v;
            *v = last;
        }
    }
    Ok(future)
}

/// One candidate of the order grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderTrial {
    pub order: ArimaOrder,
    pub aic: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSelection {
    pub order: ArimaOrder,
    pub model: ArimaModel,
    pub trials: Vec<OrderTrial>,
}

/// Grid search over `p, q ∈ 0..=3`, `d ∈ 0..=2` by minimum AIC. Ties go to
/// fewer parameters, then to the earlier grid position (`d`, `p`, `q`
/// ascending).
pub fn select_arima_order(history: &[f64]) -> Result<OrderSelection> {
    if history.len() < 30 {
        return Err(Error::invalid(format!(
            "order selection needs at least 30 observations, got {}",
            history.len()
        )));
    }
    let mut trials = Vec::new();
    let mut best: Option<ArimaModel> = None;
    for d in 0..=2 {
        for p in 0..=3 {
            for q in 0..=3 {
                let order = ArimaOrder::new(p, d, q);
                match fit_arima(history, order) {
                    Ok(m) => {
                        let aic = m.aic();
                        trials.push(OrderTrial {
                            order,
                            aic: Some(aic),
                            error: None,
                        });
                        let better = match &best {
                            None => true,
                            Some(b) => {
                                let ba = b.aic();
                                aic < ba || (aic == ba && order.param_count() < b.order.param_count())
                            }
                        };
                        if better {
                            best = Some(m);
                        }
                    }
                    Err(e) => trials.push(OrderTrial {
                        order,
                        aic: None,
                        error: Some(e.to_string()),
                    }),
                }
            }
        }
    }
    let model = best.ok_or_else(|| Error::Training("every ARIMA order failed to fit".into()))?;
    Ok(OrderSelection {
        order: model.order,
        model,
        trials,
    })
}
