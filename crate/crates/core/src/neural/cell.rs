//! Recurrent cells: batched forward/backward kernels plus single-sample
//! step functions.
//!
//! Every cell keeps its gate weights stacked in one `G·H × (H + I)` matrix
//! acting on the concatenation `[h_{t-1}, x_t]`; the first `H` columns are
//! the recurrent weights, the remaining `I` the input weights. Gate order:
//!
//! - LSTM: forget, input, candidate, output
//! - GRU: update, reset, candidate
//! - RNN: the single tanh pre-activation

use serde::{Deserialize, Serialize};

use super::linalg::{col_sum_acc, fill_rows, matmul_nn, matmul_nt, matmul_tn_acc, sigmoid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Rnn,
    Gru,
    Lstm,
}

impl CellKind {
    pub fn gates(self) -> usize {
        match self {
            CellKind::Rnn => 1,
            CellKind::Gru => 3,
            CellKind::Lstm => 4,
        }
    }
}

/// Borrowed weights of one recurrent direction.
#[derive(Clone, Copy)]
pub(crate) struct DirectionParams<'a> {
    pub kind: CellKind,
    pub hidden: usize,
    pub input: usize,
    pub w: &'a [f64],
    pub b: &'a [f64],
}

impl DirectionParams<'_> {
    fn width(&self) -> usize {
        self.hidden + self.input
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct StepCache {
    /// `[h_{t-1}, x_t]`, batch × (H + I).
    hx: Vec<f64>,
    /// Activated gates, batch × G·H.
    act: Vec<f64>,
    /// LSTM memory cell and its tanh.
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    /// GRU `[r ⊙ h_{t-1}, x_t]`.
    rhx: Vec<f64>,
    pub h: Vec<f64>,
}

fn concat_rows(batch: usize, left: &[f64], lw: usize, right: &[f64], rw: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(batch * (lw + rw));
    for b in 0..batch {
        out.extend_from_slice(&left[b * lw..(b + 1) * lw]);
        out.extend_from_slice(&right[b * rw..(b + 1) * rw]);
    }
    out
}

fn split_rows(batch: usize, src: &[f64], lw: usize, rw: usize, left: &mut [f64], right: &mut [f64]) {
    let w = lw + rw;
    for b in 0..batch {
        let row = &src[b * w..(b + 1) * w];
        for (o, v) in left[b * lw..(b + 1) * lw].iter_mut().zip(&row[..lw]) {
            *o += v;
        }
        for (o, v) in right[b * rw..(b + 1) * rw].iter_mut().zip(&row[lw..]) {
            *o += v;
        }
    }
}

pub(crate) fn step_forward(
    p: &DirectionParams,
    batch: usize,
    h_prev: &[f64],
    c_prev: &[f64],
    x: &[f64],
) -> StepCache {
    let h = p.hidden;
    let width = p.width();
    let hx = concat_rows(batch, h_prev, h, x, p.input);
    match p.kind {
        CellKind::Rnn => {
            let mut act = vec![0.0; batch * h];
            fill_rows(batch, h, p.b, &mut act);
            matmul_nt(batch, width, h, &hx, p.w, &mut act, 1.0);
            act.iter_mut().for_each(|v| *v = v.tanh());
            StepCache {
                hx,
                h: act.clone(),
                act,
                ..Default::default()
            }
        }
        CellKind::Lstm => {
            let g = 4 * h;
            let mut act = vec![0.0; batch * g];
            fill_rows(batch, g, p.b, &mut act);
            matmul_nt(batch, width, g, &hx, p.w, &mut act, 1.0);
            let mut c = vec![0.0; batch * h];
            let mut tanh_c = vec![0.0; batch * h];
            let mut out = vec![0.0; batch * h];
            for b in 0..batch {
                let z = &mut act[b * g..(b + 1) * g];
                for j in 0..h {
                    let f = sigmoid(z[j]);
                    let i = sigmoid(z[h + j]);
                    let cand = z[2 * h + j].tanh();
                    let o = sigmoid(z[3 * h + j]);
                    z[j] = f;
                    z[h + j] = i;
                    z[2 * h + j] = cand;
                    z[3 * h + j] = o;
                    let k = b * h + j;
                    c[k] = f * c_prev[k] + i * cand;
                    tanh_c[k] = c[k].tanh();
                    out[k] = o * tanh_c[k];
                }
            }
            StepCache {
                hx,
                act,
                c,
                tanh_c,
                rhx: Vec::new(),
                h: out,
            }
        }
        CellKind::Gru => {
            let g = 3 * h;
            let mut act = vec![0.0; batch * g];
            // update and reset gates from [h, x]
            let mut zr = vec![0.0; batch * 2 * h];
            fill_rows(batch, 2 * h, &p.b[..2 * h], &mut zr);
            matmul_nt(batch, width, 2 * h, &hx, &p.w[..2 * h * width], &mut zr, 1.0);
            let mut rh = vec![0.0; batch * h];
            for b in 0..batch {
                for j in 0..2 * h {
                    act[b * g + j] = sigmoid(zr[b * 2 * h + j]);
                }
                for j in 0..h {
                    rh[b * h + j] = act[b * g + h + j] * h_prev[b * h + j];
                }
            }
            let rhx = concat_rows(batch, &rh, h, x, p.input);
            let mut n = vec![0.0; batch * h];
            fill_rows(batch, h, &p.b[2 * h..], &mut n);
            matmul_nt(batch, width, h, &rhx, &p.w[2 * h * width..], &mut n, 1.0);
            let mut out = vec![0.0; batch * h];
            for b in 0..batch {
                for j in 0..h {
                    let cand = n[b * h + j].tanh();
                    act[b * g + 2 * h + j] = cand;
                    let z = act[b * g + j];
                    out[b * h + j] = (1.0 - z) * cand + z * h_prev[b * h + j];
                }
            }
            StepCache {
                hx,
                act,
                rhx,
                h: out,
                ..Default::default()
            }
        }
    }
}

/// Gradients flowing out of one step.
pub(crate) struct StepGrads {
    pub dh_prev: Vec<f64>,
    pub dc_prev: Vec<f64>,
    pub dx: Vec<f64>,
}

/// Backpropagates through one step given the total gradient `dh` on its
/// hidden output and `dc` on its memory cell (LSTM only). Weight and bias
/// gradients accumulate into `dw`/`db`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn step_backward(
    p: &DirectionParams,
    batch: usize,
    cache: &StepCache,
    h_prev: &[f64],
    c_prev: &[f64],
    dh: &[f64],
    dc: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
) -> StepGrads {
    let h = p.hidden;
    let width = p.width();
    let mut dh_prev = vec![0.0; batch * h];
    let mut dc_prev = Vec::new();
    let mut dx = vec![0.0; batch * p.input];
    match p.kind {
        CellKind::Rnn => {
            let dz: Vec<f64> = dh
                .iter()
                .zip(&cache.h)
                .map(|(g, y)| g * (1.0 - y * y))
                .collect();
            matmul_tn_acc(batch, h, width, &dz, &cache.hx, dw);
            col_sum_acc(batch, h, &dz, db);
            let mut dhx = vec![0.0; batch * width];
            matmul_nn(batch, h, width, &dz, p.w, &mut dhx, 0.0);
            split_rows(batch, &dhx, h, p.input, &mut dh_prev, &mut dx);
        }
        CellKind::Lstm => {
            let g = 4 * h;
            let mut dz = vec![0.0; batch * g];
            dc_prev = vec![0.0; batch * h];
            for b in 0..batch {
                let a = &cache.act[b * g..(b + 1) * g];
                let d = &mut dz[b * g..(b + 1) * g];
                for j in 0..h {
                    let k = b * h + j;
                    let (f, i, cand, o) = (a[j], a[h + j], a[2 * h + j], a[3 * h + j]);
                    let tc = cache.tanh_c[k];
                    let d_o = dh[k] * tc;
                    let dcell = dc[k] + dh[k] * o * (1.0 - tc * tc);
                    d[j] = dcell * c_prev[k] * f * (1.0 - f);
                    d[h + j] = dcell * cand * i * (1.0 - i);
                    d[2 * h + j] = dcell * i * (1.0 - cand * cand);
                    d[3 * h + j] = d_o * o * (1.0 - o);
                    dc_prev[k] = dcell * f;
                }
            }
            matmul_tn_acc(batch, g, width, &dz, &cache.hx, dw);
            col_sum_acc(batch, g, &dz, db);
            let mut dhx = vec![0.0; batch * width];
            matmul_nn(batch, g, width, &dz, p.w, &mut dhx, 0.0);
            split_rows(batch, &dhx, h, p.input, &mut dh_prev, &mut dx);
        }
        CellKind::Gru => {
            let g = 3 * h;
            let mut dzr = vec![0.0; batch * 2 * h];
            let mut dn = vec![0.0; batch * h];
            for b in 0..batch {
                let a = &cache.act[b * g..(b + 1) * g];
                for j in 0..h {
                    let k = b * h + j;
                    let (z, cand) = (a[j], a[2 * h + j]);
                    dzr[b * 2 * h + j] = dh[k] * (h_prev[k] - cand) * z * (1.0 - z);
                    dn[k] = dh[k] * (1.0 - z) * (1.0 - cand * cand);
                    dh_prev[k] += dh[k] * z;
                }
            }
            // candidate branch acts on [r ⊙ h, x]
            let wn = &p.w[2 * h * width..];
            matmul_tn_acc(batch, h, width, &dn, &cache.rhx, &mut dw[2 * h * width..]);
            col_sum_acc(batch, h, &dn, &mut db[2 * h..]);
            let mut drhx = vec![0.0; batch * width];
            matmul_nn(batch, h, width, &dn, wn, &mut drhx, 0.0);
            for b in 0..batch {
                let row = &drhx[b * width..(b + 1) * width];
                let a = &cache.act[b * g..(b + 1) * g];
                for j in 0..h {
                    let k = b * h + j;
                    let r = a[h + j];
                    dzr[b * 2 * h + h + j] = row[j] * h_prev[k] * r * (1.0 - r);
                    dh_prev[k] += row[j] * r;
                }
                for (o, v) in dx[b * p.input..(b + 1) * p.input].iter_mut().zip(&row[h..]) {
                    *o += v;
                }
            }
            matmul_tn_acc(batch, 2 * h, width, &dzr, &cache.hx, &mut dw[..2 * h * width]);
            col_sum_acc(batch, 2 * h, &dzr, &mut db[..2 * h]);
            let mut dhx = vec![0.0; batch * width];
            matmul_nn(batch, 2 * h, width, &dzr, &p.w[..2 * h * width], &mut dhx, 0.0);
            split_rows(batch, &dhx, h, p.input, &mut dh_prev, &mut dx);
        }
    }
    StepGrads {
        dh_prev,
        dc_prev,
        dx,
    }
}

/// Cached activations of one direction, in processing order.
pub(crate) struct DirectionCache {
    reverse: bool,
    steps: Vec<StepCache>,
}

/// Runs a direction over `xs` (time-major, each batch × input) from a zero
/// state. Returns hidden outputs in time order.
pub(crate) fn run_direction(
    p: &DirectionParams,
    batch: usize,
    xs: &[Vec<f64>],
    reverse: bool,
) -> (Vec<Vec<f64>>, DirectionCache) {
    let t_len = xs.len();
    let zeros = vec![0.0; batch * p.hidden];
    let mut steps: Vec<StepCache> = Vec::with_capacity(t_len);
    for k in 0..t_len {
        let t = if reverse { t_len - 1 - k } else { k };
        let (h_prev, c_prev) = match steps.last() {
            Some(s) => (&s.h[..], if s.c.is_empty() { &zeros[..] } else { &s.c[..] }),
            None => (&zeros[..], &zeros[..]),
        };
        let step = step_forward(p, batch, h_prev, c_prev, &xs[t]);
        steps.push(step);
    }
    let mut hs = vec![Vec::new(); t_len];
    for (k, s) in steps.iter().enumerate() {
        let t = if reverse { t_len - 1 - k } else { k };
        hs[t] = s.h.clone();
    }
    (hs, DirectionCache { reverse, steps })
}

/// Backpropagation through time for one direction. `dhs` holds the gradient
/// on each emitted hidden state in time order; returns input gradients in
/// time order.
pub(crate) fn backward_direction(
    p: &DirectionParams,
    batch: usize,
    cache: &DirectionCache,
    dhs: &[Vec<f64>],
    dw: &mut [f64],
    db: &mut [f64],
) -> Vec<Vec<f64>> {
    let t_len = cache.steps.len();
    let zeros = vec![0.0; batch * p.hidden];
    let mut dxs = vec![Vec::new(); t_len];
    let mut dh_carry = zeros.clone();
    let mut dc_carry = zeros.clone();
    for k in (0..t_len).rev() {
        let t = if cache.reverse { t_len - 1 - k } else { k };
        let (h_prev, c_prev) = if k == 0 {
            (&zeros[..], &zeros[..])
        } else {
            let s = &cache.steps[k - 1];
            (&s.h[..], if s.c.is_empty() { &zeros[..] } else { &s.c[..] })
        };
        let dh: Vec<f64> = dhs[t].iter().zip(&dh_carry).map(|(a, b)| a + b).collect();
        let g = step_backward(p, batch, &cache.steps[k], h_prev, c_prev, &dh, &dc_carry, dw, db);
        dh_carry = g.dh_prev;
        if !g.dc_prev.is_empty() {
            dc_carry = g.dc_prev;
        }
        dxs[t] = g.dx;
    }
    dxs
}

/// Hidden and memory state of a single LSTM cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl CellState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// LSTM gate weights, each `hidden × (hidden + input)` over `[h_{t-1}, x_t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellParams {
    pub hidden: usize,
    pub input: usize,
    pub w_f: Vec<f64>,
    pub w_i: Vec<f64>,
    pub w_c: Vec<f64>,
    pub w_o: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_c: Vec<f64>,
    pub b_o: Vec<f64>,
}

impl LstmCellParams {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        let w = vec![0.0; hidden * (hidden + input)];
        let b = vec![0.0; hidden];
        Self {
            hidden,
            input,
            w_f: w.clone(),
            w_i: w.clone(),
            w_c: w.clone(),
            w_o: w,
            b_f: b.clone(),
            b_i: b.clone(),
            b_c: b.clone(),
            b_o: b,
        }
    }
}

/// GRU gate weights, each `hidden × (hidden + input)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GruCellParams {
    pub hidden: usize,
    pub input: usize,
    pub w_z: Vec<f64>,
    pub w_r: Vec<f64>,
    pub w_n: Vec<f64>,
    pub b_z: Vec<f64>,
    pub b_r: Vec<f64>,
    pub b_n: Vec<f64>,
}

impl GruCellParams {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        let w = vec![0.0; hidden * (hidden + input)];
        let b = vec![0.0; hidden];
        Self {
            hidden,
            input,
            w_z: w.clone(),
            w_r: w.clone(),
            w_n: w,
            b_z: b.clone(),
            b_r: b.clone(),
            b_n: b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnnCellParams {
    pub hidden: usize,
    pub input: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

fn check_dims(hidden: usize, input: usize, mats: &[&[f64]], biases: &[&[f64]], h: &[f64], x: &[f64]) -> Result<()> {
    let width = hidden + input;
    if mats.iter().any(|m| m.len() != hidden * width)
        || biases.iter().any(|b| b.len() != hidden)
        || h.len() != hidden
        || x.len() != input
    {
        return Err(Error::shape(format!(
            "cell expects hidden {hidden}, input {input}; got |h| = {}, |x| = {}",
            h.len(),
            x.len()
        )));
    }
    Ok(())
}

/// One LSTM step:
/// `f = σ(W_f·[h, x] + b_f)`, `i = σ(W_i·[h, x] + b_i)`,
/// `C̃ = tanh(W_c·[h, x] + b_c)`, `C' = f ⊙ C + i ⊙ C̃`,
/// `o = σ(W_o·[h, x] + b_o)`, `h' = o ⊙ tanh(C')`.
pub fn lstm_cell_step(params: &LstmCellParams, state: &CellState, x: &[f64]) -> Result<CellState> {
    let p = params;
    check_dims(
        p.hidden,
        p.input,
        &[&p.w_f, &p.w_i, &p.w_c, &p.w_o],
        &[&p.b_f, &p.b_i, &p.b_c, &p.b_o],
        &state.h,
        x,
    )?;
    if state.c.len() != p.hidden {
        return Err(Error::shape("memory cell length differs from hidden size"));
    }
    let w = [&p.w_f[..], &p.w_i, &p.w_c, &p.w_o].concat();
    let b = [&p.b_f[..], &p.b_i, &p.b_c, &p.b_o].concat();
    let dp = DirectionParams {
        kind: CellKind::Lstm,
        hidden: p.hidden,
        input: p.input,
        w: &w,
        b: &b,
    };
    let s = step_forward(&dp, 1, &state.h, &state.c, x);
    Ok(CellState { h: s.h, c: s.c })
}

/// One GRU step: `z = σ(W_z·[h, x] + b_z)`, `r = σ(W_r·[h, x] + b_r)`,
/// `n = tanh(W_n·[r ⊙ h, x] + b_n)`, `h' = (1 − z) ⊙ n + z ⊙ h`.
pub fn gru_cell_step(params: &GruCellParams, h: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let p = params;
    check_dims(p.hidden, p.input, &[&p.w_z, &p.w_r, &p.w_n], &[&p.b_z, &p.b_r, &p.b_n], h, x)?;
    let w = [&p.w_z[..], &p.w_r, &p.w_n].concat();
    let b = [&p.b_z[..], &p.b_r, &p.b_n].concat();
    let dp = DirectionParams {
        kind: CellKind::Gru,
        hidden: p.hidden,
        input: p.input,
        w: &w,
        b: &b,
    };
    Ok(step_forward(&dp, 1, h, &[], x).h)
}

/// One vanilla step: `h' = tanh(W·[h, x] + b)`.
pub fn rnn_cell_step(params: &RnnCellParams, h: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_dims(params.hidden, params.input, &[&params.w], &[&params.b], h, x)?;
    let dp = DirectionParams {
        kind: CellKind::Rnn,
        hidden: params.hidden,
        input: params.input,
        w: &params.w,
        b: &params.b,
    };
    Ok(step_forward(&dp, 1, h, &[], x).h)
}
