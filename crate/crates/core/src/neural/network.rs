//! Stacked recurrent networks with a dense or recurrent output head.
//!
//! All parameters live in one flat vector, partitioned into named groups in
//! declaration order: for every layer and direction a weight matrix then a
//! bias vector, followed by the head. The same order is used on disk.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cell::{backward_direction, run_direction, CellKind, DirectionCache, DirectionParams};
use super::linalg::{col_sum_acc, fill_rows, matmul_nn, matmul_nt, matmul_tn_acc, sigmoid};
use crate::error::{Error, Result};
use crate::features::FeatureMode;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
}

/// A recurrent layer; its output sequence passes through `activation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub cell: CellKind,
    pub hidden: usize,
    pub bidirectional: bool,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn output_width(&self) -> usize {
        if self.bidirectional {
            2 * self.hidden
        } else {
            self.hidden
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadSpec {
    /// Linear map from the last emitted hidden vector to `q × F′` values.
    Dense,
    /// A recurrent layer with `q × F′` units over the whole sequence; its
    /// final hidden state goes through a per-unit affine map and a sigmoid.
    Recurrent { cell: CellKind },
}

/// Which recurrent family a model is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecurrentKind {
    Lstm,
    Bilstm,
    Gru,
    Rnn,
}

impl RecurrentKind {
    pub const ALL: [RecurrentKind; 4] = [Self::Lstm, Self::Bilstm, Self::Gru, Self::Rnn];

    pub fn cell(self) -> CellKind {
        match self {
            Self::Lstm | Self::Bilstm => CellKind::Lstm,
            Self::Gru => CellKind::Gru,
            Self::Rnn => CellKind::Rnn,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lstm => "lstm",
            Self::Bilstm => "bilstm",
            Self::Gru => "gru",
            Self::Rnn => "rnn",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_features: usize,
    pub input_steps: usize,
    pub output_steps: usize,
    pub output_features: usize,
    pub layers: Vec<LayerSpec>,
    pub head: HeadSpec,
}

impl NetworkSpec {
    /// Two recurrent layers (64, 32) with ReLU between them and a dense
    /// linear head emitting `q` plays.
    pub fn single_feature(kind: RecurrentKind, p: usize, q: usize) -> Self {
        Self {
            input_features: 1,
            input_steps: p,
            output_steps: q,
            output_features: 1,
            layers: Self::trunk(kind),
            head: HeadSpec::Dense,
        }
    }

    /// Two recurrent layers (64, 32) with ReLU and a sigmoid recurrent head
    /// of `q × 3` units.
    pub fn multi_feature(kind: RecurrentKind, p: usize, q: usize) -> Self {
        Self {
            input_features: 3,
            input_steps: p,
            output_steps: q,
            output_features: 3,
            layers: Self::trunk(kind),
            head: HeadSpec::Recurrent { cell: kind.cell() },
        }
    }

    pub fn for_mode(mode: FeatureMode, kind: RecurrentKind, p: usize, q: usize) -> Self {
        match mode {
            FeatureMode::Single => Self::single_feature(kind, p, q),
            FeatureMode::Multi => Self::multi_feature(kind, p, q),
        }
    }

    fn trunk(kind: RecurrentKind) -> Vec<LayerSpec> {
        [64, 32]
            .into_iter()
            .map(|hidden| LayerSpec {
                cell: kind.cell(),
                hidden,
                bidirectional: kind == RecurrentKind::Bilstm,
                activation: Activation::Relu,
            })
            .collect()
    }

    pub fn head_units(&self) -> usize {
        self.output_steps * self.output_features
    }

    fn trunk_width(&self) -> usize {
        self.layers.last().map_or(self.input_features, LayerSpec::output_width)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_features == 0 || self.output_features == 0 {
            return Err(Error::invalid("feature counts must be positive"));
        }
        if self.input_steps == 0 || self.output_steps == 0 {
            return Err(Error::invalid("input and output steps must be positive"));
        }
        if self.layers.iter().any(|l| l.hidden == 0) {
            return Err(Error::invalid("layer hidden sizes must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGroup {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

impl ParamGroup {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Indices into the group list for one recurrent direction.
#[derive(Debug, Clone, Copy)]
struct DirSlots {
    w: usize,
    b: usize,
}

#[derive(Debug, Clone)]
struct Layout {
    groups: Vec<ParamGroup>,
    layers: Vec<Vec<DirSlots>>,
    head: Vec<usize>,
    total: usize,
}

impl Layout {
    fn build(spec: &NetworkSpec) -> Self {
        let mut groups = Vec::new();
        let mut total = 0;
        let mut push = |name: String, len: usize| {
            groups.push(ParamGroup {
                name,
                offset: total,
                len,
            });
            total += len;
            groups.len() - 1
        };
        let mut layers = Vec::new();
        let mut width = spec.input_features;
        for (li, l) in spec.layers.iter().enumerate() {
            let g = l.cell.gates();
            let dirs: &[&str] = if l.bidirectional { &["fwd", "bwd"] } else { &["fwd"] };
            let slots = dirs
                .iter()
                .map(|d| DirSlots {
                    w: push(format!("layer{li}.{d}.w"), g * l.hidden * (l.hidden + width)),
                    b: push(format!("layer{li}.{d}.b"), g * l.hidden),
                })
                .collect();
            layers.push(slots);
            width = l.output_width();
        }
        let units = spec.head_units();
        let head = match &spec.head {
            HeadSpec::Dense => vec![push("head.w".into(), units * width), push("head.b".into(), units)],
            HeadSpec::Recurrent { cell } => vec![
                push("head.w".into(), cell.gates() * units * (units + width)),
                push("head.b".into(), cell.gates() * units),
                push("head.gain".into(), units),
                push("head.bias".into(), units),
            ],
        };
        Self {
            groups,
            layers,
            head,
            total,
        }
    }
}

/// Activations kept from a forward pass for the backward pass.
struct ForwardCache {
    /// Input sequence of every layer, then the trunk output (time-major).
    seqs: Vec<Vec<Vec<f64>>>,
    /// Per layer: pre-activation concatenated outputs, direction caches.
    layers: Vec<(Vec<Vec<f64>>, Vec<DirectionCache>)>,
    head: HeadCache,
    output: Vec<f64>,
}

enum HeadCache {
    Dense,
    Recurrent { cache: DirectionCache, last_h: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct Network {
    spec: NetworkSpec,
    layout: Layout,
    params: Vec<f64>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.params == other.params
    }
}

impl Network {
    /// All-zero parameters.
    pub fn zeros(spec: NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let layout = Layout::build(&spec);
        let params = vec![0.0; layout.total];
        Ok(Self {
            spec,
            layout,
            params,
        })
    }

    /// Glorot-uniform weights per gate block, zero biases, LSTM forget bias
    /// of one, unit head gain.
    pub fn init<R: Rng + ?Sized>(spec: NetworkSpec, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(spec)?;
        let mut width = net.spec.input_features;
        let layers = net.spec.layers.clone();
        for (li, l) in layers.iter().enumerate() {
            for slot in net.layout.layers[li].clone() {
                net.init_direction(rng, l.cell, l.hidden, width, slot);
            }
            width = l.output_width();
        }
        let units = net.spec.head_units();
        match net.spec.head.clone() {
            HeadSpec::Dense => {
                let limit = (6.0 / (width + units) as f64).sqrt();
                let r = net.layout.groups[net.layout.head[0]].range();
                net.params[r].iter_mut().for_each(|v| *v = rng.random_range(-limit..limit));
            }
            HeadSpec::Recurrent { cell } => {
                let slot = DirSlots {
                    w: net.layout.head[0],
                    b: net.layout.head[1],
                };
                net.init_direction(rng, cell, units, width, slot);
                let r = net.layout.groups[net.layout.head[2]].range();
                net.params[r].iter_mut().for_each(|v| *v = 1.0);
            }
        }
        Ok(net)
    }

    fn init_direction<R: Rng + ?Sized>(&mut self, rng: &mut R, cell: CellKind, hidden: usize, input: usize, slot: DirSlots) {
        let limit = (6.0 / (2 * hidden + input) as f64).sqrt();
        let w = self.layout.groups[slot.w].range();
        self.params[w].iter_mut().for_each(|v| *v = rng.random_range(-limit..limit));
        if cell == CellKind::Lstm {
            let b = self.layout.groups[slot.b].range();
            self.params[b][..hidden].iter_mut().for_each(|v| *v = 1.0);
        }
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.layout.total {
            return Err(Error::shape(format!(
                "network has {} parameters, got {}",
                self.layout.total,
                params.len()
            )));
        }
        self.params = params;
        Ok(())
    }

    pub fn groups(&self) -> &[ParamGroup] {
        &self.layout.groups
    }

    pub fn group(&self, name: &str) -> Option<&ParamGroup> {
        self.layout.groups.iter().find(|g| g.name == name)
    }

    pub fn param_count(&self) -> usize {
        self.layout.total
    }

    fn dir<'a>(&'a self, cell: CellKind, hidden: usize, input: usize, slot: DirSlots) -> DirectionParams<'a> {
        DirectionParams {
            kind: cell,
            hidden,
            input,
            w: &self.params[self.layout.groups[slot.w].range()],
            b: &self.params[self.layout.groups[slot.b].range()],
        }
    }

    fn check_window(&self, m: &Matrix) -> Result<()> {
        let want = (self.spec.input_steps, self.spec.input_features);
        if m.shape() != want {
            return Err(Error::shape(format!(
                "window is {}x{}, network expects {}x{}",
                m.rows(),
                m.cols(),
                want.0,
                want.1
            )));
        }
        Ok(())
    }

    fn check_target(&self, m: &Matrix) -> Result<()> {
        let want = (self.spec.output_steps, self.spec.output_features);
        if m.shape() != want {
            return Err(Error::shape(format!(
                "target is {}x{}, network emits {}x{}",
                m.rows(),
                m.cols(),
                want.0,
                want.1
            )));
        }
        Ok(())
    }

    /// Time-major batch: `seq[t]` is batch × features.
    fn to_sequence(&self, inputs: &[Matrix]) -> Result<Vec<Vec<f64>>> {
        let (p, f) = (self.spec.input_steps, self.spec.input_features);
        let mut seq = vec![Vec::with_capacity(inputs.len() * f); p];
        for m in inputs {
            self.check_window(m)?;
            for (t, step) in seq.iter_mut().enumerate() {
                step.extend_from_slice(m.row(t));
            }
        }
        Ok(seq)
    }

    fn forward_cached(&self, inputs: &[Matrix]) -> Result<ForwardCache> {
        let batch = inputs.len();
        let mut seq = self.to_sequence(inputs)?;
        let mut seqs = Vec::with_capacity(self.spec.layers.len() + 1);
        let mut layer_caches = Vec::with_capacity(self.spec.layers.len());
        let mut width = self.spec.input_features;
        for (li, l) in self.spec.layers.iter().enumerate() {
            let mut outs = Vec::new();
            let mut caches = Vec::new();
            for (d, slot) in self.layout.layers[li].iter().enumerate() {
                let dp = self.dir(l.cell, l.hidden, width, *slot);
                let (hs, cache) = run_direction(&dp, batch, &seq, d == 1);
                outs.push(hs);
                caches.push(cache);
            }
            let pre: Vec<Vec<f64>> = if outs.len() == 1 {
                outs.pop().expect("one direction")
            } else {
                (0..seq.len())
                    .map(|t| {
                        let mut row = Vec::with_capacity(batch * 2 * l.hidden);
                        for b in 0..batch {
                            row.extend_from_slice(&outs[0][t][b * l.hidden..(b + 1) * l.hidden]);
                            row.extend_from_slice(&outs[1][t][b * l.hidden..(b + 1) * l.hidden]);
                        }
                        row
                    })
                    .collect()
            };
            let next: Vec<Vec<f64>> = match l.activation {
                Activation::Identity => pre.clone(),
                Activation::Relu => pre
                    .iter()
                    .map(|s| s.iter().map(|v| v.max(0.0)).collect())
                    .collect(),
            };
            seqs.push(std::mem::replace(&mut seq, next));
            layer_caches.push((pre, caches));
            width = l.output_width();
        }

        let units = self.spec.head_units();
        let mut output = vec![0.0; batch * units];
        let head = match &self.spec.head {
            HeadSpec::Dense => {
                let last = seq.last().expect("input_steps >= 1");
                let w = &self.params[self.layout.groups[self.layout.head[0]].range()];
                let b = &self.params[self.layout.groups[self.layout.head[1]].range()];
                fill_rows(batch, units, b, &mut output);
                matmul_nt(batch, width, units, last, w, &mut output, 1.0);
                HeadCache::Dense
            }
            HeadSpec::Recurrent { cell } => {
                let slot = DirSlots {
                    w: self.layout.head[0],
                    b: self.layout.head[1],
                };
                let dp = self.dir(*cell, units, width, slot);
                let (hs, cache) = run_direction(&dp, batch, &seq, false);
                let last_h = hs.last().expect("input_steps >= 1").clone();
                let gain = &self.params[self.layout.groups[self.layout.head[2]].range()];
                let bias = &self.params[self.layout.groups[self.layout.head[3]].range()];
                for (k, o) in output.iter_mut().enumerate() {
                    let j = k % units;
                    *o = sigmoid(gain[j] * last_h[k] + bias[j]);
                }
                HeadCache::Recurrent { cache, last_h }
            }
        };
        seqs.push(seq);
        Ok(ForwardCache {
            seqs,
            layers: layer_caches,
            head,
            output,
        })
    }

    /// Predicts the `q × F′` continuation of one `p × F` window.
    pub fn forward(&self, window: &Matrix) -> Result<Matrix> {
        Ok(self.forward_batch(std::slice::from_ref(window))?.remove(0))
    }

    pub fn forward_batch(&self, inputs: &[Matrix]) -> Result<Vec<Matrix>> {
        if inputs.is_empty() {
            return Ok(Vec::new());
        }
        let cache = self.forward_cached(inputs)?;
        let (q, f) = (self.spec.output_steps, self.spec.output_features);
        Ok(cache
            .output
            .chunks_exact(q * f)
            .map(|c| Matrix::from_vec(q, f, c.to_vec()).expect("head width is q*F"))
            .collect())
    }

    /// Mean squared error over every target element of the batch.
    pub fn loss(&self, inputs: &[Matrix], targets: &[Matrix]) -> Result<f64> {
        let (loss, _) = self.evaluate(inputs, targets, false, &HashSet::new())?;
        Ok(loss)
    }

    /// MSE loss and its gradient with respect to every parameter, computed by
    /// backpropagation through time over the full window. Gradients of the
    /// named `frozen` groups are zero.
    pub fn backward(&self, inputs: &[Matrix], targets: &[Matrix], frozen: &HashSet<String>) -> Result<(f64, Vec<f64>)> {
        let (loss, grad) = self.evaluate(inputs, targets, true, frozen)?;
        Ok((loss, grad.expect("gradient requested")))
    }

    fn evaluate(
        &self,
        inputs: &[Matrix],
        targets: &[Matrix],
        want_grad: bool,
        frozen: &HashSet<String>,
    ) -> Result<(f64, Option<Vec<f64>>)> {
        if inputs.len() != targets.len() {
            return Err(Error::shape(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if inputs.is_empty() {
            return Err(Error::invalid("empty batch"));
        }
        for t in targets {
            self.check_target(t)?;
        }
        let cache = self.forward_cached(inputs)?;
        let units = self.spec.head_units();
        let count = (inputs.len() * units) as f64;
        let mut dy = vec![0.0; cache.output.len()];
        let mut loss = 0.0;
        for (b, t) in targets.iter().enumerate() {
            for (j, &y) in t.as_slice().iter().enumerate() {
                let k = b * units + j;
                let e = cache.output[k] - y;
                loss += e * e;
                dy[k] = 2.0 * e / count;
            }
        }
        loss /= count;
        if !want_grad {
            return Ok((loss, None));
        }
        let mut grad = self.backprop(inputs.len(), &cache, dy);
        for g in &self.layout.groups {
            if frozen.contains(&g.name) {
                grad[g.range()].iter_mut().for_each(|v| *v = 0.0);
            }
        }
        Ok((loss, Some(grad)))
    }

    fn backprop(&self, batch: usize, cache: &ForwardCache, dy: Vec<f64>) -> Vec<f64> {
        let mut grad = vec![0.0; self.layout.total];
        let units = self.spec.head_units();
        let trunk = &cache.seqs[cache.seqs.len() - 1];
        let width = self.spec.trunk_width();
        let steps = trunk.len();
        let mut dseq: Vec<Vec<f64>> = vec![vec![0.0; batch * width]; steps];

        match &cache.head {
            HeadCache::Dense => {
                let gw = self.layout.groups[self.layout.head[0]].range();
                let gb = self.layout.groups[self.layout.head[1]].range();
                matmul_tn_acc(batch, units, width, &dy, &trunk[steps - 1], &mut grad[gw.clone()]);
                col_sum_acc(batch, units, &dy, &mut grad[gb]);
                matmul_nn(batch, units, width, &dy, &self.params[gw], &mut dseq[steps - 1], 0.0);
            }
            HeadCache::Recurrent { cache: hc, last_h } => {
                let HeadSpec::Recurrent { cell } = &self.spec.head else {
                    unreachable!("head cache matches spec")
                };
                let g_gain = self.layout.groups[self.layout.head[2]].range();
                let g_bias = self.layout.groups[self.layout.head[3]].range();
                let gain = &self.params[g_gain.clone()];
                let mut dh_last = vec![0.0; batch * units];
                for k in 0..batch * units {
                    let j = k % units;
                    let y = cache.output[k];
                    let da = dy[k] * y * (1.0 - y);
                    grad[g_gain.start + j] += da * last_h[k];
                    grad[g_bias.start + j] += da;
                    dh_last[k] = da * gain[j];
                }
                let mut dhs = vec![vec![0.0; batch * units]; steps];
                dhs[steps - 1] = dh_last;
                let slot = DirSlots {
                    w: self.layout.head[0],
                    b: self.layout.head[1],
                };
                let dp = self.dir(*cell, units, width, slot);
                let (gw, gb) = self.split_grad(&mut grad, slot);
                dseq = backward_direction(&dp, batch, hc, &dhs, gw, gb);
            }
        }

        for (li, l) in self.spec.layers.iter().enumerate().rev() {
            let (pre, dir_caches) = &cache.layers[li];
            if l.activation == Activation::Relu {
                for (d, p) in dseq.iter_mut().zip(pre) {
                    for (g, v) in d.iter_mut().zip(p) {
                        if *v <= 0.0 {
                            *g = 0.0;
                        }
                    }
                }
            }
            let in_width = if li == 0 {
                self.spec.input_features
            } else {
                self.spec.layers[li - 1].output_width()
            };
            let h = l.hidden;
            let mut dinput = vec![vec![0.0; batch * in_width]; steps];
            for (d, slot) in self.layout.layers[li].iter().enumerate() {
                let dhs: Vec<Vec<f64>> = if l.bidirectional {
                    dseq.iter()
                        .map(|s| {
                            (0..batch)
                                .flat_map(|b| s[b * 2 * h + d * h..b * 2 * h + (d + 1) * h].iter().copied())
                                .collect()
                        })
                        .collect()
                } else {
                    dseq.clone()
                };
                let dp = self.dir(l.cell, h, in_width, *slot);
                let (gw, gb) = self.split_grad(&mut grad, *slot);
                let dx = backward_direction(&dp, batch, &dir_caches[d], &dhs, gw, gb);
                for (acc, part) in dinput.iter_mut().zip(dx) {
                    acc.iter_mut().zip(part).for_each(|(a, v)| *a += v);
                }
            }
            dseq = dinput;
        }
        grad
    }

    fn split_grad<'g>(&self, grad: &'g mut [f64], slot: DirSlots) -> (&'g mut [f64], &'g mut [f64]) {
        let w = self.layout.groups[slot.w].range();
        let b = self.layout.groups[slot.b].range();
        // Bias always directly follows its weight matrix.
        debug_assert_eq!(w.end, b.start);
        let (left, right) = grad[w.start..b.end].split_at_mut(w.len());
        (left, right)
    }
}

/// Trunk outputs (after activations) of every layer for one window; used to
/// inspect intermediate representations.
pub fn layer_outputs(net: &Network, window: &Matrix) -> Result<Vec<Matrix>> {
    let cache = net.forward_cached(std::slice::from_ref(window))?;
    Ok(cache.seqs[1..]
        .iter()
        .zip(&net.spec.layers)
        .map(|(seq, l)| {
            let rows: Vec<&[f64]> = seq.iter().map(|s| &s[..]).collect();
            let m = Matrix::from_rows(&rows).expect("equal widths");
            debug_assert_eq!(m.cols(), l.output_width());
            m
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn window(p: usize, f: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..p * f).map(|_| rng.random_range(0.0..1.0)).collect();
        Matrix::from_vec(p, f, data).unwrap()
    }

    #[test]
    fn zero_single_feature_net_predicts_zero() {
        for kind in RecurrentKind::ALL {
            let net = Network::zeros(NetworkSpec::single_feature(kind, 4, 3)).unwrap();
            let y = net.forward(&window(4, 1, 1)).unwrap();
            assert_eq!(y.shape(), (3, 1));
            assert!(y.as_slice().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn zero_multi_feature_net_predicts_half() {
        for kind in RecurrentKind::ALL {
            let net = Network::zeros(NetworkSpec::multi_feature(kind, 3, 5)).unwrap();
            let y = net.forward(&window(3, 3, 2)).unwrap();
            assert_eq!(y.shape(), (5, 3));
            assert!(y.as_slice().iter().all(|v| *v == 0.5));
        }
    }

    #[test]
    fn output_shape_follows_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in 1..=7 {
            for q in [1, 2, 30] {
                let sf = Network::init(NetworkSpec::single_feature(RecurrentKind::Gru, p, q), &mut rng).unwrap();
                assert_eq!(sf.forward(&window(p, 1, 3)).unwrap().shape(), (q, 1));
                let mf = Network::init(NetworkSpec::multi_feature(RecurrentKind::Rnn, p, q), &mut rng).unwrap();
                assert_eq!(mf.forward(&window(p, 3, 3)).unwrap().shape(), (q, 3));
            }
        }
    }

    #[test]
    fn wrong_window_shape_is_rejected() {
        let net = Network::zeros(NetworkSpec::single_feature(RecurrentKind::Lstm, 4, 1)).unwrap();
        assert!(net.forward(&window(3, 1, 0)).is_err());
        assert!(net.forward(&window(4, 3, 0)).is_err());
    }

    #[test]
    fn layout_is_contiguous_and_named() {
        let net = Network::zeros(NetworkSpec::multi_feature(RecurrentKind::Bilstm, 3, 3)).unwrap();
        let mut end = 0;
        for g in net.groups() {
            assert_eq!(g.offset, end);
            end += g.len;
        }
        assert_eq!(end, net.param_count());
        assert!(net.group("layer1.bwd.w").is_some());
        assert!(net.group("head.gain").is_some());
        // layer0 forward: 4 gates × 64 × (64 + 3)
        assert_eq!(net.group("layer0.fwd.w").unwrap().len, 4 * 64 * 67);
        // layer1 consumes the 128-wide bidirectional output
        assert_eq!(net.group("layer1.fwd.w").unwrap().len, 4 * 32 * (32 + 128));
    }

    #[test]
    fn init_sets_forget_bias_and_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = Network::init(NetworkSpec::multi_feature(RecurrentKind::Lstm, 2, 2), &mut rng).unwrap();
        let b = net.group("layer0.fwd.b").unwrap().range();
        assert!(net.params()[b.clone()][..64].iter().all(|v| *v == 1.0));
        assert!(net.params()[b][64..].iter().all(|v| *v == 0.0));
        let g = net.group("head.gain").unwrap().range();
        assert!(net.params()[g].iter().all(|v| *v == 1.0));
    }
}
