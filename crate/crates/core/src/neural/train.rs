//! Full-batch Adam training with gradient clipping and dev-set early stopping.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{clip_by_norm, Adam};
use super::network::{Network, NetworkSpec};
use crate::error::{Error, Result};
use crate::features::{Scaler, WindowedDataset};
use crate::matrix::Matrix;
use crate::rpa::Predictor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub clip_norm: f64,
    pub seed: u64,
    /// Parameter groups (e.g. `"layer0.bwd.w"`) left untouched by training.
    pub frozen: Vec<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_epochs: 300,
            patience: 20,
            clip_norm: 5.0,
            seed: 0,
            frozen: Vec::new(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [self.learning_rate, self.epsilon, self.clip_norm];
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::invalid("learning rate, epsilon and clip norm must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::invalid("adam betas must lie in [0, 1)"));
        }
        if self.patience > self.max_epochs {
            return Err(Error::invalid("patience exceeds max epochs"));
        }
        Ok(())
    }
}

/// Loss history; index 0 is the untrained network, index `k` the network
/// after `k` updates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_mse: Vec<f64>,
    pub dev_mse: Vec<f64>,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub stopped_early: bool,
}

/// A trained network, frozen for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub network: Network,
    pub report: TrainReport,
    pub seed: u64,
    pub scaler: Option<Scaler>,
}

impl TrainedModel {
    pub fn predict(&self, window: &Matrix) -> Result<Matrix> {
        self.network.forward(window)
    }

    pub fn with_scaler(mut self, scaler: Option<Scaler>) -> Self {
        self.scaler = scaler;
        self
    }
}

impl Predictor for TrainedModel {
    fn input_steps(&self) -> usize {
        self.network.spec().input_steps
    }

    fn output_steps(&self) -> usize {
        self.network.spec().output_steps
    }

    fn features(&self) -> usize {
        self.network.spec().output_features
    }

    fn predict(&self, window: &Matrix) -> Result<Matrix> {
        TrainedModel::predict(self, window)
    }
}

/// Trains `spec` on `data`, early-stopping on `dev` (or on the training loss
/// when `dev` is empty). Deterministic given `cfg.seed`.
pub fn train(spec: NetworkSpec, data: &WindowedDataset, dev: &WindowedDataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = Network::init(spec, &mut rng)?;
    for name in &cfg.frozen {
        if net.group(name).is_none() {
            return Err(Error::invalid(format!("unknown parameter group {name:?}")));
        }
    }
    let frozen: HashSet<String> = cfg.frozen.iter().cloned().collect();
    let mut adam = Adam::new(net.param_count(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);

    let dev_loss = |net: &Network, fallback: f64| -> Result<f64> {
        if dev.is_empty() {
            Ok(fallback)
        } else {
            net.loss(&dev.inputs, &dev.targets)
        }
    };

    let mut report = TrainReport::default();
    let (mut loss, mut grad) = net.backward(&data.inputs, &data.targets, &frozen)?;
    if !loss.is_finite() {
        return Err(Error::Training(format!("non-finite initial loss {loss}")));
    }
    report.train_mse.push(loss);
    let d0 = dev_loss(&net, loss)?;
    report.dev_mse.push(d0);
    let mut best = (d0, net.params().to_vec(), 0usize);
    let mut since_best = 0;

    for epoch in 1..=cfg.max_epochs {
        clip_by_norm(&mut grad, cfg.clip_norm);
        adam.step(net.params_mut(), &grad);
        (loss, grad) = net.backward(&data.inputs, &data.targets, &frozen)?;
        let d = dev_loss(&net, loss)?;
        if !loss.is_finite() || !d.is_finite() {
            return Err(Error::Training(format!(
                "non-finite loss at epoch {epoch} (train {loss}, dev {d})"
            )));
        }
        report.train_mse.push(loss);
        report.dev_mse.push(d);
        report.epochs_run = epoch;
        if d < best.0 {
            best = (d, net.params().to_vec(), epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                report.stopped_early = true;
                break;
            }
        }
    }
    report.best_epoch = best.2;
    net.set_params(best.1)?;
    Ok(TrainedModel {
        network: net,
        report,
        seed: cfg.seed,
        scaler: data.scaler.clone(),
    })
}
