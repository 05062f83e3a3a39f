//! Model files: `<name>.json` manifest plus `<name>.bin`, the flat parameter
//! vector in declared group order as little-endian `f64`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{Network, NetworkSpec, ParamGroup};
use super::train::{TrainReport, TrainedModel};
use crate::error::{Error, Result};
use crate::features::Scaler;

pub const PARAM_FORMAT: &str = "f64-le";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub spec: NetworkSpec,
    pub seed: u64,
    pub scaler: Option<Scaler>,
    pub param_format: String,
    pub param_count: usize,
    pub groups: Vec<ParamGroup>,
    pub report: TrainReport,
}

pub fn encode_params(params: &[f64]) -> Vec<u8> {
    params.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_params(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::shape(format!("{} bytes is not a whole number of f64", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn save_model(model: &TrainedModel, dir: &Path, name: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = ModelManifest {
        spec: model.network.spec().clone(),
        seed: model.seed,
        scaler: model.scaler.clone(),
        param_format: PARAM_FORMAT.into(),
        param_count: model.network.param_count(),
        groups: model.network.groups().to_vec(),
        report: model.report.clone(),
    };
    let json_path = dir.join(format!("{name}.json"));
    fs::write(&json_path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&json_path, e))?;
    let bin_path = dir.join(format!("{name}.bin"));
    fs::write(&bin_path, encode_params(model.network.params())).map_err(|e| Error::io(&bin_path, e))?;
    Ok(())
}

pub fn load_model(dir: &Path, name: &str) -> Result<TrainedModel> {
    let json_path = dir.join(format!("{name}.json"));
    let raw = fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
    let manifest: ModelManifest = serde_json::from_str(&raw)?;
    if manifest.param_format != PARAM_FORMAT {
        return Err(Error::invalid(format!("unsupported parameter format {}", manifest.param_format)));
    }
    let bin_path = dir.join(format!("{name}.bin"));
    let bytes = fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    let params = decode_params(&bytes)?;
    if params.len() != manifest.param_count {
        return Err(Error::shape(format!(
            "manifest declares {} parameters, file holds {}",
            manifest.param_count,
            params.len()
        )));
    }
    let mut network = Network::zeros(manifest.spec)?;
    if network.groups() != manifest.groups.as_slice() {
        return Err(Error::shape("parameter groups do not match the network spec"));
    }
    network.set_params(params)?;
    Ok(TrainedModel {
        network,
        report: manifest.report,
        seed: manifest.seed,
        scaler: manifest.scaler,
    })
}
