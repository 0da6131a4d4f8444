//! Versioned on-disk model container for the `fit` subcommand.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use gpca::{DataMatrix, KernelModel, PrincipalBasis};

use crate::classify::SubspaceModel;
use crate::error::{BenchError, Result};

pub const MODEL_FORMAT: &str = "gpca-model/1";

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelPayload {
    Linear { data: DataMatrix, basis: PrincipalBasis },
    Kernel { model: KernelModel },
}

#[derive(Serialize, Deserialize)]
pub struct ModelFile {
    /// Format tag; readers must check it before trusting the payload.
    pub format: String,
    pub objective: String,
    pub kernel: Option<String>,
    pub components: usize,
    pub seed: u64,
    pub payload: ModelPayload,
}

pub fn save_model(model: &SubspaceModel, objective: &str, seed: u64, path: &Path) -> Result<()> {
    let (payload, kernel) = match model {
        SubspaceModel::Linear { data, basis } => (
            ModelPayload::Linear { data: data.clone(), basis: basis.clone() },
            None,
        ),
        SubspaceModel::Kernel(model) => (
            ModelPayload::Kernel { model: (**model).clone() },
            Some(model.kernel().to_string()),
        ),
    };
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        objective: objective.into(),
        kernel,
        components: model.components(),
        seed,
        payload,
    };
    let json = serde_json::to_string(&file)?;
    fs::write(path, json).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })
}

pub fn load_model(path: &Path) -> Result<(SubspaceModel, ModelFile)> {
    let text = fs::read_to_string(path)
        .map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
    let file: ModelFile = serde_json::from_str(&text)?;
    if file.format != MODEL_FORMAT {
        return Err(BenchError::Load {
            path: path.to_path_buf(),
            message: format!("unsupported model format '{}', want '{MODEL_FORMAT}'", file.format),
        });
    }
    let model = match &file.payload {
        ModelPayload::Linear { data, basis } => {
            SubspaceModel::Linear { data: data.clone(), basis: basis.clone() }
        }
        ModelPayload::Kernel { model } => SubspaceModel::Kernel(Box::new(model.clone())),
    };
    Ok((model, file))
}
