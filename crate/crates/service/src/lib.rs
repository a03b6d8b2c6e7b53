//! Command-line front end and local HTTP editing service for `.ifvc`
//! facial-semantics streams.

pub mod api;
pub mod cli;
pub mod view;

use std::path::Path;

use anyhow::Context;
use ifvc::MorphableModel;

/// Model name accepted anywhere a `.mmb` path is expected.
pub const SYNTHETIC_MODEL: &str = "synthetic";

/// Loads a model from a `.mmb` path, or the built-in synthetic model when
/// the argument is `synthetic`. Without an argument the built-in model is
/// used if the stream was encoded against it.
pub fn resolve_model(arg: Option<&Path>, stream_model_id: &str) -> anyhow::Result<MorphableModel> {
    match arg {
        Some(p) if p.as_os_str() == SYNTHETIC_MODEL => Ok(MorphableModel::synthetic()),
        Some(p) => MorphableModel::load(p).with_context(|| format!("loading model {}", p.display())),
        None => {
            let builtin = MorphableModel::synthetic();
            if stream_model_id.is_empty() || stream_model_id == builtin.name {
                Ok(builtin)
            } else {
                anyhow::bail!(
                    "stream was encoded against model `{stream_model_id}`; pass its .mmb with --model"
                )
            }
        }
    }
}
