use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoxDims;
use crate::mpack::build_milp;

use super::episode::{run_episode_observed, EpisodeConfig, EpisodeMetrics};

/// One exported LP text file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFile {
    pub name: String,
    pub content: String,
}

pub fn model_file_name(step: u64, lookahead: usize) -> String {
    format!("step_{step}_l{lookahead}.lp-format")
}

/// Runs an episode and builds, before every step, the MILP for the open
/// bins and the full conveyor window.
pub fn episode_models(collection: &[BoxDims], config: &EpisodeConfig, seed: u64) -> Result<(Vec<ModelFile>, EpisodeMetrics)> {
    let policy = config.policy;
    let mut files = Vec::new();
    let metrics = run_episode_observed(collection, config, seed, &mut |step, bins, window| {
        let model = build_milp(bins, window, &policy.robot, &policy.weights)?;
        files.push(ModelFile { name: model_file_name(step, window.len()), content: model.to_lp_string()? });
        Ok(())
    })?;
    Ok((files, metrics))
}

pub fn write_model_files(dir: &Path, files: &[ModelFile]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for f in files {
        let path = dir.join(&f.name);
        std::fs::write(&path, &f.content).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
