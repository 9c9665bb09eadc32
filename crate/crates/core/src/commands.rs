//! Library side of the command-line tools. Each function returns the text
//! for standard output; the binary only parses flags and prints.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::pack::{load_pack, validate_pack, PackError};
use crate::pipeline::PipelineError;
use crate::simulate::{simulate, SimulationError, SimulationSpec};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Pack(#[from] PackError),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

/// Validation outcome: one line per problem, and whether the pack is valid.
pub fn cmd_pack_validate(path: &Path) -> (bool, String) {
    match validate_pack(path) {
        Ok(pack) => (
            true,
            format!(
                "ok: {} ({}): {} paradigms, {} lexemes, {} constructs\n",
                pack.name,
                pack.language,
                pack.morphology.paradigms.len(),
                pack.morphology.lexicon.len(),
                pack.constructs.len()
            ),
        ),
        Err(errors) => (
            false,
            errors.iter().map(|e| format!("error: {e}\n")).collect(),
        ),
    }
}

/// Annotated story JSON, construct instances included.
pub fn cmd_annotate(pack: &Path, text: &Path) -> Result<String, CommandError> {
    let pack = load_pack(pack)?;
    let body = fs::read_to_string(text).map_err(|source| CommandError::Read {
        path: text.display().to_string(),
        source,
    })?;
    let id = text
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let story = crate::process_story(&id, &body, &pack)?;
    Ok(serde_json::to_string_pretty(&story).expect("stories serialize") + "\n")
}

/// Recovery report JSON; the observation log goes to `log` when given.
pub fn cmd_simulate(spec: &SimulationSpec, log: Option<&Path>) -> Result<String, CommandError> {
    let (sim, report) = simulate(spec)?;
    if let Some(path) = log {
        let mut out = String::new();
        for o in &sim.observations {
            out.push_str(&serde_json::to_string(o).expect("observations serialize"));
            out.push('\n');
        }
        fs::write(path, out).map_err(|source| CommandError::Write {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(serde_json::to_string_pretty(&report).expect("reports serialize") + "\n")
}
