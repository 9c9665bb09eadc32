//! Hand-labeled construct instances shipped with a pack.

use std::fs;

use serde::{Deserialize, Serialize};

use crate::pack::{LanguagePack, PackError};
use crate::pipeline::AnnotatedStory;

/// An instance described by surfaces rather than indices, so gold files stay
/// readable and survive tokenizer changes that keep the words.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GoldInstance {
    pub sentence: usize,
    pub construct: String,
    pub tokens: Vec<String>,
    pub candidates: Vec<String>,
}

/// Gold corpus text and its instances, sorted.
pub fn load_gold(pack: &LanguagePack) -> Result<(String, Vec<GoldInstance>), PackError> {
    let Some(files) = &pack.gold else {
        return Err(PackError::MissingFile(pack.root.join("gold")));
    };
    let text = fs::read_to_string(&files.corpus)
        .map_err(|_| PackError::MissingFile(files.corpus.clone()))?;
    let json = fs::read_to_string(&files.instances)
        .map_err(|_| PackError::MissingFile(files.instances.clone()))?;
    let mut gold: Vec<GoldInstance> =
        serde_json::from_str(&json).map_err(|e| PackError::SchemaViolation {
            pointer: files.instances.display().to_string(),
            message: e.to_string(),
        })?;
    gold.sort();
    Ok((text, gold))
}

/// Detected instances in gold form, sorted.
pub fn project(story: &AnnotatedStory) -> Vec<GoldInstance> {
    let surf = |idx: &[usize]| {
        idx.iter()
            .map(|&i| story.tokens[i].surface.clone())
            .collect()
    };
    let mut out: Vec<GoldInstance> = story
        .constructs
        .iter()
        .map(|i| GoldInstance {
            sentence: i.sentence,
            construct: i.construct.clone(),
            tokens: surf(&i.matched),
            candidates: surf(&i.candidates),
        })
        .collect();
    out.sort();
    out
}

/// Precision and recall of `detected` against `gold`.
pub fn score(detected: &[GoldInstance], gold: &[GoldInstance]) -> (f64, f64) {
    let hits = detected.iter().filter(|d| gold.contains(d)).count() as f64;
    let ratio = |n: usize| if n == 0 { 1.0 } else { hits / n as f64 };
    (ratio(detected.len()), ratio(gold.len()))
}
