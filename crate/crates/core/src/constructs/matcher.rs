use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize};

use crate::features::FeatureBundle;
use crate::morphology::MorphAnalysis;
use crate::pack::LanguagePack;
use crate::pipeline::{Chunk, ChunkKind, Token};

/// Conjunctive constraints on one token.
///
/// Morphological constraints read the token's chosen analysis, so they never
/// match an ambiguous or unknown word. `surface` is a case-insensitive regular
/// expression over the raw token text and needs no analysis.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TokenMatcher {
    #[serde(
        default,
        deserialize_with = "one_or_many",
        skip_serializing_if = "Vec::is_empty"
    )]
    pub lemma: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma_class: Option<String>,
    #[serde(
        default,
        deserialize_with = "one_or_many",
        skip_serializing_if = "Vec::is_empty"
    )]
    pub pos: Vec<String>,
    #[serde(default, skip_serializing_if = "FeatureBundle::is_empty")]
    pub features: FeatureBundle,
    /// Fails when the chosen analysis carries any of these pairs.
    #[serde(default, skip_serializing_if = "FeatureBundle::is_empty")]
    pub not_features: FeatureBundle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<String>,
    #[serde(skip)]
    pub(crate) surface_re: Option<Regex>,
    /// Token lies inside a chunk of this kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunk: Option<ChunkKind>,
    /// Token's lemma has a government pattern requiring this clause marker.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub governs_clause: Option<String>,
    /// Marks the governing head; binds only to heads of analytic verb chunks.
    #[serde(default)]
    pub governor: bool,
    /// Token must be a government argument of the token at that matcher position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub governed_by: Option<usize>,
    #[serde(default)]
    pub anywhere: bool,
    #[serde(default)]
    pub candidate: bool,
    /// Head element of an analytic verb pattern.
    #[serde(default)]
    pub head: bool,
}

impl TokenMatcher {
    pub(crate) fn compile(&mut self) -> Result<(), regex::Error> {
        if let Some(src) = &self.surface {
            self.surface_re = Some(Regex::new(&format!("(?i){src}"))?);
        }
        Ok(())
    }

    fn needs_analysis(&self) -> bool {
        !self.lemma.is_empty()
            || self.lemma_class.is_some()
            || !self.pos.is_empty()
            || !self.features.is_empty()
            || !self.not_features.is_empty()
            || self.governs_clause.is_some()
    }

    /// Constraints on the analysis alone (no chunk or context checks).
    pub fn accepts_analysis(&self, a: &MorphAnalysis, pack: &LanguagePack) -> bool {
        if !self.lemma.is_empty() && !self.lemma.contains(&a.lemma) {
            return false;
        }
        if !self.pos.is_empty() && !self.pos.contains(&a.pos) {
            return false;
        }
        if !a.features.contains(&self.features) {
            return false;
        }
        if self
            .not_features
            .iter()
            .any(|(c, v)| a.features.get(c) == Some(v))
        {
            return false;
        }
        if let Some(class) = &self.lemma_class {
            if !pack.lemma_class_contains(class, &a.lemma) {
                return false;
            }
        }
        if let Some(marker) = &self.governs_clause {
            let governs = pack
                .government_for(&a.lemma, &a.pos)
                .any(|g| g.clause.as_deref() == Some(marker.as_str()));
            if !governs {
                return false;
            }
        }
        true
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    })
}

/// Lemma-set membership, lemma-ending pattern, or presence of a lexicon link.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LemmaClass {
    pub id: String,
    #[serde(default)]
    pub lemmas: Vec<String>,
    #[serde(default)]
    pub pattern: Option<String>,
    #[serde(skip)]
    pub(crate) pattern_re: Option<Regex>,
    #[serde(default)]
    pub link: Option<String>,
}

impl LemmaClass {
    pub(crate) fn compile(&mut self) -> Result<(), regex::Error> {
        if let Some(p) = &self.pattern {
            self.pattern_re = Some(Regex::new(p)?);
        }
        Ok(())
    }
}

/// A story's tokens and chunks as seen by matchers.
pub struct MatchContext<'a> {
    pub tokens: &'a [Token],
    pub chunks: &'a [Chunk],
    pub pack: &'a LanguagePack,
}

impl<'a> MatchContext<'a> {
    pub fn chunk_containing(&self, token: usize, kind: ChunkKind) -> Option<&'a Chunk> {
        self.chunks
            .iter()
            .find(|c| c.kind == kind && c.start <= token && token <= c.end)
    }

    /// Local constraints of `m` on token `idx`.
    pub fn accepts(&self, m: &TokenMatcher, idx: usize) -> bool {
        let tok = &self.tokens[idx];
        if let Some(re) = &m.surface_re {
            if !re.is_match(&tok.surface) {
                return false;
            }
        }
        if m.needs_analysis() {
            match &tok.chosen {
                Some(a) if m.accepts_analysis(a, self.pack) => {}
                _ => return false,
            }
        }
        if let Some(kind) = m.chunk {
            if self.chunk_containing(idx, kind).is_none() {
                return false;
            }
        }
        if m.governor {
            if let Some(c) = self.chunk_containing(idx, ChunkKind::AnalyticVerb) {
                if c.head != idx {
                    return false;
                }
            }
        }
        true
    }
}
