//! Tokenization, sentence splitting, agreement-based disambiguation and
//! shallow chunking.

mod chunk;
mod disambiguate;
mod tokenize;

pub use chunk::chunk;
pub use disambiguate::disambiguate;
pub use tokenize::tokenize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructs::{ConstructInstance, TokenMatcher};
use crate::features::FeatureBundle;
use crate::morphology::{analyze, MorphAnalysis};
use crate::pack::LanguagePack;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("text is empty")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Character (Unicode scalar) offsets into the story text, end exclusive.
    pub start: usize,
    pub end: usize,
    pub sentence: usize,
    #[serde(default)]
    pub punct: bool,
    #[serde(default)]
    pub analyses: Vec<MorphAnalysis>,
    #[serde(default)]
    pub chosen: Option<MorphAnalysis>,
    #[serde(default)]
    pub ambiguous: bool,
}

impl Token {
    pub fn chosen_lemma(&self) -> Option<&str> {
        self.chosen.as_ref().map(|a| a.lemma.as_str())
    }

    pub fn chosen_pos(&self) -> Option<&str> {
        self.chosen.as_ref().map(|a| a.pos.as_str())
    }

    pub fn chosen_feature(&self, category: &str) -> Option<&str> {
        self.chosen.as_ref().and_then(|a| a.features.get(category))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChunkKind {
    NounPhrase,
    PrepPhrase,
    AnalyticVerb,
}

/// Token span `start..=end` with its head token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub kind: ChunkKind,
    pub start: usize,
    pub end: usize,
    pub head: usize,
}

/// Tokens `start..end` (exclusive) and the matching character range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub start: usize,
    pub end: usize,
    pub char_start: usize,
    pub char_end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedStory {
    pub id: String,
    pub language: String,
    pub text: String,
    pub sentences: Vec<Sentence>,
    pub tokens: Vec<Token>,
    pub chunks: Vec<Chunk>,
    #[serde(default)]
    pub constructs: Vec<ConstructInstance>,
}

impl AnnotatedStory {
    pub fn sentence_tokens(&self, sentence: usize) -> std::ops::Range<usize> {
        let s = &self.sentences[sentence];
        s.start..s.end
    }

    /// Text covered by tokens `start..=end`.
    pub fn span_text(&self, start: usize, end: usize) -> String {
        let from = self.tokens[start].start;
        let to = self.tokens[end].end;
        self.text.chars().skip(from).take(to - from).collect()
    }

    pub fn sentence_text(&self, sentence: usize) -> String {
        let s = &self.sentences[sentence];
        self.text
            .chars()
            .skip(s.char_start)
            .take(s.char_end - s.char_start)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgreementRule {
    pub dependents: Vec<String>,
    pub heads: Vec<String>,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubjectRule {
    pub verb_pos: Vec<String>,
    pub subject_pos: Vec<String>,
    pub case: String,
    /// Features every finite verb reading carries.
    pub finite: FeatureBundle,
    pub categories: Vec<String>,
    /// Person assumed for subjects that carry none (nouns).
    #[serde(default)]
    pub noun_person: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticPattern {
    pub id: String,
    pub sequence: Vec<TokenMatcher>,
}

/// Pack-level rules the pipeline runs on.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GrammarRules {
    #[serde(default)]
    pub abbreviations: Vec<String>,
    #[serde(default)]
    pub folds: Vec<(String, String)>,
    #[serde(default)]
    pub np_modifiers: Vec<String>,
    #[serde(default)]
    pub np_heads: Vec<String>,
    #[serde(default)]
    pub adpositions: Vec<String>,
    #[serde(default)]
    pub agreement: Vec<AgreementRule>,
    #[serde(default)]
    pub subject: Option<SubjectRule>,
    #[serde(default)]
    pub analytic: Vec<AnalyticPattern>,
}

/// Full pipeline: tokens with analyses, disambiguation and chunks.
/// Construct detection is a separate step.
pub fn annotate(
    id: &str,
    text: &str,
    pack: &LanguagePack,
) -> Result<AnnotatedStory, PipelineError> {
    let (mut tokens, sentences) = tokenize(text, &pack.grammar.abbreviations)?;
    for tok in tokens.iter_mut().filter(|t| !t.punct) {
        tok.analyses = analyze(&tok.surface, pack).unwrap_or_default();
    }
    let mut chunks = Vec::new();
    for s in &sentences {
        let slice = &mut tokens[s.start..s.end];
        disambiguate(slice, pack);
        chunks.extend(chunk(slice, pack).into_iter().map(|c| Chunk {
            start: c.start + s.start,
            end: c.end + s.start,
            head: c.head + s.start,
            ..c
        }));
    }
    Ok(AnnotatedStory {
        id: id.to_string(),
        language: pack.language.clone(),
        text: text.to_string(),
        sentences,
        tokens,
        chunks,
        constructs: Vec::new(),
    })
}
