//! The domain model: construct definitions, government patterns and the
//! detector that finds construct instances in annotated stories.

mod detect;
mod matcher;

pub use detect::{constructs_for_token, detect_constructs, match_government, ConstructError};
pub use matcher::{LemmaClass, MatchContext, TokenMatcher};

use serde::{Deserialize, Serialize};

use crate::features::FeatureBundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstructKind {
    MorphFeature,
    Government,
    Construction,
    LemmaClass,
    Orthography,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CefrLevel {
    A1,
    A2,
    B1,
    B2,
    C1,
    C2,
}

impl CefrLevel {
    pub const ALL: [CefrLevel; 6] = [
        CefrLevel::A1,
        CefrLevel::A2,
        CefrLevel::B1,
        CefrLevel::B2,
        CefrLevel::C1,
        CefrLevel::C2,
    ];
}

/// A lexical requirement a head word imposes on its argument.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GovernmentPattern {
    #[serde(default)]
    pub governor: Option<String>,
    #[serde(default)]
    pub governor_class: Option<String>,
    pub pos: String,
    #[serde(default)]
    pub case: Option<String>,
    #[serde(default)]
    pub preposition: Option<String>,
    #[serde(default)]
    pub clause: Option<String>,
    /// Search the whole sentence rather than the phrase right after the governor.
    #[serde(default = "yes")]
    pub direction_free: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct HintTemplates {
    /// Level-0 context hint, e.g. `This is the object of the verb '{governor}'.`
    #[serde(default)]
    pub context: Option<String>,
    /// Feature categories that get a "use another ..." hint.
    #[serde(default)]
    pub categories: Vec<String>,
}

impl HintTemplates {
    pub fn is_empty(&self) -> bool {
        self.context.is_none() && self.categories.is_empty()
    }
}

/// One piece of a paraphrase: literal text or a regenerated matched token.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParaphrasePart {
    Literal {
        literal: String,
    },
    Slot {
        slot: usize,
        /// Features replacing the token's own; `None` keeps them.
        #[serde(default)]
        features: Option<FeatureBundle>,
        /// Overrides applied on top.
        #[serde(default)]
        set: FeatureBundle,
        /// Category -> matcher position to copy the value from.
        #[serde(default)]
        copy: std::collections::BTreeMap<String, usize>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParaphraseTemplate {
    /// Surrounding text; `{}` receives the generated clause.
    pub text: String,
    pub parts: Vec<ParaphrasePart>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructDef {
    pub id: String,
    pub name: String,
    pub kind: ConstructKind,
    pub pattern: Vec<TokenMatcher>,
    #[serde(default)]
    pub hints: HintTemplates,
    #[serde(default)]
    pub paraphrase: Option<ParaphraseTemplate>,
    #[serde(default)]
    pub cefr: Option<CefrLevel>,
    #[serde(default)]
    pub recipe: Option<String>,
}

impl ConstructDef {
    pub fn candidate_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.pattern
            .iter()
            .enumerate()
            .filter(|(_, m)| m.candidate)
            .map(|(i, _)| i)
    }

    pub fn governor_position(&self) -> Option<usize> {
        self.pattern.iter().position(|m| m.governor)
    }
}

/// A detected construct anchored to token positions of one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstructInstance {
    pub construct: String,
    pub story: String,
    pub sentence: usize,
    /// Story-level token index per matcher position.
    pub matched: Vec<usize>,
    pub candidates: Vec<usize>,
}

impl ConstructInstance {
    pub fn covers(&self, token: usize) -> bool {
        self.matched.contains(&token)
    }
}
