//! Paradigm-table morphology: analysis and generation of inflected forms.
//!
//! Every lexeme names a paradigm and supplies stems. A paradigm slot realizes
//! a surface form as `stem[i]`, optionally rewritten at its end, plus a
//! literal suffix. The analyzer is the inverse table of all generated forms,
//! so analysis and generation can never disagree.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::features::FeatureBundle;
use crate::pack::LanguagePack;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphError {
    #[error("input is empty")]
    EmptyInput,
    #[error("unknown lemma `{lemma}` ({pos})")]
    UnknownLemma { lemma: String, pos: String },
    #[error("invalid features: {0}")]
    InvalidFeatures(String),
}

/// Feature categories, their values and display labels.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub parts_of_speech: Vec<PartOfSpeech>,
    #[serde(rename = "category", default)]
    pub categories: Vec<Category>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartOfSpeech {
    pub id: String,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Category {
    pub name: String,
    pub label: String,
    pub values: Vec<CategoryValue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryValue {
    pub id: String,
    pub label: String,
}

impl FeatureSchema {
    pub fn category(&self, name: &str) -> Option<&Category> {
        self.categories.iter().find(|c| c.name == name)
    }

    pub fn has_pos(&self, pos: &str) -> bool {
        self.parts_of_speech.iter().any(|p| p.id == pos)
    }

    pub fn has_value(&self, category: &str, value: &str) -> bool {
        self.category(category)
            .is_some_and(|c| c.values.iter().any(|v| v.id == value))
    }

    /// First category/value pair of `bundle` missing from the schema.
    pub fn check(&self, bundle: &FeatureBundle) -> Result<(), String> {
        for (c, v) in bundle.iter() {
            match self.category(c) {
                None => return Err(format!("unknown feature category `{c}`")),
                Some(cat) if !cat.values.iter().any(|x| x.id == v) => {
                    return Err(format!("unknown value `{v}` for category `{c}`"))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn category_label<'a>(&'a self, category: &'a str) -> &'a str {
        self.category(category)
            .map(|c| c.label.as_str())
            .unwrap_or(category)
    }

    pub fn value_label<'a>(&'a self, category: &str, value: &'a str) -> &'a str {
        self.category(category)
            .and_then(|c| c.values.iter().find(|v| v.id == value))
            .map(|v| v.label.as_str())
            .unwrap_or(value)
    }
}

/// Replace `from` with `to` at the end of the selected stem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rewrite {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Realization {
    #[serde(default)]
    pub stem: usize,
    #[serde(default)]
    pub suffix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewrite: Option<Rewrite>,
}

impl Realization {
    /// `None` when the stem index is out of range or the rewrite does not apply.
    pub fn apply(&self, stems: &[String]) -> Option<String> {
        let stem = stems.get(self.stem)?;
        let base = match &self.rewrite {
            Some(rw) => {
                let kept = stem.strip_suffix(rw.from.as_str())?;
                format!("{kept}{}", rw.to)
            }
            None => stem.clone(),
        };
        Some(format!("{base}{}", self.suffix))
    }
}

impl std::str::FromStr for Realization {
    type Err = String;

    /// Compact form `<stem>[~<from>><to>][+<suffix>]`, e.g. `1~i>e+issa`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, suffix) = s.split_once('+').unwrap_or((s, ""));
        let (stem, rewrite) = match head.split_once('~') {
            Some((stem, rw)) => {
                let (from, to) = rw
                    .split_once('>')
                    .ok_or_else(|| format!("rewrite `{rw}` lacks `>`"))?;
                (
                    stem,
                    Some(Rewrite {
                        from: from.into(),
                        to: to.into(),
                    }),
                )
            }
            None => (head, None),
        };
        let stem = stem
            .trim()
            .parse()
            .map_err(|_| format!("bad stem index in `{s}`"))?;
        Ok(Realization {
            stem,
            suffix: suffix.into(),
            rewrite,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SlotRepr")]
pub struct Slot {
    pub features: FeatureBundle,
    #[serde(flatten)]
    pub rule: Realization,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SlotRepr {
    Compact(FeatureBundle, String),
    Full {
        features: FeatureBundle,
        #[serde(flatten)]
        rule: Realization,
    },
}

impl TryFrom<SlotRepr> for Slot {
    type Error = String;

    fn try_from(r: SlotRepr) -> Result<Self, String> {
        match r {
            SlotRepr::Compact(features, rule) => Ok(Slot {
                features,
                rule: rule.parse()?,
            }),
            SlotRepr::Full { features, rule } => Ok(Slot { features, rule }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Paradigm {
    pub id: String,
    pub pos: String,
    pub slots: Vec<Slot>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lexeme {
    pub lemma: String,
    pub pos: String,
    pub paradigm: String,
    pub stems: Vec<String>,
    pub rank: u32,
    /// Features shared by every form, e.g. the gender of a noun.
    #[serde(default, skip_serializing_if = "FeatureBundle::is_empty")]
    pub inherent: FeatureBundle,
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub links: std::collections::BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gloss: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MorphAnalysis {
    pub lemma: String,
    pub pos: String,
    pub features: FeatureBundle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct FormRef {
    pub lexeme: usize,
    pub slot: usize,
}

/// Lexicon plus the inverse form table, built once at pack load.
#[derive(Debug, Clone, Default)]
pub struct Morphology {
    pub paradigms: Vec<Paradigm>,
    pub lexicon: Vec<Lexeme>,
    pub(crate) lexeme_paradigm: Vec<usize>,
    pub(crate) folds: Vec<(String, String)>,
    index: HashMap<String, Vec<FormRef>>,
    by_lemma: HashMap<(String, String), Vec<usize>>,
}

impl Morphology {
    /// Builds the tables. The caller must already have validated that every
    /// lexeme's paradigm resolves and every rule applies.
    pub(crate) fn build(
        paradigms: Vec<Paradigm>,
        lexicon: Vec<Lexeme>,
        folds: Vec<(String, String)>,
    ) -> Self {
        let pidx: HashMap<&str, usize> = paradigms
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.as_str(), i))
            .collect();
        let lexeme_paradigm: Vec<usize> =
            lexicon.iter().map(|l| pidx[l.paradigm.as_str()]).collect();
        let mut morph = Morphology {
            paradigms,
            lexicon,
            lexeme_paradigm,
            folds,
            index: HashMap::new(),
            by_lemma: HashMap::new(),
        };
        for (li, lex) in morph.lexicon.iter().enumerate() {
            morph
                .by_lemma
                .entry((lex.lemma.clone(), lex.pos.clone()))
                .or_default()
                .push(li);
            let paradigm = &morph.paradigms[morph.lexeme_paradigm[li]];
            for (si, slot) in paradigm.slots.iter().enumerate() {
                if let Some(form) = slot.rule.apply(&lex.stems) {
                    let key = normalize_with(&form, &morph.folds);
                    morph.index.entry(key).or_default().push(FormRef {
                        lexeme: li,
                        slot: si,
                    });
                }
            }
        }
        morph
    }

    pub fn paradigm_of(&self, lexeme: usize) -> &Paradigm {
        &self.paradigms[self.lexeme_paradigm[lexeme]]
    }

    pub(crate) fn analysis_of(&self, r: FormRef) -> MorphAnalysis {
        let lex = &self.lexicon[r.lexeme];
        let slot = &self.paradigm_of(r.lexeme).slots[r.slot];
        MorphAnalysis {
            lemma: lex.lemma.clone(),
            pos: lex.pos.clone(),
            features: lex.inherent.merged(&slot.features),
        }
    }

    pub(crate) fn refs_for(&self, surface: &str) -> &[FormRef] {
        self.index
            .get(&normalize_with(surface, &self.folds))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn lexemes(&self, lemma: &str, pos: &str) -> impl Iterator<Item = (usize, &Lexeme)> {
        self.by_lemma
            .get(&(lemma.to_string(), pos.to_string()))
            .into_iter()
            .flatten()
            .map(|&i| (i, &self.lexicon[i]))
    }

    pub fn lexemes_by_lemma<'a>(&'a self, lemma: &'a str) -> impl Iterator<Item = &'a Lexeme> + 'a {
        self.lexicon.iter().filter(move |l| l.lemma == lemma)
    }

    /// Best (lowest) frequency rank among lexemes with this lemma.
    pub fn rank(&self, lemma: &str, pos: &str) -> Option<u32> {
        self.lexemes(lemma, pos).map(|(_, l)| l.rank).min()
    }

    /// All (features, form) pairs of one lexeme in slot order.
    pub fn forms(&self, lexeme: usize) -> Vec<(FeatureBundle, String)> {
        let lex = &self.lexicon[lexeme];
        self.paradigm_of(lexeme)
            .slots
            .iter()
            .filter_map(|s| {
                s.rule
                    .apply(&lex.stems)
                    .map(|f| (lex.inherent.merged(&s.features), f))
            })
            .collect()
    }

    /// Analysis of the lemma's own form, if the paradigm produces it.
    pub fn citation(&self, lemma: &str, pos: &str) -> Option<MorphAnalysis> {
        let key = normalize_with(lemma, &self.folds);
        self.lexemes(lemma, pos).find_map(|(li, _)| {
            self.forms(li)
                .into_iter()
                .find(|(_, f)| normalize_with(f, &self.folds) == key)
                .map(|(features, _)| MorphAnalysis {
                    lemma: lemma.to_string(),
                    pos: pos.to_string(),
                    features,
                })
        })
    }

    pub fn normalize(&self, surface: &str) -> String {
        normalize_with(surface, &self.folds)
    }
}

/// NFC, lowercase, then pack-specific character folds.
pub fn normalize_with(surface: &str, folds: &[(String, String)]) -> String {
    let mut s: String = surface.nfc().collect::<String>().to_lowercase();
    for (from, to) in folds {
        if s.contains(from.as_str()) {
            s = s.replace(from.as_str(), to);
        }
    }
    s
}

/// Every analysis whose generated form matches `surface` (case-insensitive).
/// Out-of-vocabulary words give an empty list.
pub fn analyze(surface: &str, pack: &LanguagePack) -> Result<Vec<MorphAnalysis>, MorphError> {
    let trimmed = surface.trim();
    if trimmed.is_empty() {
        return Err(MorphError::EmptyInput);
    }
    let morph = &pack.morphology;
    let mut out: Vec<MorphAnalysis> = Vec::new();
    for &r in morph.refs_for(trimmed) {
        let a = morph.analysis_of(r);
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

/// Every surface form realizing `(lemma, pos, features)`. Inherent lexeme
/// features (such as gender) may be omitted from `features`; when present
/// they are overridden by the lexeme's own values.
pub fn generate(
    lemma: &str,
    pos: &str,
    features: &FeatureBundle,
    pack: &LanguagePack,
) -> Result<Vec<String>, MorphError> {
    pack.schema
        .check(features)
        .map_err(MorphError::InvalidFeatures)?;
    let morph = &pack.morphology;
    let mut found_lexeme = false;
    let mut out = Vec::new();
    for (li, lex) in morph.lexemes(lemma, pos) {
        found_lexeme = true;
        let wanted = features.merged(&lex.inherent);
        for (full, form) in morph.forms(li) {
            if full == wanted && !out.contains(&form) {
                out.push(form);
            }
        }
    }
    if !found_lexeme {
        return Err(MorphError::UnknownLemma {
            lemma: lemma.to_string(),
            pos: pos.to_string(),
        });
    }
    Ok(out)
}
