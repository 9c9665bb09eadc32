//! Hint sequences, answer diagnosis and paraphrase hints.
//!
//! A sequence runs from a context hint (what governs the blank), through one
//! "use another ..." hint per distinguishing category in hierarchy order, to
//! a paraphrase when the construct has one, and ends with a hint naming the
//! exact feature values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructs::{ConstructDef, ConstructInstance, ParaphrasePart, ParaphraseTemplate};
use crate::exercises::Exercise;
use crate::features::FeatureBundle;
use crate::morphology::{analyze, generate, MorphAnalysis};
use crate::pack::LanguagePack;
use crate::pipeline::{AnnotatedStory, ChunkKind};

/// Hearts per exercise; also the longest hint sequence.
pub const MAX_ATTEMPTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeedbackError {
    #[error("cannot generate `{lemma}` with {features} for paraphrase slot {slot}")]
    GenerationGap {
        slot: usize,
        lemma: String,
        features: String,
    },
    #[error("all hints have been consumed")]
    Exhausted,
}

/// Per part-of-speech category order plus the hint wording.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FeatureHierarchy {
    #[serde(default)]
    pub order: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub text: HintText,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HintText {
    /// `{category}` receives the category label.
    pub category: String,
    /// `{values}` receives the joined value phrases.
    pub values: String,
    /// `{value}` and `{category}` labels.
    pub value_phrase: String,
    pub joiner: String,
    pub last_joiner: String,
    /// Final hint when the answer is the citation form itself.
    pub citation: String,
}

impl Default for HintText {
    fn default() -> Self {
        HintText {
            category: "Use another {category}.".into(),
            values: "Use {values}.".into(),
            value_phrase: "{value} {category}".into(),
            joiner: ", ".into(),
            last_joiner: " and ".into(),
            citation: "Use the dictionary form.".into(),
        }
    }
}

impl FeatureHierarchy {
    /// Categories sorted by the order declared for `pos`; undeclared ones
    /// follow alphabetically.
    pub fn sort<'a>(
        &self,
        pos: &str,
        categories: impl IntoIterator<Item = &'a str>,
    ) -> Vec<&'a str> {
        let order = self.order.get(pos).map(Vec::as_slice).unwrap_or(&[]);
        let mut cats: Vec<&str> = categories.into_iter().collect();
        cats.sort_by_key(|c| {
            (
                order.iter().position(|o| o == c).unwrap_or(usize::MAX),
                c.to_string(),
            )
        });
        cats.dedup();
        cats
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "category")]
pub enum HintKind {
    Context,
    Category(String),
    Paraphrase,
    Final,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hint {
    pub level: usize,
    pub kind: HintKind,
    pub text: String,
    /// Token to underline, e.g. the governing verb.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
}

/// Categories where `analysis` differs from its lemma's citation form, in
/// hierarchy order.
pub fn distinguishing_categories(analysis: &MorphAnalysis, pack: &LanguagePack) -> Vec<String> {
    let citation = pack
        .morphology
        .citation(&analysis.lemma, &analysis.pos)
        .map(|a| a.features)
        .unwrap_or_default();
    let differing = analysis
        .features
        .iter()
        .filter(|(c, v)| citation.get(c) != Some(v))
        .map(|(c, _)| c);
    pack.hierarchy
        .sort(&analysis.pos, differing)
        .into_iter()
        .map(String::from)
        .collect()
}

/// The value hint: every distinguishing value, e.g. "Use partitive case."
pub fn final_hint_text(analysis: &MorphAnalysis, pack: &LanguagePack) -> String {
    let t = &pack.hierarchy.text;
    let cats = distinguishing_categories(analysis, pack);
    if cats.is_empty() {
        return t.citation.clone();
    }
    let phrases: Vec<String> = cats
        .iter()
        .map(|c| {
            let v = analysis.features.get(c).unwrap_or_default();
            t.value_phrase
                .replace("{value}", pack.schema.value_label(c, v))
                .replace("{category}", pack.schema.category_label(c))
        })
        .collect();
    t.values
        .replace("{values}", &join(&phrases, &t.joiner, &t.last_joiner))
}

fn join(items: &[String], sep: &str, last: &str) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., tail] => format!("{}{last}{tail}", init.join(sep)),
    }
}

/// The instance of `construct` that covers the candidate's span.
fn instance_for<'a>(
    exercise: &Exercise,
    construct: &str,
    instances: &'a [ConstructInstance],
) -> Option<&'a ConstructInstance> {
    let c = &exercise.candidate;
    instances.iter().find(|i| {
        i.construct == construct
            && i.story == c.story
            && i.matched.iter().any(|&t| c.start <= t && t <= c.end)
    })
}

/// Lemma a matched token contributes: the analytic head's lemma inside a verb chunk.
fn governing_lemma(story: &AnnotatedStory, token: usize) -> Option<String> {
    let idx = story
        .chunks
        .iter()
        .find(|ch| ch.kind == ChunkKind::AnalyticVerb && ch.start <= token && token <= ch.end)
        .map_or(token, |ch| ch.head);
    story.tokens[idx].chosen_lemma().map(String::from)
}

fn render_context(
    template: &str,
    def: &ConstructDef,
    inst: &ConstructInstance,
    story: &AnnotatedStory,
) -> Option<(String, Option<usize>)> {
    let mut text = template.to_string();
    let mut target = None;
    if text.contains("{governor}") {
        let g = inst.matched[def.governor_position()?];
        text = text.replace("{governor}", &governing_lemma(story, g)?);
        target = Some(g);
    }
    for (k, &t) in inst.matched.iter().enumerate() {
        let lemma_key = format!("{{lemma:{k}}}");
        if text.contains(&lemma_key) {
            text = text.replace(&lemma_key, story.tokens[t].chosen_lemma()?);
        }
        text = text.replace(&format!("{{surface:{k}}}"), &story.tokens[t].surface);
    }
    Some((text, target))
}

/// Ordered hints for an exercise, most general first, at most five.
pub fn build_hint_sequence(
    exercise: &Exercise,
    story: &AnnotatedStory,
    instances: &[ConstructInstance],
    pack: &LanguagePack,
) -> Vec<Hint> {
    let head = &exercise.candidate.head_analysis;
    let def = pack.construct(exercise.primary_construct());
    let inst = def.and_then(|d| instance_for(exercise, &d.id, instances));
    let mut context = None;
    let mut middle = Vec::new();
    let mut paraphrase = None;
    if let (Some(def), Some(inst)) = (def, inst) {
        if let Some(t) = &def.hints.context {
            context = render_context(t, def, inst, story);
        }
        let distinguishing = distinguishing_categories(head, pack);
        let declared = pack
            .hierarchy
            .sort(&head.pos, def.hints.categories.iter().map(String::as_str));
        for cat in declared
            .into_iter()
            .filter(|c| distinguishing.iter().any(|d| d == c))
        {
            let text = pack
                .hierarchy
                .text
                .category
                .replace("{category}", pack.schema.category_label(cat));
            middle.push((HintKind::Category(cat.to_string()), text));
        }
        if let Some(p) = &def.paraphrase {
            paraphrase = generate_paraphrase(p, inst, story, pack).ok();
        }
    }
    let fixed = usize::from(context.is_some()) + usize::from(paraphrase.is_some()) + 1;
    middle.truncate(MAX_ATTEMPTS.saturating_sub(fixed));
    let mut hints = Vec::new();
    if let Some((text, target)) = context {
        hints.push((HintKind::Context, text, target));
    }
    hints.extend(middle.into_iter().map(|(k, t)| (k, t, None)));
    if let Some(text) = paraphrase {
        hints.push((HintKind::Paraphrase, text, None));
    }
    hints.push((HintKind::Final, final_hint_text(head, pack), None));
    hints
        .into_iter()
        .enumerate()
        .map(|(level, (kind, text, target))| Hint {
            level,
            kind,
            text,
            target,
        })
        .collect()
}

/// Regenerates the matched tokens with the template's target features and
/// wraps them in the template text.
pub fn generate_paraphrase(
    template: &ParaphraseTemplate,
    instance: &ConstructInstance,
    story: &AnnotatedStory,
    pack: &LanguagePack,
) -> Result<String, FeedbackError> {
    let mut words = Vec::new();
    for part in &template.parts {
        match part {
            ParaphrasePart::Literal { literal } => words.push(literal.clone()),
            ParaphrasePart::Slot {
                slot,
                features,
                set,
                copy,
            } => {
                let tok = &story.tokens[instance.matched[*slot]];
                let gap = |lemma: &str, f: &FeatureBundle| FeedbackError::GenerationGap {
                    slot: *slot,
                    lemma: lemma.to_string(),
                    features: f.to_string(),
                };
                let Some(a) = &tok.chosen else {
                    return Err(gap(&tok.surface, &FeatureBundle::new()));
                };
                if features.is_none() && set.is_empty() && copy.is_empty() {
                    words.push(tok.surface.clone());
                    continue;
                }
                let mut target = features
                    .clone()
                    .unwrap_or_else(|| a.features.clone())
                    .merged(set);
                for (cat, from) in copy {
                    if let Some(v) = story.tokens[instance.matched[*from]].chosen_feature(cat) {
                        target.set(cat.clone(), v);
                    }
                }
                let forms = generate(&a.lemma, &a.pos, &target, pack)
                    .map_err(|_| gap(&a.lemma, &target))?;
                words.push(
                    forms
                        .into_iter()
                        .next()
                        .ok_or_else(|| gap(&a.lemma, &target))?,
                );
            }
        }
    }
    Ok(template.text.replace("{}", &words.join(" ")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub category: String,
    pub expected: Option<String>,
    pub given: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerDiff {
    pub lemma_match: bool,
    pub out_of_vocabulary: bool,
    pub mismatches: Vec<Mismatch>,
}

impl AnswerDiff {
    pub fn first_category(&self) -> Option<&str> {
        self.mismatches.first().map(|m| m.category.as_str())
    }
}

fn feature_mismatches(
    expected: &MorphAnalysis,
    given: &FeatureBundle,
    pack: &LanguagePack,
) -> Vec<Mismatch> {
    let cats = expected.features.categories().chain(given.categories());
    pack.hierarchy
        .sort(&expected.pos, cats)
        .into_iter()
        .filter(|c| expected.features.get(c) != given.get(c))
        .map(|c| Mismatch {
            category: c.to_string(),
            expected: expected.features.get(c).map(String::from),
            given: given.get(c).map(String::from),
        })
        .collect()
}

/// Compares a wrong answer with the expected analysis. Analyses of the given
/// form sharing the expected lemma are preferred, then the closest one.
pub fn diagnose_answer(given: &str, exercise: &Exercise, pack: &LanguagePack) -> AnswerDiff {
    let expected = &exercise.candidate.head_analysis;
    if exercise.check(given) {
        return AnswerDiff {
            lemma_match: true,
            out_of_vocabulary: false,
            mismatches: Vec::new(),
        };
    }
    let analyses: Vec<MorphAnalysis> = given
        .split_whitespace()
        .flat_map(|w| analyze(w, pack).unwrap_or_default())
        .collect();
    let best = analyses.iter().min_by_key(|a| {
        let same = a.lemma == expected.lemma && a.pos == expected.pos;
        (!same, feature_mismatches(expected, &a.features, pack).len())
    });
    match best {
        None => AnswerDiff {
            lemma_match: false,
            out_of_vocabulary: true,
            mismatches: feature_mismatches(expected, &FeatureBundle::new(), pack),
        },
        Some(a) => AnswerDiff {
            lemma_match: a.lemma == expected.lemma,
            out_of_vocabulary: false,
            mismatches: feature_mismatches(expected, &a.features, pack),
        },
    }
}

/// Hints consumed and the diagnosis of the latest wrong answer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptHistory {
    pub consumed: Vec<usize>,
    pub last_wrong: Option<AnswerDiff>,
}

impl AttemptHistory {
    pub fn consume(&mut self, hint: &Hint) {
        self.consumed.push(hint.level);
    }
}

/// The next unconsumed hint. When the latest wrong answer's first mismatch
/// has its own category hint further along, skip forward to it.
pub fn next_hint(exercise: &Exercise, history: &AttemptHistory) -> Result<Hint, FeedbackError> {
    let mut next = history.consumed.iter().max().map_or(0, |m| m + 1);
    if let Some(cat) = history
        .last_wrong
        .as_ref()
        .and_then(AnswerDiff::first_category)
    {
        if let Some(h) = exercise.hints[next.min(exercise.hints.len())..]
            .iter()
            .find(|h| h.kind == HintKind::Category(cat.to_string()))
        {
            next = h.level;
        }
    }
    exercise
        .hints
        .get(next)
        .cloned()
        .ok_or(FeedbackError::Exhausted)
}
