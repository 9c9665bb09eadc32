//! Cloze and multiple-choice exercises built from detected constructs.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::constructs::{ConstructInstance, ConstructKind};
use crate::feedback::Hint;
use crate::morphology::{generate, MorphAnalysis};
use crate::pack::LanguagePack;
use crate::pipeline::{AnnotatedStory, ChunkKind};

pub const MAX_OPTIONS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExerciseError {
    #[error("construct `{0}` is not defined in the pack")]
    UnknownConstruct(String),
    #[error("construct `{0}` has no distractor recipe")]
    NoRecipe(String),
    #[error("candidate is not linked to construct `{0}`")]
    NotLinked(String),
    #[error("recipe `{recipe}` produced {options} option(s)")]
    RecipeFailed { recipe: String, options: usize },
}

/// A token, or an analytic verb span, that can be exercised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseCandidate {
    pub story: String,
    pub sentence: usize,
    /// Token span `start..=end`.
    pub start: usize,
    pub end: usize,
    pub head: usize,
    /// Character offsets of the span in the story text.
    pub char_start: usize,
    pub char_end: usize,
    pub answer: String,
    /// Lemma shown in the cloze box: the head's lemma.
    pub lemma: String,
    pub head_analysis: MorphAnalysis,
    pub links: Vec<String>,
    pub sentence_initial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExerciseKind {
    Cloze,
    MultipleChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exercise {
    pub id: String,
    pub kind: ExerciseKind,
    pub candidate: ExerciseCandidate,
    #[serde(default)]
    pub options: Vec<String>,
    #[serde(default)]
    pub correct: Option<usize>,
    /// Construct the distractors target (multiple choice only).
    #[serde(default)]
    pub construct: Option<String>,
    #[serde(default)]
    pub hints: Vec<Hint>,
}

/// What a practice client may see before the exercise is adjudicated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExercisePayload {
    pub id: String,
    pub kind: ExerciseKind,
    pub lemma: String,
    pub sentence: usize,
    pub char_start: usize,
    pub char_end: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub options: Vec<String>,
    pub constructs: Vec<String>,
    pub max_hints: usize,
}

impl Exercise {
    /// Exact-match adjudication: NFC equality, with the first letter
    /// compared case-insensitively when the blank opens a sentence.
    pub fn check(&self, given: &str) -> bool {
        answers_match(
            &self.candidate.answer,
            given,
            self.candidate.sentence_initial,
        )
    }

    pub fn payload(&self) -> ExercisePayload {
        ExercisePayload {
            id: self.id.clone(),
            kind: self.kind,
            lemma: self.candidate.lemma.clone(),
            sentence: self.candidate.sentence,
            char_start: self.candidate.char_start,
            char_end: self.candidate.char_end,
            options: self.options.clone(),
            constructs: self.candidate.links.clone(),
            max_hints: self.hints.len(),
        }
    }

    pub fn primary_construct(&self) -> &str {
        self.construct
            .as_deref()
            .unwrap_or(&self.candidate.links[0])
    }
}

pub fn answers_match(expected: &str, given: &str, sentence_initial: bool) -> bool {
    let e: String = expected.nfc().collect();
    let g: String = given.trim().nfc().collect();
    if e == g {
        return true;
    }
    if !sentence_initial {
        return false;
    }
    let fold = |s: &str| {
        let mut c = s.chars();
        match c.next() {
            Some(f) => f.to_lowercase().chain(c).collect::<String>(),
            None => String::new(),
        }
    };
    fold(&e) == fold(&g)
}

/// How distractors are produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "strategy")]
pub enum Strategy {
    /// Regenerate the head with each listed value of one category.
    FeatureVariation {
        category: String,
        values: Vec<String>,
    },
    /// Swap the lemma for its partner under a lexicon link key, keeping
    /// features. `fallback` remaps values when the partner lacks the slot
    /// (e.g. perfective future for imperfective present).
    LemmaPairSwap {
        link: String,
        #[serde(default)]
        fallback: BTreeMap<String, BTreeMap<String, String>>,
    },
    /// Regex rewrites of the whole answer span.
    OrthographyVariants { rules: Vec<RewriteRule> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewriteRule {
    pub pattern: String,
    pub replace: String,
    #[serde(skip)]
    pub(crate) re: Option<Regex>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistractorRecipe {
    pub id: String,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(flatten)]
    pub strategy: Strategy,
}

fn default_count() -> usize {
    MAX_OPTIONS
}

impl DistractorRecipe {
    pub(crate) fn compile(&mut self) -> Result<(), regex::Error> {
        if let Strategy::OrthographyVariants { rules } = &mut self.strategy {
            for r in rules {
                r.re = Some(Regex::new(&r.pattern)?);
            }
        }
        Ok(())
    }

    /// Distractor surfaces in recipe order, before deduplication.
    pub fn distractors(
        &self,
        candidate: &ExerciseCandidate,
        story: &AnnotatedStory,
        pack: &LanguagePack,
    ) -> Vec<String> {
        let head = &candidate.head_analysis;
        match &self.strategy {
            Strategy::FeatureVariation { category, values } => values
                .iter()
                .flat_map(|v| {
                    let f = head.features.clone().with(category.clone(), v.clone());
                    generate(&head.lemma, &head.pos, &f, pack).unwrap_or_default()
                })
                .map(|form| replace_head(candidate, story, &form))
                .collect(),
            Strategy::LemmaPairSwap { link, fallback } => {
                let partners: Vec<&str> = pack
                    .morphology
                    .lexicon
                    .iter()
                    .filter_map(|l| {
                        if l.lemma == head.lemma && l.pos == head.pos {
                            l.links.get(link).map(String::as_str)
                        } else if l.pos == head.pos && l.links.get(link) == Some(&head.lemma) {
                            Some(l.lemma.as_str())
                        } else {
                            None
                        }
                    })
                    .collect();
                let mut out = Vec::new();
                for partner in partners {
                    let mut forms =
                        generate(partner, &head.pos, &head.features, pack).unwrap_or_default();
                    if forms.is_empty() {
                        let mut f = head.features.clone();
                        for (cat, map) in fallback {
                            if let Some(to) = f.get(cat).and_then(|v| map.get(v)).cloned() {
                                f.set(cat.clone(), to);
                            }
                        }
                        forms = generate(partner, &head.pos, &f, pack).unwrap_or_default();
                    }
                    out.extend(
                        forms
                            .iter()
                            .map(|form| replace_head(candidate, story, form)),
                    );
                }
                out
            }
            Strategy::OrthographyVariants { rules } => {
                let answer = candidate
                    .answer
                    .split_whitespace()
                    .collect::<Vec<_>>()
                    .join(" ");
                rules
                    .iter()
                    .filter_map(|r| {
                        let re = r.re.as_ref()?;
                        re.is_match(&answer)
                            .then(|| re.replace(&answer, r.replace.as_str()).into_owned())
                    })
                    .collect()
            }
        }
    }
}

/// The candidate span with the head token's text swapped for `form`,
/// matching the head's initial capitalization.
fn replace_head(c: &ExerciseCandidate, story: &AnnotatedStory, form: &str) -> String {
    let head = &story.tokens[c.head];
    let form = if head.surface.chars().next().is_some_and(char::is_uppercase) {
        let mut chars = form.chars();
        chars
            .next()
            .map(|f| f.to_uppercase().chain(chars).collect())
            .unwrap_or_default()
    } else {
        form.to_string()
    };
    let text: Vec<char> = story.text.chars().collect();
    let before: String = text[c.char_start..head.start].iter().collect();
    let after: String = text[head.end..c.char_end].iter().collect();
    format!("{before}{form}{after}")
}

struct Unit {
    start: usize,
    end: usize,
    head: usize,
    links: Vec<String>,
}

/// One candidate per distinct token or analytic span covered by a construct
/// candidate, in story order. Overlapping spans merge and pool their links.
pub fn generate_candidates(
    story: &AnnotatedStory,
    instances: &[ConstructInstance],
    pack: &LanguagePack,
) -> Vec<ExerciseCandidate> {
    let mut units: Vec<Unit> = Vec::new();
    for inst in instances {
        if inst.candidates.is_empty() {
            continue;
        }
        let orthographic = pack
            .construct(&inst.construct)
            .is_some_and(|d| d.kind == ConstructKind::Orthography);
        if orthographic {
            let start = *inst.matched.iter().min().unwrap();
            let end = *inst.matched.iter().max().unwrap();
            let head = *inst.candidates.last().unwrap();
            units.push(Unit {
                start,
                end,
                head,
                links: vec![inst.construct.clone()],
            });
            continue;
        }
        for &c in &inst.candidates {
            let analytic = story
                .chunks
                .iter()
                .find(|ch| ch.kind == ChunkKind::AnalyticVerb && ch.start <= c && c <= ch.end);
            let (start, end, head) = match analytic {
                Some(ch) => (ch.start, ch.end, ch.head),
                None => (c, c, c),
            };
            units.push(Unit {
                start,
                end,
                head,
                links: vec![inst.construct.clone()],
            });
        }
    }
    units.sort_by_key(|u| (u.start, std::cmp::Reverse(u.end)));
    let mut merged: Vec<Unit> = Vec::new();
    for u in units {
        match merged.last_mut() {
            Some(m) if u.start <= m.end => {
                if u.end - u.start > m.end - m.start {
                    m.head = u.head;
                }
                m.end = m.end.max(u.end);
                for l in u.links {
                    if !m.links.contains(&l) {
                        m.links.push(l);
                    }
                }
            }
            _ => merged.push(u),
        }
    }
    merged
        .into_iter()
        .filter_map(|u| {
            let head_analysis = story.tokens[u.head].chosen.clone()?;
            let tok = &story.tokens[u.start];
            let sentence = tok.sentence;
            let s = &story.sentences[sentence];
            let sentence_initial = story.tokens[s.start..u.start].iter().all(|t| t.punct);
            let mut links = u.links;
            links.sort_by_key(|l| pack.constructs.iter().position(|d| &d.id == l));
            Some(ExerciseCandidate {
                story: story.id.clone(),
                sentence,
                start: u.start,
                end: u.end,
                head: u.head,
                char_start: tok.start,
                char_end: story.tokens[u.end].end,
                answer: story.span_text(u.start, u.end),
                lemma: head_analysis.lemma.clone(),
                head_analysis,
                links,
                sentence_initial,
            })
        })
        .collect()
}

pub fn build_cloze(candidate: &ExerciseCandidate) -> Exercise {
    Exercise {
        id: format!(
            "{}:{}-{}:cloze",
            candidate.story, candidate.start, candidate.end
        ),
        kind: ExerciseKind::Cloze,
        candidate: candidate.clone(),
        options: Vec::new(),
        correct: None,
        construct: None,
        hints: Vec::new(),
    }
}

/// Multiple choice over the answer and the construct's recipe output.
/// Options are distinct after normalization, at most `min(count, 5)`, and
/// shuffled with `rng`.
pub fn build_mc(
    candidate: &ExerciseCandidate,
    construct: &str,
    story: &AnnotatedStory,
    pack: &LanguagePack,
    rng: &mut impl Rng,
) -> Result<Exercise, ExerciseError> {
    if !candidate.links.iter().any(|l| l == construct) {
        return Err(ExerciseError::NotLinked(construct.to_string()));
    }
    let def = pack
        .construct(construct)
        .ok_or_else(|| ExerciseError::UnknownConstruct(construct.to_string()))?;
    let recipe = def
        .recipe
        .as_deref()
        .and_then(|r| pack.recipe(r))
        .ok_or_else(|| ExerciseError::NoRecipe(construct.to_string()))?;
    let key = |s: &str| s.nfc().collect::<String>().to_lowercase();
    let mut options = vec![candidate.answer.clone()];
    let mut seen = vec![key(&candidate.answer)];
    let cap = recipe.count.min(MAX_OPTIONS);
    for d in recipe.distractors(candidate, story, pack) {
        if options.len() >= cap {
            break;
        }
        let k = key(&d);
        if !seen.contains(&k) {
            seen.push(k);
            options.push(d);
        }
    }
    if options.len() < 2 {
        return Err(ExerciseError::RecipeFailed {
            recipe: recipe.id.clone(),
            options: options.len(),
        });
    }
    options.shuffle(rng);
    let correct = options.iter().position(|o| *o == candidate.answer);
    Ok(Exercise {
        id: format!(
            "{}:{}-{}:mc:{}",
            candidate.story, candidate.start, candidate.end, construct
        ),
        kind: ExerciseKind::MultipleChoice,
        candidate: candidate.clone(),
        options,
        correct,
        construct: Some(construct.to_string()),
        hints: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentence_initial_folding() {
        assert!(answers_match("Taloissa", "taloissa", true));
        assert!(!answers_match("Taloissa", "taloissa", false));
        assert!(answers_match("taloissa", " taloissa ", false));
        assert!(!answers_match("taloissa", "talossa", true));
        // composed and decomposed ä compare equal
        assert!(answers_match("päivä", "pa\u{308}iva\u{308}", false));
    }
}
