use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use super::{ConstructDef, ConstructInstance, MatchContext};
use crate::pack::LanguagePack;
use crate::pipeline::{AnnotatedStory, ChunkKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("token {index} is out of range (story has {len} tokens)")]
    UnknownToken { index: usize, len: usize },
}

/// Arguments of the governor at story token `governor`.
///
/// Inside an analytic verb form the head's lemma governs, whichever token of
/// the chunk is passed. Case patterns marked direction-free look at the whole
/// sentence for noun phrase heads (or free-standing nominals) outside any
/// prepositional phrase; patterns with a preposition look for a prepositional
/// phrase opened by it; adposition patterns take the phrase that follows.
/// Clause patterns return the clause marker token.
pub fn match_government(
    story: &AnnotatedStory,
    governor: usize,
    pack: &LanguagePack,
) -> Vec<usize> {
    let ctx = MatchContext {
        tokens: &story.tokens,
        chunks: &story.chunks,
        pack,
    };
    government_args(&ctx, governor)
}

pub(crate) fn government_args(ctx: &MatchContext, governor: usize) -> Vec<usize> {
    let Some(tok) = ctx.tokens.get(governor) else {
        return Vec::new();
    };
    let Some(own) = &tok.chosen else {
        return Vec::new();
    };
    let source = match ctx.chunk_containing(governor, ChunkKind::AnalyticVerb) {
        Some(c) => ctx.tokens[c.head].chosen.as_ref().unwrap_or(own),
        None => own,
    };
    let (lo, hi) = sentence_bounds(ctx, governor);
    let grammar = &ctx.pack.grammar;
    let nominal = |t: usize| {
        ctx.tokens[t].chosen_pos().is_some_and(|p| {
            grammar
                .np_heads
                .iter()
                .chain(&grammar.np_modifiers)
                .any(|x| x == p)
        })
    };
    let case_ok = |t: usize, case: &Option<String>| match case {
        Some(c) => ctx.tokens[t].chosen_feature("Case") == Some(c.as_str()),
        None => true,
    };
    let mut out = BTreeSet::new();
    for p in ctx.pack.government_for(&source.lemma, &source.pos) {
        if let Some(marker) = &p.clause {
            out.extend((lo..hi).filter(|&t| {
                t != governor && ctx.tokens[t].chosen_lemma() == Some(marker.as_str())
            }));
        } else if let Some(prep) = &p.preposition {
            for c in ctx
                .chunks
                .iter()
                .filter(|c| c.kind == ChunkKind::PrepPhrase && lo <= c.start && c.end < hi)
            {
                if ctx.tokens[c.start].chosen_lemma() == Some(prep.as_str())
                    && case_ok(c.head, &p.case)
                {
                    out.insert(c.head);
                }
            }
        } else if p.direction_free {
            for t in lo..hi {
                if t == governor || !nominal(t) || !case_ok(t, &p.case) || p.case.is_none() {
                    continue;
                }
                let np = ctx.chunk_containing(t, ChunkKind::NounPhrase);
                let free = np.is_none_or(|c| c.head == t);
                if free && ctx.chunk_containing(t, ChunkKind::PrepPhrase).is_none() {
                    out.insert(t);
                }
            }
        } else {
            let pp = ctx
                .chunks
                .iter()
                .find(|c| c.kind == ChunkKind::PrepPhrase && c.start == governor);
            let np = ctx
                .chunks
                .iter()
                .find(|c| c.kind == ChunkKind::NounPhrase && c.start == governor + 1);
            if let Some(c) = pp.or(np) {
                if case_ok(c.head, &p.case) {
                    out.insert(c.head);
                }
            }
        }
    }
    out.into_iter().collect()
}

fn sentence_bounds(ctx: &MatchContext, token: usize) -> (usize, usize) {
    let s = ctx.tokens[token].sentence;
    let lo = ctx.tokens[..token]
        .iter()
        .rposition(|t| t.sentence != s)
        .map_or(0, |i| i + 1);
    let hi = ctx.tokens[token..]
        .iter()
        .position(|t| t.sentence != s)
        .map_or(ctx.tokens.len(), |i| token + i);
    (lo, hi)
}

/// All instances of every pack construct, in sentence order and then pack
/// declaration order. Candidate positions whose token has no chosen analysis
/// are dropped from `candidates` but the instance is kept.
pub fn detect_constructs(story: &AnnotatedStory, pack: &LanguagePack) -> Vec<ConstructInstance> {
    let ctx = MatchContext {
        tokens: &story.tokens,
        chunks: &story.chunks,
        pack,
    };
    let mut out = Vec::new();
    for (si, s) in story.sentences.iter().enumerate() {
        for def in &pack.constructs {
            let mut found: Vec<Vec<usize>> = Vec::new();
            search(&ctx, def, s.start..s.end, &mut Vec::new(), &mut found);
            let mut seen = HashSet::new();
            for matched in found {
                if !seen.insert(matched.clone()) {
                    continue;
                }
                let candidates = def
                    .candidate_positions()
                    .map(|k| matched[k])
                    .filter(|&t| story.tokens[t].chosen.is_some())
                    .collect();
                out.push(ConstructInstance {
                    construct: def.id.clone(),
                    story: story.id.clone(),
                    sentence: si,
                    matched,
                    candidates,
                });
            }
        }
    }
    out
}

fn search(
    ctx: &MatchContext,
    def: &ConstructDef,
    range: std::ops::Range<usize>,
    assigned: &mut Vec<usize>,
    found: &mut Vec<Vec<usize>>,
) {
    let k = assigned.len();
    if k == def.pattern.len() {
        found.push(assigned.clone());
        return;
    }
    let m = &def.pattern[k];
    let options: Vec<usize> = match assigned.last() {
        Some(&prev) if !m.anywhere => (prev + 1..prev + 2).filter(|t| range.contains(t)).collect(),
        _ => range.clone().collect(),
    };
    for t in options {
        if assigned.contains(&t) || !ctx.accepts(m, t) {
            continue;
        }
        if let Some(g) = m.governed_by {
            if !government_args(ctx, assigned[g]).contains(&t) {
                continue;
            }
        }
        assigned.push(t);
        search(ctx, def, range.clone(), assigned, found);
        assigned.pop();
    }
}

/// Ids of constructs with an instance covering `token`, in pack declaration order.
pub fn constructs_for_token(
    story: &AnnotatedStory,
    token: usize,
    pack: &LanguagePack,
) -> Result<Vec<String>, ConstructError> {
    if token >= story.tokens.len() {
        return Err(ConstructError::UnknownToken {
            index: token,
            len: story.tokens.len(),
        });
    }
    Ok(pack
        .constructs
        .iter()
        .filter(|def| {
            story
                .constructs
                .iter()
                .any(|i| i.construct == def.id && i.covers(token))
        })
        .map(|def| def.id.clone())
        .collect())
}
