use super::{AnalyticPattern, Chunk, ChunkKind, Token};
use crate::constructs::MatchContext;
use crate::pack::LanguagePack;

/// Shallow chunks of one sentence, with indices local to `tokens`.
///
/// Analytic verb patterns are matched first, longest pattern wins. Noun
/// phrases are maximal runs of modifiers sharing one case followed by a head
/// in that case; a preposition directly before a noun phrase forms a
/// prepositional phrase headed by the noun.
pub fn chunk(tokens: &[Token], pack: &LanguagePack) -> Vec<Chunk> {
    let mut chunks = analytic_chunks(tokens, pack);
    let in_verb = |i: usize| chunks.iter().any(|c| c.start <= i && i <= c.end);
    let nps = noun_phrases(tokens, pack, &in_verb);
    let pps: Vec<Chunk> = nps
        .iter()
        .filter(|np| np.start > 0)
        .filter(|np| {
            tokens[np.start - 1]
                .chosen_pos()
                .is_some_and(|p| pack.grammar.adpositions.iter().any(|a| a == p))
        })
        .map(|np| Chunk {
            kind: ChunkKind::PrepPhrase,
            start: np.start - 1,
            end: np.end,
            head: np.head,
        })
        .collect();
    chunks.extend(nps);
    chunks.extend(pps);
    chunks.sort_by_key(|c| (c.start, c.kind));
    chunks
}

fn analytic_chunks(tokens: &[Token], pack: &LanguagePack) -> Vec<Chunk> {
    let ctx = MatchContext {
        tokens,
        chunks: &[],
        pack,
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let best = pack
            .grammar
            .analytic
            .iter()
            .filter(|p| {
                i + p.sequence.len() <= tokens.len()
                    && p.sequence
                        .iter()
                        .enumerate()
                        .all(|(k, m)| ctx.accepts(m, i + k))
            })
            .fold(None, |best: Option<&AnalyticPattern>, p| match best {
                Some(b) if b.sequence.len() >= p.sequence.len() => Some(b),
                _ => Some(p),
            });
        match best {
            Some(p) if !p.sequence.is_empty() => {
                let len = p.sequence.len();
                let head = p.sequence.iter().position(|m| m.head).unwrap_or(len - 1);
                out.push(Chunk {
                    kind: ChunkKind::AnalyticVerb,
                    start: i,
                    end: i + len - 1,
                    head: i + head,
                });
                i += len;
            }
            _ => i += 1,
        }
    }
    out
}

fn noun_phrases(
    tokens: &[Token],
    pack: &LanguagePack,
    in_verb: &dyn Fn(usize) -> bool,
) -> Vec<Chunk> {
    let g = &pack.grammar;
    let is = |i: usize, set: &[String]| {
        !in_verb(i)
            && tokens[i]
                .chosen_pos()
                .is_some_and(|p| set.iter().any(|s| s == p))
    };
    let case = |i: usize| tokens[i].chosen_feature("Case");
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut j = i;
        while j < tokens.len()
            && is(j, &g.np_modifiers)
            && case(j) == case(i)
            && !is(j, &g.np_heads)
        {
            j += 1;
        }
        if j < tokens.len() && is(j, &g.np_heads) && (j == i || case(j) == case(i)) {
            out.push(Chunk {
                kind: ChunkKind::NounPhrase,
                start: i,
                end: j,
                head: j,
            });
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}
