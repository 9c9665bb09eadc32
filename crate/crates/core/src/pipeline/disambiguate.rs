use std::collections::BTreeSet;

use super::{AgreementRule, SubjectRule, Token};
use crate::features::FeatureBundle;
use crate::morphology::MorphAnalysis;
use crate::pack::LanguagePack;

type Readings = Vec<MorphAnalysis>;

fn has_pos(readings: &Readings, pos: &[String]) -> bool {
    readings.iter().any(|a| pos.contains(&a.pos))
}

/// Keeps the readings satisfying `keep`, unless that would remove all of them.
fn restrict(readings: &mut Readings, keep: impl Fn(&MorphAnalysis) -> bool) {
    if readings.iter().any(&keep) {
        readings.retain(keep);
    }
}

/// Narrows each token's analyses with agreement rules, then picks a reading.
///
/// Rules, in order: adposition case government on the following noun phrase;
/// attributive agreement inside modifier+head windows (modifier readings with
/// no agreeing head are dropped when the word has other readings);
/// subject-verb agreement between the first nominative subject and the next
/// finite verb. A token gets a chosen analysis when one reading survives, or
/// when all survivors share a lemma, in which case the most frequent lexeme
/// and then the earliest paradigm slot wins. Otherwise it stays ambiguous.
pub fn disambiguate(tokens: &mut [Token], pack: &LanguagePack) {
    let mut work: Vec<Readings> = tokens.iter().map(|t| t.analyses.clone()).collect();
    adposition_case(&mut work, pack);
    for rule in &pack.grammar.agreement {
        attributive_agreement(&mut work, rule);
    }
    if let Some(rule) = &pack.grammar.subject {
        subject_agreement(&mut work, rule);
    }
    for (tok, readings) in tokens.iter_mut().zip(work) {
        choose(tok, readings, pack);
    }
}

fn adposition_case(work: &mut [Readings], pack: &LanguagePack) {
    let g = &pack.grammar;
    let np_pos: Vec<String> = g.np_modifiers.iter().chain(&g.np_heads).cloned().collect();
    for i in 0..work.len() {
        if work[i].is_empty() || !work[i].iter().all(|a| g.adpositions.contains(&a.pos)) {
            continue;
        }
        let allowed: BTreeSet<&str> = work[i]
            .iter()
            .flat_map(|a| pack.government_for(&a.lemma, &a.pos))
            .filter(|p| p.preposition.is_none() && p.clause.is_none())
            .filter_map(|p| p.case.as_deref())
            .collect();
        if allowed.is_empty() {
            continue;
        }
        let allowed: Vec<String> = allowed.into_iter().map(String::from).collect();
        for r in work[i + 1..].iter_mut() {
            if !has_pos(r, &np_pos) {
                break;
            }
            restrict(r, |a| {
                a.features
                    .get("Case")
                    .is_none_or(|c| allowed.iter().any(|x| x == c))
            });
            if has_pos(r, &g.np_heads) {
                break;
            }
        }
    }
}

fn attributive_agreement(work: &mut [Readings], rule: &AgreementRule) {
    let n = work.len();
    let agrees = |a: &MorphAnalysis, b: &MorphAnalysis| {
        a.features.agrees_with(&b.features, &rule.categories)
    };
    let mut attached = vec![false; n];
    for h in 0..n {
        if !has_pos(&work[h], &rule.heads) {
            continue;
        }
        let heads: Readings = work[h]
            .iter()
            .filter(|a| rule.heads.contains(&a.pos))
            .cloned()
            .collect();
        // right to left: each modifier must agree with its right neighbour
        let mut sets: Vec<(usize, Readings)> = Vec::new();
        let mut right = heads.clone();
        let mut t = h;
        while t > 0 {
            t -= 1;
            let deps: Readings = work[t]
                .iter()
                .filter(|a| rule.dependents.contains(&a.pos) && right.iter().any(|r| agrees(a, r)))
                .cloned()
                .collect();
            if deps.is_empty() {
                break;
            }
            sets.push((t, deps.clone()));
            right = deps;
        }
        if sets.is_empty() {
            continue;
        }
        sets.reverse();
        // left to right: drop readings no left neighbour agrees with
        for k in 1..sets.len() {
            let left = sets[k - 1].1.clone();
            sets[k].1.retain(|a| left.iter().any(|l| agrees(a, l)));
        }
        let last = &sets[sets.len() - 1].1;
        let heads: Readings = heads
            .into_iter()
            .filter(|a| last.iter().any(|l| agrees(a, l)))
            .collect();
        for (t, deps) in sets {
            work[t].retain(|a| !rule.dependents.contains(&a.pos) || deps.contains(a));
            attached[t] = true;
        }
        work[h].retain(|a| !rule.heads.contains(&a.pos) || heads.contains(a));
    }
    for (t, readings) in work.iter_mut().enumerate() {
        if !attached[t] {
            restrict(readings, |a| !rule.dependents.contains(&a.pos));
        }
    }
}

fn subject_agreement(work: &mut [Readings], rule: &SubjectRule) {
    let is_subject = |a: &MorphAnalysis| {
        rule.subject_pos.contains(&a.pos) && a.features.get("Case") == Some(rule.case.as_str())
    };
    let is_finite =
        |a: &MorphAnalysis| rule.verb_pos.contains(&a.pos) && a.features.contains(&rule.finite);
    let Some(s) = work.iter().position(|r| r.iter().any(is_subject)) else {
        return;
    };
    let Some(v) = (s + 1..work.len()).find(|&i| work[i].iter().any(is_finite)) else {
        return;
    };
    let person_of = |a: &MorphAnalysis| -> FeatureBundle {
        let mut f = a.features.clone();
        if f.get("Person").is_none() {
            if let Some(p) = &rule.noun_person {
                f.set("Person", p.clone());
            }
        }
        f
    };
    let subjects: Vec<FeatureBundle> = work[s]
        .iter()
        .filter(|a| is_subject(a))
        .map(person_of)
        .collect();
    let verb_ok = |a: &MorphAnalysis| {
        is_finite(a)
            && subjects
                .iter()
                .any(|f| f.agrees_with(&a.features, &rule.categories))
    };
    if !work[v].iter().any(verb_ok) {
        return;
    }
    work[v].retain(verb_ok);
    let verbs = work[v].clone();
    restrict(&mut work[s], |a| {
        is_subject(a)
            && verbs
                .iter()
                .any(|vb| person_of(a).agrees_with(&vb.features, &rule.categories))
    });
}

fn choose(tok: &mut Token, readings: Readings, pack: &LanguagePack) {
    tok.chosen = None;
    tok.ambiguous = false;
    match readings.len() {
        0 => {}
        1 => tok.chosen = readings.into_iter().next(),
        _ if readings.iter().all(|a| a.lemma == readings[0].lemma) => {
            let order = |a: &MorphAnalysis| {
                let rank = pack.morphology.rank(&a.lemma, &a.pos).unwrap_or(u32::MAX);
                let pos = tok
                    .analyses
                    .iter()
                    .position(|x| x == a)
                    .unwrap_or(usize::MAX);
                (rank, pos)
            };
            tok.chosen = readings.iter().min_by_key(|a| order(a)).cloned();
        }
        _ => tok.ambiguous = true,
    }
}
