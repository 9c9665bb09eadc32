use super::{PipelineError, Sentence, Token};

const TERMINALS: [&str; 5] = [".", "!", "?", "...", "…"];
const CLOSERS: [char; 7] = [')', ']', '"', '»', '”', '’', '\''];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\u{301}'
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '’' | '\u{2010}' | '\u{2011}')
}

/// Splits `text` into word and punctuation tokens and groups them into
/// sentences.
///
/// A word is a run of alphanumeric characters, possibly joined by internal
/// hyphens or apostrophes (`кое-что`, `don't`). Every other non-space
/// character is its own token except runs of dots. Sentences end at `.`,
/// `!`, `?` or an ellipsis, unless a dot follows a known abbreviation or a
/// number and the next word starts in lowercase.
pub fn tokenize(
    text: &str,
    abbreviations: &[String],
) -> Result<(Vec<Token>, Vec<Sentence>), PipelineError> {
    if text.trim().is_empty() {
        return Err(PipelineError::EmptyInput);
    }
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let punct;
        if is_word_char(c) {
            i += 1;
            while i < chars.len() {
                if is_word_char(chars[i]) {
                    i += 1;
                } else if is_joiner(chars[i]) && i + 1 < chars.len() && is_word_char(chars[i + 1]) {
                    i += 2;
                } else {
                    break;
                }
            }
            punct = false;
        } else if c == '.' {
            while i < chars.len() && chars[i] == '.' {
                i += 1;
            }
            punct = true;
        } else {
            i += 1;
            punct = true;
        }
        tokens.push(Token {
            surface: chars[start..i].iter().collect(),
            start,
            end: i,
            sentence: 0,
            punct,
            analyses: Vec::new(),
            chosen: None,
            ambiguous: false,
        });
    }

    let mut sentences = Vec::new();
    let mut sent_start = 0;
    let mut t = 0;
    while t < tokens.len() {
        let is_terminal = tokens[t].punct && TERMINALS.contains(&tokens[t].surface.as_str());
        let mut boundary = t + 1 == tokens.len();
        if is_terminal && !boundary {
            // closing quotes and brackets stay with the sentence they close
            while t + 1 < tokens.len()
                && tokens[t + 1].punct
                && tokens[t + 1].surface.chars().all(|c| CLOSERS.contains(&c))
            {
                t += 1;
            }
            boundary = t + 1 == tokens.len() || !suppressed(&tokens, t, abbreviations);
        }
        if boundary {
            let idx = sentences.len();
            for tok in &mut tokens[sent_start..=t] {
                tok.sentence = idx;
            }
            sentences.push(Sentence {
                start: sent_start,
                end: t + 1,
                char_start: tokens[sent_start].start,
                char_end: tokens[t].end,
            });
            sent_start = t + 1;
        }
        t += 1;
    }
    Ok((tokens, sentences))
}

/// True when the terminal ending at `t` should not close the sentence.
fn suppressed(tokens: &[Token], t: usize, abbreviations: &[String]) -> bool {
    let Some(next) = tokens.get(t + 1) else {
        return false;
    };
    let next_lower = next.surface.chars().next().is_some_and(char::is_lowercase);
    if !next_lower || tokens[t].surface != "." || t == 0 {
        return false;
    }
    let prev = &tokens[t - 1];
    if prev.punct {
        return false;
    }
    let is_abbrev = abbreviations
        .iter()
        .any(|a| a.trim_end_matches('.').to_lowercase() == prev.surface.to_lowercase());
    let is_ordinal = prev.surface.chars().all(|c| c.is_ascii_digit());
    is_abbrev || is_ordinal
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text, &[])
            .unwrap()
            .0
            .into_iter()
            .map(|t| t.surface)
            .collect()
    }

    #[test]
    fn question_is_one_sentence() {
        let (tokens, sents) = tokenize("Voisitko sammuttaa valon?", &[]).unwrap();
        let s: Vec<_> = tokens.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(s, ["Voisitko", "sammuttaa", "valon", "?"]);
        assert_eq!(sents.len(), 1);
        assert!(tokens[3].punct);
    }

    #[test]
    fn two_short_sentences() {
        let (_, sents) = tokenize("a. b.", &[]).unwrap();
        assert_eq!(sents.len(), 2);
    }

    #[test]
    fn whitespace_only_is_empty() {
        assert_eq!(tokenize(" \n\t ", &[]), Err(PipelineError::EmptyInput));
    }

    #[test]
    fn hyphenated_words_stay_whole() {
        assert_eq!(surfaces("кое-о-чем, да"), ["кое-о-чем", ",", "да"]);
        assert_eq!(surfaces("Wait..."), ["Wait", "..."]);
    }

    #[test]
    fn abbreviation_and_ordinal_do_not_split() {
        let abbr = vec!["esim.".to_string()];
        let (_, s) = tokenize("Hän osti esim. omenoita. Se oli 3. kerta.", &abbr).unwrap();
        assert_eq!(s.len(), 2);
        // an abbreviation before a capitalized word still ends the sentence
        let (_, s) = tokenize("Hän osti omenoita ym. Se riitti.", &["ym".to_string()]).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn closing_quote_stays_with_sentence() {
        let (tokens, s) = tokenize("Hän sanoi: \"Tule.\" Sitten lähti.", &[]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(tokens[s[0].end - 1].surface, "\"");
    }

    #[test]
    fn offsets_are_character_based() {
        let text = "Мы скоро увидим.";
        let (tokens, _) = tokenize(text, &[]).unwrap();
        let chars: Vec<char> = text.chars().collect();
        for t in &tokens {
            let s: String = chars[t.start..t.end].iter().collect();
            assert_eq!(s, t.surface);
        }
    }
}
