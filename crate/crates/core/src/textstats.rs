//! Tokenization and readability statistics for post text.
//!
//! Every downstream consumer (topic models, emotion scoring, embedding
//! pooling) shares this tokenizer, so the counting rules are fixed here and
//! kept simple enough to verify by hand:
//!
//! * URLs (`http://`, `https://`, `www.` prefixes) are blanked out before any
//!   counting.
//! * A word is a maximal run of letters, digits, and apostrophes that
//!   contains at least one letter or digit.
//! * Sentences split on `.`, `!`, `?`, or a blank line; only segments that
//!   contain a word count. Text with at least one word and no terminator is
//!   one sentence.
//! * Syllables per word: the number of vowel groups (`a e i o u y`) in the
//!   word's letters, minus a silent trailing `e` (kept when the word ends in
//!   `le` after a consonant), with a minimum of one.
//! * Letters are the alphanumeric characters inside words.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextStatsError {
    /// Readability formulas divide by word and sentence counts.
    #[error("readability undefined for {words} words / {sentences} sentences")]
    Undefined { words: usize, sentences: usize },
}

/// Raw counts extracted from one document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TextProfile {
    pub word_count: usize,
    pub sentence_count: usize,
    pub syllable_count: usize,
    pub letter_count: usize,
    /// Words with three or more syllables.
    pub polysyllable_count: usize,
}

/// The five readability formulas plus their median consensus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadabilityScores {
    pub flesch_reading_ease: f64,
    pub fk_grade: f64,
    pub ari: f64,
    pub coleman_liau: f64,
    pub smog: f64,
    /// Median of the four grade-level formulas.
    pub consensus_grade: f64,
}

/// Joins a post title and body into the single document scored everywhere.
pub fn compose_document(title: &str, body: &str) -> String {
    if body.is_empty() {
        format!("{title}. ")
    } else {
        format!("{title}. {body}")
    }
}

/// Blanks URL spans (any whitespace-delimited span starting with `http://`,
/// `https://`, or `www.`) so surrounding structure is preserved.
pub fn strip_urls(text: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let span: String = chars[start..i].iter().collect::<String>().to_lowercase();
        if span.starts_with("http://") || span.starts_with("https://") || span.starts_with("www.")
        {
            for c in &mut chars[start..i] {
                *c = ' ';
            }
        }
    }
    chars.into_iter().collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '\u{2019}'
}

/// Splits text into words under the documented rules, preserving case.
pub fn tokenize(text: &str) -> Vec<String> {
    let stripped = strip_urls(text);
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in stripped.chars().chain(std::iter::once(' ')) {
        if is_word_char(c) {
            current.push(c);
        } else if !current.is_empty() {
            if current.chars().any(char::is_alphanumeric) {
                tokens.push(std::mem::take(&mut current));
            } else {
                current.clear();
            }
        }
    }
    tokens
}

/// Syllable estimate for a single word.
pub fn syllables(word: &str) -> usize {
    let letters: Vec<char> = word
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphabetic())
        .collect();
    if letters.is_empty() {
        return 1;
    }
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0usize;
    let mut prev_vowel = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    if letters.last() == Some(&'e') {
        let final_le = letters.len() >= 3
            && letters[letters.len() - 2] == 'l'
            && !is_vowel(letters[letters.len() - 3]);
        if !final_le {
            groups = groups.saturating_sub(1);
        }
    }
    groups.max(1)
}

fn sentence_segments(text: &str) -> Vec<String> {
    let norm = text.replace("\r\n", "\n");
    let chars: Vec<char> = norm.chars().collect();
    let mut segments = vec![String::new()];
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '.' | '!' | '?' => {
                segments.push(String::new());
                i += 1;
            }
            '\n' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j] == ' ' || chars[j] == '\t') {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '\n' {
                    segments.push(String::new());
                    i = j + 1;
                } else {
                    segments.last_mut().unwrap().push(' ');
                    i += 1;
                }
            }
            c => {
                segments.last_mut().unwrap().push(c);
                i += 1;
            }
        }
    }
    segments
}

/// Counts words, sentences, syllables, letters, and polysyllables.
pub fn profile(text: &str) -> TextProfile {
    let stripped = strip_urls(text);
    let words = tokenize(&stripped);
    let word_count = words.len();
    let mut sentence_count = sentence_segments(&stripped)
        .iter()
        .filter(|seg| !tokenize(seg).is_empty())
        .count();
    if word_count >= 1 && sentence_count == 0 {
        sentence_count = 1;
    }
    let mut syllable_count = 0;
    let mut polysyllable_count = 0;
    let mut letter_count = 0;
    for w in &words {
        let s = syllables(w);
        syllable_count += s;
        if s >= 3 {
            polysyllable_count += 1;
        }
        letter_count += w.chars().filter(|c| c.is_alphanumeric()).count();
    }
    TextProfile {
        word_count,
        sentence_count,
        syllable_count,
        letter_count,
        polysyllable_count,
    }
}

/// Word count of a document; the "post length" feature.
pub fn post_length(text: &str) -> usize {
    profile(text).word_count
}

/// Flesch Reading Ease: `206.835 - 1.015*(words/sentences) - 84.6*(syllables/words)`.
pub fn flesch(p: &TextProfile) -> Result<f64, TextStatsError> {
    if p.word_count == 0 || p.sentence_count == 0 {
        return Err(TextStatsError::Undefined {
            words: p.word_count,
            sentences: p.sentence_count,
        });
    }
    let w = p.word_count as f64;
    let s = p.sentence_count as f64;
    let syl = p.syllable_count as f64;
    Ok(206.835 - 1.015 * (w / s) - 84.6 * (syl / w))
}

fn consensus_of(grades: [f64; 4]) -> f64 {
    let mut g = grades;
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (g[1] + g[2]) / 2.0
}

/// All five formulas plus the median consensus grade.
pub fn readability(p: &TextProfile) -> Result<ReadabilityScores, TextStatsError> {
    if p.word_count == 0 || p.sentence_count == 0 {
        return Err(TextStatsError::Undefined {
            words: p.word_count,
            sentences: p.sentence_count,
        });
    }
    let w = p.word_count as f64;
    let s = p.sentence_count as f64;
    let syl = p.syllable_count as f64;
    let letters = p.letter_count as f64;
    let poly = p.polysyllable_count as f64;

    let flesch_reading_ease = 206.835 - 1.015 * (w / s) - 84.6 * (syl / w);
    let fk_grade = 0.39 * (w / s) + 11.8 * (syl / w) - 15.59;
    let ari = 4.71 * (letters / w) + 0.5 * (w / s) - 21.43;
    let coleman_liau = 0.0588 * (100.0 * letters / w) - 0.296 * (100.0 * s / w) - 15.8;
    let smog = 1.0430 * (poly * 30.0 / s).sqrt() + 3.1291;
    let consensus_grade = consensus_of([fk_grade, ari, coleman_liau, smog]);

    Ok(ReadabilityScores {
        flesch_reading_ease,
        fk_grade,
        ari,
        coleman_liau,
        smog,
        consensus_grade,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn profile_counts_simple_sentence() {
        let p = profile("The cat sat.");
        assert_eq!(p.word_count, 3);
        assert_eq!(p.sentence_count, 1);
        assert_eq!(p.syllable_count, 3);
        assert_eq!(p.letter_count, 9);
        assert_eq!(p.polysyllable_count, 0);
    }

    #[test]
    fn profile_empty_text_is_all_zero() {
        assert_eq!(profile(""), TextProfile::default());
    }

    #[test]
    fn profile_counts_two_sentences() {
        let p = profile("Hello world. Bye.");
        assert_eq!(p.word_count, 3);
        assert_eq!(p.sentence_count, 2);
        assert_eq!(p.syllable_count, 4);
    }

    #[test]
    fn words_without_terminator_are_one_sentence() {
        assert_eq!(profile("no terminator here").sentence_count, 1);
    }

    #[test]
    fn blank_line_splits_sentences() {
        assert_eq!(profile("first block\n\nsecond block").sentence_count, 2);
        assert_eq!(profile("first block\nsecond line").sentence_count, 1);
    }

    #[test]
    fn urls_are_stripped_before_counting() {
        let p = profile("Don't stop now!\r\nCheck https://example.com/guide first.");
        assert_eq!(p.word_count, 5);
        assert_eq!(p.sentence_count, 2);
        assert_eq!(p.syllable_count, 5);
        assert_eq!(p.letter_count, 21);
    }

    #[test]
    fn tokenizer_keeps_apostrophes_and_case() {
        assert_eq!(
            tokenize("Don't say WWW.example.com x2"),
            vec!["Don't", "say", "x2"]
        );
        assert_eq!(tokenize("'' '"), Vec::<String>::new());
    }

    #[test]
    fn syllable_heuristic_cases() {
        assert_eq!(syllables("the"), 1);
        assert_eq!(syllables("made"), 1);
        assert_eq!(syllables("table"), 2);
        assert_eq!(syllables("ale"), 1);
        assert_eq!(syllables("discipline"), 3);
        assert_eq!(syllables("organization"), 5);
        assert_eq!(syllables("42"), 1);
    }

    #[test]
    fn flesch_matches_hand_arithmetic() {
        let p = TextProfile {
            word_count: 3,
            sentence_count: 1,
            syllable_count: 3,
            ..Default::default()
        };
        assert!((flesch(&p).unwrap() - 119.19).abs() < 1e-9);
        let p = TextProfile {
            word_count: 10,
            sentence_count: 1,
            syllable_count: 10,
            ..Default::default()
        };
        assert!((flesch(&p).unwrap() - 112.085).abs() < 1e-9);
    }

    #[test]
    fn flesch_errors_on_zero_words() {
        let p = TextProfile::default();
        assert_eq!(
            flesch(&p),
            Err(TextStatsError::Undefined {
                words: 0,
                sentences: 0
            })
        );
    }

    #[test]
    fn consensus_is_median() {
        assert_eq!(consensus_of([7.0, 7.0, 7.0, 7.0]), 7.0);
        assert_eq!(consensus_of([2.0, 4.0, 6.0, 100.0]), 5.0);
        assert_eq!(consensus_of([100.0, 6.0, 2.0, 4.0]), 5.0);
    }

    #[test]
    fn readability_finite_on_single_word() {
        let r = readability(&profile("word")).unwrap();
        for v in [
            r.flesch_reading_ease,
            r.fk_grade,
            r.ari,
            r.coleman_liau,
            r.smog,
            r.consensus_grade,
        ] {
            assert!(v.is_finite());
        }
    }

    #[test]
    fn post_length_examples() {
        assert_eq!(post_length("a b c"), 3);
        assert_eq!(post_length(""), 0);
    }

    #[test]
    fn flesch_decreases_with_more_syllables_and_longer_sentences() {
        let base = TextProfile {
            word_count: 10,
            sentence_count: 2,
            syllable_count: 14,
            ..Default::default()
        };
        let more_syl = TextProfile {
            syllable_count: 15,
            ..base
        };
        assert!(flesch(&more_syl).unwrap() < flesch(&base).unwrap());
        // Double words and syllables: syllables/word fixed, words/sentences doubles.
        let longer = TextProfile {
            word_count: 20,
            syllable_count: 28,
            ..base
        };
        assert!(flesch(&longer).unwrap() < flesch(&base).unwrap());
    }

    proptest! {
        #[test]
        fn profile_ignores_trailing_whitespace_and_line_endings(
            s in "[a-zA-Z0-9 .!?',\n]{0,120}"
        ) {
            let base = profile(&s);
            prop_assert_eq!(profile(&format!("{s} \t ")), base);
            prop_assert_eq!(profile(&s.replace('\n', "\r\n")), base);
        }

        #[test]
        fn post_length_equals_profile_word_count(s in "\\PC{0,160}") {
            prop_assert_eq!(post_length(&s), profile(&s).word_count);
        }
    }
}
