//! Emotion-lexicon loading and scoring: eight basic emotions plus positive
//! and negative sentiment, counted per post and averaged per user.
//!
//! Lexicon file format: tab-separated `word<TAB>category<TAB>{0|1}`, UTF-8,
//! one association per line; only associations flagged `1` are kept.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use thiserror::Error;

use crate::textstats;

#[derive(Debug, Error)]
pub enum EmotionError {
    #[error("failed to read lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed lexicon line {line}: expected word<TAB>category<TAB>flag")]
    Malformed { line: usize },
    #[error("unknown category {name:?} on lexicon line {line}")]
    UnknownCategory { line: usize, name: String },
    #[error("bad flag {flag:?} on lexicon line {line}: expected 0 or 1")]
    BadFlag { line: usize, flag: String },
}

/// The ten scored categories, in the fixed order used for feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionCategory {
    Anger,
    Fear,
    Anticipation,
    Trust,
    Surprise,
    Sadness,
    Joy,
    Disgust,
    Positive,
    Negative,
}

pub const CATEGORIES: [EmotionCategory; 10] = [
    EmotionCategory::Anger,
    EmotionCategory::Fear,
    EmotionCategory::Anticipation,
    EmotionCategory::Trust,
    EmotionCategory::Surprise,
    EmotionCategory::Sadness,
    EmotionCategory::Joy,
    EmotionCategory::Disgust,
    EmotionCategory::Positive,
    EmotionCategory::Negative,
];

impl EmotionCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            EmotionCategory::Anger => "anger",
            EmotionCategory::Fear => "fear",
            EmotionCategory::Anticipation => "anticipation",
            EmotionCategory::Trust => "trust",
            EmotionCategory::Surprise => "surprise",
            EmotionCategory::Sadness => "sadness",
            EmotionCategory::Joy => "joy",
            EmotionCategory::Disgust => "disgust",
            EmotionCategory::Positive => "positive",
            EmotionCategory::Negative => "negative",
        }
    }

    fn from_str(s: &str) -> Option<EmotionCategory> {
        CATEGORIES.iter().copied().find(|c| c.as_str() == s)
    }

    fn index(&self) -> usize {
        CATEGORIES.iter().position(|c| c == self).unwrap()
    }
}

/// Word -> category-set associations, keyed by lowercase words.
#[derive(Debug, Clone, Default)]
pub struct EmotionLexicon {
    entries: HashMap<String, Vec<EmotionCategory>>,
}

impl EmotionLexicon {
    pub fn from_entries<I>(entries: I) -> EmotionLexicon
    where
        I: IntoIterator<Item = (String, Vec<EmotionCategory>)>,
    {
        let mut map: HashMap<String, Vec<EmotionCategory>> = HashMap::new();
        for (word, cats) in entries {
            let slot = map.entry(word.to_lowercase()).or_default();
            for c in cats {
                if !slot.contains(&c) {
                    slot.push(c);
                }
            }
        }
        map.retain(|_, cats| !cats.is_empty());
        EmotionLexicon { entries: map }
    }

    /// Number of distinct words.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn categories(&self, word: &str) -> Option<&[EmotionCategory]> {
        self.entries.get(word).map(Vec::as_slice)
    }
}

/// How category counts are turned into proportions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide each category count by the total number of category hits;
    /// proportions sum to 1 when anything matched.
    PerHit,
    /// Divide each category count by the token count of the post.
    PerToken,
}

/// Per-post (or per-user) emotion proportions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmotionProfile {
    /// Indexed in `CATEGORIES` order.
    pub proportions: [f64; 10],
    pub total_hits: usize,
}

impl EmotionProfile {
    pub fn proportion(&self, category: EmotionCategory) -> f64 {
        self.proportions[category.index()]
    }
}

/// Parses the three-column association format.
pub fn load_lexicon(path: &Path) -> Result<EmotionLexicon, EmotionError> {
    let file = std::fs::File::open(path)?;
    let lexicon = read_lexicon(std::io::BufReader::new(file))?;
    if lexicon.is_empty() {
        log::warn!("emotion lexicon {} has no flagged entries", path.display());
    }
    Ok(lexicon)
}

pub fn read_lexicon<R: BufRead>(reader: R) -> Result<EmotionLexicon, EmotionError> {
    let mut entries: HashMap<String, Vec<EmotionCategory>> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.is_empty() {
            return Err(EmotionError::Malformed { line: line_no });
        }
        let mut parts = line.split('\t');
        let (word, category, flag) = match (parts.next(), parts.next(), parts.next(), parts.next())
        {
            (Some(w), Some(c), Some(f), None) if !w.is_empty() => (w, c, f),
            _ => return Err(EmotionError::Malformed { line: line_no }),
        };
        let category = EmotionCategory::from_str(category).ok_or(EmotionError::UnknownCategory {
            line: line_no,
            name: category.to_string(),
        })?;
        match flag {
            "0" => {}
            "1" => {
                let slot = entries.entry(word.to_lowercase()).or_default();
                if !slot.contains(&category) {
                    slot.push(category);
                }
            }
            other => {
                return Err(EmotionError::BadFlag {
                    line: line_no,
                    flag: other.to_string(),
                })
            }
        }
    }
    Ok(EmotionLexicon { entries })
}

/// Scores one document: tokens matched case-insensitively, each
/// (token, category) association counts once per occurrence.
pub fn score_post(
    text: &str,
    lexicon: &EmotionLexicon,
    normalization: Normalization,
) -> EmotionProfile {
    let tokens = textstats::tokenize(text);
    let mut counts = [0usize; 10];
    let mut total_hits = 0;
    for token in &tokens {
        if let Some(cats) = lexicon.categories(&token.to_lowercase()) {
            for c in cats {
                counts[c.index()] += 1;
                total_hits += 1;
            }
        }
    }
    let denom = match normalization {
        Normalization::PerHit => total_hits as f64,
        Normalization::PerToken => tokens.len() as f64,
    };
    let mut proportions = [0.0; 10];
    if total_hits > 0 && denom > 0.0 {
        for (p, &c) in proportions.iter_mut().zip(&counts) {
            *p = c as f64 / denom;
        }
    }
    EmotionProfile {
        proportions,
        total_hits,
    }
}

/// Unweighted mean of per-post proportions, skipping zero-hit posts.
pub fn user_profile(posts: &[EmotionProfile]) -> EmotionProfile {
    let scored: Vec<&EmotionProfile> = posts.iter().filter(|p| p.total_hits > 0).collect();
    if scored.is_empty() {
        return EmotionProfile::default();
    }
    let mut proportions = [0.0; 10];
    let mut total_hits = 0;
    for p in &scored {
        for (acc, v) in proportions.iter_mut().zip(&p.proportions) {
            *acc += v;
        }
        total_hits += p.total_hits;
    }
    for v in &mut proportions {
        *v /= scored.len() as f64;
    }
    EmotionProfile {
        proportions,
        total_hits,
    }
}
