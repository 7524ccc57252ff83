//! Post archives: ingestion into a normalized on-disk store, cohort
//! selection, and subreddit-participation vectors.
//!
//! Months are computed from `created_utc` in UTC throughout; month ranges
//! are written `YYYY-MM..YYYY-MM` and are inclusive on both ends.

mod cohort;
mod store;

pub use cohort::{
    first_target_post_times, percentile_threshold, select_cohorts, subreddit_vectors,
    CohortAssignment, CohortLabel, SubredditVector, SubredditVectors,
};
pub use store::{ingest, ingest_files, load, IngestSummary, StoreMeta};

use std::collections::BTreeMap;
use std::str::FromStr;

use chrono::{Datelike, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("store i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("store is corrupt at {path} line {line}: {message}")]
    CorruptStore {
        path: String,
        line: usize,
        message: String,
    },
    #[error("duplicate post id {0:?}")]
    DuplicateId(String),
    #[error("no store found at {0} (run `ingest` first)")]
    MissingStore(String),
    #[error("invalid month {0:?}: expected YYYY-MM")]
    BadMonth(String),
    #[error("invalid month range {0:?}: expected YYYY-MM..YYYY-MM with start <= end")]
    BadMonthRange(String),
    #[error("min_posts must be at least 2, got {0}")]
    MinPostsTooSmall(usize),
    #[error("percentile must be within [0, 1], got {0}")]
    BadPercentile(f64),
    #[error("no user posted in {sub:?} during {window}")]
    EmptyWindow { sub: String, window: MonthRange },
    #[error(
        "not enough non-persistent candidates: need {needed} to match the persistent group, found {available}"
    )]
    NotEnoughCandidates { needed: usize, available: usize },
    #[error("no cutoff time resolvable for cohort author {0:?}")]
    UnresolvableCutoff(String),
}

/// One submission from an archive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub author: String,
    pub subreddit: String,
    pub created_utc: i64,
    pub title: String,
    #[serde(default)]
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

impl Post {
    /// The single document scored by every feature extractor.
    pub fn document(&self) -> String {
        crate::textstats::compose_document(&self.title, &self.body)
    }

    pub fn month(&self) -> MonthIndex {
        MonthIndex::from_utc(self.created_utc)
    }
}

/// Calendar month in UTC, ordered; stored as `year * 12 + month0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonthIndex(pub i32);

impl MonthIndex {
    pub fn new(year: i32, month: u32) -> MonthIndex {
        MonthIndex(year * 12 + month as i32 - 1)
    }

    pub fn from_utc(created_utc: i64) -> MonthIndex {
        let dt = Utc
            .timestamp_opt(created_utc, 0)
            .single()
            .unwrap_or_else(|| Utc.timestamp_opt(0, 0).unwrap());
        MonthIndex::new(dt.year(), dt.month())
    }

    pub fn year(&self) -> i32 {
        self.0.div_euclid(12)
    }

    pub fn month(&self) -> u32 {
        self.0.rem_euclid(12) as u32 + 1
    }

    /// First second of the month, as a unix timestamp.
    pub fn start_timestamp(&self) -> i64 {
        Utc.with_ymd_and_hms(self.year(), self.month(), 1, 0, 0, 0)
            .single()
            .expect("valid month start")
            .timestamp()
    }
}

impl std::fmt::Display for MonthIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for MonthIndex {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<MonthIndex, CorpusError> {
        let bad = || CorpusError::BadMonth(s.to_string());
        let (year, month) = s.split_once('-').ok_or_else(bad)?;
        if year.len() != 4 || month.len() != 2 {
            return Err(bad());
        }
        let year: i32 = year.parse().map_err(|_| bad())?;
        let month: u32 = month.parse().map_err(|_| bad())?;
        if !(1..=12).contains(&month) {
            return Err(bad());
        }
        Ok(MonthIndex::new(year, month))
    }
}

/// Inclusive month range, e.g. `2021-03..2021-07`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    pub start: MonthIndex,
    pub end: MonthIndex,
}

impl MonthRange {
    pub fn new(start: MonthIndex, end: MonthIndex) -> Result<MonthRange, CorpusError> {
        if start > end {
            return Err(CorpusError::BadMonthRange(format!("{start}..{end}")));
        }
        Ok(MonthRange { start, end })
    }

    pub fn contains(&self, month: MonthIndex) -> bool {
        self.start <= month && month <= self.end
    }
}

impl std::fmt::Display for MonthRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for MonthRange {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<MonthRange, CorpusError> {
        let (start, end) = s
            .split_once("..")
            .ok_or_else(|| CorpusError::BadMonthRange(s.to_string()))?;
        let start: MonthIndex = start.parse()?;
        let end: MonthIndex = end.parse()?;
        if start > end {
            return Err(CorpusError::BadMonthRange(s.to_string()));
        }
        Ok(MonthRange { start, end })
    }
}

/// An in-memory corpus with author and subreddit indexes.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    posts: Vec<Post>,
    by_author: BTreeMap<String, Vec<usize>>,
    by_subreddit: BTreeMap<String, Vec<usize>>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate post ids.
    pub fn from_posts(posts: Vec<Post>) -> Result<Corpus, CorpusError> {
        let mut seen = std::collections::HashSet::with_capacity(posts.len());
        let mut by_author: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut by_subreddit: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, post) in posts.iter().enumerate() {
            if !seen.insert(post.id.clone()) {
                return Err(CorpusError::DuplicateId(post.id.clone()));
            }
            by_author.entry(post.author.clone()).or_default().push(i);
            by_subreddit
                .entry(post.subreddit.clone())
                .or_default()
                .push(i);
        }
        Ok(Corpus {
            posts,
            by_author,
            by_subreddit,
        })
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.by_author.keys().map(String::as_str)
    }

    pub fn subreddits(&self) -> impl Iterator<Item = &str> {
        self.by_subreddit.keys().map(String::as_str)
    }

    pub fn posts_by(&self, author: &str) -> impl Iterator<Item = &Post> {
        self.by_author
            .get(author)
            .into_iter()
            .flatten()
            .map(|&i| &self.posts[i])
    }

    pub fn posts_in(&self, subreddit: &str) -> impl Iterator<Item = &Post> {
        self.by_subreddit
            .get(subreddit)
            .into_iter()
            .flatten()
            .map(|&i| &self.posts[i])
    }
}
