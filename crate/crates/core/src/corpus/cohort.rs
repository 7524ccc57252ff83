//! Cohort selection and subreddit-participation vectors.
//!
//! A *persistent* user posted at least `min_posts` times in the target
//! subreddit during the window; a *non-persistent* candidate posted exactly
//! once. Both must have posted (in any subreddit) in at least
//! `months_required` distinct months strictly before the window and strictly
//! after it. The non-persistent group is a seeded uniform sample of the
//! candidates, matched in size to the persistent group.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, MonthIndex, MonthRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CohortLabel {
    Persistent,
    NonPersistent,
}

impl CohortLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CohortLabel::Persistent => "persistent",
            CohortLabel::NonPersistent => "non_persistent",
        }
    }
}

impl std::fmt::Display for CohortLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortAssignment {
    pub author: String,
    pub label: CohortLabel,
    /// Target-subreddit posts inside the window.
    pub target_window_posts: usize,
    pub unique_months_before: usize,
    pub unique_months_after: usize,
}

#[derive(Debug, Clone, Copy)]
struct AuthorActivity {
    window_posts: usize,
    months_before: usize,
    months_after: usize,
}

fn activity(
    corpus: &Corpus,
    author: &str,
    target_sub: &str,
    window: MonthRange,
) -> AuthorActivity {
    let mut window_posts = 0;
    let mut before: BTreeSet<MonthIndex> = BTreeSet::new();
    let mut after: BTreeSet<MonthIndex> = BTreeSet::new();
    for post in corpus.posts_by(author) {
        let month = post.month();
        if month < window.start {
            before.insert(month);
        } else if month > window.end {
            after.insert(month);
        }
        if post.subreddit == target_sub && window.contains(month) {
            window_posts += 1;
        }
    }
    AuthorActivity {
        window_posts,
        months_before: before.len(),
        months_after: after.len(),
    }
}

/// Labels persistent users and a size-matched seeded sample of
/// non-persistent candidates. Output is sorted by (label, author).
pub fn select_cohorts(
    corpus: &Corpus,
    target_sub: &str,
    window: MonthRange,
    min_posts: usize,
    months_required: usize,
    seed: u64,
) -> Result<Vec<CohortAssignment>, CorpusError> {
    if min_posts < 2 {
        return Err(CorpusError::MinPostsTooSmall(min_posts));
    }
    let mut persistent = Vec::new();
    let mut candidates = Vec::new();
    for author in corpus.authors() {
        let act = activity(corpus, author, target_sub, window);
        if act.months_before < months_required || act.months_after < months_required {
            continue;
        }
        let assignment = |label| CohortAssignment {
            author: author.to_string(),
            label,
            target_window_posts: act.window_posts,
            unique_months_before: act.months_before,
            unique_months_after: act.months_after,
        };
        if act.window_posts >= min_posts {
            persistent.push(assignment(CohortLabel::Persistent));
        } else if act.window_posts == 1 {
            candidates.push(assignment(CohortLabel::NonPersistent));
        }
    }
    if candidates.len() < persistent.len() {
        return Err(CorpusError::NotEnoughCandidates {
            needed: persistent.len(),
            available: candidates.len(),
        });
    }

    // Seeded Fisher-Yates prefix over author-sorted candidates, so the
    // sample is independent of archive record order.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let take = persistent.len();
    for i in 0..take {
        let j = rng.random_range(i..candidates.len());
        candidates.swap(i, j);
    }
    let mut sampled: Vec<CohortAssignment> = candidates.into_iter().take(take).collect();
    sampled.sort_by(|a, b| a.author.cmp(&b.author));

    let mut out = persistent;
    out.extend(sampled);
    Ok(out)
}

/// Per-user post-count value at `percentile` among users with at least one
/// in-window post in the target subreddit.
///
/// Nearest-rank: the rank closest to the position `p * (n + 1)` in the
/// ascending counts, ties rounded down, clamped to `[1, n]`.
pub fn percentile_threshold(
    corpus: &Corpus,
    target_sub: &str,
    window: MonthRange,
    percentile: f64,
) -> Result<usize, CorpusError> {
    if !(0.0..=1.0).contains(&percentile) {
        return Err(CorpusError::BadPercentile(percentile));
    }
    let mut per_user: BTreeMap<&str, usize> = BTreeMap::new();
    for post in corpus.posts_in(target_sub) {
        if window.contains(post.month()) {
            *per_user.entry(post.author.as_str()).or_default() += 1;
        }
    }
    if per_user.is_empty() {
        return Err(CorpusError::EmptyWindow {
            sub: target_sub.to_string(),
            window,
        });
    }
    let mut counts: Vec<usize> = per_user.into_values().collect();
    counts.sort_unstable();
    Ok(counts[nearest_rank(percentile, counts.len()) - 1])
}

fn nearest_rank(percentile: f64, n: usize) -> usize {
    let position = percentile * (n as f64 + 1.0);
    let rank = (position - 0.5).ceil() as i64;
    rank.clamp(1, n as i64) as usize
}

/// First target-subreddit post time per author, ties broken by post id.
pub fn first_target_post_times(corpus: &Corpus, target_sub: &str) -> BTreeMap<String, i64> {
    let mut firsts: BTreeMap<String, (i64, &str)> = BTreeMap::new();
    for post in corpus.posts_in(target_sub) {
        let key = (post.created_utc, post.id.as_str());
        match firsts.get(&post.author) {
            Some(&existing) if existing <= key => {}
            _ => {
                firsts.insert(post.author.clone(), key);
            }
        }
    }
    firsts.into_iter().map(|(a, (ts, _))| (a, ts)).collect()
}

/// One user's participation fractions over the shared vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubredditVector {
    pub author: String,
    /// Aligned with [`SubredditVectors::vocabulary`]; sums to 1 when the
    /// author has any qualifying post, else all zero.
    pub frequencies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubredditVectors {
    /// Subreddits with at least `min_aggregate` pre-cutoff posts from the
    /// cohort, sorted.
    pub vocabulary: Vec<String>,
    /// One vector per cohort entry, in cohort order.
    pub vectors: Vec<SubredditVector>,
}

/// Participation fractions over subreddits, counting only each author's
/// posts strictly before their cutoff time.
pub fn subreddit_vectors(
    corpus: &Corpus,
    cohort: &[CohortAssignment],
    min_aggregate: usize,
    cutoffs: &BTreeMap<String, i64>,
) -> Result<SubredditVectors, CorpusError> {
    for entry in cohort {
        if !cutoffs.contains_key(&entry.author) {
            return Err(CorpusError::UnresolvableCutoff(entry.author.clone()));
        }
    }
    let mut aggregate: BTreeMap<&str, usize> = BTreeMap::new();
    for entry in cohort {
        let cutoff = cutoffs[&entry.author];
        for post in corpus.posts_by(&entry.author) {
            if post.created_utc < cutoff {
                *aggregate.entry(post.subreddit.as_str()).or_default() += 1;
            }
        }
    }
    let vocabulary: Vec<String> = aggregate
        .iter()
        .filter(|(_, &count)| count >= min_aggregate)
        .map(|(&sub, _)| sub.to_string())
        .collect();
    let vocab_index: BTreeMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    let mut vectors = Vec::with_capacity(cohort.len());
    for entry in cohort {
        let cutoff = cutoffs[&entry.author];
        let mut counts = vec![0usize; vocabulary.len()];
        let mut total = 0usize;
        for post in corpus.posts_by(&entry.author) {
            if post.created_utc < cutoff {
                if let Some(&i) = vocab_index.get(post.subreddit.as_str()) {
                    counts[i] += 1;
                    total += 1;
                }
            }
        }
        let frequencies = if total == 0 {
            vec![0.0; vocabulary.len()]
        } else {
            counts.iter().map(|&c| c as f64 / total as f64).collect()
        };
        vectors.push(SubredditVector {
            author: entry.author.clone(),
            frequencies,
        });
    }
    Ok(SubredditVectors {
        vocabulary,
        vectors,
    })
}
