//! Per-user feature assembly.
//!
//! Every feature is computed in one of two scopes: the user's first post in
//! the target subreddit, or their posts from the six calendar months before
//! the month of that first post (any subreddit). Rows are sorted by
//! (label, author) and are rectangular with finite values; empty-text cases
//! are encoded as zeros plus an `is_empty` flag column so nothing is missing.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    first_target_post_times, subreddit_vectors, CohortAssignment, CohortLabel, Corpus,
    CorpusError, MonthIndex, Post,
};
use crate::embeddings::{pool_post, pool_user, PooledEmbedding, VectorTable};
use crate::emotion::{score_post, user_profile, EmotionLexicon, Normalization, CATEGORIES};
use crate::textstats;
use crate::topics::{infer_theta, TopicModel};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("cohort author {0:?} has no post in the target subreddit")]
    NoFirstPost(String),
    #[error("failed to read feature matrix: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse feature matrix: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("feature matrix is ragged or contains non-finite values at row {row}")]
    Invalid { row: usize },
}

/// Feature families, matching the classifier's selectable sets.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Readability,
    Length,
    Emotion,
    Lda,
    W2v,
    Subreddits,
}

pub const GROUPS: [FeatureGroup; 6] = [
    FeatureGroup::Readability,
    FeatureGroup::Length,
    FeatureGroup::Emotion,
    FeatureGroup::Lda,
    FeatureGroup::W2v,
    FeatureGroup::Subreddits,
];

impl FeatureGroup {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureGroup::Readability => "readability",
            FeatureGroup::Length => "length",
            FeatureGroup::Emotion => "emotion",
            FeatureGroup::Lda => "lda",
            FeatureGroup::W2v => "w2v",
            FeatureGroup::Subreddits => "subreddits",
        }
    }

    pub fn parse(s: &str) -> Option<FeatureGroup> {
        GROUPS.iter().copied().find(|g| g.as_str() == s)
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum FeatureScope {
    FirstPost,
    PriorSixMonths,
}

pub const SCOPES: [FeatureScope; 2] = [FeatureScope::FirstPost, FeatureScope::PriorSixMonths];

impl FeatureScope {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureScope::FirstPost => "first_post",
            FeatureScope::PriorSixMonths => "prior_six_months",
        }
    }

    /// Accepts both the full name and the CLI short form.
    pub fn parse(s: &str) -> Option<FeatureScope> {
        match s {
            "first" | "first_post" => Some(FeatureScope::FirstPost),
            "prior" | "prior_six_months" => Some(FeatureScope::PriorSixMonths),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub group: FeatureGroup,
    pub scope: FeatureScope,
}

impl FeatureColumn {
    /// Fully qualified name, e.g. `first_post.length.post_length`.
    pub fn qualified(&self) -> String {
        format!("{}.{}.{}", self.scope.as_str(), self.group.as_str(), self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub author: String,
    pub label: CohortLabel,
    pub values: Vec<f64>,
}

impl FeatureRow {
    /// Persistent is the positive class.
    pub fn signed_label(&self) -> f64 {
        match self.label {
            CohortLabel::Persistent => 1.0,
            CohortLabel::NonPersistent => -1.0,
        }
    }
}

/// Which (group, scope) combinations a consumer wants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSelector {
    pub groups: BTreeSet<FeatureGroup>,
    pub scopes: BTreeSet<FeatureScope>,
}

impl FeatureSelector {
    pub fn new(
        groups: impl IntoIterator<Item = FeatureGroup>,
        scopes: impl IntoIterator<Item = FeatureScope>,
    ) -> FeatureSelector {
        FeatureSelector {
            groups: groups.into_iter().collect(),
            scopes: scopes.into_iter().collect(),
        }
    }

    pub fn all() -> FeatureSelector {
        FeatureSelector::new(GROUPS, SCOPES)
    }

    pub fn matches(&self, column: &FeatureColumn) -> bool {
        self.groups.contains(&column.group) && self.scopes.contains(&column.scope)
    }

    pub fn name(&self) -> String {
        let scopes: Vec<&str> = self.scopes.iter().map(|s| s.as_str()).collect();
        let groups: Vec<&str> = self.groups.iter().map(|g| g.as_str()).collect();
        format!("{}/{}", scopes.join("+"), groups.join("+"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub columns: Vec<FeatureColumn>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    /// Indices of the columns a selector matches.
    pub fn select(&self, selector: &FeatureSelector) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| selector.matches(c))
            .map(|(i, _)| i)
            .collect()
    }

    /// Splits one column into (persistent, non-persistent) samples.
    pub fn column_samples(&self, column: usize) -> (Vec<f64>, Vec<f64>) {
        let mut p = Vec::new();
        let mut np = Vec::new();
        for row in &self.rows {
            match row.label {
                CohortLabel::Persistent => p.push(row.values[column]),
                CohortLabel::NonPersistent => np.push(row.values[column]),
            }
        }
        (p, np)
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.values.len() != self.columns.len()
                || row.values.iter().any(|v| !v.is_finite())
            {
                return Err(FeatureError::Invalid { row: i });
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), FeatureError> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<FeatureMatrix, FeatureError> {
        let matrix: FeatureMatrix = serde_json::from_slice(&std::fs::read(path)?)?;
        matrix.validate()?;
        Ok(matrix)
    }
}

/// Everything assembly needs besides the corpus and cohort.
pub struct FeatureConfig<'a> {
    pub target_sub: &'a str,
    pub groups: BTreeSet<FeatureGroup>,
    pub scopes: BTreeSet<FeatureScope>,
    pub lexicon: &'a EmotionLexicon,
    pub emotion_normalization: Normalization,
    pub vectors: &'a VectorTable,
    pub general_model: &'a TopicModel,
    pub community_model: &'a TopicModel,
    pub infer_sweeps: usize,
    pub infer_seed: u64,
    pub min_aggregate: usize,
}

/// Stable per-document inference seed, independent of assembly order.
fn doc_seed(seed: u64, doc_id: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(doc_id.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[0..8].try_into().unwrap())
}

fn readability_values(scores: Option<crate::textstats::ReadabilityScores>) -> [f64; 7] {
    match scores {
        Some(r) => [
            r.flesch_reading_ease,
            r.fk_grade,
            r.ari,
            r.coleman_liau,
            r.smog,
            r.consensus_grade,
            0.0,
        ],
        // Empty-document sentinel: zeros with the is_empty flag set.
        None => [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    }
}

const READABILITY_NAMES: [&str; 7] = [
    "flesch",
    "fk_grade",
    "ari",
    "coleman_liau",
    "smog",
    "consensus",
    "is_empty",
];

/// Mean of per-document readability over documents with at least one word.
fn mean_readability(docs: &[&Post]) -> [f64; 7] {
    let mut acc = [0.0; 6];
    let mut scored = 0usize;
    for post in docs {
        let profile = textstats::profile(&post.document());
        if let Ok(r) = textstats::readability(&profile) {
            for (a, v) in acc.iter_mut().zip([
                r.flesch_reading_ease,
                r.fk_grade,
                r.ari,
                r.coleman_liau,
                r.smog,
                r.consensus_grade,
            ]) {
                *a += v;
            }
            scored += 1;
        }
    }
    if scored == 0 {
        return [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
    }
    let mut out = [0.0; 7];
    for (o, a) in out.iter_mut().zip(acc) {
        *o = a / scored as f64;
    }
    out
}

/// Builds the feature matrix for a cohort. Columns follow a fixed
/// (scope, group) order so reruns are layout-identical.
pub fn assemble(
    corpus: &Corpus,
    cohort: &[CohortAssignment],
    config: &FeatureConfig,
) -> Result<FeatureMatrix, FeatureError> {
    let cutoffs = first_target_post_times(corpus, config.target_sub);
    for entry in cohort {
        if !cutoffs.contains_key(&entry.author) {
            return Err(FeatureError::NoFirstPost(entry.author.clone()));
        }
    }

    let mut ordered: Vec<&CohortAssignment> = cohort.iter().collect();
    ordered.sort_by_key(|c| (c.label, c.author.clone()));

    let sub_vectors = if config.groups.contains(&FeatureGroup::Subreddits)
        && config.scopes.contains(&FeatureScope::PriorSixMonths)
    {
        let ordered_cohort: Vec<CohortAssignment> = ordered.iter().map(|&c| c.clone()).collect();
        Some(subreddit_vectors(
            corpus,
            &ordered_cohort,
            config.min_aggregate,
            &cutoffs,
        )?)
    } else {
        None
    };

    let mut columns = Vec::new();
    for scope in SCOPES {
        if !config.scopes.contains(&scope) {
            continue;
        }
        for group in GROUPS {
            if !config.groups.contains(&group) {
                continue;
            }
            let push = |columns: &mut Vec<FeatureColumn>, name: String| {
                columns.push(FeatureColumn { name, group, scope });
            };
            match group {
                FeatureGroup::Readability => {
                    for name in READABILITY_NAMES {
                        push(&mut columns, name.to_string());
                    }
                }
                FeatureGroup::Length => push(&mut columns, "post_length".to_string()),
                FeatureGroup::Emotion => {
                    for cat in CATEGORIES {
                        push(&mut columns, cat.as_str().to_string());
                    }
                }
                FeatureGroup::Lda => {
                    let k = match scope {
                        FeatureScope::FirstPost => config.community_model.k,
                        FeatureScope::PriorSixMonths => config.general_model.k,
                    };
                    for t in 0..k {
                        push(&mut columns, format!("topic_{t:02}"));
                    }
                }
                FeatureGroup::W2v => {
                    for d in 0..config.vectors.dimension() {
                        push(&mut columns, format!("dim_{d:03}"));
                    }
                }
                FeatureGroup::Subreddits => {
                    if scope == FeatureScope::PriorSixMonths {
                        if let Some(sv) = &sub_vectors {
                            for sub in &sv.vocabulary {
                                push(&mut columns, format!("sub:{sub}"));
                            }
                        }
                    }
                }
            }
        }
    }

    let mut rows = Vec::with_capacity(ordered.len());
    for (row_idx, entry) in ordered.iter().enumerate() {
        let cutoff = cutoffs[&entry.author];
        let first_post = corpus
            .posts_by(&entry.author)
            .filter(|p| p.subreddit == config.target_sub)
            .min_by_key(|p| (p.created_utc, p.id.clone()))
            .ok_or_else(|| FeatureError::NoFirstPost(entry.author.clone()))?;
        let cutoff_month = MonthIndex::from_utc(cutoff);
        let prior_window = (cutoff_month.0 - 6)..=(cutoff_month.0 - 1);
        let mut prior_posts: Vec<&Post> = corpus
            .posts_by(&entry.author)
            .filter(|p| prior_window.contains(&p.month().0))
            .collect();
        prior_posts.sort_by_key(|p| (p.created_utc, p.id.clone()));

        let mut values = Vec::with_capacity(columns.len());
        for scope in SCOPES {
            if !config.scopes.contains(&scope) {
                continue;
            }
            for group in GROUPS {
                if !config.groups.contains(&group) {
                    continue;
                }
                match (group, scope) {
                    (FeatureGroup::Readability, FeatureScope::FirstPost) => {
                        let profile = textstats::profile(&first_post.document());
                        values.extend(readability_values(
                            textstats::readability(&profile).ok(),
                        ));
                    }
                    (FeatureGroup::Readability, FeatureScope::PriorSixMonths) => {
                        values.extend(mean_readability(&prior_posts));
                    }
                    (FeatureGroup::Length, FeatureScope::FirstPost) => {
                        values.push(textstats::post_length(&first_post.document()) as f64);
                    }
                    (FeatureGroup::Length, FeatureScope::PriorSixMonths) => {
                        let mean = if prior_posts.is_empty() {
                            0.0
                        } else {
                            prior_posts
                                .iter()
                                .map(|p| textstats::post_length(&p.document()) as f64)
                                .sum::<f64>()
                                / prior_posts.len() as f64
                        };
                        values.push(mean);
                    }
                    (FeatureGroup::Emotion, FeatureScope::FirstPost) => {
                        let profile = score_post(
                            &first_post.document(),
                            config.lexicon,
                            config.emotion_normalization,
                        );
                        values.extend(profile.proportions);
                    }
                    (FeatureGroup::Emotion, FeatureScope::PriorSixMonths) => {
                        let profiles: Vec<_> = prior_posts
                            .iter()
                            .map(|p| {
                                score_post(
                                    &p.document(),
                                    config.lexicon,
                                    config.emotion_normalization,
                                )
                            })
                            .collect();
                        values.extend(user_profile(&profiles).proportions);
                    }
                    (FeatureGroup::Lda, FeatureScope::FirstPost) => {
                        let tokens = lowercase_tokens(&first_post.document());
                        values.extend(infer_theta(
                            config.community_model,
                            &tokens,
                            config.infer_sweeps,
                            doc_seed(config.infer_seed, &first_post.id),
                        ));
                    }
                    (FeatureGroup::Lda, FeatureScope::PriorSixMonths) => {
                        values.extend(mean_theta(
                            config.general_model,
                            &prior_posts,
                            config.infer_sweeps,
                            config.infer_seed,
                        ));
                    }
                    (FeatureGroup::W2v, FeatureScope::FirstPost) => {
                        values.extend(pool_post(&first_post.document(), config.vectors).vector);
                    }
                    (FeatureGroup::W2v, FeatureScope::PriorSixMonths) => {
                        let pooled: Vec<PooledEmbedding> = prior_posts
                            .iter()
                            .map(|p| pool_post(&p.document(), config.vectors))
                            .collect();
                        values.extend(pool_user(&pooled, config.vectors.dimension()).vector);
                    }
                    (FeatureGroup::Subreddits, FeatureScope::PriorSixMonths) => {
                        if let Some(sv) = &sub_vectors {
                            values.extend(sv.vectors[row_idx].frequencies.iter().copied());
                        }
                    }
                    (FeatureGroup::Subreddits, FeatureScope::FirstPost) => {}
                }
            }
        }
        rows.push(FeatureRow {
            author: entry.author.clone(),
            label: entry.label,
            values,
        });
    }

    let matrix = FeatureMatrix { columns, rows };
    matrix.validate()?;
    Ok(matrix)
}

fn lowercase_tokens(text: &str) -> Vec<String> {
    textstats::tokenize(text)
        .into_iter()
        .map(|t| t.to_lowercase())
        .collect()
}

/// Mean inferred theta over documents; uniform when there are none.
fn mean_theta(model: &TopicModel, posts: &[&Post], sweeps: usize, seed: u64) -> Vec<f64> {
    if posts.is_empty() {
        return vec![1.0 / model.k as f64; model.k];
    }
    let mut acc = vec![0.0; model.k];
    for post in posts {
        let theta = infer_theta(
            model,
            &lowercase_tokens(&post.document()),
            sweeps,
            doc_seed(seed, &post.id),
        );
        for (a, t) in acc.iter_mut().zip(theta) {
            *a += t;
        }
    }
    for a in &mut acc {
        *a /= posts.len() as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::EmotionCategory;
    use crate::topics::{build_vocabulary, train_lda};
    use chrono::{TimeZone, Utc};

    fn ts(year: i32, month: u32, day: u32) -> i64 {
        Utc.with_ymd_and_hms(year, month, day, 12, 0, 0)
            .unwrap()
            .timestamp()
    }

    fn post(id: &str, author: &str, sub: &str, t: i64, title: &str, body: &str) -> Post {
        Post {
            id: id.into(),
            author: author.into(),
            subreddit: sub.into(),
            created_utc: t,
            title: title.into(),
            body: body.into(),
            tag: None,
        }
    }

    fn tiny_model(texts: &[&str], k: usize) -> TopicModel {
        let docs: Vec<Vec<String>> = texts.iter().map(|t| lowercase_tokens(t)).collect();
        let vocab = build_vocabulary(&docs, 1, &std::collections::HashSet::new()).unwrap();
        train_lda(&docs, vocab, k, 0.5, 0.1, 20, 7).unwrap()
    }

    fn setup() -> (Corpus, Vec<CohortAssignment>) {
        let posts = vec![
            // Persistent user: background, then joins "target" in April.
            post("b1", "paula", "study", ts(2020, 11, 1), "study habit plan", "study focus habit"),
            post("b2", "paula", "study", ts(2020, 12, 1), "habit study", "plan study"),
            post("b3", "paula", "fitness", ts(2021, 1, 5), "study plan", "happy progress"),
            post("f1", "paula", "target", ts(2021, 4, 2), "I hope to improve", "study plan habit focus"),
            post("f2", "paula", "target", ts(2021, 4, 9), "more study", "habit"),
            // Non-persistent user.
            post("c1", "nina", "gaming", ts(2020, 11, 3), "game fun meme", "game chat"),
            post("c2", "nina", "gaming", ts(2021, 2, 3), "fun game", "angry rage game"),
            post("g1", "nina", "target", ts(2021, 5, 6), "quick question", "game fun"),
        ];
        let corpus = Corpus::from_posts(posts).unwrap();
        let cohort = vec![
            CohortAssignment {
                author: "paula".into(),
                label: CohortLabel::Persistent,
                target_window_posts: 2,
                unique_months_before: 3,
                unique_months_after: 3,
            },
            CohortAssignment {
                author: "nina".into(),
                label: CohortLabel::NonPersistent,
                target_window_posts: 1,
                unique_months_before: 3,
                unique_months_after: 3,
            },
        ];
        (corpus, cohort)
    }

    fn config<'a>(
        lexicon: &'a EmotionLexicon,
        vectors: &'a VectorTable,
        general: &'a TopicModel,
        community: &'a TopicModel,
    ) -> FeatureConfig<'a> {
        FeatureConfig {
            target_sub: "target",
            groups: GROUPS.into_iter().collect(),
            scopes: SCOPES.into_iter().collect(),
            lexicon,
            emotion_normalization: Normalization::PerHit,
            vectors,
            general_model: general,
            community_model: community,
            infer_sweeps: 10,
            infer_seed: 9,
            min_aggregate: 2,
        }
    }

    #[test]
    fn assembles_rectangular_matrix_with_expected_columns() {
        let (corpus, cohort) = setup();
        let lexicon = EmotionLexicon::from_entries([
            ("hope".to_string(), vec![EmotionCategory::Anticipation]),
            ("angry".to_string(), vec![EmotionCategory::Anger]),
        ]);
        let mut vectors = VectorTable::new(2);
        vectors.push("study".into(), vec![1.0, 0.0]).unwrap();
        vectors.push("game".into(), vec![0.0, 1.0]).unwrap();
        let general = tiny_model(&["study habit plan focus", "game fun meme chat"], 2);
        let community = tiny_model(&["study plan habit", "game fun question"], 2);

        let matrix = assemble(
            &corpus,
            &cohort,
            &config(&lexicon, &vectors, &general, &community),
        )
        .unwrap();

        // 7 readability + 1 length + 10 emotion + 2 lda + 2 w2v per scope,
        // plus the prior-only subreddit vocabulary.
        let per_scope = 7 + 1 + 10 + 2 + 2;
        let sub_cols = matrix
            .columns
            .iter()
            .filter(|c| c.group == FeatureGroup::Subreddits)
            .count();
        assert_eq!(matrix.columns.len(), per_scope * 2 + sub_cols);
        assert!(sub_cols >= 1);
        assert_eq!(matrix.rows.len(), 2);
        matrix.validate().unwrap();

        // Rows are sorted persistent-first.
        assert_eq!(matrix.rows[0].author, "paula");
        assert_eq!(matrix.rows[0].label, CohortLabel::Persistent);

        // First-post length column matches a direct count.
        let length_col = matrix
            .columns
            .iter()
            .position(|c| {
                c.group == FeatureGroup::Length && c.scope == FeatureScope::FirstPost
            })
            .unwrap();
        assert_eq!(
            matrix.rows[0].values[length_col],
            textstats::post_length("I hope to improve. study plan habit focus") as f64
        );

        // Theta columns sum to one per scope.
        let lda_first: Vec<usize> = matrix
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.group == FeatureGroup::Lda && c.scope == FeatureScope::FirstPost)
            .map(|(i, _)| i)
            .collect();
        let sum: f64 = lda_first.iter().map(|&i| matrix.rows[0].values[i]).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn assembly_is_deterministic() {
        let (corpus, cohort) = setup();
        let lexicon = EmotionLexicon::from_entries([(
            "hope".to_string(),
            vec![EmotionCategory::Anticipation],
        )]);
        let mut vectors = VectorTable::new(2);
        vectors.push("study".into(), vec![1.0, 0.0]).unwrap();
        let general = tiny_model(&["study habit plan focus", "game fun meme chat"], 2);
        let community = tiny_model(&["study plan habit", "game fun question"], 2);
        let cfg = config(&lexicon, &vectors, &general, &community);
        let a = assemble(&corpus, &cohort, &cfg).unwrap();
        let b = assemble(&corpus, &cohort, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn save_load_round_trips() {
        let (corpus, cohort) = setup();
        let lexicon = EmotionLexicon::from_entries([(
            "hope".to_string(),
            vec![EmotionCategory::Anticipation],
        )]);
        let mut vectors = VectorTable::new(2);
        vectors.push("study".into(), vec![1.0, 0.0]).unwrap();
        let general = tiny_model(&["study habit plan focus", "game fun meme chat"], 2);
        let community = tiny_model(&["study plan habit", "game fun question"], 2);
        let matrix = assemble(
            &corpus,
            &cohort,
            &config(&lexicon, &vectors, &general, &community),
        )
        .unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("matrix.json");
        matrix.save(&path).unwrap();
        assert_eq!(FeatureMatrix::load(&path).unwrap(), matrix);
    }

    #[test]
    fn selector_filters_columns() {
        let columns = vec![
            FeatureColumn {
                name: "post_length".into(),
                group: FeatureGroup::Length,
                scope: FeatureScope::FirstPost,
            },
            FeatureColumn {
                name: "post_length".into(),
                group: FeatureGroup::Length,
                scope: FeatureScope::PriorSixMonths,
            },
            FeatureColumn {
                name: "flesch".into(),
                group: FeatureGroup::Readability,
                scope: FeatureScope::FirstPost,
            },
        ];
        let matrix = FeatureMatrix {
            columns,
            rows: vec![],
        };
        let sel = FeatureSelector::new([FeatureGroup::Length], [FeatureScope::FirstPost]);
        assert_eq!(matrix.select(&sel), vec![0]);
        assert_eq!(matrix.select(&FeatureSelector::all()), vec![0, 1, 2]);
        assert_eq!(sel.name(), "first_post/length");
    }

    #[test]
    fn missing_first_post_errors() {
        let posts = vec![post("a", "u", "other", ts(2021, 1, 1), "t", "")];
        let corpus = Corpus::from_posts(posts).unwrap();
        let cohort = vec![CohortAssignment {
            author: "u".into(),
            label: CohortLabel::Persistent,
            target_window_posts: 4,
            unique_months_before: 3,
            unique_months_after: 3,
        }];
        let lexicon = EmotionLexicon::from_entries([]);
        let vectors = VectorTable::new(1);
        let general = tiny_model(&["a b", "b c"], 1);
        let community = tiny_model(&["a b", "b c"], 1);
        let err = assemble(
            &corpus,
            &cohort,
            &config(&lexicon, &vectors, &general, &community),
        )
        .unwrap_err();
        assert!(matches!(err, FeatureError::NoFirstPost(a) if a == "u"));
    }
}
