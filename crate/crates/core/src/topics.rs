//! Topic models trained with a collapsed Gibbs sampler.
//!
//! Training resamples every token's topic assignment for a fixed number of
//! full sweeps, conditioned on all other assignments with the document and
//! topic mixtures integrated out. The sampler is seeded and single-threaded,
//! so a `(docs, vocabulary, k, alpha, beta, iterations, seed)` tuple always
//! produces a bit-identical model.
//!
//! Models serialize to a line-oriented text container:
//!
//! ```text
//! ldamodel 1
//! k <topics>
//! alpha <f64>
//! beta <f64>
//! iterations <sweeps>
//! seed <u64>
//! dropped_docs <count>
//! terms <V>
//! <V lines of `term document_frequency`, index order>
//! counts
//! <k lines of V space-separated token counts>
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting and the
//! count matrix is integral, so save -> load -> save is byte-identical.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopicsError {
    #[error("model i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("vocabulary is empty after stopword and min_df filtering")]
    EmptyVocabulary,
    #[error("k must be at least 1")]
    ZeroTopics,
    #[error("iterations must be at least 1")]
    ZeroIterations,
    #[error("priors must be positive: alpha={alpha}, beta={beta}")]
    BadPriors { alpha: f64, beta: f64 },
    #[error("k={k} exceeds the {tokens} in-vocabulary tokens")]
    TooManyTopics { k: usize, tokens: usize },
    #[error("topic {topic} out of range for a {k}-topic model")]
    TopicOutOfRange { topic: usize, k: usize },
    #[error("bad model file at line {line}: {message}")]
    BadModelFile { line: usize, message: String },
}

/// Terms that survived stopword and document-frequency filtering,
/// lexicographically sorted with dense indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    document_frequency: Vec<usize>,
}

impl Vocabulary {
    fn from_terms(terms: Vec<String>, document_frequency: Vec<usize>) -> Vocabulary {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            terms,
            index,
            document_frequency,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn document_frequency(&self, term_index: usize) -> usize {
        self.document_frequency[term_index]
    }
}

/// The default English stopword list shipped with the crate
/// (`crates/core/stopwords.txt`, one word per line).
pub fn default_stopwords() -> HashSet<String> {
    include_str!("../stopwords.txt")
        .lines()
        .map(|w| w.trim().to_string())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Keeps non-stopword terms whose document frequency reaches `min_df`.
pub fn build_vocabulary(
    docs: &[Vec<String>],
    min_df: usize,
    stopwords: &HashSet<String>,
) -> Result<Vocabulary, TopicsError> {
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        let mut seen: HashSet<&str> = HashSet::new();
        for token in doc {
            if seen.insert(token.as_str()) {
                *df.entry(token.as_str()).or_default() += 1;
            }
        }
    }
    let mut terms: Vec<(&str, usize)> = df
        .into_iter()
        .filter(|(term, count)| *count >= min_df && !stopwords.contains(*term))
        .collect();
    terms.sort_unstable_by(|a, b| a.0.cmp(b.0));
    if terms.is_empty() {
        return Err(TopicsError::EmptyVocabulary);
    }
    let (terms, document_frequency): (Vec<String>, Vec<usize>) = terms
        .into_iter()
        .map(|(t, c)| (t.to_string(), c))
        .unzip();
    Ok(Vocabulary::from_terms(terms, document_frequency))
}

/// A trained topic model: priors, the topic-word count matrix, and the
/// smoothed topic-word distributions derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Documents dropped at training time for having no in-vocabulary token.
    pub dropped_docs: usize,
    vocab: Vocabulary,
    topic_word_counts: Vec<Vec<u64>>,
    topic_totals: Vec<u64>,
    phi: Vec<Vec<f64>>,
}

impl TopicModel {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Row-stochastic topic-word distributions, `k x |V|`.
    pub fn phi(&self) -> &[Vec<f64>] {
        &self.phi
    }

    pub fn topic_word_counts(&self) -> &[Vec<u64>] {
        &self.topic_word_counts
    }

    /// Total tokens currently assigned across all topics.
    pub fn total_assigned(&self) -> u64 {
        self.topic_totals.iter().sum()
    }

    fn compute_phi(counts: &[Vec<u64>], totals: &[u64], beta: f64, vocab_size: usize) -> Vec<Vec<f64>> {
        counts
            .iter()
            .zip(totals)
            .map(|(row, &total)| {
                let denom = total as f64 + vocab_size as f64 * beta;
                row.iter().map(|&c| (c as f64 + beta) / denom).collect()
            })
            .collect()
    }
}

/// Per-document topic distribution.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DocTopicDist {
    pub doc_id: String,
    pub theta: Vec<f64>,
}

fn doc_ids(docs: &[Vec<String>], vocab: &Vocabulary) -> (Vec<Vec<usize>>, usize) {
    let mut mapped = Vec::with_capacity(docs.len());
    let mut dropped = 0;
    for doc in docs {
        let ids: Vec<usize> = doc.iter().filter_map(|t| vocab.index_of(t)).collect();
        if ids.is_empty() {
            dropped += 1;
        } else {
            mapped.push(ids);
        }
    }
    (mapped, dropped)
}

/// Trains a model with `iterations` full collapsed-Gibbs sweeps.
pub fn train_lda(
    docs: &[Vec<String>],
    vocab: Vocabulary,
    k: usize,
    alpha: f64,
    beta: f64,
    iterations: usize,
    seed: u64,
) -> Result<TopicModel, TopicsError> {
    if k == 0 {
        return Err(TopicsError::ZeroTopics);
    }
    if iterations == 0 {
        return Err(TopicsError::ZeroIterations);
    }
    if !(alpha > 0.0) || !(beta > 0.0) {
        return Err(TopicsError::BadPriors { alpha, beta });
    }
    let (docs, dropped_docs) = doc_ids(docs, &vocab);
    let total_tokens: usize = docs.iter().map(Vec::len).sum();
    if k > total_tokens {
        return Err(TopicsError::TooManyTopics {
            k,
            tokens: total_tokens,
        });
    }

    let vocab_size = vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
    let mut doc_topic = vec![vec![0u64; k]; docs.len()];
    let mut topic_word = vec![vec![0u64; vocab_size]; k];
    let mut topic_total = vec![0u64; k];

    for (d, doc) in docs.iter().enumerate() {
        let mut z = Vec::with_capacity(doc.len());
        for &v in doc {
            let topic = rng.random_range(0..k);
            z.push(topic);
            doc_topic[d][topic] += 1;
            topic_word[topic][v] += 1;
            topic_total[topic] += 1;
        }
        assignments.push(z);
    }

    let beta_sum = vocab_size as f64 * beta;
    let mut weights = vec![0.0f64; k];
    for _sweep in 0..iterations {
        for (d, doc) in docs.iter().enumerate() {
            for (i, &v) in doc.iter().enumerate() {
                let old = assignments[d][i];
                doc_topic[d][old] -= 1;
                topic_word[old][v] -= 1;
                topic_total[old] -= 1;

                let mut cumulative = 0.0;
                for t in 0..k {
                    let w = (doc_topic[d][t] as f64 + alpha)
                        * (topic_word[t][v] as f64 + beta)
                        / (topic_total[t] as f64 + beta_sum);
                    cumulative += w;
                    weights[t] = cumulative;
                }
                let target = rng.random::<f64>() * cumulative;
                let new = weights.partition_point(|&w| w <= target).min(k - 1);

                assignments[d][i] = new;
                doc_topic[d][new] += 1;
                topic_word[new][v] += 1;
                topic_total[new] += 1;
            }
        }
        debug_assert_eq!(
            topic_total.iter().sum::<u64>(),
            total_tokens as u64,
            "token conservation violated after a sweep"
        );
    }

    let phi = TopicModel::compute_phi(&topic_word, &topic_total, beta, vocab_size);
    Ok(TopicModel {
        k,
        alpha,
        beta,
        iterations,
        seed,
        dropped_docs,
        vocab,
        topic_word_counts: topic_word,
        topic_totals: topic_total,
        phi,
    })
}

/// Infers a document's topic distribution against a trained model, holding
/// the model's topic-word distributions fixed.
///
/// Documents with no in-vocabulary token get the uniform distribution.
pub fn infer_theta(model: &TopicModel, tokens: &[String], sweeps: usize, seed: u64) -> Vec<f64> {
    let ids: Vec<usize> = tokens
        .iter()
        .filter_map(|t| model.vocab.index_of(t))
        .collect();
    let k = model.k;
    if ids.is_empty() {
        return vec![1.0 / k as f64; k];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; k];
    let mut z = Vec::with_capacity(ids.len());
    for _ in &ids {
        let topic = rng.random_range(0..k);
        z.push(topic);
        counts[topic] += 1;
    }
    let mut weights = vec![0.0f64; k];
    for _ in 0..sweeps {
        for (i, &v) in ids.iter().enumerate() {
            let old = z[i];
            counts[old] -= 1;
            let mut cumulative = 0.0;
            for t in 0..k {
                let w = (counts[t] as f64 + model.alpha) * model.phi[t][v];
                cumulative += w;
                weights[t] = cumulative;
            }
            let target = rng.random::<f64>() * cumulative;
            let new = weights.partition_point(|&w| w <= target).min(k - 1);
            z[i] = new;
            counts[new] += 1;
        }
    }
    let denom = ids.len() as f64 + k as f64 * model.alpha;
    counts
        .iter()
        .map(|&c| (c as f64 + model.alpha) / denom)
        .collect()
}

/// The `n` highest-probability terms of a topic, ties broken
/// lexicographically; `n` is clamped to the vocabulary size.
pub fn top_words(
    model: &TopicModel,
    topic: usize,
    n: usize,
) -> Result<Vec<(String, f64)>, TopicsError> {
    if topic >= model.k {
        return Err(TopicsError::TopicOutOfRange { topic, k: model.k });
    }
    let mut entries: Vec<(usize, f64)> = model.phi[topic].iter().copied().enumerate().collect();
    entries.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| model.vocab.terms()[a.0].cmp(&model.vocab.terms()[b.0]))
    });
    Ok(entries
        .into_iter()
        .take(n.min(model.vocab.len()))
        .map(|(v, p)| (model.vocab.terms()[v].clone(), p))
        .collect())
}

impl TopicModel {
    pub fn save(&self, path: &Path) -> Result<(), TopicsError> {
        let mut out = String::new();
        self.write_to(&mut out);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, &out)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn write_to(&self, out: &mut String) {
        use std::fmt::Write;
        writeln!(out, "ldamodel 1").unwrap();
        writeln!(out, "k {}", self.k).unwrap();
        writeln!(out, "alpha {}", self.alpha).unwrap();
        writeln!(out, "beta {}", self.beta).unwrap();
        writeln!(out, "iterations {}", self.iterations).unwrap();
        writeln!(out, "seed {}", self.seed).unwrap();
        writeln!(out, "dropped_docs {}", self.dropped_docs).unwrap();
        writeln!(out, "terms {}", self.vocab.len()).unwrap();
        for (i, term) in self.vocab.terms().iter().enumerate() {
            writeln!(out, "{term} {}", self.vocab.document_frequency(i)).unwrap();
        }
        writeln!(out, "counts").unwrap();
        for row in &self.topic_word_counts {
            let mut first = true;
            for c in row {
                if !first {
                    out.push(' ');
                }
                write!(out, "{c}").unwrap();
                first = false;
            }
            out.push('\n');
        }
    }

    pub fn load(path: &Path) -> Result<TopicModel, TopicsError> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<TopicModel, TopicsError> {
        let mut lines = reader.lines().enumerate();
        let mut next_line = |expect: &str| -> Result<(usize, String), TopicsError> {
            match lines.next() {
                Some((i, Ok(line))) => Ok((i + 1, line)),
                Some((i, Err(e))) => Err(TopicsError::BadModelFile {
                    line: i + 1,
                    message: e.to_string(),
                }),
                None => Err(TopicsError::BadModelFile {
                    line: 0,
                    message: format!("unexpected end of file, expected {expect}"),
                }),
            }
        };
        fn field<T: std::str::FromStr>(
            line_no: usize,
            line: &str,
            key: &str,
        ) -> Result<T, TopicsError> {
            let err = |message: String| TopicsError::BadModelFile {
                line: line_no,
                message,
            };
            let (k, v) = line
                .split_once(' ')
                .ok_or_else(|| err(format!("expected `{key} <value>`")))?;
            if k != key {
                return Err(err(format!("expected key {key}, got {k}")));
            }
            v.parse()
                .map_err(|_| err(format!("unparseable value for {key}: {v:?}")))
        }

        let (n, line) = next_line("header")?;
        if line != "ldamodel 1" {
            return Err(TopicsError::BadModelFile {
                line: n,
                message: format!("bad header {line:?}"),
            });
        }
        let (n, line) = next_line("k")?;
        let k: usize = field(n, &line, "k")?;
        let (n, line) = next_line("alpha")?;
        let alpha: f64 = field(n, &line, "alpha")?;
        let (n, line) = next_line("beta")?;
        let beta: f64 = field(n, &line, "beta")?;
        let (n, line) = next_line("iterations")?;
        let iterations: usize = field(n, &line, "iterations")?;
        let (n, line) = next_line("seed")?;
        let seed: u64 = field(n, &line, "seed")?;
        let (n, line) = next_line("dropped_docs")?;
        let dropped_docs: usize = field(n, &line, "dropped_docs")?;
        let (n, line) = next_line("terms")?;
        let vocab_size: usize = field(n, &line, "terms")?;

        let mut terms = Vec::with_capacity(vocab_size);
        let mut dfs = Vec::with_capacity(vocab_size);
        for _ in 0..vocab_size {
            let (n, line) = next_line("a term")?;
            let (term, df) = line.split_once(' ').ok_or_else(|| TopicsError::BadModelFile {
                line: n,
                message: "expected `term df`".to_string(),
            })?;
            let df: usize = df.parse().map_err(|_| TopicsError::BadModelFile {
                line: n,
                message: format!("bad document frequency {df:?}"),
            })?;
            terms.push(term.to_string());
            dfs.push(df);
        }
        let (n, line) = next_line("counts")?;
        if line != "counts" {
            return Err(TopicsError::BadModelFile {
                line: n,
                message: format!("expected `counts`, got {line:?}"),
            });
        }
        let mut topic_word_counts = Vec::with_capacity(k);
        for _ in 0..k {
            let (n, line) = next_line("a count row")?;
            let row: Result<Vec<u64>, _> = line.split(' ').map(str::parse).collect();
            let row = row.map_err(|_| TopicsError::BadModelFile {
                line: n,
                message: "unparseable count row".to_string(),
            })?;
            if row.len() != vocab_size {
                return Err(TopicsError::BadModelFile {
                    line: n,
                    message: format!("count row has {} entries, expected {vocab_size}", row.len()),
                });
            }
            topic_word_counts.push(row);
        }
        let topic_totals: Vec<u64> = topic_word_counts
            .iter()
            .map(|row| row.iter().sum())
            .collect();
        let phi = TopicModel::compute_phi(&topic_word_counts, &topic_totals, beta, vocab_size);
        Ok(TopicModel {
            k,
            alpha,
            beta,
            iterations,
            seed,
            dropped_docs,
            vocab: Vocabulary::from_terms(terms, dfs),
            topic_word_counts,
            topic_totals,
            phi,
        })
    }
}
