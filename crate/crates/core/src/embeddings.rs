//! Pretrained word-vector tables and mean pooling.
//!
//! Text format: first line `V D`, then `V` lines of `word c1 .. cD` with
//! space-separated decimal components. Binary format: the same header line,
//! then per entry the word bytes, one `0x20`, `D` little-endian 4-byte
//! floats, and a terminating newline.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::textstats;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("failed to read vector file: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad vector file header: expected `V D`, got {header:?}")]
    BadHeader { header: String },
    #[error("line {line}: expected {expected} components, got {got}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: unparseable component {value:?}")]
    BadComponent { line: usize, value: String },
    #[error("vector file truncated: header promised {expected} entries, found {got}")]
    Truncated { expected: usize, got: usize },
    #[error("dimension mismatch: vector has {got} components, table dimension is {expected}")]
    WrongDimension { expected: usize, got: usize },
}

/// Word-vector table; entry order follows the source file.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    dimension: usize,
    words: Vec<String>,
    vectors: Vec<Vec<f32>>,
    index: HashMap<String, usize>,
}

impl VectorTable {
    pub fn new(dimension: usize) -> VectorTable {
        VectorTable {
            dimension,
            words: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn push(&mut self, word: String, vector: Vec<f32>) -> Result<(), EmbeddingError> {
        if vector.len() != self.dimension {
            return Err(EmbeddingError::WrongDimension {
                expected: self.dimension,
                got: vector.len(),
            });
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.vectors.push(vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index.get(word).map(|&i| self.vectors[i].as_slice())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.words
            .iter()
            .zip(&self.vectors)
            .map(|(w, v)| (w.as_str(), v.as_slice()))
    }
}

/// Mean of the in-vocabulary token vectors of one post.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledEmbedding {
    pub vector: Vec<f64>,
    pub in_vocab_tokens: usize,
}

impl PooledEmbedding {
    pub fn zero(dimension: usize) -> PooledEmbedding {
        PooledEmbedding {
            vector: vec![0.0; dimension],
            in_vocab_tokens: 0,
        }
    }
}

fn parse_header(line: &str) -> Result<(usize, usize), EmbeddingError> {
    let mut parts = line.split_whitespace();
    let bad = || EmbeddingError::BadHeader {
        header: line.to_string(),
    };
    match (parts.next(), parts.next(), parts.next()) {
        (Some(v), Some(d), None) => {
            let v = v.parse().map_err(|_| bad())?;
            let d = d.parse().map_err(|_| bad())?;
            Ok((v, d))
        }
        _ => Err(bad()),
    }
}

/// Loads a text or binary vector file, dispatching on the `.bin` extension.
pub fn load_vectors(path: &Path, limit: Option<usize>) -> Result<VectorTable, EmbeddingError> {
    if path.extension().is_some_and(|e| e == "bin") {
        let file = std::fs::File::open(path)?;
        read_binary_vectors(std::io::BufReader::new(file), limit)
    } else {
        let file = std::fs::File::open(path)?;
        read_text_vectors(std::io::BufReader::new(file), limit)
    }
}

pub fn read_text_vectors<R: BufRead>(
    mut reader: R,
    limit: Option<usize>,
) -> Result<VectorTable, EmbeddingError> {
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let (count, dimension) = parse_header(header.trim_end_matches('\n'))?;
    let take = limit.map_or(count, |l| l.min(count));
    let mut table = VectorTable::new(dimension);
    let mut lines = reader.lines();
    for i in 0..take {
        let line_no = i + 2;
        let line = match lines.next() {
            Some(line) => line?,
            None => {
                return Err(EmbeddingError::Truncated {
                    expected: take,
                    got: i,
                })
            }
        };
        let mut parts = line.split_whitespace();
        let word = parts
            .next()
            .ok_or(EmbeddingError::DimensionMismatch {
                line: line_no,
                expected: dimension,
                got: 0,
            })?
            .to_string();
        let mut vector = Vec::with_capacity(dimension);
        for part in parts {
            let v: f32 = part.parse().map_err(|_| EmbeddingError::BadComponent {
                line: line_no,
                value: part.to_string(),
            })?;
            vector.push(v);
        }
        if vector.len() != dimension {
            return Err(EmbeddingError::DimensionMismatch {
                line: line_no,
                expected: dimension,
                got: vector.len(),
            });
        }
        table.push(word, vector)?;
    }
    Ok(table)
}

pub fn read_binary_vectors<R: BufRead>(
    mut reader: R,
    limit: Option<usize>,
) -> Result<VectorTable, EmbeddingError> {
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let (count, dimension) = parse_header(header.trim_end_matches('\n'))?;
    let take = limit.map_or(count, |l| l.min(count));
    let mut table = VectorTable::new(dimension);
    for i in 0..take {
        let mut word_bytes = Vec::new();
        let n = reader.read_until(b' ', &mut word_bytes)?;
        if n == 0 {
            return Err(EmbeddingError::Truncated {
                expected: take,
                got: i,
            });
        }
        if word_bytes.last() == Some(&b' ') {
            word_bytes.pop();
        }
        let word = String::from_utf8_lossy(&word_bytes).into_owned();
        let mut buf = vec![0u8; dimension * 4];
        reader.read_exact(&mut buf).map_err(|_| EmbeddingError::Truncated {
            expected: take,
            got: i,
        })?;
        let vector: Vec<f32> = buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        // Optional newline between entries.
        let mut peek = [0u8; 1];
        match reader.read(&mut peek) {
            Ok(1) if peek[0] != b'\n' => {
                return Err(EmbeddingError::BadHeader {
                    header: format!("expected newline after entry {}", i + 1),
                });
            }
            _ => {}
        }
        table.push(word, vector)?;
    }
    Ok(table)
}

/// Writes the text format; loading and re-saving is byte-identical.
pub fn save_text_vectors(table: &VectorTable, path: &Path) -> Result<(), EmbeddingError> {
    let mut out = String::new();
    write_text_vectors(table, &mut out);
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_text_vectors(table: &VectorTable, out: &mut String) {
    use std::fmt::Write;
    writeln!(out, "{} {}", table.len(), table.dimension()).unwrap();
    for (word, vector) in table.entries() {
        out.push_str(word);
        for v in vector {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
}

pub fn save_binary_vectors(table: &VectorTable, path: &Path) -> Result<(), EmbeddingError> {
    let mut out: Vec<u8> = Vec::new();
    writeln!(out, "{} {}", table.len(), table.dimension())?;
    for (word, vector) in table.entries() {
        out.extend_from_slice(word.as_bytes());
        out.push(b' ');
        for v in vector {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(b'\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Mean vector of the in-vocabulary tokens of `text`.
///
/// Tokens are looked up lowercased first, then with their original case,
/// so cased pretrained vocabularies still resolve.
pub fn pool_post(text: &str, table: &VectorTable) -> PooledEmbedding {
    let mut sum = vec![0.0f64; table.dimension()];
    let mut hits = 0usize;
    for token in textstats::tokenize(text) {
        let vector = table
            .get(&token.to_lowercase())
            .or_else(|| table.get(&token));
        if let Some(v) = vector {
            for (acc, &x) in sum.iter_mut().zip(v) {
                *acc += x as f64;
            }
            hits += 1;
        }
    }
    if hits == 0 {
        return PooledEmbedding::zero(table.dimension());
    }
    for v in &mut sum {
        *v /= hits as f64;
    }
    PooledEmbedding {
        vector: sum,
        in_vocab_tokens: hits,
    }
}

/// Mean of per-post embeddings, skipping posts with no in-vocabulary tokens.
pub fn pool_user(posts: &[PooledEmbedding], dimension: usize) -> PooledEmbedding {
    let scored: Vec<&PooledEmbedding> = posts.iter().filter(|p| p.in_vocab_tokens > 0).collect();
    if scored.is_empty() {
        return PooledEmbedding::zero(dimension);
    }
    let mut sum = vec![0.0f64; dimension];
    let mut tokens = 0;
    for p in &scored {
        for (acc, &x) in sum.iter_mut().zip(&p.vector) {
            *acc += x;
        }
        tokens += p.in_vocab_tokens;
    }
    for v in &mut sum {
        *v /= scored.len() as f64;
    }
    PooledEmbedding {
        vector: sum,
        in_vocab_tokens: tokens,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_table() -> VectorTable {
        let mut t = VectorTable::new(2);
        t.push("a".into(), vec![1.0, 0.0]).unwrap();
        t.push("b".into(), vec![0.0, 1.0]).unwrap();
        t
    }

    #[test]
    fn text_loader_reads_header_and_entries() {
        let table = read_text_vectors("2 3\nfoo 1 2 3\nbar 0.5 -1 2.5\n".as_bytes(), None).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table.dimension(), 3);
        assert_eq!(table.get("bar").unwrap(), &[0.5, -1.0, 2.5]);
    }

    #[test]
    fn short_line_is_fatal_with_line_number() {
        let err = read_text_vectors("2 3\nfoo 1 2 3\nbar 1 2\n".as_bytes(), None).unwrap_err();
        assert!(matches!(
            err,
            EmbeddingError::DimensionMismatch {
                line: 3,
                expected: 3,
                got: 2
            }
        ));
    }

    #[test]
    fn limit_truncates_entries() {
        let table = read_text_vectors("2 3\nfoo 1 2 3\nbar 0.5 -1 2.5\n".as_bytes(), Some(1)).unwrap();
        assert_eq!(table.len(), 1);
        assert!(table.get("bar").is_none());
    }

    #[test]
    fn truncated_file_is_an_error() {
        let err = read_text_vectors("3 2\nfoo 1 2\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, EmbeddingError::Truncated { expected: 3, got: 1 }));
    }

    #[test]
    fn shipped_fixture_table_loads() {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../fixtures/vectors_10x4.txt");
        let table = load_vectors(&path, None).unwrap();
        assert_eq!(table.len(), 10);
        assert_eq!(table.dimension(), 4);
    }

    #[test]
    fn pool_post_examples() {
        let t = small_table();
        let p = pool_post("a b", &t);
        assert_eq!(p.vector, vec![0.5, 0.5]);
        assert_eq!(p.in_vocab_tokens, 2);

        let p = pool_post("a c", &t);
        assert_eq!(p.vector, vec![1.0, 0.0]);
        assert_eq!(p.in_vocab_tokens, 1);

        let p = pool_post("c d", &t);
        assert_eq!(p.vector, vec![0.0, 0.0]);
        assert_eq!(p.in_vocab_tokens, 0);
    }

    #[test]
    fn lookup_falls_back_to_original_case() {
        let mut t = VectorTable::new(1);
        t.push("Paris".into(), vec![2.0]).unwrap();
        let p = pool_post("Paris", &t);
        assert_eq!(p.in_vocab_tokens, 1);
        assert_eq!(p.vector, vec![2.0]);
    }

    #[test]
    fn pool_user_examples() {
        let a = PooledEmbedding {
            vector: vec![1.0, 0.0],
            in_vocab_tokens: 1,
        };
        let b = PooledEmbedding {
            vector: vec![0.0, 1.0],
            in_vocab_tokens: 1,
        };
        assert_eq!(pool_user(&[a.clone(), b], 2).vector, vec![0.5, 0.5]);
        assert_eq!(
            pool_user(&[a.clone(), PooledEmbedding::zero(2)], 2).vector,
            a.vector
        );
        assert_eq!(pool_user(&[], 2), PooledEmbedding::zero(2));
    }

    proptest! {
        #[test]
        fn pooling_is_token_order_invariant(
            tokens in proptest::collection::vec("[ab c]{1}", 1..20)
        ) {
            let t = small_table();
            let text = tokens.join(" ");
            let mut rev = tokens.clone();
            rev.reverse();
            let fwd = pool_post(&text, &t);
            let bwd = pool_post(&rev.join(" "), &t);
            prop_assert_eq!(fwd.in_vocab_tokens, bwd.in_vocab_tokens);
            for (x, y) in fwd.vector.iter().zip(&bwd.vector) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn scaling_table_scales_pool(scale in -4.0..4.0f32) {
            let mut t = VectorTable::new(2);
            t.push("a".into(), vec![scale, 0.0]).unwrap();
            t.push("b".into(), vec![0.0, scale]).unwrap();
            let p = pool_post("a b", &t);
            prop_assert!((p.vector[0] - scale as f64 / 2.0).abs() < 1e-9);
            prop_assert!((p.vector[1] - scale as f64 / 2.0).abs() < 1e-9);
        }

        #[test]
        fn pooling_copies_is_idempotent(n in 1usize..6) {
            let t = small_table();
            let post = pool_post("a b b", &t);
            let copies: Vec<PooledEmbedding> = (0..n).map(|_| post.clone()).collect();
            let pooled = pool_user(&copies, 2);
            for (x, y) in pooled.vector.iter().zip(&post.vector) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn text_round_trip_is_byte_stable(
            words in proptest::collection::hash_set("[a-z]{1,6}", 1..8),
            dim in 1usize..5,
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut table = VectorTable::new(dim);
            for w in words {
                let v: Vec<f32> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
                table.push(w, v).unwrap();
            }
            let mut first = String::new();
            write_text_vectors(&table, &mut first);
            let reloaded = read_text_vectors(first.as_bytes(), None).unwrap();
            let mut second = String::new();
            write_text_vectors(&reloaded, &mut second);
            prop_assert_eq!(first, second);
        }
    }

    #[test]
    fn binary_round_trip_matches_text_table() {
        let dir = tempfile::tempdir().unwrap();
        let t = small_table();
        let bin = dir.path().join("vecs.bin");
        save_binary_vectors(&t, &bin).unwrap();
        let loaded = load_vectors(&bin, None).unwrap();
        assert_eq!(loaded, t);
        let limited = load_vectors(&bin, Some(1)).unwrap();
        assert_eq!(limited.len(), 1);
    }
}
