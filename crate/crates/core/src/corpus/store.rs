//! The on-disk post store.
//!
//! Layout under the store directory:
//!
//! ```text
//! store/
//!   posts.jsonl            append-only log, one normalized record per line
//!   meta.json              { "format_version": 1, "post_count": N }
//!   index/authors.json     author -> sorted line numbers into posts.jsonl
//!   index/subreddits.json  subreddit -> sorted line numbers
//! ```
//!
//! `posts.jsonl` is deduplicated by post id, so re-ingesting the same
//! archive leaves the store byte-identical. The sidecar indexes are
//! rebuilt after every ingest; queries load posts into memory and do not
//! depend on them.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, Post};

const POSTS_FILE: &str = "posts.jsonl";
const META_FILE: &str = "meta.json";
const INDEX_DIR: &str = "index";
const AUTHOR_INDEX: &str = "authors.json";
const SUBREDDIT_INDEX: &str = "subreddits.json";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StoreMeta {
    pub format_version: u32,
    pub post_count: usize,
}

/// Per-run ingest accounting; malformed lines are skipped, never stored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    /// Lines that parsed and validated.
    pub parsed: usize,
    /// New posts appended to the store.
    pub stored: usize,
    /// Valid records whose id was already present.
    pub duplicates: usize,
    /// Malformed or invalid lines skipped.
    pub skipped: usize,
}

/// One line of a pushshift-style submission archive. Unknown fields are
/// ignored; `created_utc` may be a number or a numeric string.
#[derive(Debug, Deserialize)]
struct RawRecord {
    id: String,
    author: String,
    subreddit: String,
    #[serde(deserialize_with = "deserialize_timestamp")]
    created_utc: i64,
    title: String,
    #[serde(default)]
    selftext: String,
    #[serde(default)]
    tag: Option<String>,
}

fn deserialize_timestamp<'de, D>(deserializer: D) -> Result<i64, D::Error>
where
    D: serde::Deserializer<'de>,
{
    use serde::de::Error;
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum TsRepr {
        Int(i64),
        Float(f64),
        Str(String),
    }
    match TsRepr::deserialize(deserializer)? {
        TsRepr::Int(v) => Ok(v),
        TsRepr::Float(v) => Ok(v as i64),
        TsRepr::Str(s) => s
            .trim()
            .parse::<f64>()
            .map(|v| v as i64)
            .map_err(|_| D::Error::custom(format!("bad created_utc {s:?}"))),
    }
}

fn validate(raw: RawRecord) -> Option<Post> {
    if raw.id.is_empty() || raw.author.is_empty() || raw.subreddit.is_empty() {
        return None;
    }
    if raw.created_utc <= 0 {
        return None;
    }
    Some(Post {
        id: raw.id,
        author: raw.author,
        // Subreddit names are matched case-insensitively on reddit itself.
        subreddit: raw.subreddit.to_lowercase(),
        created_utc: raw.created_utc,
        title: raw.title,
        body: raw.selftext,
        tag: raw.tag,
    })
}

fn posts_path(store: &Path) -> PathBuf {
    store.join(POSTS_FILE)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

fn read_store_posts(store: &Path) -> Result<Vec<Post>, CorpusError> {
    let path = posts_path(store);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = std::fs::File::open(&path)?;
    let mut posts = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        let post: Post = serde_json::from_str(&line).map_err(|e| CorpusError::CorruptStore {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        posts.push(post);
    }
    Ok(posts)
}

fn rebuild_sidecars(store: &Path, posts: &[Post]) -> Result<(), CorpusError> {
    let mut by_author: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut by_subreddit: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (line, post) in posts.iter().enumerate() {
        by_author.entry(&post.author).or_default().push(line);
        by_subreddit.entry(&post.subreddit).or_default().push(line);
    }
    let index_dir = store.join(INDEX_DIR);
    std::fs::create_dir_all(&index_dir)?;
    write_atomic(
        &index_dir.join(AUTHOR_INDEX),
        serde_json::to_string_pretty(&by_author).unwrap().as_bytes(),
    )?;
    write_atomic(
        &index_dir.join(SUBREDDIT_INDEX),
        serde_json::to_string_pretty(&by_subreddit)
            .unwrap()
            .as_bytes(),
    )?;
    write_atomic(
        &store.join(META_FILE),
        serde_json::to_string_pretty(&StoreMeta {
            format_version: 1,
            post_count: posts.len(),
        })
        .unwrap()
        .as_bytes(),
    )?;
    Ok(())
}

/// Streams one archive into the store. Idempotent on post id.
pub fn ingest<R: BufRead>(reader: R, store: &Path) -> Result<IngestSummary, CorpusError> {
    std::fs::create_dir_all(store)?;
    let mut posts = read_store_posts(store)?;
    let mut ids: HashSet<String> = posts.iter().map(|p| p.id.clone()).collect();

    let mut summary = IngestSummary::default();
    let mut appended = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            summary.skipped += 1;
            continue;
        }
        let post = match serde_json::from_str::<RawRecord>(&line).ok().and_then(validate) {
            Some(post) => post,
            None => {
                summary.skipped += 1;
                log::warn!("skipping malformed archive line {}", i + 1);
                continue;
            }
        };
        summary.parsed += 1;
        if ids.contains(&post.id) {
            summary.duplicates += 1;
            continue;
        }
        ids.insert(post.id.clone());
        appended.push(post);
    }

    if !appended.is_empty() {
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(posts_path(store))?;
        let mut out = BufWriter::new(file);
        for post in &appended {
            serde_json::to_writer(&mut out, post).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        summary.stored = appended.len();
        posts.extend(appended);
    }
    rebuild_sidecars(store, &posts)?;
    Ok(summary)
}

/// Ingests several archive files in order; an unreadable file is fatal.
pub fn ingest_files(inputs: &[PathBuf], store: &Path) -> Result<IngestSummary, CorpusError> {
    let mut total = IngestSummary::default();
    for input in inputs {
        let file = std::fs::File::open(input)?;
        let summary = ingest(std::io::BufReader::new(file), store)?;
        total.parsed += summary.parsed;
        total.stored += summary.stored;
        total.duplicates += summary.duplicates;
        total.skipped += summary.skipped;
    }
    Ok(total)
}

/// Loads the whole store into memory with its indexes.
pub fn load(store: &Path) -> Result<Corpus, CorpusError> {
    if !posts_path(store).exists() {
        return Err(CorpusError::MissingStore(store.display().to_string()));
    }
    Corpus::from_posts(read_store_posts(store)?)
}
