//! Library behind the `persevere` toolkit: build persistent vs. non-persistent
//! user cohorts from newline-delimited post archives, extract topical,
//! stylistic, and emotional features from their writing, test group
//! differences with false-discovery-rate control, and train classifiers that
//! predict which users stay engaged.
//!
//! The crate is organised along the pipeline:
//!
//! * [`corpus`] — archive ingestion, the on-disk post store, cohort selection,
//!   and subreddit-participation vectors
//! * [`textstats`] — tokenization, readability formulas, post length
//! * [`emotion`] — emotion-lexicon loading and per-post / per-user scoring
//! * [`topics`] — collapsed-Gibbs LDA training and per-document inference
//! * [`embeddings`] — pretrained word-vector loading and mean pooling
//! * [`stats`] — two-sample t-tests and Benjamini-Hochberg adjustment
//! * [`features`] — assembly of the per-user feature matrix
//! * [`classify`] — SMO-trained SVM and stratified cross validation
//! * [`pipeline`] — staged runs driven by a config file, with a manifest
//! * [`fixture`] — deterministic synthetic archives for tests and demos

pub mod classify;
pub mod corpus;
pub mod embeddings;
pub mod emotion;
pub mod features;
pub mod fixture;
pub mod pipeline;
pub mod stats;
pub mod textstats;
pub mod topics;
