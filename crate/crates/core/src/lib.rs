//! Author-conditioned LSTM language modelling for stylized text generation.
//!
//! The crate is organised around the pipeline it serves:
//!
//! - [`corpus`]: text normalisation, JSON Lines ingestion, vocabularies, splits
//!   and fixed-length word windows.
//! - [`phonetics`]: rule-file driven grapheme-to-phoneme transcription.
//! - [`numerics`]: dense tensors, a recorded reverse-mode graph, Adam and a
//!   finite-difference gradient checker.
//! - [`model`]: the conditioned LSTM with concatenated word/char/phoneme/document
//!   representations, its two ablations, training, generation and checkpoints.
//! - [`ngram`]: smoothed n-gram models and sample cross-entropy.
//! - [`eval`]: BLEU, quatrain continuation, random baselines and reports.
//! - [`cli`]: the `stylm` command line.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod ngram;
pub mod numerics;
pub mod phonetics;
pub mod rng;

pub use error::{Error, Result};
