//! Python bindings for the `stylm` crate.

use std::collections::HashMap;
use std::sync::Arc;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use stylm::corpus::{self, CorpusFormat, Document, BOS, EOS};
use stylm::eval::{self, BaselineMode, BleuConfig, BleuMode};
use stylm::model::{self, DocRef, GenConfig, ModelConfig, StylizedLM, TrainConfig, Variant};
use stylm::ngram;
use stylm::numerics::AdamConfig;
use stylm::phonetics::G2PRuleSet;
use stylm::Error;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyOSError::new_err(err.to_string()),
        Error::Config(_) | Error::Contract(_) | Error::Insufficient(_) | Error::Parse { .. } | Error::Decode(_) => {
            PyValueError::new_err(err.to_string())
        }
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn rules(lang: &str) -> G2PRuleSet {
    G2PRuleSet::for_language(lang)
}

/// Lowercases, strips punctuation and splits on whitespace; line breaks
/// become `<eol>` tokens.
#[pyfunction]
fn preprocess(text: &str) -> Vec<String> {
    corpus::preprocess(text)
}

/// Phoneme symbols for a preprocessed word using the shipped rules for `lang`.
#[pyfunction]
#[pyo3(signature = (word, lang = "en"))]
fn transcribe(word: &str, lang: &str) -> Vec<String> {
    rules(lang).transcribe(word).0
}

/// BLEU percentage; `references[i]` holds the references of hypothesis `i`.
#[pyfunction]
#[pyo3(signature = (hypotheses, references, max_n = 4, sentence = false, epsilon = 1e-9))]
fn bleu(
    hypotheses: Vec<Vec<String>>,
    references: Vec<Vec<Vec<String>>>,
    max_n: usize,
    sentence: bool,
    epsilon: f64,
) -> PyResult<f64> {
    let cfg = BleuConfig {
        max_n,
        epsilon,
        mode: if sentence { BleuMode::Sentence } else { BleuMode::Corpus },
    };
    eval::bleu(&hypotheses, &references, &cfg).map_err(to_py)
}

/// Bits per token of `test` under an n-gram model fitted on `train`, over
/// their common vocabulary.
#[pyfunction]
#[pyo3(signature = (train, test, order = 3))]
fn ngram_cross_entropy(train: Vec<Vec<String>>, test: Vec<Vec<String>>, order: usize) -> PyResult<f64> {
    let vocab = ngram::common_vocabulary(train.iter().chain(&test).map(Vec::as_slice));
    let model = ngram::fit_ngram(&train, order, vocab).map_err(to_py)?;
    ngram::ngram_cross_entropy(&model, &test).map_err(to_py)
}

#[pyclass(name = "Vocabulary", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyVocabulary {
    inner: Arc<corpus::Vocabulary>,
}

#[pymethods]
impl PyVocabulary {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Id of `token`; unknown tokens map to the `<unk>` id.
    fn id(&self, token: &str) -> u32 {
        self.inner.id(token)
    }

    fn token(&self, id: u32) -> PyResult<String> {
        if (id as usize) < self.inner.len() {
            Ok(self.inner.token(id).to_string())
        } else {
            Err(PyValueError::new_err(format!("id {id} out of range")))
        }
    }

    fn tokens(&self) -> Vec<String> {
        self.inner.tokens().to_vec()
    }

    fn freq(&self, token: &str) -> u64 {
        self.inner.get(token).map_or(0, |i| self.inner.freq(i))
    }

    /// Random words drawn uniformly or by frequency, specials excluded.
    #[pyo3(signature = (n_tokens, mode = "uniform", seed = 0))]
    fn random_text(&self, n_tokens: usize, mode: &str, seed: u64) -> PyResult<Vec<String>> {
        let mode: BaselineMode = mode.parse().map_err(to_py)?;
        eval::random_baseline_text(&self.inner, mode, n_tokens, seed).map_err(to_py)
    }
}

#[pyclass(name = "Corpus", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCorpus {
    inner: Arc<corpus::Corpus>,
}

impl PyCorpus {
    fn wrap(c: corpus::Corpus) -> Self {
        PyCorpus { inner: Arc::new(c) }
    }
}

#[pymethods]
impl PyCorpus {
    /// Builds a corpus from `(id, author, text)` records.
    #[new]
    #[pyo3(signature = (records, lang = "en"))]
    fn new(records: Vec<(String, String, String)>, lang: &str) -> PyResult<Self> {
        let docs = records
            .into_iter()
            .map(|(id, author, text)| Document::new(id, author, lang, text))
            .collect();
        corpus::Corpus::new(docs).map(Self::wrap).map_err(to_py)
    }

    /// Reads a JSON Lines corpus or a binary cache (by extension).
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let format = CorpusFormat::from_path(&path);
        corpus::ingest(&path, format).map(Self::wrap).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn authors(&self) -> Vec<String> {
        self.inner.author_ids()
    }

    /// `(id, author, tokens)` per document; tokens include the sentinels.
    fn documents(&self) -> Vec<(String, String, Vec<String>)> {
        self.inner
            .documents
            .iter()
            .map(|d| (d.id.clone(), d.author_id.clone(), d.tokens.clone()))
            .collect()
    }

    #[pyo3(signature = (min_count = 1))]
    fn vocabulary(&self, min_count: u64) -> PyVocabulary {
        PyVocabulary {
            inner: Arc::new(corpus::build_vocab(&self.inner, min_count)),
        }
    }

    /// Author-stratified `(train, validation)` split.
    #[pyo3(signature = (validation_fraction, seed = 0))]
    fn split(&self, validation_fraction: f64, seed: u64) -> PyResult<(Self, Self)> {
        let (t, v) = corpus::split_corpus(&self.inner, validation_fraction, seed).map_err(to_py)?;
        Ok((Self::wrap(t), Self::wrap(v)))
    }

    /// Fixed-length word windows of one author as `(group, tokens)` pairs.
    #[pyo3(signature = (author, words_per_sample = 500, n_samples = 20, seed = 0))]
    fn word_windows(
        &self,
        author: &str,
        words_per_sample: usize,
        n_samples: usize,
        seed: u64,
    ) -> PyResult<Vec<(u8, Vec<String>)>> {
        let samples =
            corpus::sample_word_windows(&self.inner, author, words_per_sample, n_samples, seed).map_err(to_py)?;
        Ok(samples.into_iter().map(|s| (s.group, s.tokens)).collect())
    }

    fn content_hash(&self) -> String {
        self.inner.content_hash()
    }
}

fn model_config(variant: &str, dims: Option<HashMap<String, usize>>) -> PyResult<ModelConfig> {
    let mut cfg = ModelConfig {
        variant: variant.parse::<Variant>().map_err(to_py)?,
        ..ModelConfig::default()
    };
    for (k, v) in dims.unwrap_or_default() {
        let slot = match k.as_str() {
            "d_word" => &mut cfg.d_word,
            "d_char_bi" => &mut cfg.d_char_bi,
            "d_phon_bi" => &mut cfg.d_phon_bi,
            "d_doc_proj" => &mut cfg.d_doc_proj,
            "d_state" => &mut cfg.d_state,
            "d_author_emb" => &mut cfg.d_author_emb,
            "d_doc_emb" => &mut cfg.d_doc_emb,
            "d_char_emb" => &mut cfg.d_char_emb,
            "d_phon_emb" => &mut cfg.d_phon_emb,
            other => return Err(PyValueError::new_err(format!("unknown dimension {other:?}"))),
        };
        *slot = v;
    }
    Ok(cfg)
}

#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: StylizedLM,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        model::load_checkpoint(&path)
            .map(|inner| PyModel { inner })
            .map_err(to_py)
    }

    /// Trains a fresh model; returns it with the per-epoch training NLL.
    #[staticmethod]
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (corpus, variant = "full", epochs = 10, lr = 1e-3, seed = 0, dims = None, validation = None))]
    fn train(
        py: Python<'_>,
        corpus: &PyCorpus,
        variant: &str,
        epochs: usize,
        lr: f64,
        seed: u64,
        dims: Option<HashMap<String, usize>>,
        validation: Option<&PyCorpus>,
    ) -> PyResult<(Self, Vec<f64>)> {
        let config = model_config(variant, dims)?;
        let hyper = TrainConfig {
            epochs,
            seed,
            adam: AdamConfig {
                lr,
                ..AdamConfig::default()
            },
            ..TrainConfig::default()
        };
        let train = corpus.inner.clone();
        let validation = validation.map(|v| v.inner.clone());
        let (inner, trace) = py
            .detach(|| {
                let vocab = corpus::build_vocab(&train, 1);
                let g2p = rules(&train.language);
                model::train_model(&train, validation.as_deref(), vocab, g2p, &config, &hyper)
            })
            .map_err(to_py)?;
        Ok((PyModel { inner }, trace.epochs.iter().map(|e| e.train_nll).collect()))
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        model::save_checkpoint(&self.inner, &path).map_err(to_py)
    }

    #[getter]
    fn variant(&self) -> String {
        self.inner.variant().to_string()
    }

    fn authors(&self) -> Vec<String> {
        self.inner.authors().to_vec()
    }

    fn parameter_count(&self) -> usize {
        self.inner.parameter_count()
    }

    fn vocabulary(&self) -> PyVocabulary {
        PyVocabulary {
            inner: Arc::new(self.inner.vocab().clone()),
        }
    }

    /// Generated text; `seed_line` is consumed first and not echoed.
    #[pyo3(signature = (author, seed_line = None, temperature = 1.0, max_tokens = 200, seed = 0, lines = None))]
    fn generate(
        &self,
        author: &str,
        seed_line: Option<&str>,
        temperature: f64,
        max_tokens: usize,
        seed: u64,
        lines: Option<usize>,
    ) -> PyResult<String> {
        let seed_tokens = seed_line.map(|s| {
            let mut t = corpus::preprocess(s);
            t.push(corpus::EOL.to_string());
            t
        });
        let gen = GenConfig {
            temperature,
            max_tokens,
            rng_seed: seed,
            stop_after_lines: lines,
        };
        let tokens = self
            .inner
            .generate(author, seed_tokens.as_deref(), &gen)
            .map_err(to_py)?;
        Ok(corpus::join_tokens(&tokens))
    }

    /// Mean per-token NLL in nats of `text` written by `author`.
    fn nll(&self, text: &str, author: &str) -> PyResult<f64> {
        let mut tokens = vec![BOS.to_string()];
        tokens.extend(corpus::preprocess(text));
        tokens.push(EOS.to_string());
        self.inner
            .sequence_nll_conditioned(&tokens, author, &DocRef::Absent)
            .map_err(to_py)
    }
}

#[pymodule]
#[pyo3(name = "stylm")]
fn stylm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(transcribe, m)?)?;
    m.add_function(wrap_pyfunction!(bleu, m)?)?;
    m.add_function(wrap_pyfunction!(ngram_cross_entropy, m)?)?;
    m.add_class::<PyVocabulary>()?;
    m.add_class::<PyCorpus>()?;
    m.add_class::<PyModel>()?;
    Ok(())
}
