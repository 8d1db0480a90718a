//! Author-conditioned LSTM language model.
//!
//! Each input word is represented by the concatenation of
//!
//! 1. a word-table row (the UNK row for out-of-vocabulary words),
//! 2. the final forward/backward states of a character BiLSTM over its letters,
//! 3. the same for a phoneme BiLSTM over its transcription,
//! 4. a linear projection of `[author embedding; document embedding]`,
//!
//! and fed to a single LSTM whose state is projected to vocabulary logits. The
//! `author_only` variant drops blocks 2 and 3 and the `vanilla` variant also
//! drops block 4; both widen the word table so the LSTM input width is the
//! same for all three.

mod checkpoint;
mod forward;
mod generate;
mod train;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, Corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::numerics::{ParamId, ParamStore, Tensor};
use crate::phonetics::G2PRuleSet;
use crate::rng;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use forward::{DocRef, LstmState};
pub use generate::GenConfig;
pub use train::{train_model, EpochStats, TrainConfig, TrainTrace};

/// Author slot used for authors the model has not seen.
pub const UNK_AUTHOR: &str = "<unk-author>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Full,
    AuthorOnly,
    Vanilla,
}

impl Variant {
    pub fn has_subword(self) -> bool {
        self == Variant::Full
    }

    pub fn has_conditioning(self) -> bool {
        self != Variant::Vanilla
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::AuthorOnly => "author_only",
            Variant::Vanilla => "vanilla",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "author_only" | "author-only" => Ok(Variant::AuthorOnly),
            "vanilla" => Ok(Variant::Vanilla),
            other => Err(Error::Config(format!("unknown model variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_word: usize,
    /// Character BiLSTM output, split evenly between the two directions.
    pub d_char_bi: usize,
    /// Phoneme BiLSTM output, split evenly between the two directions.
    pub d_phon_bi: usize,
    pub d_doc_proj: usize,
    pub d_state: usize,
    pub d_author_emb: usize,
    pub d_doc_emb: usize,
    pub d_char_emb: usize,
    pub d_phon_emb: usize,
    /// Filled in from the lexicon when the model is built.
    pub vocab_size: usize,
    /// Known authors, excluding the UNK slot. Filled in from the lexicon.
    pub author_count: usize,
    pub variant: Variant,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d_word: 384,
            d_char_bi: 128,
            d_phon_bi: 128,
            d_doc_proj: 512,
            d_state: 512,
            d_author_emb: 64,
            d_doc_emb: 64,
            d_char_emb: 16,
            d_phon_emb: 16,
            vocab_size: 0,
            author_count: 0,
            variant: Variant::Full,
        }
    }
}

impl ModelConfig {
    /// Width of the LSTM input, identical across variants.
    pub fn input_width(&self) -> usize {
        self.d_word + self.d_char_bi + self.d_phon_bi + self.d_doc_proj
    }

    /// Width of the word table for this variant.
    pub fn word_table_width(&self) -> usize {
        match self.variant {
            Variant::Full => self.d_word,
            Variant::AuthorOnly => self.d_word + self.d_char_bi + self.d_phon_bi,
            Variant::Vanilla => self.input_width(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("d_word", self.d_word),
            ("d_char_bi", self.d_char_bi),
            ("d_phon_bi", self.d_phon_bi),
            ("d_doc_proj", self.d_doc_proj),
            ("d_state", self.d_state),
            ("d_author_emb", self.d_author_emb),
            ("d_doc_emb", self.d_doc_emb),
            ("d_char_emb", self.d_char_emb),
            ("d_phon_emb", self.d_phon_emb),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !self.d_char_bi.is_multiple_of(2) || !self.d_phon_bi.is_multiple_of(2) {
            return Err(Error::Config("BiLSTM widths must be even (split per direction)".into()));
        }
        if self.vocab_size < corpus::SPECIALS.len() {
            return Err(Error::Config(format!(
                "vocab_size {} is below the special-token count",
                self.vocab_size
            )));
        }
        Ok(())
    }
}

/// Symbol tables a model needs besides its weights.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub vocab: Vocabulary,
    /// Index 0 is the UNK character.
    pub chars: Vec<char>,
    pub g2p: G2PRuleSet,
    /// Index 0 is [`UNK_AUTHOR`].
    pub authors: Vec<String>,
    /// Training documents as `(id, author index)`; row `i` of the document table.
    pub documents: Vec<(String, usize)>,
}

impl Lexicon {
    /// Builds tables from a training corpus.
    pub fn from_corpus(corpus: &Corpus, vocab: Vocabulary, g2p: G2PRuleSet) -> Self {
        let mut chars: Vec<char> = vocab
            .tokens()
            .iter()
            .filter(|t| !corpus::is_special(t))
            .flat_map(|t| t.chars())
            .collect();
        chars.sort_unstable();
        chars.dedup();
        chars.insert(0, '\u{0}');
        let mut authors = vec![UNK_AUTHOR.to_string()];
        authors.extend(corpus.author_ids());
        let author_index: HashMap<&str, usize> = authors.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let documents = corpus
            .documents
            .iter()
            .map(|d| (d.id.clone(), author_index[d.author_id.as_str()]))
            .collect();
        Lexicon {
            vocab,
            chars,
            g2p,
            authors,
            documents,
        }
    }
}

/// Ids of every parameter tensor; `None` for blocks a variant omits.
#[derive(Debug, Clone, Default)]
pub(crate) struct ParamIds {
    pub word_emb: Option<ParamId>,
    pub char: Option<BiLstmIds>,
    pub phon: Option<BiLstmIds>,
    pub author_emb: Option<ParamId>,
    pub doc_emb: Option<ParamId>,
    pub doc_proj: Option<ParamId>,
    pub lstm: Option<LstmIds>,
    pub out_w: Option<ParamId>,
    pub out_b: Option<ParamId>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LstmIds {
    pub w_x: ParamId,
    pub w_h: ParamId,
    pub b: ParamId,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BiLstmIds {
    pub emb: ParamId,
    pub fwd: LstmIds,
    pub bwd: LstmIds,
}

impl ParamIds {
    fn resolve(params: &ParamStore, variant: Variant) -> Result<Self> {
        let need = |name: &str| {
            params
                .id(name)
                .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name:?}")))
        };
        let lstm = |prefix: &str| -> Result<LstmIds> {
            Ok(LstmIds {
                w_x: need(&format!("{prefix}.w_x"))?,
                w_h: need(&format!("{prefix}.w_h"))?,
                b: need(&format!("{prefix}.b"))?,
            })
        };
        let bi = |prefix: &str| -> Result<BiLstmIds> {
            Ok(BiLstmIds {
                emb: need(&format!("{prefix}_emb"))?,
                fwd: lstm(&format!("{prefix}_fwd"))?,
                bwd: lstm(&format!("{prefix}_bwd"))?,
            })
        };
        let mut ids = ParamIds {
            word_emb: Some(need("word_emb")?),
            lstm: Some(lstm("lstm")?),
            out_w: Some(need("out.w")?),
            out_b: Some(need("out.b")?),
            ..ParamIds::default()
        };
        if variant.has_subword() {
            ids.char = Some(bi("char")?);
            ids.phon = Some(bi("phon")?);
        }
        if variant.has_conditioning() {
            ids.author_emb = Some(need("author_emb")?);
            ids.doc_emb = Some(need("doc_emb")?);
            ids.doc_proj = Some(need("doc_proj")?);
        }
        Ok(ids)
    }
}

/// Parameter shapes for a variant, in registration order. Biases are `1 x n`
/// rows.
pub fn parameter_shapes(
    config: &ModelConfig,
    n_chars: usize,
    n_phonemes: usize,
    n_docs: usize,
) -> Vec<(String, [usize; 2])> {
    let mut shapes = Vec::new();
    let mut push = |name: &str, r: usize, c: usize| shapes.push((name.to_string(), [r, c]));
    push("word_emb", config.vocab_size, config.word_table_width());
    if config.variant.has_subword() {
        for (prefix, n_sym, d_emb, d_bi) in [
            ("char", n_chars, config.d_char_emb, config.d_char_bi),
            ("phon", n_phonemes, config.d_phon_emb, config.d_phon_bi),
        ] {
            let h = d_bi / 2;
            push(&format!("{prefix}_emb"), n_sym, d_emb);
            for dir in ["fwd", "bwd"] {
                push(&format!("{prefix}_{dir}.w_x"), d_emb, 4 * h);
                push(&format!("{prefix}_{dir}.w_h"), h, 4 * h);
                push(&format!("{prefix}_{dir}.b"), 1, 4 * h);
            }
        }
    }
    if config.variant.has_conditioning() {
        push("author_emb", config.author_count + 1, config.d_author_emb);
        push("doc_emb", n_docs, config.d_doc_emb);
        push("doc_proj", config.d_author_emb + config.d_doc_emb, config.d_doc_proj);
    }
    let h = config.d_state;
    push("lstm.w_x", config.input_width(), 4 * h);
    push("lstm.w_h", h, 4 * h);
    push("lstm.b", 1, 4 * h);
    push("out.w", h, config.vocab_size);
    push("out.b", 1, config.vocab_size);
    shapes
}

#[derive(Debug, Clone)]
pub struct StylizedLM {
    pub(crate) config: ModelConfig,
    pub(crate) params: ParamStore,
    pub(crate) ids: ParamIds,
    pub(crate) lexicon: Lexicon,
    char_index: HashMap<char, usize>,
    phon_index: HashMap<String, usize>,
    author_index: HashMap<String, usize>,
    doc_index: HashMap<String, usize>,
    /// Training-document rows per author index.
    author_docs: Vec<Vec<usize>>,
}

/// Builds a freshly initialised model. Matrices are drawn uniformly from
/// `[-a, a]` with `a = sqrt(6 / (rows + cols))`; biases start at zero.
pub fn build_variant(config: &ModelConfig, lexicon: Lexicon, seed: u64) -> Result<StylizedLM> {
    let mut config = config.clone();
    config.vocab_size = lexicon.vocab.len();
    config.author_count = lexicon.authors.len() - 1;
    config.validate()?;
    let mut rng = rng::seeded(seed);
    let mut params = ParamStore::new();
    let shapes = parameter_shapes(
        &config,
        lexicon.chars.len(),
        lexicon.g2p.symbols().len(),
        lexicon.documents.len(),
    );
    for (name, [r, c]) in shapes {
        let t = if r == 1 && name.ends_with(".b") {
            Tensor::zeros(&[r, c])
        } else {
            let a = (6.0 / (r + c) as f64).sqrt();
            let data = (0..r * c).map(|_| rng.gen_range(-a..=a)).collect();
            Tensor::matrix(r, c, data)?
        };
        params.insert(name, t)?;
    }
    StylizedLM::from_parts(config, params, lexicon)
}

impl StylizedLM {
    pub(crate) fn from_parts(config: ModelConfig, params: ParamStore, lexicon: Lexicon) -> Result<Self> {
        config.validate()?;
        let expected = parameter_shapes(
            &config,
            lexicon.chars.len(),
            lexicon.g2p.symbols().len(),
            lexicon.documents.len(),
        );
        if expected.len() != params.len() {
            return Err(Error::Shape(format!(
                "{} variant expects {} tensors, got {}",
                config.variant,
                expected.len(),
                params.len()
            )));
        }
        for (name, [r, c]) in &expected {
            let t = params
                .by_name(name)
                .ok_or_else(|| Error::Shape(format!("missing tensor {name}")))?;
            if t.shape() != [*r, *c] {
                return Err(Error::Shape(format!(
                    "tensor {name} has shape {:?}, expected [{r}, {c}]",
                    t.shape()
                )));
            }
        }
        let ids = ParamIds::resolve(&params, config.variant)?;
        let char_index = lexicon.chars.iter().enumerate().skip(1).map(|(i, &c)| (c, i)).collect();
        let phon_index = lexicon
            .g2p
            .symbols()
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        let author_index = lexicon
            .authors
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let doc_index = lexicon
            .documents
            .iter()
            .enumerate()
            .map(|(i, (d, _))| (d.clone(), i))
            .collect();
        let mut author_docs = vec![Vec::new(); lexicon.authors.len()];
        for (row, (_, a)) in lexicon.documents.iter().enumerate() {
            author_docs
                .get_mut(*a)
                .ok_or_else(|| Error::contract(format!("document author index {a} out of range")))?
                .push(row);
        }
        Ok(StylizedLM {
            config,
            params,
            ids,
            lexicon,
            char_index,
            phon_index,
            author_index,
            doc_index,
            author_docs,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.lexicon.vocab
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    /// Author names known to the model (without the UNK slot).
    pub fn authors(&self) -> &[String] {
        &self.lexicon.authors[1..]
    }

    pub fn parameter_count(&self) -> usize {
        self.params.total_size()
    }

    /// Author slot for `author`, or 0 (UNK) when unknown.
    pub fn author_slot(&self, author: &str) -> Option<usize> {
        self.author_index.get(author).copied().filter(|&i| i != 0)
    }

    pub(crate) fn doc_row(&self, doc_id: &str) -> Option<usize> {
        self.doc_index.get(doc_id).copied()
    }

    pub(crate) fn char_ids(&self, word: &str) -> Vec<usize> {
        if corpus::is_special(word) {
            return Vec::new();
        }
        word.chars()
            .map(|c| self.char_index.get(&c).copied().unwrap_or(0))
            .collect()
    }

    pub(crate) fn phoneme_ids(&self, word: &str) -> Vec<usize> {
        if corpus::is_special(word) {
            return Vec::new();
        }
        self.lexicon
            .g2p
            .transcribe(word)
            .symbols()
            .iter()
            .map(|s| self.phon_index.get(s).copied().unwrap_or(0))
            .collect()
    }

    /// Sets every parameter to zero.
    pub fn zero_parameters(&mut self) {
        let ids: Vec<_> = self.params.ids().collect();
        for id in ids {
            self.params.get_mut(id).data_mut().fill(0.0);
        }
    }
}
