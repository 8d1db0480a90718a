use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, Uniform, WeightedIndex};

use crate::corpus::{Corpus, Vocabulary, EOL};
use crate::error::{Error, Result};
use crate::model::{GenConfig, StylizedLM};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMode {
    Uniform,
    Weighted,
}

impl fmt::Display for BaselineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineMode::Uniform => "uniform",
            BaselineMode::Weighted => "weighted",
        })
    }
}

impl FromStr for BaselineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(BaselineMode::Uniform),
            "weighted" => Ok(BaselineMode::Weighted),
            other => Err(Error::Config(format!(
                "unknown baseline {other:?} (expected uniform or weighted)"
            ))),
        }
    }
}

/// Draws `n_tokens` non-special types, uniformly or in proportion to their
/// corpus frequency.
pub fn random_baseline_text(vocab: &Vocabulary, mode: BaselineMode, n_tokens: usize, seed: u64) -> Result<Vec<String>> {
    if n_tokens == 0 {
        return Err(Error::contract("baseline length must be positive"));
    }
    let ids: Vec<u32> = (0..vocab.len() as u32).filter(|&i| !vocab.is_special_id(i)).collect();
    if ids.is_empty() {
        return Err(Error::Insufficient("vocabulary has no non-special types".into()));
    }
    let mut rng = rng::seeded(seed);
    let picks: Vec<usize> = match mode {
        BaselineMode::Uniform => {
            let dist = Uniform::new(0, ids.len());
            (0..n_tokens).map(|_| dist.sample(&mut rng)).collect()
        }
        BaselineMode::Weighted => {
            let dist = WeightedIndex::new(ids.iter().map(|&i| vocab.freq(i)))
                .map_err(|e| Error::Insufficient(format!("cannot weight vocabulary: {e}")))?;
            (0..n_tokens).map(|_| dist.sample(&mut rng)).collect()
        }
    };
    Ok(picks.into_iter().map(|p| vocab.token(ids[p]).to_string()).collect())
}

/// Anything that can continue a seed line and produce word samples for a
/// given author: trained models and random baselines.
pub trait TextGenerator {
    fn label(&self) -> &str;

    /// Whether output depends on the requested author.
    fn is_conditioned(&self) -> bool;

    /// Tokens following `seed_line` up to and including the `lines`-th EOL
    /// (or fewer if generation ends early).
    fn continue_lines(&self, author: &str, seed_line: &[String], lines: usize, seed: u64) -> Result<Vec<String>>;

    /// Exactly `n_words` words (EOL excluded).
    fn sample_words(&self, author: &str, n_words: usize, seed: u64) -> Result<Vec<String>>;
}

pub struct ModelGenerator<'m> {
    pub label: String,
    pub model: &'m StylizedLM,
    /// `rng_seed` and `stop_after_lines` are overridden per call.
    pub gen: GenConfig,
}

impl<'m> ModelGenerator<'m> {
    pub fn new(label: impl Into<String>, model: &'m StylizedLM, gen: GenConfig) -> Self {
        ModelGenerator {
            label: label.into(),
            model,
            gen,
        }
    }
}

impl TextGenerator for ModelGenerator<'_> {
    fn label(&self) -> &str {
        &self.label
    }

    fn is_conditioned(&self) -> bool {
        self.model.variant().has_conditioning()
    }

    fn continue_lines(&self, author: &str, seed_line: &[String], lines: usize, seed: u64) -> Result<Vec<String>> {
        let gen = GenConfig {
            rng_seed: seed,
            stop_after_lines: Some(lines),
            ..self.gen.clone()
        };
        self.model.generate(author, Some(seed_line), &gen)
    }

    fn sample_words(&self, author: &str, n_words: usize, seed: u64) -> Result<Vec<String>> {
        let mut out = Vec::with_capacity(n_words);
        let mut barren = 0;
        let mut k = 0u64;
        while out.len() < n_words {
            let gen = GenConfig {
                rng_seed: rng::substream(seed, k),
                stop_after_lines: None,
                ..self.gen.clone()
            };
            k += 1;
            let before = out.len();
            let text = self.model.generate(author, None, &gen)?;
            out.extend(text.into_iter().filter(|t| t != EOL).take(n_words - before));
            if out.len() == before {
                barren += 1;
                if barren >= 16 {
                    return Err(Error::Insufficient(format!(
                        "{} produced no words for author {author:?}",
                        self.label
                    )));
                }
            }
        }
        Ok(out)
    }
}

pub struct RandomBaseline {
    pub label: String,
    pub vocab: Vocabulary,
    pub mode: BaselineMode,
    /// Words per generated line.
    pub line_len: usize,
}

impl RandomBaseline {
    /// Line length is the mean line length of `corpus` (at least 1).
    pub fn for_corpus(mode: BaselineMode, vocab: Vocabulary, corpus: &Corpus) -> Self {
        let (words, lines) = corpus
            .documents
            .iter()
            .flat_map(|d| d.lines())
            .fold((0, 0), |(w, l), line| (w + line.len(), l + 1));
        let line_len = if lines == 0 {
            1
        } else {
            (words as f64 / lines as f64).round().max(1.0) as usize
        };
        let label = match mode {
            BaselineMode::Uniform => "Uniform Random",
            BaselineMode::Weighted => "Weighted Random",
        };
        RandomBaseline {
            label: label.into(),
            vocab,
            mode,
            line_len,
        }
    }
}

impl TextGenerator for RandomBaseline {
    fn label(&self) -> &str {
        &self.label
    }

    fn is_conditioned(&self) -> bool {
        false
    }

    fn continue_lines(&self, _author: &str, _seed_line: &[String], lines: usize, seed: u64) -> Result<Vec<String>> {
        let words = random_baseline_text(&self.vocab, self.mode, self.line_len * lines.max(1), seed)?;
        let mut out = Vec::with_capacity(words.len() + lines);
        for line in words.chunks(self.line_len).take(lines) {
            out.extend_from_slice(line);
            out.push(EOL.to_string());
        }
        Ok(out)
    }

    fn sample_words(&self, _author: &str, n_words: usize, seed: u64) -> Result<Vec<String>> {
        random_baseline_text(&self.vocab, self.mode, n_words, seed)
    }
}
