use rand::seq::SliceRandom;

use super::bleu::{bleu, BleuConfig};
use super::generator::TextGenerator;
use crate::corpus::{Corpus, Document, EOL};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContinuationConfig {
    /// Evaluate at most this many quatrains, chosen at random; all when `None`.
    pub max_items: Option<usize>,
    pub seed: u64,
    pub bleu: BleuConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationResult {
    /// Corpus BLEU percentage.
    pub bleu: f64,
    pub items: usize,
    pub seed: u64,
}

/// Documents with at least four lines, paired with their first four lines.
pub fn quatrains(corpus: &Corpus) -> Vec<(&Document, Vec<&[String]>)> {
    corpus
        .documents
        .iter()
        .filter_map(|d| {
            let lines = d.lines();
            (lines.len() >= 4).then(|| (d, lines[..4].to_vec()))
        })
        .collect()
}

/// Seeds the generator with the first line of each quatrain (plus a line
/// break), lets it write three more lines under the document's author, and
/// scores the result against the human lines 2-4 in one corpus BLEU.
pub fn continuation_bleu_eval(
    generator: &dyn TextGenerator,
    validation: &Corpus,
    cfg: &ContinuationConfig,
) -> Result<ContinuationResult> {
    let eligible = quatrains(validation);
    if eligible.is_empty() {
        return Err(Error::Insufficient("no documents with at least four lines".into()));
    }
    let mut chosen: Vec<usize> = (0..eligible.len()).collect();
    if let Some(k) = cfg.max_items {
        if k < chosen.len() {
            chosen.shuffle(&mut rng::seeded(cfg.seed));
            chosen.truncate(k);
            chosen.sort_unstable();
        }
    }
    let mut hyps = Vec::with_capacity(chosen.len());
    let mut refs = Vec::with_capacity(chosen.len());
    for &i in &chosen {
        let (doc, lines) = &eligible[i];
        let mut seed_line = lines[0].to_vec();
        seed_line.push(EOL.to_string());
        let out = generator.continue_lines(&doc.author_id, &seed_line, 3, rng::substream(cfg.seed, i as u64))?;
        hyps.push(out.into_iter().filter(|t| t != EOL).collect::<Vec<_>>());
        refs.push(vec![lines[1..4].concat()]);
    }
    Ok(ContinuationResult {
        bleu: bleu(&hyps, &refs, &cfg.bleu)?,
        items: chosen.len(),
        seed: cfg.seed,
    })
}
