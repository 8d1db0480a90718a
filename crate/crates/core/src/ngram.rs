//! Smoothed n-gram models and sample cross-entropy.
//!
//! Models are interpolated: every order mixes its discounted counts with the
//! next lower order, and unigrams mix with the uniform distribution over the
//! common vocabulary (every type except BOS), so every type has non-zero
//! probability. Modified Kneser-Ney is used when the count-of-counts support
//! its discount estimates; otherwise the whole model falls back to
//! Witten-Bell.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::corpus::{Vocabulary, WordSample, BOS_ID, EOS_ID};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    ModifiedKneserNey,
    WittenBell,
}

#[derive(Debug, Clone, Default)]
struct ContextStats {
    total: f64,
    n1: f64,
    n2: f64,
    n3p: f64,
    types: f64,
}

#[derive(Debug, Clone, Default)]
struct Level {
    counts: HashMap<Vec<u32>, f64>,
    contexts: HashMap<Vec<u32>, ContextStats>,
    /// Modified Kneser-Ney discounts for counts 1, 2 and 3+.
    discounts: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    vocab: Arc<Vocabulary>,
    smoothing: Smoothing,
    /// `levels[k]` holds n-grams of length `k + 1`.
    levels: Vec<Level>,
}

fn encode(vocab: &Vocabulary, text: &[String]) -> Vec<u32> {
    let mut ids = Vec::with_capacity(text.len() + 2);
    ids.push(BOS_ID);
    ids.extend(text.iter().map(|t| vocab.id(t)));
    ids.push(EOS_ID);
    ids
}

/// Modified Kneser-Ney discounts from counts-of-counts, or `None` when any of
/// `n1..n4` is zero or an estimate falls outside `[0, r]`.
fn mkn_discounts(counts: &HashMap<Vec<u32>, f64>) -> Option<[f64; 3]> {
    let mut n = [0.0f64; 5];
    for &c in counts.values() {
        let c = c as usize;
        if (1..=4).contains(&c) {
            n[c] += 1.0;
        }
    }
    if n[1..].contains(&0.0) {
        return None;
    }
    let y = n[1] / (n[1] + 2.0 * n[2]);
    let d = [
        1.0 - 2.0 * y * n[2] / n[1],
        2.0 - 3.0 * y * n[3] / n[2],
        3.0 - 4.0 * y * n[4] / n[3],
    ];
    let ok = d.iter().enumerate().all(|(i, &x)| x >= 0.0 && x <= (i + 1) as f64);
    ok.then_some(d)
}

impl NgramModel {
    /// A model with no counts: uniform over the common vocabulary.
    pub fn uniform(order: usize, vocab: Arc<Vocabulary>) -> Self {
        NgramModel {
            order: order.max(1),
            vocab,
            smoothing: Smoothing::WittenBell,
            levels: vec![Level::default(); order.max(1)],
        }
    }

    pub fn fit(texts: &[Vec<String>], order: usize, vocab: Arc<Vocabulary>) -> Result<Self> {
        if texts.is_empty() {
            return Err(Error::Insufficient("cannot fit an n-gram model on no texts".into()));
        }
        if !(1..=5).contains(&order) {
            return Err(Error::contract(format!("n-gram order must be 1..=5, got {order}")));
        }
        // Raw counts of every k-gram ending at a predicted position.
        let mut raw: Vec<HashMap<Vec<u32>, f64>> = vec![HashMap::new(); order];
        for text in texts {
            let ids = encode(&vocab, text);
            for i in 1..ids.len() {
                for k in 1..=order.min(i + 1) {
                    *raw[k - 1].entry(ids[i + 1 - k..=i].to_vec()).or_default() += 1.0;
                }
            }
        }

        // Kneser-Ney counts: lower orders use the number of distinct left
        // extensions, except n-grams starting at BOS which cannot be extended.
        let mut kn = raw.clone();
        for k in (0..order - 1).rev() {
            let mut cont: HashMap<Vec<u32>, f64> = HashMap::new();
            for gram in raw[k + 1].keys() {
                *cont.entry(gram[1..].to_vec()).or_default() += 1.0;
            }
            for (gram, c) in kn[k].iter_mut() {
                if gram[0] != BOS_ID {
                    *c = cont.get(gram).copied().unwrap_or(0.0);
                }
            }
        }
        let discounts: Option<Vec<[f64; 3]>> = kn.iter().map(mkn_discounts).collect();
        let (smoothing, counts, discounts) = match discounts {
            Some(d) => (Smoothing::ModifiedKneserNey, kn, d),
            None => (Smoothing::WittenBell, raw, vec![[0.0; 3]; order]),
        };
        let levels = counts
            .into_iter()
            .zip(discounts)
            .map(|(counts, discounts)| {
                let mut contexts: HashMap<Vec<u32>, ContextStats> = HashMap::new();
                for (gram, &c) in &counts {
                    if c <= 0.0 {
                        continue;
                    }
                    let s = contexts.entry(gram[..gram.len() - 1].to_vec()).or_default();
                    s.total += c;
                    s.types += 1.0;
                    match c as usize {
                        1 => s.n1 += 1.0,
                        2 => s.n2 += 1.0,
                        _ => s.n3p += 1.0,
                    }
                }
                Level {
                    counts,
                    contexts,
                    discounts,
                }
            })
            .collect();
        Ok(NgramModel {
            order,
            vocab,
            smoothing,
            levels,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Number of types the model predicts over (all but BOS).
    pub fn support_size(&self) -> usize {
        self.vocab.len() - 1
    }

    /// `p(word | context)`; only the last `order - 1` context ids are used.
    pub fn prob(&self, word: u32, context: &[u32]) -> f64 {
        let k = context.len().min(self.order - 1);
        self.prob_at(word, &context[context.len() - k..])
    }

    fn prob_at(&self, word: u32, ctx: &[u32]) -> f64 {
        let lower = if ctx.is_empty() {
            1.0 / self.support_size() as f64
        } else {
            self.prob_at(word, &ctx[1..])
        };
        let level = &self.levels[ctx.len()];
        let Some(stats) = level.contexts.get(ctx) else {
            return lower;
        };
        let mut gram = ctx.to_vec();
        gram.push(word);
        let c = level.counts.get(&gram).copied().unwrap_or(0.0);
        match self.smoothing {
            Smoothing::WittenBell => (c + stats.types * lower) / (stats.total + stats.types),
            Smoothing::ModifiedKneserNey => {
                let [d1, d2, d3] = level.discounts;
                let d = match c as usize {
                    0 => 0.0,
                    1 => d1,
                    2 => d2,
                    _ => d3,
                };
                let gamma = (d1 * stats.n1 + d2 * stats.n2 + d3 * stats.n3p) / stats.total;
                (c - d).max(0.0) / stats.total + gamma * lower
            }
        }
    }

    /// Full conditional distribution over vocabulary ids (BOS gets 0).
    pub fn distribution(&self, context: &[u32]) -> Vec<f64> {
        (0..self.vocab.len() as u32)
            .map(|w| if w == BOS_ID { 0.0 } else { self.prob(w, context) })
            .collect()
    }

    /// Contexts observed at the highest order.
    pub fn observed_contexts(&self) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = self.levels[self.order - 1].contexts.keys().cloned().collect();
        out.sort();
        out
    }
}

pub fn fit_ngram(texts: &[Vec<String>], order: usize, common_vocab: Arc<Vocabulary>) -> Result<NgramModel> {
    NgramModel::fit(texts, order, common_vocab)
}

/// Mean `-log2 p` per predicted token (every word plus EOS of each text),
/// i.e. `log2` of the perplexity.
pub fn ngram_cross_entropy(model: &NgramModel, texts: &[Vec<String>]) -> Result<f64> {
    if texts.is_empty() {
        return Err(Error::Insufficient("no texts to evaluate".into()));
    }
    let mut total = 0.0;
    let mut n = 0usize;
    for text in texts {
        let ids = encode(&model.vocab, text);
        for i in 1..ids.len() {
            let p = model.prob(ids[i], &ids[..i]);
            total -= p.log2();
            n += 1;
        }
    }
    let ce = total / n as f64;
    if !ce.is_finite() {
        return Err(Error::NonFinite(format!("cross-entropy is {ce}")));
    }
    Ok(ce)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleCeConfig {
    pub order: usize,
    pub words_per_sample: usize,
    /// Total samples per author, alternating between the two halves.
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for SampleCeConfig {
    fn default() -> Self {
        SampleCeConfig {
            order: 3,
            words_per_sample: 500,
            n_samples: 20,
            seed: 0,
        }
    }
}

/// Common vocabulary over every sample involved in a comparison.
pub fn common_vocabulary<'a>(samples: impl IntoIterator<Item = &'a [String]>) -> Arc<Vocabulary> {
    Arc::new(Vocabulary::from_sequences(samples, 1))
}

fn check_lengths(samples: &[&[String]], words: usize, what: &str) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Insufficient(format!("no {what} samples")));
    }
    if let Some(s) = samples.iter().find(|s| s.len() != words) {
        return Err(Error::contract(format!(
            "{what} sample has {} words, expected {words}",
            s.len()
        )));
    }
    Ok(())
}

/// Mean over (model, evaluated sample) pairs of the cross-entropy of
/// `evaluated` under models fitted on each group-0 author sample.
fn pairwise(
    author_samples: &[WordSample],
    evaluated: &[&[String]],
    cfg: &SampleCeConfig,
    vocab: Option<Arc<Vocabulary>>,
) -> Result<f64> {
    let fit_on: Vec<&[String]> = author_samples
        .iter()
        .filter(|s| s.group == 0)
        .map(|s| s.tokens.as_slice())
        .collect();
    check_lengths(&fit_on, cfg.words_per_sample, "author")?;
    check_lengths(evaluated, cfg.words_per_sample, "evaluated")?;
    let vocab = vocab.unwrap_or_else(|| {
        common_vocabulary(
            author_samples
                .iter()
                .map(|s| s.tokens.as_slice())
                .chain(evaluated.iter().copied()),
        )
    });
    let mut total = 0.0;
    let mut pairs = 0usize;
    for sample in fit_on {
        let model = NgramModel::fit(&[sample.to_vec()], cfg.order, vocab.clone())?;
        for text in evaluated {
            total += ngram_cross_entropy(&model, &[text.to_vec()])?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Sample cross-entropy of `generated` against an author: models are fitted
/// on the author's group-0 samples. `vocab` defaults to the common vocabulary
/// of all samples passed in.
pub fn sample_cross_entropy(
    author_samples: &[WordSample],
    generated: &[Vec<String>],
    cfg: &SampleCeConfig,
    vocab: Option<Arc<Vocabulary>>,
) -> Result<f64> {
    let evaluated: Vec<&[String]> = generated.iter().map(Vec::as_slice).collect();
    pairwise(author_samples, &evaluated, cfg, vocab)
}

/// The author's group-1 samples scored by the group-0 models.
pub fn self_similarity(
    author_samples: &[WordSample],
    cfg: &SampleCeConfig,
    vocab: Option<Arc<Vocabulary>>,
) -> Result<f64> {
    let held_out: Vec<&[String]> = author_samples
        .iter()
        .filter(|s| s.group == 1)
        .map(|s| s.tokens.as_slice())
        .collect();
    pairwise(author_samples, &held_out, cfg, vocab)
}

/// Rows are generator conditions (plus baselines and SELF), columns authors;
/// values in bits per token.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCeReport {
    pub authors: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl SampleCeReport {
    pub fn get(&self, row: &str, author: &str) -> Option<f64> {
        let j = self.authors.iter().position(|a| a == author)?;
        self.rows.iter().find(|(l, _)| l == row).map(|(_, v)| v[j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("model");
        for a in &self.authors {
            out.push(',');
            out.push_str(a);
        }
        out.push('\n');
        for (label, vals) in &self.rows {
            out.push_str(label);
            for v in vals {
                let _ = write!(out, ",{v:.4}");
            }
            out.push('\n');
        }
        out
    }

    /// Aligned table with the smallest value of each row marked `*` and the
    /// second smallest `**`.
    pub fn to_table(&self) -> String {
        render_table(&self.authors, &self.rows, 1, |a, b| a < b)
    }
}

/// Shared by the CE and BLEU reports: marks the best (`*`) and second best
/// (`**`) cell per row, where `better(a, b)` means `a` ranks ahead of `b`.
pub(crate) fn render_table(
    columns: &[String],
    rows: &[(String, Vec<f64>)],
    decimals: usize,
    better: impl Fn(f64, f64) -> bool,
) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|(_, vals)| {
            let mut idx: Vec<usize> = (0..vals.len()).collect();
            idx.sort_by(|&a, &b| {
                if better(vals[a], vals[b]) {
                    std::cmp::Ordering::Less
                } else if better(vals[b], vals[a]) {
                    std::cmp::Ordering::Greater
                } else {
                    a.cmp(&b)
                }
            });
            vals.iter()
                .enumerate()
                .map(|(j, v)| {
                    let mark = if vals.len() > 1 && idx[0] == j {
                        "*"
                    } else if vals.len() > 2 && idx[1] == j {
                        "**"
                    } else {
                        ""
                    };
                    format!("{v:.decimals$}{mark}")
                })
                .collect()
        })
        .collect();
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(5);
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| cells.iter().map(|r| r[j].len()).chain([c.len()]).max().unwrap_or(0))
        .collect();
    let mut out = format!("{:label_w$}", "");
    for (c, w) in columns.iter().zip(&widths) {
        let _ = write!(out, "  {c:>w$}");
    }
    out.push('\n');
    for ((label, _), row) in rows.iter().zip(&cells) {
        let _ = write!(out, "{label:label_w$}");
        for (cell, w) in row.iter().zip(&widths) {
            let _ = write!(out, "  {cell:>w$}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn vocab_of(texts: &[Vec<String>]) -> Arc<Vocabulary> {
        common_vocabulary(texts.iter().map(Vec::as_slice))
    }

    #[test]
    fn unigram_sanity() {
        let texts = vec![words("a a a")];
        let v = Arc::new(Vocabulary::from_sequences([words("a b")], 1));
        let m = NgramModel::fit(&texts, 1, v.clone()).unwrap();
        assert!(m.prob(v.id("a"), &[]) > m.prob(v.id("b"), &[]));
        let s: f64 = m.distribution(&[]).iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_empty() {
        let v = vocab_of(&[words("a")]);
        assert!(NgramModel::fit(&[], 3, v).is_err());
    }

    #[test]
    fn uses_kneser_ney_when_counts_allow() {
        // Skewed draws over a small vocabulary give every count-of-count n1..n4.
        use rand::Rng as _;
        let mut r = crate::rng::seeded(11);
        let texts: Vec<Vec<String>> = (0..200)
            .map(|_| {
                (0..12)
                    .map(|_| {
                        let x: f64 = r.gen();
                        format!("w{}", (x * x * x * 400.0) as usize)
                    })
                    .collect()
            })
            .collect();
        let v = vocab_of(&texts);
        let m = NgramModel::fit(&texts, 2, v.clone()).unwrap();
        assert_eq!(m.smoothing(), Smoothing::ModifiedKneserNey);
        for ctx in m.observed_contexts() {
            let s: f64 = m.distribution(&ctx).iter().sum();
            assert!((s - 1.0).abs() < 1e-9, "{ctx:?} sums to {s}");
        }
    }

    #[test]
    fn report_marks_two_smallest() {
        let r = SampleCeReport {
            authors: vec!["a".into(), "b".into(), "c".into()],
            rows: vec![("g".into(), vec![3.0, 1.0, 2.0])],
        };
        let t = r.to_table();
        assert!(t.contains("1.0*"), "{t}");
        assert!(t.contains("2.0**"), "{t}");
        assert!(!t.contains("3.0*"), "{t}");
    }
}
