use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BleuMode {
    /// Counts aggregated over all hypotheses before taking the mean.
    #[default]
    Corpus,
    /// Mean of per-hypothesis scores with add-epsilon precisions.
    Sentence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BleuConfig {
    pub max_n: usize,
    pub epsilon: f64,
    pub mode: BleuMode,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig {
            max_n: 4,
            epsilon: 1e-9,
            mode: BleuMode::Corpus,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Stats {
    matches: Vec<f64>,
    totals: Vec<f64>,
    hyp_len: f64,
    ref_len: f64,
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    out
}

fn sentence_stats<S: AsRef<str>>(hyp: &[S], refs: &[Vec<S>], max_n: usize) -> Stats {
    let mut s = Stats {
        matches: vec![0.0; max_n],
        totals: vec![0.0; max_n],
        hyp_len: hyp.len() as f64,
        ref_len: 0.0,
    };
    for n in 1..=max_n {
        let hyp_counts = ngram_counts(hyp, n);
        let mut max_ref: HashMap<Vec<&str>, usize> = HashMap::new();
        for r in refs {
            for (gram, c) in ngram_counts(r, n) {
                let e = max_ref.entry(gram).or_insert(0);
                *e = (*e).max(c);
            }
        }
        for (gram, c) in hyp_counts {
            s.matches[n - 1] += c.min(max_ref.get(&gram).copied().unwrap_or(0)) as f64;
            s.totals[n - 1] += c as f64;
        }
    }
    // Closest reference length, the shorter one on ties.
    s.ref_len = refs
        .iter()
        .map(|r| r.len())
        .min_by_key(|&l| (l.abs_diff(hyp.len()), l))
        .unwrap_or(0) as f64;
    s
}

/// Orders with no hypothesis n-grams are left out of the geometric mean, so
/// a hypothesis shorter than `max_n` can still reach 100.
fn score(s: &Stats, epsilon: Option<f64>) -> f64 {
    if s.hyp_len == 0.0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for (&m, &t) in s.matches.iter().zip(&s.totals) {
        if t == 0.0 {
            continue;
        }
        let p = match epsilon {
            Some(eps) => (m + eps) / (t + eps),
            None => m / t,
        };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
        orders += 1;
    }
    let bp = if s.hyp_len >= s.ref_len {
        1.0
    } else {
        (1.0 - s.ref_len / s.hyp_len).exp()
    };
    (100.0 * bp * (log_sum / orders as f64).exp()).clamp(0.0, 100.0)
}

/// BLEU as a percentage in `[0, 100]`.
pub fn bleu<S: AsRef<str>>(hypotheses: &[Vec<S>], references: &[Vec<Vec<S>>], cfg: &BleuConfig) -> Result<f64> {
    if hypotheses.is_empty() {
        return Err(Error::Insufficient("BLEU needs at least one hypothesis".into()));
    }
    if hypotheses.len() != references.len() {
        return Err(Error::contract(format!(
            "{} hypotheses but {} reference sets",
            hypotheses.len(),
            references.len()
        )));
    }
    if cfg.max_n == 0 || cfg.epsilon.is_nan() || cfg.epsilon <= 0.0 {
        return Err(Error::Config("BLEU needs max_n >= 1 and epsilon > 0".into()));
    }
    if let Some(i) = references.iter().position(Vec::is_empty) {
        return Err(Error::contract(format!("hypothesis {i} has no references")));
    }
    match cfg.mode {
        BleuMode::Corpus => {
            let mut total = Stats {
                matches: vec![0.0; cfg.max_n],
                totals: vec![0.0; cfg.max_n],
                ..Default::default()
            };
            for (h, r) in hypotheses.iter().zip(references) {
                let s = sentence_stats(h, r, cfg.max_n);
                for n in 0..cfg.max_n {
                    total.matches[n] += s.matches[n];
                    total.totals[n] += s.totals[n];
                }
                total.hyp_len += s.hyp_len;
                total.ref_len += s.ref_len;
            }
            Ok(score(&total, None))
        }
        BleuMode::Sentence => {
            let sum: f64 = hypotheses
                .iter()
                .zip(references)
                .map(|(h, r)| score(&sentence_stats(h, r, cfg.max_n), Some(cfg.epsilon)))
                .sum();
            Ok(sum / hypotheses.len() as f64)
        }
    }
}
