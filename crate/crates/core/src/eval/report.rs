use std::fmt::Write as _;

use super::continuation::{continuation_bleu_eval, ContinuationConfig};
use super::generator::TextGenerator;
use crate::corpus::{sample_word_windows, Corpus, WordSample};
use crate::error::{Error, Result};
use crate::ngram::{
    common_vocabulary, render_table, sample_cross_entropy, self_similarity, SampleCeConfig, SampleCeReport,
};
use crate::rng;

/// Column label for the mixed-author validation set.
pub const MIXED: &str = "mixed";

/// Row label for the self-similarity row of the sample cross-entropy matrix.
pub const SELF_ROW: &str = "SELF";

/// A row label with one value per column.
pub type LabelledRow = (String, Vec<f64>);

/// How a report cell was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    pub items: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    /// BLEU percentages, one per column.
    pub values: Vec<f64>,
    pub provenance: Vec<Provenance>,
}

/// Continuation BLEU of a corpus-wide model conditioned on one author versus
/// a model trained only on that author.
#[derive(Debug, Clone, PartialEq)]
pub struct StylizationComparison {
    pub author: String,
    pub single_author_own: f64,
    pub single_author_mixed: f64,
    pub full_corpus_own: f64,
    pub full_corpus_mixed: f64,
}

fn gain(new: f64, old: f64) -> f64 {
    if old == 0.0 {
        if new == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        100.0 * (new / old - 1.0)
    }
}

impl StylizationComparison {
    /// Relative improvement of the corpus-wide model on the author's own
    /// validation documents, in percent.
    pub fn own_gain(&self) -> f64 {
        gain(self.full_corpus_own, self.single_author_own)
    }

    /// Relative improvement on the mixed-author validation set, in percent.
    pub fn mixed_gain(&self) -> f64 {
        gain(self.full_corpus_mixed, self.single_author_mixed)
    }

    pub fn to_table(&self) -> String {
        format!(
            "{:<12}  {:>10}  {:>10}\nG(S)          {:>10.2}  {:>10.2}\nG(C|S)        {:>10.2}  {:>10.2}\ngain %        {:>10.1}  {:>10.1}\n",
            format!("[{}]", self.author),
            self.author,
            MIXED,
            self.single_author_own,
            self.single_author_mixed,
            self.full_corpus_own,
            self.full_corpus_mixed,
            self.own_gain(),
            self.mixed_gain(),
        )
    }
}

pub fn compare_stylization(
    single_author: &dyn TextGenerator,
    full_corpus: &dyn TextGenerator,
    validation: &Corpus,
    author: &str,
    cfg: &ContinuationConfig,
) -> Result<StylizationComparison> {
    let own = validation.restrict_to_author(author)?;
    let run = |g: &dyn TextGenerator, c: &Corpus| continuation_bleu_eval(g, c, cfg).map(|r| r.bleu);
    Ok(StylizationComparison {
        author: author.to_string(),
        single_author_own: run(single_author, &own)?,
        single_author_mixed: run(single_author, validation)?,
        full_corpus_own: run(full_corpus, &own)?,
        full_corpus_mixed: run(full_corpus, validation)?,
    })
}

/// Sample cross-entropy matrix: one row per (conditioned generator, author)
/// or per unconditioned generator, then the SELF row; one column per author.
/// All cells share a common vocabulary built over every sample involved.
pub fn sample_ce_matrix(
    generators: &[&dyn TextGenerator],
    corpus: &Corpus,
    authors: &[String],
    cfg: &SampleCeConfig,
) -> Result<SampleCeReport> {
    if authors.is_empty() {
        return Err(Error::Insufficient("no authors to evaluate".into()));
    }
    let author_samples: Vec<Vec<WordSample>> = authors
        .iter()
        .enumerate()
        .map(|(j, a)| {
            sample_word_windows(
                corpus,
                a,
                cfg.words_per_sample,
                cfg.n_samples,
                rng::substream(cfg.seed, j as u64),
            )
        })
        .collect::<Result<_>>()?;
    let n_generated = (cfg.n_samples / 2).max(1);
    let mut generated: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    for g in generators {
        let conditions: Vec<Option<&String>> = if g.is_conditioned() {
            authors.iter().map(Some).collect()
        } else {
            vec![None]
        };
        for author in conditions {
            let row = generated.len() as u64;
            let label = match author {
                Some(a) => format!("{} ({a})", g.label()),
                None => g.label().to_string(),
            };
            let stream = rng::substream(cfg.seed ^ 0x5eed_0000, row);
            let samples = (0..n_generated)
                .map(|k| {
                    g.sample_words(
                        author.map_or("", String::as_str),
                        cfg.words_per_sample,
                        rng::substream(stream, k as u64),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            generated.push((label, samples));
        }
    }
    let vocab = common_vocabulary(
        author_samples
            .iter()
            .flatten()
            .map(|s| s.tokens.as_slice())
            .chain(generated.iter().flat_map(|(_, s)| s.iter().map(Vec::as_slice))),
    );
    let mut rows = Vec::with_capacity(generated.len() + 1);
    for (label, samples) in &generated {
        let vals = author_samples
            .iter()
            .map(|a| sample_cross_entropy(a, samples, cfg, Some(vocab.clone())))
            .collect::<Result<Vec<_>>>()?;
        rows.push((label.clone(), vals));
    }
    let selfs = author_samples
        .iter()
        .map(|a| self_similarity(a, cfg, Some(vocab.clone())))
        .collect::<Result<Vec<_>>>()?;
    rows.push((SELF_ROW.to_string(), selfs));
    Ok(SampleCeReport {
        authors: authors.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSpec {
    /// Index into the generator list of the single-author model.
    pub single_author: usize,
    /// Index of the corpus-wide model.
    pub full_corpus: usize,
    pub author: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportConfig {
    pub continuation: ContinuationConfig,
    /// Adds a column scored on the whole validation set.
    pub include_mixed: bool,
    pub sample_ce: Option<SampleCeConfig>,
    pub comparison: Option<ComparisonSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub sample_ce: Option<SampleCeReport>,
    pub comparison: Option<StylizationComparison>,
}

impl EvalReport {
    pub fn get(&self, row: &str, column: &str) -> Option<f64> {
        let j = self.columns.iter().position(|c| c == column)?;
        self.rows.iter().find(|r| r.label == row).map(|r| r.values[j])
    }

    /// Header of column labels, then one row per model, percentages with two
    /// decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model");
        for c in &self.columns {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.label);
            for v in &r.values {
                let _ = write!(out, ",{v:.2}");
            }
            out.push('\n');
        }
        out
    }

    /// Table with the best (`*`) and second best (`**`) score per row.
    pub fn to_table(&self) -> String {
        let rows: Vec<(String, Vec<f64>)> = self.rows.iter().map(|r| (r.label.clone(), r.values.clone())).collect();
        render_table(&self.columns, &rows, 2, |a, b| a > b)
    }
}

/// Parses a report CSV back into column labels and rows.
pub fn parse_report_csv(text: &str) -> Result<(Vec<String>, Vec<LabelledRow>)> {
    let perr = |line: usize, message: String| Error::Parse {
        file: "report".into(),
        line,
        message,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| perr(1, "empty report".into()))?;
    let columns: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let label = cells.next().unwrap_or_default().to_string();
        let values = cells
            .map(|c| c.parse::<f64>().map_err(|e| perr(i + 2, format!("{c:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != columns.len() {
            return Err(perr(
                i + 2,
                format!("{} values for {} columns", values.len(), columns.len()),
            ));
        }
        rows.push((label, values));
    }
    Ok((columns, rows))
}

/// Continuation BLEU for every generator on each author's validation
/// documents (and optionally the mixed set), plus the optional sample
/// cross-entropy matrix over `corpus` and the G(S)/G(C|S) comparison.
pub fn build_report(
    generators: &[&dyn TextGenerator],
    corpus: &Corpus,
    validation: &Corpus,
    authors: &[String],
    cfg: &ReportConfig,
) -> Result<EvalReport> {
    for a in authors {
        if corpus.author_documents(a).is_empty() {
            return Err(Error::contract(format!("author {a:?} is not in the corpus")));
        }
    }
    let mut splits: Vec<(String, Corpus)> = authors
        .iter()
        .map(|a| Ok((a.clone(), validation.restrict_to_author(a)?)))
        .collect::<Result<_>>()?;
    if cfg.include_mixed {
        splits.push((MIXED.to_string(), validation.clone()));
    }
    let mut rows = Vec::with_capacity(generators.len());
    for g in generators {
        let mut values = Vec::with_capacity(splits.len());
        let mut provenance = Vec::with_capacity(splits.len());
        for (_, split) in &splits {
            let r = continuation_bleu_eval(*g, split, &cfg.continuation)?;
            values.push(r.bleu);
            provenance.push(Provenance {
                seed: r.seed,
                items: r.items,
            });
        }
        rows.push(ReportRow {
            label: g.label().to_string(),
            values,
            provenance,
        });
    }
    let sample_ce = match &cfg.sample_ce {
        Some(ce) => Some(sample_ce_matrix(generators, corpus, authors, ce)?),
        None => None,
    };
    let comparison = match &cfg.comparison {
        Some(spec) => {
            let pick = |i: usize| {
                generators
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::contract(format!("comparison refers to generator {i}")))
            };
            Some(compare_stylization(
                pick(spec.single_author)?,
                pick(spec.full_corpus)?,
                validation,
                &spec.author,
                &cfg.continuation,
            )?)
        }
        None => None,
    };
    Ok(EvalReport {
        columns: splits.into_iter().map(|(c, _)| c).collect(),
        rows,
        sample_ce,
        comparison,
    })
}
