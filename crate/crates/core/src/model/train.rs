use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::forward::{Cond, DocRef};
use super::{build_variant, Lexicon, ModelConfig, StylizedLM};
use crate::corpus::{Corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::numerics::{grad_check, optimizer_step, AdamConfig, AdamState, GradCheckReport, Graph, ParamStore, Tensor};
use crate::phonetics::G2PRuleSet;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Truncated backpropagation window, in tokens.
    pub bptt: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 16,
            bptt: 64,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub steps: usize,
    /// Token-weighted mean of the per-window training losses (nats/token).
    pub train_nll: f64,
    pub validation_nll: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochStats>,
}

impl TrainTrace {
    pub fn last(&self) -> Option<&EpochStats> {
        self.epochs.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,steps,train_nll,validation_nll\n");
        for e in &self.epochs {
            let val = e.validation_nll.map(|v| format!("{v:.6}")).unwrap_or_default();
            out.push_str(&format!("{},{},{:.6},{}\n", e.epoch, e.steps, e.train_nll, val));
        }
        out
    }
}

impl StylizedLM {
    /// Teacher-forced minibatch training with truncated BPTT. Each epoch
    /// shuffles the documents, packs `batch_size` of them into parallel lanes
    /// and takes one Adam step per `bptt`-token window, carrying the LSTM
    /// state (detached) across windows.
    pub fn train(&mut self, corpus: &Corpus, validation: Option<&Corpus>, hyper: &TrainConfig) -> Result<TrainTrace> {
        if corpus.is_empty() {
            return Err(Error::Insufficient("training corpus is empty".into()));
        }
        if hyper.batch_size == 0 || hyper.bptt == 0 {
            return Err(Error::Config("batch_size and bptt must be positive".into()));
        }
        let d = self.config.d_state;
        let mut state = AdamState::new(&self.params);
        let conds: Vec<Cond> = corpus
            .documents
            .iter()
            .map(|doc| self.resolve_cond(&doc.author_id, &DocRef::Id(doc.id.clone())))
            .collect();
        let mut trace = TrainTrace::default();
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        for epoch in 0..hyper.epochs {
            order.shuffle(&mut rng::seeded(rng::substream(hyper.seed, epoch as u64)));
            let mut total = 0.0;
            let mut count = 0usize;
            let mut steps = 0usize;
            for batch in order.chunks(hyper.batch_size) {
                let lanes: Vec<(&[String], Cond)> = batch
                    .iter()
                    .map(|&i| (corpus.documents[i].tokens.as_slice(), conds[i]))
                    .collect();
                let b = lanes.len();
                let len = lanes.iter().map(|(t, _)| t.len().saturating_sub(1)).max().unwrap_or(0);
                let mut h = Tensor::zeros(&[b, d]);
                let mut c = Tensor::zeros(&[b, d]);
                let mut start = 0;
                while start < len {
                    let w = hyper.bptt.min(len - start);
                    let (grads, loss, n, h_next, c_next) = {
                        let mut g = Graph::new(&self.params);
                        let (window, loss, n) = self.window_loss(&mut g, &lanes, start, w, h, c);
                        let value = g.scalar(loss);
                        if !value.is_finite() {
                            return Err(Error::NonFinite(format!(
                                "training loss is {value} at epoch {epoch}, step {steps}"
                            )));
                        }
                        let grads = g.backward(loss)?;
                        (grads, value, n, g.value(window.h).clone(), g.value(window.c).clone())
                    };
                    optimizer_step(&mut self.params, &grads, &mut state, &hyper.adam)?;
                    total += loss * n as f64;
                    count += n;
                    steps += 1;
                    h = h_next;
                    c = c_next;
                    start += w;
                }
            }
            let validation_nll = match validation {
                Some(v) if !v.is_empty() => Some(self.corpus_nll(v, None)?),
                _ => None,
            };
            let stats = EpochStats {
                epoch: epoch + 1,
                steps,
                train_nll: if count > 0 { total / count as f64 } else { 0.0 },
                validation_nll,
            };
            log::info!(
                "epoch {} steps {} train {:.4} validation {}",
                stats.epoch,
                stats.steps,
                stats.train_nll,
                stats
                    .validation_nll
                    .map(|v| format!("{v:.4}"))
                    .unwrap_or_else(|| "-".into())
            );
            trace.epochs.push(stats);
        }
        Ok(trace)
    }
}

impl StylizedLM {
    /// Finite-difference check of the teacher-forced loss over `corpus`,
    /// every document in one lane of a single window.
    pub fn gradient_check(&mut self, corpus: &Corpus, eps: f64) -> Result<GradCheckReport> {
        if corpus.is_empty() {
            return Err(Error::Insufficient("gradient check needs at least one document".into()));
        }
        let conds: Vec<Cond> = corpus
            .documents
            .iter()
            .map(|doc| self.resolve_cond(&doc.author_id, &DocRef::Id(doc.id.clone())))
            .collect();
        let lanes: Vec<(&[String], Cond)> = corpus
            .documents
            .iter()
            .zip(&conds)
            .map(|(doc, &c)| (doc.tokens.as_slice(), c))
            .collect();
        let len = lanes.iter().map(|(t, _)| t.len() - 1).max().unwrap_or(0);
        let shape = [lanes.len(), self.config.d_state];
        let mut params = std::mem::replace(&mut self.params, ParamStore::new());
        let this = &*self;
        let report = grad_check(&mut params, eps, |g| {
            let (_, loss, _) = this.window_loss(g, &lanes, 0, len, Tensor::zeros(&shape), Tensor::zeros(&shape));
            Ok(loss)
        });
        self.params = params;
        report
    }
}

/// Builds a model for `corpus` (documents become the trainable document
/// embeddings) and trains it.
pub fn train_model(
    corpus: &Corpus,
    validation: Option<&Corpus>,
    vocab: Vocabulary,
    g2p: G2PRuleSet,
    config: &ModelConfig,
    hyper: &TrainConfig,
) -> Result<(StylizedLM, TrainTrace)> {
    if corpus.is_empty() {
        return Err(Error::Insufficient("training corpus is empty".into()));
    }
    let lexicon = Lexicon::from_corpus(corpus, vocab, g2p);
    let mut model = build_variant(config, lexicon, hyper.seed)?;
    let trace = model.train(corpus, validation, hyper)?;
    Ok((model, trace))
}
