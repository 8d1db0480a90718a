use std::collections::{BTreeMap, HashMap};

use super::{BiLstmIds, LstmIds, StylizedLM};
use crate::corpus::{Corpus, Document, EOS};
use crate::error::{Error, Result};
use crate::numerics::{softmax, Graph, Node, Tensor};

/// Which document embedding conditions a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DocRef {
    /// A document id; falls back to `Absent` if it was not a training document.
    Id(String),
    /// Mean of the author's training document embeddings (zero if none).
    Absent,
}

/// Hidden and cell vectors of the word-level LSTM for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(d: usize) -> Self {
        LstmState {
            h: vec![0.0; d],
            c: vec![0.0; d],
        }
    }
}

/// Resolved conditioning of one lane: author slot and training-document row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Cond {
    pub author: usize,
    pub doc: Option<usize>,
}

/// Output of a window: logits for every (step, lane) row, step-major, and the
/// final state.
pub(crate) struct Window {
    pub logits: Node,
    pub h: Node,
    pub c: Node,
}

/// One LSTM step given the precomputed input projection `xw = x W_x + b`.
/// Gate layout along columns: input, forget, candidate, output.
fn lstm_cell(g: &mut Graph, xw: Node, h: Node, c: Node, w_h: Node, d: usize) -> (Node, Node) {
    let hw = g.matmul(h, w_h);
    let z = g.add(xw, hw);
    let zi = g.slice_cols(z, 0, d);
    let zf = g.slice_cols(z, d, 2 * d);
    let zg = g.slice_cols(z, 2 * d, 3 * d);
    let zo = g.slice_cols(z, 3 * d, 4 * d);
    let i = g.sigmoid(zi);
    let f = g.sigmoid(zf);
    let cand = g.tanh(zg);
    let o = g.sigmoid(zo);
    let keep = g.mul(f, c);
    let write = g.mul(i, cand);
    let c_new = g.add(keep, write);
    let squashed = g.tanh(c_new);
    let h_new = g.mul(o, squashed);
    (h_new, c_new)
}

fn project(g: &mut Graph, x: Node, ids: LstmIds) -> Node {
    let w_x = g.param(ids.w_x);
    let b = g.param(ids.b);
    let xw = g.matmul(x, w_x);
    g.add_row(xw, b)
}

impl StylizedLM {
    pub(crate) fn resolve_cond(&self, author: &str, doc: &DocRef) -> Cond {
        let slot = self.author_slot(author).unwrap_or(0);
        let doc = match doc {
            DocRef::Id(id) => self.doc_row(id),
            DocRef::Absent => None,
        };
        Cond { author: slot, doc }
    }

    /// Document-embedding row used when no training document applies.
    fn mean_doc_embedding(&self, author: usize) -> Vec<f64> {
        let d = self.config.d_doc_emb;
        let mut mean = vec![0.0; d];
        let (Some(table), Some(rows)) = (self.ids.doc_emb, self.author_docs.get(author)) else {
            return mean;
        };
        if rows.is_empty() {
            return mean;
        }
        let t = self.params.get(table);
        for &r in rows {
            for (m, v) in mean.iter_mut().zip(t.row_slice(r)) {
                *m += v;
            }
        }
        let n = rows.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// `[B, d_doc_proj]` conditioning rows, or `None` for the vanilla variant.
    pub(crate) fn cond_rows(&self, g: &mut Graph, conds: &[Cond]) -> Option<Node> {
        let (author_emb, doc_emb, proj) = (self.ids.author_emb?, self.ids.doc_emb?, self.ids.doc_proj?);
        let authors: Vec<usize> = conds.iter().map(|c| c.author).collect();
        let a = g.lookup(author_emb, &authors);
        let doc_parts: Vec<Node> = conds
            .iter()
            .map(|c| match c.doc {
                Some(row) => g.lookup(doc_emb, &[row]),
                None => g.input(Tensor::row(self.mean_doc_embedding(c.author))),
            })
            .collect();
        let d = g.concat_rows(&doc_parts);
        let ad = g.concat_cols(&[a, d]);
        let p = g.param(proj);
        Some(g.matmul(ad, p))
    }

    /// Final forward and backward hidden states, `[seqs.len(), 2h]`. Empty
    /// sequences yield zeros.
    fn encode_bilstm(&self, g: &mut Graph, ids: BiLstmIds, d_bi: usize, seqs: &[Vec<usize>]) -> Node {
        let h = d_bi / 2;
        let mut by_len: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, s) in seqs.iter().enumerate() {
            by_len.entry(s.len()).or_default().push(i);
        }
        let mut blocks = Vec::new();
        let mut order = Vec::with_capacity(seqs.len());
        for (&len, members) in &by_len {
            let n = members.len();
            order.extend_from_slice(members);
            if len == 0 {
                blocks.push(g.input(Tensor::zeros(&[n, d_bi])));
                continue;
            }
            let mut finals = Vec::with_capacity(2);
            for (dir, reverse) in [(ids.fwd, false), (ids.bwd, true)] {
                let w_h = g.param(dir.w_h);
                let mut hs = g.input(Tensor::zeros(&[n, h]));
                let mut cs = g.input(Tensor::zeros(&[n, h]));
                for step in 0..len {
                    let pos = if reverse { len - 1 - step } else { step };
                    let sym: Vec<usize> = members.iter().map(|&m| seqs[m][pos]).collect();
                    let x = g.lookup(ids.emb, &sym);
                    let xw = project(g, x, dir);
                    (hs, cs) = lstm_cell(g, xw, hs, cs, w_h, h);
                }
                finals.push(hs);
            }
            blocks.push(g.concat_cols(&finals));
        }
        let stacked = g.concat_rows(&blocks);
        // stacked row k holds sequence order[k]; invert.
        let mut inverse = vec![0; seqs.len()];
        for (k, &i) in order.iter().enumerate() {
            inverse[i] = k;
        }
        g.gather(stacked, &inverse)
    }

    /// LSTM input rows for `words`, each paired with a lane index into `cond`.
    pub(crate) fn input_rows(&self, g: &mut Graph, words: &[&str], lanes: &[usize], cond: Option<Node>) -> Node {
        let word_ids: Vec<usize> = words.iter().map(|w| self.vocab().id(w) as usize).collect();
        let mut parts = vec![g.lookup(self.ids.word_emb.expect("word table"), &word_ids)];
        if let (Some(chars), Some(phons)) = (self.ids.char, self.ids.phon) {
            let mut unique: HashMap<&str, usize> = HashMap::new();
            let mut distinct = Vec::new();
            let slots: Vec<usize> = words
                .iter()
                .map(|w| {
                    *unique.entry(w).or_insert_with(|| {
                        distinct.push(*w);
                        distinct.len() - 1
                    })
                })
                .collect();
            let char_seqs: Vec<Vec<usize>> = distinct.iter().map(|w| self.char_ids(w)).collect();
            let phon_seqs: Vec<Vec<usize>> = distinct.iter().map(|w| self.phoneme_ids(w)).collect();
            let ce = self.encode_bilstm(g, chars, self.config.d_char_bi, &char_seqs);
            let pe = self.encode_bilstm(g, phons, self.config.d_phon_bi, &phon_seqs);
            parts.push(g.gather(ce, &slots));
            parts.push(g.gather(pe, &slots));
        }
        if let Some(cond) = cond {
            parts.push(g.gather(cond, lanes));
        }
        g.concat_cols(&parts)
    }

    /// Runs `steps.len()` LSTM steps over `B` lanes. `steps[t][b]` is the
    /// input word of lane `b` at step `t`.
    pub(crate) fn forward_window(
        &self,
        g: &mut Graph,
        steps: &[Vec<&str>],
        conds: &[Cond],
        h0: Tensor,
        c0: Tensor,
    ) -> Window {
        let b = conds.len();
        let d = self.config.d_state;
        let lstm = self.ids.lstm.expect("lstm params");
        let cond = self.cond_rows(g, conds);
        let words: Vec<&str> = steps.iter().flat_map(|s| s.iter().copied()).collect();
        let lanes: Vec<usize> = (0..steps.len()).flat_map(|_| 0..b).collect();
        let x = self.input_rows(g, &words, &lanes, cond);
        let xw = project(g, x, lstm);
        let w_h = g.param(lstm.w_h);
        let mut h = g.input(h0);
        let mut c = g.input(c0);
        let mut hs = Vec::with_capacity(steps.len());
        for t in 0..steps.len() {
            let xt = g.slice_rows(xw, t * b, (t + 1) * b);
            (h, c) = lstm_cell(g, xt, h, c, w_h, d);
            hs.push(h);
        }
        let all_h = g.concat_rows(&hs);
        let out_w = g.param(self.ids.out_w.expect("output weights"));
        let out_b = g.param(self.ids.out_b.expect("output bias"));
        let z = g.matmul(all_h, out_w);
        let logits = g.add_row(z, out_b);
        Window { logits, h, c }
    }

    /// Teacher-forced loss over positions `start..start + len` of each lane:
    /// the input at position `t` predicts token `t + 1`. Returns the window
    /// and the loss node plus the number of scored positions.
    pub(crate) fn window_loss(
        &self,
        g: &mut Graph,
        lanes: &[(&[String], Cond)],
        start: usize,
        len: usize,
        h0: Tensor,
        c0: Tensor,
    ) -> (Window, Node, usize) {
        let mut steps = Vec::with_capacity(len);
        let mut targets = Vec::with_capacity(len * lanes.len());
        let mut weights = Vec::with_capacity(len * lanes.len());
        for t in start..start + len {
            let mut row = Vec::with_capacity(lanes.len());
            for (tokens, _) in lanes {
                if t + 1 < tokens.len() {
                    row.push(tokens[t].as_str());
                    targets.push(self.vocab().id(&tokens[t + 1]) as usize);
                    weights.push(1.0);
                } else {
                    row.push(EOS);
                    targets.push(0);
                    weights.push(0.0);
                }
            }
            steps.push(row);
        }
        let conds: Vec<Cond> = lanes.iter().map(|(_, c)| *c).collect();
        let window = self.forward_window(g, &steps, &conds, h0, c0);
        let loss = g.softmax_cross_entropy(window.logits, &targets, &weights);
        let count = weights.iter().filter(|&&w| w > 0.0).count();
        (window, loss, count)
    }

    /// The input representation of a single word under the given conditioning.
    pub fn compose_word_embedding(&self, word: &str, author: &str, doc: &DocRef) -> Vec<f64> {
        let mut g = Graph::new(&self.params);
        let cond = self.resolve_cond(author, doc);
        let rows = self.cond_rows(&mut g, &[cond]);
        let x = self.input_rows(&mut g, &[word], &[0], rows);
        g.value(x).data().to_vec()
    }

    /// One step of the word-level LSTM on a precomposed input vector.
    pub fn lstm_step(&self, state: &LstmState, input: &[f64]) -> Result<(LstmState, Vec<f64>)> {
        let d = self.config.d_state;
        if input.len() != self.config.input_width() {
            return Err(Error::Shape(format!(
                "LSTM input has width {}, model expects {}",
                input.len(),
                self.config.input_width()
            )));
        }
        if state.h.len() != d || state.c.len() != d {
            return Err(Error::Shape(format!("LSTM state must have width {d}")));
        }
        let lstm = self.ids.lstm.expect("lstm params");
        let mut g = Graph::new(&self.params);
        let x = g.input(Tensor::row(input.to_vec()));
        let xw = project(&mut g, x, lstm);
        let w_h = g.param(lstm.w_h);
        let h = g.input(Tensor::row(state.h.clone()));
        let c = g.input(Tensor::row(state.c.clone()));
        let (h, c) = lstm_cell(&mut g, xw, h, c, w_h, d);
        let out_w = g.param(self.ids.out_w.expect("output weights"));
        let out_b = g.param(self.ids.out_b.expect("output bias"));
        let z = g.matmul(h, out_w);
        let logits = g.add_row(z, out_b);
        Ok((
            LstmState {
                h: g.value(h).data().to_vec(),
                c: g.value(c).data().to_vec(),
            },
            g.value(logits).data().to_vec(),
        ))
    }

    /// Mean per-token negative log-likelihood (nats) of `tokens` (which must
    /// start with BOS and end with EOS) under the given conditioning.
    pub fn sequence_nll_conditioned(&self, tokens: &[String], author: &str, doc: &DocRef) -> Result<f64> {
        if tokens.len() < 2 {
            return Err(Error::contract("sequence needs at least BOS and EOS"));
        }
        let cond = self.resolve_cond(author, doc);
        let d = self.config.d_state;
        let mut g = Graph::new(&self.params);
        let (_, loss, _) = self.window_loss(
            &mut g,
            &[(tokens, cond)],
            0,
            tokens.len() - 1,
            Tensor::zeros(&[1, d]),
            Tensor::zeros(&[1, d]),
        );
        let v = g.scalar(loss);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("sequence NLL is {v}")));
        }
        Ok(v)
    }

    /// Mean per-token NLL of a document conditioned on its own author and id.
    pub fn sequence_nll(&self, doc: &Document) -> Result<f64> {
        self.sequence_nll_conditioned(&doc.tokens, &doc.author_id, &DocRef::Id(doc.id.clone()))
    }

    /// Token-weighted mean NLL over a corpus, optionally overriding the author
    /// condition. Documents are conditioned on their own id when it belongs to
    /// the training set.
    pub fn corpus_nll(&self, corpus: &Corpus, author_override: Option<&str>) -> Result<f64> {
        let d = self.config.d_state;
        let mut total = 0.0;
        let mut count = 0usize;
        for chunk in corpus.documents.chunks(16) {
            let lanes: Vec<(&[String], Cond)> = chunk
                .iter()
                .map(|doc| {
                    let author = author_override.unwrap_or(&doc.author_id);
                    (
                        doc.tokens.as_slice(),
                        self.resolve_cond(author, &DocRef::Id(doc.id.clone())),
                    )
                })
                .collect();
            let len = lanes.iter().map(|(t, _)| t.len().saturating_sub(1)).max().unwrap_or(0);
            if len == 0 {
                continue;
            }
            let b = lanes.len();
            let mut g = Graph::new(&self.params);
            let (_, loss, n) = self.window_loss(&mut g, &lanes, 0, len, Tensor::zeros(&[b, d]), Tensor::zeros(&[b, d]));
            total += g.scalar(loss) * n as f64;
            count += n;
        }
        if count == 0 {
            return Err(Error::contract("corpus has no scorable tokens"));
        }
        let v = total / count as f64;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("corpus NLL is {v}")));
        }
        Ok(v)
    }

    /// Next-token distribution after consuming `context` (starting with BOS).
    pub fn next_token_distribution(&self, context: &[String], author: &str, doc: &DocRef) -> Result<Vec<f64>> {
        if context.is_empty() {
            return Err(Error::contract("context must contain at least BOS"));
        }
        let d = self.config.d_state;
        let cond = self.resolve_cond(author, doc);
        let steps: Vec<Vec<&str>> = context.iter().map(|w| vec![w.as_str()]).collect();
        let mut g = Graph::new(&self.params);
        let w = self.forward_window(&mut g, &steps, &[cond], Tensor::zeros(&[1, d]), Tensor::zeros(&[1, d]));
        let logits = g.value(w.logits);
        softmax(logits.row_slice(logits.rows() - 1))
    }
}
