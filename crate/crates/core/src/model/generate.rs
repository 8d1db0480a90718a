use rand::Rng as _;

use super::forward::{Cond, DocRef};
use super::StylizedLM;
use crate::corpus::{BOS, BOS_ID, EOL, EOS_ID};
use crate::error::{Error, Result};
use crate::numerics::{softmax, Graph, Tensor};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    /// 0 selects the argmax (lowest id on ties).
    pub temperature: f64,
    /// Cap on sampled tokens, EOS included.
    pub max_tokens: usize,
    pub rng_seed: u64,
    /// Stop once this many line breaks have been sampled.
    pub stop_after_lines: Option<usize>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            temperature: 1.0,
            max_tokens: 200,
            rng_seed: 0,
            stop_after_lines: None,
        }
    }
}

/// Incremental decoder over a single sequence.
struct Stepper<'m> {
    model: &'m StylizedLM,
    cond: Cond,
    h: Tensor,
    c: Tensor,
}

impl<'m> Stepper<'m> {
    fn new(model: &'m StylizedLM, cond: Cond) -> Self {
        let d = model.config.d_state;
        Stepper {
            model,
            cond,
            h: Tensor::zeros(&[1, d]),
            c: Tensor::zeros(&[1, d]),
        }
    }

    /// Feeds `word` and returns the logits for the next token.
    fn step(&mut self, word: &str) -> Vec<f64> {
        let mut g = Graph::new(&self.model.params);
        let h = std::mem::replace(&mut self.h, Tensor::zeros(&[0, 0]));
        let c = std::mem::replace(&mut self.c, Tensor::zeros(&[0, 0]));
        let w = self.model.forward_window(&mut g, &[vec![word]], &[self.cond], h, c);
        self.h = g.value(w.h).clone();
        self.c = g.value(w.c).clone();
        g.value(w.logits).data().to_vec()
    }
}

fn pick(logits: &[f64], temperature: f64, rng: &mut rng::Rng) -> Result<usize> {
    let mut logits = logits.to_vec();
    // BOS is never a valid continuation.
    logits[BOS_ID as usize] = f64::NEG_INFINITY;
    if temperature == 0.0 {
        let mut best = 0;
        for (i, &v) in logits.iter().enumerate() {
            if v > logits[best] {
                best = i;
            }
        }
        return Ok(best);
    }
    let scaled: Vec<f64> = logits.iter().map(|&v| v / temperature).collect();
    let probs = softmax(&scaled)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(probs.iter().rposition(|&p| p > 0.0).unwrap_or(0))
}

impl StylizedLM {
    /// Samples a continuation conditioned on `author`. Decoding starts from
    /// BOS, consumes `seed_line` (not echoed in the output), then samples until
    /// EOS, `max_tokens`, or `stop_after_lines` line breaks. EOS is not
    /// included in the output. Unknown authors fall back to the UNK slot with
    /// a warning.
    pub fn generate(&self, author: &str, seed_line: Option<&[String]>, gen: &GenConfig) -> Result<Vec<String>> {
        if gen.temperature.is_nan() || gen.temperature < 0.0 || gen.temperature.is_infinite() {
            return Err(Error::contract(format!(
                "temperature must be >= 0, got {}",
                gen.temperature
            )));
        }
        if self.author_slot(author).is_none() && self.config.variant.has_conditioning() {
            log::warn!("unknown author {author:?}; conditioning on the unknown-author embedding");
        }
        let cond = self.resolve_cond(author, &DocRef::Absent);
        let mut stepper = Stepper::new(self, cond);
        let mut logits = stepper.step(BOS);
        for word in seed_line.unwrap_or_default() {
            logits = stepper.step(word);
        }
        let mut rng = rng::seeded(gen.rng_seed);
        let mut out = Vec::new();
        let mut lines = 0;
        for _ in 0..gen.max_tokens {
            let id = pick(&logits, gen.temperature, &mut rng)? as u32;
            if id == EOS_ID {
                break;
            }
            let token = self.vocab().token(id).to_string();
            if token == EOL {
                lines += 1;
            }
            out.push(token);
            if gen.stop_after_lines.is_some_and(|n| lines >= n) {
                break;
            }
            logits = stepper.step(out.last().unwrap());
        }
        Ok(out)
    }
}
