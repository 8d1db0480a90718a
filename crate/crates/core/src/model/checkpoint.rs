//! Checkpoint layout:
//!
//! ```text
//! "STYLM" | 0x01 | u32 LE header length | UTF-8 JSON header | f64 LE payloads
//! ```
//!
//! The header carries the config, the vocabulary and its SHA-256, the other
//! symbol tables, and one `name:RxC:f64` record per tensor in payload order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Lexicon, ModelConfig, StylizedLM};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::numerics::{ParamStore, Tensor};
use crate::phonetics::G2PRuleSet;

pub const CHECKPOINT_MAGIC: &[u8; 5] = b"STYLM";
pub const CHECKPOINT_VERSION: u8 = 1;

const PREFIX_LEN: usize = CHECKPOINT_MAGIC.len() + 1 + 4;

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    vocab_hash: String,
    vocab: Vec<String>,
    vocab_freq: Vec<u64>,
    chars: Vec<char>,
    g2p_rules: String,
    authors: Vec<String>,
    documents: Vec<(String, usize)>,
    tensors: Vec<String>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

impl StylizedLM {
    pub fn to_bytes(&self) -> Vec<u8> {
        let lex = &self.lexicon;
        let header = Header {
            config: self.config.clone(),
            vocab_hash: lex.vocab.content_hash(),
            vocab: lex.vocab.tokens().to_vec(),
            vocab_freq: lex.vocab.frequencies().to_vec(),
            chars: lex.chars.clone(),
            g2p_rules: lex.g2p.source().to_string(),
            authors: lex.authors.clone(),
            documents: lex.documents.clone(),
            tensors: self
                .params
                .iter()
                .map(|(_, name, t)| format!("{name}:{}x{}:f64", t.rows(), t.cols()))
                .collect(),
        };
        let header = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(PREFIX_LEN + header.len() + self.params.total_size() * 8);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.push(CHECKPOINT_VERSION);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for (_, _, t) in self.params.iter() {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < PREFIX_LEN || &bytes[..5] != CHECKPOINT_MAGIC {
            return Err(bad("bad magic"));
        }
        if bytes[5] != CHECKPOINT_VERSION {
            return Err(bad(format!("unsupported version {}", bytes[5])));
        }
        let hlen = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let body = bytes
            .get(PREFIX_LEN..PREFIX_LEN + hlen)
            .ok_or_else(|| bad("truncated header"))?;
        let header: Header = serde_json::from_slice(body).map_err(|e| bad(format!("header: {e}")))?;

        let vocab = Vocabulary::from_parts(header.vocab, header.vocab_freq)?;
        if vocab.content_hash() != header.vocab_hash {
            return Err(bad("vocabulary hash mismatch"));
        }
        let mut shapes = Vec::with_capacity(header.tensors.len());
        for record in &header.tensors {
            let mut parts = record.split(':');
            let (Some(name), Some(shape), Some(dtype), None) = (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(bad(format!("malformed tensor record {record:?}")));
            };
            if dtype != "f64" {
                return Err(bad(format!("unsupported dtype {dtype:?}")));
            }
            let (r, c) = shape
                .split_once('x')
                .and_then(|(r, c)| Some((r.parse::<usize>().ok()?, c.parse::<usize>().ok()?)))
                .ok_or_else(|| bad(format!("malformed shape in {record:?}")))?;
            shapes.push((name.to_string(), r, c));
        }
        let payload = &bytes[PREFIX_LEN + hlen..];
        let expected: usize = shapes.iter().map(|(_, r, c)| r * c * 8).sum();
        if payload.len() != expected {
            return Err(bad(format!(
                "payload is {} bytes, header describes {expected}",
                payload.len()
            )));
        }
        let mut params = ParamStore::new();
        let mut offset = 0;
        for (name, r, c) in shapes {
            let n = r * c;
            let data = payload[offset..offset + n * 8]
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
            offset += n * 8;
            params.insert(name, Tensor::matrix(r, c, data)?)?;
        }
        let g2p = G2PRuleSet::parse(&header.g2p_rules, "checkpoint rules")?;
        let lexicon = Lexicon {
            vocab,
            chars: header.chars,
            g2p,
            authors: header.authors,
            documents: header.documents,
        };
        StylizedLM::from_parts(header.config, params, lexicon)
    }
}

pub fn save_checkpoint(model: &StylizedLM, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<StylizedLM> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    StylizedLM::from_bytes(&bytes)
}
