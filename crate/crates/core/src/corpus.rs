//! Corpus ingestion and normalisation.
//!
//! Raw text is lowercased and stripped of punctuation; line breaks survive as
//! an explicit [`EOL`] token so that line-oriented evaluation (quatrains) can
//! recover them. Every document is wrapped in [`BOS`]/[`EOS`] sentinels.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng;

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const EOL: &str = "<eol>";

pub const UNK_ID: u32 = 0;
pub const BOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;
pub const EOL_ID: u32 = 3;

pub const SPECIALS: [&str; 4] = [UNK, BOS, EOS, EOL];

pub fn is_special(token: &str) -> bool {
    SPECIALS.contains(&token)
}

/// Lowercases, deletes punctuation and splits on whitespace. Punctuation acts
/// as a separator, so `don't` becomes `don t`. Each `\n` becomes [`EOL`].
pub fn preprocess(raw: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, tokens: &mut Vec<String>| {
        if !word.is_empty() {
            tokens.push(std::mem::take(word));
        }
    };
    for ch in raw.chars() {
        if ch == '\n' {
            flush(&mut word, &mut tokens);
            tokens.push(EOL.to_string());
        } else if ch.is_alphanumeric() {
            // Lowercasing can yield combining marks (e.g. U+0130); those are
            // dropped so the output is a fixed point of this function.
            word.extend(ch.to_lowercase().filter(|c| c.is_alphanumeric()));
        } else {
            flush(&mut word, &mut tokens);
        }
    }
    flush(&mut word, &mut tokens);
    tokens
}

pub fn preprocess_bytes(raw: &[u8]) -> Result<Vec<String>> {
    let text = String::from_utf8(raw.to_vec())?;
    Ok(preprocess(&text))
}

/// Renders tokens back to text: words separated by spaces, [`EOL`] as `\n`.
/// Other sentinels are skipped.
pub fn join_tokens<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for token in tokens {
        let token = token.as_ref();
        if token == EOL {
            out.push('\n');
        } else if token == BOS || token == EOS {
            continue;
        } else {
            if !out.is_empty() && !out.ends_with('\n') {
                out.push(' ');
            }
            out.push_str(token);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub author_id: String,
    pub language: String,
    pub raw_text: String,
    /// Preprocessed tokens, starting with [`BOS`] and ending with [`EOS`].
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        author_id: impl Into<String>,
        language: impl Into<String>,
        raw_text: impl Into<String>,
    ) -> Self {
        let raw_text = raw_text.into();
        let mut tokens = Vec::new();
        tokens.push(BOS.to_string());
        tokens.extend(preprocess(&raw_text));
        tokens.push(EOS.to_string());
        Document {
            id: id.into(),
            author_id: author_id.into(),
            language: language.into(),
            raw_text,
            tokens,
        }
    }

    /// Tokens between the sentinels (line breaks included).
    pub fn body(&self) -> &[String] {
        &self.tokens[1..self.tokens.len() - 1]
    }

    /// Word count excluding sentinels and line breaks.
    pub fn word_count(&self) -> usize {
        self.body().iter().filter(|t| *t != EOL).count()
    }

    pub fn words(&self) -> impl Iterator<Item = &String> {
        self.body().iter().filter(|t| *t != EOL)
    }

    /// Non-empty lines, split on [`EOL`].
    pub fn lines(&self) -> Vec<&[String]> {
        self.body()
            .split(|t| t == EOL)
            .filter(|line| !line.is_empty())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    /// author id -> indices into `documents`, in document order.
    pub authors: BTreeMap<String, Vec<usize>>,
    pub language: String,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut authors: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, doc) in documents.iter().enumerate() {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::contract(format!("duplicate document id {:?}", doc.id)));
            }
            authors.entry(doc.author_id.clone()).or_default().push(i);
        }
        let langs: HashSet<&str> = documents.iter().map(|d| d.language.as_str()).collect();
        let language = match langs.len() {
            0 => String::new(),
            1 => langs.into_iter().next().unwrap().to_string(),
            _ => "mixed".to_string(),
        };
        Ok(Corpus {
            documents,
            authors,
            language,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn author_ids(&self) -> Vec<String> {
        self.authors.keys().cloned().collect()
    }

    pub fn author_documents(&self, author_id: &str) -> Vec<&Document> {
        self.authors
            .get(author_id)
            .map(|idx| idx.iter().map(|&i| &self.documents[i]).collect())
            .unwrap_or_default()
    }

    /// Subset of documents written by the given author.
    pub fn restrict_to_author(&self, author_id: &str) -> Result<Corpus> {
        Corpus::new(self.author_documents(author_id).into_iter().cloned().collect())
    }

    /// SHA-256 over ids, authors and raw text, for run provenance.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for doc in &self.documents {
            for field in [&doc.id, &doc.author_id, &doc.language, &doc.raw_text] {
                hasher.update((field.len() as u64).to_le_bytes());
                hasher.update(field.as_bytes());
            }
        }
        hex(&hasher.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One JSON object per line with `id`, `author`, `lang`, `text`.
    JsonLines,
    /// Binary cache written by [`write_cache`].
    Cache,
}

impl CorpusFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("stycc") => CorpusFormat::Cache,
            _ => CorpusFormat::JsonLines,
        }
    }
}

pub fn ingest(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::JsonLines => read_jsonl(BufReader::new(file), &path.display().to_string()),
        CorpusFormat::Cache => read_cache(BufReader::new(file), path),
    }
}

pub fn read_jsonl(reader: impl BufRead, name: &str) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in reader.split(b'\n').enumerate() {
        let lineno = i + 1;
        let parse_err = |message: String| Error::Parse {
            file: name.to_string(),
            line: lineno,
            message,
        };
        let line = line.map_err(|e| Error::io(name, e))?;
        let line = String::from_utf8(line).map_err(|e| parse_err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let field = |key: &str| -> Result<String> {
            match value.get(key) {
                Some(serde_json::Value::String(s)) => Ok(s.clone()),
                Some(_) => Err(parse_err(format!("field {key:?} is not a string"))),
                None => Err(parse_err(format!("missing field {key:?}"))),
            }
        };
        let id = field("id")?;
        let author = field("author")?;
        let lang = field("lang")?;
        let text = field("text")?;
        if let Some(first) = seen.insert(id.clone(), lineno) {
            return Err(parse_err(format!("duplicate id {id:?} (first seen on line {first})")));
        }
        documents.push(Document::new(id, author, lang, text));
    }
    Corpus::new(documents)
}

const CACHE_MAGIC: &[u8; 6] = b"STYCC\x01";

/// Writes the preprocessed corpus as magic bytes followed by a JSON payload.
pub fn write_cache(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    let payload = serde_json::to_vec(corpus).map_err(|e| Error::contract(e.to_string()))?;
    file.write_all(CACHE_MAGIC)
        .and_then(|_| file.write_all(&payload))
        .map_err(|e| Error::io(path, e))
}

fn read_cache(mut reader: impl Read, path: &Path) -> Result<Corpus> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if !bytes.starts_with(CACHE_MAGIC) {
        return Err(Error::Parse {
            file: path.display().to_string(),
            line: 1,
            message: "not a corpus cache (bad magic)".into(),
        });
    }
    let corpus: Corpus = serde_json::from_slice(&bytes[CACHE_MAGIC.len()..]).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        line: 1,
        message: e.to_string(),
    })?;
    // Re-validate rather than trusting the serialized index.
    Corpus::new(corpus.documents)
}

/// Token <-> id bijection. Ids 0..4 are the specials in [`SPECIALS`] order;
/// the rest follow by descending frequency, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    freq: Vec<u64>,
}

impl Vocabulary {
    pub fn from_sequences<I, S>(sequences: I, min_count: u64) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[String]>,
    {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        let sequences: Vec<S> = sequences.into_iter().collect();
        for seq in &sequences {
            for tok in seq.as_ref() {
                *counts.entry(tok.as_str()).or_default() += 1;
            }
        }
        let mut freq = vec![0u64; SPECIALS.len()];
        for (i, special) in SPECIALS.iter().enumerate() {
            freq[i] = counts.get(special).copied().unwrap_or(0);
        }
        let mut kept: Vec<(&str, u64)> = Vec::new();
        for (&tok, &count) in &counts {
            if is_special(tok) {
                continue;
            }
            if count >= min_count {
                kept.push((tok, count));
            } else {
                freq[UNK_ID as usize] += count;
            }
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let mut tokens: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        for (tok, count) in kept {
            tokens.push(tok.to_string());
            freq.push(count);
        }
        Self::from_parts(tokens, freq).expect("constructed vocabulary is a bijection")
    }

    /// Rebuilds a vocabulary from its id-ordered tokens, e.g. from a checkpoint.
    pub fn from_parts(tokens: Vec<String>, freq: Vec<u64>) -> Result<Self> {
        if tokens.len() != freq.len() {
            return Err(Error::contract("vocabulary token/frequency length mismatch"));
        }
        if tokens.len() < SPECIALS.len() || tokens[..SPECIALS.len()] != SPECIALS {
            return Err(Error::contract("vocabulary must start with the special tokens"));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if index.insert(tok.clone(), i as u32).is_some() {
                return Err(Error::contract(format!("duplicate vocabulary token {tok:?}")));
            }
        }
        Ok(Vocabulary { tokens, index, freq })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Id of `token`, [`UNK_ID`] when absent.
    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn freq(&self, id: u32) -> u64 {
        self.freq[id as usize]
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.freq
    }

    pub fn is_special_id(&self, id: u32) -> bool {
        (id as usize) < SPECIALS.len()
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter().map(|&i| self.token(i).to_string()).collect()
    }

    /// SHA-256 of the id-ordered token list.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for tok in &self.tokens {
            hasher.update(tok.as_bytes());
            hasher.update(b"\n");
        }
        hex(&hasher.finalize())
    }
}

pub fn build_vocab(corpus: &Corpus, min_count: u64) -> Vocabulary {
    Vocabulary::from_sequences(corpus.documents.iter().map(|d| d.tokens.as_slice()), min_count)
}

/// Splits into (train, validation), stratified per author. Authors with a
/// single document are pooled and split together.
pub fn split_corpus(corpus: &Corpus, validation_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
        return Err(Error::contract(format!(
            "validation fraction must lie in (0, 1), got {validation_fraction}"
        )));
    }
    if corpus.len() < 2 {
        return Err(Error::Insufficient(format!(
            "cannot split a corpus of {} document(s)",
            corpus.len()
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut strata: Vec<Vec<usize>> = Vec::new();
    let mut singles = Vec::new();
    for docs in corpus.authors.values() {
        if docs.len() >= 2 {
            strata.push(docs.clone());
        } else {
            singles.extend_from_slice(docs);
        }
    }
    if !singles.is_empty() {
        strata.push(singles);
    }
    let mut validation = vec![false; corpus.len()];
    for mut stratum in strata {
        stratum.shuffle(&mut rng);
        let n = stratum.len();
        let mut n_val = (validation_fraction * n as f64).round() as usize;
        if n >= 2 {
            n_val = n_val.clamp(1, n - 1);
        }
        for &i in &stratum[..n_val] {
            validation[i] = true;
        }
    }
    let pick = |want: bool| {
        corpus
            .documents
            .iter()
            .zip(&validation)
            .filter(|(_, &v)| v == want)
            .map(|(d, _)| d.clone())
            .collect::<Vec<_>>()
    };
    Ok((Corpus::new(pick(false))?, Corpus::new(pick(true))?))
}

/// A fixed-length run of words drawn from one half of an author's documents.
#[derive(Debug, Clone, PartialEq)]
pub struct WordSample {
    /// Which random half of the author's documents (0 or 1) it came from.
    pub group: u8,
    pub doc_ids: Vec<String>,
    pub tokens: Vec<String>,
}

/// Draws `n_samples` windows of exactly `words_per_sample` words. The author's
/// documents are shuffled and halved; sample `i` comes from group `i % 2`.
/// Within a group whole documents are taken round-robin until the budget is
/// met, the last one truncated, so every sample spans a similar number of
/// distinct documents.
pub fn sample_word_windows(
    corpus: &Corpus,
    author_id: &str,
    words_per_sample: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<WordSample>> {
    let docs = corpus.author_documents(author_id);
    if docs.is_empty() {
        return Err(Error::contract(format!("unknown author {author_id:?}")));
    }
    if words_per_sample == 0 {
        return Err(Error::contract("words_per_sample must be positive"));
    }
    let available: usize = docs.iter().map(|d| d.word_count()).sum();
    if available < words_per_sample {
        return Err(Error::Insufficient(format!(
            "author {author_id:?} has {available} words, {words_per_sample} needed per sample"
        )));
    }
    let mut order: Vec<&Document> = docs;
    order.shuffle(&mut rng::seeded(seed));
    let half = order.len().div_ceil(2);
    let groups = [&order[..half], &order[half..]];
    let mut cursors = [0usize; 2];

    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let g = i % 2;
        let group = groups[g];
        let group_words: usize = group.iter().map(|d| d.word_count()).sum();
        if group_words < words_per_sample {
            return Err(Error::Insufficient(format!(
                "author {author_id:?} group {g} has {group_words} words, {words_per_sample} needed per sample"
            )));
        }
        let mut tokens = Vec::with_capacity(words_per_sample);
        let mut doc_ids = Vec::new();
        while tokens.len() < words_per_sample {
            let doc = group[cursors[g] % group.len()];
            cursors[g] += 1;
            let need = words_per_sample - tokens.len();
            let before = tokens.len();
            tokens.extend(doc.words().take(need).cloned());
            if tokens.len() > before {
                doc_ids.push(doc.id.clone());
            }
        }
        samples.push(WordSample {
            group: g as u8,
            doc_ids,
            tokens,
        });
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    fn doc(id: &str, author: &str, text: &str) -> Document {
        Document::new(id, author, "en", text)
    }

    #[test]
    fn preprocess_examples() {
        assert_eq!(preprocess("Hello, World!"), toks(&["hello", "world"]));
        assert!(preprocess("").is_empty());
        assert_eq!(preprocess("don't\nstop"), toks(&["don", "t", EOL, "stop"]));
        assert_eq!(preprocess("  Ёлки-Палки  "), toks(&["ёлки", "палки"]));
        assert_eq!(preprocess("a\r\nb"), toks(&["a", EOL, "b"]));
    }

    #[test]
    fn preprocess_rejects_invalid_utf8() {
        assert!(matches!(preprocess_bytes(&[0x66, 0xff]), Err(Error::Decode(_))));
    }

    #[test]
    fn join_round_trips_lines() {
        let t = preprocess("one two\nthree\n\nfour");
        assert_eq!(join_tokens(&t), "one two\nthree\n\nfour");
    }

    #[test]
    fn document_has_sentinels() {
        let d = doc("1", "a", "");
        assert_eq!(d.tokens, toks(&[BOS, EOS]));
        assert_eq!(d.word_count(), 0);
        let d = doc("2", "a", "x y\nz");
        assert_eq!(d.lines().len(), 2);
        assert_eq!(d.word_count(), 3);
    }

    #[test]
    fn jsonl_ingest_and_errors() {
        let data = "{\"id\":\"1\",\"author\":\"a\",\"lang\":\"en\",\"text\":\"Hi there\"}\n\
                    {\"id\":\"2\",\"author\":\"b\",\"lang\":\"en\",\"text\":\"x\\ny\"}\n";
        let c = read_jsonl(data.as_bytes(), "mem").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.authors.len(), 2);

        let bad = "{\"id\":\"1\",\"author\":\"a\",\"lang\":\"en\",\"text\":\"x\"}\n\
                   {\"id\":\"2\",\"lang\":\"en\",\"text\":\"x\"}\n";
        match read_jsonl(bad.as_bytes(), "mem") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("author"));
            }
            other => panic!("unexpected {other:?}"),
        }

        let dup = "{\"id\":\"1\",\"author\":\"a\",\"lang\":\"en\",\"text\":\"x\"}\n\
                   {\"id\":\"1\",\"author\":\"a\",\"lang\":\"en\",\"text\":\"y\"}\n";
        assert!(matches!(
            read_jsonl(dup.as_bytes(), "mem"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn vocab_counts_and_threshold() {
        let c = Corpus::new(vec![doc("1", "x", "a a b")]).unwrap();
        let v = build_vocab(&c, 1);
        assert_eq!(v.len(), SPECIALS.len() + 2);
        assert_eq!(v.freq(v.id("a")), 2);
        assert_eq!(v.id("a"), 4);
        assert_eq!(v.id("b"), 5);

        let v = build_vocab(&c, 2);
        assert_eq!(v.len(), SPECIALS.len() + 1);
        assert_eq!(v.id("b"), UNK_ID);
        assert_eq!(v.freq(UNK_ID), 1);
    }

    #[test]
    fn vocab_tie_break_is_lexicographic() {
        let c = Corpus::new(vec![doc("1", "x", "zeta alpha mid mid")]).unwrap();
        let v = build_vocab(&c, 1);
        assert_eq!(&v.tokens()[4..], &toks(&["mid", "alpha", "zeta"])[..]);
    }

    #[test]
    fn empty_corpus_vocab_is_specials_only() {
        let c = Corpus::new(vec![]).unwrap();
        assert_eq!(build_vocab(&c, 1).len(), SPECIALS.len());
    }

    fn ten_docs() -> Corpus {
        Corpus::new((0..10).map(|i| doc(&i.to_string(), "a", "w")).collect()).unwrap()
    }

    #[test]
    fn split_examples() {
        let c = ten_docs();
        let (tr, va) = split_corpus(&c, 0.2, 7).unwrap();
        assert_eq!((tr.len(), va.len()), (8, 2));
        let (tr2, va2) = split_corpus(&c, 0.2, 7).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(va, va2);

        let two = Corpus::new(vec![doc("1", "a", "x"), doc("2", "a", "y")]).unwrap();
        let (tr, va) = split_corpus(&two, 0.5, 1).unwrap();
        assert_eq!((tr.len(), va.len()), (1, 1));

        let one = Corpus::new(vec![doc("1", "a", "x")]).unwrap();
        assert!(split_corpus(&one, 0.5, 1).is_err());
        assert!(split_corpus(&c, 0.0, 1).is_err());
        assert!(split_corpus(&c, 1.0, 1).is_err());
    }

    #[test]
    fn split_is_stratified() {
        let mut docs = Vec::new();
        for i in 0..10 {
            docs.push(doc(&format!("a{i}"), "a", "w"));
        }
        for i in 0..5 {
            docs.push(doc(&format!("b{i}"), "b", "w"));
        }
        let c = Corpus::new(docs).unwrap();
        let (_, va) = split_corpus(&c, 0.2, 3).unwrap();
        assert_eq!(va.author_documents("a").len(), 2);
        assert_eq!(va.author_documents("b").len(), 1);
    }

    #[test]
    fn window_of_single_document() {
        let text: Vec<String> = (0..100).map(|i| format!("w{i}")).collect();
        let c = Corpus::new(vec![doc("1", "a", &text.join(" "))]).unwrap();
        let s = sample_word_windows(&c, "a", 100, 1, 5).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].tokens, text);
        assert!(matches!(
            sample_word_windows(&c, "a", 101, 1, 5),
            Err(Error::Insufficient(_))
        ));
        assert!(sample_word_windows(&c, "nobody", 10, 1, 5).is_err());
    }

    #[test]
    fn windows_skip_line_breaks() {
        let c = Corpus::new(vec![doc("1", "a", "a b\nc d")]).unwrap();
        let s = sample_word_windows(&c, "a", 3, 1, 0).unwrap();
        assert_eq!(s[0].tokens, toks(&["a", "b", "c"]));
    }
}
