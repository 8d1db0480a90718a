use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stylm::corpus::{sample_word_windows, Corpus, Document, Vocabulary, BOS, EOS};
use stylm::ngram::{
    common_vocabulary, ngram_cross_entropy, sample_cross_entropy, self_similarity, NgramModel, SampleCeConfig,
    Smoothing,
};

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn vocab_of(texts: &[Vec<String>]) -> Arc<Vocabulary> {
    common_vocabulary(texts.iter().map(Vec::as_slice))
}

/// Word ids skewed towards small values so count-of-counts are populated.
fn skewed_texts(seed: u64, n_texts: usize, len: usize, prefix: &str, range: f64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_texts)
        .map(|_| {
            (0..len)
                .map(|_| {
                    let x: f64 = rng.gen();
                    format!("{prefix}{}", (x * x * x * range) as u32)
                })
                .collect()
        })
        .collect()
}

#[test]
fn witten_bell_bigram_by_hand() {
    let v = Arc::new(Vocabulary::from_sequences([words("a b")], 1));
    let m = NgramModel::fit(&[words("a b a b")], 2, v.clone()).unwrap();
    assert_eq!(m.smoothing(), Smoothing::WittenBell);
    let (a, b, eos, bos) = (v.id("a"), v.id("b"), v.id(EOS), v.id(BOS));
    // Unigram level: a 2, b 2, </s> 1 with 3 types, backing off to 1/5.
    let p1 = |c: f64| (c + 3.0 / 5.0) / 8.0;
    let cases = [
        (a, bos, (1.0 + p1(2.0)) / 2.0),
        (b, a, (2.0 + p1(2.0)) / 3.0),
        (a, b, (1.0 + 2.0 * p1(2.0)) / 4.0),
        (eos, b, (1.0 + 2.0 * p1(1.0)) / 4.0),
        (b, bos, p1(2.0) / 2.0),
    ];
    for (w, ctx, expected) in cases {
        assert!((m.prob(w, &[ctx]) - expected).abs() < 1e-12, "{w} after {ctx}");
    }
}

/// Independent interpolated modified Kneser-Ney for bigrams.
fn kn_bigram_oracle(texts: &[Vec<String>], vocab: &Vocabulary) -> impl Fn(u32, u32) -> f64 {
    let mut big: HashMap<(u32, u32), f64> = HashMap::new();
    for t in texts {
        let mut ids = vec![vocab.id(BOS)];
        ids.extend(t.iter().map(|w| vocab.id(w)));
        ids.push(vocab.id(EOS));
        for pair in ids.windows(2) {
            *big.entry((pair[0], pair[1])).or_default() += 1.0;
        }
    }
    let mut cont: HashMap<u32, f64> = HashMap::new();
    for &(_, w) in big.keys() {
        *cont.entry(w).or_default() += 1.0;
    }
    let discounts = |counts: &mut dyn Iterator<Item = f64>| {
        let mut n = [0.0; 5];
        for c in counts {
            if (1.0..=4.0).contains(&c) {
                n[c as usize] += 1.0;
            }
        }
        let y = n[1] / (n[1] + 2.0 * n[2]);
        [
            1.0 - 2.0 * y * n[2] / n[1],
            2.0 - 3.0 * y * n[3] / n[2],
            3.0 - 4.0 * y * n[4] / n[3],
        ]
    };
    let d2 = discounts(&mut big.values().copied());
    let d1 = discounts(&mut cont.values().copied());
    let pick = |d: &[f64; 3], c: f64| if c == 0.0 { 0.0 } else { d[(c as usize).min(3) - 1] };
    let support = (vocab.len() - 1) as f64;
    let total1: f64 = cont.values().sum();
    let gamma1: f64 = cont.values().map(|&c| pick(&d1, c)).sum::<f64>() / total1;
    let p1 = move |w: u32| {
        let c = cont.get(&w).copied().unwrap_or(0.0);
        (c - pick(&d1, c)).max(0.0) / total1 + gamma1 / support
    };
    move |w: u32, v: u32| {
        let row: Vec<f64> = big.iter().filter(|((a, _), _)| *a == v).map(|(_, &c)| c).collect();
        if row.is_empty() {
            return p1(w);
        }
        let total: f64 = row.iter().sum();
        let gamma: f64 = row.iter().map(|&c| pick(&d2, c)).sum::<f64>() / total;
        let c = big.get(&(v, w)).copied().unwrap_or(0.0);
        (c - pick(&d2, c)).max(0.0) / total + gamma * p1(w)
    }
}

#[test]
fn kneser_ney_bigram_matches_brute_force() {
    let texts = skewed_texts(4, 200, 12, "w", 400.0);
    let v = vocab_of(&texts);
    let m = NgramModel::fit(&texts, 2, v.clone()).unwrap();
    assert_eq!(m.smoothing(), Smoothing::ModifiedKneserNey);
    let oracle = kn_bigram_oracle(&texts, &v);
    for ctx in [v.id(BOS), v.id("w0"), v.id("w3"), v.id("w40")] {
        let mut total = 0.0;
        for w in 0..v.len() as u32 {
            if w == v.id(BOS) {
                continue;
            }
            let (got, want) = (m.prob(w, &[ctx]), oracle(w, ctx));
            assert!((got - want).abs() < 1e-12, "p({w}|{ctx}) {got} vs {want}");
            total += got;
        }
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn uniform_unigram_over_64_types_is_six_bits() {
    let types: Vec<String> = (0..61).map(|i| format!("t{i}")).collect();
    let v = Arc::new(Vocabulary::from_sequences([types.clone()], 1));
    let m = NgramModel::uniform(1, v);
    assert_eq!(m.support_size(), 64);
    assert_eq!(ngram_cross_entropy(&m, &[types]).unwrap(), 6.0);
}

#[test]
fn disjoint_corpora_prefer_their_own() {
    let a = skewed_texts(1, 40, 12, "a", 60.0);
    let b = skewed_texts(2, 40, 12, "b", 60.0);
    let all: Vec<Vec<String>> = a.iter().chain(&b).cloned().collect();
    let v = vocab_of(&all);
    let ma = NgramModel::fit(&a[..30], 3, v.clone()).unwrap();
    let mb = NgramModel::fit(&b[..30], 3, v.clone()).unwrap();
    let ce = |m: &NgramModel, t: &[Vec<String>]| ngram_cross_entropy(m, t).unwrap();
    assert!(ce(&ma, &a[30..]) < ce(&ma, &b[30..]));
    assert!(ce(&mb, &b[30..]) < ce(&mb, &a[30..]));
}

#[test]
fn own_sample_beats_relabelled_sample() {
    let texts = skewed_texts(7, 40, 12, "w", 60.0);
    let v = vocab_of(&texts);
    let m = NgramModel::fit(&texts, 3, v.clone()).unwrap();
    // Relabel every word through a fixed permutation of the types.
    let types: Vec<&String> = v.tokens().iter().skip(4).collect();
    let relabel: HashMap<&String, &String> = types.iter().copied().zip(types.iter().rev().copied()).collect();
    let shuffled: Vec<Vec<String>> = texts
        .iter()
        .map(|t| t.iter().map(|w| relabel[w].clone()).collect())
        .collect();
    assert!(ngram_cross_entropy(&m, &texts).unwrap() < ngram_cross_entropy(&m, &shuffled).unwrap());
}

fn two_author_corpus() -> Corpus {
    let mut docs = Vec::new();
    for (author, prefix, seed) in [("A", "a", 11), ("B", "b", 12)] {
        for (i, t) in skewed_texts(seed, 60, 40, prefix, 60.0).into_iter().enumerate() {
            let text = t.chunks(8).map(|c| c.join(" ")).collect::<Vec<_>>().join("\n");
            docs.push(Document::new(format!("{author}{i}"), author, "en", text));
        }
    }
    Corpus::new(docs).unwrap()
}

#[test]
fn generated_text_is_closer_to_its_author() {
    let corpus = two_author_corpus();
    let cfg = SampleCeConfig {
        words_per_sample: 200,
        n_samples: 6,
        ..SampleCeConfig::default()
    };
    let sa = sample_word_windows(&corpus, "A", 200, 6, 0).unwrap();
    let sb = sample_word_windows(&corpus, "B", 200, 6, 0).unwrap();
    let generated: Vec<Vec<String>> = skewed_texts(99, 3, 200, "a", 60.0);
    let everything: Vec<&[String]> = sa
        .iter()
        .chain(&sb)
        .map(|s| s.tokens.as_slice())
        .chain(generated.iter().map(Vec::as_slice))
        .collect();
    let v = common_vocabulary(everything);
    let vs_a = sample_cross_entropy(&sa, &generated, &cfg, Some(v.clone())).unwrap();
    let vs_b = sample_cross_entropy(&sb, &generated, &cfg, Some(v.clone())).unwrap();
    assert!(vs_a < vs_b, "{vs_a} vs {vs_b}");
    let self_a = self_similarity(&sa, &cfg, Some(v)).unwrap();
    assert!(self_a < vs_b);
}

#[test]
fn identical_inputs_equal_self_similarity() {
    let corpus = two_author_corpus();
    let cfg = SampleCeConfig {
        words_per_sample: 200,
        n_samples: 6,
        ..SampleCeConfig::default()
    };
    let samples = sample_word_windows(&corpus, "A", 200, 6, 5).unwrap();
    let held_out: Vec<Vec<String>> = samples
        .iter()
        .filter(|s| s.group == 1)
        .map(|s| s.tokens.clone())
        .collect();
    let a = sample_cross_entropy(&samples, &held_out, &cfg, None).unwrap();
    let b = self_similarity(&samples, &cfg, None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn wrong_sample_length_is_rejected() {
    let corpus = two_author_corpus();
    let cfg = SampleCeConfig {
        words_per_sample: 200,
        n_samples: 2,
        ..SampleCeConfig::default()
    };
    let samples = sample_word_windows(&corpus, "A", 200, 2, 0).unwrap();
    assert!(sample_cross_entropy(&samples, &[words("a0 a1")], &cfg, None).is_err());
    assert!(sample_cross_entropy(&samples, &[], &cfg, None).is_err());
}

proptest! {
    #[test]
    fn conditionals_sum_to_one(
        seed in any::<u64>(),
        order in 1usize..5,
        n_texts in 1usize..60,
    ) {
        let texts = skewed_texts(seed, n_texts, 9, "w", 60.0);
        let v = vocab_of(&texts);
        let m = NgramModel::fit(&texts, order, v.clone()).unwrap();
        let mut contexts = m.observed_contexts();
        contexts.truncate(25);
        contexts.push(vec![v.id("w0"); order - 1]);
        for ctx in contexts {
            let d = m.distribution(&ctx);
            prop_assert!(d.iter().all(|&p| p >= 0.0));
            let s: f64 = d.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-9, "context {:?} sums to {}", ctx, s);
        }
        let seen: HashSet<u32> = texts.iter().flatten().map(|w| v.id(w)).collect();
        prop_assert!(seen.iter().all(|&w| m.prob(w, &[]) > 0.0));
    }
}
