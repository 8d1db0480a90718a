use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stylm::corpus::{build_vocab, ingest, split_corpus, Corpus, CorpusFormat, Document};
use stylm::model::{
    build_variant, load_checkpoint, parameter_shapes, save_checkpoint, train_model, DocRef, GenConfig, Lexicon,
    LstmState, ModelConfig, StylizedLM, TrainConfig, Variant,
};
use stylm::numerics::AdamConfig;
use stylm::phonetics::G2PRuleSet;
use stylm::Error;

const VARIANTS: [Variant; 3] = [Variant::Full, Variant::AuthorOnly, Variant::Vanilla];

fn tiny_corpus() -> Corpus {
    Corpus::new(vec![
        Document::new("d1", "ann", "en", "the cat sat\non a mat"),
        Document::new("d2", "ann", "en", "a cat and a hat"),
        Document::new("d3", "bob", "en", "big dogs bark\nat the moon"),
    ])
    .unwrap()
}

fn small_config(variant: Variant) -> ModelConfig {
    ModelConfig {
        d_word: 6,
        d_char_bi: 4,
        d_phon_bi: 4,
        d_doc_proj: 6,
        d_state: 5,
        d_author_emb: 3,
        d_doc_emb: 3,
        d_char_emb: 3,
        d_phon_emb: 3,
        variant,
        ..ModelConfig::default()
    }
}

fn build(corpus: &Corpus, config: &ModelConfig, seed: u64) -> StylizedLM {
    let lexicon = Lexicon::from_corpus(corpus, build_vocab(corpus, 1), G2PRuleSet::english());
    build_variant(config, lexicon, seed).unwrap()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[test]
fn zero_model_embeds_to_zero_and_is_uniform() {
    let corpus = tiny_corpus();
    let v = build_vocab(&corpus, 1).len() as f64;
    for variant in VARIANTS {
        let config = ModelConfig {
            variant,
            ..ModelConfig::default()
        };
        let mut m = build(&corpus, &config, 1);
        m.zero_parameters();
        let e = m.compose_word_embedding("cat", "ann", &DocRef::Absent);
        assert_eq!(e.len(), 1152);
        assert!(e.iter().all(|&x| x == 0.0));
        for doc in &corpus.documents {
            let nll = m.sequence_nll(doc).unwrap();
            assert!((nll - v.ln()).abs() < 1e-12, "{variant}: {nll}");
        }
        let (state, logits) = m.lstm_step(&LstmState::zeros(512), &e).unwrap();
        assert!(state.h.iter().chain(&state.c).chain(&logits).all(|&x| x == 0.0));
    }
}

#[test]
fn parameter_count_matches_closed_form() {
    let corpus = tiny_corpus();
    for variant in VARIANTS {
        let config = small_config(variant);
        let m = build(&corpus, &config, 0);
        let lex = m.lexicon();
        let (v, a, d) = (lex.vocab.len(), lex.authors.len(), lex.documents.len());
        let (nc, np) = (lex.chars.len(), lex.g2p.symbols().len());
        let bilstm = |n_sym: usize, e: usize, bi: usize| {
            let h = bi / 2;
            n_sym * e + 2 * (e * 4 * h + h * 4 * h + 4 * h)
        };
        let input = 6 + 4 + 4 + 6;
        let h = 5;
        let mut expected = input * 4 * h + h * 4 * h + 4 * h + h * v + v;
        expected += match variant {
            Variant::Full => v * 6 + bilstm(nc, 3, 4) + bilstm(np, 3, 4) + a * 3 + d * 3 + 6 * 6,
            Variant::AuthorOnly => v * 14 + a * 3 + d * 3 + 6 * 6,
            Variant::Vanilla => v * input,
        };
        assert_eq!(m.parameter_count(), expected, "{variant}");
        assert_eq!(m.config().input_width(), input);
    }
}

#[test]
fn default_full_model_has_expected_parameter_count() {
    let config = ModelConfig {
        vocab_size: 1000,
        author_count: 4,
        ..ModelConfig::default()
    };
    let shapes = parameter_shapes(&config, 30, 40, 100);
    let total: usize = shapes.iter().map(|(_, [r, c])| r * c).sum();
    let bilstm = |n: usize| n * 16 + 2 * (16 * 256 + 64 * 256 + 256);
    let expected = 1000 * 384
        + bilstm(30)
        + bilstm(40)
        + 5 * 64
        + 100 * 64
        + 128 * 512
        + 1152 * 2048
        + 512 * 2048
        + 2048
        + 512 * 1000
        + 1000;
    assert_eq!(total, expected);
}

#[test]
fn ablations_drop_their_blocks() {
    let corpus = tiny_corpus();
    let vanilla = build(&corpus, &small_config(Variant::Vanilla), 0);
    for name in [
        "char_emb",
        "phon_emb",
        "char_fwd.w_x",
        "phon_bwd.b",
        "doc_proj",
        "author_emb",
        "doc_emb",
    ] {
        assert!(vanilla.params().by_name(name).is_none(), "{name}");
    }
    let author_only = build(&corpus, &small_config(Variant::AuthorOnly), 0);
    assert!(author_only.params().by_name("char_emb").is_none());
    assert!(author_only.params().by_name("doc_proj").is_some());
    for m in [&vanilla, &author_only] {
        let e = m.compose_word_embedding("cat", "ann", &DocRef::Absent);
        assert_eq!(e.len(), 20);
    }
}

#[test]
fn hand_set_character_lstm() {
    let corpus = tiny_corpus();
    let config = ModelConfig {
        d_char_bi: 2,
        ..small_config(Variant::Full)
    };
    let mut m = build(&corpus, &config, 0);
    m.zero_parameters();
    let chars = m.lexicon().chars.clone();
    let row = |c: char| chars.iter().position(|&x| x == c).unwrap();
    let (ra, rt) = (row('a'), row('t'));
    let p = m.params_mut();
    let set = |p: &mut stylm::numerics::ParamStore, name: &str, values: &[(usize, f64)]| {
        let id = p.id(name).unwrap();
        for &(i, v) in values {
            p.get_mut(id).data_mut()[i] = v;
        }
    };
    // Embedding width 3, one unit per direction: gate columns i, f, g, o.
    set(p, "char_emb", &[(ra * 3, 1.0), (rt * 3 + 1, 1.0)]);
    set(
        p,
        "char_fwd.w_x",
        &[
            (0, 0.5),
            (1, -0.5),
            (2, 1.0),
            (3, 0.2),
            (4, -0.3),
            (5, 0.8),
            (6, -1.0),
            (7, 0.6),
        ],
    );
    set(p, "char_fwd.w_h", &[(0, 0.7), (1, -0.1), (2, 0.9), (3, -0.4)]);
    set(p, "char_fwd.b", &[(0, 0.1), (1, -0.2), (2, 0.3), (3, 0.4)]);

    let step = |x: [f64; 2], h: f64, c: f64| {
        let wx = [[0.5, -0.5, 1.0, 0.2], [-0.3, 0.8, -1.0, 0.6]];
        let wh = [0.7, -0.1, 0.9, -0.4];
        let b = [0.1, -0.2, 0.3, 0.4];
        let z: Vec<f64> = (0..4)
            .map(|k| x[0] * wx[0][k] + x[1] * wx[1][k] + h * wh[k] + b[k])
            .collect();
        let c2 = sigmoid(z[1]) * c + sigmoid(z[0]) * z[2].tanh();
        (sigmoid(z[3]) * c2.tanh(), c2)
    };
    let (h1, c1) = step([1.0, 0.0], 0.0, 0.0);
    let e = m.compose_word_embedding("a", "ann", &DocRef::Absent);
    assert!((e[6] - h1).abs() < 1e-15, "{} vs {h1}", e[6]);
    assert_eq!(e[7], 0.0);

    let (h2, _) = step([0.0, 1.0], h1, c1);
    let e = m.compose_word_embedding("at", "ann", &DocRef::Absent);
    assert!((e[6] - h2).abs() < 1e-15, "{} vs {h2}", e[6]);
}

#[test]
fn lstm_step_matches_independent_oracle() {
    let corpus = tiny_corpus();
    let m = build(&corpus, &small_config(Variant::Full), 42);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let width = m.config().input_width();
    let d = m.config().d_state;
    let input: Vec<f64> = (0..width).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let state = LstmState {
        h: (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        c: (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    };
    let p = m.params();
    let (wx, wh, b) = (
        p.by_name("lstm.w_x").unwrap(),
        p.by_name("lstm.w_h").unwrap(),
        p.by_name("lstm.b").unwrap(),
    );
    let z: Vec<f64> = (0..4 * d)
        .map(|k| {
            let from_x: f64 = (0..width).map(|i| input[i] * wx.data()[i * 4 * d + k]).sum();
            let from_h: f64 = (0..d).map(|i| state.h[i] * wh.data()[i * 4 * d + k]).sum();
            from_x + from_h + b.data()[k]
        })
        .collect();
    let c: Vec<f64> = (0..d)
        .map(|j| sigmoid(z[d + j]) * state.c[j] + sigmoid(z[j]) * z[2 * d + j].tanh())
        .collect();
    let h: Vec<f64> = (0..d).map(|j| sigmoid(z[3 * d + j]) * c[j].tanh()).collect();
    let (ow, ob) = (p.by_name("out.w").unwrap(), p.by_name("out.b").unwrap());
    let v = ob.len();
    let logits: Vec<f64> = (0..v)
        .map(|k| (0..d).map(|j| h[j] * ow.data()[j * v + k]).sum::<f64>() + ob.data()[k])
        .collect();

    let (got, got_logits) = m.lstm_step(&state, &input).unwrap();
    for (a, b) in got
        .h
        .iter()
        .zip(&h)
        .chain(got.c.iter().zip(&c))
        .chain(got_logits.iter().zip(&logits))
    {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    assert!(matches!(m.lstm_step(&state, &input[1..]), Err(Error::Shape(_))));
}

#[test]
fn tiny_model_passes_gradient_check() {
    let corpus = tiny_corpus();
    for variant in VARIANTS {
        let mut m = build(&corpus, &small_config(variant), 3);
        let report = m.gradient_check(&corpus, 1e-5).unwrap();
        assert!(report.max_relative_error < 1e-4, "{variant}: {report:?}");
    }
}

#[test]
fn initialisation_is_seeded() {
    let corpus = tiny_corpus();
    let config = small_config(Variant::Full);
    let a = build(&corpus, &config, 5);
    assert_eq!(a.to_bytes(), build(&corpus, &config, 5).to_bytes());
    let b = build(&corpus, &config, 6);
    let shapes = |m: &StylizedLM| {
        m.params()
            .iter()
            .map(|(_, n, t)| (n.to_string(), t.shape().to_vec()))
            .collect::<Vec<_>>()
    };
    assert_eq!(shapes(&a), shapes(&b));
    assert_ne!(a.params().by_name("lstm.w_x"), b.params().by_name("lstm.w_x"));
    for (_, name, t) in a.params().iter() {
        let bound = (6.0 / (t.rows() + t.cols()) as f64).sqrt();
        assert!(t.data().iter().all(|x| x.abs() <= bound), "{name}");
    }
}

#[test]
fn distributions_are_probability_vectors() {
    let corpus = tiny_corpus();
    let m = build(&corpus, &small_config(Variant::Full), 8);
    let ctx: Vec<String> = corpus.documents[0].tokens[..4].to_vec();
    for author in ["ann", "bob", "stranger"] {
        let p = m.next_token_distribution(&ctx, author, &DocRef::Absent).unwrap();
        assert_eq!(p.len(), m.vocab().len());
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn generation_contracts() {
    let corpus = tiny_corpus();
    let m = build(&corpus, &small_config(Variant::Full), 8);
    let one = GenConfig {
        max_tokens: 1,
        ..GenConfig::default()
    };
    assert!(m.generate("ann", None, &one).unwrap().len() <= 1);
    let greedy = |seed| GenConfig {
        temperature: 0.0,
        max_tokens: 30,
        rng_seed: seed,
        ..GenConfig::default()
    };
    let first = m.generate("ann", None, &greedy(1)).unwrap();
    assert_eq!(first, m.generate("ann", None, &greedy(2)).unwrap());
    let sampled = GenConfig {
        max_tokens: 30,
        rng_seed: 4,
        ..GenConfig::default()
    };
    assert_eq!(
        m.generate("bob", None, &sampled).unwrap(),
        m.generate("bob", None, &sampled).unwrap()
    );
    assert!(m.generate("stranger", None, &sampled).is_ok());
    assert!(first.iter().all(|t| t != "<s>"));
    let bad = GenConfig {
        temperature: -1.0,
        ..GenConfig::default()
    };
    assert!(m.generate("ann", None, &bad).is_err());
}

#[test]
fn checkpoint_round_trip_and_errors() {
    let corpus = tiny_corpus();
    let m = build(&corpus, &small_config(Variant::AuthorOnly), 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.stylm");
    save_checkpoint(&m, &path).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back.to_bytes(), m.to_bytes());
    assert_eq!(back.variant(), Variant::AuthorOnly);

    let bytes = m.to_bytes();
    assert!(matches!(StylizedLM::from_bytes(b"NOPE"), Err(Error::Checkpoint(_))));
    assert!(matches!(
        StylizedLM::from_bytes(&bytes[..bytes.len() - 8]),
        Err(Error::Checkpoint(_))
    ));
    let mut wrong_version = bytes.clone();
    wrong_version[5] = 99;
    assert!(matches!(
        StylizedLM::from_bytes(&wrong_version),
        Err(Error::Checkpoint(_))
    ));
    assert!(matches!(
        load_checkpoint(dir.path().join("absent.stylm")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn single_document_is_memorised() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/single.jsonl");
    let corpus = ingest(path, CorpusFormat::JsonLines).unwrap();
    let config = ModelConfig {
        d_state: 32,
        ..small_config(Variant::Full)
    };
    let hyper = TrainConfig {
        epochs: 300,
        adam: AdamConfig {
            lr: 1e-2,
            ..AdamConfig::default()
        },
        ..TrainConfig::default()
    };
    let (m, trace) = train_model(
        &corpus,
        None,
        build_vocab(&corpus, 1),
        G2PRuleSet::english(),
        &config,
        &hyper,
    )
    .unwrap();
    assert_eq!(trace.epochs.len(), 300);
    let doc = &corpus.documents[0];
    assert!(m.sequence_nll(doc).unwrap() < 0.05);
    let greedy = GenConfig {
        temperature: 0.0,
        ..GenConfig::default()
    };
    assert_eq!(m.generate(&doc.author_id, None, &greedy).unwrap(), doc.body());
}

fn fixture_subset() -> (Corpus, Corpus) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic.jsonl");
    let all = ingest(path, CorpusFormat::JsonLines).unwrap();
    let docs = all
        .authors
        .values()
        .flat_map(|idx| idx[..40].iter().map(|&i| all.documents[i].clone()))
        .collect();
    split_corpus(&Corpus::new(docs).unwrap(), 0.25, 0).unwrap()
}

fn fixture_model(train: &Corpus, validation: &Corpus, variant: Variant) -> StylizedLM {
    let config = ModelConfig {
        d_word: 24,
        d_char_bi: 8,
        d_phon_bi: 8,
        d_doc_proj: 8,
        d_state: 32,
        d_author_emb: 8,
        d_doc_emb: 8,
        d_char_emb: 8,
        d_phon_emb: 8,
        variant,
        ..ModelConfig::default()
    };
    let hyper = TrainConfig {
        epochs: 8,
        adam: AdamConfig {
            lr: 1e-2,
            ..AdamConfig::default()
        },
        ..TrainConfig::default()
    };
    let vocab = build_vocab(train, 1);
    train_model(train, Some(validation), vocab, G2PRuleSet::english(), &config, &hyper)
        .unwrap()
        .0
}

#[test]
fn trained_conditioning_matters_and_helps() {
    let (train, validation) = fixture_subset();
    let full = fixture_model(&train, &validation, Variant::Full);
    let authors = train.author_ids();
    for (i, a) in authors.iter().enumerate() {
        let own = validation.restrict_to_author(a).unwrap();
        let other = &authors[(i + 1) % authors.len()];
        let under_own = full.corpus_nll(&own, None).unwrap();
        let under_other = full.corpus_nll(&own, Some(other)).unwrap();
        assert!(
            under_own < under_other,
            "{a}: {under_own} vs {under_other} under {other}"
        );
    }
    let vanilla = fixture_model(&train, &validation, Variant::Vanilla);
    let (f, v) = (
        full.corpus_nll(&validation, None).unwrap(),
        vanilla.corpus_nll(&validation, None).unwrap(),
    );
    assert!(f <= v, "full {f} vs vanilla {v}");
}
