use std::path::PathBuf;

use proptest::prelude::*;

use stylm::phonetics::{load_rules, transcribe, Context, G2PRuleSet, UNK_PH};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn rule_lines(text: &str) -> Vec<String> {
    text.lines()
        .skip_while(|l| l.trim() != "rules:")
        .skip(1)
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect()
}

#[test]
fn forty_rule_file_loads_in_order() {
    let path = fixture("english40.g2p");
    let set = load_rules(&path).unwrap();
    let expected = rule_lines(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(expected.len(), 40);
    assert_eq!(set.rules().len(), 40);
    let got: Vec<String> = set
        .rules()
        .iter()
        .map(|r| {
            let mut s: String = r.pattern.iter().collect();
            match &r.right_context {
                Some(Context::Graphemes(c)) => {
                    s.push('/');
                    s.extend(c);
                }
                Some(Context::EndOfWord) => s.push_str("/$"),
                None => {}
            }
            s
        })
        .collect();
    assert_eq!(got, expected);
    assert_eq!(set.exception_count(), 2);
}

#[test]
fn fixture_transcriptions() {
    let set = load_rules(fixture("english40.g2p")).unwrap();
    let t = |w: &str| transcribe(w, &set).0;
    assert_eq!(t("the"), ["ð", "ə"]);
    assert_eq!(t("cat"), ["k", "æ", "t"]);
    assert_eq!(t("cell"), ["s", "ɛ", "l", "l"]);
    assert_eq!(t("match"), ["m", "æ", "tʃ"]);
    assert_eq!(t("cake"), ["k", "æ", "k"]);
    assert_eq!(t("queen"), ["k", "w", "i", "n"]);
    assert_eq!(t("x"), [UNK_PH]);
    assert!(t("").is_empty());
}

#[test]
fn missing_rule_file_is_io_error() {
    assert!(load_rules(fixture("absent.g2p")).is_err());
}

fn shipped() -> [G2PRuleSet; 2] {
    [G2PRuleSet::english(), G2PRuleSet::russian()]
}

#[test]
fn shipped_rule_outputs_are_in_inventory() {
    for set in shipped() {
        for rule in set.rules() {
            assert!(!rule.pattern.is_empty());
            for sym in &rule.output {
                assert!(set.inventory().contains(sym), "{} emits {sym}", set.source());
            }
        }
    }
}

proptest! {
    #[test]
    fn english_output_is_bounded_and_in_inventory(word in "[a-z]{0,16}") {
        let set = G2PRuleSet::english();
        let out = set.transcribe(&word);
        prop_assert!(out.len() <= 3 * word.chars().count().max(1));
        for sym in out.symbols() {
            prop_assert!(sym == UNK_PH || set.inventory().contains(sym));
        }
        prop_assert_eq!(out, set.transcribe(&word));
    }

    #[test]
    fn russian_output_is_bounded_and_in_inventory(word in "[а-яё]{0,16}") {
        let set = G2PRuleSet::russian();
        let out = set.transcribe(&word);
        prop_assert!(out.len() <= 3 * word.chars().count().max(1));
        for sym in out.symbols() {
            prop_assert!(sym == UNK_PH || set.inventory().contains(sym));
        }
    }

    #[test]
    fn exceptions_ignore_rule_content(keep in prop::collection::vec(any::<bool>(), 40)) {
        let text = std::fs::read_to_string(fixture("english40.g2p")).unwrap();
        let (head, rules) = text.split_once("rules:\n").unwrap();
        let mut kept: Vec<&str> = rules.lines().zip(&keep).filter(|(_, k)| **k).map(|(l, _)| l).collect();
        kept.reverse();
        let variant = format!("{head}rules:\n{}\n", kept.join("\n"));
        let set = G2PRuleSet::parse(&variant, "variant").unwrap();
        prop_assert_eq!(set.transcribe("the").0, vec!["ð".to_string(), "ə".to_string()]);
        prop_assert_eq!(set.transcribe("one").0, vec!["w".to_string(), "ʌ".to_string(), "n".to_string()]);
    }
}
