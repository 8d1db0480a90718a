//! Heuristic grapheme-to-phoneme transcription driven by plain-text rule files.
//!
//! Rule file layout:
//!
//! ```text
//! inventory: p b t d k ...
//! exceptions:
//! the<TAB>ð ə
//! rules:
//! tch<TAB>tʃ
//! c/e<TAB>s
//! e/$<TAB>
//! ```
//!
//! A rule is `pattern[/right-context]` followed by a tab and the emitted
//! symbols (possibly none). The right context `$` matches the end of the word.
//! `#` starts a comment. Rules are tried in file order and the first match at
//! the current position wins.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::error::{Error, Result};

/// Emitted for characters no rule covers.
pub const UNK_PH: &str = "<unkph>";

const END_OF_WORD: &str = "$";

const ENGLISH_RULES: &str = include_str!("../rules/english.g2p");
const RUSSIAN_RULES: &str = include_str!("../rules/russian.g2p");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub pattern: Vec<char>,
    pub right_context: Option<Context>,
    pub output: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Context {
    Graphemes(Vec<char>),
    EndOfWord,
}

impl Rule {
    fn matches(&self, word: &[char], pos: usize) -> bool {
        let end = pos + self.pattern.len();
        if end > word.len() || word[pos..end] != self.pattern[..] {
            return false;
        }
        match &self.right_context {
            None => true,
            Some(Context::EndOfWord) => end == word.len(),
            Some(Context::Graphemes(ctx)) => word[end..].starts_with(ctx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhonemeSequence(pub Vec<String>);

impl PhonemeSequence {
    pub fn symbols(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct G2PRuleSet {
    inventory: BTreeSet<String>,
    exceptions: HashMap<String, Vec<String>>,
    rules: Vec<Rule>,
    by_first: HashMap<char, Vec<usize>>,
    source: String,
}

#[derive(PartialEq)]
enum Section {
    None,
    Exceptions,
    Rules,
}

impl G2PRuleSet {
    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            file: name.to_string(),
            line,
            message,
        };
        let mut inventory: Option<BTreeSet<String>> = None;
        let mut exceptions = HashMap::new();
        let mut rules = Vec::new();
        let mut section = Section::None;

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let Some(inv) = &inventory else {
                let rest = line
                    .trim()
                    .strip_prefix("inventory:")
                    .ok_or_else(|| err(lineno, "expected \"inventory:\" line first".into()))?;
                inventory = Some(rest.split_whitespace().map(str::to_string).collect());
                continue;
            };
            match line.trim() {
                "exceptions:" => {
                    section = Section::Exceptions;
                    continue;
                }
                "rules:" => {
                    section = Section::Rules;
                    continue;
                }
                _ => {}
            }
            let (lhs, rhs) = line
                .split_once('\t')
                .ok_or_else(|| err(lineno, format!("expected a tab-separated entry, got {raw:?}")))?;
            let lhs = lhs.trim();
            let output: Vec<String> = rhs.split_whitespace().map(str::to_string).collect();
            if let Some(bad) = output.iter().find(|s| !inv.contains(*s)) {
                return Err(err(lineno, format!("symbol {bad:?} is not in the inventory")));
            }
            match section {
                Section::None => {
                    return Err(err(
                        lineno,
                        "entry outside an \"exceptions:\" or \"rules:\" section".into(),
                    ))
                }
                Section::Exceptions => {
                    if lhs.is_empty() {
                        return Err(err(lineno, "empty exception word".into()));
                    }
                    if exceptions.insert(lhs.to_string(), output).is_some() {
                        log::warn!("{name}:{lineno}: exception {lhs:?} redefined, last definition wins");
                    }
                }
                Section::Rules => {
                    let (pattern, context) = match lhs.split_once('/') {
                        Some((p, c)) if c == END_OF_WORD => (p, Some(Context::EndOfWord)),
                        Some((p, c)) if !c.is_empty() => (p, Some(Context::Graphemes(c.chars().collect()))),
                        Some(_) => return Err(err(lineno, "empty right context".into())),
                        None => (lhs, None),
                    };
                    if pattern.is_empty() {
                        return Err(err(lineno, "empty rule pattern".into()));
                    }
                    rules.push(Rule {
                        pattern: pattern.chars().collect(),
                        right_context: context,
                        output,
                    });
                }
            }
        }
        let inventory = inventory.ok_or_else(|| err(1, "missing \"inventory:\" line".into()))?;
        let mut by_first: HashMap<char, Vec<usize>> = HashMap::new();
        for (i, rule) in rules.iter().enumerate() {
            by_first.entry(rule.pattern[0]).or_default().push(i);
        }
        Ok(G2PRuleSet {
            inventory,
            exceptions,
            rules,
            by_first,
            source: text.to_string(),
        })
    }

    pub fn english() -> Self {
        Self::parse(ENGLISH_RULES, "english.g2p").expect("shipped English rules parse")
    }

    pub fn russian() -> Self {
        Self::parse(RUSSIAN_RULES, "russian.g2p").expect("shipped Russian rules parse")
    }

    /// Shipped rules for a language tag (`en`, `ru`); English otherwise.
    pub fn for_language(tag: &str) -> Self {
        match tag.to_ascii_lowercase().as_str() {
            "ru" | "rus" | "russian" => Self::russian(),
            _ => Self::english(),
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn inventory(&self) -> &BTreeSet<String> {
        &self.inventory
    }

    pub fn exception_count(&self) -> usize {
        self.exceptions.len()
    }

    /// The rule file text this set was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Every symbol `transcribe` can emit, in a stable order, `UNK_PH` first.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = vec![UNK_PH.to_string()];
        out.extend(self.inventory.iter().cloned());
        out
    }

    pub fn transcribe(&self, word: &str) -> PhonemeSequence {
        if let Some(ex) = self.exceptions.get(word) {
            return PhonemeSequence(ex.clone());
        }
        let chars: Vec<char> = word.chars().collect();
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < chars.len() {
            let hit = self
                .by_first
                .get(&chars[pos])
                .and_then(|idx| idx.iter().map(|&i| &self.rules[i]).find(|r| r.matches(&chars, pos)));
            match hit {
                Some(rule) => {
                    out.extend(rule.output.iter().cloned());
                    pos += rule.pattern.len();
                }
                None => {
                    out.push(UNK_PH.to_string());
                    pos += 1;
                }
            }
        }
        PhonemeSequence(out)
    }
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<G2PRuleSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    G2PRuleSet::parse(&text, &path.display().to_string())
}

pub fn transcribe(word: &str, rules: &G2PRuleSet) -> PhonemeSequence {
    rules.transcribe(word)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAT: &str = "inventory: k æ t\nrules:\nc\tk\na\tæ\nt\tt\n";

    fn syms(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_small_file() {
        let r = G2PRuleSet::parse(CAT, "cat").unwrap();
        assert_eq!(r.rules().len(), 3);
        assert_eq!(r.inventory().len(), 3);
    }

    #[test]
    fn transcribes_by_scan() {
        let r = G2PRuleSet::parse(CAT, "cat").unwrap();
        assert_eq!(r.transcribe("cat").0, syms(&["k", "æ", "t"]));
        assert!(r.transcribe("").is_empty());
    }

    #[test]
    fn unknown_characters_fall_back() {
        let r = G2PRuleSet::parse("inventory: æ\nrules:\na\tæ\n", "a").unwrap();
        assert_eq!(r.transcribe("a7").0, syms(&["æ", UNK_PH]));
    }

    #[test]
    fn undeclared_symbol_is_rejected() {
        let e = G2PRuleSet::parse("inventory: k\nrules:\nc\tk\na\tæ\n", "x").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e}");
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        assert!(matches!(
            G2PRuleSet::parse("inventory: k\nrules:\nc k\n", "x"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            G2PRuleSet::parse("inventory: k\nc\tk\n", "x"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            G2PRuleSet::parse("rules:\n", "x"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            G2PRuleSet::parse("inventory: k\nrules:\n/a\tk\n", "x"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn first_rule_in_file_order_wins() {
        let text = "inventory: k s\nrules:\nc/e\ts\nc\tk\ne\t\n";
        let r = G2PRuleSet::parse(text, "x").unwrap();
        assert_eq!(r.transcribe("ce").0, syms(&["s"]));
        assert_eq!(r.transcribe("ca").0, syms(&["k", UNK_PH]));
        let swapped = "inventory: k s\nrules:\nc\tk\nc/e\ts\ne\t\n";
        let r = G2PRuleSet::parse(swapped, "x").unwrap();
        assert_eq!(r.transcribe("ce").0, syms(&["k"]));
    }

    #[test]
    fn end_of_word_context() {
        let text = "inventory: ɛ\nrules:\ne/$\t\ne\tɛ\n";
        let r = G2PRuleSet::parse(text, "x").unwrap();
        assert_eq!(r.transcribe("ee").0, syms(&["ɛ"]));
    }

    #[test]
    fn exceptions_dominate_and_last_wins() {
        let text = "inventory: k æ t ð ə\nexceptions:\ncat\tð\ncat\tð ə\nrules:\nc\tk\na\tæ\nt\tt\n";
        let r = G2PRuleSet::parse(text, "x").unwrap();
        assert_eq!(r.transcribe("cat").0, syms(&["ð", "ə"]));
        assert_eq!(r.exception_count(), 1);
    }

    #[test]
    fn comments_are_ignored() {
        let text = "# header\ninventory: k # trailing\nrules:\nc\tk # hard c\n";
        assert_eq!(G2PRuleSet::parse(text, "x").unwrap().rules().len(), 1);
    }

    #[test]
    fn shipped_rule_files_load() {
        let en = G2PRuleSet::english();
        assert!(en.rules().len() >= 55, "{}", en.rules().len());
        assert!(en.exception_count() >= 190, "{}", en.exception_count());
        assert_eq!(en.transcribe("the").0, syms(&["ð", "ə"]));
        assert_eq!(en.transcribe("chat").0, syms(&["tʃ", "æ", "t"]));
        assert_eq!(en.transcribe("nice").0, syms(&["n", "ɪ", "s"]));

        let ru = G2PRuleSet::russian();
        assert_eq!(ru.transcribe("мама").0, syms(&["m", "a", "m", "a"]));
        assert_eq!(ru.transcribe("мяч").0, syms(&["mʲ", "a", "tʃʲ"]));
        assert_eq!(ru.transcribe("соль").0, syms(&["s", "o", "lʲ"]));
        assert_eq!(ru.transcribe("яма").0, syms(&["j", "a", "m", "a"]));
    }
}
