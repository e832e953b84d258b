use std::collections::BTreeMap;

use proptest::prelude::*;
use semgest_core::tokenizer::{tokenize, Lexicon, LexiconError, Tag, MAX_CANONICAL_HOPS};

const ALPHABET: &[char] = &['あ', 'い', 'ざ', 'す', 'ー', 'x', ' ', '!'];

fn word() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(&ALPHABET[..6]), 1..4).prop_map(|v| v.into_iter().collect())
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(ALPHABET), 0..24).prop_map(|v| v.into_iter().collect())
}

fn lexicon(words: &[String], stops: &[String]) -> Lexicon {
    let mut lex = Lexicon::new();
    for w in words {
        lex.insert_word(w.clone()).unwrap();
    }
    for s in stops {
        lex.add_stop(s.clone()).unwrap();
    }
    lex
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn spans_tile_the_input(
        words in prop::collection::vec(word(), 0..6),
        stops in prop::collection::vec(word(), 0..3),
        s in text(),
    ) {
        let out = tokenize(&s, &lexicon(&words, &stops)).unwrap();
        let mut spans: Vec<_> = out.tokens.iter().filter(|t| !t.residue).map(|t| t.span.clone())
            .chain(out.stops.iter().cloned())
            .chain(out.residue.iter().cloned())
            .collect();
        spans.sort_by_key(|r| r.start);
        let rebuilt: String = spans.iter().map(|r| &s[r.clone()]).collect();
        prop_assert_eq!(rebuilt, s.clone());
        let mut at = 0;
        for r in &spans {
            prop_assert_eq!(r.start, at);
            at = r.end;
        }
        for t in &out.tokens {
            prop_assert!(!t.surface.trim().is_empty());
            prop_assert_eq!(&s[t.span.clone()], t.surface.as_str());
        }
    }

    #[test]
    fn absent_stop_changes_nothing(
        words in prop::collection::vec(word(), 0..6),
        stop in word(),
        s in text(),
    ) {
        prop_assume!(!s.contains(stop.as_str()));
        let base = lexicon(&words, &[]);
        let with = lexicon(&words, std::slice::from_ref(&stop));
        prop_assert_eq!(tokenize(&s, &base).unwrap(), tokenize(&s, &with).unwrap());
    }

    /// Each surface gets at most one outgoing edge to a later surface, so
    /// the lexicon is acyclic and the chain length is known.
    #[test]
    fn canonicalization_terminates(targets in prop::collection::vec(prop::option::of(1usize..8), 8)) {
        let names: Vec<String> = (0..8).map(|i| format!("w{i}")).collect();
        let mut lex = Lexicon::new();
        let mut next = BTreeMap::new();
        for (i, t) in targets.iter().enumerate() {
            match t.map(|d| i + d).filter(|&j| j < 8) {
                Some(j) => {
                    lex.insert(names[i].clone(), vec![names[j].clone()], Tag::Slang).unwrap();
                    next.insert(i, j);
                }
                None => lex.insert_word(names[i].clone()).unwrap(),
            }
        }
        for i in 0..8 {
            let mut hops = 0;
            let mut at = i;
            while let Some(&j) = next.get(&at) {
                hops += 1;
                at = j;
            }
            match lex.resolve(&names[i]) {
                Ok(forms) => {
                    prop_assert!(hops <= MAX_CANONICAL_HOPS);
                    prop_assert_eq!(forms, vec![names[at].clone()]);
                }
                Err(LexiconError::LexiconCycle(origin)) => {
                    prop_assert!(hops > MAX_CANONICAL_HOPS);
                    prop_assert_eq!(origin, names[i].clone());
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}

#[test]
fn longest_match_wins() {
    let lex = lexicon(&["あ".into(), "あざ".into()], &[]);
    let out = tokenize("あざ", &lex).unwrap();
    assert_eq!(out.tokens.len(), 1);
    assert_eq!(out.tokens[0].surface, "あざ");
}

#[test]
fn cycles_are_reported() {
    let mut lex = Lexicon::new();
    lex.insert("a", vec!["b".into()], Tag::Slang).unwrap();
    lex.insert("b", vec!["a".into()], Tag::Slang).unwrap();
    assert!(matches!(lex.validate(), Err(LexiconError::LexiconCycle(_))));
    assert!(matches!(tokenize("a", &lex), Err(LexiconError::LexiconCycle(_))));
}
