//! Dictionary longest-match tokenizer with a stoplist and a canonicalization
//! table for slang and buzzwords.
//!
//! The tokenizer stands in for a morphological analyzer: it only knows the
//! surfaces it is given. Text it cannot match is kept as residue and still
//! emitted as a token, so novel words reach the embedder as out-of-vocabulary
//! rather than disappearing.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use thiserror::Error;

/// Canonicalization may follow at most this many surface → canonical hops.
pub const MAX_CANONICAL_HOPS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("lexicon entry with empty surface")]
    EmptySurface,
    #[error("lexicon entry {0:?} has no canonical form")]
    EmptyCanonical(String),
    #[error("canonicalization of {0:?} exceeds {MAX_CANONICAL_HOPS} hops")]
    LexiconCycle(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Tag {
    #[default]
    Standard,
    Slang,
    Buzzword,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub canonical: Vec<String>,
    pub tag: Tag,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, LexEntry>,
    stoplist: BTreeSet<String>,
    longest: usize,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces an entry. An empty canonical list means the surface
    /// is its own canonical form.
    pub fn insert(
        &mut self,
        surface: impl Into<String>,
        canonical: Vec<String>,
        tag: Tag,
    ) -> Result<(), LexiconError> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err(LexiconError::EmptySurface);
        }
        if canonical.iter().any(String::is_empty) {
            return Err(LexiconError::EmptyCanonical(surface));
        }
        let canonical = if canonical.is_empty() {
            vec![surface.clone()]
        } else {
            canonical
        };
        self.longest = self.longest.max(surface.chars().count());
        self.entries.insert(surface, LexEntry { canonical, tag });
        Ok(())
    }

    /// Shorthand for a word that is its own canonical form.
    pub fn insert_word(&mut self, surface: impl Into<String>) -> Result<(), LexiconError> {
        self.insert(surface, Vec::new(), Tag::Standard)
    }

    pub fn add_stop(&mut self, surface: impl Into<String>) -> Result<(), LexiconError> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err(LexiconError::EmptySurface);
        }
        self.longest = self.longest.max(surface.chars().count());
        self.stoplist.insert(surface);
        Ok(())
    }

    /// Layers `other` on top of `self`; entries in `other` win.
    pub fn extend(&mut self, other: Lexicon) {
        self.longest = self.longest.max(other.longest);
        self.entries.extend(other.entries);
        self.stoplist.extend(other.stoplist);
    }

    pub fn get(&self, surface: &str) -> Option<&LexEntry> {
        self.entries.get(surface)
    }

    pub fn is_stop(&self, surface: &str) -> bool {
        self.stoplist.contains(surface)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &LexEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn stoplist(&self) -> impl Iterator<Item = &str> {
        self.stoplist.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.stoplist.is_empty()
    }

    /// Checks that every entry canonicalizes within the hop limit.
    pub fn validate(&self) -> Result<(), LexiconError> {
        for surface in self.entries.keys() {
            self.resolve(surface)?;
        }
        Ok(())
    }

    /// Final canonical forms of `surface`. Unknown surfaces resolve to
    /// themselves.
    pub fn resolve(&self, surface: &str) -> Result<Vec<String>, LexiconError> {
        let mut out = Vec::new();
        self.resolve_into(surface, surface, 0, &mut out)?;
        Ok(out)
    }

    fn resolve_into(
        &self,
        origin: &str,
        form: &str,
        hops: usize,
        out: &mut Vec<String>,
    ) -> Result<(), LexiconError> {
        match self.entries.get(form) {
            Some(entry) if !(entry.canonical.len() == 1 && entry.canonical[0] == form) => {
                if hops == MAX_CANONICAL_HOPS {
                    return Err(LexiconError::LexiconCycle(String::from(origin)));
                }
                for next in &entry.canonical {
                    self.resolve_into(origin, next, hops + 1, out)?;
                }
                Ok(())
            }
            _ => {
                out.push(String::from(form));
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Token {
    pub surface: String,
    pub canonical: Vec<String>,
    pub tag: Tag,
    /// Byte range in the tokenized text.
    pub span: Range<usize>,
    /// True when the token is an unmatched residue span.
    pub residue: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TokenList {
    pub tokens: Vec<Token>,
    /// Spans matched by the stoplist.
    pub stops: Vec<Range<usize>>,
    /// Spans no entry covered, whitespace included.
    pub residue: Vec<Range<usize>>,
}

enum Match {
    Entry,
    Stop,
}

/// Greedy left-to-right longest match over entries and stoplist. On a tie
/// between an entry and a stop surface the stop wins.
pub fn tokenize(text: &str, lex: &Lexicon) -> Result<TokenList, LexiconError> {
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(b, _)| b)
        .chain(core::iter::once(text.len()))
        .collect();
    let n = bounds.len() - 1;
    let mut out = TokenList::default();
    let mut pending: Option<usize> = None;
    let mut i = 0;

    while i < n {
        let c = text[bounds[i]..].chars().next().unwrap_or(' ');
        let found = if c.is_whitespace() {
            None
        } else {
            longest_match(text, &bounds, i, lex)
        };
        match found {
            Some((len, kind)) => {
                flush_residue(text, &bounds, &mut pending, i, &mut out);
                let span = bounds[i]..bounds[i + len];
                match kind {
                    Match::Stop => out.stops.push(span),
                    Match::Entry => {
                        let surface = &text[span.clone()];
                        let entry = &lex.entries[surface];
                        out.tokens.push(Token {
                            surface: String::from(surface),
                            canonical: lex.resolve(surface)?,
                            tag: entry.tag,
                            span,
                            residue: false,
                        });
                    }
                }
                i += len;
            }
            None if c.is_whitespace() => {
                flush_residue(text, &bounds, &mut pending, i, &mut out);
                let start = i;
                while i < n && text[bounds[i]..].starts_with(char::is_whitespace) {
                    i += 1;
                }
                out.residue.push(bounds[start]..bounds[i]);
            }
            None => {
                pending.get_or_insert(i);
                i += 1;
            }
        }
    }
    flush_residue(text, &bounds, &mut pending, n, &mut out);
    Ok(out)
}

fn longest_match(text: &str, bounds: &[usize], i: usize, lex: &Lexicon) -> Option<(usize, Match)> {
    let max = lex.longest.min(bounds.len() - 1 - i);
    (1..=max).rev().find_map(|len| {
        let s = &text[bounds[i]..bounds[i + len]];
        if lex.stoplist.contains(s) {
            Some((len, Match::Stop))
        } else if lex.entries.contains_key(s) {
            Some((len, Match::Entry))
        } else {
            None
        }
    })
}

fn flush_residue(
    text: &str,
    bounds: &[usize],
    pending: &mut Option<usize>,
    end: usize,
    out: &mut TokenList,
) {
    if let Some(start) = pending.take() {
        let span = bounds[start]..bounds[end];
        let surface = String::from(&text[span.clone()]);
        out.residue.push(span.clone());
        out.tokens.push(Token {
            canonical: vec![surface.clone()],
            surface,
            tag: Tag::Standard,
            span,
            residue: true,
        });
    }
}

/// Surfaces (baseline behavior) or canonical forms, in token order.
pub fn canonical_stream(tokens: &TokenList, use_canonical: bool) -> Vec<String> {
    if use_canonical {
        tokens
            .tokens
            .iter()
            .flat_map(|t| t.canonical.iter().cloned())
            .collect()
    } else {
        tokens.tokens.iter().map(|t| t.surface.clone()).collect()
    }
}
