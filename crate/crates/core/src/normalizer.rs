//! Lossless decomposition of a chat phrase into text and symbol runs.
//!
//! Every code point of the input ends up in exactly one [`Run`]:
//!
//! * `Emoji`: one emoji sequence (base plus variation selectors, skin tone
//!   modifiers, ZWJ continuations, tags), or a keycap or flag pair.
//! * `Kaomoji`: a bracketed face such as `(*'ω'*)` with optional arms
//!   (`o(*≧≦)o`), or a bracket-less span holding at least two face parts.
//! * `Emphasis`: two or more identical punctuation marks (`!!!`, `♪♪`, `ーー`).
//! * `Punct`: any other single punctuation or symbol code point.
//! * `Text`: everything else, merged into maximal runs.
//!
//! Classification never depends on the surrounding words: an emoji is an
//! emoji because of its code points. In [`Mode::Strip`] every non-text run
//! is flagged as dropped, which reproduces the classic "preprocessed phrase"
//! that keeps only words.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use unicode_general_category::{get_general_category, GeneralCategory};

use crate::inventory::CodePointSet;

/// Longest kaomoji core, in code points.
pub const MAX_KAOMOJI_LEN: usize = 20;

/// Longest run of arm characters attached to either side of a bracket face.
const MAX_ARM_LEN: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawPhrase {
    pub id: String,
    pub text: String,
}

impl RawPhrase {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Mode {
    /// Symbol runs are kept in the segmentation but flagged as dropped.
    #[default]
    Strip,
    /// Symbol runs are kept and offered to the embedder.
    Extract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RunKind {
    Text,
    Emoji,
    Kaomoji,
    Emphasis,
    Punct,
}

impl RunKind {
    pub fn is_symbol(self) -> bool {
        self != RunKind::Text
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Run {
    pub kind: RunKind,
    pub content: String,
    /// Byte offset of the run in the original text.
    pub position: usize,
    pub dropped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormalizedPhrase {
    pub source_id: String,
    pub mode: Mode,
    pub runs: Vec<Run>,
}

impl NormalizedPhrase {
    /// Joins every run, dropped or not. Equals the original text.
    pub fn reconstruct(&self) -> String {
        self.runs.iter().map(|r| r.content.as_str()).collect()
    }

    /// Contents of the symbol runs that survive the mode.
    pub fn symbols(&self) -> Vec<&str> {
        self.runs
            .iter()
            .filter(|r| r.kind.is_symbol() && !r.dropped)
            .map(|r| r.content.as_str())
            .collect()
    }

    pub fn text_only(&self) -> String {
        text_only(self)
    }
}

/// Concatenates the text runs with whitespace collapsed and trimmed.
pub fn text_only(n: &NormalizedPhrase) -> String {
    let mut out = String::new();
    let mut pending_space = false;
    for run in n.runs.iter().filter(|r| r.kind == RunKind::Text) {
        for c in run.content.chars() {
            if c.is_whitespace() {
                pending_space = true;
            } else {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(c);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Normalizer {
    emoji: CodePointSet,
    face_parts: CodePointSet,
}

impl Default for Normalizer {
    fn default() -> Self {
        Self::new(
            CodePointSet::builtin_emoji(),
            CodePointSet::builtin_face_parts(),
        )
    }
}

impl Normalizer {
    pub fn new(emoji: CodePointSet, face_parts: CodePointSet) -> Self {
        Self { emoji, face_parts }
    }

    pub fn emoji(&self) -> &CodePointSet {
        &self.emoji
    }

    pub fn face_parts(&self) -> &CodePointSet {
        &self.face_parts
    }

    pub fn normalize(&self, phrase: &RawPhrase, mode: Mode) -> NormalizedPhrase {
        let text = phrase.text.as_str();
        let runs = self
            .segment(text)
            .into_iter()
            .map(|(kind, bytes)| Run {
                kind,
                content: String::from(&text[bytes.clone()]),
                position: bytes.start,
                dropped: mode == Mode::Strip && kind.is_symbol(),
            })
            .collect();
        NormalizedPhrase {
            source_id: phrase.id.clone(),
            mode,
            runs,
        }
    }

    /// Splits `text` into `(kind, byte range)` pieces that tile it.
    pub fn segment(&self, text: &str) -> Vec<(RunKind, Range<usize>)> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut labels = Labels::new(chars.len());

        self.mark_emoji(&chars, &mut labels);
        self.mark_bracket_kaomoji(&chars, &mut labels);
        self.mark_face_kaomoji(&chars, &mut labels);
        mark_punctuation(&chars, &mut labels);

        let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
        labels
            .into_pieces()
            .into_iter()
            .map(|(kind, r)| (kind, byte_at(r.start)..byte_at(r.end)))
            .collect()
    }

    fn mark_emoji(&self, chars: &[(usize, char)], labels: &mut Labels) {
        let mut i = 0;
        while i < chars.len() {
            match self.emoji_len(chars, i) {
                Some(len) => {
                    labels.set(i..i + len, RunKind::Emoji);
                    i += len;
                }
                None => i += 1,
            }
        }
    }

    fn emoji_len(&self, chars: &[(usize, char)], i: usize) -> Option<usize> {
        let at = |k: usize| chars.get(k).map(|&(_, c)| c);
        let c = at(i)?;
        if matches!(c, '0'..='9' | '#' | '*') {
            return match (at(i + 1), at(i + 2)) {
                (Some('\u{20E3}'), _) => Some(2),
                (Some('\u{FE0F}'), Some('\u{20E3}')) => Some(3),
                _ => None,
            };
        }
        if !self.emoji.contains(c) {
            return None;
        }
        if is_regional_indicator(c) {
            return Some(if at(i + 1).is_some_and(is_regional_indicator) {
                2
            } else {
                1
            });
        }
        let mut len = 1;
        loop {
            match at(i + len) {
                Some(m) if is_emoji_modifier(m) => len += 1,
                Some('\u{200D}') => match at(i + len + 1) {
                    Some(next) if self.emoji.contains(next) && !is_emoji_modifier(next) => {
                        len += 2
                    }
                    _ => break,
                },
                _ => break,
            }
        }
        Some(len)
    }

    fn mark_bracket_kaomoji(&self, chars: &[(usize, char)], labels: &mut Labels) {
        let mut i = 0;
        while i < chars.len() {
            if labels.is_free(i) && is_open_bracket(chars[i].1) {
                if let Some(close) = self.bracket_face_end(chars, labels, i) {
                    let start = self.left_arm_start(chars, labels, i);
                    let end = self.right_arm_end(chars, labels, close);
                    labels.set(start..end, RunKind::Kaomoji);
                    i = end;
                    continue;
                }
            }
            i += 1;
        }
    }

    /// Index of the bracket that closes the face opened at `open`, if the
    /// bracketed span qualifies as a face.
    fn bracket_face_end(&self, chars: &[(usize, char)], labels: &Labels, open: usize) -> Option<usize> {
        let mut depth = 0usize;
        let mut close = None;
        for (k, &(_, c)) in chars.iter().enumerate().skip(open) {
            if k - open >= MAX_KAOMOJI_LEN || !labels.is_free(k) || c == '\n' {
                return None;
            }
            if is_open_bracket(c) {
                depth += 1;
            } else if is_close_bracket(c) {
                depth -= 1;
                if depth == 0 {
                    close = Some(k);
                    break;
                }
            }
        }
        let close = close?;
        let interior = &chars[open + 1..close];
        let clean = interior.iter().all(|&(_, c)| self.allowed_in_face(c));
        let facelike = interior
            .iter()
            .any(|&(_, c)| self.face_parts.contains(c) || (!c.is_alphanumeric() && !c.is_whitespace()));
        (clean && facelike).then_some(close)
    }

    fn left_arm_start(&self, chars: &[(usize, char)], labels: &Labels, open: usize) -> usize {
        let mut k = open;
        while k > 0 && labels.is_free(k - 1) && is_arm(chars[k - 1].1) {
            k -= 1;
        }
        let bounded = k == 0 || !chars[k - 1].1.is_alphanumeric();
        if open - k <= MAX_ARM_LEN && bounded {
            k
        } else {
            open
        }
    }

    fn right_arm_end(&self, chars: &[(usize, char)], labels: &Labels, close: usize) -> usize {
        let mut k = close + 1;
        while k < chars.len() && labels.is_free(k) && is_arm(chars[k].1) {
            k += 1;
        }
        let bounded = k == chars.len() || !chars[k].1.is_alphanumeric();
        if k - close - 1 <= MAX_ARM_LEN && bounded {
            k
        } else {
            close + 1
        }
    }

    fn mark_face_kaomoji(&self, chars: &[(usize, char)], labels: &mut Labels) {
        let n = chars.len();
        let mut eligible: Vec<bool> = (0..n)
            .map(|k| {
                let c = chars[k].1;
                labels.is_free(k) && !c.is_whitespace() && self.allowed_in_face(c)
            })
            .collect();

        // Two or more word characters in a row form a word, not part of a face.
        let wordish = |c: char| c.is_alphanumeric() && !self.is_face_exempt(c);
        let mut k = 0;
        while k < n {
            if eligible[k] && wordish(chars[k].1) {
                let start = k;
                while k < n && eligible[k] && wordish(chars[k].1) {
                    k += 1;
                }
                if k - start >= 2 {
                    eligible[start..k].iter_mut().for_each(|e| *e = false);
                }
            } else {
                k += 1;
            }
        }

        let mut k = 0;
        while k < n {
            if !eligible[k] {
                k += 1;
                continue;
            }
            let start = k;
            while k < n && eligible[k] {
                k += 1;
            }
            let span = &chars[start..k];
            let faces = span.iter().filter(|&&(_, c)| self.face_parts.contains(c)).count();
            let has_symbol = span.iter().any(|&(_, c)| is_punct_or_symbol(c));
            let repeated = span.iter().all(|&(_, c)| c == span[0].1);
            if span.len() <= MAX_KAOMOJI_LEN && faces >= 2 && has_symbol && !repeated {
                labels.set(start..k, RunKind::Kaomoji);
            }
        }
    }

    /// Kana and ideographs may not appear inside a face unless they are
    /// face parts themselves or one of the small exempt marks.
    fn allowed_in_face(&self, c: char) -> bool {
        !is_kana_or_ideograph(c) || self.is_face_exempt(c)
    }

    fn is_face_exempt(&self, c: char) -> bool {
        c == 'っ' || c == 'ー' || self.face_parts.contains(c)
    }
}

fn mark_punctuation(chars: &[(usize, char)], labels: &mut Labels) {
    let mut i = 0;
    while i < chars.len() {
        if !labels.is_free(i) {
            i += 1;
            continue;
        }
        let c = chars[i].1;
        if is_emphasis_char(c) {
            let mut j = i + 1;
            while j < chars.len() && labels.is_free(j) && chars[j].1 == c {
                j += 1;
            }
            if j - i >= 2 {
                labels.set(i..j, RunKind::Emphasis);
                i = j;
                continue;
            }
        }
        if is_punct_or_symbol(c) {
            labels.set(i..i + 1, RunKind::Punct);
        }
        i += 1;
    }
}

/// Per-code-point labels. Consecutive code points belong to one run only
/// when they were labeled together (non-text) or are both unlabeled (text).
struct Labels {
    kind: Vec<Option<RunKind>>,
    group: Vec<usize>,
    next_group: usize,
}

impl Labels {
    fn new(n: usize) -> Self {
        Self {
            kind: vec![None; n],
            group: vec![0; n],
            next_group: 1,
        }
    }

    fn is_free(&self, i: usize) -> bool {
        self.kind[i].is_none()
    }

    fn set(&mut self, range: Range<usize>, kind: RunKind) {
        let g = self.next_group;
        self.next_group += 1;
        for i in range {
            self.kind[i] = Some(kind);
            self.group[i] = g;
        }
    }

    fn into_pieces(self) -> Vec<(RunKind, Range<usize>)> {
        let mut pieces: Vec<(RunKind, Range<usize>)> = Vec::new();
        for i in 0..self.kind.len() {
            let kind = self.kind[i].unwrap_or(RunKind::Text);
            let joins = i > 0 && self.kind[i - 1] == self.kind[i] && self.group[i - 1] == self.group[i];
            match pieces.last_mut() {
                Some(last) if joins => last.1.end = i + 1,
                _ => pieces.push((kind, i..i + 1)),
            }
        }
        pieces
    }
}

pub(crate) fn is_punct_or_symbol(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
            | MathSymbol
            | CurrencySymbol
            | ModifierSymbol
            | OtherSymbol
    )
}

fn is_emphasis_char(c: char) -> bool {
    is_punct_or_symbol(c) || matches!(c, 'ー' | '～' | '〜' | 'ｰ')
}

fn is_kana_or_ideograph(c: char) -> bool {
    matches!(c as u32,
        0x3005..=0x3007
        | 0x303B..=0x303C
        | 0x3040..=0x309F
        | 0x30A0..=0x30FF
        | 0x31F0..=0x31FF
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0xFF66..=0xFF9F
        | 0x20000..=0x3134F)
}

fn is_open_bracket(c: char) -> bool {
    matches!(c, '(' | '（' | '[' | '【')
}

fn is_close_bracket(c: char) -> bool {
    matches!(c, ')' | '）' | ']' | '】')
}

fn is_arm(c: char) -> bool {
    c.is_ascii_alphanumeric()
        || ('\u{0370}'..='\u{03FF}').contains(&c)
        || matches!(
            c,
            '\\' | '/' | '＼' | '／' | 'ヽ' | 'ノ' | 'ヾ' | 'ゞ' | '٩' | '۶' | '┐' | '└' | '┘' | '┌' | '⊂' | '⊃'
        )
}

fn is_regional_indicator(c: char) -> bool {
    ('\u{1F1E6}'..='\u{1F1FF}').contains(&c)
}

/// Code points that extend the preceding emoji in place.
fn is_emoji_modifier(c: char) -> bool {
    matches!(c,
        '\u{FE0E}' | '\u{FE0F}' | '\u{20E3}'
        | '\u{1F3FB}'..='\u{1F3FF}'
        | '\u{E0020}'..='\u{E007F}')
}
