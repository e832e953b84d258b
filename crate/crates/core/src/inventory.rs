//! Code point inventories (emoji, kaomoji face parts).
//!
//! The text format is one entry per line: a hex code point (`1F340`,
//! `U+1F340`), a hex range (`1F300..1F321`), or a single literal character.
//! Hex needs at least four digits, so a lone `A` is the letter, not U+000A.
//! `#` starts a comment, so the character itself is written as `0023`.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("inventory line {line}: {message}")]
pub struct InventoryError {
    pub line: usize,
    pub message: String,
}

/// A set of code points stored as sorted, non-overlapping ranges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CodePointSet {
    ranges: Vec<(u32, u32)>,
}

const EMOJI_DATA: &str = include_str!("../data/emoji.txt");
const FACE_PART_DATA: &str = include_str!("../data/face_parts.txt");

impl CodePointSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The vendored emoji inventory.
    pub fn builtin_emoji() -> Self {
        Self::parse(EMOJI_DATA).expect("vendored emoji inventory parses")
    }

    /// The default kaomoji face-part set.
    pub fn builtin_face_parts() -> Self {
        Self::parse(FACE_PART_DATA).expect("vendored face-part inventory parses")
    }

    pub fn from_ranges<I: IntoIterator<Item = RangeInclusive<u32>>>(ranges: I) -> Self {
        let mut set = Self::new();
        for r in ranges {
            set.ranges.push((*r.start(), *r.end()));
        }
        set.coalesce();
        set
    }

    pub fn parse(text: &str) -> Result<Self, InventoryError> {
        let mut set = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            // a literal '#' has to be written as 0023
            let entry = raw.split('#').next().unwrap_or_default();
            let entry = entry.trim();
            if entry.is_empty() {
                continue;
            }
            let (lo, hi) = parse_entry(entry).ok_or_else(|| InventoryError {
                line,
                message: alloc::format!("unrecognized entry {entry:?}"),
            })?;
            if lo > hi {
                return Err(InventoryError {
                    line,
                    message: alloc::format!("invalid range {entry:?}"),
                });
            }
            set.ranges.push((lo, hi));
        }
        set.coalesce();
        Ok(set)
    }

    pub fn insert(&mut self, c: char) {
        self.ranges.push((c as u32, c as u32));
        self.coalesce();
    }

    pub fn contains(&self, c: char) -> bool {
        let cp = c as u32;
        self.ranges
            .binary_search_by(|&(lo, hi)| {
                if hi < cp {
                    core::cmp::Ordering::Less
                } else if lo > cp {
                    core::cmp::Ordering::Greater
                } else {
                    core::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    pub fn ranges(&self) -> impl Iterator<Item = RangeInclusive<u32>> + '_ {
        self.ranges.iter().map(|&(lo, hi)| lo..=hi)
    }

    /// Every valid `char` in the set, in order.
    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.ranges
            .iter()
            .flat_map(|&(lo, hi)| lo..=hi)
            .filter_map(char::from_u32)
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    fn coalesce(&mut self) {
        self.ranges.sort_unstable();
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(self.ranges.len());
        for &(lo, hi) in &self.ranges {
            match out.last_mut() {
                Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        self.ranges = out;
    }
}

fn parse_hex(s: &str) -> Option<u32> {
    let s = s
        .strip_prefix("U+")
        .or_else(|| s.strip_prefix("u+"))
        .unwrap_or(s);
    if s.len() < 4 || !s.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    u32::from_str_radix(s, 16).ok().filter(|&v| v <= 0x10FFFF)
}

fn parse_entry(entry: &str) -> Option<(u32, u32)> {
    if let Some((a, b)) = entry.split_once("..") {
        return Some((parse_hex(a.trim())?, parse_hex(b.trim())?));
    }
    if let Some(v) = parse_hex(entry) {
        return Some((v, v));
    }
    let mut chars = entry.chars();
    let c = chars.next()?;
    if chars.next().is_some() {
        return None;
    }
    Some((c as u32, c as u32))
}
