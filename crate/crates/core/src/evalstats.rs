//! Paired Likert statistics: per-cell score sums, the Wilcoxon signed-rank
//! test and Benjamini-Hochberg adjustment.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::math;

/// Largest sample size for which p values are computed exactly.
pub const EXACT_LIMIT: usize = 20;

pub const DEFAULT_ALPHA: f64 = 0.05;

pub const DEFAULT_CLIPS_PER_CELL: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Question {
    Natural,
    Humanlike,
    Conscious,
    Lifelike,
    Elegant,
}

impl Question {
    pub const ALL: [Question; 5] = [
        Question::Natural,
        Question::Humanlike,
        Question::Conscious,
        Question::Lifelike,
        Question::Elegant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Question::Natural => "Natural",
            Question::Humanlike => "Humanlike",
            Question::Conscious => "Conscious",
            Question::Lifelike => "Lifelike",
            Question::Elegant => "Elegant",
        }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown value {0:?}")]
pub struct ParseLabelError(pub String);

impl FromStr for Question {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Question::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ParseLabelError(String::from(s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Condition {
    Matched,
    Shuffled,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Matched => "Matched",
            Condition::Shuffled => "Shuffled",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Condition::Matched, Condition::Shuffled]
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ParseLabelError(String::from(s)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurveyRecord {
    pub participant: String,
    pub question: Question,
    pub condition: Condition,
    pub clip: u32,
    /// 1 to 5.
    pub score: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub participant: String,
    pub question: Question,
    pub condition: Condition,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.participant, self.question, self.condition)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IncompleteCell {
    pub cell: Cell,
    pub clips: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("score {score} out of range 1..=5 for {cell} clip {clip}")]
    InvalidScore { cell: Cell, clip: u32, score: u8 },
    #[error("duplicate record for {cell} clip {clip}")]
    Duplicate { cell: Cell, clip: u32 },
    #[error("{} cells do not have the expected clip count{}", .0.len(), describe(.0))]
    IncompleteData(Vec<IncompleteCell>),
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no samples")]
    Empty,
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("p value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("sample contains a non-finite value")]
    NonFinite,
}

fn describe(cells: &[IncompleteCell]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for c in cells.iter().take(5) {
        let _ = write!(s, "; {} has {}", c.cell, c.clips);
    }
    if cells.len() > 5 {
        s.push_str("; ...");
    }
    s
}

/// Sums scores over clips per (participant, question, condition). Every
/// participant seen must have exactly `clips_per_cell` clips in all ten
/// question/condition cells.
pub fn aggregate(records: &[SurveyRecord], clips_per_cell: usize) -> Result<BTreeMap<Cell, u32>, StatsError> {
    let mut sums: BTreeMap<Cell, (u32, BTreeSet<u32>)> = BTreeMap::new();
    let mut participants = BTreeSet::new();
    for r in records {
        let cell = Cell {
            participant: r.participant.clone(),
            question: r.question,
            condition: r.condition,
        };
        if !(1..=5).contains(&r.score) {
            return Err(StatsError::InvalidScore {
                cell,
                clip: r.clip,
                score: r.score,
            });
        }
        participants.insert(r.participant.clone());
        let entry = sums.entry(cell.clone()).or_default();
        if !entry.1.insert(r.clip) {
            return Err(StatsError::Duplicate { cell, clip: r.clip });
        }
        entry.0 += u32::from(r.score);
    }

    let mut incomplete = Vec::new();
    for p in &participants {
        for question in Question::ALL {
            for condition in [Condition::Matched, Condition::Shuffled] {
                let cell = Cell {
                    participant: p.clone(),
                    question,
                    condition,
                };
                let clips = sums.get(&cell).map_or(0, |e| e.1.len());
                if clips != clips_per_cell {
                    incomplete.push(IncompleteCell { cell, clips });
                }
            }
        }
    }
    if !incomplete.is_empty() {
        return Err(StatsError::IncompleteData(incomplete));
    }
    Ok(sums.into_iter().map(|(k, (sum, _))| (k, sum)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Tails {
    #[default]
    Two,
    /// Alternative: x tends to exceed y.
    Greater,
    /// Alternative: x tends to fall below y.
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WilcoxonResult {
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// min(W+, W-).
    pub w: f64,
    pub p: f64,
    pub exact: bool,
}

/// Ranks of `values` (all positive) doubled so that mid-ranks stay integral,
/// plus the sizes of tie groups.
fn doubled_ranks(values: &[f64]) -> (Vec<u64>, Vec<u64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j hold 1-based ranks i+1..=j+1; their mean doubled
        let r2 = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = r2;
        }
        if j > i {
            ties.push((j - i + 1) as u64);
        }
        i = j + 1;
    }
    (ranks, ties)
}

/// Number of sign assignments for each doubled W+ value.
fn signed_rank_counts(ranks2: &[u64]) -> Vec<u64> {
    let total: u64 = ranks2.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in ranks2 {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

/// Wilcoxon signed-rank test on paired samples. Zero differences are
/// dropped; tied magnitudes share mid-ranks. The p value is exact for up to
/// [`EXACT_LIMIT`] nonzero pairs and uses the normal approximation with tie
/// and continuity corrections beyond that. Two-tailed p is twice the
/// smaller tail, capped at 1.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64], tails: Tails) -> Result<WilcoxonResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(StatsError::Empty);
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    if d.is_empty() {
        return Err(StatsError::AllZeroDifferences);
    }
    let n = d.len();
    let magnitudes: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let (ranks2, ties) = doubled_ranks(&magnitudes);
    let total2: u64 = ranks2.iter().sum();
    let plus2: u64 = d.iter().zip(&ranks2).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let minus2 = total2 - plus2;

    let (p, exact) = if n <= EXACT_LIMIT {
        let counts = signed_rank_counts(&ranks2);
        let all = (1u64 << n) as f64;
        // P(W+ <= t) with t in doubled units
        let cdf = |t: u64| counts[..=t as usize].iter().sum::<u64>() as f64 / all;
        let p = match tails {
            Tails::Two => (2.0 * cdf(plus2.min(minus2))).min(1.0),
            Tails::Greater => cdf(minus2),
            Tails::Less => cdf(plus2),
        };
        (p, true)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        let sd = math::sqrt(var);
        let w_plus = plus2 as f64 / 2.0;
        let p = if sd == 0.0 {
            1.0
        } else {
            match tails {
                Tails::Two => {
                    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / sd;
                    (2.0 * math::normal_cdf(-z)).min(1.0)
                }
                Tails::Greater => math::normal_cdf(-(w_plus - mean - 0.5) / sd),
                Tails::Less => math::normal_cdf((w_plus - mean + 0.5) / sd),
            }
        };
        (p, false)
    };

    let w_plus = plus2 as f64 / 2.0;
    let w_minus = minus2 as f64 / 2.0;
    Ok(WilcoxonResult {
        n,
        w_plus,
        w_minus,
        w: w_plus.min(w_minus),
        p: p.clamp(0.0, 1.0),
        exact,
    })
}

/// Benjamini-Hochberg step-up adjustment, returned in input order.
pub fn bh_adjust(p_values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if let Some(&bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::OutOfRange(bad));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in order.iter().enumerate().rev() {
        let scaled = (m as f64 / (rank + 1) as f64) * p_values[i];
        running = running.min(scaled).min(1.0);
        adjusted[i] = running;
    }
    Ok(adjusted)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContrastResult {
    pub question: Question,
    /// Participants with a nonzero Matched - Shuffled difference.
    pub n: usize,
    pub w: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub significant: bool,
}

/// One two-tailed test per question on Matched vs Shuffled sums paired by
/// participant, then BH across the questions. A question where every
/// participant scored both conditions equally gets n = 0, W = 0 and p = 1.
pub fn run_contrasts(
    records: &[SurveyRecord],
    alpha: f64,
    clips_per_cell: usize,
) -> Result<Vec<ContrastResult>, StatsError> {
    let sums = aggregate(records, clips_per_cell)?;
    let participants: BTreeSet<&str> = sums.keys().map(|c| c.participant.as_str()).collect();
    if participants.is_empty() {
        return Err(StatsError::Empty);
    }
    let sum_of = |p: &str, question, condition| {
        let cell = Cell {
            participant: String::from(p),
            question,
            condition,
        };
        f64::from(sums[&cell])
    };

    let mut raw = Vec::with_capacity(Question::ALL.len());
    for q in Question::ALL {
        let x: Vec<f64> = participants.iter().map(|p| sum_of(p, q, Condition::Matched)).collect();
        let y: Vec<f64> = participants.iter().map(|p| sum_of(p, q, Condition::Shuffled)).collect();
        let (n, w, p) = match wilcoxon_signed_rank(&x, &y, Tails::Two) {
            Ok(r) => (r.n, r.w, r.p),
            Err(StatsError::AllZeroDifferences) => (0, 0.0, 1.0),
            Err(e) => return Err(e),
        };
        raw.push((q, n, w, p));
    }
    let p_raw: Vec<f64> = raw.iter().map(|r| r.3).collect();
    let adjusted = bh_adjust(&p_raw)?;
    Ok(raw
        .into_iter()
        .zip(adjusted)
        .map(|((question, n, w, p_raw), p_adjusted)| ContrastResult {
            question,
            n,
            w,
            p_raw,
            p_adjusted,
            significant: p_adjusted < alpha,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn two(x: &[f64], y: &[f64]) -> WilcoxonResult {
        wilcoxon_signed_rank(x, y, Tails::Two).unwrap()
    }

    #[test]
    fn five_positive_distinct() {
        let r = two(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 5]);
        assert_eq!(r.p, 0.0625);
        assert_eq!((r.w, r.w_plus, r.n), (0.0, 15.0, 5));
    }

    #[test]
    fn three_mixed_by_hand() {
        // d = (+3, -1, +2): ranks 3, 1, 2; W- = 1. Of the 8 sign patterns,
        // W+ in {0, 1} or {5, 6} happens for 4, so p = 0.5.
        let r = two(&[3.0, 0.0, 2.0], &[0.0, 1.0, 0.0]);
        assert_eq!((r.w_plus, r.w_minus), (5.0, 1.0));
        assert_eq!(r.p, 0.5);
    }

    #[test]
    fn zero_differences() {
        assert_eq!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0], Tails::Two),
            Err(StatsError::AllZeroDifferences)
        );
        let r = two(&[1.0, 5.0, 2.0], &[1.0, 4.0, 0.0]);
        assert_eq!(r.n, 2);
    }

    #[test]
    fn ties_use_midranks() {
        // |d| = 1, 1, 2: ranks 1.5, 1.5, 3
        let r = two(&[1.0, 0.0, 2.0], &[0.0, 1.0, 0.0]);
        assert_eq!((r.w_plus, r.w_minus), (4.5, 1.5));
    }

    #[test]
    fn one_tailed() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [0.0; 5];
        assert_eq!(wilcoxon_signed_rank(&x, &y, Tails::Greater).unwrap().p, 1.0 / 32.0);
        assert_eq!(wilcoxon_signed_rank(&x, &y, Tails::Less).unwrap().p, 1.0);
    }

    #[test]
    fn normal_approximation_beyond_limit() {
        let x: Vec<f64> = (1..=25).map(f64::from).collect();
        let y = vec![0.0; 25];
        let r = two(&x, &y);
        assert!(!r.exact);
        // W+ = 325, mean 162.5, var 25*26*51/24 = 1381.25
        let z = (162.5 - 0.5) / libm::sqrt(1381.25);
        let expect = libm::erfc(z / core::f64::consts::SQRT_2);
        assert!((r.p - expect).abs() < 1e-15, "{} vs {}", r.p, expect);
    }

    #[test]
    fn input_errors() {
        assert_eq!(wilcoxon_signed_rank(&[1.0], &[], Tails::Two), Err(StatsError::LengthMismatch(1, 0)));
        assert_eq!(wilcoxon_signed_rank(&[], &[], Tails::Two), Err(StatsError::Empty));
        assert_eq!(wilcoxon_signed_rank(&[f64::NAN], &[0.0], Tails::Two), Err(StatsError::NonFinite));
    }

    #[test]
    fn bh_cases() {
        let adj = bh_adjust(&[0.01, 0.02, 0.03, 0.04, 0.05]).unwrap();
        assert_eq!(adj, [0.05; 5]);
        assert_eq!(bh_adjust(&[0.5]).unwrap(), [0.5]);
        assert_eq!(bh_adjust(&[0.04, 0.01]).unwrap(), [0.04, 0.02]);
        assert_eq!(bh_adjust(&[]).unwrap(), Vec::<f64>::new());
        assert_eq!(bh_adjust(&[1.5]), Err(StatsError::OutOfRange(1.5)));
        assert!(bh_adjust(&[f64::NAN]).is_err());
    }

    fn record(p: &str, q: Question, c: Condition, clip: u32, score: u8) -> SurveyRecord {
        SurveyRecord {
            participant: p.into(),
            question: q,
            condition: c,
            clip,
            score,
        }
    }

    fn full(participants: usize, score: impl Fn(usize, Question, Condition, u32) -> u8) -> Vec<SurveyRecord> {
        let mut out = Vec::new();
        for p in 0..participants {
            for q in Question::ALL {
                for c in [Condition::Matched, Condition::Shuffled] {
                    for clip in 0..2 {
                        out.push(record(&format!("P{p:02}"), q, c, clip, score(p, q, c, clip)));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn aggregate_sums_clips() {
        let mut recs = full(1, |_, _, _, _| 1);
        let sums = aggregate(&recs, 2).unwrap();
        assert_eq!(sums.len(), 10);
        assert!(sums.values().all(|&s| s == 2));

        recs[0].score = 4;
        recs[1].score = 5;
        let sums = aggregate(&recs, 2).unwrap();
        let cell = Cell {
            participant: "P00".into(),
            question: Question::Natural,
            condition: Condition::Matched,
        };
        assert_eq!(sums[&cell], 9);
    }

    #[test]
    fn aggregate_errors() {
        let mut recs = full(2, |_, _, _, _| 3);
        recs.remove(0);
        match aggregate(&recs, 2) {
            Err(StatsError::IncompleteData(cells)) => {
                assert_eq!(cells.len(), 1);
                assert_eq!(cells[0].clips, 1);
            }
            other => panic!("{other:?}"),
        }
        let mut recs = full(1, |_, _, _, _| 3);
        recs[3].clip = recs[2].clip;
        assert!(matches!(aggregate(&recs, 2), Err(StatsError::Duplicate { .. })));
        let mut recs = full(1, |_, _, _, _| 3);
        recs[0].score = 6;
        assert!(matches!(aggregate(&recs, 2), Err(StatsError::InvalidScore { .. })));
    }

    #[test]
    fn contrasts_detect_constant_shift() {
        let recs = full(13, |p, q, c, _| match (q, c) {
            (Question::Natural, Condition::Matched) => 3 + (p % 2) as u8 + 1,
            (_, _) => 2 + (p % 2) as u8,
        });
        let res = run_contrasts(&recs, DEFAULT_ALPHA, 2).unwrap();
        let natural = &res[0];
        assert_eq!(natural.n, 13);
        assert_eq!(natural.p_raw, 2.0 / 8192.0);
        assert!(natural.significant);
        assert!(res[1..].iter().all(|r| !r.significant && r.p_raw == 1.0 && r.n == 0));
    }

    #[test]
    fn parse_labels() {
        assert_eq!("lifelike".parse::<Question>().unwrap(), Question::Lifelike);
        assert_eq!(" Shuffled".parse::<Condition>().unwrap(), Condition::Shuffled);
        assert!("Fake".parse::<Question>().is_err());
    }
}
