//! Gesture catalog, per-concept gesture selection and pair shuffling.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conceptspace::{Assignment, ConceptId, ConceptSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GestureError {
    #[error("gesture {0:?} is not in the catalog")]
    UnknownGesture(String),
    #[error("gesture {0:?} is listed twice")]
    DuplicateGesture(String),
    #[error("gesture {0:?} must have a positive duration")]
    ZeroDuration(String),
    #[error("gesture id must not be empty")]
    EmptyId,
    #[error("assignment points at unknown concept {0}")]
    UnknownConcept(ConceptId),
    #[error("shuffling needs at least two pairs, got {0}")]
    TooFewPairs(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Gesture {
    pub id: String,
    pub name: String,
    pub duration_ms: u32,
    pub tags: Vec<String>,
}

/// Gestures in file order, indexed by id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Catalog {
    gestures: Vec<Gesture>,
    index: BTreeMap<String, usize>,
}

impl Catalog {
    pub fn new(gestures: Vec<Gesture>) -> Result<Self, GestureError> {
        let mut index = BTreeMap::new();
        for (i, g) in gestures.iter().enumerate() {
            if g.id.is_empty() {
                return Err(GestureError::EmptyId);
            }
            if g.duration_ms == 0 {
                return Err(GestureError::ZeroDuration(g.id.clone()));
            }
            if index.insert(g.id.clone(), i).is_some() {
                return Err(GestureError::DuplicateGesture(g.id.clone()));
            }
        }
        Ok(Self { gestures, index })
    }

    pub fn get(&self, id: &str) -> Option<&Gesture> {
        self.index.get(id).map(|&i| &self.gestures[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn gestures(&self) -> &[Gesture] {
        &self.gestures
    }

    pub fn len(&self) -> usize {
        self.gestures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gestures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GestureCue {
    pub phrase_id: String,
    pub concept_id: Option<ConceptId>,
    pub gesture_id: String,
    pub duration_ms: u32,
    pub similarity: f64,
    /// Seed of the generator that made the choice (global seed mixed with
    /// the phrase id).
    pub selection_seed: u64,
    pub fallback: bool,
}

/// 64-bit FNV-1a.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Picks the gesture for an assignment. Unassigned phrases and concepts
/// without gestures get the fallback; otherwise one of the concept's
/// gestures is drawn uniformly by a generator seeded from `seed` and the
/// phrase id.
pub fn select_gesture(
    a: &Assignment,
    concepts: &ConceptSet,
    catalog: &Catalog,
    seed: u64,
    fallback: &str,
) -> Result<GestureCue, GestureError> {
    let fallback_gesture = catalog
        .get(fallback)
        .ok_or_else(|| GestureError::UnknownGesture(String::from(fallback)))?;
    let selection_seed = seed ^ fnv1a(a.phrase_id.as_bytes());

    let owned = match a.concept {
        None => &[][..],
        Some(id) => {
            let c = concepts.get(id).ok_or(GestureError::UnknownConcept(id))?;
            if let Some(missing) = c.gesture_ids.iter().find(|g| !catalog.contains(g)) {
                return Err(GestureError::UnknownGesture(missing.clone()));
            }
            c.gesture_ids.as_slice()
        }
    };
    let (gesture, fallback) = match owned {
        [] => (fallback_gesture, true),
        [only] => (catalog.get(only).expect("checked above"), false),
        many => {
            let mut rng = ChaCha8Rng::seed_from_u64(selection_seed);
            let pick = &many[rng.random_range(0..many.len())];
            (catalog.get(pick).expect("checked above"), false)
        }
    };
    Ok(GestureCue {
        phrase_id: a.phrase_id.clone(),
        concept_id: a.concept,
        gesture_id: gesture.id.clone(),
        duration_ms: gesture.duration_ms,
        similarity: a.similarity,
        selection_seed,
        fallback,
    })
}

const SHUFFLE_ATTEMPTS: usize = 64;

/// Re-pairs gestures with phrases by a seeded shuffle. Phrases keep their
/// order. When some permutation leaves no phrase with its original gesture
/// value, the result is such a permutation; otherwise the attempt with the
/// fewest fixed points is returned.
pub fn shuffle_pairs<P: Clone, G: Clone + Ord>(
    pairs: &[(P, G)],
    seed: u64,
) -> Result<Vec<(P, G)>, GestureError> {
    let n = pairs.len();
    if n < 2 {
        return Err(GestureError::TooFewPairs(n));
    }
    let fixed = |perm: &[usize]| perm.iter().enumerate().filter(|&(i, &j)| pairs[i].1 == pairs[j].1).count();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Vec<usize>)> = None;
    for _ in 0..SHUFFLE_ATTEMPTS {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let f = fixed(&perm);
        if best.as_ref().is_none_or(|(b, _)| f < *b) {
            best = Some((f, perm));
        }
        if f == 0 {
            break;
        }
    }
    let (f, mut perm) = best.expect("at least one attempt");

    if f > 0 {
        // Rotating the value-sorted order by the largest multiplicity moves
        // every item out of its own value block whenever that block fits
        // into half the list.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| pairs[a].1.cmp(&pairs[b].1));
        let mut m = 0;
        let mut run = 0;
        for w in 0..n {
            run = if w > 0 && pairs[order[w]].1 == pairs[order[w - 1]].1 { run + 1 } else { 1 };
            m = m.max(run);
        }
        if 2 * m <= n {
            for k in 0..n {
                perm[order[k]] = order[(k + m) % n];
            }
        }
    }

    Ok(perm
        .iter()
        .enumerate()
        .map(|(i, &j)| (pairs[i].0.clone(), pairs[j].1.clone()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conceptspace::{Concept, Provenance, Reason};
    use alloc::string::ToString;
    use alloc::vec;

    fn g(id: &str) -> Gesture {
        Gesture {
            id: id.to_string(),
            name: id.to_string(),
            duration_ms: 1000,
            tags: vec![],
        }
    }

    fn catalog() -> Catalog {
        Catalog::new(vec![g("idle"), g("g1"), g("g2"), g("g3")]).unwrap()
    }

    fn concepts() -> ConceptSet {
        let c = |id, gestures: &[&str]| Concept {
            id: ConceptId(id),
            nameplate: "c".into(),
            seeds: vec![],
            centroid: vec![1.0],
            gesture_ids: gestures.iter().map(|s| s.to_string()).collect(),
            provenance: Provenance::Manual,
        };
        ConceptSet {
            concepts: vec![c(0, &["g1"]), c(1, &["g1", "g2", "g3"]), c(2, &[]), c(3, &["nope"])],
            rules: vec![],
            next_concept_id: 4,
            next_rule_id: 0,
        }
    }

    fn assignment(concept: Option<u32>) -> Assignment {
        Assignment {
            phrase_id: "p".into(),
            concept: concept.map(ConceptId),
            similarity: 0.8,
            reason: Reason::Nearest,
            nearest: None,
        }
    }

    #[test]
    fn single_gesture() {
        let cue = select_gesture(&assignment(Some(0)), &concepts(), &catalog(), 1, "idle").unwrap();
        assert_eq!(cue.gesture_id, "g1");
        assert!(!cue.fallback);
    }

    #[test]
    fn seeded_choice_is_repeatable() {
        let a = assignment(Some(1));
        let one = select_gesture(&a, &concepts(), &catalog(), 42, "idle").unwrap();
        let two = select_gesture(&a, &concepts(), &catalog(), 42, "idle").unwrap();
        assert_eq!(one, two);
        let picked: alloc::collections::BTreeSet<String> = (0..200)
            .map(|s| select_gesture(&a, &concepts(), &catalog(), s, "idle").unwrap().gesture_id)
            .collect();
        assert_eq!(picked.len(), 3);
    }

    #[test]
    fn fallbacks() {
        for a in [assignment(None), assignment(Some(2))] {
            let cue = select_gesture(&a, &concepts(), &catalog(), 0, "idle").unwrap();
            assert_eq!((cue.gesture_id.as_str(), cue.fallback), ("idle", true));
        }
    }

    #[test]
    fn errors() {
        let c = concepts();
        assert_eq!(
            select_gesture(&assignment(Some(3)), &c, &catalog(), 0, "idle"),
            Err(GestureError::UnknownGesture("nope".into()))
        );
        assert_eq!(
            select_gesture(&assignment(None), &c, &catalog(), 0, "rest"),
            Err(GestureError::UnknownGesture("rest".into()))
        );
        assert_eq!(
            select_gesture(&assignment(Some(9)), &c, &catalog(), 0, "idle"),
            Err(GestureError::UnknownConcept(ConceptId(9)))
        );
        assert_eq!(Catalog::new(vec![g("a"), g("a")]), Err(GestureError::DuplicateGesture("a".into())));
        let mut z = g("z");
        z.duration_ms = 0;
        assert_eq!(Catalog::new(vec![z]), Err(GestureError::ZeroDuration("z".into())));
    }

    #[test]
    fn shuffle_two() {
        let out = shuffle_pairs(&[("p1", "g1"), ("p2", "g2")], 7).unwrap();
        assert_eq!(out, [("p1", "g2"), ("p2", "g1")]);
        assert_eq!(shuffle_pairs(&[("p1", "g1")], 7), Err(GestureError::TooFewPairs(1)));
    }

    #[test]
    fn shuffle_with_repeats_still_deranges() {
        let pairs: Vec<(u32, char)> = vec![(0, 'a'), (1, 'a'), (2, 'a'), (3, 'b'), (4, 'c'), (5, 'd')];
        for seed in 0..50 {
            let out = shuffle_pairs(&pairs, seed).unwrap();
            assert!(out.iter().zip(&pairs).all(|(o, p)| o.0 == p.0 && o.1 != p.1));
        }
    }

    #[test]
    fn shuffle_without_derangement_keeps_multiset() {
        let pairs = [(0, 'a'), (1, 'a'), (2, 'b')];
        let out = shuffle_pairs(&pairs, 3).unwrap();
        let mut got: Vec<char> = out.iter().map(|p| p.1).collect();
        got.sort();
        assert_eq!(got, ['a', 'a', 'b']);
        let fixed = out.iter().zip(&pairs).filter(|(o, p)| o.1 == p.1).count();
        assert_eq!(fixed, 1);
    }
}
