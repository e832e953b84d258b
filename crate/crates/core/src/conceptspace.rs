//! The semantic space between phrases and gestures.
//!
//! A [`ConceptSet`] holds curated concepts (nameplate, seed phrases,
//! centroid, gestures) and surface-pattern override rules. Phrases are
//! assigned with a fixed precedence: override rule, then exact seed match,
//! then nearest centroid above a similarity threshold, else unassigned.
//!
//! Curation is expressed as [`CurationAction`]s. A [`ConceptStore`] keeps
//! the automatically proposed starting point plus an append-only log of
//! actions, so any curated state can be rebuilt by replaying the log.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::clusterer::Partition;
use crate::embeddings::{cosine, PhraseVector};
use crate::math;
use crate::normalizer::RawPhrase;

/// Default similarity a nearest centroid needs to claim a phrase.
pub const DEFAULT_TAU: f64 = 0.5;

/// Current concept store format version.
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ConceptId(pub u32);

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct RuleId(pub u32);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Seed {
    pub id: String,
    pub text: String,
}

impl Seed {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Provenance {
    Manual,
    Auto,
    Merged,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Concept {
    pub id: ConceptId,
    pub nameplate: String,
    pub seeds: Vec<Seed>,
    /// Recomputed from the seeds whenever the set is loaded or edited.
    #[cfg_attr(feature = "serde", serde(default))]
    pub centroid: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub gesture_ids: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MatchKind {
    Exact,
    Prefix,
    Contains,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OverrideRule {
    pub id: RuleId,
    pub kind: MatchKind,
    pub surface: String,
    pub target: ConceptId,
    /// Larger wins.
    pub priority: i32,
    #[cfg_attr(feature = "serde", serde(default))]
    pub note: String,
}

impl OverrideRule {
    /// Matches against the phrase text with surrounding whitespace removed.
    pub fn matches(&self, text: &str) -> bool {
        let text = text.trim();
        match self.kind {
            MatchKind::Exact => text == self.surface,
            MatchKind::Prefix => text.starts_with(self.surface.as_str()),
            MatchKind::Contains => text.contains(self.surface.as_str()),
        }
    }
}

/// Turns phrase text into a phrase vector. Implemented by the full
/// normalize → tokenize → embed pipeline.
pub trait PhraseEmbedder {
    fn dim(&self) -> usize;
    fn embed(&self, id: &str, text: &str) -> PhraseVector;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConceptError {
    #[error("cluster {0} has several members but no nameplate")]
    MissingLabel(usize),
    #[error("phrase {0:?} is not in the corpus")]
    UnknownPhrase(String),
    #[error("unknown concept {0}")]
    UnknownId(ConceptId),
    #[error("unknown rule {0}")]
    UnknownRule(RuleId),
    #[error("phrase {0:?} is not a seed of the concept")]
    UnknownSeed(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("nameplate must not be empty")]
    EmptyNameplate,
    #[error("rule surface must not be empty")]
    EmptySurface,
    #[error("a rule with priority {0} already exists")]
    DuplicatePriority(i32),
    #[error("a concept cannot be merged with itself")]
    SelfMerge,
    #[error("seed {0:?} appears in more than one concept")]
    SeedOverlap(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConceptSet {
    /// Sorted by id.
    pub concepts: Vec<Concept>,
    pub rules: Vec<OverrideRule>,
    pub next_concept_id: u32,
    pub next_rule_id: u32,
}

impl ConceptSet {
    pub fn get(&self, id: ConceptId) -> Option<&Concept> {
        self.concepts
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(|i| &self.concepts[i])
    }

    fn get_mut(&mut self, id: ConceptId) -> Result<&mut Concept, ConceptError> {
        match self.concepts.binary_search_by_key(&id, |c| c.id) {
            Ok(i) => Ok(&mut self.concepts[i]),
            Err(_) => Err(ConceptError::UnknownId(id)),
        }
    }

    /// First concept (smallest id) with this nameplate.
    pub fn by_nameplate(&self, nameplate: &str) -> Option<&Concept> {
        self.concepts.iter().find(|c| c.nameplate == nameplate)
    }

    pub fn rule(&self, id: RuleId) -> Option<&OverrideRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Recomputes every centroid from its seeds.
    pub fn recompute_centroids(&mut self, embedder: &dyn PhraseEmbedder) {
        for c in &mut self.concepts {
            c.centroid = centroid_of(&c.seeds, embedder);
        }
    }

    /// Seeds are disjoint across concepts and nameplates are nonempty.
    pub fn check(&self) -> Result<(), ConceptError> {
        let mut seen = BTreeSet::new();
        for c in &self.concepts {
            if c.nameplate.is_empty() {
                return Err(ConceptError::EmptyNameplate);
            }
            for s in &c.seeds {
                if !seen.insert(s.id.as_str()) {
                    return Err(ConceptError::SeedOverlap(s.id.clone()));
                }
            }
        }
        Ok(())
    }

    fn insert_concept(&mut self, concept: Concept) {
        let at = self.concepts.partition_point(|c| c.id < concept.id);
        self.concepts.insert(at, concept);
    }

    fn allocate_concept_id(&mut self) -> ConceptId {
        let id = ConceptId(self.next_concept_id);
        self.next_concept_id += 1;
        id
    }
}

/// Normalized mean of the nonzero seed vectors; zero when none embed.
pub fn centroid_of(seeds: &[Seed], embedder: &dyn PhraseEmbedder) -> Vec<f64> {
    let mut sum = vec![0.0; embedder.dim()];
    let mut any = false;
    for seed in seeds {
        let pv = embedder.embed(&seed.id, &seed.text);
        if pv.is_zero {
            continue;
        }
        any = true;
        for (s, x) in sum.iter_mut().zip(&pv.v) {
            *s += x;
        }
    }
    if !any || !math::normalize_in_place(&mut sum) {
        sum.iter_mut().for_each(|x| *x = 0.0);
    }
    sum
}

/// One automatically proposed cluster, as recorded for replay.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OriginCluster {
    pub seeds: Vec<Seed>,
    pub nameplate: Option<String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub gesture_ids: Vec<String>,
}

/// A rule present before any curation. `target` is the index of a cluster
/// in the origin, which is also the id its concept receives.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OriginRule {
    pub kind: MatchKind,
    pub surface: String,
    pub target: ConceptId,
    pub priority: i32,
    #[cfg_attr(feature = "serde", serde(default))]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Origin {
    pub clusters: Vec<OriginCluster>,
    /// Unlabeled multi-member clusters borrow their first phrase as label.
    #[cfg_attr(feature = "serde", serde(default))]
    pub default_labels: bool,
    #[cfg_attr(feature = "serde", serde(default))]
    pub rules: Vec<OriginRule>,
}

impl Origin {
    /// Attaches texts and nameplates to a partition. `nameplates` is keyed by
    /// cluster index in partition order.
    pub fn from_partition(
        partition: &Partition,
        nameplates: &BTreeMap<usize, String>,
        corpus: &BTreeMap<String, String>,
        default_labels: bool,
    ) -> Result<Self, ConceptError> {
        let clusters = partition
            .clusters
            .iter()
            .enumerate()
            .map(|(i, members)| {
                let seeds = members
                    .iter()
                    .map(|id| {
                        corpus
                            .get(id)
                            .map(|text| Seed::new(id.clone(), text.clone()))
                            .ok_or_else(|| ConceptError::UnknownPhrase(id.clone()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(OriginCluster {
                    seeds,
                    nameplate: nameplates.get(&i).cloned(),
                    gesture_ids: Vec::new(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            clusters,
            default_labels,
            rules: Vec::new(),
        })
    }

    /// One concept per cluster, ids assigned in cluster order, followed by
    /// the origin rules in order.
    pub fn build(&self, embedder: &dyn PhraseEmbedder) -> Result<ConceptSet, ConceptError> {
        let mut set = ConceptSet::default();
        for (i, cluster) in self.clusters.iter().enumerate() {
            let nameplate = match &cluster.nameplate {
                Some(label) if !label.trim().is_empty() => label.clone(),
                _ if cluster.seeds.len() == 1 || self.default_labels => cluster
                    .seeds
                    .first()
                    .map(|s| s.text.clone())
                    .filter(|t| !t.is_empty())
                    .ok_or(ConceptError::MissingLabel(i))?,
                _ => return Err(ConceptError::MissingLabel(i)),
            };
            let id = set.allocate_concept_id();
            set.concepts.push(Concept {
                id,
                nameplate,
                centroid: centroid_of(&cluster.seeds, embedder),
                seeds: cluster.seeds.clone(),
                gesture_ids: Vec::new(),
                provenance: Provenance::Auto,
            });
            let concept = set.get_mut(id)?;
            for g in &cluster.gesture_ids {
                if !concept.gesture_ids.contains(g) {
                    concept.gesture_ids.push(g.clone());
                }
            }
        }
        set.check()?;
        for r in &self.rules {
            let action = CurationAction::AddRule {
                kind: r.kind,
                surface: r.surface.clone(),
                target: r.target,
                priority: r.priority,
                note: r.note.clone(),
            };
            set = apply_curation(&set, &action, embedder)?;
        }
        Ok(set)
    }
}

/// Builds one concept per cluster. Singletons without a nameplate are named
/// after their phrase; unlabeled multi-member clusters are an error unless
/// `default_labels` is set.
pub fn build_concepts(
    partition: &Partition,
    nameplates: &BTreeMap<usize, String>,
    corpus: &BTreeMap<String, String>,
    embedder: &dyn PhraseEmbedder,
    default_labels: bool,
) -> Result<ConceptSet, ConceptError> {
    Origin::from_partition(partition, nameplates, corpus, default_labels)?.build(embedder)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Reason {
    Rule(RuleId),
    SeedExact,
    Nearest,
    None,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Assignment {
    pub phrase_id: String,
    pub concept: Option<ConceptId>,
    /// 1 for rule and seed hits; the centroid cosine otherwise. For an
    /// unassigned phrase this is the best similarity seen, floored at 0.
    pub similarity: f64,
    pub reason: Reason,
    /// Best centroid regardless of the threshold.
    pub nearest: Option<ConceptId>,
}

impl Assignment {
    pub fn is_assigned(&self) -> bool {
        self.concept.is_some()
    }
}

/// Assigns a phrase with the precedence rule → seed → nearest centroid.
/// Rules pointing at missing concepts are ignored. Ties go to the smaller
/// concept id.
pub fn assign(
    phrase: &RawPhrase,
    vector: &PhraseVector,
    concepts: &ConceptSet,
    rules: &[OverrideRule],
    tau: f64,
) -> Assignment {
    let nearest = nearest_centroid(vector, concepts);
    let nearest_id = nearest.map(|(id, _)| id);

    let rule = rules
        .iter()
        .filter(|r| concepts.get(r.target).is_some() && r.matches(&phrase.text))
        .max_by_key(|r| (r.priority, core::cmp::Reverse(r.id)));
    if let Some(rule) = rule {
        return Assignment {
            phrase_id: phrase.id.clone(),
            concept: Some(rule.target),
            similarity: 1.0,
            reason: Reason::Rule(rule.id),
            nearest: nearest_id,
        };
    }

    let text = phrase.text.trim();
    if let Some(c) = concepts
        .concepts
        .iter()
        .find(|c| c.seeds.iter().any(|s| s.text.trim() == text))
    {
        return Assignment {
            phrase_id: phrase.id.clone(),
            concept: Some(c.id),
            similarity: 1.0,
            reason: Reason::SeedExact,
            nearest: nearest_id,
        };
    }

    match nearest {
        Some((id, sim)) if sim >= tau => Assignment {
            phrase_id: phrase.id.clone(),
            concept: Some(id),
            similarity: sim,
            reason: Reason::Nearest,
            nearest: Some(id),
        },
        _ => Assignment {
            phrase_id: phrase.id.clone(),
            concept: None,
            similarity: nearest.map_or(0.0, |(_, s)| s.max(0.0)),
            reason: Reason::None,
            nearest: nearest_id,
        },
    }
}

/// Most similar nonzero centroid, if any has positive similarity.
fn nearest_centroid(vector: &PhraseVector, concepts: &ConceptSet) -> Option<(ConceptId, f64)> {
    if vector.is_zero {
        return None;
    }
    let mut best: Option<(ConceptId, f64)> = None;
    for c in &concepts.concepts {
        let Ok(sim) = cosine(&vector.v, &c.centroid) else {
            continue;
        };
        if c.centroid.iter().all(|&x| x == 0.0) {
            continue;
        }
        // concepts are sorted by id, so strict > keeps the smaller id on ties
        if best.is_none_or(|(_, b)| sim > b) {
            best = Some((c.id, sim));
        }
    }
    best.filter(|&(_, sim)| sim > 0.0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "action", rename_all = "snake_case"))]
pub enum CurationAction {
    /// `b` is folded into `a`; rules that targeted `b` now target `a`.
    Merge { a: ConceptId, b: ConceptId },
    /// Moves the listed seeds into a new concept.
    Split {
        id: ConceptId,
        members: Vec<String>,
        #[cfg_attr(feature = "serde", serde(default))]
        nameplate: Option<String>,
    },
    Rename { id: ConceptId, nameplate: String },
    AttachGesture { id: ConceptId, gesture: String },
    AddRule {
        kind: MatchKind,
        surface: String,
        target: ConceptId,
        priority: i32,
        #[cfg_attr(feature = "serde", serde(default))]
        note: String,
    },
    RemoveRule { id: RuleId },
    MoveSeed {
        phrase: String,
        from: ConceptId,
        to: ConceptId,
    },
}

/// Applies one curation action, returning the new set. Centroids of the
/// touched concepts are recomputed from their seeds.
pub fn apply_curation(
    concepts: &ConceptSet,
    action: &CurationAction,
    embedder: &dyn PhraseEmbedder,
) -> Result<ConceptSet, ConceptError> {
    let mut set = concepts.clone();
    match action {
        CurationAction::Merge { a, b } => {
            if a == b {
                return Err(ConceptError::SelfMerge);
            }
            set.get_mut(*a)?;
            let absorbed = set.get_mut(*b)?.clone();
            set.concepts.retain(|c| c.id != *b);
            let target = set.get_mut(*a)?;
            target.seeds.extend(absorbed.seeds);
            for g in absorbed.gesture_ids {
                if !target.gesture_ids.contains(&g) {
                    target.gesture_ids.push(g);
                }
            }
            target.provenance = Provenance::Merged;
            target.centroid = centroid_of(&target.seeds, embedder);
            for rule in &mut set.rules {
                if rule.target == *b {
                    rule.target = *a;
                }
            }
        }
        CurationAction::Split { id, members, nameplate } => {
            let source = set.get_mut(*id)?;
            let wanted: BTreeSet<&str> = members.iter().map(String::as_str).collect();
            if wanted.is_empty() {
                return Err(ConceptError::InvalidSplit(String::from("no members given")));
            }
            if wanted.len() != members.len() {
                return Err(ConceptError::InvalidSplit(String::from("duplicate members")));
            }
            if let Some(missing) = wanted.iter().find(|m| !source.seeds.iter().any(|s| s.id == **m)) {
                return Err(ConceptError::UnknownSeed(String::from(*missing)));
            }
            if wanted.len() == source.seeds.len() {
                return Err(ConceptError::InvalidSplit(String::from(
                    "members must be a proper subset",
                )));
            }
            let (moved, kept): (Vec<Seed>, Vec<Seed>) = core::mem::take(&mut source.seeds)
                .into_iter()
                .partition(|s| wanted.contains(s.id.as_str()));
            source.seeds = kept;
            source.centroid = centroid_of(&source.seeds, embedder);
            let nameplate = match nameplate {
                Some(n) if n.trim().is_empty() => return Err(ConceptError::EmptyNameplate),
                Some(n) => n.clone(),
                None => moved[0].text.clone(),
            };
            let new_id = set.allocate_concept_id();
            set.insert_concept(Concept {
                id: new_id,
                nameplate,
                centroid: centroid_of(&moved, embedder),
                seeds: moved,
                gesture_ids: Vec::new(),
                provenance: Provenance::Manual,
            });
        }
        CurationAction::Rename { id, nameplate } => {
            if nameplate.trim().is_empty() {
                return Err(ConceptError::EmptyNameplate);
            }
            set.get_mut(*id)?.nameplate = nameplate.clone();
        }
        CurationAction::AttachGesture { id, gesture } => {
            let c = set.get_mut(*id)?;
            if !c.gesture_ids.contains(gesture) {
                c.gesture_ids.push(gesture.clone());
            }
        }
        CurationAction::AddRule {
            kind,
            surface,
            target,
            priority,
            note,
        } => {
            if surface.is_empty() {
                return Err(ConceptError::EmptySurface);
            }
            set.get_mut(*target)?;
            if set.rules.iter().any(|r| r.priority == *priority) {
                return Err(ConceptError::DuplicatePriority(*priority));
            }
            let id = RuleId(set.next_rule_id);
            set.next_rule_id += 1;
            set.rules.push(OverrideRule {
                id,
                kind: *kind,
                surface: surface.clone(),
                target: *target,
                priority: *priority,
                note: note.clone(),
            });
        }
        CurationAction::RemoveRule { id } => {
            let before = set.rules.len();
            set.rules.retain(|r| r.id != *id);
            if set.rules.len() == before {
                return Err(ConceptError::UnknownRule(*id));
            }
        }
        CurationAction::MoveSeed { phrase, from, to } => {
            set.get_mut(*to)?;
            let source = set.get_mut(*from)?;
            let pos = source
                .seeds
                .iter()
                .position(|s| s.id == *phrase)
                .ok_or_else(|| ConceptError::UnknownSeed(phrase.clone()))?;
            if from == to {
                return Ok(set);
            }
            let seed = source.seeds.remove(pos);
            source.centroid = centroid_of(&source.seeds, embedder);
            let dest = set.get_mut(*to)?;
            dest.seeds.push(seed);
            dest.centroid = centroid_of(&dest.seeds, embedder);
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogEntry {
    pub seq: u64,
    /// Seconds since the Unix epoch, supplied by the caller.
    pub timestamp: u64,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub action: CurationAction,
}

/// Concepts plus the history needed to rebuild them.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConceptStore {
    pub version: u32,
    pub origin: Origin,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub set: ConceptSet,
    pub curation_log: Vec<LogEntry>,
}

impl ConceptStore {
    pub fn new(origin: Origin, embedder: &dyn PhraseEmbedder) -> Result<Self, ConceptError> {
        let set = origin.build(embedder)?;
        Ok(Self {
            version: STORE_VERSION,
            origin,
            set,
            curation_log: Vec::new(),
        })
    }

    /// Applies an action and appends it to the log. Nothing changes when
    /// the action fails.
    pub fn apply(
        &mut self,
        action: CurationAction,
        timestamp: u64,
        embedder: &dyn PhraseEmbedder,
    ) -> Result<&LogEntry, ConceptError> {
        self.set = apply_curation(&self.set, &action, embedder)?;
        let seq = self.curation_log.last().map_or(1, |e| e.seq + 1);
        self.curation_log.push(LogEntry {
            seq,
            timestamp,
            action,
        });
        Ok(self.curation_log.last().expect("entry just pushed"))
    }

    /// Rebuilds a store from its origin and a log.
    pub fn replay(
        origin: Origin,
        log: &[LogEntry],
        embedder: &dyn PhraseEmbedder,
    ) -> Result<Self, ConceptError> {
        let mut store = Self::new(origin, embedder)?;
        for entry in log {
            store.set = apply_curation(&store.set, &entry.action, embedder)?;
            store.curation_log.push(entry.clone());
        }
        Ok(store)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankedConcept {
    pub id: ConceptId,
    pub nameplate: String,
    pub count: usize,
}

/// Concepts ordered by how many assignments they received (descending,
/// ties by id). With `require_gesture`, concepts without gestures are
/// dropped before ranking. Concepts missing from `concepts` are skipped.
pub fn rank_concepts_by_frequency(
    assignments: &[Assignment],
    concepts: &ConceptSet,
    require_gesture: bool,
) -> Vec<RankedConcept> {
    let mut counts: BTreeMap<ConceptId, usize> = BTreeMap::new();
    for id in assignments.iter().filter_map(|a| a.concept) {
        *counts.entry(id).or_default() += 1;
    }
    let mut ranked: Vec<RankedConcept> = counts
        .into_iter()
        .filter_map(|(id, count)| {
            let c = concepts.get(id)?;
            (!require_gesture || !c.gesture_ids.is_empty()).then(|| RankedConcept {
                id,
                nameplate: c.nameplate.clone(),
                count,
            })
        })
        .collect();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then(a.id.cmp(&b.id)));
    ranked
}
