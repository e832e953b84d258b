//! Phrase-to-gesture mapping through an explicit, curatable semantic space.
//!
//! A chat phrase travels through a fixed chain of pure stages:
//!
//! * [`normalizer`] splits the raw text into text runs and symbol runs
//!   (emoji, kaomoji, repeated punctuation),
//! * [`tokenizer`] segments the text with a longest-match lexicon and
//!   canonicalizes slang and buzzwords,
//! * [`embeddings`] averages pretrained word and symbol vectors,
//! * [`conceptspace`] assigns the phrase to a curated concept (override
//!   rules first, then seed phrases, then the nearest centroid),
//! * [`gestures`] picks a gesture owned by that concept.
//!
//! [`clusterer`] proposes the initial concepts, and [`evalstats`] holds the
//! paired-Likert statistics used to compare matched and shuffled gestures.
//!
//! The crate is `no_std` and only needs `alloc`. Reading files, serving the
//! curation board and the command line live in the `semgest` crate.

#![no_std]

extern crate alloc;

pub mod clusterer;
pub mod conceptspace;
pub mod embeddings;
pub mod evalstats;
pub mod gestures;
pub mod inventory;
pub mod normalizer;
pub mod pipeline;
pub mod tokenizer;

mod math;

pub use clusterer::{cluster, score, Partition, PartitionScore};
pub use conceptspace::{
    assign, build_concepts, rank_concepts_by_frequency, Assignment, Concept, ConceptId,
    ConceptSet, ConceptStore, CurationAction, OverrideRule, RuleId,
};
pub use embeddings::{cosine, embed_phrase, PhraseVector, VectorStore};
pub use evalstats::{bh_adjust, run_contrasts, wilcoxon_signed_rank, ContrastResult, SurveyRecord};
pub use gestures::{select_gesture, shuffle_pairs, Catalog, Gesture, GestureCue};
pub use normalizer::{text_only, Mode, NormalizedPhrase, Normalizer, RawPhrase, Run, RunKind};
pub use pipeline::{Pipeline, PipelineParams, Trace};
pub use tokenizer::{canonical_stream, tokenize, Lexicon, TokenList};
