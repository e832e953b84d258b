//! The full chain: normalize → tokenize → embed → assign → select gesture.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::conceptspace::{assign, Assignment, ConceptSet, PhraseEmbedder, DEFAULT_TAU};
use crate::embeddings::{embed_phrase, PhraseVector, VectorStore, DEFAULT_SYMBOL_WEIGHT};
use crate::gestures::{select_gesture, Catalog, GestureCue, GestureError};
use crate::normalizer::{Mode, NormalizedPhrase, Normalizer, RawPhrase};
use crate::tokenizer::{canonical_stream, tokenize, Lexicon, LexiconError, TokenList};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Gesture(#[from] GestureError),
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineParams {
    pub mode: Mode,
    /// Feed canonical forms (true) or raw surfaces to the embedder.
    pub use_canonical: bool,
    pub w_sym: f64,
    pub tau: f64,
    pub rules_enabled: bool,
    pub seed: u64,
    pub fallback: String,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            mode: Mode::Strip,
            use_canonical: true,
            w_sym: DEFAULT_SYMBOL_WEIGHT,
            tau: DEFAULT_TAU,
            rules_enabled: true,
            seed: 0,
            fallback: String::from("idle"),
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<(), PipelineError> {
        for (name, value) in [("w_sym", self.w_sym), ("tau", self.tau)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(PipelineError::OutOfRange {
                    name,
                    value,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(())
    }
}

/// Every intermediate of one phrase's trip through the pipeline.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trace {
    pub phrase: RawPhrase,
    pub normalized: NormalizedPhrase,
    /// Text handed to the tokenizer.
    pub text: String,
    pub tokens: TokenList,
    /// What the embedder looked up as words.
    pub stream: Vec<String>,
    pub symbols: Vec<String>,
    pub vector: PhraseVector,
    pub assignment: Assignment,
    pub cue: GestureCue,
}

struct Front {
    normalized: NormalizedPhrase,
    text: String,
    tokens: TokenList,
    stream: Vec<String>,
    symbols: Vec<String>,
    vector: PhraseVector,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    normalizer: Normalizer,
    lexicon: Lexicon,
    store: VectorStore,
    concepts: ConceptSet,
    catalog: Catalog,
    params: PipelineParams,
}

impl Pipeline {
    /// Validates the lexicon, parameters and fallback gesture, then
    /// recomputes concept centroids with this pipeline's embedder.
    pub fn new(
        normalizer: Normalizer,
        lexicon: Lexicon,
        store: VectorStore,
        concepts: ConceptSet,
        catalog: Catalog,
        params: PipelineParams,
    ) -> Result<Self, PipelineError> {
        lexicon.validate()?;
        params.validate()?;
        if !catalog.contains(&params.fallback) {
            return Err(GestureError::UnknownGesture(params.fallback.clone()).into());
        }
        let mut p = Self {
            normalizer,
            lexicon,
            store,
            concepts: ConceptSet::default(),
            catalog,
            params,
        };
        p.set_concepts(concepts);
        Ok(p)
    }

    pub fn params(&self) -> &PipelineParams {
        &self.params
    }

    pub fn concepts(&self) -> &ConceptSet {
        &self.concepts
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn store(&self) -> &VectorStore {
        &self.store
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Replaces the concept set, recomputing centroids.
    pub fn set_concepts(&mut self, mut concepts: ConceptSet) {
        concepts.recompute_centroids(self);
        self.concepts = concepts;
    }

    fn front(&self, phrase: &RawPhrase) -> Result<Front, LexiconError> {
        let normalized = self.normalizer.normalize(phrase, self.params.mode);
        let text = normalized.text_only();
        let tokens = tokenize(&text, &self.lexicon)?;
        let stream = canonical_stream(&tokens, self.params.use_canonical);
        let symbols: Vec<String> = normalized.symbols().into_iter().map(String::from).collect();
        let vector = embed_phrase(&phrase.id, &stream, &symbols, &self.store, self.params.w_sym);
        Ok(Front {
            normalized,
            text,
            tokens,
            stream,
            symbols,
            vector,
        })
    }

    pub fn embed(&self, phrase: &RawPhrase) -> Result<PhraseVector, PipelineError> {
        Ok(self.front(phrase)?.vector)
    }

    pub fn assign(&self, phrase: &RawPhrase) -> Result<Assignment, PipelineError> {
        let vector = self.embed(phrase)?;
        Ok(self.assign_vector(phrase, &vector))
    }

    fn assign_vector(&self, phrase: &RawPhrase, vector: &PhraseVector) -> Assignment {
        let rules: &[_] = if self.params.rules_enabled {
            &self.concepts.rules
        } else {
            &[]
        };
        assign(phrase, vector, &self.concepts, rules, self.params.tau)
    }

    pub fn trace(&self, phrase: &RawPhrase) -> Result<Trace, PipelineError> {
        let Front {
            normalized,
            text,
            tokens,
            stream,
            symbols,
            vector,
        } = self.front(phrase)?;
        let assignment = self.assign_vector(phrase, &vector);
        let cue = select_gesture(
            &assignment,
            &self.concepts,
            &self.catalog,
            self.params.seed,
            &self.params.fallback,
        )?;
        Ok(Trace {
            phrase: phrase.clone(),
            normalized,
            text,
            tokens,
            stream,
            symbols,
            vector,
            assignment,
            cue,
        })
    }

    pub fn map_phrase_to_gesture(&self, phrase: &RawPhrase) -> Result<GestureCue, PipelineError> {
        Ok(self.trace(phrase)?.cue)
    }
}

impl PhraseEmbedder for Pipeline {
    fn dim(&self) -> usize {
        self.store.dim()
    }

    /// Falls back to the zero vector if tokenizing fails, which a validated
    /// lexicon rules out.
    fn embed(&self, id: &str, text: &str) -> PhraseVector {
        Pipeline::embed(self, &RawPhrase::new(id, text)).unwrap_or_else(|_| PhraseVector::zero(id, self.store.dim()))
    }
}
