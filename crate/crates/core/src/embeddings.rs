//! Pretrained word and symbol vectors, phrase aggregation and cosine.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

/// Default weight of the symbol side of a phrase vector.
pub const DEFAULT_SYMBOL_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector dimension must be positive")]
    ZeroDimension,
    #[error("vector for {0:?} has a non-finite component")]
    NonFinite(String),
    #[error("vector for {0:?} is all zeros")]
    ZeroVector(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
    symbol_vectors: BTreeMap<String, Vec<f64>>,
}

impl VectorStore {
    pub fn new(dim: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        Ok(Self {
            dim,
            vectors: BTreeMap::new(),
            symbol_vectors: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Inserts a word vector. Returns the previous vector, if any.
    pub fn insert(&mut self, token: impl Into<String>, v: Vec<f64>) -> Result<Option<Vec<f64>>, EmbeddingError> {
        let token = token.into();
        self.check(&token, &v)?;
        Ok(self.vectors.insert(token, v))
    }

    pub fn insert_symbol(&mut self, symbol: impl Into<String>, v: Vec<f64>) -> Result<Option<Vec<f64>>, EmbeddingError> {
        let symbol = symbol.into();
        self.check(&symbol, &v)?;
        Ok(self.symbol_vectors.insert(symbol, v))
    }

    fn check(&self, key: &str, v: &[f64]) -> Result<(), EmbeddingError> {
        if v.len() != self.dim {
            return Err(EmbeddingError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFinite(String::from(key)));
        }
        if v.iter().all(|&x| x == 0.0) {
            return Err(EmbeddingError::ZeroVector(String::from(key)));
        }
        Ok(())
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn get_symbol(&self, symbol: &str) -> Option<&[f64]> {
        self.symbol_vectors.get(symbol).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn symbol_count(&self) -> usize {
        self.symbol_vectors.len()
    }

    /// Returns a copy with every vector multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let scale = |m: &BTreeMap<String, Vec<f64>>| {
            m.iter()
                .map(|(k, v)| (k.clone(), v.iter().map(|x| x * c).collect()))
                .collect()
        };
        Self {
            dim: self.dim,
            vectors: scale(&self.vectors),
            symbol_vectors: scale(&self.symbol_vectors),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhraseVector {
    pub source_id: String,
    pub v: Vec<f64>,
    /// Tokens and symbols found in the store.
    pub covered: usize,
    /// Tokens and symbols missing from the store, in input order.
    pub missed: Vec<String>,
    pub is_zero: bool,
}

impl PhraseVector {
    pub fn zero(source_id: impl Into<String>, dim: usize) -> Self {
        Self {
            source_id: source_id.into(),
            v: vec![0.0; dim],
            covered: 0,
            missed: Vec::new(),
            is_zero: true,
        }
    }
}

/// Builds the phrase vector: the mean of the unit word vectors and the mean
/// of the unit symbol vectors, mixed by `w_sym` and L2-normalized. A side
/// with nothing found drops out and the other side takes full weight.
///
/// Word vectors are unit-normalized before averaging, so rescaling any
/// single stored vector leaves phrase directions unchanged. If the found
/// vectors cancel exactly the result is the zero vector with `is_zero` set.
pub fn embed_phrase<S: AsRef<str>, T: AsRef<str>>(
    source_id: &str,
    tokens: &[S],
    symbols: &[T],
    store: &VectorStore,
    w_sym: f64,
) -> PhraseVector {
    let dim = store.dim();
    let mut missed = Vec::new();
    let (found_words, word_mean) = mean_of_units(
        tokens.iter().map(AsRef::as_ref),
        |t| store.get(t),
        dim,
        &mut missed,
    );
    let (found_symbols, symbol_mean) = mean_of_units(
        symbols.iter().map(AsRef::as_ref),
        |s| store.get_symbol(s),
        dim,
        &mut missed,
    );
    let covered = found_words + found_symbols;

    let mut v = match (word_mean, symbol_mean) {
        (Some(w), Some(s)) => w
            .iter()
            .zip(&s)
            .map(|(a, b)| (1.0 - w_sym) * a + w_sym * b)
            .collect(),
        (Some(only), None) | (None, Some(only)) => only,
        (None, None) => vec![0.0; dim],
    };
    let is_zero = !math::normalize_in_place(&mut v);
    if is_zero {
        v.iter_mut().for_each(|x| *x = 0.0);
    }
    PhraseVector {
        source_id: String::from(source_id),
        v,
        covered,
        missed,
        is_zero,
    }
}

fn mean_of_units<'a, 's>(
    items: impl Iterator<Item = &'a str>,
    lookup: impl Fn(&str) -> Option<&'s [f64]>,
    dim: usize,
    missed: &mut Vec<String>,
) -> (usize, Option<Vec<f64>>) {
    let mut sum = vec![0.0; dim];
    let mut found = 0usize;
    for item in items {
        match lookup(item) {
            Some(v) => {
                let n = math::norm(v);
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x / n;
                }
                found += 1;
            }
            None => missed.push(String::from(item)),
        }
    }
    if found == 0 {
        return (0, None);
    }
    sum.iter_mut().for_each(|s| *s /= found as f64);
    (found, Some(sum))
}

/// Cosine similarity, clamped to `[-1, 1]`. Zero vectors have similarity 0
/// with everything, themselves included.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let nu = math::norm(u);
    let nv = math::norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((math::dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}
