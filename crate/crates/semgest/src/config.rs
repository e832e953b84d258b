//! Declarative pipeline configuration (TOML) with flag overrides.

use std::path::{Path, PathBuf};

use log::debug;
use semgest_core::clusterer::DEFAULT_THETA;
use semgest_core::conceptspace::{ConceptSet, ConceptStore, STORE_VERSION};
use semgest_core::gestures::{Catalog, Gesture};
use semgest_core::inventory::CodePointSet;
use semgest_core::tokenizer::Lexicon;
use semgest_core::{Mode, Normalizer, Pipeline, PipelineParams};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::formats;

/// Duration of the gesture synthesized when no catalog is configured.
const DEFAULT_FALLBACK_MS: u32 = 1000;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathsFile {
    vectors: Option<PathBuf>,
    symbol_vectors: Option<PathBuf>,
    #[serde(default)]
    lexicons: Vec<PathBuf>,
    #[serde(default)]
    stoplists: Vec<PathBuf>,
    gestures: Option<PathBuf>,
    concepts: Option<PathBuf>,
    corpus: Option<PathBuf>,
    emoji: Option<PathBuf>,
    face_parts: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    mode: Option<Mode>,
    use_canonical: Option<bool>,
    w_sym: Option<f64>,
    theta: Option<f64>,
    tau: Option<f64>,
    seed: Option<u64>,
    fallback: Option<String>,
    rules: Option<bool>,
    dim: Option<usize>,
    #[serde(default)]
    paths: PathsFile,
}

/// Values given on the command line; each one beats the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub use_canonical: Option<bool>,
    pub w_sym: Option<f64>,
    pub theta: Option<f64>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub fallback: Option<String>,
    pub rules: Option<bool>,
    pub concepts: Option<PathBuf>,
}

/// Resolved file locations, absolute or relative to the working directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Paths {
    pub vectors: Option<PathBuf>,
    pub symbol_vectors: Option<PathBuf>,
    pub lexicons: Vec<PathBuf>,
    pub stoplists: Vec<PathBuf>,
    pub gestures: Option<PathBuf>,
    /// Concept definitions (`.toml`) or a concept store (`.json`).
    pub concepts: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub emoji: Option<PathBuf>,
    pub face_parts: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: PipelineParams,
    pub theta: f64,
    pub dim: Option<usize>,
    pub paths: Paths,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            params: PipelineParams::default(),
            theta: DEFAULT_THETA,
            dim: None,
            paths: Paths::default(),
        }
    }
}

impl Config {
    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = formats::read_text(path)?;
        let file: ConfigFile = toml::from_str(&text).map_err(|e| Error::invalid(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_file(file, base, overrides)
    }

    pub fn from_overrides(overrides: &Overrides) -> Result<Self> {
        Self::from_file(ConfigFile::default(), Path::new(""), overrides)
    }

    fn from_file(file: ConfigFile, base: &Path, o: &Overrides) -> Result<Self> {
        let rel = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let d = PipelineParams::default();
        let params = PipelineParams {
            mode: o.mode.or(file.mode).unwrap_or(d.mode),
            use_canonical: o.use_canonical.or(file.use_canonical).unwrap_or(d.use_canonical),
            w_sym: o.w_sym.or(file.w_sym).unwrap_or(d.w_sym),
            tau: o.tau.or(file.tau).unwrap_or(d.tau),
            rules_enabled: o.rules.or(file.rules).unwrap_or(d.rules_enabled),
            seed: o.seed.or(file.seed).unwrap_or(d.seed),
            fallback: o.fallback.clone().or(file.fallback).unwrap_or(d.fallback),
        };
        let f = file.paths;
        let config = Self {
            params,
            theta: o.theta.or(file.theta).unwrap_or(DEFAULT_THETA),
            dim: file.dim,
            paths: Paths {
                vectors: f.vectors.map(rel),
                symbol_vectors: f.symbol_vectors.map(rel),
                lexicons: f.lexicons.into_iter().map(rel).collect(),
                stoplists: f.stoplists.into_iter().map(rel).collect(),
                gestures: f.gestures.map(rel),
                concepts: o.concepts.clone().or(f.concepts.map(rel)),
                corpus: f.corpus.map(rel),
                emoji: f.emoji.map(rel),
                face_parts: f.face_parts.map(rel),
            },
        };
        config.validate()?;
        Ok(config)
    }

    /// Range checks plus existence of every referenced file.
    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("theta", self.theta, 2.0),
            ("tau", self.params.tau, 1.0),
            ("w_sym", self.params.w_sym, 1.0),
        ];
        for (name, value, hi) in ranges {
            if !(0.0..=hi).contains(&value) {
                return Err(Error::Config(format!("{name} = {value} is outside [0, {hi}]")));
            }
        }
        let p = &self.paths;
        let all = p
            .vectors
            .iter()
            .chain(&p.symbol_vectors)
            .chain(&p.lexicons)
            .chain(&p.stoplists)
            .chain(&p.gestures)
            .chain(&p.concepts)
            .chain(&p.corpus)
            .chain(&p.emoji)
            .chain(&p.face_parts);
        for path in all {
            if !path.is_file() {
                return Err(Error::Config(format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn normalizer(&self) -> Result<Normalizer> {
        let load = |p: &Option<PathBuf>, builtin: fn() -> CodePointSet| -> Result<CodePointSet> {
            match p {
                Some(path) => CodePointSet::parse(&formats::read_text(path)?).map_err(|e| Error::parse(path, e.line, e.message)),
                None => Ok(builtin()),
            }
        };
        Ok(Normalizer::new(
            load(&self.paths.emoji, CodePointSet::builtin_emoji)?,
            load(&self.paths.face_parts, CodePointSet::builtin_face_parts)?,
        ))
    }

    /// All lexicon files layered in order (later files win), then every
    /// stoplist.
    pub fn lexicon(&self) -> Result<Lexicon> {
        let mut lex = Lexicon::new();
        for p in &self.paths.lexicons {
            lex.extend(formats::load_lexicon(p)?);
        }
        for p in &self.paths.stoplists {
            lex.extend(formats::load_stoplist(p)?);
        }
        lex.validate()?;
        Ok(lex)
    }

    pub fn catalog(&self) -> Result<Catalog> {
        match &self.paths.gestures {
            Some(p) => formats::load_catalog(p),
            None => Ok(Catalog::new(vec![Gesture {
                id: self.params.fallback.clone(),
                name: self.params.fallback.clone(),
                duration_ms: DEFAULT_FALLBACK_MS,
                tags: Vec::new(),
            }])?),
        }
    }

    /// Pipeline without concepts.
    pub fn bare_pipeline(&self) -> Result<Pipeline> {
        let vectors = self
            .paths
            .vectors
            .as_deref()
            .ok_or_else(|| Error::Config("paths.vectors is required".into()))?;
        let store = formats::load_vector_store(vectors, self.paths.symbol_vectors.as_deref(), self.dim)?;
        Ok(Pipeline::new(
            self.normalizer()?,
            self.lexicon()?,
            store,
            ConceptSet::default(),
            self.catalog()?,
            self.params.clone(),
        )?)
    }

    /// The concept store named by `paths.concepts`, built from definitions
    /// or loaded and verified.
    pub fn concept_store(&self, pipeline: &Pipeline) -> Result<Option<ConceptStore>> {
        let Some(path) = &self.paths.concepts else {
            return Ok(None);
        };
        let store = if path.extension().is_some_and(|e| e == "toml") {
            ConceptStore::new(formats::load_concept_defs(path)?, pipeline)?
        } else {
            let store = formats::load_store(path)?;
            verify_store(&store, pipeline).map_err(|e| Error::invalid(path, e))?;
            store
        };
        check_gestures(&store.set, pipeline.catalog()).map_err(|e| Error::invalid(path, e))?;
        debug!("{} concepts from {}", store.set.len(), path.display());
        Ok(Some(store))
    }

    /// Full pipeline plus the concept store it was built from, if any.
    pub fn pipeline(&self) -> Result<(Pipeline, Option<ConceptStore>)> {
        let mut pipeline = self.bare_pipeline()?;
        let store = self.concept_store(&pipeline)?;
        if let Some(s) = &store {
            pipeline.set_concepts(s.set.clone());
        }
        Ok((pipeline, store))
    }
}

/// A loaded store must be consistent and equal to the replay of its own
/// log; anything else is treated as corruption.
pub fn verify_store(store: &ConceptStore, pipeline: &Pipeline) -> std::result::Result<(), String> {
    if store.version != STORE_VERSION {
        return Err(format!("unsupported store version {}", store.version));
    }
    store.set.check().map_err(|e| e.to_string())?;
    for (i, e) in store.curation_log.iter().enumerate() {
        if e.seq != i as u64 + 1 {
            return Err(format!("curation log entry {} has seq {}", i + 1, e.seq));
        }
    }
    let replayed =
        ConceptStore::replay(store.origin.clone(), &store.curation_log, pipeline).map_err(|e| format!("replay failed: {e}"))?;
    let mut current = store.set.clone();
    current.recompute_centroids(pipeline);
    if replayed.set != current {
        return Err("concepts differ from the replay of the curation log".into());
    }
    Ok(())
}

pub fn check_gestures(set: &ConceptSet, catalog: &Catalog) -> std::result::Result<(), String> {
    for c in &set.concepts {
        if let Some(g) = c.gesture_ids.iter().find(|g| !catalog.contains(g)) {
            return Err(format!("concept {} ({}) uses unknown gesture {g:?}", c.id, c.nameplate));
        }
    }
    Ok(())
}
