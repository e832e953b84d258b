//! Readers and writers for every on-disk format.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use log::warn;
use semgest_core::conceptspace::{
    Assignment, ConceptId, ConceptSet, ConceptStore, MatchKind, Origin, OriginCluster, OriginRule, Seed,
};
use semgest_core::evalstats::{ContrastResult, SurveyRecord};
use semgest_core::gestures::{Catalog, Gesture};
use semgest_core::tokenizer::{Lexicon, Tag};
use semgest_core::{RawPhrase, VectorStore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Blank lines and lines starting with `# ` are skipped.
fn is_skippable(line: &str) -> bool {
    line.trim().is_empty() || line.starts_with("# ") || line == "#"
}

/// Corpus: one phrase per line, `id<TAB>text`. A line without a tab is all
/// text and gets the id `L<line number>`.
pub fn parse_corpus(text: &str, path: &Path) -> Result<Vec<RawPhrase>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if is_skippable(line) {
            continue;
        }
        let (id, body) = match line.split_once('\t') {
            Some((id, body)) => (id.trim().to_string(), body.to_string()),
            None => (format!("L{n}"), line.to_string()),
        };
        if id.is_empty() {
            return Err(Error::parse(path, n, "empty phrase id"));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::parse(path, n, format!("duplicate phrase id {id:?}")));
        }
        out.push(RawPhrase::new(id, body));
    }
    Ok(out)
}

pub fn load_corpus(path: &Path) -> Result<Vec<RawPhrase>> {
    parse_corpus(&read_text(path)?, path)
}

pub fn corpus_map(corpus: &[RawPhrase]) -> BTreeMap<String, String> {
    corpus.iter().map(|p| (p.id.clone(), p.text.clone())).collect()
}

fn parse_tag(s: &str) -> Option<Tag> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" | "standard" => Some(Tag::Standard),
        "slang" => Some(Tag::Slang),
        "buzzword" => Some(Tag::Buzzword),
        _ => None,
    }
}

/// Lexicon TSV: `surface<TAB>canonicals<TAB>tag`. Canonicals are space
/// separated and may be empty (the surface is its own canonical form); the
/// tag defaults to standard.
pub fn parse_lexicon(text: &str, path: &Path) -> Result<Lexicon> {
    let mut lex = Lexicon::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if is_skippable(line) {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() > 3 {
            return Err(Error::parse(path, n, "expected at most 3 columns"));
        }
        let surface = cols[0].trim();
        let canonical: Vec<String> = cols
            .get(1)
            .map(|c| c.split_whitespace().map(String::from).collect())
            .unwrap_or_default();
        let tag_field = cols.get(2).copied().unwrap_or("");
        let tag = parse_tag(tag_field).ok_or_else(|| Error::parse(path, n, format!("unknown tag {tag_field:?}")))?;
        lex.insert(surface, canonical, tag)
            .map_err(|e| Error::parse(path, n, e.to_string()))?;
    }
    Ok(lex)
}

/// Stoplist: one surface per line.
pub fn parse_stoplist(text: &str, path: &Path) -> Result<Lexicon> {
    let mut lex = Lexicon::new();
    for (i, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        lex.add_stop(line.trim())
            .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
    }
    Ok(lex)
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    parse_lexicon(&read_text(path)?, path)
}

pub fn load_stoplist(path: &Path) -> Result<Lexicon> {
    parse_stoplist(&read_text(path)?, path)
}

/// Rows of a word-vector text file.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorRows {
    pub dim: usize,
    pub rows: Vec<(String, Vec<f64>)>,
}

/// Vector text format: an optional `count dim` header, then
/// `token v1 .. v_dim` per line.
pub fn parse_vectors(text: &str, expect_dim: Option<usize>, path: &Path) -> Result<VectorRows> {
    let mut dim = expect_dim;
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    let mut declared_count = None;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if i == 0 && fields.len() == 2 {
            if let (Ok(count), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                if let Some(e) = expect_dim.filter(|&e| e != d) {
                    return Err(Error::parse(path, n, format!("dimension mismatch: header says {d}, expected {e}")));
                }
                dim = Some(d);
                declared_count = Some(count);
                continue;
            }
        }
        let token = fields[0].to_string();
        let values = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::parse(path, n, format!("bad number: {e}")))?;
        let d = *dim.get_or_insert(values.len());
        if values.len() != d {
            return Err(Error::parse(
                path,
                n,
                format!("dimension mismatch: expected {d}, got {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(path, n, "non-finite component"));
        }
        if !seen.insert(token.clone()) {
            warn!("{}:{n}: duplicate token {token:?}, later row wins", path.display());
            rows.retain(|(t, _)| *t != token);
        }
        rows.push((token, values));
    }
    if let Some(c) = declared_count.filter(|&c| c != rows.len()) {
        warn!("{}: header declares {c} rows, found {}", path.display(), rows.len());
    }
    let dim = dim.ok_or_else(|| Error::invalid(path, "empty vector file and no expected dimension"))?;
    if rows.is_empty() {
        warn!("{}: no vectors", path.display());
    }
    Ok(VectorRows { dim, rows })
}

/// Loads word vectors and, optionally, symbol vectors of the same dimension.
pub fn load_vector_store(words: &Path, symbols: Option<&Path>, expect_dim: Option<usize>) -> Result<VectorStore> {
    let w = parse_vectors(&read_text(words)?, expect_dim, words)?;
    let mut store = VectorStore::new(w.dim)?;
    for (t, v) in w.rows {
        store.insert(t, v)?;
    }
    if let Some(path) = symbols {
        let s = parse_vectors(&read_text(path)?, Some(w.dim), path)?;
        for (t, v) in s.rows {
            store.insert_symbol(t, v)?;
        }
    }
    Ok(store)
}

/// Gesture catalog TSV: `id<TAB>name<TAB>duration_ms<TAB>tags`, tags comma
/// separated. A header row starting with `id` is skipped.
pub fn parse_catalog(text: &str, path: &Path) -> Result<Catalog> {
    let mut gestures = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if is_skippable(line) || (gestures.is_empty() && line.starts_with("id\t")) {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if !(3..=4).contains(&cols.len()) {
            return Err(Error::parse(path, n, "expected id, name, duration_ms[, tags]"));
        }
        let duration_ms = cols[2]
            .trim()
            .parse()
            .map_err(|e| Error::parse(path, n, format!("duration_ms: {e}")))?;
        let tags = cols
            .get(3)
            .map(|t| t.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect())
            .unwrap_or_default();
        gestures.push(Gesture {
            id: cols[0].trim().to_string(),
            name: cols[1].trim().to_string(),
            duration_ms,
            tags,
        });
    }
    Catalog::new(gestures).map_err(|e| Error::invalid(path, e.to_string()))
}

pub fn load_catalog(path: &Path) -> Result<Catalog> {
    parse_catalog(&read_text(path)?, path)
}

#[derive(Debug, Deserialize)]
struct SurveyRow {
    participant: String,
    question: String,
    condition: String,
    clip: u32,
    score: u8,
}

/// Survey CSV with header `participant,question,condition,clip,score`.
pub fn parse_survey(text: &str, path: &Path) -> Result<Vec<SurveyRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::parse(path, 1, e.to_string()))?.clone();
    let expected = ["participant", "question", "condition", "clip", "score"];
    if headers.iter().ne(expected) {
        return Err(Error::parse(path, 1, format!("header must be {}", expected.join(","))));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<SurveyRow>() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = out.len() + 2;
        out.push(SurveyRecord {
            participant: row.participant,
            question: row.question.parse().map_err(|e| Error::parse(path, line, format!("question: {e}")))?,
            condition: row.condition.parse().map_err(|e| Error::parse(path, line, format!("condition: {e}")))?,
            clip: row.clip,
            score: row.score,
        });
    }
    Ok(out)
}

pub fn load_survey(path: &Path) -> Result<Vec<SurveyRecord>> {
    parse_survey(&read_text(path)?, path)
}

pub fn write_survey<W: Write>(w: W, records: &[SurveyRecord]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["participant", "question", "condition", "clip", "score"])?;
    for r in records {
        wtr.write_record([
            r.participant.clone(),
            r.question.to_string(),
            r.condition.to_string(),
            r.clip.to_string(),
            r.score.to_string(),
        ])?;
    }
    wtr.flush()
}

/// Labels file: `phrase_id<TAB>nameplate`; the cluster holding the phrase
/// gets the nameplate.
pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let (id, label) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, i + 1, "expected phrase_id<TAB>nameplate"))?;
        out.push((id.trim().to_string(), label.trim().to_string()));
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SeedDef {
    Text(String),
    Full { id: String, text: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConceptDef {
    nameplate: String,
    seeds: Vec<SeedDef>,
    #[serde(default)]
    gestures: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDef {
    kind: MatchKind,
    surface: String,
    /// Nameplate of the target concept.
    target: String,
    priority: i32,
    #[serde(default)]
    note: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConceptDefs {
    #[serde(default)]
    concept: Vec<ConceptDef>,
    #[serde(default)]
    rule: Vec<RuleDef>,
}

/// Hand-written concept definitions (TOML, `[[concept]]` and `[[rule]]`
/// tables) turned into an origin. Seeds given as plain strings get the id
/// `<nameplate>/<n>`.
pub fn parse_concept_defs(text: &str, path: &Path) -> Result<Origin> {
    let defs: ConceptDefs = toml::from_str(text).map_err(|e| Error::invalid(path, e.to_string()))?;
    let mut index = BTreeMap::new();
    let mut clusters = Vec::new();
    for (k, c) in defs.concept.into_iter().enumerate() {
        if index.insert(c.nameplate.clone(), k).is_some() {
            return Err(Error::invalid(path, format!("nameplate {:?} defined twice", c.nameplate)));
        }
        let seeds = c
            .seeds
            .into_iter()
            .enumerate()
            .map(|(n, s)| match s {
                SeedDef::Text(text) => Seed::new(format!("{}/{}", c.nameplate, n + 1), text),
                SeedDef::Full { id, text } => Seed::new(id, text),
            })
            .collect();
        clusters.push(OriginCluster {
            seeds,
            nameplate: Some(c.nameplate),
            gesture_ids: c.gestures,
        });
    }
    let rules = defs
        .rule
        .into_iter()
        .map(|r| {
            let k = index
                .get(&r.target)
                .ok_or_else(|| Error::invalid(path, format!("rule targets unknown nameplate {:?}", r.target)))?;
            Ok(OriginRule {
                kind: r.kind,
                surface: r.surface,
                target: ConceptId(*k as u32),
                priority: r.priority,
                note: r.note,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Origin {
        clusters,
        default_labels: false,
        rules,
    })
}

pub fn load_concept_defs(path: &Path) -> Result<Origin> {
    parse_concept_defs(&read_text(path)?, path)
}

pub fn load_store(path: &Path) -> Result<ConceptStore> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

pub fn store_to_json(store: &ConceptStore) -> Result<String> {
    let mut s = serde_json::to_string_pretty(store)?;
    s.push('\n');
    Ok(s)
}

/// Writes the whole file next to `path` and renames it into place, so a
/// reader sees either the old or the new contents.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn save_store(path: &Path, store: &ConceptStore) -> Result<()> {
    write_atomic(path, store_to_json(store)?.as_bytes())
}

/// Strips `timestamp` fields from a serialized store, for comparing stores
/// that differ only in when actions happened.
pub fn without_timestamps(store: &ConceptStore) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(store)?;
    if let Some(log) = v.get_mut("curation_log").and_then(|l| l.as_array_mut()) {
        for entry in log {
            if let Some(obj) = entry.as_object_mut() {
                obj.remove("timestamp");
            }
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnassignedRow {
    pub phrase_id: String,
    pub text: String,
    pub best_similarity: f64,
    pub nearest_concept: Option<String>,
}

impl UnassignedRow {
    pub fn new(phrase: &RawPhrase, a: &Assignment, concepts: &ConceptSet) -> Self {
        Self {
            phrase_id: phrase.id.clone(),
            text: phrase.text.clone(),
            best_similarity: a.similarity,
            nearest_concept: a.nearest.and_then(|id| concepts.get(id)).map(|c| c.nameplate.clone()),
        }
    }
}

/// Unassigned queue TSV: `phrase_id, text, best_similarity, nearest_concept`.
pub fn write_unassigned<W: Write>(mut w: W, rows: &[UnassignedRow]) -> std::io::Result<()> {
    writeln!(w, "phrase_id\ttext\tbest_similarity\tnearest_concept")?;
    for r in rows {
        writeln!(
            w,
            "{}\t{}\t{:.6}\t{}",
            r.phrase_id,
            r.text.replace(['\t', '\n'], " "),
            r.best_similarity,
            r.nearest_concept.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}

/// One JSON document per line.
pub fn write_jsonl<W: Write, T: Serialize>(mut w: W, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(Path::new("<output>"), e))?;
    }
    Ok(())
}

/// Aligned-column contrast table.
pub fn contrast_table(results: &[ContrastResult]) -> String {
    let mut out = format!(
        "{:<10} {:>3} {:>8} {:>10} {:>10}  {}\n",
        "question", "n", "W", "p_raw", "p_adj", "significant"
    );
    for r in results {
        out.push_str(&format!(
            "{:<10} {:>3} {:>8} {:>10.6} {:>10.6}  {}\n",
            r.question.name(),
            r.n,
            r.w,
            r.p_raw,
            r.p_adjusted,
            if r.significant { "yes" } else { "no" }
        ));
    }
    out
}
