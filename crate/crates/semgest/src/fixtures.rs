//! Regression cases: a directory per case holding `config.toml`,
//! `corpus.tsv` and `expect.toml`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use semgest_core::conceptspace::{rank_concepts_by_frequency, Assignment, ConceptStore, Reason};
use semgest_core::{cluster, Pipeline, RawPhrase};
use serde::{Deserialize, Serialize};

use crate::config::{Config, Overrides};
use crate::error::{Error, Result};
use crate::formats;

/// Key in `[assign]` that collects phrases left without a concept.
pub const UNASSIGNED: &str = "unassigned";

/// Directory shipped with this crate.
pub fn default_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterExpect {
    /// Each group must share one cluster.
    #[serde(default)]
    pub together: Vec<Vec<String>>,
    /// No member of the first group may share a cluster with any member of
    /// the second.
    #[serde(default)]
    pub apart: Vec<(Vec<String>, Vec<String>)>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankingExpect {
    #[serde(default)]
    pub require_gesture: bool,
    /// Nameplates in rank order.
    pub top: Vec<String>,
    pub counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    #[serde(default)]
    pub description: String,
    /// Phrase id → text handed to the tokenizer.
    #[serde(default)]
    pub preprocessed: BTreeMap<String, String>,
    /// Phrase id → words looked up by the embedder.
    #[serde(default)]
    pub tokens: BTreeMap<String, Vec<String>>,
    pub cluster: Option<ClusterExpect>,
    /// Nameplate (or `unassigned`) → exactly the phrases assigned to it.
    #[serde(default)]
    pub assign: BTreeMap<String, Vec<String>>,
    /// Phrase id → assignment reason (`rule`, `seed_exact`, `nearest`, `none`).
    #[serde(default)]
    pub reasons: BTreeMap<String, String>,
    pub ranking: Option<RankingExpect>,
}

#[derive(Debug, Clone)]
pub struct FixtureCase {
    pub name: String,
    pub dir: PathBuf,
    pub config: Config,
    pub corpus: Vec<RawPhrase>,
    pub expect: Expect,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub checks: Vec<Check>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for CaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(f, "{verdict} {}", self.name)?;
        for c in self.checks.iter().filter(|c| !c.passed) {
            writeln!(f, "  {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Case names under `root/cases`, sorted.
pub fn list_fixtures(root: &Path) -> Result<Vec<String>> {
    let dir = root.join("cases");
    let mut names = Vec::new();
    for entry in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
        let entry = entry.map_err(|e| Error::io(&dir, e))?;
        if entry.path().join("expect.toml").is_file() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

pub fn load_fixture(root: &Path, name: &str) -> Result<FixtureCase> {
    let dir = root.join("cases").join(name);
    if !dir.join("expect.toml").is_file() {
        return Err(Error::UnknownFixture(name.to_string()));
    }
    let config = Config::load(&dir.join("config.toml"), &Overrides::default())?;
    let corpus = formats::load_corpus(&dir.join("corpus.tsv"))?;
    let expect_path = dir.join("expect.toml");
    let expect: Expect =
        toml::from_str(&formats::read_text(&expect_path)?).map_err(|e| Error::invalid(&expect_path, e.to_string()))?;
    let case = FixtureCase {
        name: name.to_string(),
        dir,
        config,
        corpus,
        expect,
    };
    case.check_references().map_err(|m| Error::invalid(&expect_path, m))?;
    Ok(case)
}

impl FixtureCase {
    /// Expectations may only name phrases in the corpus.
    fn check_references(&self) -> std::result::Result<(), String> {
        let ids: BTreeSet<&str> = self.corpus.iter().map(|p| p.id.as_str()).collect();
        let e = &self.expect;
        let mut named: Vec<&String> = Vec::new();
        named.extend(e.preprocessed.keys());
        named.extend(e.tokens.keys());
        named.extend(e.reasons.keys());
        named.extend(e.assign.values().flatten());
        if let Some(c) = &e.cluster {
            named.extend(c.together.iter().flatten());
            named.extend(c.apart.iter().flat_map(|(a, b)| a.iter().chain(b)));
        }
        match named.into_iter().find(|id| !ids.contains(id.as_str())) {
            Some(id) => Err(format!("expectation names unknown phrase {id:?}")),
            None => Ok(()),
        }
    }

    pub fn pipeline(&self) -> Result<(Pipeline, Option<ConceptStore>)> {
        self.config.pipeline()
    }

    pub fn assignments(&self, pipeline: &Pipeline) -> Result<Vec<Assignment>> {
        self.corpus
            .iter()
            .map(|p| pipeline.assign(p).map_err(Error::from))
            .collect()
    }
}

fn diff_sets(expected: &BTreeSet<&str>, actual: &BTreeSet<&str>) -> String {
    let missing: Vec<_> = expected.difference(actual).collect();
    let extra: Vec<_> = actual.difference(expected).collect();
    format!("missing {missing:?}, unexpected {extra:?}")
}

fn reason_name(r: Reason) -> &'static str {
    match r {
        Reason::Rule(_) => "rule",
        Reason::SeedExact => "seed_exact",
        Reason::Nearest => "nearest",
        Reason::None => "none",
    }
}

/// Runs every expectation of a case; set comparisons ignore order.
pub fn run_fixture(case: &FixtureCase) -> Result<CaseReport> {
    let (pipeline, _) = case.pipeline()?;
    let by_id: BTreeMap<&str, &RawPhrase> = case.corpus.iter().map(|p| (p.id.as_str(), p)).collect();
    let e = &case.expect;
    let mut checks = Vec::new();
    let mut push = |name: String, passed: bool, detail: String| checks.push(Check { name, passed, detail });

    for (id, want) in &e.preprocessed {
        let got = pipeline.trace(by_id[id.as_str()])?.text;
        push(format!("preprocessed {id}"), &got == want, format!("expected {want:?}, got {got:?}"));
    }
    for (id, want) in &e.tokens {
        let got = pipeline.trace(by_id[id.as_str()])?.stream;
        push(format!("tokens {id}"), &got == want, format!("expected {want:?}, got {got:?}"));
    }

    if let Some(c) = &e.cluster {
        let vectors = case
            .corpus
            .iter()
            .map(|p| pipeline.embed(p))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let partition = cluster(&vectors, case.config.theta)?;
        for group in &c.together {
            let ok = group.windows(2).all(|w| partition.together(&w[0], &w[1]));
            push(format!("together {group:?}"), ok, format!("clusters {:?}", partition.clusters));
        }
        for (a, b) in &c.apart {
            let clash: Vec<_> = a
                .iter()
                .flat_map(|x| b.iter().map(move |y| (x, y)))
                .filter(|(x, y)| partition.together(x, y))
                .collect();
            push(format!("apart {a:?} / {b:?}"), clash.is_empty(), format!("shared clusters {clash:?}"));
        }
        if let Some(n) = c.count {
            push(
                "cluster count".into(),
                partition.len() == n,
                format!("expected {n}, got {}", partition.len()),
            );
        }
    }

    if !e.assign.is_empty() || !e.reasons.is_empty() || e.ranking.is_some() {
        let assignments = case.assignments(&pipeline)?;
        let concepts = pipeline.concepts();
        let label = |a: &Assignment| match a.concept.and_then(|id| concepts.get(id)) {
            Some(c) => c.nameplate.as_str(),
            None => UNASSIGNED,
        };
        for (nameplate, ids) in &e.assign {
            let want: BTreeSet<&str> = ids.iter().map(String::as_str).collect();
            let got: BTreeSet<&str> = assignments
                .iter()
                .filter(|a| label(a) == nameplate)
                .map(|a| a.phrase_id.as_str())
                .collect();
            push(format!("assign {nameplate}"), want == got, diff_sets(&want, &got));
        }
        for (id, want) in &e.reasons {
            let a = assignments.iter().find(|a| a.phrase_id == *id).expect("reference checked");
            let got = reason_name(a.reason);
            push(format!("reason {id}"), got == want, format!("expected {want}, got {got}"));
        }
        if let Some(r) = &e.ranking {
            let ranked = rank_concepts_by_frequency(&assignments, concepts, r.require_gesture);
            let top: Vec<&str> = ranked.iter().take(r.top.len()).map(|c| c.nameplate.as_str()).collect();
            let counts: Vec<usize> = ranked.iter().take(r.top.len()).map(|c| c.count).collect();
            let ok = top == r.top && r.counts.as_ref().is_none_or(|c| *c == counts);
            let all: Vec<(&str, usize)> = ranked.iter().map(|c| (c.nameplate.as_str(), c.count)).collect();
            push("ranking".into(), ok, format!("expected {:?} {:?}, got {all:?}", r.top, r.counts));
        }
    }

    Ok(CaseReport {
        name: case.name.clone(),
        checks,
    })
}
