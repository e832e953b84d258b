use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use semgest::config::{Config, Overrides};
use semgest::error::{Error, Result};
use semgest::fixtures;
use semgest::formats::{self, UnassignedRow};
use semgest::server::{self, Service};
use semgest_core::conceptspace::{rank_concepts_by_frequency, ConceptStore, CurationAction, Origin};
use semgest_core::evalstats::{run_contrasts, DEFAULT_ALPHA, DEFAULT_CLIPS_PER_CELL};
use semgest_core::gestures::shuffle_pairs;
use semgest_core::{canonical_stream, cluster, tokenize, Mode, NormalizedPhrase, Pipeline, RawPhrase, TokenList};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "semgest", version, about = "Map phrases to gestures through a curated concept space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strip,
    Extract,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strip => Mode::Strip,
            ModeArg::Extract => Mode::Extract,
        }
    }
}

#[derive(Args)]
struct Input {
    /// A single phrase (id "cli").
    #[arg(long, conflicts_with = "input")]
    phrase: Option<String>,
    /// Corpus file (`id<TAB>text` per line); stdin when neither is given.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct Knobs {
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    w_sym: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    fallback: Option<String>,
    /// Ignore override rules.
    #[arg(long)]
    no_rules: bool,
    /// Embed surfaces instead of canonical forms.
    #[arg(long)]
    surfaces: bool,
    /// Concept definitions (.toml) or store (.json) replacing the configured one.
    #[arg(long)]
    concepts: Option<PathBuf>,
}

impl Knobs {
    fn overrides(&self) -> Overrides {
        Overrides {
            mode: self.mode.map(Mode::from),
            use_canonical: self.surfaces.then_some(false),
            w_sym: self.w_sym,
            theta: self.theta,
            tau: self.tau,
            seed: self.seed,
            fallback: self.fallback.clone(),
            rules: self.no_rules.then_some(false),
            concepts: self.concepts.clone(),
        }
    }
}

#[derive(Args)]
struct WithConfig {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    knobs: Knobs,
}

impl WithConfig {
    fn load(&self) -> Result<Config> {
        Config::load(&self.config, &self.knobs.overrides())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Segment phrases into text and symbol runs.
    Normalize {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[command(flatten)]
        input: Input,
    },
    /// Tokenize the text part of each phrase.
    Tokenize {
        #[command(flatten)]
        cfg: WithConfig,
        #[command(flatten)]
        input: Input,
    },
    /// Phrase vectors.
    Embed {
        #[command(flatten)]
        cfg: WithConfig,
        #[command(flatten)]
        input: Input,
    },
    /// Threshold clustering of a corpus; prints the partition.
    Cluster {
        #[command(flatten)]
        cfg: WithConfig,
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a concept store from a partition or from definitions.
    ConceptsBuild {
        #[command(flatten)]
        cfg: WithConfig,
        /// Partition JSON written by `cluster`.
        #[arg(long, requires = "corpus", conflicts_with = "definitions")]
        partition: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// `phrase_id<TAB>nameplate` lines naming the cluster of each phrase.
        #[arg(long, requires = "partition")]
        labels: Option<PathBuf>,
        /// Name unlabeled clusters after their first phrase.
        #[arg(long)]
        default_labels: bool,
        /// Concept definitions TOML.
        #[arg(long)]
        definitions: Option<PathBuf>,
        /// Curation actions to apply, one JSON object per line.
        #[arg(long)]
        actions: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assign phrases to concepts.
    Assign {
        #[command(flatten)]
        cfg: WithConfig,
        #[command(flatten)]
        input: Input,
        /// Write the unassigned queue as TSV.
        #[arg(long)]
        unassigned: Option<PathBuf>,
    },
    /// Gesture cues, or a shuffled re-pairing with --pairs.
    Gesture {
        #[command(flatten)]
        cfg: WithConfig,
        #[command(flatten)]
        input: Input,
        /// `phrase_id<TAB>gesture_id` pairs to shuffle.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Contrast table from a survey, or concept ranking over a corpus.
    Eval {
        #[arg(long, conflicts_with = "config")]
        survey: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_CLIPS_PER_CELL)]
        clips: usize,
        /// Also write the results as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, requires = "input")]
        config: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Rank concepts that have no gesture too.
        #[arg(long)]
        keep_gestureless: bool,
    },
    /// Run regression fixtures.
    Fixtures {
        #[arg(long)]
        dir: Option<PathBuf>,
        /// Cases to run; all when empty.
        names: Vec<String>,
    },
    /// Serve the curation endpoints over a concept store file.
    Serve {
        #[command(flatten)]
        cfg: WithConfig,
        /// Store file; created from the configured concepts if missing.
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

fn read_input(input: &Input) -> Result<Vec<RawPhrase>> {
    if let Some(p) = &input.phrase {
        return Ok(vec![RawPhrase::new("cli", p.clone())]);
    }
    match &input.input {
        Some(path) => formats::load_corpus(path),
        None => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Error::io(Path::new("<stdin>"), e))?;
            formats::parse_corpus(&text, Path::new("<stdin>"))
        }
    }
}

fn emit<T: Serialize>(items: &[T]) -> Result<()> {
    formats::write_jsonl(io::stdout().lock(), items)
}

fn emit_pretty<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(p) => formats::write_atomic(p, text.as_bytes()),
        None => stdout(&text),
    }
}

fn stdout(text: &str) -> Result<()> {
    io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| Error::io(Path::new("<stdout>"), e))
}

#[derive(Serialize)]
struct NormalizeOut {
    #[serde(flatten)]
    normalized: NormalizedPhrase,
    text: String,
}

#[derive(Serialize)]
struct TokenizeOut {
    id: String,
    text: String,
    #[serde(flatten)]
    tokens: TokenList,
    stream: Vec<String>,
}

#[derive(Serialize)]
struct AssignOut {
    #[serde(flatten)]
    assignment: semgest_core::Assignment,
    nameplate: Option<String>,
}

fn with_pipeline(cfg: &WithConfig) -> Result<(Config, Pipeline)> {
    let config = cfg.load()?;
    let (pipeline, _) = config.pipeline()?;
    Ok((config, pipeline))
}

fn nameplate(p: &Pipeline, a: &semgest_core::Assignment) -> Option<String> {
    a.concept.and_then(|id| p.concepts().get(id)).map(|c| c.nameplate.clone())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Normalize { config, mode, input } => {
            let overrides = Overrides {
                mode: mode.map(Mode::from),
                ..Overrides::default()
            };
            let config = match config {
                Some(p) => Config::load(&p, &overrides)?,
                None => Config::from_overrides(&overrides)?,
            };
            let normalizer = config.normalizer()?;
            let out: Vec<NormalizeOut> = read_input(&input)?
                .iter()
                .map(|p| {
                    let normalized = normalizer.normalize(p, config.params.mode);
                    NormalizeOut {
                        text: normalized.text_only(),
                        normalized,
                    }
                })
                .collect();
            emit(&out)?;
        }
        Command::Tokenize { cfg, input } => {
            let config = cfg.load()?;
            let normalizer = config.normalizer()?;
            let lex = config.lexicon()?;
            let mut out = Vec::new();
            for p in read_input(&input)? {
                let text = normalizer.normalize(&p, config.params.mode).text_only();
                let tokens = tokenize(&text, &lex)?;
                out.push(TokenizeOut {
                    stream: canonical_stream(&tokens, config.params.use_canonical),
                    id: p.id,
                    text,
                    tokens,
                });
            }
            emit(&out)?;
        }
        Command::Embed { cfg, input } => {
            let config = cfg.load()?;
            let pipeline = config.bare_pipeline()?;
            let out = read_input(&input)?
                .iter()
                .map(|p| pipeline.embed(p))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            emit(&out)?;
        }
        Command::Cluster { cfg, input, out } => {
            let config = cfg.load()?;
            let pipeline = config.bare_pipeline()?;
            let vectors = read_input(&input)?
                .iter()
                .map(|p| pipeline.embed(p))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let partition = cluster(&vectors, config.theta)?;
            emit_pretty(&partition, out.as_deref())?;
        }
        Command::ConceptsBuild {
            cfg,
            partition,
            corpus,
            labels,
            default_labels,
            definitions,
            actions,
            out,
        } => {
            let config = cfg.load()?;
            let pipeline = config.bare_pipeline()?;
            let mut store = match (partition, definitions) {
                (Some(pp), None) => {
                    let text = formats::read_text(&pp)?;
                    let partition: semgest_core::Partition =
                        serde_json::from_str(&text).map_err(|e| Error::parse(&pp, e.line(), e.to_string()))?;
                    let corpus_path = corpus.expect("clap enforces --corpus");
                    let corpus = formats::corpus_map(&formats::load_corpus(&corpus_path)?);
                    let mut nameplates = BTreeMap::new();
                    if let Some(lp) = &labels {
                        for (id, label) in formats::parse_labels(&formats::read_text(lp)?, lp)? {
                            let k = partition
                                .cluster_of(&id)
                                .ok_or_else(|| Error::invalid(lp, format!("phrase {id:?} is not in the partition")))?;
                            nameplates.insert(k, label);
                        }
                    }
                    let origin = Origin::from_partition(&partition, &nameplates, &corpus, default_labels)?;
                    ConceptStore::new(origin, &pipeline)?
                }
                (None, Some(dp)) => ConceptStore::new(formats::load_concept_defs(&dp)?, &pipeline)?,
                _ => config
                    .concept_store(&pipeline)?
                    .ok_or_else(|| Error::Config("give --partition, --definitions or paths.concepts".into()))?,
            };
            if let Some(ap) = &actions {
                let text = formats::read_text(ap)?;
                for (i, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let action: CurationAction =
                        serde_json::from_str(line).map_err(|e| Error::parse(ap, i + 1, e.to_string()))?;
                    store
                        .apply(action, 0, &pipeline)
                        .map_err(|e| Error::parse(ap, i + 1, e.to_string()))?;
                }
            }
            let json = formats::store_to_json(&store)?;
            match out {
                Some(p) => formats::write_atomic(&p, json.as_bytes())?,
                None => stdout(&json)?,
            }
        }
        Command::Assign { cfg, input, unassigned } => {
            let (_, pipeline) = with_pipeline(&cfg)?;
            let phrases = read_input(&input)?;
            let mut out = Vec::new();
            let mut queue = Vec::new();
            for p in &phrases {
                let a = pipeline.assign(p)?;
                if !a.is_assigned() {
                    queue.push(UnassignedRow::new(p, &a, pipeline.concepts()));
                }
                out.push(AssignOut {
                    nameplate: nameplate(&pipeline, &a),
                    assignment: a,
                });
            }
            emit(&out)?;
            if let Some(path) = unassigned {
                let mut buf = Vec::new();
                formats::write_unassigned(&mut buf, &queue).map_err(|e| Error::io(&path, e))?;
                formats::write_atomic(&path, &buf)?;
            }
        }
        Command::Gesture { cfg, input, pairs } => {
            let (config, pipeline) = with_pipeline(&cfg)?;
            match pairs {
                Some(pp) => {
                    let text = formats::read_text(&pp)?;
                    let rows: Vec<(String, String)> = formats::parse_labels(&text, &pp)?;
                    let shuffled = shuffle_pairs(&rows, config.params.seed)?;
                    let mut out = String::new();
                    for (p, g) in shuffled {
                        out.push_str(&format!("{p}\t{g}\n"));
                    }
                    stdout(&out)?;
                }
                None => {
                    let cues = read_input(&input)?
                        .iter()
                        .map(|p| pipeline.map_phrase_to_gesture(p))
                        .collect::<std::result::Result<Vec<_>, _>>()?;
                    emit(&cues)?;
                }
            }
        }
        Command::Eval {
            survey,
            alpha,
            clips,
            json,
            config,
            input,
            top,
            keep_gestureless,
        } => match (survey, config) {
            (Some(sp), None) => {
                let records = formats::load_survey(&sp)?;
                let results = run_contrasts(&records, alpha, clips)?;
                stdout(&formats::contrast_table(&results))?;
                if let Some(jp) = json {
                    emit_pretty(&results, Some(&jp))?;
                }
            }
            (None, Some(cp)) => {
                let config = Config::load(&cp, &Overrides::default())?;
                let (pipeline, _) = config.pipeline()?;
                let corpus = formats::load_corpus(&input.expect("clap enforces --input"))?;
                let assignments = corpus
                    .iter()
                    .map(|p| pipeline.assign(p))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let mut ranked = rank_concepts_by_frequency(&assignments, pipeline.concepts(), !keep_gestureless);
                ranked.truncate(top);
                let mut table = String::new();
                for (i, r) in ranked.iter().enumerate() {
                    table.push_str(&format!("{:>3}  {:<20} {:>5}\n", i + 1, r.nameplate, r.count));
                }
                stdout(&table)?;
                if let Some(jp) = json {
                    emit_pretty(&ranked, Some(&jp))?;
                }
            }
            _ => return Err(Error::Config("eval needs --survey or --config with --input".into())),
        },
        Command::Fixtures { dir, names } => {
            let root = dir.unwrap_or_else(fixtures::default_root);
            let names = if names.is_empty() { fixtures::list_fixtures(&root)? } else { names };
            let mut all = true;
            for name in names {
                let report = fixtures::run_fixture(&fixtures::load_fixture(&root, &name)?)?;
                all &= report.passed();
                stdout(&report.to_string())?;
            }
            return Ok(all);
        }
        Command::Serve { cfg, store, bind } => {
            let config = cfg.load()?;
            let service = Service::open(&config, &store)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io(Path::new("<runtime>"), e))?;
            rt.block_on(server::serve(service, bind))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("semgest: {e}");
            ExitCode::from(1)
        }
    }
}
