//! `lscd`: batch front end for the change-detection pipeline.
//!
//! Exit status is 0 on success, 1 for invalid input or usage, 2 for
//! internal and I/O failures.

mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lscd::agreement::{self, DistanceMetric, WordRecord};
use lscd::baselines::{self, FreqNormalization, PredictionSet, ProfileFeatures, SgnsParams, Submission, Task};
use lscd::change::{self, GoldOptions};
use lscd::corpus::{self, Corpus, Layer, Period, ValidationResult};
use lscd::eval::{self, Coverage, GoldSet, Metric, Phase, Split};
use lscd::synth::{self, SynthParams};
use lscd::wug::{self, dwug, ClusterMethod, ClusterParams, Judgment};
use lscd::{tsv, Error, Result};

use config::Config;

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// `print!` counterpart of [`say!`].
macro_rules! say_raw {
    ($text:expr) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), "{}", $text);
    }};
}

#[derive(Parser)]
#[command(name = "lscd", version, about = "Lexical semantic change detection pipeline")]
struct Cli {
    /// Plain-text `key=value` file supplying defaults; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and cross-check corpus layers; write a lemma frequency table.
    Ingest(IngestArgs),
    /// Select target lemmas frequent enough in both periods.
    Targets(TargetsArgs),
    /// Sample target usages from both periods for annotation.
    Sample(SampleArgs),
    /// Split usages and judgments into one usage-graph directory per word.
    WugBuild(WugBuildArgs),
    /// Correlation-cluster every usage graph of a graph directory.
    WugCluster(WugClusterArgs),
    /// Derive gold change scores from clustered usage graphs.
    GoldScores(GoldScoresArgs),
    /// Inter-annotator agreement per word and overall.
    Agreement(AgreementArgs),
    /// Run one of the baseline systems and write a submission directory.
    Baseline {
        #[command(subcommand)]
        system: BaselineCmd,
    },
    /// Score a submission directory against gold scores.
    Evaluate(EvaluateArgs),
    /// F1 over percentile binarization thresholds of graded scores.
    Sweep(SweepArgs),
    /// Generate synthetic corpora with planted changes plus simulated annotation.
    SynthGen(SynthArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// Period-1 corpus file as `[layer=]path`; repeat for several layers of
    /// the same sentences. Layers: raw, token, lemma, pos, conllu. Without a
    /// prefix `.conllu` files are CoNLL-U and names containing `token`,
    /// `raw` or `pos` select that layer; anything else is lemma.
    #[arg(long = "c1", value_name = "SPEC")]
    c1: Vec<String>,
    /// Period-2 corpus file, same syntax as --c1.
    #[arg(long = "c2", value_name = "SPEC")]
    c2: Vec<String>,
}

#[derive(Args)]
struct IngestArgs {
    /// Corpus file as `[layer=]path` (repeatable).
    #[arg(long, value_name = "SPEC", required = true)]
    corpus: Vec<String>,
    /// Period of the corpus: 1 or 2.
    #[arg(long)]
    period: Option<String>,
    /// Count all parts of speech instead of NOUN/VERB/ADJ/ADV.
    #[arg(long)]
    all_pos: bool,
    /// Frequency table to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TargetsArgs {
    #[command(flatten)]
    corpora: CorpusArgs,
    /// Minimum period-1 frequency.
    #[arg(long)]
    min1: Option<usize>,
    /// Minimum period-2 frequency; derived from --min1 and the corpus size
    /// ratio when omitted.
    #[arg(long)]
    min2: Option<usize>,
    /// Keep all parts of speech instead of NOUN/VERB/ADJ/ADV.
    #[arg(long)]
    all_pos: bool,
    /// Word list to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    corpora: CorpusArgs,
    /// Word list of targets.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Single target word (repeatable); alternative to --targets.
    #[arg(long)]
    word: Vec<String>,
    /// Usages per period and word [default: 20].
    #[arg(long)]
    sample_size: Option<usize>,
    /// Random seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Usage table to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WugBuildArgs {
    /// Usage table.
    #[arg(long)]
    uses: Option<PathBuf>,
    /// Judgment table.
    #[arg(long)]
    judgments: Option<PathBuf>,
    /// Output graph directory (one subdirectory per word).
    #[arg(long)]
    graph_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterFlags {
    /// Edge weight treated as neutral [default: 2.5].
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct WugClusterArgs {
    /// Graph directory written by wug-build (or a published dataset).
    #[arg(long)]
    graph_dir: Option<PathBuf>,
    #[command(flatten)]
    cluster: ClusterFlags,
    /// Annealing restarts [default: 20].
    #[arg(long)]
    restarts: Option<usize>,
    /// Annealing steps per restart; 0 picks 2000 x nodes [default: 0].
    #[arg(long)]
    max_iters: Option<usize>,
    /// auto, exact or annealing [default: auto].
    #[arg(long)]
    method: Option<String>,
    /// Largest graph solved exactly under `auto` [default: 10].
    #[arg(long)]
    exact_limit: Option<usize>,
    /// Random seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GoldScoresArgs {
    /// Clustered graph directory.
    #[arg(long)]
    graph_dir: Option<PathBuf>,
    #[command(flatten)]
    cluster: ClusterFlags,
    /// Compare cluster counts against rounded k and n.
    #[arg(long)]
    round_thresholds: bool,
    /// Gold score table to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a dataset overview row.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Dataset name in the overview row [default: data].
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct AgreementArgs {
    /// Graph directory.
    #[arg(long)]
    graph_dir: Option<PathBuf>,
    /// ordinal or interval [default: ordinal].
    #[arg(long)]
    metric: Option<String>,
    /// Discard words whose local and pooled alpha both fall below this.
    #[arg(long)]
    filter: Option<f64>,
    /// Kept words are written here when --filter is given.
    #[arg(long)]
    kept_out: Option<PathBuf>,
    /// Agreement table to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TargetOut {
    /// Word list of targets.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Submission directory to write.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BinarizeFlag {
    /// mean-std or changepoint.
    #[arg(long)]
    binarize: Option<String>,
}

#[derive(Subcommand)]
enum BaselineCmd {
    /// SGNS embeddings per period, Procrustes alignment, cosine distance.
    Sgns {
        #[command(flatten)]
        corpora: CorpusArgs,
        #[command(flatten)]
        io: TargetOut,
        #[command(flatten)]
        bin: BinarizeFlag,
        /// Embedding dimension [default: 100].
        #[arg(long)]
        dim: Option<usize>,
        /// Context window [default: 10].
        #[arg(long)]
        window: Option<usize>,
        /// Training epochs [default: 5].
        #[arg(long)]
        epochs: Option<usize>,
        /// Negative samples per pair [default: 5].
        #[arg(long)]
        negatives: Option<usize>,
        /// Subsampling threshold, 0 disables [default: 0.001].
        #[arg(long)]
        subsample: Option<f64>,
        /// Worker threads; only 1 is deterministic [default: 1].
        #[arg(long)]
        workers: Option<usize>,
        /// Random seed [default: 0].
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the aligned embedding spaces into the output directory.
        #[arg(long)]
        save_embeddings: bool,
    },
    /// Difference of log-normalized frequencies.
    Freq {
        #[command(flatten)]
        corpora: CorpusArgs,
        #[command(flatten)]
        io: TargetOut,
        #[command(flatten)]
        bin: BinarizeFlag,
        /// log (log f / log total) or linear (f / log total) [default: log].
        #[arg(long)]
        norm: Option<String>,
    },
    /// Cosine distance of morphological/syntactic feature profiles.
    Profile {
        #[command(flatten)]
        corpora: CorpusArgs,
        #[command(flatten)]
        io: TargetOut,
        #[command(flatten)]
        bin: BinarizeFlag,
        /// both, morph or syntax [default: both].
        #[arg(long)]
        features: Option<String>,
    },
    /// Label every word 1 for binary change, gain and loss.
    Minority {
        #[command(flatten)]
        io: TargetOut,
    },
    /// Uniform random scores and labels.
    Random {
        #[command(flatten)]
        io: TargetOut,
        /// Random seed [default: 0].
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct EvaluateArgs {
    /// Gold score table.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Submission directory (graded.tsv, binary.tsv, compare.tsv, gain.tsv, loss.tsv).
    #[arg(long)]
    submission: Option<PathBuf>,
    /// 1 (graded obligatory) or 2 (binary obligatory) [default: 2].
    #[arg(long)]
    phase: Option<String>,
    /// development or evaluation [default: evaluation].
    #[arg(long)]
    split: Option<String>,
    /// Score the overlap instead of failing on missing gold words.
    #[arg(long)]
    lenient: bool,
    /// Also report the random baseline averaged over this many runs.
    #[arg(long)]
    random_reps: Option<usize>,
    /// Seed of the first random run [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Report table to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Gold score table (binary labels are the reference).
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Graded prediction file; omit and use --gold-scores to sweep a gold column.
    #[arg(long)]
    graded: Option<PathBuf>,
    /// Sweep a gold column instead: graded or compare.
    #[arg(long)]
    gold_scores: Option<String>,
    /// Comma-separated percentiles [default: 0,5,...,100].
    #[arg(long)]
    percentiles: Option<String>,
    /// Curve table to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Number of words whose topic changes [default: 5].
    #[arg(long)]
    planted_changes: Option<usize>,
    /// How many planted words gain a topic instead of switching [default: 0].
    #[arg(long)]
    gains: Option<usize>,
    /// Vocabulary size including function words [default: 500].
    #[arg(long)]
    vocab: Option<usize>,
    /// Number of topics [default: 10].
    #[arg(long)]
    topics: Option<usize>,
    /// Sentences per period [default: 4000].
    #[arg(long)]
    sentences: Option<usize>,
    /// Unchanged words added to the simulated annotation [default: 10].
    #[arg(long)]
    annotate_stable: Option<usize>,
    /// Annotated usages per period and word [default: 10].
    #[arg(long)]
    usages_per_period: Option<usize>,
    /// Random seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
}

fn guess_layer(path: &str) -> Layer {
    let name = Path::new(path).file_name().map(|n| n.to_string_lossy().to_lowercase()).unwrap_or_default();
    if name.ends_with(".conllu") {
        Layer::Conllu
    } else if name.contains("token") {
        Layer::Token
    } else if name.contains("raw") {
        Layer::Raw
    } else if name.contains("pos") {
        Layer::Pos
    } else {
        Layer::Lemma
    }
}

fn parse_spec(spec: &str) -> Result<(Layer, PathBuf)> {
    let (layer, path) = match spec.split_once('=') {
        Some((l, p)) if l.parse::<Layer>().is_ok() => (l.parse()?, p.to_string()),
        _ => (guess_layer(spec), spec.to_string()),
    };
    let path = existing(PathBuf::from(path))?;
    Ok((layer, path))
}

fn existing(path: PathBuf) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::Precondition(format!("{} does not exist", path.display())))
    }
}

fn load_period(specs: &[String], period: Period) -> Result<Corpus> {
    if specs.is_empty() {
        return Err(Error::Precondition(format!("no corpus given for period {period}")));
    }
    let files = specs.iter().map(|s| parse_spec(s)).collect::<Result<Vec<_>>>()?;
    corpus::load_layers(period, &files)
}

fn load_corpora(cfg: &Config, args: &CorpusArgs) -> Result<(Corpus, Corpus)> {
    let c1 = load_period(&cfg.list(&args.c1, "c1"), Period::C1)?;
    let c2 = load_period(&cfg.list(&args.c2, "c2"), Period::C2)?;
    Ok((c1, c2))
}

fn content_filter(corpora: &[&Corpus], all_pos: bool) -> Option<BTreeSet<String>> {
    (!all_pos && corpora.iter().all(|c| c.has_layer(Layer::Pos)))
        .then(|| corpus::CONTENT_POS.iter().map(|s| s.to_string()).collect())
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn render_word_list(words: &[String], seed: Option<u64>) -> String {
    let mut out = tsv::provenance(seed);
    out.push('\n');
    for w in words {
        out.push_str(w);
        out.push('\n');
    }
    out
}

fn read_targets(cfg: &Config, flag: &Option<PathBuf>) -> Result<Vec<String>> {
    let path = existing(cfg.require(flag.clone(), "targets")?)?;
    let words = baselines::read_word_list(&path)?;
    if words.is_empty() {
        return Err(Error::Precondition(format!("{} lists no words", path.display())));
    }
    Ok(words)
}

fn parse_metric(s: &str) -> Result<DistanceMetric> {
    match s {
        "ordinal" => Ok(DistanceMetric::Ordinal),
        "interval" => Ok(DistanceMetric::Interval),
        _ => Err(Error::Precondition(format!("unknown metric `{s}`"))),
    }
}

fn ingest(cfg: &Config, a: &IngestArgs) -> Result<()> {
    let period: Period = cfg.require(a.period.clone(), "period")?.parse()?;
    let c = load_period(&a.corpus, period)?;
    let filter = content_filter(&[&c], a.all_pos);
    let stats = corpus::frequency_counts(&c, filter.as_ref())?;
    let mut rows: Vec<(&String, &usize)> = stats.lemma_freq.iter().collect();
    rows.sort_by(|x, y| y.1.cmp(x.1).then(x.0.cmp(y.0)));
    say!(
        "period {period}: {} sentences, {} tokens (non-punctuation), {} lemma types",
        c.sentences.len(),
        stats.total_tokens,
        stats.lemma_freq.len()
    );
    if let Some(out) = cfg.pick(a.out.clone(), "out")? {
        let text = tsv::render(None, &["lemma", "freq"], rows.iter().map(|(w, f)| vec![w.to_string(), f.to_string()]));
        write_out(&out, &text)?;
    }
    Ok(())
}

fn targets(cfg: &Config, a: &TargetsArgs) -> Result<()> {
    let (c1, c2) = load_corpora(cfg, &a.corpora)?;
    let filter = content_filter(&[&c1, &c2], a.all_pos);
    let s1 = corpus::frequency_counts(&c1, filter.as_ref())?;
    let s2 = corpus::frequency_counts(&c2, filter.as_ref())?;
    let min1: usize = cfg.require(a.min1, "min1")?;
    let min2 = match cfg.pick(a.min2, "min2")? {
        Some(m) => m,
        None => corpus::derive_second_threshold(min1, &s1, &s2),
    };
    let words = corpus::select_targets(&s1, &s2, min1, min2);
    say!("{} targets (min1 {min1}, min2 {min2})", words.len());
    let out = cfg.require(a.out.clone(), "out")?;
    write_out(&out, &render_word_list(&words, None))
}

fn sample(cfg: &Config, a: &SampleArgs) -> Result<()> {
    let (c1, c2) = load_corpora(cfg, &a.corpora)?;
    let words = if a.word.is_empty() { read_targets(cfg, &a.targets)? } else { a.word.clone() };
    let count = cfg.or(a.sample_size, "sample_size", 20)?;
    let seed = cfg.or(a.seed, "seed", 0)?;
    let mut usages = Vec::new();
    for (i, w) in words.iter().enumerate() {
        for (p, c) in [&c1, &c2].into_iter().enumerate() {
            let s = corpus::sample_usages(c, w, count, seed.wrapping_add(2 * i as u64 + p as u64))?;
            if s.undersampled {
                eprintln!("warning: `{w}` has only {} usages in period {}", s.available, p + 1);
            }
            for mut u in s.usages {
                match corpus::validate_target_index(&u) {
                    ValidationResult::Ok => usages.push(u),
                    ValidationResult::CorrectedSpan { start, end, .. } => {
                        u.target_span = (start, end);
                        usages.push(u);
                    }
                    ValidationResult::Mismatch { reason } => {
                        eprintln!("warning: dropping usage {}: {reason}", u.identifier)
                    }
                }
            }
        }
    }
    say!("{} usages of {} words", usages.len(), words.len());
    let out = cfg.require(a.out.clone(), "out")?;
    write_out(&out, &corpus::render_usages(&usages, Some(seed)))
}

fn wug_build(cfg: &Config, a: &WugBuildArgs) -> Result<()> {
    let usages = corpus::read_usages(existing(cfg.require(a.uses.clone(), "uses")?)?)?;
    let judgments = wug::read_judgments(existing(cfg.require(a.judgments.clone(), "judgments")?)?)?;
    let dir: PathBuf = cfg.require(a.graph_dir.clone(), "graph_dir")?;
    let lemma_of: BTreeMap<&str, &str> = usages.iter().map(|u| (u.identifier.as_str(), u.lemma.as_str())).collect();
    let mut words: BTreeMap<String, dwug::DatasetWord> = BTreeMap::new();
    for u in &usages {
        words
            .entry(u.lemma.clone())
            .or_insert_with(|| dwug::DatasetWord { lemma: u.lemma.clone(), usages: Vec::new(), judgments: Vec::new() })
            .usages
            .push(u.clone());
    }
    for j in judgments {
        let l1 = lemma_of.get(j.usage_id_1.as_str());
        let l2 = lemma_of.get(j.usage_id_2.as_str());
        match (l1, l2) {
            (Some(a), Some(b)) if a == b => words.get_mut(*a).unwrap().judgments.push(j),
            (Some(_), Some(_)) => {
                return Err(Error::Integrity(format!(
                    "judgment pairs usages of different words: {} / {}",
                    j.usage_id_1, j.usage_id_2
                )))
            }
            _ => {
                let id = if l1.is_none() { &j.usage_id_1 } else { &j.usage_id_2 };
                return Err(Error::Integrity(format!("judgment references unknown usage `{id}`")));
            }
        }
    }
    for w in words.values() {
        let g = w.graph::<f64>()?;
        w.write(dir.join(dwug::word_dir_name(&w.lemma)), None)?;
        say!("{}\t{} usages\t{} judged pairs", w.lemma, g.node_count(), g.edge_count());
    }
    eprintln!("wrote {} word graph(s) under {}", words.len(), dir.display());
    Ok(())
}

fn word_dirs(dir: &Path) -> Result<Vec<(PathBuf, dwug::DatasetWord)>> {
    let root = if dir.join("data").is_dir() { dir.join("data") } else { dir.to_path_buf() };
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(&root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("uses.csv").is_file())
        .collect();
    if dirs.is_empty() {
        return Err(Error::NotFound(format!("no word graphs under {}", root.display())));
    }
    dirs.sort();
    dirs.into_iter()
        .map(|d| dwug::load_dataset_word(&d).map(|w| (d, w)))
        .collect()
}

fn cluster_threshold(cfg: &Config, f: &ClusterFlags) -> Result<f64> {
    cfg.or(f.threshold, "threshold", 2.5)
}

fn wug_cluster(cfg: &Config, a: &WugClusterArgs) -> Result<()> {
    let dir = existing(cfg.require(a.graph_dir.clone(), "graph_dir")?)?;
    let seed = cfg.or(a.seed, "seed", 0)?;
    let method = match cfg.or(a.method.clone(), "method", "auto".to_string())?.as_str() {
        "auto" => ClusterMethod::Auto,
        "exact" => ClusterMethod::Exact,
        "annealing" => ClusterMethod::Annealing,
        other => return Err(Error::Precondition(format!("unknown clustering method `{other}`"))),
    };
    let params = ClusterParams {
        threshold: cluster_threshold(cfg, &a.cluster)?,
        restarts: cfg.or(a.restarts, "restarts", 20)?,
        max_iters: cfg.or(a.max_iters, "max_iters", 0)?,
        seed,
        method,
        exact_limit: cfg.or(a.exact_limit, "exact_limit", 10)?,
    };
    say!("lemma\tusages\tpairs\tclusters\tloss\tuncompared");
    for (path, w) in word_dirs(&dir)? {
        let g = w.graph::<f64>()?;
        let c = wug::cluster_wug(&g, &params)?;
        let s = wug::summarize(&g, &c);
        std::fs::write(path.join("clusters.tsv"), wug::render_clustering(&g, &c, Some(seed)))?;
        say!(
            "{}\t{}\t{}\t{}\t{:.3}\t{}",
            w.lemma,
            s.usages,
            s.judged_pairs,
            c.cluster_count(),
            c.loss,
            s.uncompared
        );
    }
    Ok(())
}

fn gold_scores(cfg: &Config, a: &GoldScoresArgs) -> Result<()> {
    let dir = existing(cfg.require(a.graph_dir.clone(), "graph_dir")?)?;
    let threshold = cluster_threshold(cfg, &a.cluster)?;
    let opts = GoldOptions { round_thresholds: a.round_thresholds };
    let mut scores = Vec::new();
    let mut records = Vec::new();
    let mut all_judgments: Vec<Judgment> = Vec::new();
    for (path, w) in word_dirs(&dir)? {
        let g = w.graph::<f64>()?;
        let cpath = path.join("clusters.tsv");
        if !cpath.is_file() {
            return Err(Error::Precondition(format!("{} is missing; run wug-cluster first", cpath.display())));
        }
        let c = wug::read_clustering(&cpath, &g, threshold)?;
        let s = change::gold_scores(&g, &c, opts);
        let summary = wug::summarize(&g, &c);
        records.push(WordRecord {
            lemma: w.lemma.clone(),
            pos: w.usages.first().map(|u| u.pos.clone()).unwrap_or_default(),
            usages: summary.usages,
            annotators: w.judgments.iter().map(|j| j.annotator.clone()).collect(),
            judged_pairs: summary.judged_pairs,
            judgments: summary.judgments,
            uncompared: summary.uncompared,
            normalized_loss: summary.normalized_loss,
            binary: s.binary,
            graded: s.graded,
        });
        all_judgments.extend(w.judgments);
        scores.push(s);
    }
    let undefined = scores.iter().filter(|s| s.graded.is_none() || s.binary.is_none()).count();
    if undefined > 0 {
        eprintln!("warning: {undefined} word(s) lack usages in one period; their scores are left empty");
    }
    say!("{} words scored", scores.len());
    let out = cfg.require(a.out.clone(), "out")?;
    write_out(&out, &change::render_gold(&scores, None))?;
    if let Some(path) = cfg.pick(a.summary.clone(), "summary")? {
        let name = cfg.or(a.name.clone(), "name", "data".to_string())?;
        let row = agreement::summary_row(&name, &records, &all_judgments, DistanceMetric::Ordinal);
        write_out(&path, &agreement::render_summary(&[row], None))?;
    }
    Ok(())
}

fn agreement_cmd(cfg: &Config, a: &AgreementArgs) -> Result<()> {
    let dir = existing(cfg.require(a.graph_dir.clone(), "graph_dir")?)?;
    let metric = parse_metric(&cfg.or(a.metric.clone(), "metric", "ordinal".to_string())?)?;
    let words: BTreeMap<String, Vec<Judgment>> =
        word_dirs(&dir)?.into_iter().map(|(_, w)| (w.lemma, w.judgments)).collect();
    let report = agreement::agreement_report::<f64>(&words, metric);
    let g = &report.global;
    let show = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "undefined".into());
    say!(
        "all words: alpha {} (pooled {}), spearman {}, {} judgments",
        show(g.alpha_local),
        show(g.alpha_pooled),
        show(g.spearman_pairwise_weighted),
        g.judgment_count
    );
    if let Some(out) = cfg.pick(a.out.clone(), "out")? {
        write_out(&out, &agreement::render_word_agreement(&report, None))?;
    }
    if let Some(t) = cfg.pick(a.filter, "filter")? {
        let (kept, discarded) = agreement::filter_words_by_agreement(&report, t);
        say!("kept {} word(s), discarded {}: {}", kept.len(), discarded.len(), discarded.join(", "));
        if let Some(out) = cfg.pick(a.kept_out.clone(), "kept_out")? {
            write_out(&out, &render_word_list(&kept, None))?;
        }
    }
    Ok(())
}

fn binarize(graded: &PredictionSet<f64>, how: &str) -> Result<PredictionSet<f64>> {
    match how {
        "mean-std" | "mean_std" => baselines::binarize_mean_std(graded),
        "changepoint" => baselines::binarize_changepoint(graded),
        other => Err(Error::Precondition(format!("unknown binarization `{other}`"))),
    }
}

fn finish_submission(cfg: &Config, io: &TargetOut, sub: &Submission<f64>, seed: Option<u64>) -> Result<()> {
    let dir: PathBuf = cfg.require(io.out_dir.clone(), "out_dir")?;
    for set in sub.sets.values() {
        if !set.skipped.is_empty() {
            eprintln!("warning: {}: no score for {} word(s): {}", set.task, set.skipped.len(), set.skipped.join(", "));
        }
    }
    sub.write_dir(&dir, seed)?;
    let names: Vec<&str> = sub.sets.keys().map(|t| t.file_name()).collect();
    say!("wrote {} into {}", names.join(", "), dir.display());
    Ok(())
}

fn graded_submission(cfg: &Config, graded: PredictionSet<f64>, bin: &BinarizeFlag, default: &str) -> Result<Submission<f64>> {
    let how = cfg.or(bin.binarize.clone(), "binarize", default.to_string())?;
    let binary = binarize(&graded, &how)?;
    let mut sub = Submission::default();
    sub.insert(graded.relabeled(Task::Compare));
    sub.insert(graded);
    sub.insert(binary);
    Ok(sub)
}

fn baseline(cfg: &Config, cmd: &BaselineCmd) -> Result<()> {
    match cmd {
        BaselineCmd::Sgns {
            corpora,
            io,
            bin,
            dim,
            window,
            epochs,
            negatives,
            subsample,
            workers,
            seed,
            save_embeddings,
        } => {
            let targets = read_targets(cfg, &io.targets)?;
            let (c1, c2) = load_corpora(cfg, corpora)?;
            let d = SgnsParams::default();
            let params = SgnsParams {
                dim: cfg.or(*dim, "dim", d.dim)?,
                window: cfg.or(*window, "window", d.window)?,
                epochs: cfg.or(*epochs, "epochs", d.epochs)?,
                negatives: cfg.or(*negatives, "negatives", d.negatives)?,
                subsample: cfg.or(*subsample, "subsample", d.subsample)?,
                workers: cfg.or(*workers, "workers", d.workers)?,
                ..d
            };
            let seed = cfg.or(*seed, "seed", 0)?;
            let (graded, aligned, e2) = baselines::sgns_op_cd::<f64>(&c1, &c2, &targets, &params, seed)?;
            let sub = graded_submission(cfg, graded, bin, "mean-std")?;
            finish_submission(cfg, io, &sub, Some(seed))?;
            if *save_embeddings {
                let dir: PathBuf = cfg.require(io.out_dir.clone(), "out_dir")?;
                baselines::write_embeddings(dir.join("c1.aligned.emb"), &aligned)?;
                baselines::write_embeddings(dir.join("c2.emb"), &e2)?;
            }
            Ok(())
        }
        BaselineCmd::Freq { corpora, io, bin, norm } => {
            let targets = read_targets(cfg, &io.targets)?;
            let (c1, c2) = load_corpora(cfg, corpora)?;
            let mode = match cfg.or(norm.clone(), "norm", "log".to_string())?.as_str() {
                "log" => FreqNormalization::LogRatio,
                "linear" => FreqNormalization::Linear,
                other => return Err(Error::Precondition(format!("unknown normalization `{other}`"))),
            };
            let s1 = corpus::frequency_counts(&c1, None)?;
            let s2 = corpus::frequency_counts(&c2, None)?;
            let signed = baselines::freq_signed_diff::<f64>(&s1, &s2, &targets, mode);
            let graded = baselines::freq_diff_scores::<f64>(&s1, &s2, &targets, mode);
            let mut sub = graded_submission(cfg, graded, bin, "mean-std")?;
            let (gain, loss) = baselines::freq_gain_loss(sub.get(Task::Binary).unwrap(), &signed);
            sub.insert(gain);
            sub.insert(loss);
            finish_submission(cfg, io, &sub, None)
        }
        BaselineCmd::Profile { corpora, io, bin, features } => {
            let targets = read_targets(cfg, &io.targets)?;
            let (c1, c2) = load_corpora(cfg, corpora)?;
            let features = match cfg.or(features.clone(), "features", "both".to_string())?.as_str() {
                "both" => ProfileFeatures::Both,
                "morph" | "morphology" => ProfileFeatures::Morphology,
                "syntax" => ProfileFeatures::Syntax,
                other => return Err(Error::Precondition(format!("unknown feature set `{other}`"))),
            };
            let graded = baselines::profile_change_scores::<f64>(&c1, &c2, &targets, features)?;
            let sub = graded_submission(cfg, graded, bin, "changepoint")?;
            finish_submission(cfg, io, &sub, None)
        }
        BaselineCmd::Minority { io } => {
            let targets = read_targets(cfg, &io.targets)?;
            finish_submission(cfg, io, &baselines::minority_baseline(&targets), None)
        }
        BaselineCmd::Random { io, seed } => {
            let targets = read_targets(cfg, &io.targets)?;
            let seed = cfg.or(*seed, "seed", 0)?;
            finish_submission(cfg, io, &baselines::random_baseline(&targets, seed), Some(seed))
        }
    }
}

/// Mean of each statistic over `reps` random-baseline runs.
fn random_average(gold: &GoldSet<f64>, phase: Phase, reps: usize, seed: u64) -> Result<eval::EvalReport<f64>> {
    let words: Vec<String> = gold.words.keys().cloned().collect();
    let mut sums: BTreeMap<Task, (Vec<f64>, usize)> = BTreeMap::new();
    let mut template = None;
    for r in 0..reps {
        let sub = baselines::random_baseline(&words, seed.wrapping_add(r as u64));
        let report = eval::score_predictions(gold, &sub, phase, Coverage::Strict)?;
        for (task, res) in &report.results {
            let vals = match &res.metric {
                Metric::Spearman(v) => vec![*v],
                Metric::Binary(m) => vec![m.f1, m.precision, m.recall],
                Metric::Undefined(_) => continue,
            };
            let e = sums.entry(*task).or_insert((vec![0.0; vals.len()], 0));
            e.0.iter_mut().zip(&vals).for_each(|(s, v)| *s += v);
            e.1 += 1;
        }
        template.get_or_insert(report);
    }
    let mut report = template.ok_or_else(|| Error::Precondition("--random-reps must be positive".into()))?;
    for (task, res) in report.results.iter_mut() {
        if let Some((s, n)) = sums.get(task) {
            let m: Vec<f64> = s.iter().map(|x| x / *n as f64).collect();
            res.metric = if m.len() == 1 {
                Metric::Spearman(m[0])
            } else {
                Metric::Binary(eval::BinaryMetrics { f1: m[0], precision: m[1], recall: m[2] })
            };
        }
    }
    Ok(report)
}

fn evaluate(cfg: &Config, a: &EvaluateArgs) -> Result<()> {
    let split: Split = cfg.or(a.split.clone(), "split", "evaluation".to_string())?.parse()?;
    let gold = GoldSet::<f64>::read(existing(cfg.require(a.gold.clone(), "gold")?)?, split)?;
    let phase: Phase = cfg.or(a.phase.clone(), "phase", "2".to_string())?.parse()?;
    let mode = if a.lenient { Coverage::Lenient } else { Coverage::Strict };
    let mut rows = Vec::new();
    let mut tsv_out = None;
    if let Some(dir) = cfg.pick(a.submission.clone(), "submission")? {
        let report = eval::score_submission(&gold, &dir, phase, mode)?;
        for n in &report.notes {
            eprintln!("note: {n}");
        }
        tsv_out = Some(eval::render_report(&report, None));
        rows.push(("submission".to_string(), report));
    }
    let reps = cfg.or(a.random_reps, "random_reps", 0)?;
    if reps > 0 {
        let seed = cfg.or(a.seed, "seed", 0)?;
        rows.push((format!("random (mean of {reps})"), random_average(&gold, phase, reps, seed)?));
    }
    if rows.is_empty() {
        return Err(Error::Precondition("nothing to evaluate: give --submission or --random-reps".into()));
    }
    let table: Vec<(&str, &eval::EvalReport<f64>)> = rows.iter().map(|(n, r)| (n.as_str(), r)).collect();
    say_raw!(eval::render_table(&table));
    if let (Some(out), Some(text)) = (cfg.pick(a.out.clone(), "out")?, tsv_out) {
        write_out(&out, &text)?;
    }
    Ok(())
}

fn sweep(cfg: &Config, a: &SweepArgs) -> Result<()> {
    let gold = GoldSet::<f64>::read(existing(cfg.require(a.gold.clone(), "gold")?)?, Split::Evaluation)?;
    let graded = match (cfg.pick(a.graded.clone(), "graded")?, a.gold_scores.as_deref()) {
        (Some(path), None) => PredictionSet::<f64>::read(Task::Graded, existing(path)?)?.values,
        (None, Some("graded")) => gold.values(Task::Graded),
        (None, Some("compare")) => gold.values(Task::Compare),
        (None, Some(other)) => return Err(Error::Precondition(format!("unknown gold column `{other}`"))),
        (Some(_), Some(_)) => return Err(Error::Precondition("give either --graded or --gold-scores".into())),
        (None, None) => return Err(Error::Precondition("missing --graded (or --gold-scores)".into())),
    };
    let percentiles = match cfg.pick(a.percentiles.clone(), "percentiles")? {
        Some(list) => list
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Precondition(format!("bad percentile `{p}`"))))
            .collect::<Result<Vec<_>>>()?,
        None => eval::default_percentiles(),
    };
    let mut labels = gold.labels(Task::Binary);
    if a.gold_scores.is_some() {
        // a gold column may be undefined for some words
        labels.retain(|w, _| graded.contains_key(w));
    }
    let curve = eval::threshold_sweep(&labels, &graded, &percentiles)?;
    if let Some((p, f)) = eval::sweep_max(&curve) {
        say!("max F1 {f:.3} at percentile {p}");
    }
    let out = cfg.pick(a.out.clone(), "out")?;
    match out {
        Some(path) => write_out(&path, &eval::render_sweep(&curve, None)),
        None => {
            say_raw!(eval::render_sweep(&curve, None));
            Ok(())
        }
    }
}

fn synth_gen(cfg: &Config, a: &SynthArgs) -> Result<()> {
    let d = SynthParams::default();
    let params = SynthParams {
        vocab_size: cfg.or(a.vocab, "vocab", d.vocab_size)?,
        topics: cfg.or(a.topics, "topics", d.topics)?,
        sentences: cfg.or(a.sentences, "sentences", d.sentences)?,
        planted: cfg.or(a.planted_changes, "planted_changes", d.planted)?,
        gains: cfg.or(a.gains, "gains", d.gains)?,
        annotate_stable: cfg.or(a.annotate_stable, "annotate_stable", d.annotate_stable)?,
        usages_per_period: cfg.or(a.usages_per_period, "usages_per_period", d.usages_per_period)?,
        seed: cfg.or(a.seed, "seed", 0)?,
        ..d
    };
    let dir: PathBuf = cfg.require(a.out_dir.clone(), "out_dir")?;
    let data = synth::generate(&params)?;
    let files = data.write(&dir)?;
    say!(
        "{} planted change(s): {}; {} annotated usages, {} judgments",
        data.planted.len(),
        data.planted_lemmas().join(", "),
        data.usages.len(),
        data.judgments.len()
    );
    eprintln!("wrote {} files into {}", files.len(), dir.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Ingest(a) => ingest(&cfg, a),
        Command::Targets(a) => targets(&cfg, a),
        Command::Sample(a) => sample(&cfg, a),
        Command::WugBuild(a) => wug_build(&cfg, a),
        Command::WugCluster(a) => wug_cluster(&cfg, a),
        Command::GoldScores(a) => gold_scores(&cfg, a),
        Command::Agreement(a) => agreement_cmd(&cfg, a),
        Command::Baseline { system } => baseline(&cfg, system),
        Command::Evaluate(a) => evaluate(&cfg, a),
        Command::Sweep(a) => sweep(&cfg, a),
        Command::SynthGen(a) => synth_gen(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
