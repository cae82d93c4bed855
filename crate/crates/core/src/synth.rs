//! Synthetic diachronic corpora with planted sense changes.
//!
//! Content words belong to topics; every sentence draws its content words
//! from one topic. A planted word changes topic between the periods
//! (`Switch`) or picks up an extra one (`Gain`), which moves its context
//! distribution and its sense inventory. Some unplanted words are stably
//! polysemous (two topics in both periods). Usages of an annotation subset
//! are sampled and judged by simulated annotators whose ratings depend on
//! whether two usages share a topic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{render_usages, sample_usages, Corpus, Layer, Period, Usage};
use crate::tsv;
use crate::wug::{render_judgments, Judgment};
use crate::{Error, Result};

const FUNCTION_WORDS: [(&str, &str, &str); 12] = [
    ("el", "DET", "det"),
    ("la", "DET", "det"),
    ("los", "DET", "det"),
    ("un", "DET", "det"),
    ("de", "ADP", "case"),
    ("en", "ADP", "case"),
    ("con", "ADP", "case"),
    ("por", "ADP", "case"),
    ("y", "CCONJ", "cc"),
    ("o", "CCONJ", "cc"),
    ("que", "SCONJ", "mark"),
    ("se", "PRON", "expl"),
];

const SYLLABLES: [&str; 10] = ["ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "pe", "du"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantKind {
    /// All period-2 usages move to a new topic.
    Switch,
    /// Period-2 usages spread over the old and a new topic.
    Gain,
}

impl PlantKind {
    fn as_str(self) -> &'static str {
        match self {
            PlantKind::Switch => "switch",
            PlantKind::Gain => "gain",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthParams {
    /// Total vocabulary including the function words.
    pub vocab_size: usize,
    pub topics: usize,
    pub sentences: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub planted: usize,
    /// How many of the planted words gain a topic instead of switching.
    pub gains: usize,
    /// Share of tokens that are function words.
    pub function_rate: f64,
    /// Every `polysemy_every`-th unplanted content word has two topics.
    pub polysemy_every: usize,
    /// Unplanted words added to the annotation subset.
    pub annotate_stable: usize,
    pub usages_per_period: usize,
    pub annotators: usize,
    /// Probability that a usage pair is judged.
    pub pair_rate: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            vocab_size: 500,
            topics: 10,
            sentences: 4000,
            min_len: 8,
            max_len: 14,
            planted: 5,
            gains: 0,
            function_rate: 0.25,
            polysemy_every: 7,
            annotate_stable: 10,
            usages_per_period: 10,
            annotators: 3,
            pair_rate: 0.6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedWord {
    pub lemma: String,
    pub kind: PlantKind,
    pub from_topic: usize,
    pub to_topic: usize,
}

#[derive(Debug, Clone)]
struct Lexeme {
    lemma: String,
    pos: &'static str,
    weight: f64,
    topics: [Vec<usize>; 2],
}

/// One generated period in all three layers plus the topic of each
/// sentence.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub period: Period,
    pub lemma_text: String,
    pub token_text: String,
    pub conllu: String,
    pub sentence_topics: Vec<usize>,
}

impl SynthCorpus {
    pub fn corpus(&self) -> Result<Corpus> {
        Corpus::parse_layer(self.period, Layer::Conllu, &self.conllu)
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub params: SynthParams,
    pub corpora: [SynthCorpus; 2],
    pub planted: Vec<PlantedWord>,
    /// Content lemmas in vocabulary order.
    pub content_words: Vec<String>,
    pub usages: Vec<Usage>,
    pub judgments: Vec<Judgment>,
}

fn lemma_name(i: usize) -> String {
    let mut s = String::new();
    let mut x = i;
    for _ in 0..3 {
        s.push_str(SYLLABLES[x % 10]);
        x /= 10;
    }
    s
}

fn content_pos(i: usize) -> &'static str {
    match i % 8 {
        0..=3 => "NOUN",
        4 | 5 => "VERB",
        6 => "ADJ",
        _ => "ADV",
    }
}

fn build_lexicon(p: &SynthParams, rng: &mut ChaCha8Rng) -> Result<(Vec<Lexeme>, Vec<PlantedWord>)> {
    let n_content = p.vocab_size.checked_sub(FUNCTION_WORDS.len()).filter(|&n| n > 0);
    let Some(n_content) = n_content else {
        return Err(Error::precondition(format!(
            "vocabulary must exceed {} function words",
            FUNCTION_WORDS.len()
        )));
    };
    if n_content > 1000 {
        return Err(Error::precondition("at most 1000 content words are supported"));
    }
    if p.topics < 2 {
        return Err(Error::precondition("need at least two topics"));
    }
    if p.planted > n_content || p.gains > p.planted {
        return Err(Error::precondition("too many planted words"));
    }
    let mut lex: Vec<Lexeme> = (0..n_content)
        .map(|i| {
            let home = i % p.topics;
            let rank = i / p.topics;
            Lexeme {
                lemma: lemma_name(i),
                pos: content_pos(i),
                // gentle Zipf inside each topic keeps every word reasonably frequent
                weight: 1.0 / ((rank + 1) as f64).sqrt(),
                topics: [vec![home], vec![home]],
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n_content).collect();
    order.shuffle(rng);
    let planted_idx: Vec<usize> = order[..p.planted].to_vec();
    let planted_set: BTreeSet<usize> = planted_idx.iter().copied().collect();
    if p.polysemy_every > 0 {
        for (i, lx) in lex.iter_mut().enumerate() {
            if i % p.polysemy_every == p.polysemy_every - 1 && !planted_set.contains(&i) {
                let extra = (i / p.topics + 1 + i % p.topics) % p.topics;
                let extra = if extra == lx.topics[0][0] { (extra + 1) % p.topics } else { extra };
                lx.topics = [vec![lx.topics[0][0], extra], vec![lx.topics[0][0], extra]];
            }
        }
    }
    let mut planted = Vec::new();
    for (j, &i) in planted_idx.iter().enumerate() {
        let from = lex[i].topics[0][0];
        let to = (from + rng.gen_range(1..p.topics)) % p.topics;
        let kind = if j < p.gains { PlantKind::Gain } else { PlantKind::Switch };
        lex[i].topics[1] = match kind {
            PlantKind::Switch => vec![to],
            PlantKind::Gain => vec![from, to],
        };
        planted.push(PlantedWord {
            lemma: lex[i].lemma.clone(),
            kind,
            from_topic: from,
            to_topic: to,
        });
    }
    planted.sort_by(|a, b| a.lemma.cmp(&b.lemma));
    Ok((lex, planted))
}

struct TokenOut {
    form: String,
    lemma: String,
    pos: &'static str,
    feats: &'static str,
    deprel: &'static str,
}

fn inflect(lx: &Lexeme, rng: &mut ChaCha8Rng) -> (String, &'static str, &'static str) {
    match lx.pos {
        "NOUN" if rng.gen_bool(0.3) => (format!("{}s", lx.lemma), "Number=Plur", "obj"),
        "NOUN" => (lx.lemma.clone(), "Number=Sing", "nsubj"),
        "VERB" if rng.gen_bool(0.4) => (format!("{}ba", lx.lemma), "Tense=Past", "root"),
        "VERB" => (format!("{}n", lx.lemma), "Tense=Pres", "root"),
        "ADJ" => (lx.lemma.clone(), "Number=Sing", "amod"),
        _ => (lx.lemma.clone(), "_", "advmod"),
    }
}

fn generate_period(
    p: &SynthParams,
    lex: &[Lexeme],
    period: Period,
    rng: &mut ChaCha8Rng,
) -> Result<SynthCorpus> {
    let pi = period.index();
    let pools: Vec<(Vec<usize>, WeightedIndex<f64>)> = (0..p.topics)
        .map(|t| {
            let members: Vec<usize> = (0..lex.len()).filter(|&i| lex[i].topics[pi].contains(&t)).collect();
            if members.is_empty() {
                return Err(Error::precondition(format!("topic {t} has no words")));
            }
            let dist = WeightedIndex::new(members.iter().map(|&i| lex[i].weight))
                .map_err(|e| Error::precondition(e.to_string()))?;
            Ok((members, dist))
        })
        .collect::<Result<_>>()?;
    let (mut lemma_text, mut token_text, mut conllu) = (String::new(), String::new(), String::new());
    let mut sentence_topics = Vec::with_capacity(p.sentences);
    for s in 0..p.sentences {
        let topic = rng.gen_range(0..p.topics);
        sentence_topics.push(topic);
        let len = rng.gen_range(p.min_len..=p.max_len.max(p.min_len));
        let mut toks: Vec<TokenOut> = (0..len)
            .map(|_| {
                if rng.gen_bool(p.function_rate) {
                    let (w, pos, rel) = FUNCTION_WORDS[rng.gen_range(0..FUNCTION_WORDS.len())];
                    TokenOut {
                        form: w.into(),
                        lemma: w.into(),
                        pos,
                        feats: "_",
                        deprel: rel,
                    }
                } else {
                    let (members, dist) = &pools[topic];
                    let lx = &lex[members[dist.sample(rng)]];
                    let (form, feats, deprel) = inflect(lx, rng);
                    TokenOut {
                        form,
                        lemma: lx.lemma.clone(),
                        pos: lx.pos,
                        feats,
                        deprel,
                    }
                }
            })
            .collect();
        toks.push(TokenOut {
            form: ".".into(),
            lemma: ".".into(),
            pos: "PUNCT",
            feats: "_",
            deprel: "punct",
        });
        let root = toks.iter().position(|t| t.deprel == "root").unwrap_or(0);
        let lemmas: Vec<&str> = toks.iter().map(|t| t.lemma.as_str()).collect();
        let forms: Vec<&str> = toks.iter().map(|t| t.form.as_str()).collect();
        let _ = writeln!(lemma_text, "{}", lemmas.join(" "));
        let _ = writeln!(token_text, "{}", forms.join(" "));
        let _ = writeln!(conllu, "# sent_id = s{}", s + 1);
        let _ = writeln!(conllu, "# text = {}", forms.join(" "));
        for (i, t) in toks.iter().enumerate() {
            let (head, rel) = if i == root {
                (0, "root")
            } else {
                (root + 1, if t.deprel == "root" { "conj" } else { t.deprel })
            };
            let _ = writeln!(
                conllu,
                "{}\t{}\t{}\t{}\t_\t{}\t{}\t{}\t_\t_",
                i + 1,
                t.form,
                t.lemma,
                t.pos,
                t.feats,
                head,
                rel
            );
        }
        conllu.push('\n');
    }
    Ok(SynthCorpus {
        period,
        lemma_text,
        token_text,
        conllu,
        sentence_topics,
    })
}

fn judge(same: bool, rng: &mut ChaCha8Rng) -> u8 {
    if rng.gen_bool(0.02) {
        return 0;
    }
    match (same, rng.gen_bool(0.75)) {
        (true, true) => 4,
        (true, false) => 3,
        (false, true) => 1,
        (false, false) => 2,
    }
}

fn sentence_index(id: &str) -> Option<usize> {
    id.strip_prefix('s')?.parse::<usize>().ok()?.checked_sub(1)
}

/// Generates both corpora, the planted-word manifest and a simulated
/// annotation of planted plus some stable words.
pub fn generate(params: &SynthParams) -> Result<SynthData> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (lex, planted) = build_lexicon(params, &mut rng)?;
    let c1 = generate_period(params, &lex, Period::C1, &mut rng)?;
    let c2 = generate_period(params, &lex, Period::C2, &mut rng)?;

    let planted_set: BTreeSet<&str> = planted.iter().map(|w| w.lemma.as_str()).collect();
    let mut stable: Vec<&Lexeme> = lex.iter().filter(|l| !planted_set.contains(l.lemma.as_str())).collect();
    stable.shuffle(&mut rng);
    let mut annotate: Vec<String> = planted.iter().map(|w| w.lemma.clone()).collect();
    annotate.extend(stable.iter().take(params.annotate_stable).map(|l| l.lemma.clone()));
    annotate.sort();

    let corpora = [c1.corpus()?, c2.corpus()?];
    let synth = [&c1, &c2];
    let mut usages = Vec::new();
    let mut judgments = Vec::new();
    for (wi, lemma) in annotate.iter().enumerate() {
        let mut word_usages: Vec<(Usage, usize)> = Vec::new();
        for (pi, corpus) in corpora.iter().enumerate() {
            let sample = sample_usages(corpus, lemma, params.usages_per_period, params.seed.wrapping_add(wi as u64 * 2 + pi as u64))?;
            for u in sample.usages {
                let topic = sentence_index(&u.sentence_id)
                    .and_then(|i| synth[pi].sentence_topics.get(i).copied())
                    .ok_or_else(|| Error::Integrity(format!("unknown sentence `{}`", u.sentence_id)))?;
                word_usages.push((u, topic));
            }
        }
        for a in 0..word_usages.len() {
            for b in a + 1..word_usages.len() {
                if !rng.gen_bool(params.pair_rate) {
                    continue;
                }
                let same = word_usages[a].1 == word_usages[b].1;
                for ann in 0..params.annotators {
                    judgments.push(Judgment::new(
                        &word_usages[a].0.identifier,
                        &word_usages[b].0.identifier,
                        &format!("annotator{}", ann + 1),
                        judge(same, &mut rng),
                    )?);
                }
            }
        }
        usages.extend(word_usages.into_iter().map(|(u, _)| u));
    }

    Ok(SynthData {
        params: params.clone(),
        corpora: [c1, c2],
        planted,
        content_words: lex.into_iter().map(|l| l.lemma).collect(),
        usages,
        judgments,
    })
}

impl SynthData {
    pub fn planted_lemmas(&self) -> Vec<String> {
        self.planted.iter().map(|w| w.lemma.clone()).collect()
    }

    pub fn render_manifest(&self) -> String {
        tsv::render(
            Some(self.params.seed),
            &["lemma", "kind", "topic_c1", "topic_c2"],
            self.planted.iter().map(|w| {
                vec![
                    w.lemma.clone(),
                    w.kind.as_str().to_string(),
                    w.from_topic.to_string(),
                    w.to_topic.to_string(),
                ]
            }),
        )
    }

    /// Lemmas of the simulated annotation, sorted.
    pub fn annotated_lemmas(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.usages.iter().map(|u| u.lemma.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    /// Writes `c{1,2}.{lemma,token}.txt`, `c{1,2}.conllu`, `planted.tsv`,
    /// `annotated.txt`, `uses.tsv` and `judgments.tsv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<BTreeMap<&'static str, std::path::PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let seed = Some(self.params.seed);
        let mut files = BTreeMap::new();
        let mut put = |name: &'static str, text: String| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, text)?;
            files.insert(name, path);
            Ok(())
        };
        // plain-text layers are one sentence per line and carry no comment
        // header, so their line numbers stay aligned with sentence ids
        let [c1, c2] = &self.corpora;
        put("c1.lemma.txt", c1.lemma_text.clone())?;
        put("c1.token.txt", c1.token_text.clone())?;
        put("c1.conllu", format!("{}\n{}", tsv::provenance(seed), c1.conllu))?;
        put("c2.lemma.txt", c2.lemma_text.clone())?;
        put("c2.token.txt", c2.token_text.clone())?;
        put("c2.conllu", format!("{}\n{}", tsv::provenance(seed), c2.conllu))?;
        put("planted.tsv", self.render_manifest())?;
        let mut words = tsv::provenance(seed);
        for w in self.annotated_lemmas() {
            words.push('\n');
            words.push_str(&w);
        }
        words.push('\n');
        put("annotated.txt", words)?;
        put("uses.tsv", render_usages(&self.usages, seed))?;
        put("judgments.tsv", render_judgments(&self.judgments, seed))?;
        Ok(files)
    }
}
