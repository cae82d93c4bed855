use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{is_punct_char, normalize_lemma, Corpus, Layer, Period, SentenceRecord};
use crate::tsv::{self, TsvTable};
use crate::{Error, Result};

/// One occurrence of a target lemma in context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Usage {
    pub identifier: String,
    pub lemma: String,
    pub pos: String,
    pub period: Period,
    pub context: String,
    /// Character offsets into `context`, end exclusive.
    pub target_span: (usize, usize),
    pub sentence_id: String,
    /// Surface form of the target token when known (sampled usages).
    pub surface: Option<String>,
}

impl Usage {
    pub fn span_text(&self) -> Option<String> {
        let (start, end) = self.target_span;
        if start >= end || end > self.context.chars().count() {
            return None;
        }
        Some(self.context.chars().skip(start).take(end - start).collect())
    }
}

#[derive(Debug, Clone)]
pub struct UsageSample {
    pub usages: Vec<Usage>,
    /// Fewer occurrences than requested existed; all were returned.
    pub undersampled: bool,
    pub available: usize,
}

/// Uniform sample without replacement of `count` occurrences of `lemma`.
/// Results are in corpus order and reproducible for a fixed seed.
pub fn sample_usages(corpus: &Corpus, lemma: &str, count: usize, seed: u64) -> Result<UsageSample> {
    corpus.require(Layer::Lemma)?;
    if count == 0 {
        return Err(Error::precondition("sample size must be at least 1"));
    }
    let key = normalize_lemma(lemma);
    let occurrences: Vec<(usize, usize)> = corpus
        .sentences
        .iter()
        .enumerate()
        .flat_map(|(si, s)| {
            let key = &key;
            s.tokens
                .iter()
                .enumerate()
                .filter(move |(_, t)| normalize_lemma(&t.lemma) == *key)
                .map(move |(ti, _)| (si, ti))
        })
        .collect();
    if occurrences.is_empty() {
        return Err(Error::NotFound(format!("lemma `{lemma}` does not occur in {}", corpus.period())));
    }
    let available = occurrences.len();
    let mut picked: Vec<usize> = if available <= count {
        (0..available).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::index::sample(&mut rng, available, count).into_vec()
    };
    picked.sort_unstable();

    let usages = picked
        .into_iter()
        .map(|i| {
            let (si, ti) = occurrences[i];
            make_usage(corpus.period(), &corpus.sentences[si], ti, lemma)
        })
        .collect();
    Ok(UsageSample {
        usages,
        undersampled: available < count,
        available,
    })
}

fn make_usage(period: Period, sentence: &SentenceRecord, token: usize, lemma: &str) -> Usage {
    let (context, spans) = token_spans(sentence);
    let tok = &sentence.tokens[token];
    Usage {
        identifier: format!("{}:{}:{}", period.grouping(), sentence.id, token + 1),
        lemma: lemma.to_string(),
        pos: tok.pos.clone(),
        period,
        context,
        target_span: spans[token],
        sentence_id: sentence.id.clone(),
        surface: Some(if tok.surface.is_empty() { tok.lemma.clone() } else { tok.surface.clone() }),
    }
}

/// Context text and per-token character spans. Tokens are located in the
/// raw text left to right; if any token cannot be found the space-joined
/// token context is used instead.
fn token_spans(sentence: &SentenceRecord) -> (String, Vec<(usize, usize)>) {
    let form = |t: &super::Token| if t.surface.is_empty() { t.lemma.clone() } else { t.surface.clone() };
    if !sentence.raw_text.is_empty() {
        let raw = &sentence.raw_text;
        let mut spans = Vec::with_capacity(sentence.tokens.len());
        let mut byte_cursor = 0;
        let mut ok = true;
        for t in &sentence.tokens {
            let f = form(t);
            match raw[byte_cursor..].find(&f) {
                Some(off) => {
                    let start_b = byte_cursor + off;
                    let end_b = start_b + f.len();
                    let start = raw[..start_b].chars().count();
                    let end = start + f.chars().count();
                    spans.push((start, end));
                    byte_cursor = end_b;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return (raw.clone(), spans);
        }
    }
    let mut context = String::new();
    let mut spans = Vec::with_capacity(sentence.tokens.len());
    let mut pos = 0;
    for (i, t) in sentence.tokens.iter().enumerate() {
        if i > 0 {
            context.push(' ');
            pos += 1;
        }
        let f = form(t);
        let len = f.chars().count();
        context.push_str(&f);
        spans.push((pos, pos + len));
        pos += len;
    }
    (context, spans)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationResult {
    Ok,
    /// The span included trailing punctuation; the corrected span excludes it.
    CorrectedSpan { start: usize, end: usize, text: String },
    Mismatch { reason: String },
}

/// Checks that the target span covers a form of the usage's lemma. Uses the
/// recorded surface form when present, otherwise a shared-prefix test
/// against the lemma.
pub fn validate_target_index(usage: &Usage) -> ValidationResult {
    match &usage.surface {
        Some(s) => validate_target_index_with(usage, &[s.as_str()]),
        None => validate_target_index_with(usage, &[]),
    }
}

/// As [`validate_target_index`] with an explicit list of accepted surface
/// forms. An empty list falls back to the prefix heuristic.
pub fn validate_target_index_with(usage: &Usage, forms: &[&str]) -> ValidationResult {
    let (start, end) = usage.target_span;
    let len = usage.context.chars().count();
    if start >= end || end > len {
        return ValidationResult::Mismatch {
            reason: format!("span {start}:{end} out of bounds for context of {len} chars"),
        };
    }
    let text: String = usage.context.chars().skip(start).take(end - start).collect();
    let matches = |t: &str| -> bool {
        if t.is_empty() || t.chars().any(char::is_whitespace) {
            return false;
        }
        if forms.is_empty() {
            stem_match(t, &usage.lemma)
        } else {
            let t = normalize_lemma(t);
            forms.iter().any(|f| normalize_lemma(f) == t)
        }
    };

    // exact surface match wins, even when the form itself ends in punctuation
    if !forms.is_empty() && matches(&text) {
        return ValidationResult::Ok;
    }
    let stripped = text.trim_end_matches(is_punct_char);
    if stripped.len() < text.len() {
        if matches(stripped) {
            let end = start + stripped.chars().count();
            return ValidationResult::CorrectedSpan {
                start,
                end,
                text: stripped.to_string(),
            };
        }
    } else if matches(&text) {
        return ValidationResult::Ok;
    }
    ValidationResult::Mismatch {
        reason: format!("span text `{text}` is not a form of `{}`", usage.lemma),
    }
}

/// Inflected form heuristic: shares a prefix of at least
/// `min(4, |lemma| - 1, |text|)` characters (and at least one) with the lemma.
fn stem_match(text: &str, lemma: &str) -> bool {
    let t: Vec<char> = normalize_lemma(text).chars().collect();
    let l: Vec<char> = normalize_lemma(lemma).chars().collect();
    if t == l {
        return true;
    }
    let common = t.iter().zip(&l).take_while(|(a, b)| a == b).count();
    let need = 4.min(l.len().saturating_sub(1)).min(t.len()).max(1);
    common >= need
}

const USAGE_HEADER: [&str; 6] = ["lemma", "pos", "grouping", "identifier", "context", "indexes_target_token"];

/// Reads a usage TSV (`lemma pos grouping identifier context
/// indexes_target_token`, offsets as `start:end`).
pub fn read_usages(path: impl AsRef<Path>) -> Result<Vec<Usage>> {
    let path = path.as_ref();
    let table = TsvTable::read(path)?;
    parse_usage_table(&table).map_err(|e| tsv::with_path(e, path))
}

pub(crate) fn parse_usage_table(table: &TsvTable) -> Result<Vec<Usage>> {
    let c_lemma = table.column("lemma")?;
    let c_pos = table.column("pos").ok();
    let c_group = table.column("grouping")?;
    let c_id = table.column("identifier")?;
    let c_ctx = table.column("context")?;
    let c_idx = table.column("indexes_target_token")?;
    let c_sent = table.column("identifier_system").ok();
    table
        .rows
        .iter()
        .map(|row| {
            let idx = row.get(c_idx);
            let (s, e) = idx
                .split_once(':')
                .ok_or_else(|| Error::format(row.line, format!("bad target index `{idx}`")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::format(row.line, format!("bad target index `{idx}`")))
            };
            let period: Period = row
                .get(c_group)
                .parse()
                .map_err(|_| Error::format(row.line, format!("bad grouping `{}`", row.get(c_group))))?;
            Ok(Usage {
                identifier: row.get(c_id).to_string(),
                lemma: row.get(c_lemma).to_string(),
                pos: c_pos.map(|c| row.get(c).to_string()).unwrap_or_default(),
                period,
                context: row.get(c_ctx).to_string(),
                target_span: (parse(s)?, parse(e)?),
                sentence_id: c_sent.map(|c| row.get(c).to_string()).unwrap_or_default(),
                surface: None,
            })
        })
        .collect()
}

pub fn render_usages(usages: &[Usage], seed: Option<u64>) -> String {
    tsv::render(
        seed,
        &USAGE_HEADER,
        usages.iter().map(|u| {
            vec![
                u.lemma.clone(),
                u.pos.clone(),
                u.period.grouping().to_string(),
                u.identifier.clone(),
                u.context.replace(['\t', '\n'], " "),
                format!("{}:{}", u.target_span.0, u.target_span.1),
            ]
        }),
    )
}
