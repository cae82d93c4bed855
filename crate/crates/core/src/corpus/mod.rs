//! Layered diachronic corpora: loading, vocabulary statistics, target
//! selection and usage sampling.

mod conllu;
mod usage;
mod vocab;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use unicode_normalization::UnicodeNormalization;

use crate::{Error, Result};

pub use conllu::parse_conllu;
pub use usage::{
    read_usages, render_usages, sample_usages, validate_target_index, validate_target_index_with,
    Usage, UsageSample, ValidationResult,
};
pub use vocab::{
    derive_second_threshold, frequency_counts, select_targets, VocabStats, CONTENT_POS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Period {
    C1,
    C2,
}

impl Period {
    pub fn index(self) -> usize {
        match self {
            Period::C1 => 0,
            Period::C2 => 1,
        }
    }

    /// Value of the `grouping` column in usage files.
    pub fn grouping(self) -> &'static str {
        match self {
            Period::C1 => "1",
            Period::C2 => "2",
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Period::C1 => "C1",
            Period::C2 => "C2",
        })
    }
}

impl FromStr for Period {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "C1" | "c1" | "old" => Ok(Period::C1),
            "2" | "C2" | "c2" | "new" => Ok(Period::C2),
            other => Err(Error::precondition(format!("unknown period `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    Raw,
    Token,
    Lemma,
    Pos,
    Conllu,
}

impl Layer {
    /// Layers that carry one entry per token.
    fn is_tokenized(self) -> bool {
        !matches!(self, Layer::Raw)
    }
}

impl FromStr for Layer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Layer::Raw),
            "token" => Ok(Layer::Token),
            "lemma" => Ok(Layer::Lemma),
            "pos" => Ok(Layer::Pos),
            "conllu" => Ok(Layer::Conllu),
            other => Err(Error::precondition(format!("unknown layer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    /// Universal POS tag; empty when no POS layer is loaded.
    pub pos: String,
    pub morph: BTreeMap<String, String>,
    /// Dependency relation, only from CoNLL-U.
    pub deprel: Option<String>,
}

impl Token {
    pub fn is_punct(&self) -> bool {
        if !self.pos.is_empty() {
            return self.pos == "PUNCT";
        }
        let s = if self.surface.is_empty() { &self.lemma } else { &self.surface };
        !s.is_empty() && s.chars().all(is_punct_char)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceRecord {
    pub id: String,
    pub tokens: Vec<Token>,
    pub raw_text: String,
}

impl SentenceRecord {
    /// Text used as usage context: the raw layer if loaded, otherwise the
    /// surface tokens joined by single spaces.
    pub fn context(&self) -> String {
        if !self.raw_text.is_empty() {
            return self.raw_text.clone();
        }
        self.tokens
            .iter()
            .map(|t| if t.surface.is_empty() { t.lemma.as_str() } else { t.surface.as_str() })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    period: Period,
    pub sentences: Vec<SentenceRecord>,
    pub layers: BTreeSet<Layer>,
}

impl Corpus {
    pub fn new(period: Period) -> Self {
        Self {
            period,
            sentences: Vec::new(),
            layers: BTreeSet::new(),
        }
    }

    pub fn period(&self) -> Period {
        self.period
    }

    pub fn has_layer(&self, layer: Layer) -> bool {
        self.layers.contains(&layer)
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    /// Parses one layer from text. Line formats carry one sentence per line;
    /// the `conllu` layer fills surface, lemma, POS, morphology and deprel.
    pub fn parse_layer(period: Period, layer: Layer, text: &str) -> Result<Self> {
        let mut corpus = Corpus::new(period);
        match layer {
            Layer::Conllu => {
                corpus.sentences = parse_conllu(text)?;
                corpus.layers.extend([Layer::Token, Layer::Lemma, Layer::Pos, Layer::Conllu]);
            }
            _ => {
                for (i, line) in text.lines().enumerate() {
                    let line = line.strip_suffix('\r').unwrap_or(line);
                    if line.trim().is_empty() {
                        continue;
                    }
                    let id = format!("s{}", i + 1);
                    let mut record = SentenceRecord {
                        id,
                        tokens: Vec::new(),
                        raw_text: String::new(),
                    };
                    for item in line.split_whitespace() {
                        let mut tok = Token::default();
                        match layer {
                            Layer::Raw | Layer::Token => tok.surface = item.to_string(),
                            Layer::Lemma => tok.lemma = item.to_string(),
                            Layer::Pos => tok.pos = item.to_string(),
                            Layer::Conllu => unreachable!(),
                        }
                        record.tokens.push(tok);
                    }
                    if layer == Layer::Raw {
                        record.raw_text = line.to_string();
                    }
                    corpus.sentences.push(record);
                }
                corpus.layers.insert(layer);
            }
        }
        Ok(corpus)
    }

    /// Merges the layers of `other` (same sentences, same order) into
    /// `self`. Tokenized layers must agree on token counts.
    pub fn merge(&mut self, other: Corpus) -> Result<()> {
        if self.sentences.is_empty() && self.layers.is_empty() {
            *self = Corpus { period: self.period, ..other };
            return Ok(());
        }
        if other.sentences.len() != self.sentences.len() {
            return Err(Error::Integrity(format!(
                "layer has {} sentences, corpus has {}",
                other.sentences.len(),
                self.sentences.len()
            )));
        }
        let self_tokenized = self.layers.iter().any(|l| l.is_tokenized());
        let other_tokenized = other.layers.iter().any(|l| l.is_tokenized());
        let only_raw_self = !self_tokenized;
        for (mine, theirs) in self.sentences.iter_mut().zip(other.sentences) {
            if !theirs.raw_text.is_empty() {
                mine.raw_text = theirs.raw_text.clone();
            }
            if !other_tokenized {
                continue;
            }
            if only_raw_self {
                // raw whitespace tokens are provisional; the tokenized layer replaces them
                let raw = std::mem::take(&mut mine.raw_text);
                *mine = SentenceRecord { raw_text: raw, ..theirs };
                continue;
            }
            if mine.tokens.len() != theirs.tokens.len() {
                return Err(Error::Integrity(format!(
                    "sentence {}: {} tokens in loaded layers, {} in new layer",
                    mine.id,
                    mine.tokens.len(),
                    theirs.tokens.len()
                )));
            }
            for (a, b) in mine.tokens.iter_mut().zip(theirs.tokens) {
                if !b.surface.is_empty() {
                    a.surface = b.surface;
                }
                if !b.lemma.is_empty() {
                    a.lemma = b.lemma;
                }
                if !b.pos.is_empty() {
                    a.pos = b.pos;
                }
                if !b.morph.is_empty() {
                    a.morph = b.morph;
                }
                if b.deprel.is_some() {
                    a.deprel = b.deprel;
                }
            }
        }
        self.layers.extend(other.layers);
        Ok(())
    }

    pub(crate) fn require(&self, layer: Layer) -> Result<()> {
        if self.has_layer(layer) {
            Ok(())
        } else {
            Err(Error::precondition(format!("{layer:?} layer not loaded")))
        }
    }
}

/// Loads one layer of a corpus file.
pub fn load_corpus(path: impl AsRef<Path>, layer: Layer, period: Period) -> Result<Corpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    Corpus::parse_layer(period, layer, &text).map_err(|e| crate::tsv::with_path(e, path))
}

/// Loads and merges several layer files of one period.
pub fn load_layers<P: AsRef<Path>>(period: Period, files: &[(Layer, P)]) -> Result<Corpus> {
    let mut corpus = Corpus::new(period);
    for (layer, path) in files {
        corpus.merge(load_corpus(path, *layer, period)?)?;
    }
    Ok(corpus)
}

/// Lemma key: Unicode NFC, lowercased.
pub fn normalize_lemma(s: &str) -> String {
    s.nfc().collect::<String>().to_lowercase()
}

pub(crate) fn is_punct_char(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '«' | '»' | '¿' | '¡' | '…' | '“' | '”' | '‘' | '’' | '—' | '–' | '·' | '„' | '‹' | '›'
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_lines() {
        let c = Corpus::parse_layer(Period::C1, Layer::Lemma, "el gato correr\nel perro dormir").unwrap();
        assert_eq!(c.sentences.len(), 2);
        assert_eq!(c.token_count(), 6);
        assert_eq!(c.sentences[1].tokens[1].lemma, "perro");
    }

    #[test]
    fn layer_length_mismatch_names_sentence() {
        let mut c = Corpus::parse_layer(Period::C1, Layer::Token, "a b c\nd e").unwrap();
        let lem = Corpus::parse_layer(Period::C1, Layer::Lemma, "a b c x\nd e").unwrap();
        match c.merge(lem) {
            Err(Error::Integrity(msg)) => assert!(msg.contains("s1"), "{msg}"),
            other => panic!("expected integrity error, got {other:?}"),
        }
    }

    #[test]
    fn merged_layers_align() {
        let mut c = Corpus::parse_layer(Period::C2, Layer::Token, "Los gatos corrían").unwrap();
        c.merge(Corpus::parse_layer(Period::C2, Layer::Lemma, "el gato correr").unwrap()).unwrap();
        c.merge(Corpus::parse_layer(Period::C2, Layer::Pos, "DET NOUN VERB").unwrap()).unwrap();
        let t = &c.sentences[0].tokens[1];
        assert_eq!((t.surface.as_str(), t.lemma.as_str(), t.pos.as_str()), ("gatos", "gato", "NOUN"));
        assert!(c.has_layer(Layer::Pos) && c.has_layer(Layer::Lemma));
    }

    #[test]
    fn raw_layer_kept_as_context() {
        let mut c = Corpus::parse_layer(Period::C1, Layer::Raw, "Los gatos, corrían.").unwrap();
        c.merge(Corpus::parse_layer(Period::C1, Layer::Token, "Los gatos , corrían .").unwrap()).unwrap();
        assert_eq!(c.sentences[0].tokens.len(), 5);
        assert_eq!(c.sentences[0].context(), "Los gatos, corrían.");
    }

    #[test]
    fn lemma_normalization() {
        assert_eq!(normalize_lemma("Sexo"), "sexo");
        // decomposed é
        assert_eq!(normalize_lemma("cafe\u{301}"), "café");
    }
}
