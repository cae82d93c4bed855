//! Baseline systems: SGNS + orthogonal Procrustes + cosine distance,
//! frequency difference, grammatical profiles with change-point
//! binarization, the minority-class and random baselines.

mod binarize;
mod embedding;
mod frequency;
mod procrustes;
mod profile;
mod sgns;
mod trivial;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::tsv;
use crate::{Error, Result, Scalar};

pub use binarize::{binarize_changepoint, binarize_mean_std, changepoint_split};
pub use embedding::{read_embeddings, write_embeddings, EmbeddingMatrix};
pub use frequency::{freq_diff_scores, freq_gain_loss, freq_signed_diff, normalized_frequency, FreqNormalization};
pub use procrustes::{cosine_change_scores, orthogonal_procrustes, preprocess, sgns_op_cd};
pub use profile::{grammatical_profiles, profile_change_scores, GrammaticalProfile, ProfileFeatures};
pub use sgns::{train_sgns, train_sgns_with_report, SgnsParams, TrainReport};
pub use trivial::{minority_baseline, random_baseline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    Graded,
    Compare,
    Binary,
    Gain,
    Loss,
}

impl Task {
    pub const ALL: [Task; 5] = [Task::Graded, Task::Compare, Task::Binary, Task::Gain, Task::Loss];

    pub fn is_binary(self) -> bool {
        matches!(self, Task::Binary | Task::Gain | Task::Loss)
    }

    /// File name inside a submission directory.
    pub fn file_name(self) -> &'static str {
        match self {
            Task::Graded => "graded.tsv",
            Task::Compare => "compare.tsv",
            Task::Binary => "binary.tsv",
            Task::Gain => "gain.tsv",
            Task::Loss => "loss.tsv",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Graded => "graded",
            Task::Compare => "compare",
            Task::Binary => "binary",
            Task::Gain => "gain",
            Task::Loss => "loss",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| Error::precondition(format!("unknown subtask `{s}`")))
    }
}

/// Per-word predictions for one subtask. Words a system could not score are
/// listed in `skipped` rather than silently dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet<T> {
    pub task: Task,
    pub values: BTreeMap<String, T>,
    pub skipped: Vec<String>,
}

impl<T: Scalar> PredictionSet<T> {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            values: BTreeMap::new(),
            skipped: Vec::new(),
        }
    }

    pub fn from_values(task: Task, values: BTreeMap<String, T>) -> Self {
        Self {
            task,
            values,
            skipped: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same values under another subtask name.
    pub fn relabeled(&self, task: Task) -> Self {
        Self { task, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        for (w, &v) in &self.values {
            if !v.is_finite() {
                return Err(Error::precondition(format!("non-finite prediction for `{w}`")));
            }
            if self.task.is_binary() && v != T::zero() && v != T::one() {
                return Err(Error::precondition(format!("{} prediction for `{w}` is {v}, not 0 or 1", self.task)));
            }
        }
        Ok(())
    }

    /// `lemma<TAB>value` rows, preceded by a provenance comment.
    pub fn render(&self, seed: Option<u64>) -> Result<String> {
        self.validate()?;
        let mut out = tsv::provenance(seed);
        out.push('\n');
        for (w, v) in &self.values {
            if self.task.is_binary() {
                out.push_str(&format!("{w}\t{}\n", if *v == T::one() { 1 } else { 0 }));
            } else {
                out.push_str(&format!("{w}\t{v}\n"));
            }
        }
        Ok(out)
    }

    /// Parses headerless `lemma<TAB>value` rows.
    pub fn parse(task: Task, text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = i + 1;
            let (word, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(lineno, "expected `lemma<TAB>value`"))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::format(lineno, format!("`{}` is not a number", value.trim())))?;
            if !v.is_finite() {
                return Err(Error::format(lineno, "non-finite value"));
            }
            if task.is_binary() && v != 0.0 && v != 1.0 {
                return Err(Error::format(lineno, format!("{task} label `{}` is not 0 or 1", value.trim())));
            }
            if values.insert(word.trim().to_string(), T::of(v)).is_some() {
                return Err(Error::format(lineno, format!("duplicate word `{}`", word.trim())));
            }
        }
        Ok(Self::from_values(task, values))
    }

    pub fn read(task: Task, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(task, &text).map_err(|e| tsv::with_path(e, path))
    }
}

/// Predictions for any subset of the subtasks.
#[derive(Debug, Clone, PartialEq)]
pub struct Submission<T> {
    pub sets: BTreeMap<Task, PredictionSet<T>>,
}

impl<T: Scalar> Default for Submission<T> {
    fn default() -> Self {
        Self { sets: BTreeMap::new() }
    }
}

impl<T: Scalar> Submission<T> {
    pub fn insert(&mut self, set: PredictionSet<T>) {
        self.sets.insert(set.task, set);
    }

    pub fn get(&self, task: Task) -> Option<&PredictionSet<T>> {
        self.sets.get(&task)
    }

    /// Writes one file per subtask into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>, seed: Option<u64>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for set in self.sets.values() {
            std::fs::write(dir.join(set.task.file_name()), set.render(seed)?)?;
        }
        Ok(())
    }

    /// Reads whichever subtask files exist in `dir`.
    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut sub = Self::default();
        for task in Task::ALL {
            let path = dir.join(task.file_name());
            if path.is_file() {
                sub.insert(PredictionSet::read(task, &path)?);
            }
        }
        Ok(sub)
    }
}

/// Reads a plain word list (one lemma per line, `#` comments).
pub fn read_word_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap_or(l).to_string())
        .collect())
}
