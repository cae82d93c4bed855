//! Reader for published word usage graph datasets laid out as
//! `data/<lemma>/uses.csv` and `data/<lemma>/judgments.csv`
//! (tab-separated, DWUG style).

use std::path::{Path, PathBuf};

use super::{aggregate_judgments, build_wug, read_judgments, render_judgments, Judgment, WordUsageGraph};
use crate::corpus::{read_usages, render_usages, Usage};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone)]
pub struct DatasetWord {
    pub lemma: String,
    pub usages: Vec<Usage>,
    pub judgments: Vec<Judgment>,
}

impl DatasetWord {
    /// Median-aggregated usage graph.
    pub fn graph<T: Scalar>(&self) -> Result<WordUsageGraph<T>> {
        build_wug(&self.lemma, self.usages.clone(), &aggregate_judgments(&self.judgments))
    }

    /// Writes `uses.csv` and `judgments.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>, seed: Option<u64>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("uses.csv"), render_usages(&self.usages, seed))?;
        std::fs::write(dir.join("judgments.csv"), render_judgments(&self.judgments, seed))?;
        Ok(())
    }
}

/// Directory name for a lemma: path separators and leading dots replaced.
pub fn word_dir_name(lemma: &str) -> String {
    let s: String = lemma.chars().map(|c| if matches!(c, '/' | '\\' | '\0') { '_' } else { c }).collect();
    if s.is_empty() || s.starts_with('.') {
        format!("_{s}")
    } else {
        s
    }
}

fn data_dir(root: &Path) -> PathBuf {
    let nested = root.join("data");
    if nested.is_dir() {
        nested
    } else {
        root.to_path_buf()
    }
}

/// Reads one word directory.
pub fn load_dataset_word(dir: impl AsRef<Path>) -> Result<DatasetWord> {
    let dir = dir.as_ref();
    let usages = read_usages(dir.join("uses.csv"))?;
    let judgments = read_judgments(dir.join("judgments.csv"))?;
    let lemma = usages
        .first()
        .map(|u| u.lemma.clone())
        .or_else(|| dir.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_default();
    Ok(DatasetWord {
        lemma,
        usages,
        judgments,
    })
}

/// Reads every word directory under `root` (or `root/data`), sorted by
/// directory name. A single word directory is accepted as well.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Vec<DatasetWord>> {
    let root = root.as_ref();
    if root.join("uses.csv").is_file() {
        return Ok(vec![load_dataset_word(root)?]);
    }
    let dir = data_dir(root);
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("uses.csv").is_file())
        .collect();
    if dirs.is_empty() {
        return Err(Error::NotFound(format!("no word directories under {}", dir.display())));
    }
    dirs.sort();
    dirs.iter().map(load_dataset_word).collect()
}
