//! Submission scoring for both task phases, plus percentile threshold
//! sweeps over graded predictions.
//!
//! Rank correlation uses average (fractional) ranks for ties. Binary
//! metrics take 1 as the positive class with these zero-denominator rules:
//! precision with no predicted positives is 0, recall with no gold
//! positives is undefined, and F1 with P = R = 0 is 0.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use crate::baselines::{PredictionSet, Submission, Task};
use crate::change::{read_gold, ChangeScores};
use crate::tsv;
use crate::{stats, Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Split {
    Development,
    #[default]
    Evaluation,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Development => "development",
            Split::Evaluation => "evaluation",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dev" | "development" => Ok(Split::Development),
            "eval" | "evaluation" | "test" => Ok(Split::Evaluation),
            _ => Err(Error::precondition(format!("unknown split `{s}`"))),
        }
    }
}

/// Annotated gold words. Every entry carries graded and binary change;
/// COMPARE, gain and loss may be missing and are then left out of the
/// respective subtask.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldSet<T> {
    pub words: BTreeMap<String, ChangeScores<T>>,
    pub split: Split,
}

impl<T: Scalar> GoldSet<T> {
    pub fn new(scores: Vec<ChangeScores<T>>, split: Split) -> Result<Self> {
        let mut words = BTreeMap::new();
        for s in scores {
            if s.graded.is_none() || s.binary.is_none() {
                return Err(Error::Integrity(format!(
                    "gold word `{}` lacks a graded or binary score",
                    s.lemma
                )));
            }
            let lemma = s.lemma.clone();
            if words.insert(lemma.clone(), s).is_some() {
                return Err(Error::Integrity(format!("duplicate gold word `{lemma}`")));
            }
        }
        Ok(Self { words, split })
    }

    pub fn read(path: impl AsRef<Path>, split: Split) -> Result<Self> {
        Self::new(read_gold(path)?, split)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Gold values for one subtask; binary labels are 0/1.
    pub fn values(&self, task: Task) -> BTreeMap<String, T> {
        let b = |v: bool| if v { T::one() } else { T::zero() };
        self.words
            .iter()
            .filter_map(|(w, s)| {
                let v = match task {
                    Task::Graded => s.graded,
                    Task::Compare => s.compare_negated,
                    Task::Binary => s.binary.map(b),
                    Task::Gain => s.gain.map(b),
                    Task::Loss => s.loss.map(b),
                }?;
                Some((w.clone(), v))
            })
            .collect()
    }

    pub fn labels(&self, task: Task) -> BTreeMap<String, bool> {
        self.values(task).into_iter().map(|(w, v)| (w, v == T::one())).collect()
    }
}

fn missing<T, U>(gold: &BTreeMap<String, T>, pred: &BTreeMap<String, U>) -> Vec<String> {
    gold.keys().filter(|w| !pred.contains_key(*w)).cloned().collect()
}

fn require_coverage<T, U>(gold: &BTreeMap<String, T>, pred: &BTreeMap<String, U>) -> Result<()> {
    let miss = missing(gold, pred);
    if miss.is_empty() {
        Ok(())
    } else {
        Err(Error::MissingWords(miss))
    }
}

/// Spearman's rho over the gold words. Every gold word must be predicted.
pub fn spearman<T: Scalar>(gold: &BTreeMap<String, T>, pred: &BTreeMap<String, T>) -> Result<T> {
    require_coverage(gold, pred)?;
    spearman_common(gold, pred)
}

/// Spearman's rho over the words present in both maps.
pub fn spearman_common<T: Scalar>(gold: &BTreeMap<String, T>, pred: &BTreeMap<String, T>) -> Result<T> {
    let (g, p): (Vec<T>, Vec<T>) = gold
        .iter()
        .filter_map(|(w, &g)| pred.get(w).map(|&p| (g, p)))
        .unzip();
    if g.len() < 3 {
        return Err(Error::undefined(format!("Spearman needs at least 3 common words, got {}", g.len())));
    }
    if g.iter().all(|&x| x == g[0]) {
        return Err(Error::undefined("gold scores are constant"));
    }
    stats::spearman_rho(&g, &p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryMetrics<T> {
    pub f1: T,
    pub precision: T,
    pub recall: T,
}

/// F1, precision and recall of `pred` against the gold labels; every gold
/// word must be predicted with a 0/1 value.
pub fn binary_metrics<T: Scalar>(gold: &BTreeMap<String, bool>, pred: &BTreeMap<String, T>) -> Result<BinaryMetrics<T>> {
    require_coverage(gold, pred)?;
    binary_metrics_common(gold, pred)
}

/// Binary metrics over the words present in both maps.
pub fn binary_metrics_common<T: Scalar>(
    gold: &BTreeMap<String, bool>,
    pred: &BTreeMap<String, T>,
) -> Result<BinaryMetrics<T>> {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (w, &g) in gold {
        let Some(&p) = pred.get(w) else { continue };
        let p = if p == T::one() {
            true
        } else if p == T::zero() {
            false
        } else {
            return Err(Error::precondition(format!("label for `{w}` is {p}, not 0 or 1")));
        };
        match (g, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp + fn_ == 0 {
        return Err(Error::undefined("recall is undefined without gold positives"));
    }
    let precision = if tp + fp == 0 {
        T::zero()
    } else {
        T::of_usize(tp) / T::of_usize(tp + fp)
    };
    let recall = T::of_usize(tp) / T::of_usize(tp + fn_);
    let f1 = if precision + recall == T::zero() {
        T::zero()
    } else {
        T::of(2.0) * precision * recall / (precision + recall)
    };
    Ok(BinaryMetrics { f1, precision, recall })
}

/// Evaluation phase: graded change is obligatory in phase 1, binary change
/// in phase 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Phase {
    One,
    #[default]
    Two,
}

impl Phase {
    pub fn obligatory(self) -> Task {
        match self {
            Phase::One => Task::Graded,
            Phase::Two => Task::Binary,
        }
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "one" => Ok(Phase::One),
            "2" | "two" => Ok(Phase::Two),
            _ => Err(Error::precondition(format!("unknown phase `{s}`"))),
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::One => "1",
            Phase::Two => "2",
        })
    }
}

/// Strict scoring demands every gold word in every submitted file; lenient
/// scoring evaluates the overlap and notes what was missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coverage {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric<T> {
    Spearman(T),
    Binary(BinaryMetrics<T>),
    /// The statistic does not exist for this input (reason attached).
    Undefined(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskResult<T> {
    pub metric: Metric<T>,
    /// Gold words scored for this subtask.
    pub evaluated: usize,
    /// Fraction of those gold words present in the predictions.
    pub coverage: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<T> {
    pub phase: Phase,
    pub results: BTreeMap<Task, TaskResult<T>>,
    /// Subtask files found in the submission.
    pub found: Vec<Task>,
    /// Smallest per-subtask coverage.
    pub coverage: T,
    pub notes: Vec<String>,
}

impl<T: Scalar> EvalReport<T> {
    pub fn get(&self, task: Task) -> Option<&Metric<T>> {
        self.results.get(&task).map(|r| &r.metric)
    }
}

fn score_task<T: Scalar>(
    gold: &GoldSet<T>,
    set: &PredictionSet<T>,
    mode: Coverage,
    notes: &mut Vec<String>,
) -> Result<Option<TaskResult<T>>> {
    let task = set.task;
    let g = gold.values(task);
    if g.is_empty() {
        notes.push(format!("{task}: no gold values, not scored"));
        return Ok(None);
    }
    let miss = missing(&g, &set.values);
    if !miss.is_empty() {
        match mode {
            Coverage::Strict => return Err(Error::MissingWords(miss)),
            Coverage::Lenient => notes.push(format!("{task}: {} gold word(s) missing: {}", miss.len(), miss.join(", "))),
        }
    }
    if g.len() < gold.len() {
        notes.push(format!("{task}: {} gold word(s) without a gold value", gold.len() - g.len()));
    }
    let coverage = T::of_usize(g.len() - miss.len()) / T::of_usize(g.len());
    let metric = if task.is_binary() {
        let labels = g.into_iter().map(|(w, v)| (w, v == T::one())).collect();
        binary_metrics_common(&labels, &set.values).map(Metric::Binary)
    } else {
        spearman_common(&g, &set.values).map(Metric::Spearman)
    };
    let metric = match metric {
        Ok(m) => m,
        Err(Error::Undefined(reason)) => Metric::Undefined(reason),
        Err(e) => return Err(e),
    };
    Ok(Some(TaskResult {
        metric,
        evaluated: gold.values(task).len(),
        coverage,
    }))
}

/// Scores an in-memory submission.
pub fn score_predictions<T: Scalar>(
    gold: &GoldSet<T>,
    submission: &Submission<T>,
    phase: Phase,
    mode: Coverage,
) -> Result<EvalReport<T>> {
    let need = phase.obligatory();
    if submission.get(need).is_none() {
        return Err(Error::InvalidSubmission(format!(
            "phase {phase} requires {}",
            need.file_name()
        )));
    }
    let mut notes = Vec::new();
    let mut results = BTreeMap::new();
    for set in submission.sets.values() {
        if let Some(r) = score_task(gold, set, mode, &mut notes)? {
            results.insert(set.task, r);
        }
    }
    let coverage = results
        .values()
        .map(|r| r.coverage)
        .fold(T::one(), |a, b| if b < a { b } else { a });
    Ok(EvalReport {
        phase,
        results,
        found: submission.sets.keys().copied().collect(),
        coverage,
        notes,
    })
}

/// Scores a submission directory (`graded.tsv`, `binary.tsv`, ...).
pub fn score_submission<T: Scalar>(
    gold: &GoldSet<T>,
    dir: impl AsRef<Path>,
    phase: Phase,
    mode: Coverage,
) -> Result<EvalReport<T>> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::InvalidSubmission(format!("{} is not a directory", dir.display())));
    }
    score_predictions(gold, &Submission::read_dir(dir)?, phase, mode)
}

fn fmt3<T: Scalar>(v: T) -> String {
    format!("{:.3}", v.to_f64_lossy())
}

/// One row per subtask and statistic.
pub fn render_report<T: Scalar>(report: &EvalReport<T>, seed: Option<u64>) -> String {
    let mut rows = Vec::new();
    for (task, r) in &report.results {
        let mut push = |stat: &str, value: String| {
            rows.push(vec![
                task.to_string(),
                stat.to_string(),
                value,
                r.evaluated.to_string(),
                format!("{}", r.coverage),
            ])
        };
        match &r.metric {
            Metric::Spearman(v) => push("spearman", format!("{v}")),
            Metric::Binary(m) => {
                push("f1", format!("{}", m.f1));
                push("precision", format!("{}", m.precision));
                push("recall", format!("{}", m.recall));
            }
            Metric::Undefined(_) => push("undefined", String::new()),
        }
    }
    let mut out = tsv::render(seed, &["task", "statistic", "value", "n", "coverage"], rows);
    for n in &report.notes {
        let _ = writeln!(out, "# {n}");
    }
    out
}

/// Fixed-width table laid out like the shared-task result tables: phase 1
/// shows graded and COMPARE Spearman; phase 2 adds binary, gain and loss
/// F1/P/R. Absent subtasks print `--`.
pub fn render_table<T: Scalar>(rows: &[(&str, &EvalReport<T>)]) -> String {
    let phase = rows.first().map(|r| r.1.phase).unwrap_or_default();
    let mut cols: Vec<(Task, &str)> = Vec::new();
    if phase == Phase::Two {
        for t in [Task::Binary, Task::Gain, Task::Loss] {
            for s in ["F1", "P", "R"] {
                cols.push((t, s));
            }
        }
    }
    cols.push((Task::Graded, "SPR"));
    cols.push((Task::Compare, "SPR"));
    let name_w = rows.iter().map(|r| r.0.chars().count()).chain([6]).max().unwrap();
    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "system");
    for (t, s) in &cols {
        let _ = write!(out, "  {:>12}", format!("{t}.{s}"));
    }
    out.push('\n');
    for (name, report) in rows {
        let _ = write!(out, "{name:<name_w$}");
        for (t, s) in &cols {
            let cell = match report.get(*t) {
                Some(Metric::Spearman(v)) => fmt3(*v),
                Some(Metric::Binary(m)) => fmt3(match *s {
                    "F1" => m.f1,
                    "P" => m.precision,
                    _ => m.recall,
                }),
                Some(Metric::Undefined(_)) => "undef".into(),
                None => "--".into(),
            };
            let _ = write!(out, "  {cell:>12}");
        }
        out.push('\n');
    }
    out
}

/// 0, 5, ..., 100.
pub fn default_percentiles<T: Scalar>() -> Vec<T> {
    (0..=20).map(|i| T::of_usize(5 * i)).collect()
}

/// Number of words labeled 1 at percentile `p` out of `n`: `ceil(p·n/100)`
/// before boundary ties are added.
fn top_count<T: Scalar>(p: T, n: usize) -> usize {
    let x = p.to_f64_lossy() * n as f64 / 100.0;
    // guard against 5·60/100 landing a hair above an integer
    let m = (x - 1e-9).ceil().max(0.0) as usize;
    m.min(n)
}

/// For every percentile `p`, labels 1 the gold words whose graded score is
/// in the top `p`% (ties at the boundary included) and reports F1 against
/// the gold labels. Percentiles are taken over the gold words.
pub fn threshold_sweep<T: Scalar>(
    gold_binary: &BTreeMap<String, bool>,
    graded: &BTreeMap<String, T>,
    percentiles: &[T],
) -> Result<Vec<(T, T)>> {
    require_coverage(gold_binary, graded)?;
    let mut scores: Vec<T> = gold_binary.keys().map(|w| graded[w]).collect();
    if let Some(w) = gold_binary.keys().find(|w| !graded[*w].is_finite()) {
        return Err(Error::precondition(format!("non-finite score for `{w}`")));
    }
    scores.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let n = scores.len();
    percentiles
        .iter()
        .map(|&p| {
            if !(T::zero()..=T::of(100.0)).contains(&p) {
                return Err(Error::precondition(format!("percentile {p} outside [0, 100]")));
            }
            let m = top_count(p, n);
            let labels: BTreeMap<String, T> = gold_binary
                .keys()
                .map(|w| {
                    let on = m > 0 && graded[w] >= scores[m - 1];
                    (w.clone(), if on { T::one() } else { T::zero() })
                })
                .collect();
            Ok((p, binary_metrics_common(gold_binary, &labels)?.f1))
        })
        .collect()
}

/// Highest F1 of a sweep curve with its percentile.
pub fn sweep_max<T: Scalar>(curve: &[(T, T)]) -> Option<(T, T)> {
    curve.iter().copied().fold(None, |best, (p, f)| match best {
        Some((_, bf)) if bf >= f => best,
        _ => Some((p, f)),
    })
}

pub fn render_sweep<T: Scalar>(curve: &[(T, T)], seed: Option<u64>) -> String {
    tsv::render(
        seed,
        &["percentile", "f1"],
        curve.iter().map(|(p, f)| vec![format!("{p}"), format!("{f}")]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::change::kn_thresholds;

    fn map(xs: &[f64]) -> BTreeMap<String, f64> {
        xs.iter().enumerate().map(|(i, &x)| (format!("w{i:02}"), x)).collect()
    }

    fn labels(xs: &[bool]) -> BTreeMap<String, bool> {
        xs.iter().enumerate().map(|(i, &x)| (format!("w{i:02}"), x)).collect()
    }

    fn gold(graded: &[f64], binary: &[bool]) -> GoldSet<f64> {
        let kn = kn_thresholds::<f64>(20);
        let scores = graded
            .iter()
            .zip(binary)
            .enumerate()
            .map(|(i, (&g, &b))| ChangeScores {
                lemma: format!("w{i:02}"),
                graded: Some(g),
                compare_negated: Some(-3.0 + g),
                binary: Some(b),
                gain: Some(b && i % 2 == 0),
                loss: Some(b && i % 2 == 1),
                k: kn.k,
                n: kn.n,
            })
            .collect();
        GoldSet::new(scores, Split::Evaluation).unwrap()
    }

    #[test]
    fn spearman_basic() {
        let g = map(&[1.0, 2.0, 3.0, 4.0]);
        assert!((spearman(&g, &map(&[10.0, 20.0, 30.0, 40.0])).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&g, &map(&[4.0, 3.0, 2.0, 1.0])).unwrap() + 1.0).abs() < 1e-12);
        // ranks (1, 2.5, 2.5, 4): Pearson against (1, 2, 3, 4) = 4.5 / sqrt(5 * 4.5)
        let tied = spearman(&g, &map(&[1.0, 2.0, 2.0, 4.0])).unwrap();
        assert!((tied - 4.5 / (5.0f64 * 4.5).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spearman_requires_coverage() {
        let mut p = map(&[1.0, 2.0, 3.0, 4.0]);
        p.remove("w02");
        match spearman(&map(&[1.0, 2.0, 3.0, 4.0]), &p) {
            Err(Error::MissingWords(w)) => assert_eq!(w, vec!["w02".to_string()]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(spearman(&map(&[1.0, 1.0, 1.0]), &map(&[1.0, 2.0, 3.0])), Err(Error::Undefined(_))));
        assert!(matches!(spearman(&map(&[1.0, 2.0]), &map(&[1.0, 2.0])), Err(Error::Undefined(_))));
    }

    #[test]
    fn minority_metrics() {
        let g = labels(&(0..60).map(|i| i < 28).collect::<Vec<_>>());
        let m = binary_metrics(&g, &map(&[1.0; 60])).unwrap();
        assert!((m.precision - 28.0 / 60.0).abs() < 1e-12);
        assert_eq!(m.recall, 1.0);
        assert!((m.f1 - 0.636).abs() < 1e-3);
    }

    #[test]
    fn binary_conventions() {
        let g = labels(&[true, false, true, false]);
        let perfect = binary_metrics(&g, &map(&[1.0, 0.0, 1.0, 0.0])).unwrap();
        assert_eq!((perfect.f1, perfect.precision, perfect.recall), (1.0, 1.0, 1.0));
        let none = binary_metrics(&g, &map(&[0.0; 4])).unwrap();
        assert_eq!((none.f1, none.precision, none.recall), (0.0, 0.0, 0.0));
        assert!(matches!(binary_metrics(&labels(&[false, false]), &map(&[1.0, 1.0])), Err(Error::Undefined(_))));
        assert!(binary_metrics(&g, &map(&[0.5, 0.0, 1.0, 0.0])).is_err());
    }

    fn submission_from_gold(g: &GoldSet<f64>) -> Submission<f64> {
        let mut sub = Submission::default();
        for t in Task::ALL {
            sub.insert(PredictionSet::from_values(t, g.values(t)));
        }
        sub
    }

    #[test]
    fn gold_as_submission_is_perfect() {
        let g = gold(&[0.1, 0.5, 0.2, 0.9, 0.7, 0.3], &[false, true, false, true, true, false]);
        let dir = tempfile::tempdir().unwrap();
        submission_from_gold(&g).write_dir(dir.path(), Some(1)).unwrap();
        let report = score_submission(&g, dir.path(), Phase::Two, Coverage::Strict).unwrap();
        assert_eq!(report.found.len(), 5);
        assert_eq!(report.coverage, 1.0);
        for t in Task::ALL {
            match report.get(t).unwrap() {
                Metric::Spearman(v) => assert!((v - 1.0).abs() < 1e-12),
                Metric::Binary(m) => assert_eq!(m.f1, 1.0),
                Metric::Undefined(r) => panic!("{t}: {r}"),
            }
        }
        let table = render_table(&[("gold", &report)]);
        assert!(table.contains("binary.F1") && table.contains("1.000"));
        assert!(render_report(&report, Some(1)).starts_with("# lscd"));
    }

    #[test]
    fn obligatory_file_and_coverage() {
        let g = gold(&[0.1, 0.5, 0.2, 0.9], &[false, true, false, true]);
        let mut sub = Submission::default();
        sub.insert(PredictionSet::from_values(Task::Graded, g.values(Task::Graded)));
        assert!(matches!(
            score_predictions(&g, &sub, Phase::Two, Coverage::Strict),
            Err(Error::InvalidSubmission(_))
        ));
        assert!(score_predictions(&g, &sub, Phase::One, Coverage::Strict).is_ok());

        let mut partial = g.values(Task::Graded);
        partial.remove("w03");
        let mut sub = Submission::default();
        sub.insert(PredictionSet::from_values(Task::Graded, partial));
        match score_predictions(&g, &sub, Phase::One, Coverage::Strict) {
            Err(Error::MissingWords(w)) => assert_eq!(w, vec!["w03".to_string()]),
            other => panic!("{other:?}"),
        }
        let lenient = score_predictions(&g, &sub, Phase::One, Coverage::Lenient).unwrap();
        assert_eq!(lenient.coverage, 0.75);
        assert_eq!(lenient.notes.len(), 1);
    }

    #[test]
    fn sweep_endpoints() {
        let g = labels(&[true, false, true, false, false]);
        let s = map(&[0.9, 0.1, 0.5, 0.5, 0.2]);
        let curve = threshold_sweep(&g, &s, &default_percentiles()).unwrap();
        assert_eq!(curve.len(), 21);
        assert_eq!(curve[0].1, 0.0);
        let all_ones = binary_metrics(&g, &map(&[1.0; 5])).unwrap().f1;
        assert_eq!(curve[20].1, all_ones);
        // 40% of 5 is 2 words, the tie at 0.5 pulls in a third
        let at40 = threshold_sweep(&g, &s, &[40.0]).unwrap()[0].1;
        assert!((at40 - 0.8).abs() < 1e-12);
        assert_eq!(top_count(5.0f64, 60), 3);
        assert_eq!(sweep_max(&curve).unwrap().1, 0.8);
    }
}
