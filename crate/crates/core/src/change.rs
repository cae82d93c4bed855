//! Gold change scores derived from clustered word usage graphs.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::Period;
use crate::tsv::{self, TsvTable};
use crate::wug::{split_distributions, Clustering, SenseFrequencyDistribution, WordUsageGraph};
use crate::{Error, Result, Scalar};

/// Lower frequency thresholds for the binary change notions. A sense counts
/// as absent in a period when attested at most `k` times and as present when
/// attested at least `n` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnThresholds<T> {
    pub k: T,
    pub n: T,
}

/// `k = clamp(0.01 |U|, 1, 3)`, `n = clamp(0.1 |U|, 3, 5)`; fractional
/// values are kept.
pub fn kn_thresholds<T: Scalar>(usage_count: usize) -> KnThresholds<T> {
    let u = T::of_usize(usage_count);
    KnThresholds {
        k: (T::of(0.01) * u).max(T::one()).min(T::of(3.0)),
        n: (T::of(0.1) * u).max(T::of(3.0)).min(T::of(5.0)),
    }
}

impl<T: Scalar> KnThresholds<T> {
    /// Integer variant: thresholds rounded to the nearest count.
    pub fn rounded(self) -> Self {
        Self {
            k: self.k.round(),
            n: self.n.round(),
        }
    }
}

fn check_distribution<T: Scalar>(p: &[T], name: &str) -> Result<()> {
    let tol = T::of(1e-9).max(T::epsilon() * T::of(16.0));
    if p.iter().any(|&x| x < T::zero() || !x.is_finite()) {
        return Err(Error::precondition(format!("{name} has negative or non-finite entries")));
    }
    let s: T = p.iter().copied().sum();
    if (s - T::one()).abs() > tol {
        return Err(Error::precondition(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}

/// Jensen-Shannon distance with base-2 logarithms: the square root of the
/// divergence, in `[0, 1]`. Terms with zero probability contribute 0.
pub fn jsd_distance<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    check_distribution(p, "p")?;
    check_distribution(q, "q")?;
    let half = T::of(0.5);
    let mut div = T::zero();
    for (&a, &b) in p.iter().zip(q) {
        let m = half * (a + b);
        if a > T::zero() {
            div += half * a * (a / m).log2();
        }
        if b > T::zero() {
            div += half * b * (b / m).log2();
        }
    }
    Ok(div.max(T::zero()).min(T::one()).sqrt())
}

/// Jensen-Shannon distance between the normalized sense distributions.
pub fn graded_change<T: Scalar>(d1: &[usize], d2: &[usize]) -> Result<T> {
    let normalize = |d: &[usize], period: Period| -> Result<Vec<T>> {
        let total: usize = d.iter().sum();
        if total == 0 {
            return Err(Error::undefined(format!("no usages in {period}")));
        }
        Ok(d.iter().map(|&c| T::of_usize(c) / T::of_usize(total)).collect())
    };
    jsd_distance(&normalize(d1, Period::C1)?, &normalize(d2, Period::C2)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BinaryLabels {
    pub binary: bool,
    pub gain: bool,
    pub loss: bool,
}

/// Sense gain/loss with one pair of thresholds for both periods.
pub fn binary_scores<T: Scalar>(d1: &[usize], d2: &[usize], k: T, n: T) -> Result<BinaryLabels> {
    let kn = KnThresholds { k, n };
    binary_scores_per_period(d1, d2, kn, kn)
}

/// Sense gain: some cluster has at most `k1` usages in C1 and at least `n2`
/// in C2. Loss is the time-reversed condition. Binary change is gain or loss.
pub fn binary_scores_per_period<T: Scalar>(
    d1: &[usize],
    d2: &[usize],
    kn1: KnThresholds<T>,
    kn2: KnThresholds<T>,
) -> Result<BinaryLabels> {
    if d1.len() != d2.len() {
        return Err(Error::DimensionMismatch {
            expected: d1.len(),
            actual: d2.len(),
        });
    }
    let c = |x: usize| T::of_usize(x);
    let gain = d1.iter().zip(d2).any(|(&a, &b)| c(a) <= kn1.k && c(b) >= kn2.n);
    let loss = d1.iter().zip(d2).any(|(&a, &b)| c(b) <= kn2.k && c(a) >= kn1.n);
    Ok(BinaryLabels {
        binary: gain || loss,
        gain,
        loss,
    })
}

/// Negated mean of the median judgments on edges joining usages from
/// different periods, in `[-4, -1]`.
pub fn compare_score<T: Scalar>(graph: &WordUsageGraph<T>) -> Result<T> {
    let nodes = graph.nodes();
    let cross: Vec<T> = graph
        .edges()
        .filter(|((i, j), _)| nodes[*i].period != nodes[*j].period)
        .map(|(_, e)| e.weight)
        .collect();
    if cross.is_empty() {
        return Err(Error::undefined(format!("`{}` has no cross-period judgments", graph.lemma)));
    }
    Ok(-(cross.iter().copied().sum::<T>() / T::of_usize(cross.len())))
}

/// Gold scores of one word. Undefined scores are `None`, never 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeScores<T> {
    pub lemma: String,
    pub graded: Option<T>,
    pub compare_negated: Option<T>,
    pub binary: Option<bool>,
    pub gain: Option<bool>,
    pub loss: Option<bool>,
    /// Thresholds at the smaller of the two period sample sizes.
    pub k: T,
    pub n: T,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GoldOptions {
    /// Compare counts against rounded k and n.
    pub round_thresholds: bool,
}

/// All gold scores for one clustered graph; k and n are computed per period
/// from that period's usage count.
pub fn gold_scores<T: Scalar>(
    graph: &WordUsageGraph<T>,
    clustering: &Clustering<T>,
    opts: GoldOptions,
) -> ChangeScores<T> {
    let (d1, d2): (SenseFrequencyDistribution, SenseFrequencyDistribution) = split_distributions(graph, clustering);
    let (u1, u2) = (d1.total(), d2.total());
    let adjust = |kn: KnThresholds<T>| if opts.round_thresholds { kn.rounded() } else { kn };
    let kn1 = adjust(kn_thresholds(u1.max(1)));
    let kn2 = adjust(kn_thresholds(u2.max(1)));
    let reported = adjust(kn_thresholds(u1.min(u2).max(1)));
    let labels = (u1 > 0 && u2 > 0)
        .then(|| binary_scores_per_period(&d1.counts, &d2.counts, kn1, kn2).ok())
        .flatten();
    ChangeScores {
        lemma: graph.lemma.clone(),
        graded: graded_change(&d1.counts, &d2.counts).ok(),
        compare_negated: compare_score(graph).ok(),
        binary: labels.map(|l| l.binary),
        gain: labels.map(|l| l.gain),
        loss: labels.map(|l| l.loss),
        k: reported.k,
        n: reported.n,
    }
}

pub const GOLD_HEADER: [&str; 6] = ["lemma", "change_graded", "change_binary", "gain", "loss", "compare"];

fn fmt_opt<T: Scalar>(v: Option<T>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn fmt_bool(v: Option<bool>) -> String {
    v.map(|b| if b { "1" } else { "0" }.to_string()).unwrap_or_default()
}

/// Gold-score TSV; missing values are empty fields. The `compare` column
/// holds the negated COMPARE score.
pub fn render_gold<T: Scalar>(scores: &[ChangeScores<T>], seed: Option<u64>) -> String {
    tsv::render(
        seed,
        &GOLD_HEADER,
        scores.iter().map(|s| {
            vec![
                s.lemma.clone(),
                fmt_opt(s.graded),
                fmt_bool(s.binary),
                fmt_bool(s.gain),
                fmt_bool(s.loss),
                fmt_opt(s.compare_negated),
            ]
        }),
    )
}

pub fn read_gold<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<ChangeScores<T>>> {
    let path = path.as_ref();
    let table = TsvTable::read(path)?;
    parse_gold_table(&table).map_err(|e| tsv::with_path(e, path))
}

pub fn parse_gold_table<T: Scalar>(table: &TsvTable) -> Result<Vec<ChangeScores<T>>> {
    let cols: Vec<Option<usize>> = GOLD_HEADER.iter().map(|h| table.column(h).ok()).collect();
    let c_lemma = cols[0].ok_or_else(|| Error::format(1, "missing column `lemma`"))?;
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for row in &table.rows {
        let get = |i: usize| cols[i].map(|c| row.get(c).trim()).filter(|s| !s.is_empty());
        let num = |i: usize| -> Result<Option<T>> {
            get(i)
                .map(|s| {
                    s.parse::<f64>()
                        .map(T::of)
                        .map_err(|_| Error::format(row.line, format!("bad number `{s}` in {}", GOLD_HEADER[i])))
                })
                .transpose()
        };
        let flag = |i: usize| -> Result<Option<bool>> {
            get(i)
                .map(|s| match s {
                    "1" | "1.0" => Ok(true),
                    "0" | "0.0" => Ok(false),
                    other => Err(Error::format(row.line, format!("`{other}` in {} is not 0 or 1", GOLD_HEADER[i]))),
                })
                .transpose()
        };
        let lemma = row.get(c_lemma).trim().to_string();
        if seen.insert(lemma.clone(), row.line).is_some() {
            return Err(Error::format(row.line, format!("duplicate lemma `{lemma}`")));
        }
        let kn = kn_thresholds::<T>(1);
        out.push(ChangeScores {
            lemma,
            graded: num(1)?,
            binary: flag(2)?,
            gain: flag(3)?,
            loss: flag(4)?,
            compare_negated: num(5)?,
            k: kn.k,
            n: kn.n,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Usage;
    use crate::wug::{build_wug, Edge, EdgeMap, UsagePair};

    #[test]
    fn kn_cases() {
        assert_eq!(kn_thresholds::<f64>(20), KnThresholds { k: 1.0, n: 3.0 });
        assert_eq!(kn_thresholds::<f64>(400), KnThresholds { k: 3.0, n: 5.0 });
        assert_eq!(kn_thresholds::<f64>(40), KnThresholds { k: 1.0, n: 4.0 });
        // fractional regime
        assert_eq!(kn_thresholds::<f64>(150), KnThresholds { k: 1.5, n: 5.0 });
        assert_eq!(kn_thresholds::<f64>(150).rounded().k, 2.0);
    }

    #[test]
    fn jsd_identities() {
        assert_eq!(jsd_distance(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(jsd_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        let v: f64 = jsd_distance(&[1.0, 0.0], &[0.15, 0.85]).unwrap();
        assert!((v - 0.82).abs() < 0.005, "{v}");
    }

    #[test]
    fn jsd_preconditions() {
        assert!(matches!(jsd_distance(&[1.0], &[0.5, 0.5]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(jsd_distance(&[0.7, 0.7], &[0.5, 0.5]), Err(Error::Precondition(_))));
        assert!(matches!(jsd_distance(&[1.5, -0.5], &[0.5, 0.5]), Err(Error::Precondition(_))));
    }

    #[test]
    fn graded_cases() {
        let v: f64 = graded_change(&[20, 0], &[3, 17]).unwrap();
        assert!((v - 0.82).abs() < 0.005);
        assert_eq!(graded_change::<f64>(&[10, 10], &[10, 10]).unwrap(), 0.0);
        assert_eq!(graded_change::<f64>(&[20, 0], &[0, 20]).unwrap(), 1.0);
        assert!(matches!(graded_change::<f64>(&[0, 0], &[1, 2]), Err(Error::Undefined(_))));
    }

    #[test]
    fn servidor_binary() {
        let l = binary_scores(&[20, 0], &[3, 17], 1.0, 3.0).unwrap();
        assert_eq!(l, BinaryLabels { binary: true, gain: true, loss: false });
        let l = binary_scores(&[10, 10], &[10, 10], 1.0, 3.0).unwrap();
        assert_eq!(l, BinaryLabels::default());
        let l = binary_scores(&[0, 20], &[20, 0], 1.0, 3.0).unwrap();
        assert_eq!(l, BinaryLabels { binary: true, gain: true, loss: true });
    }

    fn usage(id: &str, period: Period) -> Usage {
        Usage {
            identifier: id.into(),
            lemma: "w".into(),
            pos: String::new(),
            period,
            context: "w".into(),
            target_span: (0, 1),
            sentence_id: String::new(),
            surface: None,
        }
    }

    fn graph(edges: &[(&str, &str, f64)]) -> WordUsageGraph<f64> {
        let usages = vec![
            usage("a1", Period::C1),
            usage("a2", Period::C1),
            usage("b1", Period::C2),
            usage("b2", Period::C2),
        ];
        let map: EdgeMap<f64> = edges
            .iter()
            .map(|&(a, b, w)| (UsagePair::new(a, b), Edge { weight: w, judgments: 2 }))
            .collect();
        build_wug("w", usages, &map).unwrap()
    }

    #[test]
    fn compare_cases() {
        assert_eq!(compare_score(&graph(&[("a1", "b1", 4.0), ("a2", "b2", 4.0)])).unwrap(), -4.0);
        assert_eq!(compare_score(&graph(&[("a1", "b1", 1.0), ("a2", "b2", 3.0)])).unwrap(), -2.0);
        // within-period edges ignored
        assert_eq!(
            compare_score(&graph(&[("a1", "b1", 1.0), ("a2", "b2", 3.0), ("a1", "a2", 4.0)])).unwrap(),
            -2.0
        );
        assert!(matches!(compare_score(&graph(&[("a1", "a2", 4.0)])), Err(Error::Undefined(_))));
    }

    #[test]
    fn gold_tsv_roundtrip_keeps_missing() {
        let scores = vec![
            ChangeScores { lemma: "a".into(), graded: Some(0.5), compare_negated: None, binary: Some(true), gain: Some(true), loss: Some(false), k: 1.0, n: 3.0 },
            ChangeScores { lemma: "b".into(), graded: None, compare_negated: Some(-2.25), binary: None, gain: None, loss: None, k: 1.0, n: 3.0 },
        ];
        let table = TsvTable::parse(&render_gold(&scores, None)).unwrap();
        let back: Vec<ChangeScores<f64>> = parse_gold_table(&table).unwrap();
        assert_eq!(back[0].graded, Some(0.5));
        assert_eq!(back[0].compare_negated, None);
        assert_eq!(back[1].binary, None);
        assert_eq!(back[1].compare_negated, Some(-2.25));
    }
}
