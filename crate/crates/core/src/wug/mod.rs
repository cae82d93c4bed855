//! Word usage graphs: judgment aggregation, graph construction, correlation
//! clustering and per-period sense frequency distributions.

mod cluster;
pub mod dwug;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::corpus::{Period, Usage};
use crate::tsv::{self, TsvTable};
use crate::{stats, Error, Result, Scalar};

pub use cluster::{cluster_wug, clustering_loss, ClusterMethod, ClusterParams, Clustering};

/// One annotator's relatedness judgment for a usage pair. `value` 0 means
/// "cannot decide"; 1 to 4 is the relatedness scale (4 = identical).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub usage_id_1: String,
    pub usage_id_2: String,
    pub annotator: String,
    pub value: u8,
    pub comment: String,
}

impl Judgment {
    pub fn new(u1: &str, u2: &str, annotator: &str, value: u8) -> Result<Self> {
        if u1 == u2 {
            return Err(Error::Integrity(format!("judgment pairs usage `{u1}` with itself")));
        }
        if value > 4 {
            return Err(Error::Integrity(format!("judgment value {value} outside 0..=4")));
        }
        Ok(Self {
            usage_id_1: u1.to_string(),
            usage_id_2: u2.to_string(),
            annotator: annotator.to_string(),
            value,
            comment: String::new(),
        })
    }

    pub fn pair(&self) -> UsagePair {
        UsagePair::new(&self.usage_id_1, &self.usage_id_2)
    }
}

/// Unordered pair of usage identifiers (stored sorted).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UsagePair(pub String, pub String);

impl UsagePair {
    pub fn new(a: &str, b: &str) -> Self {
        if a <= b {
            UsagePair(a.to_string(), b.to_string())
        } else {
            UsagePair(b.to_string(), a.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    /// Median of the non-zero judgments.
    pub weight: T,
    /// Number of non-zero judgments behind the median.
    pub judgments: usize,
}

pub type EdgeMap<T> = BTreeMap<UsagePair, Edge<T>>;

/// Median judgment per unordered usage pair, ignoring 0 ("cannot decide").
/// Pairs with only 0-judgments get no edge.
pub fn aggregate_judgments<T: Scalar>(judgments: &[Judgment]) -> EdgeMap<T> {
    let mut per_pair: BTreeMap<UsagePair, Vec<T>> = BTreeMap::new();
    for j in judgments.iter().filter(|j| j.value != 0) {
        per_pair.entry(j.pair()).or_default().push(T::of(j.value as f64));
    }
    per_pair
        .into_iter()
        .map(|(pair, values)| {
            let edge = Edge {
                weight: stats::median(&values).expect("non-empty"),
                judgments: values.len(),
            };
            (pair, edge)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct WordUsageGraph<T> {
    pub lemma: String,
    nodes: Vec<Usage>,
    index: HashMap<String, usize>,
    /// Keyed by node indices `(i, j)` with `i < j`.
    edges: BTreeMap<(usize, usize), Edge<T>>,
}

impl<T: Scalar> WordUsageGraph<T> {
    pub fn nodes(&self) -> &[Usage] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), &Edge<T>)> + '_ {
        self.edges.iter().map(|(&k, e)| (k, e))
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&Edge<T>> {
        self.edges.get(&(a.min(b), a.max(b)))
    }

    /// Adds or replaces an edge between two existing nodes.
    pub fn set_edge(&mut self, a: &str, b: &str, edge: Edge<T>) -> Result<()> {
        let (i, j) = (self.lookup(a)?, self.lookup(b)?);
        if i == j {
            return Err(Error::Integrity(format!("self-loop on `{a}`")));
        }
        self.edges.insert((i.min(j), i.max(j)), edge);
        Ok(())
    }

    fn lookup(&self, id: &str) -> Result<usize> {
        self.node_index(id)
            .ok_or_else(|| Error::Integrity(format!("edge endpoint `{id}` is not a usage of the graph")))
    }

    /// Total number of non-zero judgments on the graph's edges.
    pub fn judgment_count(&self) -> usize {
        self.edges.values().map(|e| e.judgments).sum()
    }

    pub fn period_count(&self, period: Period) -> usize {
        self.nodes.iter().filter(|u| u.period == period).count()
    }
}

/// Builds a graph over `usages`. Every edge endpoint must be one of them.
pub fn build_wug<T: Scalar>(lemma: &str, usages: Vec<Usage>, edges: &EdgeMap<T>) -> Result<WordUsageGraph<T>> {
    let mut index = HashMap::with_capacity(usages.len());
    for (i, u) in usages.iter().enumerate() {
        if index.insert(u.identifier.clone(), i).is_some() {
            return Err(Error::Integrity(format!("duplicate usage identifier `{}`", u.identifier)));
        }
    }
    let mut graph = WordUsageGraph {
        lemma: lemma.to_string(),
        nodes: usages,
        index,
        edges: BTreeMap::new(),
    };
    for (pair, edge) in edges {
        let w = edge.weight.to_f64_lossy();
        if !(1.0..=4.0).contains(&w) {
            return Err(Error::Integrity(format!("edge weight {w} outside [1, 4]")));
        }
        graph.set_edge(&pair.0, &pair.1, *edge)?;
    }
    Ok(graph)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectivity {
    pub connected: bool,
    /// Cluster label pairs `(a, b)`, `a < b`, with no judged edge between them.
    pub missing_pairs: Vec<(usize, usize)>,
}

/// Whether the cluster meta-graph (one vertex per cluster, an edge wherever
/// some judged usage pair spans two clusters) is connected.
pub fn check_cluster_connectivity<T: Scalar>(graph: &WordUsageGraph<T>, clustering: &Clustering<T>) -> Connectivity {
    let k = clustering.cluster_count();
    let mut linked = vec![vec![false; k]; k];
    for ((i, j), _) in graph.edges() {
        let (a, b) = (clustering.labels[i], clustering.labels[j]);
        if a != b {
            linked[a][b] = true;
            linked[b][a] = true;
        }
    }
    let mut missing_pairs = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if !linked[a][b] {
                missing_pairs.push((a, b));
            }
        }
    }
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    if k > 0 {
        seen[0] = true;
    }
    while let Some(c) = stack.pop() {
        for d in 0..k {
            if linked[c][d] && !seen[d] {
                seen[d] = true;
                stack.push(d);
            }
        }
    }
    Connectivity {
        connected: seen.iter().all(|&s| s),
        missing_pairs,
    }
}

/// Cluster sizes among the nodes of one period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenseFrequencyDistribution {
    pub period: Period,
    pub counts: Vec<usize>,
}

impl SenseFrequencyDistribution {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn normalized<T: Scalar>(&self) -> Option<Vec<T>> {
        let total = self.total();
        (total > 0).then(|| self.counts.iter().map(|&c| T::of_usize(c) / T::of_usize(total)).collect())
    }
}

/// Splits the clustering by period; both vectors span all cluster labels.
pub fn split_distributions<T: Scalar>(
    graph: &WordUsageGraph<T>,
    clustering: &Clustering<T>,
) -> (SenseFrequencyDistribution, SenseFrequencyDistribution) {
    let k = clustering.cluster_count();
    let mut d = [vec![0; k], vec![0; k]];
    for (node, &label) in graph.nodes().iter().zip(&clustering.labels) {
        d[node.period.index()][label] += 1;
    }
    let [d1, d2] = d;
    (
        SenseFrequencyDistribution { period: Period::C1, counts: d1 },
        SenseFrequencyDistribution { period: Period::C2, counts: d2 },
    )
}

/// Reads a judgment TSV (`identifier1 identifier2 annotator judgment
/// comment`). Judgments may be written as `3` or `3.0`.
pub fn read_judgments(path: impl AsRef<Path>) -> Result<Vec<Judgment>> {
    let path = path.as_ref();
    let table = TsvTable::read(path)?;
    parse_judgment_table(&table).map_err(|e| tsv::with_path(e, path))
}

pub fn parse_judgment_table(table: &TsvTable) -> Result<Vec<Judgment>> {
    let c1 = table.column("identifier1")?;
    let c2 = table.column("identifier2")?;
    let ca = table.column("annotator")?;
    let cj = table.column("judgment")?;
    let cc = table.column("comment").ok();
    table
        .rows
        .iter()
        .map(|row| {
            let raw = row.get(cj).trim();
            let v: f64 = raw
                .parse()
                .map_err(|_| Error::format(row.line, format!("bad judgment `{raw}`")))?;
            if v.fract() != 0.0 || !(0.0..=4.0).contains(&v) {
                return Err(Error::format(row.line, format!("judgment `{raw}` not in 0..=4")));
            }
            let mut j = Judgment::new(row.get(c1), row.get(c2), row.get(ca), v as u8)
                .map_err(|e| Error::format(row.line, e.to_string()))?;
            if let Some(c) = cc {
                j.comment = row.get(c).to_string();
            }
            Ok(j)
        })
        .collect()
}

pub fn render_judgments(judgments: &[Judgment], seed: Option<u64>) -> String {
    tsv::render(
        seed,
        &["identifier1", "identifier2", "annotator", "judgment", "comment"],
        judgments.iter().map(|j| {
            vec![
                j.usage_id_1.clone(),
                j.usage_id_2.clone(),
                j.annotator.clone(),
                j.value.to_string(),
                j.comment.clone(),
            ]
        }),
    )
}

/// `identifier<TAB>cluster` rows in node order.
pub fn render_clustering<T: Scalar>(graph: &WordUsageGraph<T>, clustering: &Clustering<T>, seed: Option<u64>) -> String {
    tsv::render(
        seed,
        &["identifier", "cluster"],
        graph
            .nodes()
            .iter()
            .zip(&clustering.labels)
            .map(|(u, l)| vec![u.identifier.clone(), l.to_string()]),
    )
}

/// Reads a clustering TSV back onto `graph`, recomputing its loss.
pub fn read_clustering<T: Scalar>(path: impl AsRef<Path>, graph: &WordUsageGraph<T>, threshold: T) -> Result<Clustering<T>> {
    let path = path.as_ref();
    let table = TsvTable::read(path)?;
    let ci = table.column("identifier")?;
    let cc = table.column("cluster")?;
    let mut labels = vec![usize::MAX; graph.node_count()];
    for row in &table.rows {
        let node = graph
            .node_index(row.get(ci))
            .ok_or_else(|| tsv::with_path(Error::format(row.line, format!("unknown usage `{}`", row.get(ci))), path))?;
        labels[node] = row
            .get(cc)
            .trim()
            .parse()
            .map_err(|_| tsv::with_path(Error::format(row.line, format!("bad cluster `{}`", row.get(cc))), path))?;
    }
    if let Some(i) = labels.iter().position(|&l| l == usize::MAX) {
        return Err(Error::Integrity(format!(
            "usage `{}` has no cluster in {}",
            graph.nodes()[i].identifier,
            path.display()
        )));
    }
    Ok(Clustering::from_labels(graph, labels, threshold))
}

/// Descriptive statistics of one clustered graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSummary {
    pub usages: usize,
    pub judged_pairs: usize,
    pub judgments: usize,
    /// Average judgments per judged pair.
    pub judgments_per_pair: f64,
    /// Cluster pairs without any judged edge between them.
    pub uncompared: usize,
    pub normalized_loss: f64,
}

pub fn summarize<T: Scalar>(graph: &WordUsageGraph<T>, clustering: &Clustering<T>) -> GraphSummary {
    let judged_pairs = graph.edge_count();
    let judgments = graph.judgment_count();
    GraphSummary {
        usages: graph.node_count(),
        judged_pairs,
        judgments,
        judgments_per_pair: if judged_pairs == 0 { 0.0 } else { judgments as f64 / judged_pairs as f64 },
        uncompared: check_cluster_connectivity(graph, clustering).missing_pairs.len(),
        normalized_loss: clustering.normalized_loss.to_f64_lossy(),
    }
}
