//! Correlation clustering of word usage graphs.
//!
//! Edge weights are shifted by a threshold (`w' = w - threshold`). A
//! clustering pays `|w'|` for every negative edge inside a cluster and `w'`
//! for every positive edge between clusters. Small graphs are solved
//! exactly by enumerating set partitions; larger ones by simulated
//! annealing with restarts followed by greedy descent.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::WordUsageGraph;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterMethod {
    /// Exact search up to `exact_limit` non-isolated nodes, annealing above.
    Auto,
    Exact,
    Annealing,
}

#[derive(Debug, Clone)]
pub struct ClusterParams<T> {
    pub threshold: T,
    pub restarts: usize,
    /// Annealing steps per restart; 0 picks `2000 * nodes`.
    pub max_iters: usize,
    pub seed: u64,
    pub method: ClusterMethod,
    pub exact_limit: usize,
}

impl<T: Scalar> Default for ClusterParams<T> {
    fn default() -> Self {
        Self {
            threshold: T::of(2.5),
            restarts: 20,
            max_iters: 0,
            seed: 0,
            method: ClusterMethod::Auto,
            exact_limit: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering<T> {
    /// Cluster label per node, in graph node order. Labels are dense from 0.
    pub labels: Vec<usize>,
    pub assignment: BTreeMap<String, usize>,
    pub loss: T,
    /// `loss / sum |w'|`, 0 when the graph carries no signed weight.
    pub normalized_loss: T,
}

impl<T: Scalar> Clustering<T> {
    /// Wraps an arbitrary labelling; labels are made dense keeping their
    /// relative order.
    pub fn from_labels(graph: &WordUsageGraph<T>, labels: Vec<usize>, threshold: T) -> Self {
        assert_eq!(labels.len(), graph.node_count(), "one label per node");
        let mut distinct: Vec<usize> = labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let labels: Vec<usize> = labels
            .iter()
            .map(|l| distinct.binary_search(l).expect("present"))
            .collect();
        let loss = clustering_loss(graph, &labels, threshold);
        let total: T = graph.edges().map(|(_, e)| (e.weight - threshold).abs()).sum();
        let normalized_loss = if total > T::zero() { loss / total } else { T::zero() };
        let assignment = graph
            .nodes()
            .iter()
            .zip(&labels)
            .map(|(u, &l)| (u.identifier.clone(), l))
            .collect();
        Self {
            labels,
            assignment,
            loss,
            normalized_loss,
        }
    }

    pub fn cluster_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cluster_count()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

#[inline]
fn edge_cost<T: Scalar>(shifted: T, same: bool) -> T {
    if same {
        if shifted < T::zero() { -shifted } else { T::zero() }
    } else if shifted > T::zero() {
        shifted
    } else {
        T::zero()
    }
}

/// Correlation clustering loss of `labels` (one per node).
pub fn clustering_loss<T: Scalar>(graph: &WordUsageGraph<T>, labels: &[usize], threshold: T) -> T {
    graph
        .edges()
        .map(|((i, j), e)| edge_cost(e.weight - threshold, labels[i] == labels[j]))
        .sum()
}

/// Signed graph restricted to non-isolated nodes.
struct Problem<T> {
    /// Graph node index of each active node.
    nodes: Vec<usize>,
    adj: Vec<Vec<(usize, T)>>,
    /// Edges to lower-indexed active nodes.
    back: Vec<Vec<(usize, T)>>,
    eps: T,
}

impl<T: Scalar> Problem<T> {
    fn new(graph: &WordUsageGraph<T>, threshold: T) -> Self {
        let mut active = vec![usize::MAX; graph.node_count()];
        let mut nodes = Vec::new();
        for ((i, j), _) in graph.edges() {
            for v in [i, j] {
                if active[v] == usize::MAX {
                    active[v] = 0;
                }
            }
        }
        for (v, slot) in active.iter_mut().enumerate() {
            if *slot != usize::MAX {
                *slot = nodes.len();
                nodes.push(v);
            }
        }
        let m = nodes.len();
        let mut adj = vec![Vec::new(); m];
        let mut back = vec![Vec::new(); m];
        let mut total = T::zero();
        for ((i, j), e) in graph.edges() {
            let (a, b) = (active[i], active[j]);
            let w = e.weight - threshold;
            total += w.abs();
            adj[a].push((b, w));
            adj[b].push((a, w));
            back[a.max(b)].push((a.min(b), w));
        }
        Self {
            nodes,
            adj,
            back,
            eps: T::of(1e-9) * (T::one() + total),
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn loss(&self, labels: &[usize]) -> T {
        let mut loss = T::zero();
        for (b, list) in self.back.iter().enumerate() {
            for &(a, w) in list {
                loss += edge_cost(w, labels[a] == labels[b]);
            }
        }
        loss
    }

    fn move_delta(&self, labels: &[usize], v: usize, to: usize) -> T {
        let from = labels[v];
        self.adj[v]
            .iter()
            .map(|&(u, w)| edge_cost(w, labels[u] == to) - edge_cost(w, labels[u] == from))
            .sum()
    }
}

/// A candidate solution ordered by (loss, cluster count, labels).
struct Candidate<T> {
    labels: Vec<usize>,
    loss: T,
    clusters: usize,
}

impl<T: Scalar> Candidate<T> {
    fn new(problem: &Problem<T>, labels: &[usize]) -> Self {
        let labels = canonical(labels);
        let clusters = labels.iter().max().map_or(0, |m| m + 1);
        Self {
            loss: problem.loss(&labels),
            labels,
            clusters,
        }
    }

    fn better_than(&self, other: &Self, eps: T) -> bool {
        if self.loss < other.loss - eps {
            return true;
        }
        if self.loss > other.loss + eps {
            return false;
        }
        (self.clusters, &self.labels) < (other.clusters, &other.labels)
    }
}

/// Relabels by first appearance: the lexicographically smallest labelling
/// of the same partition.
fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Clusters `graph`. Isolated nodes become singleton clusters; the final
/// labelling is canonical (first appearance in node order).
pub fn cluster_wug<T: Scalar>(graph: &WordUsageGraph<T>, params: &ClusterParams<T>) -> Result<Clustering<T>> {
    if graph.node_count() == 0 {
        return Err(Error::precondition("cannot cluster an empty graph"));
    }
    let problem = Problem::new(graph, params.threshold);
    let active_labels = if problem.len() == 0 {
        Vec::new()
    } else {
        let exact = match params.method {
            ClusterMethod::Exact => true,
            ClusterMethod::Annealing => false,
            ClusterMethod::Auto => problem.len() <= params.exact_limit,
        };
        if exact {
            exact_search(&problem)
        } else {
            anneal(&problem, params)
        }
    };

    let mut labels = vec![usize::MAX; graph.node_count()];
    for (a, &v) in problem.nodes.iter().enumerate() {
        labels[v] = active_labels[a];
    }
    let mut next = active_labels.iter().max().map_or(0, |m| m + 1);
    for l in labels.iter_mut().filter(|l| **l == usize::MAX) {
        *l = next;
        next += 1;
    }
    Ok(Clustering::from_labels(graph, canonical(&labels), params.threshold))
}

/// Branch-and-bound over restricted growth strings in lexicographic order;
/// partial losses only grow, so strictly worse prefixes are cut.
fn exact_search<T: Scalar>(problem: &Problem<T>) -> Vec<usize> {
    struct Search<'a, T> {
        problem: &'a Problem<T>,
        labels: Vec<usize>,
        best: Option<(T, usize, Vec<usize>)>,
    }

    impl<T: Scalar> Search<'_, T> {
        fn run(&mut self, i: usize, used: usize, partial: T) {
            let eps = self.problem.eps;
            if let Some((best, _, _)) = &self.best {
                if partial > *best + eps {
                    return;
                }
            }
            if i == self.problem.len() {
                let better = match &self.best {
                    None => true,
                    Some((best, k, _)) => partial < *best - eps || (partial <= *best + eps && used < *k),
                };
                if better {
                    self.best = Some((partial, used, self.labels.clone()));
                }
                return;
            }
            for l in 0..=used {
                let cost: T = self.problem.back[i]
                    .iter()
                    .map(|&(j, w)| edge_cost(w, self.labels[j] == l))
                    .sum();
                self.labels[i] = l;
                self.run(i + 1, used.max(l + 1), partial + cost);
            }
        }
    }

    let mut search = Search {
        problem,
        labels: vec![0; problem.len()],
        best: None,
    };
    search.run(0, 0, T::zero());
    search.best.expect("at least one partition").2
}

fn anneal<T: Scalar>(problem: &Problem<T>, params: &ClusterParams<T>) -> Vec<usize> {
    let n = problem.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let iters = if params.max_iters == 0 { 2000 * n } else { params.max_iters };
    let t_start = problem
        .adj
        .iter()
        .flatten()
        .map(|&(_, w)| w.abs())
        .fold(T::zero(), T::max)
        .max(T::of(1e-3));
    let t_end = t_start * T::of(1e-3);
    let cooling = (t_end / t_start).powf(T::one() / T::of_usize(iters.max(1)));

    let mut best: Option<Candidate<T>> = None;
    for restart in 0..params.restarts.max(1) {
        let init = if restart == 0 {
            positive_components(problem)
        } else {
            let k = rng.gen_range(1..=n);
            (0..n).map(|_| rng.gen_range(0..k)).collect()
        };
        let mut labels = init;
        let mut sizes = vec![0usize; n];
        for &l in &labels {
            sizes[l] += 1;
        }
        let mut loss = problem.loss(&labels);
        let mut run_best = (loss, labels.clone());
        let mut temp = t_start;

        for _ in 0..iters {
            let v = rng.gen_range(0..n);
            let from = labels[v];
            let to = if !problem.adj[v].is_empty() && rng.gen_bool(0.9) {
                let (u, _) = problem.adj[v][rng.gen_range(0..problem.adj[v].len())];
                labels[u]
            } else if sizes[from] > 1 {
                sizes.iter().position(|&s| s == 0).expect("fewer clusters than nodes")
            } else {
                from
            };
            if to != from {
                let delta = problem.move_delta(&labels, v, to);
                let accept = delta <= T::zero() || {
                    let p = (-delta / temp).exp().to_f64_lossy();
                    rng.gen::<f64>() < p
                };
                if accept {
                    labels[v] = to;
                    sizes[from] -= 1;
                    sizes[to] += 1;
                    loss += delta;
                    if loss < run_best.0 - problem.eps {
                        run_best = (loss, labels.clone());
                    }
                }
            }
            temp *= cooling;
        }

        let polished = polish(problem, run_best.1);
        let cand = Candidate::new(problem, &polished);
        if best.as_ref().is_none_or(|b| cand.better_than(b, problem.eps)) {
            best = Some(cand);
        }
    }
    best.expect("at least one restart").labels
}

/// Connected components over positive shifted edges.
fn positive_components<T: Scalar>(problem: &Problem<T>) -> Vec<usize> {
    let n = problem.len();
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if labels[s] != usize::MAX {
            continue;
        }
        labels[s] = next;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &(u, w) in &problem.adj[v] {
                if w > T::zero() && labels[u] == usize::MAX {
                    labels[u] = next;
                    stack.push(u);
                }
            }
        }
        next += 1;
    }
    labels
}

/// Greedy single-node moves and cluster merges until neither improves.
/// Merges that leave the loss unchanged are taken too (fewer clusters).
fn polish<T: Scalar>(problem: &Problem<T>, labels: Vec<usize>) -> Vec<usize> {
    let n = problem.len();
    let eps = problem.eps;
    let mut labels = canonical(&labels);
    loop {
        let mut changed = false;
        // single-node moves
        loop {
            let mut improved = false;
            for v in 0..n {
                let k = labels.iter().max().map_or(0, |m| m + 1);
                let mut sizes = vec![0usize; k + 1];
                for &l in &labels {
                    sizes[l] += 1;
                }
                let from = labels[v];
                let mut best = (T::zero(), from);
                let mut targets: Vec<usize> = problem.adj[v].iter().map(|&(u, _)| labels[u]).collect();
                if sizes[from] > 1 {
                    targets.push(k);
                }
                for to in targets {
                    if to == from {
                        continue;
                    }
                    let d = problem.move_delta(&labels, v, to);
                    if d < best.0 - eps {
                        best = (d, to);
                    }
                }
                if best.1 != from {
                    labels[v] = best.1;
                    labels = canonical(&labels);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
            changed = true;
        }
        // merges: merging a and b changes the loss by -(sum of w' between them)
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut between = vec![vec![T::zero(); k]; k];
        for (b, list) in problem.back.iter().enumerate() {
            for &(a, w) in list {
                let (la, lb) = (labels[a], labels[b]);
                if la != lb {
                    between[la][lb] += w;
                    between[lb][la] += w;
                }
            }
        }
        let mut merge: Option<(T, usize, usize)> = None;
        for a in 0..k {
            for b in a + 1..k {
                let gain = between[a][b];
                if gain >= -eps && merge.is_none_or(|(g, _, _)| gain > g + eps) {
                    merge = Some((gain, a, b));
                }
            }
        }
        if let Some((_, a, b)) = merge {
            for l in labels.iter_mut() {
                if *l == b {
                    *l = a;
                }
            }
            labels = canonical(&labels);
            changed = true;
        }
        if !changed {
            return labels;
        }
    }
}
