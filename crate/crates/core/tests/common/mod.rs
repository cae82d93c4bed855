//! Independent reference implementations for the integration tests. They
//! follow the textbook definitions directly and share no code with the
//! library beyond its data types.

#![allow(dead_code)]

use std::collections::BTreeMap;

use lscd::corpus::{Period, Usage};
use lscd::wug::{build_wug, Edge, EdgeMap, Judgment, UsagePair, WordUsageGraph};

pub fn usage(id: &str, period: Period) -> Usage {
    Usage {
        identifier: id.to_string(),
        lemma: "w".into(),
        pos: "NOUN".into(),
        period,
        context: "w".into(),
        target_span: (0, 1),
        sentence_id: String::new(),
        surface: None,
    }
}

pub fn node_id(i: usize) -> String {
    format!("u{i:02}")
}

/// Graph over `n` nodes (the first half in period 1) with the given
/// weighted edges.
pub fn graph(n: usize, edges: &[(usize, usize, f64)]) -> WordUsageGraph<f64> {
    let usages = (0..n)
        .map(|i| usage(&node_id(i), if i < n.div_ceil(2) { Period::C1 } else { Period::C2 }))
        .collect();
    let map: EdgeMap<f64> = edges
        .iter()
        .map(|&(a, b, w)| (UsagePair::new(&node_id(a), &node_id(b)), Edge { weight: w, judgments: 1 }))
        .collect();
    build_wug("w", usages, &map).unwrap()
}

/// Correlation-clustering loss straight from the definition.
pub fn cc_loss(labels: &[usize], edges: &[(usize, usize, f64)], threshold: f64) -> f64 {
    edges
        .iter()
        .map(|&(a, b, w)| {
            let s = w - threshold;
            match (labels[a] == labels[b], s < 0.0, s > 0.0) {
                (true, true, _) => -s,
                (false, _, true) => s,
                _ => 0.0,
            }
        })
        .sum()
}

/// Minimum loss over every set partition of the nodes that carry an edge.
pub fn brute_force_loss(n: usize, edges: &[(usize, usize, f64)], threshold: f64) -> f64 {
    let mut active: Vec<usize> = edges.iter().flat_map(|&(a, b, _)| [a, b]).collect();
    active.sort();
    active.dedup();
    let mut labels = vec![usize::MAX; n];
    // isolated nodes each get their own label; they touch no edge
    for (i, l) in labels.iter_mut().enumerate() {
        *l = 1000 + i;
    }
    let mut best = f64::INFINITY;
    fn rec(
        k: usize,
        max_label: usize,
        active: &[usize],
        labels: &mut Vec<usize>,
        edges: &[(usize, usize, f64)],
        threshold: f64,
        best: &mut f64,
    ) {
        if k == active.len() {
            *best = best.min(cc_loss(labels, edges, threshold));
            return;
        }
        for l in 0..=max_label {
            labels[active[k]] = l;
            rec(k + 1, max_label.max(l + 1), active, labels, edges, threshold, best);
        }
    }
    rec(0, 0, &active, &mut labels, edges, threshold, &mut best);
    if active.is_empty() {
        0.0
    } else {
        best
    }
}

/// Jensen-Shannon distance with base-2 logarithms, via natural logs.
pub fn jsd_oracle(p: &[f64], q: &[f64]) -> f64 {
    let kl = |a: &[f64], m: &[f64]| -> f64 {
        a.iter().zip(m).filter(|(x, _)| **x > 0.0).map(|(x, y)| x * (x / y).ln()).sum()
    };
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a + b) / 2.0).collect();
    let js = (0.5 * kl(p, &m) + 0.5 * kl(q, &m)) / std::f64::consts::LN_2;
    js.max(0.0).sqrt()
}

/// Fractional ranks by counting: rank = #smaller + (#equal + 1) / 2.
pub fn ranks_oracle(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let less = xs.iter().filter(|&&y| y < x).count() as f64;
            let eq = xs.iter().filter(|&&y| y == x).count() as f64;
            less + (eq + 1.0) / 2.0
        })
        .collect()
}

pub fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
    pearson_oracle(&ranks_oracle(x), &ranks_oracle(y))
}

/// Krippendorff's alpha from pairable values: observed disagreement
/// averages within-unit value pairs, expected disagreement averages all
/// pairs of pairable values. `None` when undefined.
pub fn alpha_oracle(judgments: &[Judgment], ordinal: bool) -> Option<f64> {
    let mut units: BTreeMap<UsagePair, Vec<u8>> = BTreeMap::new();
    for j in judgments.iter().filter(|j| j.value > 0) {
        units.entry(j.pair()).or_default().push(j.value);
    }
    units.retain(|_, v| v.len() >= 2);
    let values: Vec<u8> = units.values().flatten().copied().collect();
    let n = values.len() as f64;
    if n < 2.0 {
        return None;
    }
    let freq = |g: u8| values.iter().filter(|&&v| v == g).count() as f64;
    let delta = |a: u8, b: u8| -> f64 {
        if ordinal {
            let (lo, hi) = (a.min(b), a.max(b));
            let s: f64 = (lo..=hi).map(freq).sum::<f64>() - (freq(lo) + freq(hi)) / 2.0;
            s * s
        } else {
            (a as f64 - b as f64).powi(2)
        }
    };
    let mut d_o = 0.0;
    for vals in units.values() {
        let m = vals.len() as f64;
        let mut s = 0.0;
        for i in 0..vals.len() {
            for j in 0..vals.len() {
                if i != j {
                    s += delta(vals[i], vals[j]);
                }
            }
        }
        d_o += s / (m - 1.0);
    }
    d_o /= n;
    let mut d_e = 0.0;
    for i in 0..values.len() {
        for j in 0..values.len() {
            if i != j {
                d_e += delta(values[i], values[j]);
            }
        }
    }
    d_e /= n * (n - 1.0);
    (d_e > 0.0).then(|| 1.0 - d_o / d_e)
}

/// Labels for score > mean + population std.
pub fn mean_std_oracle(xs: &[f64]) -> Vec<bool> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let t = mean + var.sqrt();
    xs.iter().map(|&x| x > t).collect()
}

/// Two-segment split over integer scores in exact arithmetic: try every
/// distinct score as the lower bound of the upper segment, keep the
/// smallest summed squared error, break ties toward the highest bound.
pub fn changepoint_oracle(xs: &[i64]) -> Vec<bool> {
    let mut bounds: Vec<i64> = xs.to_vec();
    bounds.sort();
    bounds.dedup();
    // SSE of a segment as a fraction num/den: (n·Σx² − (Σx)²) / n
    let sse = |seg: &[i64]| -> (i128, i128) {
        let n = seg.len() as i128;
        let s: i128 = seg.iter().map(|&x| x as i128).sum();
        let q: i128 = seg.iter().map(|&x| (x as i128) * (x as i128)).sum();
        (n * q - s * s, n)
    };
    let mut best: Option<((i128, i128), i64)> = None;
    for &b in bounds.iter().skip(1) {
        let lo: Vec<i64> = xs.iter().copied().filter(|&x| x < b).collect();
        let hi: Vec<i64> = xs.iter().copied().filter(|&x| x >= b).collect();
        let (a, na) = sse(&lo);
        let (c, nc) = sse(&hi);
        let cost = (a * nc + c * na, na * nc);
        let better = match best {
            None => true,
            // cost <= best, compared by cross-multiplication
            Some(((bn, bd), _)) => cost.0 * bd <= bn * cost.1,
        };
        if better {
            best = Some((cost, b));
        }
    }
    match best {
        Some((_, b)) => xs.iter().map(|&x| x >= b).collect(),
        None => vec![false; xs.len()],
    }
}
