mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use lscd::baselines::{
    binarize_changepoint, binarize_mean_std, cosine_change_scores, EmbeddingMatrix, PredictionSet, Task,
};
use lscd::change::{binary_scores, graded_change, jsd_distance};
use lscd::corpus::{select_targets, Period, VocabStats};
use lscd::eval::spearman;
use lscd::wug::clustering_loss;

use common::*;

fn dist(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len).prop_filter_map("all zero", |v| {
        let s: f64 = v.iter().sum();
        (s > 1e-6).then(|| v.iter().map(|x| x / s).collect())
    })
}

fn counts() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..6).prop_flat_map(|k| {
        (prop::collection::vec(0usize..20, k), prop::collection::vec(0usize..20, k))
            .prop_filter("empty period", |(a, b)| a.iter().sum::<usize>() > 0 && b.iter().sum::<usize>() > 0)
    })
}

fn word_map(xs: &[f64]) -> BTreeMap<String, f64> {
    xs.iter().enumerate().map(|(i, &x)| (format!("w{i:03}"), x)).collect()
}

fn stats(period: Period, freqs: &[usize]) -> VocabStats {
    VocabStats {
        period,
        lemma_freq: freqs.iter().enumerate().map(|(i, &f)| (format!("w{i:03}"), f)).collect(),
        total_tokens: freqs.iter().sum(),
        pos_filter: None,
    }
}

proptest! {
    #[test]
    fn jsd_is_symmetric_and_bounded((p, q) in (1usize..8).prop_flat_map(|k| (dist(k), dist(k)))) {
        let pq: f64 = jsd_distance(&p, &q).unwrap();
        let qp: f64 = jsd_distance(&q, &p).unwrap();
        prop_assert!((pq - qp).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        let pp: f64 = jsd_distance(&p, &p).unwrap();
        prop_assert!(pp.abs() < 1e-6);
    }

    #[test]
    fn graded_change_ignores_cluster_order((d1, d2) in counts(), rot in 0usize..6) {
        let r = rot % d1.len();
        let (mut e1, mut e2) = (d1.clone(), d2.clone());
        e1.rotate_left(r);
        e2.rotate_left(r);
        let a: f64 = graded_change(&d1, &d2).unwrap();
        let b: f64 = graded_change(&e1, &e2).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn swapping_periods_swaps_gain_and_loss((d1, d2) in counts(), k in 0usize..4, n in 1usize..6) {
        let fwd = binary_scores(&d1, &d2, k as f64, n as f64).unwrap();
        let rev = binary_scores(&d2, &d1, k as f64, n as f64).unwrap();
        prop_assert_eq!(fwd.gain, rev.loss);
        prop_assert_eq!(fwd.loss, rev.gain);
        prop_assert_eq!(fwd.binary, rev.binary);
    }

    #[test]
    fn clustering_loss_ignores_label_names(
        (n, edges, labels) in (2usize..9).prop_flat_map(|n| (
            Just(n),
            prop::collection::vec((0..n, 0..n, 1u8..=4), 1..20),
            prop::collection::vec(0usize..4, n),
        )),
        shift in 1usize..50,
    ) {
        let mut seen = std::collections::BTreeSet::new();
        let edges: Vec<(usize, usize, f64)> = edges
            .into_iter()
            .filter(|&(a, b, _)| a != b && seen.insert((a.min(b), a.max(b))))
            .map(|(a, b, w)| (a, b, w as f64))
            .collect();
        prop_assume!(!edges.is_empty());
        let g = graph(n, &edges);
        // graph node order may differ from construction order; map through ids
        let by_node: Vec<usize> = g.nodes().iter().map(|u| labels[u.identifier[1..].parse::<usize>().unwrap()]).collect();
        let renamed: Vec<usize> = by_node.iter().map(|l| (l * 7 + shift) % 97).collect();
        let a = clustering_loss(&g, &by_node, 2.5);
        let b = clustering_loss(&g, &renamed, 2.5);
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((a - cc_loss(&labels, &edges, 2.5)).abs() < 1e-9);
    }

    #[test]
    fn spearman_ignores_monotone_transforms(
        xs in prop::collection::vec(-5i32..5, 4..30),
        ys in prop::collection::vec(-5i32..5, 4..30),
    ) {
        let n = xs.len().min(ys.len());
        let g: Vec<f64> = xs[..n].iter().map(|&x| x as f64).collect();
        let p: Vec<f64> = ys[..n].iter().map(|&y| y as f64).collect();
        let q: Vec<f64> = p.iter().map(|&y| (y / 3.0).exp() * 2.0 + 1.0).collect();
        match (spearman(&word_map(&g), &word_map(&p)), spearman(&word_map(&g), &word_map(&q))) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn mean_std_labels_survive_affine_maps(xs in prop::collection::vec(-100i32..100, 2..40), scale in 0u32..4, shift in -50i32..50) {
        let raw: Vec<f64> = xs.iter().map(|&x| x as f64 / 8.0).collect();
        let moved: Vec<f64> = raw.iter().map(|x| x * (1u32 << scale) as f64 + shift as f64).collect();
        let a = binarize_mean_std(&PredictionSet::from_values(Task::Graded, word_map(&raw))).unwrap();
        let b = binarize_mean_std(&PredictionSet::from_values(Task::Graded, word_map(&moved))).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn changepoint_labels_survive_shifts(xs in prop::collection::vec(0i32..20, 3..40), shift in -1000i32..1000) {
        let raw: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
        let moved: Vec<f64> = raw.iter().map(|x| x + shift as f64).collect();
        let a = binarize_changepoint(&PredictionSet::from_values(Task::Graded, word_map(&raw))).unwrap();
        let b = binarize_changepoint(&PredictionSet::from_values(Task::Graded, word_map(&moved))).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn raising_min1_never_adds_targets(
        f1 in prop::collection::vec(0usize..50, 1..40),
        f2 in prop::collection::vec(0usize..50, 1..40),
        lo in 0usize..30,
        step in 0usize..30,
        min2 in 0usize..30,
    ) {
        let (s1, s2) = (stats(Period::C1, &f1), stats(Period::C2, &f2));
        let loose = select_targets(&s1, &s2, lo, min2);
        let strict = select_targets(&s1, &s2, lo + step, min2);
        prop_assert!(strict.iter().all(|w| loose.contains(w)));
    }

    #[test]
    fn cosine_change_ignores_common_rotation(
        rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 6),
        other in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 6),
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        prop_assume!(rows.iter().chain(&other).all(|r| r.iter().map(|x| x * x).sum::<f64>() > 1e-3));
        let vocab: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();
        let (c, s) = (angle.cos(), angle.sin());
        let rotate = |r: &Vec<f64>| vec![c * r[0] - s * r[1], s * r[0] + c * r[1], r[2], r[3]];
        let emb = |rs: Vec<Vec<f64>>| EmbeddingMatrix::new(vocab.clone(), 4, rs.concat()).unwrap();
        let a = cosine_change_scores(&emb(rows.clone()), &emb(other.clone()), &vocab);
        let b = cosine_change_scores(&emb(rows.iter().map(rotate).collect()), &emb(other.iter().map(rotate).collect()), &vocab);
        for w in &vocab {
            prop_assert!((a.values[w] - b.values[w]).abs() < 1e-9);
        }
    }

    #[test]
    fn prediction_rows_parse_order_free(xs in prop::collection::vec(-10.0f64..10.0, 1..30), seed in any::<u64>()) {
        let rows: Vec<String> = word_map(&xs).iter().map(|(w, v)| format!("{w}\t{v}")).collect();
        let mut shuffled = rows.clone();
        let k = (seed as usize) % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let a = PredictionSet::<f64>::parse(Task::Graded, &rows.join("\n")).unwrap();
        let b = PredictionSet::<f64>::parse(Task::Graded, &shuffled.join("\n")).unwrap();
        prop_assert_eq!(&a.values, &b.values);
        let gold = word_map(&xs.iter().map(|x| x.round()).collect::<Vec<_>>());
        if let (Ok(r1), Ok(r2)) = (spearman(&gold, &a.values), spearman(&gold, &b.values)) {
            prop_assert_eq!(r1.to_bits(), r2.to_bits());
        }
    }
}
