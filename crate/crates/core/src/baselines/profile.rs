use std::collections::{BTreeMap, BTreeSet};

use super::{PredictionSet, Task};
use crate::corpus::{normalize_lemma, Corpus, Layer, Period};
use crate::{stats, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProfileFeatures {
    /// Morphological features and dependency relations in one vector.
    #[default]
    Both,
    Morphology,
    Syntax,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammaticalProfile {
    pub lemma: String,
    pub period: Period,
    /// `"Case=Nom"`-style morphology keys and `"deprel=nsubj"` keys.
    pub feature_counts: BTreeMap<String, usize>,
}

/// Profiles of every lemma in `targets` that occurs in `corpus`.
pub fn grammatical_profiles(corpus: &Corpus, targets: &[String], features: ProfileFeatures) -> Result<BTreeMap<String, GrammaticalProfile>> {
    corpus.require(Layer::Conllu)?;
    let wanted: BTreeSet<String> = targets.iter().map(|t| normalize_lemma(t)).collect();
    let mut out: BTreeMap<String, GrammaticalProfile> = BTreeMap::new();
    for tok in corpus.sentences.iter().flat_map(|s| &s.tokens) {
        let key = normalize_lemma(&tok.lemma);
        if !wanted.contains(&key) {
            continue;
        }
        let profile = out.entry(key.clone()).or_insert_with(|| GrammaticalProfile {
            lemma: key,
            period: corpus.period(),
            feature_counts: BTreeMap::new(),
        });
        if features != ProfileFeatures::Syntax {
            for (k, v) in &tok.morph {
                *profile.feature_counts.entry(format!("{k}={v}")).or_insert(0) += 1;
            }
        }
        if features != ProfileFeatures::Morphology {
            if let Some(rel) = &tok.deprel {
                *profile.feature_counts.entry(format!("deprel={rel}")).or_insert(0) += 1;
            }
        }
    }
    Ok(out)
}

fn profile_distance<T: Scalar>(a: &GrammaticalProfile, b: &GrammaticalProfile) -> Option<T> {
    let keys: BTreeSet<&String> = a.feature_counts.keys().chain(b.feature_counts.keys()).collect();
    let vec = |p: &GrammaticalProfile| -> Vec<T> {
        keys.iter()
            .map(|k| T::of_usize(p.feature_counts.get(*k).copied().unwrap_or(0)))
            .collect()
    };
    stats::cosine_similarity(&vec(a), &vec(b)).map(|c| T::one() - c)
}

/// Cosine distance between a word's raw-count profile vectors in the two
/// periods. Words absent from a period, or without any features, are skipped.
pub fn profile_change_scores<T: Scalar>(
    c1: &Corpus,
    c2: &Corpus,
    targets: &[String],
    features: ProfileFeatures,
) -> Result<PredictionSet<T>> {
    let p1 = grammatical_profiles(c1, targets, features)?;
    let p2 = grammatical_profiles(c2, targets, features)?;
    let mut out = PredictionSet::new(Task::Graded);
    for w in targets {
        let key = normalize_lemma(w);
        let score = match (p1.get(&key), p2.get(&key)) {
            (Some(a), Some(b)) => profile_distance::<T>(a, b),
            _ => None,
        };
        match score {
            Some(d) => {
                out.values.insert(w.clone(), d);
            }
            None => out.skipped.push(w.clone()),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conllu(rows: &[(&str, &str)]) -> String {
        // (feats, deprel) per sentence, one-token sentences of lemma "casa"
        let mut s = String::new();
        for (feats, rel) in rows {
            s.push_str(&format!("1\tcasa\tcasa\tNOUN\t_\t{feats}\t0\t{rel}\t_\t_\n\n"));
        }
        s
    }

    fn corpus(period: Period, rows: &[(&str, &str)]) -> Corpus {
        Corpus::parse_layer(period, Layer::Conllu, &conllu(rows)).unwrap()
    }

    fn targets() -> Vec<String> {
        vec!["casa".to_string()]
    }

    #[test]
    fn identical_profiles() {
        let rows = [("Case=Nom", "nsubj"), ("Case=Acc", "obj")];
        let p: PredictionSet<f64> =
            profile_change_scores(&corpus(Period::C1, &rows), &corpus(Period::C2, &rows), &targets(), ProfileFeatures::Both).unwrap();
        assert!(p.values["casa"].abs() < 1e-12);
    }

    #[test]
    fn disjoint_profiles() {
        let p: PredictionSet<f64> = profile_change_scores(
            &corpus(Period::C1, &[("Case=Nom", "nsubj")]),
            &corpus(Period::C2, &[("Case=Acc", "obj")]),
            &targets(),
            ProfileFeatures::Both,
        )
        .unwrap();
        assert!((p.values["casa"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn case_shift_hand_cosine() {
        let mut r1 = vec![("Case=Nom", "_"); 8];
        r1.extend(vec![("Case=Acc", "_"); 2]);
        let mut r2 = vec![("Case=Nom", "_"); 2];
        r2.extend(vec![("Case=Acc", "_"); 8]);
        let p: PredictionSet<f64> =
            profile_change_scores(&corpus(Period::C1, &r1), &corpus(Period::C2, &r2), &targets(), ProfileFeatures::Morphology).unwrap();
        // (8*2 + 2*8) / (8^2 + 2^2) = 32/68
        assert!((p.values["casa"] - (1.0 - 32.0 / 68.0)).abs() < 1e-12);
        assert!((p.values["casa"] - 0.5294).abs() < 1e-4);
    }

    #[test]
    fn absent_word_skipped() {
        let c2 = Corpus::parse_layer(Period::C2, Layer::Conllu, "1\tperro\tperro\tNOUN\t_\tCase=Nom\t0\troot\t_\t_\n").unwrap();
        let p: PredictionSet<f64> = profile_change_scores(&corpus(Period::C1, &[("Case=Nom", "nsubj")]), &c2, &targets(), ProfileFeatures::Both).unwrap();
        assert_eq!(p.skipped, targets());
    }

    #[test]
    fn needs_conllu_layer() {
        let c = Corpus::parse_layer(Period::C1, Layer::Lemma, "casa").unwrap();
        assert!(profile_change_scores::<f64>(&c, &c, &targets(), ProfileFeatures::Both).is_err());
    }
}
