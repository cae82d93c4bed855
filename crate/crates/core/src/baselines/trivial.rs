use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PredictionSet, Submission, Task};
use crate::Scalar;

/// Every word labeled 1 for binary change, gain and loss.
pub fn minority_baseline<T: Scalar>(targets: &[String]) -> Submission<T> {
    let mut sub = Submission::default();
    for task in [Task::Binary, Task::Gain, Task::Loss] {
        sub.insert(PredictionSet::from_values(task, targets.iter().map(|w| (w.clone(), T::one())).collect()));
    }
    sub
}

/// Uniform `[0, 1)` scores for the graded subtasks and fair coin labels for
/// the binary ones, reproducible per seed.
pub fn random_baseline<T: Scalar>(targets: &[String], seed: u64) -> Submission<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sub = Submission::default();
    for task in Task::ALL {
        let values = targets
            .iter()
            .map(|w| {
                let v = if task.is_binary() {
                    if rng.gen_bool(0.5) { T::one() } else { T::zero() }
                } else {
                    T::of(rng.gen::<f64>())
                };
                (w.clone(), v)
            })
            .collect();
        sub.insert(PredictionSet::from_values(task, values));
    }
    sub
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    #[test]
    fn minority_is_all_ones() {
        let sub: Submission<f64> = minority_baseline(&words(5));
        assert!(sub.get(Task::Graded).is_none());
        for t in [Task::Binary, Task::Gain, Task::Loss] {
            assert!(sub.get(t).unwrap().values.values().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn random_reproducible_and_in_range() {
        let a: Submission<f64> = random_baseline(&words(60), 42);
        let b: Submission<f64> = random_baseline(&words(60), 42);
        assert_eq!(a, b);
        let g = a.get(Task::Graded).unwrap();
        assert!(g.values.values().all(|&v| (0.0..1.0).contains(&v)));
        assert!(a.get(Task::Binary).unwrap().values.values().all(|&v| v == 0.0 || v == 1.0));
    }
}
