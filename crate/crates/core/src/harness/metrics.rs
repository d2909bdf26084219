use serde::{Deserialize, Serialize};

/// Boundary-detection scores. Fractions are in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub n_true: usize,
    pub n_predicted: usize,
    pub n_correct: usize,
}

impl Metrics {
    pub fn from_counts(n_true: usize, n_predicted: usize, n_correct: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let recall = ratio(n_correct, n_true);
        let precision = ratio(n_correct, n_predicted);
        let f1 = if recall == 0.0 || precision == 0.0 {
            0.0
        } else {
            2.0 * recall * precision / (recall + precision)
        };
        Metrics {
            recall,
            precision,
            f1,
            n_true,
            n_predicted,
            n_correct,
        }
    }
}

/// Exact-index matching. Both inputs are sorted and deduplicated.
pub fn score(predicted: &[usize], truth: &[usize]) -> Metrics {
    let mut correct = 0;
    let (mut i, mut j) = (0, 0);
    while i < predicted.len() && j < truth.len() {
        match predicted[i].cmp(&truth[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                correct += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Metrics::from_counts(truth.len(), predicted.len(), correct)
}

/// Like [`score`] but a prediction within `tolerance` indices of an
/// unmatched true boundary also counts. Matching is greedy left to right,
/// one prediction per true boundary.
pub fn score_with_tolerance(predicted: &[usize], truth: &[usize], tolerance: usize) -> Metrics {
    let mut used = vec![false; predicted.len()];
    let mut correct = 0;
    for &t in truth {
        let hit = predicted
            .iter()
            .enumerate()
            .filter(|(k, &p)| !used[*k] && p.abs_diff(t) <= tolerance)
            .min_by_key(|(_, &p)| p.abs_diff(t));
        if let Some((k, _)) = hit {
            used[k] = true;
            correct += 1;
        }
    }
    Metrics::from_counts(truth.len(), predicted.len(), correct)
}
