//! Ranking metrics for link prediction: AUC-ROC and AUC-PR.
//!
//! AUC-ROC is computed as the Mann-Whitney statistic with average ranks
//! over ties: the probability a random positive outranks a random
//! negative, counting ties as half. AUC-PR sweeps thresholds in
//! descending score order, processes tied scores as one group, and sums
//! precision-weighted recall increments (a conservative step curve, no
//! interpolation between points). Relational datasets are usually skewed,
//! which is why both areas are reported rather than accuracy.

use thiserror::Error;

use crate::logic::Label;

/// A scored, labeled example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredExample {
    pub score: f64,
    pub label: Label,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("AUC-ROC is undefined: need both classes, found {positives} positives and {negatives} negatives")]
    SingleClass { positives: usize, negatives: usize },
    #[error("AUC-PR is undefined without positive examples")]
    NoPositives,
    #[error("score {value} is not finite")]
    NonFinite { value: f64 },
    #[error("scores file line {line}: {message}")]
    ScoresFormat { line: usize, message: String },
}

fn validate(items: &[ScoredExample]) -> Result<(usize, usize), MetricError> {
    let mut positives = 0;
    let mut negatives = 0;
    for item in items {
        if !item.score.is_finite() {
            return Err(MetricError::NonFinite { value: item.score });
        }
        match item.label {
            Label::Positive => positives += 1,
            Label::Negative => negatives += 1,
        }
    }
    Ok((positives, negatives))
}

/// Area under the ROC curve: `P(score_pos > score_neg) + P(tie)/2`,
/// computed from tie-averaged ranks in `O(n log n)`.
pub fn auc_roc(items: &[ScoredExample]) -> Result<f64, MetricError> {
    let (positives, negatives) = validate(items)?;
    if positives == 0 || negatives == 0 {
        return Err(MetricError::SingleClass { positives, negatives });
    }
    let mut sorted: Vec<&ScoredExample> = items.iter().collect();
    sorted.sort_by(|a, b| a.score.partial_cmp(&b.score).expect("finite scores"));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j].score == sorted[i].score {
            j += 1;
        }
        // Ranks are 1-based; a tie group shares its average rank.
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for item in &sorted[i..j] {
            if item.label == Label::Positive {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let p = positives as f64;
    let n = negatives as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Area under the precision-recall step curve built by a descending-score
/// sweep with tied scores processed as one group; the area is the sum of
/// `precision * recall_increment` rectangles.
pub fn auc_pr(items: &[ScoredExample]) -> Result<f64, MetricError> {
    let (positives, _) = validate(items)?;
    if positives == 0 {
        return Err(MetricError::NoPositives);
    }
    let mut sorted: Vec<&ScoredExample> = items.iter().collect();
    sorted.sort_by(|a, b| b.score.partial_cmp(&a.score).expect("finite scores"));

    let total_pos = positives as f64;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j].score == sorted[i].score {
            j += 1;
        }
        for item in &sorted[i..j] {
            match item.label {
                Label::Positive => tp += 1,
                Label::Negative => fp += 1,
            }
        }
        let recall = tp as f64 / total_pos;
        let precision = tp as f64 / (tp + fp) as f64;
        area += precision * (recall - prev_recall);
        prev_recall = recall;
        i = j;
    }
    Ok(area)
}

/// Render scores as `example_id,score,label` lines with full score
/// precision.
pub fn scores_to_string(scores: &[(String, f64, Label)]) -> String {
    let mut out = String::from("% example_id,score,label\n");
    for (id, score, label) in scores {
        out.push_str(&format!("{id},{score:?},{}\n", label.as_str()));
    }
    out
}

/// Parse a scores file written by [`scores_to_string`].
pub fn scores_from_str(text: &str) -> Result<Vec<(String, f64, Label)>, MetricError> {
    let mut out = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        // The id may contain commas inside parentheses, so split from the right.
        let (rest, label_text) = line.rsplit_once(',').ok_or(MetricError::ScoresFormat {
            line: lineno,
            message: "expected `example_id,score,label`".to_string(),
        })?;
        let (id, score_text) = rest.rsplit_once(',').ok_or(MetricError::ScoresFormat {
            line: lineno,
            message: "expected `example_id,score,label`".to_string(),
        })?;
        let score: f64 = score_text.trim().parse().map_err(|_| MetricError::ScoresFormat {
            line: lineno,
            message: format!("invalid score `{score_text}`"),
        })?;
        let label = Label::parse(label_text).ok_or(MetricError::ScoresFormat {
            line: lineno,
            message: format!("invalid label `{label_text}`"),
        })?;
        out.push((id.trim().to_string(), score, label));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn items(pairs: &[(f64, bool)]) -> Vec<ScoredExample> {
        pairs
            .iter()
            .map(|&(score, positive)| ScoredExample {
                score,
                label: if positive { Label::Positive } else { Label::Negative },
            })
            .collect()
    }

    /// O(P*N) pairwise oracle for AUC-ROC.
    fn roc_oracle(data: &[ScoredExample]) -> f64 {
        let pos: Vec<f64> = data
            .iter()
            .filter(|e| e.label == Label::Positive)
            .map(|e| e.score)
            .collect();
        let neg: Vec<f64> = data
            .iter()
            .filter(|e| e.label == Label::Negative)
            .map(|e| e.score)
            .collect();
        let mut total = 0.0;
        for p in &pos {
            for n in &neg {
                if p > n {
                    total += 1.0;
                } else if p == n {
                    total += 0.5;
                }
            }
        }
        total / (pos.len() * neg.len()) as f64
    }

    /// Threshold-enumeration oracle for AUC-PR: recompute precision and
    /// recall from scratch at every distinct score.
    fn pr_oracle(data: &[ScoredExample]) -> f64 {
        let total_pos = data.iter().filter(|e| e.label == Label::Positive).count() as f64;
        let mut thresholds: Vec<f64> = data.iter().map(|e| e.score).collect();
        thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
        thresholds.dedup();
        let mut area = 0.0;
        let mut prev_recall = 0.0;
        for t in thresholds {
            let tp = data
                .iter()
                .filter(|e| e.label == Label::Positive && e.score >= t)
                .count() as f64;
            let fp = data
                .iter()
                .filter(|e| e.label == Label::Negative && e.score >= t)
                .count() as f64;
            let recall = tp / total_pos;
            let precision = tp / (tp + fp);
            area += precision * (recall - prev_recall);
            prev_recall = recall;
        }
        area
    }

    #[test]
    fn perfect_ranking_is_exactly_one() {
        let data = items(&[(0.9, true), (0.8, true), (0.3, false), (0.1, false)]);
        assert_eq!(auc_roc(&data).unwrap(), 1.0);
        assert_eq!(auc_pr(&data).unwrap(), 1.0);
    }

    #[test]
    fn all_ties_give_half_roc() {
        let data = items(&[(0.5, true), (0.5, false), (0.5, true), (0.5, false)]);
        assert_eq!(auc_roc(&data).unwrap(), 0.5);
    }

    #[test]
    fn two_item_pr_hand_sweep() {
        // Positive ranked second: the curve has precision 1/2 at recall 1.
        let data = items(&[(0.9, false), (0.1, true)]);
        assert_eq!(auc_pr(&data).unwrap(), 0.5);
    }

    #[test]
    fn single_class_errors() {
        let only_pos = items(&[(0.5, true)]);
        assert!(matches!(auc_roc(&only_pos), Err(MetricError::SingleClass { .. })));
        let only_neg = items(&[(0.5, false)]);
        assert!(matches!(auc_roc(&only_neg), Err(MetricError::SingleClass { .. })));
        assert!(matches!(auc_pr(&only_neg), Err(MetricError::NoPositives)));
    }

    #[test]
    fn non_finite_scores_error() {
        let data = items(&[(f64::NAN, true), (0.1, false)]);
        assert!(matches!(auc_roc(&data), Err(MetricError::NonFinite { .. })));
    }

    #[test]
    fn matches_oracles_on_random_lists() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let n = rng.random_range(2..60);
            let mut data: Vec<ScoredExample> = (0..n)
                .map(|_| ScoredExample {
                    // Quantized scores so ties actually occur.
                    score: (rng.random_range(0..10) as f64) / 10.0,
                    label: if rng.random_bool(0.4) { Label::Positive } else { Label::Negative },
                })
                .collect();
            data[0].label = Label::Positive;
            data.push(ScoredExample { score: 0.3, label: Label::Negative });
            let roc = auc_roc(&data).unwrap();
            assert!((roc - roc_oracle(&data)).abs() < 1e-9);
            let pr = auc_pr(&data).unwrap();
            assert!((pr - pr_oracle(&data)).abs() < 1e-9);
        }
    }

    #[test]
    fn scores_file_round_trips() {
        let rows = vec![
            ("workedunder(leo,marty)".to_string(), 0.8125, Label::Positive),
            ("workedunder(ann,bob)".to_string(), 0.25, Label::Negative),
        ];
        let text = scores_to_string(&rows);
        let parsed = scores_from_str(&text).unwrap();
        assert_eq!(rows, parsed);
    }

    proptest! {
        #[test]
        fn permutation_invariance(scores in proptest::collection::vec((0u8..20, any::<bool>()), 2..40)) {
            let mut data = items(
                &scores.iter().map(|&(s, l)| (s as f64 / 20.0, l)).collect::<Vec<_>>(),
            );
            prop_assume!(data.iter().any(|e| e.label == Label::Positive));
            prop_assume!(data.iter().any(|e| e.label == Label::Negative));
            let roc = auc_roc(&data).unwrap();
            let pr = auc_pr(&data).unwrap();
            data.reverse();
            prop_assert!((auc_roc(&data).unwrap() - roc).abs() < 1e-12);
            prop_assert!((auc_pr(&data).unwrap() - pr).abs() < 1e-12);
        }

        #[test]
        fn monotone_transform_invariance(scores in proptest::collection::vec((0u8..20, any::<bool>()), 2..40)) {
            let data = items(
                &scores.iter().map(|&(s, l)| (s as f64 / 20.0, l)).collect::<Vec<_>>(),
            );
            prop_assume!(data.iter().any(|e| e.label == Label::Positive));
            prop_assume!(data.iter().any(|e| e.label == Label::Negative));
            let transformed: Vec<ScoredExample> = data
                .iter()
                .map(|e| ScoredExample { score: 0.25 + e.score.powi(3) * 2.0, label: e.label })
                .collect();
            prop_assert!((auc_roc(&data).unwrap() - auc_roc(&transformed).unwrap()).abs() < 1e-12);
            prop_assert!((auc_pr(&data).unwrap() - auc_pr(&transformed).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn label_flip_mirrors_roc(seed in any::<u64>()) {
            // Distinct scores (no ties): flipping labels mirrors the area.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(2..40usize);
            let data: Vec<ScoredExample> = (0..n)
                .map(|i| ScoredExample {
                    score: i as f64 + rng.random_range(0.0..0.5),
                    label: if rng.random_bool(0.5) { Label::Positive } else { Label::Negative },
                })
                .collect();
            prop_assume!(data.iter().any(|e| e.label == Label::Positive));
            prop_assume!(data.iter().any(|e| e.label == Label::Negative));
            let flipped: Vec<ScoredExample> = data
                .iter()
                .map(|e| ScoredExample {
                    score: e.score,
                    label: match e.label {
                        Label::Positive => Label::Negative,
                        Label::Negative => Label::Positive,
                    },
                })
                .collect();
            prop_assert!((auc_roc(&data).unwrap() + auc_roc(&flipped).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
