//! Compute AUC-ROC and AUC-PR from a list of scored examples, and round
//! trip them through the scores-file format used by `relnn eval`.
//!
//! ```bash
//! cargo run -p relnn --example evaluate_scores
//! ```

use relnn::logic::Label;
use relnn::metrics::{auc_pr, auc_roc, scores_from_str, scores_to_string, ScoredExample};

fn main() {
    // A skewed ranking: 3 positives among 9 examples, one tie pair.
    let rows: Vec<(String, f64, Label)> = vec![
        ("workedunder(p1,p9)".into(), 0.92, Label::Positive),
        ("workedunder(p2,p9)".into(), 0.81, Label::Positive),
        ("workedunder(p3,p8)".into(), 0.55, Label::Negative),
        ("workedunder(p4,p8)".into(), 0.55, Label::Positive),
        ("workedunder(p5,p7)".into(), 0.40, Label::Negative),
        ("workedunder(p1,p7)".into(), 0.33, Label::Negative),
        ("workedunder(p2,p6)".into(), 0.21, Label::Negative),
        ("workedunder(p3,p6)".into(), 0.10, Label::Negative),
        ("workedunder(p4,p5)".into(), 0.07, Label::Negative),
    ];
    let items: Vec<ScoredExample> = rows
        .iter()
        .map(|(_, score, label)| ScoredExample { score: *score, label: *label })
        .collect();

    println!("{} examples, {} positive", items.len(), 3);
    println!("auc-roc: {:.4}", auc_roc(&items).unwrap());
    println!("auc-pr:  {:.4}", auc_pr(&items).unwrap());

    // The same numbers via the scores-file format.
    let text = scores_to_string(&rows);
    println!("\nscores file:\n{text}");
    let reloaded = scores_from_str(&text).unwrap();
    let reloaded_items: Vec<ScoredExample> = reloaded
        .iter()
        .map(|(_, score, label)| ScoredExample { score: *score, label: *label })
        .collect();
    assert_eq!(auc_roc(&items), auc_roc(&reloaded_items));
    println!("round trip preserves the metrics exactly");
}
