//! Train on a synthetic dataset with planted rules and watch the score
//! separation appear.
//!
//! ```bash
//! cargo run -p relnn --example train_synthetic
//! ```

use relnn::logic::Label;
use relnn::synth::{generate_synthetic, SyntheticSpec};
use relnn::train::{generate_negatives, score_examples, train, TrainConfig};
use relnn::{build_schema_graph, generate_walks};

fn main() {
    let spec = SyntheticSpec::movie_default(7);
    let ds = generate_synthetic(&spec).unwrap();
    println!(
        "synthetic dataset: {} facts, {} positives, planted rules:",
        ds.store.len(),
        ds.positives.len()
    );
    for rule in &ds.rules {
        println!("  {}", rule.display(ds.store.schema()));
    }

    let target = ds.store.schema().pred_id("workedunder").unwrap();
    let graph = build_schema_graph(ds.store.schema());
    let walks = generate_walks(&graph, ds.store.schema(), target, 20, 6, 20_000, 11).unwrap();
    println!("\ngenerated {} candidate walk rules", walks.len());

    let negatives = generate_negatives(&ds.store, target, &ds.positives, 2, 13);
    let mut examples = ds.positives.clone();
    examples.extend(negatives);
    println!(
        "training on {} examples ({} positive, 1:2 ratio)",
        examples.len(),
        ds.positives.len()
    );

    let cfg = TrainConfig { seed: 17, ..TrainConfig::default() };
    let outcome = train(&ds.store, &walks, &examples, &cfg).unwrap();
    let first_losses: Vec<f64> = outcome.log.iter().take(3).map(|s| s.loss).collect();
    let last_losses: Vec<f64> = outcome.log.iter().rev().take(3).map(|s| s.loss).collect();
    println!("first losses: {first_losses:.3?}");
    println!("last losses:  {last_losses:.3?}");

    // Mean score by label after one epoch.
    let scored = score_examples(
        &ds.store,
        &walks,
        &outcome.params,
        cfg.combiner,
        &examples,
        cfg.grounding_mode(),
        0,
    )
    .unwrap();
    let mean = |label: Label| {
        let (sum, n) = scored
            .iter()
            .filter(|(ex, _)| ex.label == label)
            .fold((0.0, 0usize), |(s, n), (_, score)| (s + score, n + 1));
        sum / n as f64
    };
    println!("\nmean score of positives: {:.3}", mean(Label::Positive));
    println!("mean score of negatives: {:.3}", mean(Label::Negative));

    // Sparsity from the L1 term.
    let zeros = outcome.params.w.iter().filter(|&&w| w == 0.0).count();
    println!("exactly-zero rule weights: {zeros} / {}", outcome.params.w.len());
}
