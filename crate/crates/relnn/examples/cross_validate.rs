//! Run the full experiment pipeline: synthesize a dataset, then 5-fold
//! cross-validation with generated negatives, reporting AUC-ROC/AUC-PR.
//!
//! ```bash
//! cargo run -p relnn --example cross_validate
//! ```

use relnn::app::{run_pipeline, run_synth, ExperimentConfig};
use relnn::network::CombinerMode;
use relnn::synth::SyntheticSpec;

fn main() {
    let dir = std::env::temp_dir().join("relnn_cv_example");
    let data_dir = dir.join("data");
    let out_dir = dir.join("out");

    // Deterministic planted rules and low noise give a crisp signal.
    let mut spec = SyntheticSpec::movie_default(3);
    spec.noise = 0.02;
    for rule in &mut spec.planted {
        rule.fire_prob = 1.0;
    }
    let paths = run_synth(&spec, &data_dir).unwrap();
    println!("dataset written to {}", data_dir.display());

    let cfg = ExperimentConfig {
        types: paths.types,
        facts: paths.facts,
        positives: paths.positives,
        negatives: None,
        folds: None,
        out: out_dir.clone(),
        target: "workedunder".to_string(),
        num_walks: 40,
        max_len: 6,
        samples_per_walk: None,
        combiner: CombinerMode::Average,
        learning_rate: 0.05,
        l1: 1e-4,
        epochs: 1,
        neg_ratio: 2,
        k: 5,
        seed: 42,
    };
    let outputs = run_pipeline(&cfg).unwrap();

    println!("\nfold  auc-roc  auc-pr");
    for fold in &outputs.report.folds {
        println!(
            "{:>4}  {:>7.4}  {:>7.4}",
            fold.fold,
            fold.auc_roc.unwrap_or(f64::NAN),
            fold.auc_pr.unwrap_or(f64::NAN)
        );
    }
    println!(
        "mean  {:>7.4}  {:>7.4}",
        outputs.report.mean_auc_roc.unwrap_or(f64::NAN),
        outputs.report.mean_auc_pr.unwrap_or(f64::NAN)
    );
    println!(
        "\nartifacts (walks, per-fold models and scores, manifest) in {}",
        out_dir.display()
    );
    println!("re-run exactly with: relnn cv --config {}", outputs.manifest_path.display());
}
