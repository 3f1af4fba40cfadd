//! Experiment CLI over the `relnn` library. One subcommand per pipeline
//! stage so stages stay independently scriptable and composable.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relnn::app::{
    run_eval, run_ground, run_pipeline, run_predict, run_synth, run_train, run_walks,
    ConfigOverrides, ExperimentConfig, PipelineError, PredictRequest,
};
use relnn::network::CombinerMode;
use relnn::synth::SyntheticSpec;

#[derive(Parser)]
#[command(
    name = "relnn",
    about = "Relational neural networks: random-walk rules, tied weights, AdaGrad-L1 training",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by `train` and `cv`; every flag overrides the config file.
#[derive(Args, Debug, Default)]
struct RunFlags {
    /// Flat key=value config file (a manifest from a previous run works).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Type declarations file.
    #[arg(long)]
    types: Option<PathBuf>,
    /// Evidence facts file.
    #[arg(long)]
    facts: Option<PathBuf>,
    /// Positive examples file.
    #[arg(long)]
    pos: Option<PathBuf>,
    /// Negative examples file (sampled at `--neg-ratio` when absent).
    #[arg(long)]
    neg: Option<PathBuf>,
    /// Fold assignment file (`fold,label,atom.` lines).
    #[arg(long)]
    folds: Option<PathBuf>,
    /// Target predicate name.
    #[arg(long)]
    target: Option<String>,
    /// Number of lifted random walks to generate.
    #[arg(long)]
    num_walks: Option<usize>,
    /// Maximum walk length.
    #[arg(long)]
    max_len: Option<usize>,
    /// Groundings sampled per walk per example (exhaustive when absent).
    #[arg(long)]
    samples_per_walk: Option<usize>,
    /// Combining rule: average, max or noisyor.
    #[arg(long)]
    combiner: Option<CombinerMode>,
    /// AdaGrad learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// L1 regularization strength.
    #[arg(long)]
    l1: Option<f64>,
    /// Training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Negatives per positive when sampling.
    #[arg(long)]
    neg_ratio: Option<usize>,
    /// Number of cross-validation folds.
    #[arg(long)]
    k: Option<usize>,
    /// Master seed; every random decision derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunFlags {
    fn resolve(&self) -> Result<ExperimentConfig, PipelineError> {
        let ov = ConfigOverrides {
            types: self.types.clone(),
            facts: self.facts.clone(),
            positives: self.pos.clone(),
            negatives: self.neg.clone(),
            folds: self.folds.clone(),
            out: self.out.clone(),
            target: self.target.clone(),
            num_walks: self.num_walks,
            max_len: self.max_len,
            samples_per_walk: self.samples_per_walk,
            combiner: self.combiner,
            learning_rate: self.lr,
            l1: self.l1,
            epochs: self.epochs,
            neg_ratio: self.neg_ratio,
            k: self.k,
            seed: self.seed,
        };
        ExperimentConfig::resolve(self.config.as_deref(), &ov)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate lifted random-walk rules from a schema.
    Walks {
        #[arg(long)]
        types: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 100)]
        num_walks: usize,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump groundings of every example for every walk in a walks file.
    Ground {
        #[command(flatten)]
        flags: RunFlags,
        /// Walks file to ground.
        #[arg(long)]
        walks: PathBuf,
    },
    /// Train one model on all examples.
    Train {
        #[command(flatten)]
        flags: RunFlags,
    },
    /// K-fold cross-validation; writes per-fold models, scores and the
    /// results summary.
    Cv {
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Score examples with a saved model.
    Predict {
        #[arg(long)]
        types: PathBuf,
        #[arg(long)]
        facts: PathBuf,
        #[arg(long)]
        pos: PathBuf,
        #[arg(long)]
        neg: Option<PathBuf>,
        #[arg(long)]
        target: String,
        /// Model file written by `train` or `cv`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        samples_per_walk: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute AUC-ROC and AUC-PR from a scores file.
    Eval {
        #[arg(long)]
        scores: PathBuf,
    },
    /// Generate a synthetic movie-style dataset with planted rules.
    Synth {
        #[arg(long, default_value_t = 20)]
        persons: usize,
        #[arg(long, default_value_t = 20)]
        movies: usize,
        #[arg(long, default_value_t = 10)]
        genres: usize,
        /// Probability a non-fired pair is still labeled positive.
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        /// Firing probability of the planted rules.
        #[arg(long, default_value_t = 0.9)]
        rule_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn render(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.4}"),
        None => "NA".to_string(),
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Walks { types, target, num_walks, max_len, seed, out } => {
            let (path, count) = run_walks(&types, &target, num_walks, max_len, seed, &out)?;
            println!("wrote {count} walks to {}", path.display());
            if count < num_walks {
                eprintln!("warning: only {count} of {num_walks} distinct walks were found");
            }
        }
        Command::Ground { flags, walks } => {
            let cfg = flags.resolve()?;
            let (path, count) = run_ground(&cfg, &walks)?;
            println!("wrote {count} groundings to {}", path.display());
        }
        Command::Train { flags } => {
            let cfg = flags.resolve()?;
            let (outcome, warnings) = run_train(&cfg)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            let last = outcome.log.last().expect("training log is never empty");
            println!(
                "trained {} steps (final loss {:.4}); artifacts in {}",
                last.step,
                last.loss,
                cfg.out.display()
            );
        }
        Command::Cv { flags } => {
            let cfg = flags.resolve()?;
            let outputs = run_pipeline(&cfg)?;
            for w in outputs.warnings {
                eprintln!("warning: {w}");
            }
            println!("fold  auc-roc  auc-pr   test(+/-)");
            for fold in &outputs.report.folds {
                println!(
                    "{:>4}  {:>7}  {:>7}  {}/{}",
                    fold.fold,
                    render(fold.auc_roc),
                    render(fold.auc_pr),
                    fold.n_test_pos,
                    fold.n_test_neg
                );
            }
            println!(
                "mean  {:>7}  {:>7}   (std {} / {})",
                render(outputs.report.mean_auc_roc),
                render(outputs.report.mean_auc_pr),
                render(outputs.report.std_auc_roc),
                render(outputs.report.std_auc_pr),
            );
            println!("results written to {}", outputs.results_path.display());
        }
        Command::Predict { types, facts, pos, neg, target, model, samples_per_walk, seed, out } => {
            let path = run_predict(&PredictRequest {
                types,
                facts,
                positives: pos,
                negatives: neg,
                target,
                model,
                seed,
                samples_per_walk,
                out,
            })?;
            println!("wrote scores to {}", path.display());
        }
        Command::Eval { scores } => {
            let (roc, pr, n) = run_eval(&scores)?;
            println!("examples: {n}");
            println!("auc-roc:  {}", render(roc));
            println!("auc-pr:   {}", render(pr));
        }
        Command::Synth { persons, movies, genres, noise, rule_prob, seed, out } => {
            let mut spec = SyntheticSpec::movie_default(seed);
            spec.types = vec![
                ("Person".to_string(), persons),
                ("Movie".to_string(), movies),
                ("Genre".to_string(), genres),
            ];
            spec.noise = noise;
            for rule in &mut spec.planted {
                rule.fire_prob = rule_prob;
            }
            let paths = run_synth(&spec, &out)?;
            println!(
                "wrote dataset to {} (ground-truth rules in {})",
                out.display(),
                paths.rules.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
