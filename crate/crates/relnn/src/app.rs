//! Experiment front-end: configuration, the end-to-end pipeline, and the
//! artifact files behind the `relnn` binary.
//!
//! A run is fully described by a flat key=value config (command-line
//! flags win over the file). The pipeline writes a `manifest.txt` echoing
//! the resolved config and all seeds; re-running `cv` from a manifest
//! reproduces every output byte-for-byte.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ground::{dump_line, ground_exhaustive, ground_sampled};
use crate::logic::{Label, TargetExample};
use crate::metrics::{auc_pr, auc_roc, scores_from_str, scores_to_string, MetricError, ScoredExample};
use crate::network::{model_from_str, model_to_string, CombinerMode, GroundingMode};
use crate::parse::{parse_dataset, parse_folds, DatasetError, DatasetPaths};
use crate::schema::{build_schema_graph, generate_walks, walks_from_str, walks_to_string, WalkError};
use crate::seeds;
use crate::synth::{generate_synthetic, write_synthetic, SynthError, SyntheticSpec};
use crate::train::{
    cross_validate, generate_negatives, score_examples, train, CvReport, TrainConfig, TrainError,
    TrainOutcome,
};

/// Pipeline stage, used to tag errors and pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Parse,
    Walks,
    Negatives,
    Folds,
    Train,
    Eval,
    Write,
}

impl Stage {
    pub fn tag(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Parse => "parse",
            Stage::Walks => "walks",
            Stage::Negatives => "negatives",
            Stage::Folds => "folds",
            Stage::Train => "train",
            Stage::Eval => "eval",
            Stage::Write => "write",
        }
    }
}

/// A stage-tagged pipeline failure.
#[derive(Debug, Error)]
#[error("error[{}]: {message}", stage.tag())]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, message: impl fmt::Display) -> PipelineError {
        PipelineError { stage, message: message.to_string() }
    }

    /// Process exit code: 2 for config errors, 3 for parse errors, 4 for
    /// anything at runtime.
    pub fn exit_code(&self) -> i32 {
        match self.stage {
            Stage::Config => 2,
            Stage::Parse => 3,
            _ => 4,
        }
    }
}

impl From<DatasetError> for PipelineError {
    fn from(e: DatasetError) -> PipelineError {
        let stage = match &e {
            DatasetError::Io { .. } => Stage::Config,
            _ => Stage::Parse,
        };
        PipelineError::new(stage, e)
    }
}

impl From<WalkError> for PipelineError {
    fn from(e: WalkError) -> PipelineError {
        PipelineError::new(Stage::Walks, e)
    }
}

impl From<TrainError> for PipelineError {
    fn from(e: TrainError) -> PipelineError {
        PipelineError::new(Stage::Train, e)
    }
}

impl From<SynthError> for PipelineError {
    fn from(e: SynthError) -> PipelineError {
        PipelineError::new(Stage::Config, e)
    }
}

fn write_err(e: std::io::Error, path: &Path) -> PipelineError {
    PipelineError::new(Stage::Write, format!("{}: {e}", path.display()))
}

/// Fully resolved experiment configuration. Defaults: learning rate 0.05,
/// batch size 1, one epoch, average combiner, 1:2 negatives, 5 folds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub types: PathBuf,
    pub facts: PathBuf,
    pub positives: PathBuf,
    pub negatives: Option<PathBuf>,
    pub folds: Option<PathBuf>,
    pub out: PathBuf,
    pub target: String,
    pub num_walks: usize,
    pub max_len: usize,
    pub samples_per_walk: Option<usize>,
    pub combiner: CombinerMode,
    pub learning_rate: f64,
    pub l1: f64,
    pub epochs: usize,
    pub neg_ratio: usize,
    pub k: usize,
    pub seed: u64,
}

/// Optional command-line overrides; any `Some` field wins over the config
/// file and the defaults.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub types: Option<PathBuf>,
    pub facts: Option<PathBuf>,
    pub positives: Option<PathBuf>,
    pub negatives: Option<PathBuf>,
    pub folds: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub target: Option<String>,
    pub num_walks: Option<usize>,
    pub max_len: Option<usize>,
    pub samples_per_walk: Option<usize>,
    pub combiner: Option<CombinerMode>,
    pub learning_rate: Option<f64>,
    pub l1: Option<f64>,
    pub epochs: Option<usize>,
    pub neg_ratio: Option<usize>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
}

fn config_err(message: impl fmt::Display) -> PipelineError {
    PipelineError::new(Stage::Config, message)
}

impl ExperimentConfig {
    /// Resolve a configuration from an optional flat key=value file plus
    /// command-line overrides. Flags win over file values.
    pub fn resolve(
        config_file: Option<&Path>,
        ov: &ConfigOverrides,
    ) -> Result<ExperimentConfig, PipelineError> {
        let mut kv: HashMap<String, String> = HashMap::new();
        if let Some(path) = config_file {
            let text = fs::read_to_string(path)
                .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            for (i, raw_line) in text.lines().enumerate() {
                let line = match raw_line.find('%') {
                    Some(at) => &raw_line[..at],
                    None => raw_line,
                };
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    config_err(format!("{} line {}: expected key=value", path.display(), i + 1))
                })?;
                kv.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        let known = [
            "types", "facts", "pos", "neg", "folds", "out", "target", "num-walks", "max-len",
            "samples-per-walk", "combiner", "lr", "l1", "epochs", "neg-ratio", "k", "seed",
        ];
        for key in kv.keys() {
            if !known.contains(&key.as_str()) {
                return Err(config_err(format!("unknown config key `{key}`")));
            }
        }

        fn parsed<T: std::str::FromStr>(
            kv: &HashMap<String, String>,
            key: &str,
        ) -> Result<Option<T>, PipelineError>
        where
            T::Err: fmt::Display,
        {
            match kv.get(key) {
                None => Ok(None),
                Some(raw) => raw
                    .parse::<T>()
                    .map(Some)
                    .map_err(|e| config_err(format!("config key `{key}`: {e}"))),
            }
        }

        let path_of = |key: &str| kv.get(key).map(PathBuf::from);
        let required = |what: &str, value: Option<PathBuf>| {
            value.ok_or_else(|| config_err(format!("missing required `{what}`")))
        };

        let cfg = ExperimentConfig {
            types: required("types", ov.types.clone().or_else(|| path_of("types")))?,
            facts: required("facts", ov.facts.clone().or_else(|| path_of("facts")))?,
            positives: required("pos", ov.positives.clone().or_else(|| path_of("pos")))?,
            negatives: ov.negatives.clone().or_else(|| path_of("neg")),
            folds: ov.folds.clone().or_else(|| path_of("folds")),
            out: required("out", ov.out.clone().or_else(|| path_of("out")))?,
            target: ov
                .target
                .clone()
                .or_else(|| kv.get("target").cloned())
                .ok_or_else(|| config_err("missing required `target`"))?,
            num_walks: ov.num_walks.or(parsed(&kv, "num-walks")?).unwrap_or(100),
            max_len: ov.max_len.or(parsed(&kv, "max-len")?).unwrap_or(6),
            samples_per_walk: ov.samples_per_walk.or(parsed(&kv, "samples-per-walk")?),
            combiner: ov
                .combiner
                .or(kv
                    .get("combiner")
                    .map(|s| s.parse().map_err(config_err))
                    .transpose()?)
                .unwrap_or(CombinerMode::Average),
            learning_rate: ov.learning_rate.or(parsed(&kv, "lr")?).unwrap_or(0.05),
            l1: ov.l1.or(parsed(&kv, "l1")?).unwrap_or(1e-4),
            epochs: ov.epochs.or(parsed(&kv, "epochs")?).unwrap_or(1),
            neg_ratio: ov.neg_ratio.or(parsed(&kv, "neg-ratio")?).unwrap_or(2),
            k: ov.k.or(parsed(&kv, "k")?).unwrap_or(5),
            seed: ov.seed.or(parsed(&kv, "seed")?).unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        for (what, path) in [
            ("types", Some(&self.types)),
            ("facts", Some(&self.facts)),
            ("pos", Some(&self.positives)),
            ("neg", self.negatives.as_ref()),
            ("folds", self.folds.as_ref()),
        ] {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(config_err(format!(
                        "{what} file `{}` does not exist",
                        path.display()
                    )));
                }
            }
        }
        if self.num_walks < 1 {
            return Err(config_err("num-walks must be at least 1"));
        }
        if self.max_len < 1 {
            return Err(config_err("max-len must be at least 1"));
        }
        if self.samples_per_walk == Some(0) {
            return Err(config_err("samples-per-walk must be at least 1"));
        }
        if self.learning_rate <= 0.0 {
            return Err(config_err("lr must be positive"));
        }
        if self.epochs < 1 {
            return Err(config_err("epochs must be at least 1"));
        }
        if self.neg_ratio < 1 {
            return Err(config_err("neg-ratio must be at least 1"));
        }
        if self.k < 2 {
            return Err(config_err("k must be at least 2"));
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            combiner: self.combiner,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            l1: self.l1,
            seed: self.seed,
            neg_ratio: self.neg_ratio,
            grounding_budget: self.samples_per_walk,
        }
    }

    /// Render the resolved configuration as a manifest: a config file that
    /// reproduces this run exactly, with derived seeds echoed as comments.
    pub fn to_manifest_string(&self) -> String {
        let mut out = String::from("% relnn run manifest: re-run with `relnn cv --config <this file>`\n");
        let mut push = |key: &str, value: String| {
            out.push_str(key);
            out.push('=');
            out.push_str(&value);
            out.push('\n');
        };
        push("types", self.types.display().to_string());
        push("facts", self.facts.display().to_string());
        push("pos", self.positives.display().to_string());
        if let Some(neg) = &self.negatives {
            push("neg", neg.display().to_string());
        }
        if let Some(folds) = &self.folds {
            push("folds", folds.display().to_string());
        }
        push("out", self.out.display().to_string());
        push("target", self.target.clone());
        push("num-walks", self.num_walks.to_string());
        push("max-len", self.max_len.to_string());
        if let Some(s) = self.samples_per_walk {
            push("samples-per-walk", s.to_string());
        }
        push("combiner", self.combiner.to_string());
        push("lr", format!("{:?}", self.learning_rate));
        push("l1", format!("{:?}", self.l1));
        push("epochs", self.epochs.to_string());
        push("neg-ratio", self.neg_ratio.to_string());
        push("k", self.k.to_string());
        push("seed", self.seed.to_string());
        out.push_str(&format!(
            "% derived seeds: walks={} negatives={} folds={}\n",
            seeds::derive(self.seed, seeds::STREAM_WALKS),
            seeds::derive(self.seed, seeds::STREAM_NEGATIVES),
            seeds::derive(self.seed, seeds::STREAM_FOLDS),
        ));
        out
    }
}

fn dataset_paths(cfg: &ExperimentConfig) -> DatasetPaths {
    DatasetPaths {
        types: cfg.types.clone(),
        facts: cfg.facts.clone(),
        positives: cfg.positives.clone(),
        negatives: cfg.negatives.clone(),
    }
}

/// Split positives from negatives as parsed.
fn split_examples(examples: &[TargetExample]) -> (Vec<TargetExample>, Vec<TargetExample>) {
    examples.iter().partition(|e| e.label == Label::Positive)
}

struct Prepared {
    store: crate::logic::FactStore,
    walks: Vec<crate::schema::LiftedWalk>,
    examples: Vec<TargetExample>,
    generated_negatives: bool,
    warnings: Vec<String>,
}

/// Shared front half of `train` and `cv`: parse, generate walks, and
/// complete the example set with sampled negatives if none were supplied.
fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, PipelineError> {
    let (store, examples) = parse_dataset(&dataset_paths(cfg), &cfg.target)?;
    let target = store
        .schema()
        .pred_id(&cfg.target)
        .expect("parse_dataset validates the target");

    let mut warnings = Vec::new();
    let graph = build_schema_graph(store.schema());
    let walks = generate_walks(
        &graph,
        store.schema(),
        target,
        cfg.num_walks,
        cfg.max_len,
        1000 * cfg.num_walks,
        seeds::derive(cfg.seed, seeds::STREAM_WALKS),
    )?;
    if walks.len() < cfg.num_walks {
        warnings.push(format!(
            "requested {} walks but only {} distinct walks were found",
            cfg.num_walks,
            walks.len()
        ));
    }
    if walks.is_empty() {
        return Err(PipelineError::new(Stage::Walks, "no admissible walks were generated"));
    }

    let (positives, mut negatives) = split_examples(&examples);
    if positives.is_empty() {
        return Err(PipelineError::new(Stage::Parse, "the positives file contains no examples"));
    }
    let mut generated_negatives = false;
    if negatives.is_empty() {
        negatives = generate_negatives(
            &store,
            target,
            &positives,
            cfg.neg_ratio,
            seeds::derive(cfg.seed, seeds::STREAM_NEGATIVES),
        );
        generated_negatives = true;
        let requested = cfg.neg_ratio * positives.len();
        if negatives.len() < requested {
            warnings.push(format!(
                "negative candidate pool exhausted: generated {} of {requested}",
                negatives.len()
            ));
        }
        if negatives.is_empty() {
            return Err(PipelineError::new(Stage::Negatives, "no negative examples available"));
        }
    }
    let mut all = positives;
    all.extend(negatives);
    Ok(Prepared { store, walks, examples: all, generated_negatives, warnings })
}

fn write_prepared(prep: &Prepared, out: &Path) -> Result<(), PipelineError> {
    let walks_path = out.join("walks.txt");
    fs::write(&walks_path, walks_to_string(&prep.walks, prep.store.schema()))
        .map_err(|e| write_err(e, &walks_path))?;
    if prep.generated_negatives {
        let neg_path = out.join("negatives_generated.txt");
        let negatives: Vec<TargetExample> = prep
            .examples
            .iter()
            .filter(|e| e.label == Label::Negative)
            .copied()
            .collect();
        fs::write(&neg_path, crate::parse::serialize_examples(&prep.store, &negatives))
            .map_err(|e| write_err(e, &neg_path))?;
    }
    Ok(())
}

fn render_float(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:?}"),
        None => "NA".to_string(),
    }
}

/// Render the per-fold and aggregate metrics table.
pub fn results_to_string(report: &CvReport) -> String {
    let mut out = String::from("% fold,auc_roc,auc_pr,n_test_pos,n_test_neg\n");
    for fold in &report.folds {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fold.fold,
            render_float(fold.auc_roc),
            render_float(fold.auc_pr),
            fold.n_test_pos,
            fold.n_test_neg
        ));
    }
    out.push_str(&format!(
        "mean,{},{},,\n",
        render_float(report.mean_auc_roc),
        render_float(report.mean_auc_pr)
    ));
    out.push_str(&format!(
        "std,{},{},,\n",
        render_float(report.std_auc_roc),
        render_float(report.std_auc_pr)
    ));
    out
}

/// Outputs of a full cross-validation run.
#[derive(Debug)]
pub struct PipelineOutputs {
    pub report: CvReport,
    pub results_path: PathBuf,
    pub manifest_path: PathBuf,
    pub warnings: Vec<String>,
}

/// The `cv` pipeline: parse, generate walks (and negatives if absent),
/// cross-validate, and write all artifacts (walks file, per-fold models
/// and scores, results summary, manifest).
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutputs, PipelineError> {
    cfg.validate()?;
    let prep = prepare(cfg)?;

    // Optional fold override from a folds file.
    let assignment: Option<Vec<usize>> = match &cfg.folds {
        None => None,
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| PipelineError::new(Stage::Folds, format!("{}: {e}", path.display())))?;
            let lines = parse_folds(&text)
                .map_err(|e| PipelineError::new(Stage::Folds, format!("{}: {e}", path.display())))?;
            let schema = prep.store.schema();
            let target = schema.pred_id(&cfg.target).expect("validated");
            let decl = schema.decl(target);
            let mut by_key = HashMap::new();
            for line in &lines {
                if line.atom.name != cfg.target || line.atom.args.len() != 2 {
                    return Err(PipelineError::new(
                        Stage::Folds,
                        format!(
                            "{} line {}: expected a binary `{}` atom",
                            path.display(),
                            line.atom.line,
                            cfg.target
                        ),
                    ));
                }
                let a = prep.store.lookup_const(decl.arg1, &line.atom.args[0]);
                let b = prep.store.lookup_const(decl.arg2, &line.atom.args[1]);
                if let (Some(a), Some(b)) = (a, b) {
                    by_key.insert((line.label, a, b), line.fold);
                }
            }
            let mut assignment = Vec::with_capacity(prep.examples.len());
            for ex in &prep.examples {
                let fold = by_key.get(&(ex.label, ex.arg1, ex.arg2)).ok_or_else(|| {
                    PipelineError::new(
                        Stage::Folds,
                        format!(
                            "folds file does not cover example {}",
                            prep.store.render_example(ex)
                        ),
                    )
                })?;
                assignment.push(*fold);
            }
            Some(assignment)
        }
    };

    fs::create_dir_all(&cfg.out).map_err(|e| write_err(e, &cfg.out))?;
    write_prepared(&prep, &cfg.out)?;

    let report = cross_validate(
        &prep.store,
        &prep.walks,
        &prep.examples,
        cfg.k,
        &cfg.train_config(),
        assignment.as_deref(),
    )?;

    for fold in &report.folds {
        let model_path = cfg.out.join(format!("model_fold_{}.txt", fold.fold));
        fs::write(
            &model_path,
            model_to_string(&prep.walks, &fold.params, cfg.combiner, prep.store.schema()),
        )
        .map_err(|e| write_err(e, &model_path))?;
        let scores_path = cfg.out.join(format!("scores_fold_{}.csv", fold.fold));
        let rows: Vec<(String, f64, Label)> = fold
            .scores
            .iter()
            .map(|(ex, score)| (prep.store.render_example(ex), *score, ex.label))
            .collect();
        fs::write(&scores_path, scores_to_string(&rows)).map_err(|e| write_err(e, &scores_path))?;
    }

    let results_path = cfg.out.join("results.csv");
    fs::write(&results_path, results_to_string(&report)).map_err(|e| write_err(e, &results_path))?;
    let manifest_path = cfg.out.join("manifest.txt");
    fs::write(&manifest_path, cfg.to_manifest_string()).map_err(|e| write_err(e, &manifest_path))?;

    Ok(PipelineOutputs { report, results_path, manifest_path, warnings: prep.warnings })
}

/// The `train` subcommand: one model over all examples, plus the training
/// log.
pub fn run_train(cfg: &ExperimentConfig) -> Result<(TrainOutcome, Vec<String>), PipelineError> {
    cfg.validate()?;
    let prep = prepare(cfg)?;
    fs::create_dir_all(&cfg.out).map_err(|e| write_err(e, &cfg.out))?;
    write_prepared(&prep, &cfg.out)?;

    let outcome = train(&prep.store, &prep.walks, &prep.examples, &cfg.train_config())?;
    let model_path = cfg.out.join("model.txt");
    fs::write(
        &model_path,
        model_to_string(&prep.walks, &outcome.params, cfg.combiner, prep.store.schema()),
    )
    .map_err(|e| write_err(e, &model_path))?;

    let log_path = cfg.out.join("train_log.csv");
    let mut log = String::from("% step,example,loss,score\n");
    for step in &outcome.log {
        log.push_str(&format!(
            "{},{},{:?},{:?}\n",
            step.step, step.example, step.loss, step.score
        ));
    }
    fs::write(&log_path, log).map_err(|e| write_err(e, &log_path))?;
    let manifest_path = cfg.out.join("manifest.txt");
    fs::write(&manifest_path, cfg.to_manifest_string()).map_err(|e| write_err(e, &manifest_path))?;
    Ok((outcome, prep.warnings))
}

/// The `walks` subcommand: generate walks from a types file alone.
pub fn run_walks(
    types: &Path,
    target: &str,
    num_walks: usize,
    max_len: usize,
    seed: u64,
    out: &Path,
) -> Result<(PathBuf, usize), PipelineError> {
    let text = fs::read_to_string(types).map_err(|e| config_err(format!("{}: {e}", types.display())))?;
    let decls = crate::parse::parse_decls(&text)
        .map_err(|e| PipelineError::new(Stage::Parse, format!("{}: {e}", types.display())))?;
    let store = crate::logic::build_store(
        &crate::logic::RawDataset { decls, facts: vec![] },
        &[],
    )
    .map_err(|e| PipelineError::new(Stage::Parse, e))?;
    let schema = store.schema();
    let target_id = schema
        .pred_id(target)
        .ok_or_else(|| config_err(format!("target `{target}` is not declared")))?;
    let graph = build_schema_graph(schema);
    let walks =
        generate_walks(&graph, schema, target_id, num_walks, max_len, 1000 * num_walks, seed)?;
    fs::create_dir_all(out).map_err(|e| write_err(e, out))?;
    let path = out.join("walks.txt");
    fs::write(&path, walks_to_string(&walks, schema)).map_err(|e| write_err(e, &path))?;
    Ok((path, walks.len()))
}

/// The `ground` subcommand: dump groundings of every example for every
/// walk in a walks file, one line per grounding.
pub fn run_ground(
    cfg: &ExperimentConfig,
    walks_file: &Path,
) -> Result<(PathBuf, usize), PipelineError> {
    let (store, examples) = parse_dataset(&dataset_paths(cfg), &cfg.target)?;
    let text = fs::read_to_string(walks_file)
        .map_err(|e| config_err(format!("{}: {e}", walks_file.display())))?;
    let walks = walks_from_str(&text, store.schema())?;
    fs::create_dir_all(&cfg.out).map_err(|e| write_err(e, &cfg.out))?;
    let path = cfg.out.join("groundings.txt");
    let ground_seed = seeds::derive(cfg.seed, seeds::STREAM_GROUNDING);
    let mut out = String::new();
    let mut count = 0;
    for ex in &examples {
        for walk in &walks {
            let set = match cfg.samples_per_walk {
                None => ground_exhaustive(walk, ex, &store),
                Some(budget) => ground_sampled(
                    walk,
                    ex,
                    &store,
                    budget,
                    seeds::chain(
                        seeds::chain(seeds::chain(ground_seed, ex.arg1.0 as u64), ex.arg2.0 as u64),
                        walk.rule_id as u64,
                    ),
                ),
            };
            for g in &set.groundings {
                out.push_str(&dump_line(g, ex, &store));
                out.push('\n');
                count += 1;
            }
        }
    }
    fs::write(&path, out).map_err(|e| write_err(e, &path))?;
    Ok((path, count))
}

/// Inputs of the `predict` subcommand.
#[derive(Debug, Clone)]
pub struct PredictRequest {
    pub types: PathBuf,
    pub facts: PathBuf,
    pub positives: PathBuf,
    pub negatives: Option<PathBuf>,
    pub target: String,
    pub model: PathBuf,
    pub seed: u64,
    pub samples_per_walk: Option<usize>,
    pub out: PathBuf,
}

/// The `predict` subcommand: score examples with a saved model.
pub fn run_predict(req: &PredictRequest) -> Result<PathBuf, PipelineError> {
    let paths = DatasetPaths {
        types: req.types.clone(),
        facts: req.facts.clone(),
        positives: req.positives.clone(),
        negatives: req.negatives.clone(),
    };
    let (store, examples) = parse_dataset(&paths, &req.target)?;
    let text = fs::read_to_string(&req.model)
        .map_err(|e| config_err(format!("{}: {e}", req.model.display())))?;
    let (walks, params, combiner) = model_from_str(&text, store.schema())
        .map_err(|e| PipelineError::new(Stage::Parse, e))?;
    let mode = match req.samples_per_walk {
        None => GroundingMode::Exhaustive,
        Some(budget) => GroundingMode::Sampled { budget },
    };
    let scores = score_examples(
        &store,
        &walks,
        &params,
        combiner,
        &examples,
        mode,
        seeds::derive(req.seed, seeds::STREAM_GROUNDING),
    )?;
    fs::create_dir_all(&req.out).map_err(|e| write_err(e, &req.out))?;
    let path = req.out.join("scores.csv");
    let rows: Vec<(String, f64, Label)> = scores
        .iter()
        .map(|(ex, score)| (store.render_example(ex), *score, ex.label))
        .collect();
    fs::write(&path, scores_to_string(&rows)).map_err(|e| write_err(e, &path))?;
    Ok(path)
}

/// The `eval` subcommand: compute AUCs from a scores file.
pub fn run_eval(scores: &Path) -> Result<(Option<f64>, Option<f64>, usize), PipelineError> {
    let text = fs::read_to_string(scores)
        .map_err(|e| config_err(format!("{}: {e}", scores.display())))?;
    let rows = scores_from_str(&text).map_err(|e| PipelineError::new(Stage::Parse, e))?;
    let items: Vec<ScoredExample> = rows
        .iter()
        .map(|(_, score, label)| ScoredExample { score: *score, label: *label })
        .collect();
    let roc = match auc_roc(&items) {
        Ok(v) => Some(v),
        Err(MetricError::SingleClass { .. }) => None,
        Err(e) => return Err(PipelineError::new(Stage::Eval, e)),
    };
    let pr = match auc_pr(&items) {
        Ok(v) => Some(v),
        Err(MetricError::NoPositives) => None,
        Err(e) => return Err(PipelineError::new(Stage::Eval, e)),
    };
    Ok((roc, pr, items.len()))
}

/// The `synth` subcommand: write a synthetic planted-rule dataset.
pub fn run_synth(spec: &SyntheticSpec, out: &Path) -> Result<crate::synth::SyntheticPaths, PipelineError> {
    let ds = generate_synthetic(spec)?;
    let paths = write_synthetic(&ds, out).map_err(|e| write_err(e, out))?;
    Ok(paths)
}
