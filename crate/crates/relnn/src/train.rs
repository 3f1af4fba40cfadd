//! Loss, exact backpropagation through tied parameters, L1-regularized
//! AdaGrad, negative sampling, and the training / cross-validation loops.
//!
//! Parameter tying makes one scalar `w_j` the weight of every fact edge
//! feeding rule `j`'s groundings, so its gradient accumulates one
//! contribution per grounding. Updates are per-example (batch size 1);
//! the default schedule is learning rate 0.05, a single epoch, and a 1:2
//! positive-to-negative ratio.

#![allow(clippy::needless_range_loop)]

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ground::GroundingCache;
use crate::logic::{Atom, FactStore, Label, PredId, PredRef, TargetExample};
use crate::metrics::{auc_pr, auc_roc, ScoredExample};
use crate::network::{
    forward, instantiate_with_cache, one_hot, CombinerMode, ForwardTrace, GroundNetwork,
    GroundingMode, ModelParams, NetworkError, NUM_CLASSES,
};
use crate::schema::LiftedWalk;
use crate::seeds;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("cannot train with an empty walk list")]
    NoWalks,
    #[error("cannot train with an empty example list")]
    NoExamples,
    #[error(transparent)]
    Forward(#[from] NetworkError),
    #[error("non-finite gradient at step {step}")]
    NonFiniteGradient { step: usize },
    #[error("cannot split {examples} examples into {k} folds")]
    BadFolds { examples: usize, k: usize },
    #[error("fold assignment length {len} does not match {examples} examples")]
    FoldLength { len: usize, examples: usize },
}

/// Gradients with the same shapes as [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub dw: Vec<f64>,
    pub du: Vec<Vec<f64>>,
    pub db: Vec<f64>,
}

impl Gradients {
    pub fn zeros(num_rules: usize, num_classes: usize) -> Gradients {
        Gradients {
            dw: vec![0.0; num_rules],
            du: vec![vec![0.0; num_classes]; num_rules],
            db: vec![0.0; num_classes],
        }
    }

    pub fn all_finite(&self) -> bool {
        self.dw.iter().all(|x| x.is_finite())
            && self.du.iter().flatten().all(|x| x.is_finite())
            && self.db.iter().all(|x| x.is_finite())
    }
}

/// Categorical cross-entropy against a one-hot label, with probabilities
/// floored at 1e-12 before the log.
pub fn loss(trace: &ForwardTrace, label: Label) -> f64 {
    let y = one_hot(label);
    -trace
        .probs
        .iter()
        .zip(y.iter())
        .map(|(p, y)| y * p.max(1e-12).ln())
        .sum::<f64>()
}

/// Backpropagation. Recomputes the forward trace, then applies the chain
/// rule through softmax, the combiner, and the tied fact edges.
pub fn backward(
    net: &GroundNetwork,
    params: &ModelParams,
    mode: CombinerMode,
    label: Label,
) -> Result<Gradients, TrainError> {
    let trace = forward(net, params, mode)?;
    Ok(backward_from_trace(net, &trace, params, mode, label))
}

pub(crate) fn backward_from_trace(
    net: &GroundNetwork,
    trace: &ForwardTrace,
    params: &ModelParams,
    mode: CombinerMode,
    label: Label,
) -> Gradients {
    let num_rules = net.num_rules();
    let num_classes = params.num_classes();
    let y = one_hot(label);
    let mut grads = Gradients::zeros(num_rules, num_classes);

    // Softmax + cross-entropy: d loss / d logit_c = p_c - y_c.
    for c in 0..num_classes {
        grads.db[c] = trace.probs[c] - y[c];
    }
    // d loss / d c_j flows through every output unit.
    let mut dc = vec![0.0; num_rules];
    for j in 0..num_rules {
        for c in 0..num_classes {
            grads.du[j][c] = grads.db[c] * trace.rule_acts[j];
            dc[j] += grads.db[c] * params.u[j][c];
        }
    }

    for j in 0..num_rules {
        let acts = &trace.ground_acts[j];
        let n = acts.len();
        if n == 0 {
            continue;
        }
        // Share dc_j across groundings according to the combiner.
        let da: Vec<f64> = match mode {
            CombinerMode::Average => vec![dc[j] / n as f64; n],
            CombinerMode::Max => {
                let mut argmax = 0;
                for (i, a) in acts.iter().enumerate() {
                    if *a > acts[argmax] {
                        argmax = i;
                    }
                }
                let mut da = vec![0.0; n];
                da[argmax] = dc[j];
                da
            }
            CombinerMode::NoisyOr => {
                // d(1 - prod(1-a_i)) / d a_i = prod_{i' != i} (1 - a_i'),
                // via prefix/suffix products.
                let mut prefix = vec![1.0; n + 1];
                for i in 0..n {
                    prefix[i + 1] = prefix[i] * (1.0 - acts[i]);
                }
                let mut suffix = vec![1.0; n + 1];
                for i in (0..n).rev() {
                    suffix[i] = suffix[i + 1] * (1.0 - acts[i]);
                }
                (0..n).map(|i| dc[j] * prefix[i] * suffix[i + 1]).collect()
            }
        };
        // Tied weight: sum the per-grounding chain-rule contributions.
        let len_j = net.body_lens[j] as f64;
        let mut dw_j = 0.0;
        for (i, &a) in acts.iter().enumerate() {
            let gprime = match mode {
                CombinerMode::Average | CombinerMode::Max => 1.0 - a * a,
                CombinerMode::NoisyOr => a * (1.0 - a),
            };
            dw_j += da[i] * gprime * len_j;
        }
        grads.dw[j] = dw_j;
    }
    grads
}

/// Per-parameter AdaGrad accumulators plus the step hyperparameters.
#[derive(Debug, Clone)]
pub struct AdaGradState {
    pub learning_rate: f64,
    pub l1: f64,
    pub epsilon: f64,
    g_w: Vec<f64>,
    g_u: Vec<Vec<f64>>,
    g_b: Vec<f64>,
}

impl AdaGradState {
    pub fn new(num_rules: usize, num_classes: usize, learning_rate: f64, l1: f64) -> AdaGradState {
        AdaGradState {
            learning_rate,
            l1,
            epsilon: 1e-8,
            g_w: vec![0.0; num_rules],
            g_u: vec![vec![0.0; num_classes]; num_rules],
            g_b: vec![0.0; num_classes],
        }
    }

    pub fn accumulators_w(&self) -> &[f64] {
        &self.g_w
    }
}

fn adagrad_update(param: &mut f64, g: f64, acc: &mut f64, lr: f64, l1: f64, eps: f64) {
    *acc += g * g;
    if g == 0.0 {
        // No gradient, no step: untouched parameters keep their value and
        // are not shrunk toward zero.
        return;
    }
    let scale = lr / (*acc + eps).sqrt();
    let stepped = *param - scale * g;
    // Composite-objective soft threshold for the L1 term.
    *param = stepped.signum() * (stepped.abs() - l1 * scale).max(0.0);
}

/// One L1-regularized AdaGrad step: accumulate squared gradients, take a
/// scaled step, then soft-threshold. `l1 = 0` reduces to plain AdaGrad.
pub fn adagrad_l1_step(params: &mut ModelParams, grads: &Gradients, state: &mut AdaGradState) {
    let (lr, l1, eps) = (state.learning_rate, state.l1, state.epsilon);
    for (j, g) in grads.dw.iter().enumerate() {
        adagrad_update(&mut params.w[j], *g, &mut state.g_w[j], lr, l1, eps);
    }
    for (j, row) in grads.du.iter().enumerate() {
        for (c, g) in row.iter().enumerate() {
            adagrad_update(&mut params.u[j][c], *g, &mut state.g_u[j][c], lr, l1, eps);
        }
    }
    for (c, g) in grads.db.iter().enumerate() {
        adagrad_update(&mut params.b[c], *g, &mut state.g_b[c], lr, l1, eps);
    }
}

/// Sample negative examples `target(a, b')` under the closed-world
/// assumption: type-correct, absent from evidence, not a positive, not
/// duplicated. Corrupts the second argument of each positive in turn
/// until `ratio * positives.len()` negatives exist or the candidate pool
/// is exhausted (in which case fewer are returned).
pub fn generate_negatives(
    store: &FactStore,
    target: PredId,
    positives: &[TargetExample],
    ratio: usize,
    seed: u64,
) -> Vec<TargetExample> {
    let decl = store.schema().decl(target);
    let pool = store.constants_of_type(decl.arg2);
    let requested = ratio.saturating_mul(positives.len());
    let mut out = Vec::new();
    if pool.is_empty() || requested == 0 {
        return out;
    }
    let target_ref = PredRef::forward(target);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used: HashSet<(crate::logic::ConstId, crate::logic::ConstId)> =
        positives.iter().map(|p| (p.arg1, p.arg2)).collect();

    loop {
        let before = out.len();
        for p in positives {
            if out.len() >= requested {
                break;
            }
            let valid = |used: &HashSet<_>, b| {
                !used.contains(&(p.arg1, b)) && !store.contains(&Atom::new(target_ref, p.arg1, b))
            };
            let mut found = None;
            for _ in 0..30 {
                let b = pool[rng.random_range(0..pool.len())];
                if valid(&used, b) {
                    found = Some(b);
                    break;
                }
            }
            if found.is_none() {
                // Dense row: sweep deterministically from a random offset.
                let start = rng.random_range(0..pool.len());
                for i in 0..pool.len() {
                    let b = pool[(start + i) % pool.len()];
                    if valid(&used, b) {
                        found = Some(b);
                        break;
                    }
                }
            }
            if let Some(b) = found {
                used.insert((p.arg1, b));
                out.push(TargetExample {
                    target,
                    arg1: p.arg1,
                    arg2: b,
                    label: Label::Negative,
                });
            }
        }
        if out.len() >= requested || out.len() == before {
            break;
        }
    }
    debug_assert!(out
        .iter()
        .all(|n| !store.contains(&Atom::new(target_ref, n.arg1, n.arg2))));
    out
}

/// Training hyperparameters. Defaults: average combiner, learning rate
/// 0.05, a single epoch of per-example updates, L1 strength 1e-4, and a
/// 1:2 negative ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub combiner: CombinerMode,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l1: f64,
    pub seed: u64,
    pub neg_ratio: usize,
    /// Groundings sampled per walk per example; `None` grounds
    /// exhaustively.
    pub grounding_budget: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            combiner: CombinerMode::Average,
            learning_rate: 0.05,
            epochs: 1,
            l1: 1e-4,
            seed: 0,
            neg_ratio: 2,
            grounding_budget: None,
        }
    }
}

impl TrainConfig {
    pub fn grounding_mode(&self) -> GroundingMode {
        match self.grounding_budget {
            Some(budget) => GroundingMode::Sampled { budget },
            None => GroundingMode::Exhaustive,
        }
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainStep {
    pub step: usize,
    pub example: String,
    pub loss: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub log: Vec<TrainStep>,
}

fn example_seed(ground_seed: u64, ex: &TargetExample) -> u64 {
    seeds::chain(seeds::chain(ground_seed, ex.arg1.0 as u64), ex.arg2.0 as u64)
}

/// Train tied rule weights and output weights by per-example passes over
/// a seeded shuffle of the examples: instantiate, forward, backward, one
/// AdaGrad-L1 step. Weights start uniform in (-0.1, 0.1), biases at zero,
/// all seeded, so identical inputs yield bitwise-identical parameters.
pub fn train(
    store: &FactStore,
    walks: &[LiftedWalk],
    examples: &[TargetExample],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    if walks.is_empty() {
        return Err(TrainError::NoWalks);
    }
    if examples.is_empty() {
        return Err(TrainError::NoExamples);
    }
    let mut params = ModelParams::init(
        walks.len(),
        NUM_CLASSES,
        seeds::derive(cfg.seed, seeds::STREAM_INIT),
    );
    let mut state = AdaGradState::new(walks.len(), NUM_CLASSES, cfg.learning_rate, cfg.l1);
    let mut shuffle_rng =
        ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, seeds::STREAM_SHUFFLE));
    let ground_seed = seeds::derive(cfg.seed, seeds::STREAM_GROUNDING);
    let mode = cfg.grounding_mode();
    let mut cache = GroundingCache::new();
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut log = Vec::with_capacity(examples.len() * cfg.epochs.max(1));
    let mut step = 0;

    for _ in 0..cfg.epochs.max(1) {
        order.shuffle(&mut shuffle_rng);
        for &i in &order {
            let ex = &examples[i];
            let net =
                instantiate_with_cache(walks, ex, store, mode, example_seed(ground_seed, ex), &mut cache);
            let trace = forward(&net, &params, cfg.combiner)?;
            let grads = backward_from_trace(&net, &trace, &params, cfg.combiner, ex.label);
            step += 1;
            if !grads.all_finite() {
                return Err(TrainError::NonFiniteGradient { step });
            }
            log.push(TrainStep {
                step,
                example: store.render_example(ex),
                loss: loss(&trace, ex.label),
                score: trace.score(),
            });
            adagrad_l1_step(&mut params, &grads, &mut state);
        }
    }
    Ok(TrainOutcome { params, log })
}

/// Score examples with a trained model. Grounding results are memoized
/// per `(walk, example)` pair.
pub fn score_examples(
    store: &FactStore,
    walks: &[LiftedWalk],
    params: &ModelParams,
    combiner: CombinerMode,
    examples: &[TargetExample],
    mode: GroundingMode,
    ground_seed: u64,
) -> Result<Vec<(TargetExample, f64)>, TrainError> {
    let mut cache = GroundingCache::new();
    let mut out = Vec::with_capacity(examples.len());
    for ex in examples {
        let net =
            instantiate_with_cache(walks, ex, store, mode, example_seed(ground_seed, ex), &mut cache);
        let trace = forward(&net, params, combiner)?;
        out.push((*ex, trace.score()));
    }
    Ok(out)
}

/// Stratified fold assignment: positives and negatives are shuffled
/// separately (seeded) and dealt round-robin. Membership depends only on
/// example identity and the seed, never on input order.
pub fn fold_assignment(examples: &[TargetExample], k: usize, seed: u64) -> Vec<usize> {
    assert!(k >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..examples.len()).collect();
    idx.sort_by_key(|&i| (examples[i].label, examples[i].arg1, examples[i].arg2));
    let (mut neg, mut pos): (Vec<usize>, Vec<usize>) =
        idx.into_iter().partition(|&i| examples[i].label == Label::Negative);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut out = vec![0; examples.len()];
    for (slot, &i) in pos.iter().enumerate() {
        out[i] = slot % k;
    }
    for (slot, &i) in neg.iter().enumerate() {
        out[i] = slot % k;
    }
    out
}

/// Metrics for one held-out fold. `None` marks a metric that is undefined
/// on this fold (a single-class test set has no ROC; a fold without
/// positives has no PR curve).
#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub auc_roc: Option<f64>,
    pub auc_pr: Option<f64>,
    pub n_test_pos: usize,
    pub n_test_neg: usize,
    pub scores: Vec<(TargetExample, f64)>,
    /// Parameters trained on the other folds.
    pub params: ModelParams,
}

/// Cross-validation report: per-fold metrics plus mean and sample
/// standard deviation over the folds where each metric is defined.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub mean_auc_roc: Option<f64>,
    pub std_auc_roc: Option<f64>,
    pub mean_auc_pr: Option<f64>,
    pub std_auc_pr: Option<f64>,
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mean, std))
}

/// Seeded stratified k-fold cross-validation: train on k-1 folds, score
/// the held-out fold, report per-fold and aggregate AUCs. A precomputed
/// `assignment` (e.g. from a folds file) overrides the seeded split.
pub fn cross_validate(
    store: &FactStore,
    walks: &[LiftedWalk],
    examples: &[TargetExample],
    k: usize,
    cfg: &TrainConfig,
    assignment: Option<&[usize]>,
) -> Result<CvReport, TrainError> {
    if k < 2 || k > examples.len() {
        return Err(TrainError::BadFolds { examples: examples.len(), k });
    }
    let assignment: Vec<usize> = match assignment {
        Some(a) => {
            if a.len() != examples.len() {
                return Err(TrainError::FoldLength { len: a.len(), examples: examples.len() });
            }
            a.to_vec()
        }
        None => fold_assignment(examples, k, seeds::derive(cfg.seed, seeds::STREAM_FOLDS)),
    };
    let mut covered = vec![false; k];
    for &a in &assignment {
        if a >= k {
            return Err(TrainError::BadFolds { examples: examples.len(), k });
        }
        covered[a] = true;
    }
    if covered.iter().any(|c| !c) {
        return Err(TrainError::BadFolds { examples: examples.len(), k });
    }

    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let train_set: Vec<TargetExample> = examples
            .iter()
            .zip(&assignment)
            .filter(|(_, &a)| a != fold)
            .map(|(e, _)| *e)
            .collect();
        let test_set: Vec<TargetExample> = examples
            .iter()
            .zip(&assignment)
            .filter(|(_, &a)| a == fold)
            .map(|(e, _)| *e)
            .collect();
        let fold_cfg = TrainConfig {
            seed: seeds::derive(cfg.seed, seeds::STREAM_FOLD_TRAIN + fold as u64),
            ..cfg.clone()
        };
        let outcome = train(store, walks, &train_set, &fold_cfg)?;
        let scores = score_examples(
            store,
            walks,
            &outcome.params,
            cfg.combiner,
            &test_set,
            cfg.grounding_mode(),
            seeds::derive(fold_cfg.seed, seeds::STREAM_GROUNDING),
        )?;
        let scored: Vec<ScoredExample> = scores
            .iter()
            .map(|(ex, score)| ScoredExample { score: *score, label: ex.label })
            .collect();
        folds.push(FoldResult {
            fold,
            auc_roc: auc_roc(&scored).ok(),
            auc_pr: auc_pr(&scored).ok(),
            n_test_pos: test_set.iter().filter(|e| e.label == Label::Positive).count(),
            n_test_neg: test_set.iter().filter(|e| e.label == Label::Negative).count(),
            scores,
            params: outcome.params,
        });
    }

    let rocs: Vec<f64> = folds.iter().filter_map(|f| f.auc_roc).collect();
    let prs: Vec<f64> = folds.iter().filter_map(|f| f.auc_pr).collect();
    let (mean_auc_roc, std_auc_roc) = match mean_std(&rocs) {
        Some((m, s)) => (Some(m), Some(s)),
        None => (None, None),
    };
    let (mean_auc_pr, std_auc_pr) = match mean_std(&prs) {
        Some((m, s)) => (Some(m), Some(s)),
        None => (None, None),
    };
    Ok(CvReport { folds, mean_auc_roc, std_auc_roc, mean_auc_pr, std_auc_pr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{Grounding, GroundingSet};
    use crate::logic::{leo_marty_store, ConstId, Schema};
    use crate::schema::walks_from_str;

    /// Build a synthetic unrolled network directly; forward and backward
    /// only read grounding counts and body lengths.
    pub fn synthetic_network(counts: &[usize], body_lens: &[usize]) -> GroundNetwork {
        assert_eq!(counts.len(), body_lens.len());
        let per_rule = counts
            .iter()
            .enumerate()
            .map(|(j, &n)| GroundingSet {
                walk_id: j + 1,
                groundings: (0..n)
                    .map(|_| Grounding { walk_id: j + 1, bindings: vec![] })
                    .collect(),
                truncated: false,
            })
            .collect();
        GroundNetwork {
            example: TargetExample {
                target: PredId(0),
                arg1: ConstId(0),
                arg2: ConstId(0),
                label: Label::Positive,
            },
            per_rule,
            body_lens: body_lens.to_vec(),
        }
    }

    fn random_params(num_rules: usize, rng: &mut ChaCha8Rng) -> ModelParams {
        let sample = |rng: &mut ChaCha8Rng| rng.random_range(-0.5..0.5);
        ModelParams {
            w: (0..num_rules).map(|_| sample(rng)).collect(),
            u: (0..num_rules)
                .map(|_| (0..NUM_CLASSES).map(|_| sample(rng)).collect())
                .collect(),
            b: (0..NUM_CLASSES).map(|_| sample(rng)).collect(),
        }
    }

    fn fd_gradients(
        net: &GroundNetwork,
        params: &ModelParams,
        mode: CombinerMode,
        label: Label,
        h: f64,
    ) -> Gradients {
        let loss_at = |p: &ModelParams| loss(&forward(net, p, mode).unwrap(), label);
        let mut grads = Gradients::zeros(params.num_rules(), params.num_classes());
        for j in 0..params.num_rules() {
            let mut plus = params.clone();
            plus.w[j] += h;
            let mut minus = params.clone();
            minus.w[j] -= h;
            grads.dw[j] = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
            for c in 0..params.num_classes() {
                let mut plus = params.clone();
                plus.u[j][c] += h;
                let mut minus = params.clone();
                minus.u[j][c] -= h;
                grads.du[j][c] = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
            }
        }
        for c in 0..params.num_classes() {
            let mut plus = params.clone();
            plus.b[c] += h;
            let mut minus = params.clone();
            minus.b[c] -= h;
            grads.db[c] = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
        }
        grads
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
    }

    #[test]
    fn loss_values() {
        let trace = ForwardTrace {
            ground_acts: vec![],
            rule_acts: vec![],
            logits: vec![0.0, 0.0],
            probs: vec![1.0, 0.0],
        };
        assert!(loss(&trace, Label::Negative).abs() < 1e-12);
        let trace = ForwardTrace {
            ground_acts: vec![],
            rule_acts: vec![],
            logits: vec![0.0, 0.0],
            probs: vec![0.5, 0.5],
        };
        assert!((loss(&trace, Label::Positive) - (2.0f64).ln()).abs() < 1e-12);
        assert!((loss(&trace, Label::Negative) - (2.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn no_groundings_leave_only_bias_gradients() {
        let net = synthetic_network(&[0, 0, 0], &[2, 1, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = random_params(3, &mut rng);
        let grads = backward(&net, &params, CombinerMode::Average, Label::Positive).unwrap();
        assert!(grads.dw.iter().all(|&g| g == 0.0));
        assert!(grads.du.iter().flatten().all(|&g| g == 0.0));
        let trace = forward(&net, &params, CombinerMode::Average).unwrap();
        assert!((grads.db[0] - trace.probs[0]).abs() < 1e-12);
        assert!((grads.db[1] - (trace.probs[1] - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn single_grounding_gradient_matches_hand_derivation() {
        // One rule, one grounding, body length 2:
        //   a = tanh(2w), z_c = u_c a + b_c, p = softmax(z),
        //   dL/dw = (sum_c (p_c - y_c) u_c) * (1 - a^2) * 2.
        let net = synthetic_network(&[1], &[2]);
        let params = ModelParams {
            w: vec![0.2],
            u: vec![vec![0.7, -0.3]],
            b: vec![0.05, -0.05],
        };
        let a = (0.4f64).tanh();
        let z = [0.7 * a + 0.05, -0.3 * a - 0.05];
        let exps = [z[0].exp(), z[1].exp()];
        let sum = exps[0] + exps[1];
        let p = [exps[0] / sum, exps[1] / sum];
        let y = [0.0, 1.0];
        let dz = [p[0] - y[0], p[1] - y[1]];
        let dc = dz[0] * 0.7 + dz[1] * (-0.3);
        let expected_dw = dc * (1.0 - a * a) * 2.0;

        let grads = backward(&net, &params, CombinerMode::Average, Label::Positive).unwrap();
        assert!((grads.dw[0] - expected_dw).abs() < 1e-12, "{} vs {expected_dw}", grads.dw[0]);
        assert!((grads.du[0][0] - dz[0] * a).abs() < 1e-12);
        assert!((grads.du[0][1] - dz[1] * a).abs() < 1e-12);
        assert!((grads.db[0] - dz[0]).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..30 {
            let num_rules = rng.random_range(1..=5);
            let counts: Vec<usize> = (0..num_rules).map(|_| rng.random_range(0..=4)).collect();
            let body_lens: Vec<usize> = (0..num_rules).map(|_| rng.random_range(1..=4)).collect();
            let net = synthetic_network(&counts, &body_lens);
            let params = random_params(num_rules, &mut rng);
            let label = if rng.random_bool(0.5) { Label::Positive } else { Label::Negative };
            for mode in CombinerMode::ALL {
                let analytic = backward(&net, &params, mode, label).unwrap();
                let fd = fd_gradients(&net, &params, mode, label, 1e-5);
                for (a, f) in analytic
                    .dw
                    .iter()
                    .chain(analytic.du.iter().flatten())
                    .chain(analytic.db.iter())
                    .zip(fd.dw.iter().chain(fd.du.iter().flatten()).chain(fd.db.iter()))
                {
                    assert!(
                        rel_err(*a, *f) < 1e-4,
                        "trial {trial} mode {mode}: analytic {a} vs fd {f}"
                    );
                }
            }
        }
    }

    #[test]
    fn tied_gradient_decomposes_over_groundings() {
        // dw_j equals the sum of single-grounding contributions evaluated
        // at the full network's forward state.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let num_rules = rng.random_range(1..=4);
            let counts: Vec<usize> = (0..num_rules).map(|_| rng.random_range(0..=4)).collect();
            let body_lens: Vec<usize> = (0..num_rules).map(|_| rng.random_range(1..=4)).collect();
            let net = synthetic_network(&counts, &body_lens);
            let params = random_params(num_rules, &mut rng);
            for mode in CombinerMode::ALL {
                let trace = forward(&net, &params, mode).unwrap();
                let grads =
                    backward_from_trace(&net, &trace, &params, mode, Label::Positive);
                let mut dc = vec![0.0; num_rules];
                let y = one_hot(Label::Positive);
                for j in 0..num_rules {
                    for c in 0..NUM_CLASSES {
                        dc[j] += (trace.probs[c] - y[c]) * params.u[j][c];
                    }
                }
                for j in 0..num_rules {
                    let acts = &trace.ground_acts[j];
                    let n = acts.len();
                    let mut sum = 0.0;
                    for i in 0..n {
                        // Independent per-grounding share of the combiner
                        // derivative, one grounding at a time.
                        let share = match mode {
                            CombinerMode::Average => dc[j] / n as f64,
                            CombinerMode::Max => {
                                if i == 0 {
                                    dc[j]
                                } else {
                                    0.0
                                }
                            }
                            CombinerMode::NoisyOr => {
                                let others: f64 = (0..n)
                                    .filter(|&i2| i2 != i)
                                    .map(|i2| 1.0 - acts[i2])
                                    .product();
                                dc[j] * others
                            }
                        };
                        let gprime = match mode {
                            CombinerMode::Average | CombinerMode::Max => 1.0 - acts[i] * acts[i],
                            CombinerMode::NoisyOr => acts[i] * (1.0 - acts[i]),
                        };
                        sum += share * gprime * net.body_lens[j] as f64;
                    }
                    assert!((sum - grads.dw[j]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn adagrad_first_step_magnitude() {
        let mut params = ModelParams::zeros(1, NUM_CLASSES);
        let mut state = AdaGradState::new(1, NUM_CLASSES, 0.05, 0.0);
        let mut grads = Gradients::zeros(1, NUM_CLASSES);
        grads.dw[0] = 1.0;
        adagrad_l1_step(&mut params, &grads, &mut state);
        assert!((params.w[0] + 0.05).abs() < 1e-9, "{}", params.w[0]);
    }

    #[test]
    fn zero_gradient_changes_nothing() {
        let mut params = ModelParams::init(2, NUM_CLASSES, 5);
        let before = params.clone();
        let mut state = AdaGradState::new(2, NUM_CLASSES, 0.05, 1.0);
        let grads = Gradients::zeros(2, NUM_CLASSES);
        adagrad_l1_step(&mut params, &grads, &mut state);
        assert_eq!(params, before);
        assert!(state.accumulators_w().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn strong_l1_produces_exact_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut params = ModelParams::init(4, NUM_CLASSES, 2);
        let mut state = AdaGradState::new(4, NUM_CLASSES, 0.05, 1.0);
        for _ in 0..100 {
            let mut grads = Gradients::zeros(4, NUM_CLASSES);
            for g in grads.dw.iter_mut() {
                *g = rng.random_range(-0.01..0.01);
            }
            adagrad_l1_step(&mut params, &grads, &mut state);
        }
        assert!(params.w.contains(&0.0), "{:?}", params.w);
    }

    #[test]
    fn accumulators_never_decrease() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut params = ModelParams::init(2, NUM_CLASSES, 0);
        let mut state = AdaGradState::new(2, NUM_CLASSES, 0.05, 0.1);
        let mut last = state.accumulators_w().to_vec();
        for _ in 0..50 {
            let mut grads = Gradients::zeros(2, NUM_CLASSES);
            for g in grads.dw.iter_mut() {
                *g = rng.random_range(-1.0..1.0);
            }
            adagrad_l1_step(&mut params, &grads, &mut state);
            for (now, before) in state.accumulators_w().iter().zip(&last) {
                assert!(now >= before);
            }
            last = state.accumulators_w().to_vec();
        }
    }

    #[test]
    fn one_step_reduces_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let net = synthetic_network(&[2, 1], &[2, 3]);
            let mut params = random_params(2, &mut rng);
            let mode = CombinerMode::Average;
            let label = Label::Positive;
            let before = loss(&forward(&net, &params, mode).unwrap(), label);
            let grads = backward(&net, &params, mode, label).unwrap();
            let mut state = AdaGradState::new(2, NUM_CLASSES, 0.01, 0.0);
            adagrad_l1_step(&mut params, &grads, &mut state);
            let after = loss(&forward(&net, &params, mode).unwrap(), label);
            assert!(after < before, "{after} !< {before}");
        }
    }

    #[test]
    fn negatives_are_absent_typed_and_deterministic() {
        let store = leo_marty_store();
        let schema = store.schema();
        let target = schema.pred_id("workedunder").unwrap();
        let person = schema.type_id("Person").unwrap();
        let leo = store.lookup_const(person, "leo").unwrap();
        let marty = store.lookup_const(person, "marty").unwrap();
        let positives = vec![TargetExample {
            target,
            arg1: leo,
            arg2: marty,
            label: Label::Positive,
        }];
        let negs = generate_negatives(&store, target, &positives, 2, 9);
        assert_eq!(negs.len(), 2);
        let negs2 = generate_negatives(&store, target, &positives, 2, 9);
        assert_eq!(negs, negs2);
        let target_ref = PredRef::forward(target);
        for n in &negs {
            assert_eq!(n.label, Label::Negative);
            assert_eq!(n.arg1, leo);
            assert!(!store.contains(&Atom::new(target_ref, n.arg1, n.arg2)));
            assert_ne!((n.arg1, n.arg2), (leo, marty));
        }
        let mut pairs: Vec<_> = negs.iter().map(|n| (n.arg1, n.arg2)).collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), negs.len());
    }

    #[test]
    fn table_scale_negative_counts() {
        // 90 positives at ratio 2 yield exactly 180 negatives when the
        // candidate pool allows it.
        let mut schema = Schema::new();
        schema.declare("advisedby", "Person", "Person").unwrap();
        let mut store = FactStore::new(schema);
        let person = store.schema().type_id("Person").unwrap();
        let people: Vec<ConstId> =
            (0..40).map(|i| store.intern_const(person, &format!("p{i:02}"))).collect();
        let target = store.schema().pred_id("advisedby").unwrap();
        let positives: Vec<TargetExample> = (0..90)
            .map(|i| TargetExample {
                target,
                arg1: people[i % 40],
                arg2: people[(i * 7 + 3) % 40],
                label: Label::Positive,
            })
            .collect();
        let negatives = generate_negatives(&store, target, &positives, 2, 77);
        assert_eq!(negatives.len(), 180);
        let mut pairs: Vec<_> = negatives.iter().map(|n| (n.arg1, n.arg2)).collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), 180);
    }

    #[test]
    fn single_class_fold_metrics_are_reported_as_undefined() {
        let (store, walks, _) = movie_training_setup();
        let schema = store.schema();
        let person = schema.type_id("Person").unwrap();
        let target = schema.pred_id("workedunder").unwrap();
        let people: Vec<_> = store.constants_of_type(person).to_vec();
        // One positive among four examples: with 2 folds, one test fold
        // has no positives, so its PR (and ROC) are undefined.
        let mut examples = vec![
            TargetExample { target, arg1: people[0], arg2: people[1], label: Label::Positive },
            TargetExample { target, arg1: people[0], arg2: people[2], label: Label::Negative },
            TargetExample { target, arg1: people[1], arg2: people[0], label: Label::Negative },
            TargetExample { target, arg1: people[1], arg2: people[2], label: Label::Negative },
        ];
        examples.sort();
        let report =
            cross_validate(&store, &walks, &examples, 2, &TrainConfig::default(), None).unwrap();
        let undefined: Vec<&FoldResult> =
            report.folds.iter().filter(|f| f.auc_roc.is_none()).collect();
        assert_eq!(undefined.len(), 1);
        assert!(undefined[0].auc_pr.is_none());
        assert_eq!(undefined[0].n_test_pos, 0);
        // The defined fold still aggregates.
        assert!(report.mean_auc_roc.is_some());
    }

    #[test]
    fn exhausted_pool_returns_fewer() {
        // Only 3 Person constants exist; one positive head can take at
        // most 2 distinct corruptions besides the positive itself.
        let store = leo_marty_store();
        let schema = store.schema();
        let target = schema.pred_id("workedunder").unwrap();
        let person = schema.type_id("Person").unwrap();
        let leo = store.lookup_const(person, "leo").unwrap();
        let marty = store.lookup_const(person, "marty").unwrap();
        let positives = vec![TargetExample {
            target,
            arg1: leo,
            arg2: marty,
            label: Label::Positive,
        }];
        let negs = generate_negatives(&store, target, &positives, 10, 1);
        assert_eq!(negs.len(), 2);
    }

    fn movie_training_setup() -> (FactStore, Vec<LiftedWalk>, Vec<TargetExample>) {
        let store = leo_marty_store();
        let walks = walks_from_str(
            "1: actedin ; directed^-1\n2: sameperson ; actedin ; directed^-1\n",
            store.schema(),
        )
        .unwrap();
        let schema = store.schema();
        let person = schema.type_id("Person").unwrap();
        let target = schema.pred_id("workedunder").unwrap();
        let leo = store.lookup_const(person, "leo").unwrap();
        let marty = store.lookup_const(person, "marty").unwrap();
        let positives = vec![TargetExample {
            target,
            arg1: leo,
            arg2: marty,
            label: Label::Positive,
        }];
        let mut examples = positives.clone();
        examples.extend(generate_negatives(&store, target, &positives, 2, 21));
        (store, walks, examples)
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let (store, walks, examples) = movie_training_setup();
        let cfg = TrainConfig { seed: 33, ..TrainConfig::default() };
        let a = train(&store, &walks, &examples, &cfg).unwrap();
        let b = train(&store, &walks, &examples, &cfg).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.log, b.log);
        assert_eq!(a.log.len(), examples.len());
    }

    #[test]
    fn training_raises_the_positive_score() {
        let (store, walks, examples) = movie_training_setup();
        let positive = examples[0];
        let cfg = TrainConfig { epochs: 3, ..TrainConfig::default() };
        let init_params = ModelParams::init(
            walks.len(),
            NUM_CLASSES,
            seeds::derive(cfg.seed, seeds::STREAM_INIT),
        );
        let before = score_examples(
            &store,
            &walks,
            &init_params,
            cfg.combiner,
            &[positive],
            GroundingMode::Exhaustive,
            0,
        )
        .unwrap()[0]
            .1;
        let outcome = train(&store, &walks, &examples, &cfg).unwrap();
        let after = score_examples(
            &store,
            &walks,
            &outcome.params,
            cfg.combiner,
            &[positive],
            GroundingMode::Exhaustive,
            0,
        )
        .unwrap()[0]
            .1;
        assert!(after > before, "{after} !> {before}");
    }

    #[test]
    fn fold_assignment_partitions_and_stratifies() {
        let mut examples = Vec::new();
        for i in 0..20 {
            examples.push(TargetExample {
                target: PredId(0),
                arg1: ConstId(i),
                arg2: ConstId(100 + i),
                label: Label::Positive,
            });
        }
        for i in 0..80 {
            examples.push(TargetExample {
                target: PredId(0),
                arg1: ConstId(200 + i),
                arg2: ConstId(300 + i),
                label: Label::Negative,
            });
        }
        let folds = fold_assignment(&examples, 5, 42);
        assert_eq!(folds.len(), 100);
        for f in 0..5 {
            let members: Vec<usize> =
                (0..100).filter(|&i| folds[i] == f).collect();
            assert_eq!(members.len(), 20);
            let pos = members.iter().filter(|&&i| examples[i].label == Label::Positive).count();
            assert_eq!(pos, 4);
        }
    }

    #[test]
    fn fold_membership_ignores_input_order() {
        let mut examples = Vec::new();
        for i in 0..30 {
            examples.push(TargetExample {
                target: PredId(0),
                arg1: ConstId(i),
                arg2: ConstId(100 + i),
                label: if i % 3 == 0 { Label::Positive } else { Label::Negative },
            });
        }
        let folds = fold_assignment(&examples, 5, 7);
        let mut shuffled = examples.clone();
        shuffled.reverse();
        let folds_shuffled = fold_assignment(&shuffled, 5, 7);
        for (i, ex) in examples.iter().enumerate() {
            let j = shuffled.iter().position(|e| e == ex).unwrap();
            assert_eq!(folds[i], folds_shuffled[j]);
        }
    }

    #[test]
    fn cross_validation_reports_all_folds_and_the_mean() {
        let (store, walks, _) = movie_training_setup();
        let schema = store.schema();
        let person = schema.type_id("Person").unwrap();
        let target = schema.pred_id("workedunder").unwrap();
        let people: Vec<_> = store.constants_of_type(person).to_vec();
        // All ordered pairs of the three people, two labeled positive.
        let mut examples = Vec::new();
        for &a in &people {
            for &b in &people {
                if a != b {
                    examples.push(TargetExample { target, arg1: a, arg2: b, label: Label::Negative });
                }
            }
        }
        examples[0].label = Label::Positive;
        examples[3].label = Label::Positive;
        let cfg = TrainConfig::default();
        let report = cross_validate(&store, &walks, &examples, 2, &cfg, None).unwrap();
        assert_eq!(report.folds.len(), 2);
        let total: usize = report.folds.iter().map(|f| f.scores.len()).sum();
        assert_eq!(total, examples.len());
        for fold in &report.folds {
            assert_eq!(fold.n_test_pos, 1);
            assert_eq!(fold.n_test_neg, 2);
            assert!(fold.auc_roc.is_some());
        }
        let rocs: Vec<f64> = report.folds.iter().filter_map(|f| f.auc_roc).collect();
        let mean = report.mean_auc_roc.unwrap();
        let expect = rocs.iter().sum::<f64>() / rocs.len() as f64;
        assert!((mean - expect).abs() < 1e-12);
    }

    #[test]
    fn bad_fold_counts_error() {
        let (store, walks, examples) = movie_training_setup();
        let cfg = TrainConfig::default();
        assert!(matches!(
            cross_validate(&store, &walks, &examples, 1, &cfg, None),
            Err(TrainError::BadFolds { .. })
        ));
        assert!(matches!(
            cross_validate(&store, &walks, &examples, 99, &cfg, None),
            Err(TrainError::BadFolds { .. })
        ));
    }
}
