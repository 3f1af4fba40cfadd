//! Per-example network unrolling and the forward pass.
//!
//! The unrolled network has four layers. Fact neurons (the example's true
//! chain atoms) feed ground-rule neurons, one per grounding, through
//! edges that share the rule's tied weight `w_j`; a ground neuron is an
//! AND gate, so only fully-true groundings are instantiated and each
//! contributes pre-activation `w_j * len_j`. A combining-rule neuron per
//! rule aggregates its grounding activations (average, max or noisy-or),
//! and the output layer is a softmax over `z_c = sum_j u_jc * c_j + b_c`.
//!
//! Because the edge weight is shared, all ground activations of one rule
//! are equal; the per-grounding structure still matters to the noisy-or
//! combiner and to gradient accumulation during training.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ground::{ground_exhaustive, ground_sampled, GroundingCache, GroundingSet};
use crate::logic::{FactStore, Schema, TargetExample};
use crate::schema::{walks_from_str, walks_to_string, LiftedWalk, WalkError};
use crate::seeds;

/// Number of output classes for the binary target.
pub const NUM_CLASSES: usize = 2;
/// Output class index of the positive label.
pub const POSITIVE_CLASS: usize = 1;

/// Aggregator used by the combining-rules layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinerMode {
    Average,
    Max,
    NoisyOr,
}

impl CombinerMode {
    pub const ALL: [CombinerMode; 3] = [CombinerMode::Average, CombinerMode::Max, CombinerMode::NoisyOr];

    pub fn as_str(self) -> &'static str {
        match self {
            CombinerMode::Average => "average",
            CombinerMode::Max => "max",
            CombinerMode::NoisyOr => "noisyor",
        }
    }
}

impl fmt::Display for CombinerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CombinerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "average" | "avg" => Ok(CombinerMode::Average),
            "max" => Ok(CombinerMode::Max),
            "noisyor" | "noisy-or" | "or" => Ok(CombinerMode::NoisyOr),
            other => Err(format!("unknown combiner `{other}` (expected average, max or noisyor)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("parameter dimensions ({params}) do not match the network's {rules} rules")]
    DimensionMismatch { params: usize, rules: usize },
    #[error("non-finite activation in rule {rule}")]
    NonFinite { rule: usize },
    #[error("non-finite output logits (parameter overflow)")]
    NonFiniteLogits,
    #[error("noisy-or input {value} outside [0,1]")]
    CombinerInput { value: f64 },
}

/// The trainable parameters: one tied weight per rule, a rule-by-class
/// output weight matrix, and per-class biases.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Tied rule weights `w[j]`, shared by every grounding of rule `j`.
    pub w: Vec<f64>,
    /// Output weights `u[j][c]`.
    pub u: Vec<Vec<f64>>,
    /// Output biases `b[c]`.
    pub b: Vec<f64>,
}

impl ModelParams {
    /// Seeded initialization: `w` and `u` uniform in (-0.1, 0.1), biases 0.
    pub fn init(num_rules: usize, num_classes: usize, seed: u64) -> ModelParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = |rng: &mut ChaCha8Rng| rng.random_range(-0.1..0.1);
        let w = (0..num_rules).map(|_| sample(&mut rng)).collect();
        let u = (0..num_rules)
            .map(|_| (0..num_classes).map(|_| sample(&mut rng)).collect())
            .collect();
        ModelParams { w, u, b: vec![0.0; num_classes] }
    }

    pub fn zeros(num_rules: usize, num_classes: usize) -> ModelParams {
        ModelParams {
            w: vec![0.0; num_rules],
            u: vec![vec![0.0; num_classes]; num_rules],
            b: vec![0.0; num_classes],
        }
    }

    pub fn num_rules(&self) -> usize {
        self.w.len()
    }

    pub fn num_classes(&self) -> usize {
        self.b.len()
    }

    pub fn all_finite(&self) -> bool {
        self.w.iter().all(|x| x.is_finite())
            && self.u.iter().flatten().all(|x| x.is_finite())
            && self.b.iter().all(|x| x.is_finite())
    }
}

/// How to ground walks when unrolling a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundingMode {
    Exhaustive,
    Sampled { budget: usize },
}

/// The unrolled network for one example: a grounding set per rule plus
/// the rule body lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundNetwork {
    pub example: TargetExample,
    pub per_rule: Vec<GroundingSet>,
    pub body_lens: Vec<usize>,
}

impl GroundNetwork {
    pub fn num_rules(&self) -> usize {
        self.per_rule.len()
    }

    /// Number of grounding (AND) neurons.
    pub fn num_groundings(&self) -> usize {
        self.per_rule.iter().map(GroundingSet::len).sum()
    }

    /// Number of fact neurons: each unique evidence atom appearing in any
    /// grounding is represented once.
    pub fn fact_node_count(&self, walks: &[LiftedWalk]) -> usize {
        let mut atoms = std::collections::BTreeSet::new();
        for (set, walk) in self.per_rule.iter().zip(walks) {
            for g in &set.groundings {
                for atom in g.atoms(walk) {
                    atoms.insert(atom.canonical());
                }
            }
        }
        atoms.len()
    }
}

/// Unroll the network for one example by grounding every walk.
pub fn instantiate(
    walks: &[LiftedWalk],
    ex: &TargetExample,
    store: &FactStore,
    mode: GroundingMode,
    seed: u64,
) -> GroundNetwork {
    let mut cache = GroundingCache::new();
    instantiate_with_cache(walks, ex, store, mode, seed, &mut cache)
}

/// [`instantiate`] with grounding results memoized across calls, keyed by
/// `(walk, a, b)`. The seed must be derived from the same master for all
/// calls sharing a cache, so cached and fresh results coincide.
pub fn instantiate_with_cache(
    walks: &[LiftedWalk],
    ex: &TargetExample,
    store: &FactStore,
    mode: GroundingMode,
    seed: u64,
    cache: &mut GroundingCache,
) -> GroundNetwork {
    // per_rule is indexed by rule id.
    debug_assert!(walks.iter().enumerate().all(|(i, w)| w.rule_id == i + 1));
    let per_rule = walks
        .iter()
        .map(|walk| {
            cache.get_or_compute(walk, ex, || match mode {
                GroundingMode::Exhaustive => ground_exhaustive(walk, ex, store),
                GroundingMode::Sampled { budget } => {
                    ground_sampled(walk, ex, store, budget, seeds::chain(seed, walk.rule_id as u64))
                }
            })
        })
        .collect();
    GroundNetwork {
        example: *ex,
        per_rule,
        body_lens: walks.iter().map(LiftedWalk::body_len).collect(),
    }
}

/// Activation of one ground neuron: pre-activation `w_j * body_len` (all
/// `body_len` fact inputs are true and carry the tied weight), squashed
/// by tanh under average/max and by the logistic under noisy-or, which
/// expects probabilities.
pub fn ground_activation(w_j: f64, body_len: usize, mode: CombinerMode) -> f64 {
    debug_assert!(body_len >= 1);
    let z = w_j * body_len as f64;
    match mode {
        CombinerMode::Average | CombinerMode::Max => z.tanh(),
        CombinerMode::NoisyOr => sigmoid(z),
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Collapse the grounding activations of one rule. An empty rule
/// contributes 0 under every mode.
pub fn combine(acts: &[f64], mode: CombinerMode) -> Result<f64, NetworkError> {
    if acts.is_empty() {
        return Ok(0.0);
    }
    match mode {
        CombinerMode::Average => Ok(acts.iter().sum::<f64>() / acts.len() as f64),
        CombinerMode::Max => Ok(acts.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        CombinerMode::NoisyOr => {
            let mut product = 1.0;
            for &a in acts {
                if !(0.0..=1.0).contains(&a) {
                    return Err(NetworkError::CombinerInput { value: a });
                }
                product *= 1.0 - a;
            }
            Ok(1.0 - product)
        }
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// All intermediate activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Ground-neuron outputs per rule; within a rule all entries are
    /// equal because the edge weight is tied.
    pub ground_acts: Vec<Vec<f64>>,
    /// Combined rule activations `c_j`; 0 for rules with no groundings.
    pub rule_acts: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

impl ForwardTrace {
    /// Predicted probability of the positive class.
    pub fn score(&self) -> f64 {
        self.probs[POSITIVE_CLASS]
    }
}

/// Forward pass: a pure function of the network, parameters and combiner.
pub fn forward(
    net: &GroundNetwork,
    params: &ModelParams,
    mode: CombinerMode,
) -> Result<ForwardTrace, NetworkError> {
    if params.num_rules() != net.num_rules() {
        return Err(NetworkError::DimensionMismatch {
            params: params.num_rules(),
            rules: net.num_rules(),
        });
    }
    let mut ground_acts = Vec::with_capacity(net.num_rules());
    let mut rule_acts = Vec::with_capacity(net.num_rules());
    for (j, set) in net.per_rule.iter().enumerate() {
        let act = ground_activation(params.w[j], net.body_lens[j], mode);
        if !act.is_finite() {
            return Err(NetworkError::NonFinite { rule: j + 1 });
        }
        let acts = vec![act; set.len()];
        // Tying invariant: every grounding of rule j carries one weight.
        debug_assert!(acts.iter().all(|a| *a == act));
        rule_acts.push(combine(&acts, mode)?);
        ground_acts.push(acts);
    }
    let num_classes = params.num_classes();
    let mut logits = params.b.clone();
    for (j, &c_j) in rule_acts.iter().enumerate() {
        for (class, logit) in logits.iter_mut().enumerate().take(num_classes) {
            *logit += params.u[j][class] * c_j;
        }
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(NetworkError::NonFiniteLogits);
    }
    let probs = softmax(&logits);
    debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    Ok(ForwardTrace { ground_acts, rule_acts, logits, probs })
}

const MODEL_HEADER: &str = "relnn-model v1";

/// Serialize a trained model: header, combiner, dimensions, walk
/// definitions, then `w`, `u`, `b` with full round-trip precision.
pub fn model_to_string(
    walks: &[LiftedWalk],
    params: &ModelParams,
    mode: CombinerMode,
    schema: &Schema,
) -> String {
    let mut out = String::new();
    out.push_str(MODEL_HEADER);
    out.push('\n');
    out.push_str(&format!("combiner {mode}\n"));
    out.push_str(&format!("classes {}\n", params.num_classes()));
    out.push_str(&format!("walks {}\n", walks.len()));
    out.push_str(&walks_to_string(walks, schema));
    out.push_str("w\n");
    for x in &params.w {
        out.push_str(&format!("{x:?}\n"));
    }
    out.push_str("u\n");
    for row in &params.u {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out.push_str("b\n");
    let cells: Vec<String> = params.b.iter().map(|x| format!("{x:?}")).collect();
    out.push_str(&cells.join(" "));
    out.push('\n');
    out
}

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Walks(#[from] WalkError),
}

/// Parse a model file produced by [`model_to_string`]. Loading and
/// re-serializing reproduces the input byte-for-byte, so a round-tripped
/// model yields identical scores.
pub fn model_from_str(
    text: &str,
    schema: &Schema,
) -> Result<(Vec<LiftedWalk>, ModelParams, CombinerMode), ModelIoError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut at = 0;
    let mut next = |expect: &str| -> Result<(usize, &str), ModelIoError> {
        let line = lines.get(at).copied().ok_or_else(|| ModelIoError::Format {
            line: at + 1,
            message: format!("unexpected end of file, expected {expect}"),
        })?;
        at += 1;
        Ok((at, line))
    };

    let (n, header) = next("header")?;
    if header != MODEL_HEADER {
        return Err(ModelIoError::Format { line: n, message: format!("expected `{MODEL_HEADER}`") });
    }
    let (n, combiner_line) = next("combiner")?;
    let mode: CombinerMode = combiner_line
        .strip_prefix("combiner ")
        .ok_or_else(|| ModelIoError::Format { line: n, message: "expected `combiner <mode>`".into() })?
        .parse()
        .map_err(|message| ModelIoError::Format { line: n, message })?;
    let (n, classes_line) = next("classes")?;
    let num_classes: usize = classes_line
        .strip_prefix("classes ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ModelIoError::Format { line: n, message: "expected `classes <n>`".into() })?;
    let (n, walks_line) = next("walks")?;
    let num_walks: usize = walks_line
        .strip_prefix("walks ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ModelIoError::Format { line: n, message: "expected `walks <n>`".into() })?;

    let mut walk_text = String::new();
    for _ in 0..num_walks {
        let (_, line) = next("a walk definition")?;
        walk_text.push_str(line);
        walk_text.push('\n');
    }
    let walks = walks_from_str(&walk_text, schema)?;

    let parse_f64 = |line: usize, s: &str| -> Result<f64, ModelIoError> {
        s.trim().parse().map_err(|_| ModelIoError::Format {
            line,
            message: format!("invalid number `{s}`"),
        })
    };

    let (n, marker) = next("`w`")?;
    if marker != "w" {
        return Err(ModelIoError::Format { line: n, message: "expected `w`".into() });
    }
    let mut w = Vec::with_capacity(num_walks);
    for _ in 0..num_walks {
        let (n, line) = next("a weight")?;
        w.push(parse_f64(n, line)?);
    }
    let (n, marker) = next("`u`")?;
    if marker != "u" {
        return Err(ModelIoError::Format { line: n, message: "expected `u`".into() });
    }
    let mut u = Vec::with_capacity(num_walks);
    for _ in 0..num_walks {
        let (n, line) = next("a weight row")?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|s| parse_f64(n, s))
            .collect::<Result<_, _>>()?;
        if row.len() != num_classes {
            return Err(ModelIoError::Format {
                line: n,
                message: format!("expected {num_classes} outputs, found {}", row.len()),
            });
        }
        u.push(row);
    }
    let (n, marker) = next("`b`")?;
    if marker != "b" {
        return Err(ModelIoError::Format { line: n, message: "expected `b`".into() });
    }
    let (n, line) = next("bias row")?;
    let b: Vec<f64> = line
        .split_whitespace()
        .map(|s| parse_f64(n, s))
        .collect::<Result<_, _>>()?;
    if b.len() != num_classes {
        return Err(ModelIoError::Format {
            line: n,
            message: format!("expected {num_classes} biases, found {}", b.len()),
        });
    }
    Ok((walks, ModelParams { w, u, b }, mode))
}

/// One-hot encoding of a label over [`NUM_CLASSES`] classes.
pub fn one_hot(label: crate::logic::Label) -> [f64; NUM_CLASSES] {
    let mut y = [0.0; NUM_CLASSES];
    y[label.class_index()] = 1.0;
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{leo_marty_store, Label};

    fn worked_example() -> (FactStore, Vec<LiftedWalk>, TargetExample) {
        let store = leo_marty_store();
        let schema = store.schema();
        let walks = walks_from_str(
            "1: actedin ; directed^-1\n2: sameperson ; actedin ; directed^-1\n",
            schema,
        )
        .unwrap();
        let person = schema.type_id("Person").unwrap();
        let ex = TargetExample {
            target: schema.pred_id("workedunder").unwrap(),
            arg1: store.lookup_const(person, "leo").unwrap(),
            arg2: store.lookup_const(person, "marty").unwrap(),
            label: Label::Positive,
        };
        (store, walks, ex)
    }

    #[test]
    fn instantiate_matches_worked_example() {
        let (store, walks, ex) = worked_example();
        let net = instantiate(&walks, &ex, &store, GroundingMode::Exhaustive, 0);
        assert_eq!(net.per_rule[0].len(), 2);
        assert_eq!(net.per_rule[1].len(), 1);
        assert_eq!(net.body_lens, vec![2, 3]);
        // Unique fact neurons: actedin(leo,dep), actedin(leo,avi),
        // directed(marty,dep), directed(marty,avi), sameperson(leo,leonardo),
        // actedin(leonardo,dep).
        assert_eq!(net.fact_node_count(&walks), 6);
    }

    #[test]
    fn instantiate_with_no_groundings_is_valid() {
        let (store, walks, mut ex) = worked_example();
        std::mem::swap(&mut ex.arg1, &mut ex.arg2); // marty under leo: nothing holds
        let net = instantiate(&walks, &ex, &store, GroundingMode::Exhaustive, 0);
        assert_eq!(net.num_groundings(), 0);
        let params = ModelParams::init(2, NUM_CLASSES, 1);
        let trace = forward(&net, &params, CombinerMode::Average).unwrap();
        assert_eq!(trace.rule_acts, vec![0.0, 0.0]);
    }

    #[test]
    fn ground_activation_values() {
        assert_eq!(ground_activation(0.0, 5, CombinerMode::Average), 0.0);
        assert_eq!(ground_activation(0.0, 3, CombinerMode::NoisyOr), 0.5);
        let expected = (0.2f64 * 2.0).tanh();
        assert!((ground_activation(0.2, 2, CombinerMode::Average) - expected).abs() < 1e-15);
        assert!((ground_activation(0.2, 2, CombinerMode::Max) - expected).abs() < 1e-15);
    }

    #[test]
    fn combine_values() {
        assert!((combine(&[0.2, 0.4], CombinerMode::Average).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(combine(&[0.5, 0.5], CombinerMode::NoisyOr).unwrap(), 0.75);
        assert_eq!(combine(&[], CombinerMode::Max).unwrap(), 0.0);
        assert_eq!(combine(&[], CombinerMode::Average).unwrap(), 0.0);
        assert_eq!(combine(&[], CombinerMode::NoisyOr).unwrap(), 0.0);
        assert_eq!(combine(&[0.1, 0.9, 0.4], CombinerMode::Max).unwrap(), 0.9);
        assert!(combine(&[1.5], CombinerMode::NoisyOr).is_err());
        assert!(combine(&[-0.1], CombinerMode::NoisyOr).is_err());
    }

    #[test]
    fn combiner_ordering_holds() {
        let acts = [0.1, 0.7, 0.3];
        let min = acts.iter().copied().fold(f64::INFINITY, f64::min);
        let avg = combine(&acts, CombinerMode::Average).unwrap();
        let max = combine(&acts, CombinerMode::Max).unwrap();
        assert!(min <= avg && avg <= max);
    }

    #[test]
    fn empty_network_outputs_bias_softmax() {
        let (store, walks, mut ex) = worked_example();
        std::mem::swap(&mut ex.arg1, &mut ex.arg2);
        let net = instantiate(&walks, &ex, &store, GroundingMode::Exhaustive, 0);
        let mut params = ModelParams::init(2, NUM_CLASSES, 3);
        params.b = vec![0.4, -0.2];
        let trace = forward(&net, &params, CombinerMode::Average).unwrap();
        let expected = softmax(&[0.4, -0.2]);
        assert_eq!(trace.probs, expected);
    }

    #[test]
    fn single_rule_forward_matches_scalar_evaluation() {
        let (store, walks, ex) = worked_example();
        // Restrict to rule 2 (one grounding) for the scalar check.
        let walks = vec![LiftedWalk { rule_id: 1, chain: walks[1].chain.clone() }];
        let net = instantiate(&walks, &ex, &store, GroundingMode::Exhaustive, 0);
        assert_eq!(net.per_rule[0].len(), 1);
        let params = ModelParams {
            w: vec![0.2],
            u: vec![vec![-1.0, 1.0]],
            b: vec![0.0, 0.0],
        };
        let trace = forward(&net, &params, CombinerMode::Average).unwrap();
        let a = (0.2f64 * 3.0).tanh();
        let expected = softmax(&[-a, a]);
        assert_eq!(trace.probs, expected);
        assert_eq!(trace.score(), expected[POSITIVE_CLASS]);
    }

    #[test]
    fn average_ignores_duplicate_groundings_noisyor_grows() {
        // Synthetic grounding sets with N in {1, 2, 4}; average is
        // invariant, noisy-or strictly increases for positive activation.
        let (store, walks, ex) = worked_example();
        let base = instantiate(&walks, &ex, &store, GroundingMode::Exhaustive, 0);
        let mut params = ModelParams::zeros(2, NUM_CLASSES);
        params.w = vec![0.3, 0.3];
        params.u = vec![vec![0.0, 1.0], vec![0.0, 1.0]];
        let mut last_noisyor = 0.0;
        let mut averages = Vec::new();
        for n in [1usize, 2, 4] {
            let mut net = base.clone();
            let g = net.per_rule[0].groundings[0].clone();
            net.per_rule[0].groundings = vec![g; n];
            let avg = forward(&net, &params, CombinerMode::Average).unwrap();
            averages.push(avg.rule_acts[0]);
            let nor = forward(&net, &params, CombinerMode::NoisyOr).unwrap();
            assert!(nor.rule_acts[0] > last_noisyor);
            last_noisyor = nor.rule_acts[0];
        }
        assert!(averages.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-15));
    }

    #[test]
    fn probabilities_normalize() {
        let (store, walks, ex) = worked_example();
        let net = instantiate(&walks, &ex, &store, GroundingMode::Exhaustive, 0);
        for seed in 0..20 {
            let params = ModelParams::init(2, NUM_CLASSES, seed);
            for mode in CombinerMode::ALL {
                let trace = forward(&net, &params, mode).unwrap();
                assert!((trace.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(trace.probs.iter().all(|p| *p > 0.0 && *p < 1.0));
            }
        }
    }

    #[test]
    fn two_fact_body_matches_stated_softmax() {
        // One rule, one grounding, body length 2, w = 0.2, u = [1, -1],
        // b = 0: the output is softmax(tanh(0.4), -tanh(0.4)).
        let net = GroundNetwork {
            example: TargetExample {
                target: crate::logic::PredId(0),
                arg1: crate::logic::ConstId(0),
                arg2: crate::logic::ConstId(0),
                label: Label::Positive,
            },
            per_rule: vec![GroundingSet {
                walk_id: 1,
                groundings: vec![crate::ground::Grounding { walk_id: 1, bindings: vec![] }],
                truncated: false,
            }],
            body_lens: vec![2],
        };
        let params = ModelParams { w: vec![0.2], u: vec![vec![1.0, -1.0]], b: vec![0.0, 0.0] };
        let trace = forward(&net, &params, CombinerMode::Average).unwrap();
        let a = (0.4f64).tanh();
        assert_eq!(trace.probs, softmax(&[a, -a]));
    }

    #[test]
    fn noisyor_score_is_monotone_in_groundings() {
        // With a positive output weight toward the positive class, adding
        // a grounding never decreases the score under noisy-or.
        let mut net = GroundNetwork {
            example: TargetExample {
                target: crate::logic::PredId(0),
                arg1: crate::logic::ConstId(0),
                arg2: crate::logic::ConstId(0),
                label: Label::Positive,
            },
            per_rule: vec![GroundingSet { walk_id: 1, groundings: vec![], truncated: false }],
            body_lens: vec![3],
        };
        let params = ModelParams { w: vec![0.25], u: vec![vec![0.0, 0.8]], b: vec![0.1, -0.1] };
        let mut last = forward(&net, &params, CombinerMode::NoisyOr).unwrap().score();
        for n in 1..=6 {
            net.per_rule[0]
                .groundings
                .push(crate::ground::Grounding { walk_id: 1, bindings: vec![] });
            let score = forward(&net, &params, CombinerMode::NoisyOr).unwrap().score();
            assert!(score >= last, "score dropped at N = {n}");
            last = score;
        }
    }

    #[test]
    fn nan_parameters_are_a_forward_error() {
        let (store, walks, ex) = worked_example();
        let net = instantiate(&walks, &ex, &store, GroundingMode::Exhaustive, 0);
        let mut params = ModelParams::init(2, NUM_CLASSES, 0);
        params.w[0] = f64::NAN;
        assert!(matches!(
            forward(&net, &params, CombinerMode::Average),
            Err(NetworkError::NonFinite { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let (store, walks, ex) = worked_example();
        let net = instantiate(&walks, &ex, &store, GroundingMode::Exhaustive, 0);
        let params = ModelParams::init(5, NUM_CLASSES, 0);
        assert!(matches!(
            forward(&net, &params, CombinerMode::Average),
            Err(NetworkError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sampled_instantiation_is_deterministic() {
        let (store, walks, ex) = worked_example();
        let a = instantiate(&walks, &ex, &store, GroundingMode::Sampled { budget: 1 }, 7);
        let b = instantiate(&walks, &ex, &store, GroundingMode::Sampled { budget: 1 }, 7);
        assert_eq!(a, b);
        assert!(a.per_rule.iter().all(|s| s.len() <= 1));
    }

    #[test]
    fn model_file_round_trips_to_identical_scores() {
        let (store, walks, ex) = worked_example();
        let params = ModelParams::init(2, NUM_CLASSES, 13);
        let mode = CombinerMode::NoisyOr;
        let text = model_to_string(&walks, &params, mode, store.schema());
        let (walks2, params2, mode2) = model_from_str(&text, store.schema()).unwrap();
        assert_eq!(walks, walks2);
        assert_eq!(params, params2);
        assert_eq!(mode, mode2);
        // Identical bytes on re-serialization, identical scores on use.
        assert_eq!(model_to_string(&walks2, &params2, mode2, store.schema()), text);
        let net = instantiate(&walks, &ex, &store, GroundingMode::Exhaustive, 0);
        let s1 = forward(&net, &params, mode).unwrap().score();
        let s2 = forward(&net, &params2, mode2).unwrap().score();
        assert_eq!(s1, s2);
    }

    #[test]
    fn model_file_errors_are_located() {
        let (store, _, _) = worked_example();
        let err = model_from_str("bogus\n", store.schema()).unwrap_err();
        assert!(matches!(err, ModelIoError::Format { line: 1, .. }));
    }
}
