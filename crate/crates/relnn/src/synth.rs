//! Synthetic datasets with planted rules.
//!
//! The generator lays down random background facts, then labels target
//! pairs so that the target holds (with the rule's firing probability)
//! exactly when some planted walk has a true grounding, plus a small
//! noise rate of spurious positives. Because the signal is known, a
//! trained model's ability to recover it is measurable, and flipping the
//! firing probability to zero gives a no-signal control.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ground::ground_exhaustive;
use crate::logic::{FactStore, Label, LogicError, PredRef, Schema, TargetExample};
use crate::parse::{serialize_decls, serialize_examples, serialize_facts};
use crate::schema::{validate_walk, walks_to_string, LiftedWalk};
use crate::seeds;

/// A walk template planted into the data, firing the target with the
/// given probability wherever it has a true grounding.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedRule {
    /// Chain steps as `(predicate name, inverted)` pairs.
    pub steps: Vec<(String, bool)>,
    pub fire_prob: f64,
}

impl PlantedRule {
    pub fn new(steps: &[(&str, bool)], fire_prob: f64) -> PlantedRule {
        PlantedRule {
            steps: steps.iter().map(|(n, i)| (n.to_string(), *i)).collect(),
            fire_prob,
        }
    }
}

/// A background predicate: declaration plus the Bernoulli density of its
/// random facts.
#[derive(Debug, Clone, PartialEq)]
pub struct PredSpec {
    pub name: String,
    pub arg1: String,
    pub arg2: String,
    pub density: f64,
}

/// Full description of a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Entity counts per type.
    pub types: Vec<(String, usize)>,
    pub predicates: Vec<PredSpec>,
    /// Target declaration `(name, arg1 type, arg2 type)`.
    pub target: (String, String, String),
    pub planted: Vec<PlantedRule>,
    /// Probability that a pair not fired by any rule is still positive.
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// A 50-entity movie-style domain with two planted rules: working
    /// under a movie's director, directly or through an alias.
    pub fn movie_default(seed: u64) -> SyntheticSpec {
        let pred = |name: &str, arg1: &str, arg2: &str, density: f64| PredSpec {
            name: name.to_string(),
            arg1: arg1.to_string(),
            arg2: arg2.to_string(),
            density,
        };
        SyntheticSpec {
            types: vec![
                ("Person".to_string(), 20),
                ("Movie".to_string(), 20),
                ("Genre".to_string(), 10),
            ],
            predicates: vec![
                pred("actedin", "Person", "Movie", 0.15),
                pred("directed", "Person", "Movie", 0.05),
                pred("ingenre", "Movie", "Genre", 0.10),
                pred("sameperson", "Person", "Person", 0.01),
                pred("samegenre", "Genre", "Genre", 0.02),
            ],
            target: ("workedunder".to_string(), "Person".to_string(), "Person".to_string()),
            planted: vec![
                PlantedRule::new(&[("actedin", false), ("directed", true)], 0.9),
                PlantedRule::new(
                    &[("sameperson", false), ("actedin", false), ("directed", true)],
                    0.9,
                ),
            ],
            noise: 0.05,
            seed,
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("planted rule {index} uses unknown predicate `{name}`")]
    UnknownPredicate { index: usize, name: String },
    #[error("planted rule {index} is not a valid walk for the target")]
    InvalidRule { index: usize },
    #[error("probability {value} outside [0,1]")]
    Probability { value: f64 },
    #[error(transparent)]
    Logic(#[from] LogicError),
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub store: FactStore,
    pub positives: Vec<TargetExample>,
    /// The planted ground-truth rules, as walks.
    pub rules: Vec<LiftedWalk>,
}

/// Generate a dataset from a spec. Deterministic for a fixed seed.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticDataset, SynthError> {
    for p in spec.planted.iter().map(|r| r.fire_prob).chain([spec.noise]) {
        if !(0.0..=1.0).contains(&p) {
            return Err(SynthError::Probability { value: p });
        }
    }
    let mut schema = Schema::new();
    for pred in &spec.predicates {
        schema.declare(&pred.name, &pred.arg1, &pred.arg2)?;
    }
    let (target_name, target_t1, target_t2) = &spec.target;
    let target = schema.declare(target_name, target_t1, target_t2)?;

    let mut store = FactStore::new(schema);
    let digits = spec.types.iter().map(|(_, n)| n.to_string().len()).max().unwrap_or(1);
    // Intern in sorted (type, symbol) order, matching the parser's
    // canonical order so written datasets reload identically.
    let mut symbols = std::collections::BTreeSet::new();
    for (ty_name, count) in &spec.types {
        let ty = match store.schema().type_id(ty_name) {
            Some(ty) => ty,
            None => continue, // type unused by any predicate
        };
        let prefix = ty_name.to_ascii_lowercase();
        for i in 0..*count {
            symbols.insert((ty, format!("{prefix}{i:0digits$}")));
        }
    }
    for (ty, symbol) in &symbols {
        store.intern_const(*ty, symbol);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(spec.seed, seeds::STREAM_SYNTH));
    for pred in &spec.predicates {
        let pid = store.schema().pred_id(&pred.name).expect("declared above");
        let pref = PredRef::forward(pid);
        let t1 = store.schema().decl(pid).arg1;
        let t2 = store.schema().decl(pid).arg2;
        let lhs = store.constants_of_type(t1).to_vec();
        let rhs = store.constants_of_type(t2).to_vec();
        for &a in &lhs {
            for &b in &rhs {
                if t1 == t2 && a == b {
                    continue;
                }
                if rng.random_bool(pred.density) {
                    store.add_fact(&crate::logic::Atom::new(pref, a, b))?;
                }
            }
        }
    }

    let mut rules = Vec::new();
    for (index, rule) in spec.planted.iter().enumerate() {
        let chain: Option<Vec<PredRef>> = rule
            .steps
            .iter()
            .map(|(name, inverted)| {
                store.schema().pred_id(name).map(|id| PredRef { id, inverted: *inverted })
            })
            .collect();
        let chain = chain.ok_or_else(|| SynthError::UnknownPredicate {
            index: index + 1,
            name: rule
                .steps
                .iter()
                .find(|(n, _)| store.schema().pred_id(n).is_none())
                .map(|(n, _)| n.clone())
                .unwrap_or_default(),
        })?;
        let walk = LiftedWalk { rule_id: index + 1, chain };
        if !validate_walk(&walk, target, store.schema()) {
            return Err(SynthError::InvalidRule { index: index + 1 });
        }
        rules.push(walk);
    }

    let t1 = store.schema().decl(target).arg1;
    let t2 = store.schema().decl(target).arg2;
    let lhs = store.constants_of_type(t1).to_vec();
    let rhs = store.constants_of_type(t2).to_vec();
    let mut positives = Vec::new();
    for &a in &lhs {
        for &b in &rhs {
            if t1 == t2 && a == b {
                continue;
            }
            let probe = TargetExample { target, arg1: a, arg2: b, label: Label::Positive };
            let mut fired = false;
            for rule in &rules {
                if !ground_exhaustive(rule, &probe, &store).is_empty() {
                    let fire_prob = spec.planted[rule.rule_id - 1].fire_prob;
                    if fire_prob > 0.0 && rng.random_bool(fire_prob) {
                        fired = true;
                    }
                }
            }
            if !fired && spec.noise > 0.0 && rng.random_bool(spec.noise) {
                fired = true;
            }
            if fired {
                positives.push(probe);
            }
        }
    }
    Ok(SyntheticDataset { store, positives, rules })
}

/// Paths of a written synthetic dataset.
#[derive(Debug, Clone)]
pub struct SyntheticPaths {
    pub types: PathBuf,
    pub facts: PathBuf,
    pub positives: PathBuf,
    pub rules: PathBuf,
}

/// Write a generated dataset into `dir`: `types.txt`, `facts.txt`,
/// `pos.txt`, and the ground-truth `rules.txt`.
pub fn write_synthetic(ds: &SyntheticDataset, dir: &Path) -> io::Result<SyntheticPaths> {
    fs::create_dir_all(dir)?;
    let paths = SyntheticPaths {
        types: dir.join("types.txt"),
        facts: dir.join("facts.txt"),
        positives: dir.join("pos.txt"),
        rules: dir.join("rules.txt"),
    };
    fs::write(&paths.types, serialize_decls(&ds.store))?;
    fs::write(&paths.facts, serialize_facts(&ds.store))?;
    fs::write(&paths.positives, serialize_examples(&ds.store, &ds.positives))?;
    fs::write(&paths.rules, walks_to_string(&ds.rules, ds.store.schema()))?;
    Ok(paths)
}
