//! Relational neural networks over typed fact databases.
//!
//! `relnn` learns to predict a binary target relation (link prediction) from
//! a database of ground facts. The model is built in three stages:
//!
//! 1. **Structure**: lifted random walks over the database schema produce
//!    chain rules (`actedin ; directed^-1`, ...) that act as relational
//!    features ([`schema`]).
//! 2. **Instantiation**: for each labeled example the rules are grounded
//!    against the evidence and unrolled into a small four-layer network
//!    (facts, groundings, rule combiners, softmax output) where every
//!    grounding of rule `j` shares one tied weight `w_j` ([`ground`],
//!    [`network`]).
//! 3. **Training**: cross-entropy loss with exact backpropagation through
//!    the tied weights, optimized by L1-regularized AdaGrad; evaluation by
//!    AUC-ROC / AUC-PR under k-fold cross-validation ([`mod@train`],
//!    [`metrics`]).
//!
//! # Module map
//!
//! - [`logic`] -- typed vocabulary, ground atoms, the indexed fact store,
//!   and binarization of unary/ternary predicates.
//! - [`parse`] -- the text grammar for type declarations, facts and example
//!   files, plus dataset assembly.
//! - [`schema`] -- the lifted schema graph and random-walk rule generation.
//! - [`ground`] -- exhaustive and sampled grounding of walk rules.
//! - [`network`] -- per-example network unrolling and the forward pass.
//! - [`mod@train`] -- loss, backpropagation, AdaGrad-L1, negative sampling,
//!   training and cross-validation loops.
//! - [`metrics`] -- AUC-ROC and AUC-PR.
//! - [`synth`] -- synthetic dataset generation with planted rules.
//! - [`app`] -- experiment configuration, the end-to-end pipeline and the
//!   file formats behind the `relnn` command-line tool.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run -p relnn --example fact_store       # build and query evidence
//! cargo run -p relnn --example schema_walks     # generate lifted walk rules
//! cargo run -p relnn --example grounding        # ground rules for one example
//! cargo run -p relnn --example forward_pass     # unroll a network and score
//! cargo run -p relnn --example train_synthetic  # train on planted-rule data
//! cargo run -p relnn --example cross_validate   # full 5-fold experiment
//! cargo run -p relnn --example evaluate_scores  # AUC from a score list
//! ```
//!
//! The same pipeline is scriptable through the thin `relnn` binary
//! (`walks`, `ground`, `train`, `cv`, `predict`, `eval`, `synth`
//! subcommands); see the README for the file formats.

pub mod app;
pub mod ground;
pub mod logic;
pub mod metrics;
pub mod network;
pub mod parse;
pub mod schema;
pub(crate) mod seeds;
pub mod synth;
pub mod train;

pub use ground::{ground_exhaustive, ground_sampled, Grounding, GroundingSet};
pub use logic::{Atom, ConstId, FactStore, Label, PredId, PredRef, Schema, TargetExample, TypeId};
pub use metrics::{auc_pr, auc_roc, ScoredExample};
pub use network::{forward, instantiate, CombinerMode, GroundNetwork, GroundingMode, ModelParams};
pub use schema::{build_schema_graph, generate_walks, validate_walk, LiftedWalk, SchemaGraph};
pub use train::{cross_validate, generate_negatives, train, CvReport, TrainConfig};
