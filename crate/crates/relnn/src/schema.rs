//! Lifted schema graph and random-walk rule generation.
//!
//! A declared predicate `p(T1,T2)` is a directed edge `T1 -> T2` in the
//! schema graph; its inverse is a distinct edge `T2 -> T1`. A lifted walk
//! for a target `t(A,B)` is a type-consistent chain of such edges from `A`
//! to `B`; each walk is a conjunctive rule template whose groundings act
//! as relational features of an example.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::logic::{PredId, PredRef, Schema, TypeId};

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("target predicate is not declared")]
    TargetUndeclared,
    #[error("no admissible path from {from} to {to}: the target's argument types are not connected")]
    Unreachable { from: String, to: String },
    #[error("walks file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("walks file line {line}: unknown predicate `{name}`")]
    UnknownPredicate { line: usize, name: String },
}

/// The lifted graph over entity types. Every declared predicate
/// contributes exactly two edges: itself and its inverse.
#[derive(Debug, Clone)]
pub struct SchemaGraph {
    nodes: BTreeSet<TypeId>,
    edges_from: BTreeMap<TypeId, Vec<PredRef>>,
    edge_count: usize,
}

impl SchemaGraph {
    pub fn nodes(&self) -> &BTreeSet<TypeId> {
        &self.nodes
    }

    pub fn edges_from(&self, ty: TypeId) -> &[PredRef] {
        self.edges_from.get(&ty).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }
}

/// Build the schema graph from the declared predicates.
pub fn build_schema_graph(schema: &Schema) -> SchemaGraph {
    let mut nodes = BTreeSet::new();
    let mut edges_from: BTreeMap<TypeId, Vec<PredRef>> = BTreeMap::new();
    let mut edge_count = 0;
    for pid in schema.pred_ids_iter() {
        for pred in [PredRef::forward(pid), PredRef::forward(pid).inverse()] {
            let src = pred.src_type(schema);
            let dst = pred.dst_type(schema);
            nodes.insert(src);
            nodes.insert(dst);
            edges_from.entry(src).or_default().push(pred);
            edge_count += 1;
        }
    }
    for edges in edges_from.values_mut() {
        edges.sort();
    }
    SchemaGraph { nodes, edges_from, edge_count }
}

/// A rule template: an ordered chain of (possibly inverted) predicates
/// with a type-consistent implied variable chain `V_0..V_len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedWalk {
    /// 1-based rule index; walks files and grounding dumps use this id.
    pub rule_id: usize,
    pub chain: Vec<PredRef>,
}

impl LiftedWalk {
    pub fn body_len(&self) -> usize {
        self.chain.len()
    }

    pub fn display(&self, schema: &Schema) -> String {
        let steps: Vec<String> = self.chain.iter().map(|p| schema.render_pred(*p)).collect();
        format!("{}: {}", self.rule_id, steps.join(" ; "))
    }
}

/// Check every walk invariant for the given target:
/// non-empty, type-consistent junctions, endpoint types matching the
/// target's argument types, no occurrence of the target predicate (in
/// either direction), and no step immediately followed by its own inverse.
pub fn validate_walk(walk: &LiftedWalk, target: PredId, schema: &Schema) -> bool {
    if walk.chain.is_empty() {
        return false;
    }
    let decl = schema.decl(target);
    if walk.chain[0].src_type(schema) != decl.arg1 {
        return false;
    }
    if walk.chain[walk.chain.len() - 1].dst_type(schema) != decl.arg2 {
        return false;
    }
    for step in &walk.chain {
        if step.id == target {
            return false;
        }
    }
    for pair in walk.chain.windows(2) {
        if pair[0].dst_type(schema) != pair[1].src_type(schema) {
            return false;
        }
        if pair[1] == pair[0].inverse() {
            return false;
        }
    }
    true
}

/// True if `to` is reachable from `from` through at least one non-target
/// edge. A self-loop requirement (`from == to`) needs an actual cycle.
fn reachable(graph: &SchemaGraph, schema: &Schema, target: PredId, from: TypeId, to: TypeId) -> bool {
    let mut expanded = BTreeSet::new();
    let mut queue = VecDeque::from([from]);
    expanded.insert(from);
    while let Some(ty) = queue.pop_front() {
        for edge in graph.edges_from(ty) {
            if edge.id == target {
                continue;
            }
            let next = edge.dst_type(schema);
            if next == to {
                return true;
            }
            if expanded.insert(next) {
                queue.push_back(next);
            }
        }
    }
    false
}

/// Generate up to `m` distinct lifted walks for `target` by seeded random
/// traversal of the schema graph.
///
/// At each step the walker picks uniformly among type-compatible outgoing
/// edges, excluding the target predicate (either direction) and the
/// immediate inverse of the previous step. Whenever the current type
/// equals the target's second argument type and the chain is non-empty,
/// the walk is emitted with probability 1/2 (always at `max_len`).
/// Duplicates are discarded; generation stops after `m` distinct walks or
/// `max_attempts` tries, so fewer than `m` walks signals an exhausted
/// attempt budget. Deterministic for a fixed seed.
pub fn generate_walks(
    graph: &SchemaGraph,
    schema: &Schema,
    target: PredId,
    m: usize,
    max_len: usize,
    max_attempts: usize,
    seed: u64,
) -> Result<Vec<LiftedWalk>, WalkError> {
    if !schema.is_declared(target) {
        return Err(WalkError::TargetUndeclared);
    }
    assert!(m >= 1, "m must be at least 1");
    assert!(max_len >= 1, "max_len must be at least 1");
    let decl = schema.decl(target);
    let (src, dst) = (decl.arg1, decl.arg2);
    if !reachable(graph, schema, target, src, dst) {
        return Err(WalkError::Unreachable {
            from: schema.type_name(src).to_string(),
            to: schema.type_name(dst).to_string(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<PredRef>> = HashSet::new();
    let mut walks: Vec<LiftedWalk> = Vec::new();
    let mut choices: Vec<PredRef> = Vec::new();

    for _ in 0..max_attempts {
        if walks.len() >= m {
            break;
        }
        let mut chain: Vec<PredRef> = Vec::new();
        let mut current = src;
        let emitted = loop {
            if current == dst
                && !chain.is_empty()
                && (chain.len() == max_len || rng.random_bool(0.5))
            {
                break true;
            }
            if chain.len() == max_len {
                break false;
            }
            choices.clear();
            let prev = chain.last().copied();
            choices.extend(
                graph
                    .edges_from(current)
                    .iter()
                    .filter(|e| e.id != target)
                    .filter(|e| prev != Some(e.inverse()))
                    .copied(),
            );
            if choices.is_empty() {
                break false;
            }
            let edge = choices[rng.random_range(0..choices.len())];
            current = edge.dst_type(schema);
            chain.push(edge);
        };
        if emitted && seen.insert(chain.clone()) {
            walks.push(LiftedWalk { rule_id: walks.len() + 1, chain });
        }
    }
    Ok(walks)
}

/// Render walks one per line: `j: pred1 ; pred2^-1 ; ...`
pub fn walks_to_string(walks: &[LiftedWalk], schema: &Schema) -> String {
    let mut out = String::new();
    for walk in walks {
        out.push_str(&walk.display(schema));
        out.push('\n');
    }
    out
}

/// Parse a walks file. Rule ids must be contiguous starting at 1; the
/// rendered form of the result is byte-identical to its input.
pub fn walks_from_str(text: &str, schema: &Schema) -> Result<Vec<LiftedWalk>, WalkError> {
    let mut walks = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let (id_text, chain_text) = line.split_once(':').ok_or_else(|| WalkError::Format {
            line: lineno,
            message: "expected `id: pred ; pred ; ...`".to_string(),
        })?;
        let rule_id: usize = id_text.trim().parse().map_err(|_| WalkError::Format {
            line: lineno,
            message: format!("invalid rule id `{}`", id_text.trim()),
        })?;
        if rule_id != walks.len() + 1 {
            return Err(WalkError::Format {
                line: lineno,
                message: format!("rule ids must be contiguous from 1, found {rule_id}"),
            });
        }
        let mut chain = Vec::new();
        for step in chain_text.split(';') {
            let step = step.trim();
            if step.is_empty() {
                return Err(WalkError::Format {
                    line: lineno,
                    message: "empty predicate in chain".to_string(),
                });
            }
            let pred = schema.parse_pred(step).ok_or_else(|| WalkError::UnknownPredicate {
                line: lineno,
                name: step.to_string(),
            })?;
            chain.push(pred);
        }
        walks.push(LiftedWalk { rule_id, chain });
    }
    Ok(walks)
}
