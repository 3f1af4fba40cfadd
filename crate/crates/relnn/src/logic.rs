//! Typed relational vocabulary and the evidence database.
//!
//! The vocabulary is a set of entity types, binary predicate declarations
//! and interned constants. Evidence is a [`FactStore`]: a set of ground
//! binary atoms indexed for forward and backward traversal. Facts are
//! Boolean presence only; an atom absent from the store is false
//! (closed-world assumption).
//!
//! Raw databases may contain unary and ternary predicates; [`binarize`]
//! rewrites them into binary form so the rest of the pipeline only ever
//! sees binary relations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Interned entity type (e.g. `Person`, `Movie`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(pub u32);

/// Interned predicate declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredId(pub u32);

/// Interned constant (entity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstId(pub u32);

/// Example label. Class indices are `0` for negative, `1` for positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn class_index(self) -> usize {
        match self {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Negative => "neg",
            Label::Positive => "pos",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s.trim() {
            "pos" | "positive" | "1" => Some(Label::Positive),
            "neg" | "negative" | "0" => Some(Label::Negative),
            _ => None,
        }
    }
}

/// A binary predicate declaration: name plus argument types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredDecl {
    pub name: String,
    pub arg1: TypeId,
    pub arg2: TypeId,
}

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("predicate `{name}` is already declared")]
    DuplicateDeclaration { name: String },
    #[error("atom `{atom}` uses an undeclared predicate")]
    UndeclaredPredicate { atom: String },
    #[error("atom `{atom}`: argument {position} has type {found}, expected {expected}")]
    TypeMismatch {
        atom: String,
        position: usize,
        expected: String,
        found: String,
    },
    #[error("predicate `{name}` has arity {arity}; only arities 1..=3 are supported")]
    UnsupportedArity { name: String, arity: usize },
    #[error("fact `{atom}` has {found} arguments but `{name}` is declared with {expected}")]
    ArityMismatch {
        atom: String,
        name: String,
        expected: usize,
        found: usize,
    },
}

/// The set of declared types and binary predicates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Schema {
    types: Vec<String>,
    type_ids: HashMap<String, TypeId>,
    preds: Vec<PredDecl>,
    pred_ids: HashMap<String, PredId>,
}

impl Schema {
    pub fn new() -> Schema {
        Schema::default()
    }

    /// Intern a type name, returning its id. Idempotent.
    pub fn intern_type(&mut self, name: &str) -> TypeId {
        if let Some(&id) = self.type_ids.get(name) {
            return id;
        }
        let id = TypeId(self.types.len() as u32);
        self.types.push(name.to_string());
        self.type_ids.insert(name.to_string(), id);
        id
    }

    /// Declare a binary predicate. Duplicate names are rejected.
    pub fn declare(&mut self, name: &str, arg1: &str, arg2: &str) -> Result<PredId, LogicError> {
        if self.pred_ids.contains_key(name) {
            return Err(LogicError::DuplicateDeclaration { name: name.to_string() });
        }
        let arg1 = self.intern_type(arg1);
        let arg2 = self.intern_type(arg2);
        let id = PredId(self.preds.len() as u32);
        self.preds.push(PredDecl { name: name.to_string(), arg1, arg2 });
        self.pred_ids.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn pred_id(&self, name: &str) -> Option<PredId> {
        self.pred_ids.get(name).copied()
    }

    pub fn decl(&self, id: PredId) -> &PredDecl {
        &self.preds[id.0 as usize]
    }

    pub fn is_declared(&self, id: PredId) -> bool {
        (id.0 as usize) < self.preds.len()
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.type_ids.get(name).copied()
    }

    pub fn type_name(&self, id: TypeId) -> &str {
        &self.types[id.0 as usize]
    }

    pub fn num_preds(&self) -> usize {
        self.preds.len()
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    /// Declared predicates in declaration order.
    pub fn pred_ids_iter(&self) -> impl Iterator<Item = PredId> {
        (0..self.preds.len() as u32).map(PredId)
    }

    /// Render a directed predicate reference (`actedin`, `actedin^-1`).
    pub fn render_pred(&self, pred: PredRef) -> String {
        let name = &self.decl(pred.id).name;
        if pred.inverted {
            format!("{name}^-1")
        } else {
            name.clone()
        }
    }

    /// Parse `name` or `name^-1` into a directed predicate reference.
    pub fn parse_pred(&self, text: &str) -> Option<PredRef> {
        let (name, inverted) = match text.strip_suffix("^-1") {
            Some(base) => (base, true),
            None => (text, false),
        };
        self.pred_id(name).map(|id| PredRef { id, inverted })
    }
}

/// A predicate traversed forward or backward. A predicate and its inverse
/// are distinct edges with swapped argument types; inverting twice yields
/// the original.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredRef {
    pub id: PredId,
    pub inverted: bool,
}

impl PredRef {
    pub fn forward(id: PredId) -> PredRef {
        PredRef { id, inverted: false }
    }

    pub fn inverse(self) -> PredRef {
        PredRef { id: self.id, inverted: !self.inverted }
    }

    /// Argument-1 type of this directed reference.
    pub fn src_type(self, schema: &Schema) -> TypeId {
        let d = schema.decl(self.id);
        if self.inverted {
            d.arg2
        } else {
            d.arg1
        }
    }

    /// Argument-2 type of this directed reference.
    pub fn dst_type(self, schema: &Schema) -> TypeId {
        let d = schema.decl(self.id);
        if self.inverted {
            d.arg1
        } else {
            d.arg2
        }
    }
}

/// A ground binary atom. An atom over an inverted predicate reference
/// denotes the same fact as the swapped atom over the base predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: PredRef,
    pub arg1: ConstId,
    pub arg2: ConstId,
}

impl Atom {
    pub fn new(pred: PredRef, arg1: ConstId, arg2: ConstId) -> Atom {
        Atom { pred, arg1, arg2 }
    }

    /// Normalize to the base (non-inverted) predicate direction.
    pub fn canonical(self) -> (PredId, ConstId, ConstId) {
        if self.pred.inverted {
            (self.pred.id, self.arg2, self.arg1)
        } else {
            (self.pred.id, self.arg1, self.arg2)
        }
    }
}

/// A labeled example of the target relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TargetExample {
    pub target: PredId,
    pub arg1: ConstId,
    pub arg2: ConstId,
    pub label: Label,
}

/// The evidence database: declared vocabulary, interned constants, and an
/// indexed set of ground binary atoms.
///
/// Built single-threaded, then used read-only; all queries take `&self`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactStore {
    schema: Schema,
    const_entries: Vec<(String, TypeId)>,
    const_ids: HashMap<(TypeId, String), ConstId>,
    consts_by_type: HashMap<TypeId, Vec<ConstId>>,
    facts: BTreeSet<(PredId, ConstId, ConstId)>,
    fwd: HashMap<(PredId, ConstId), BTreeSet<ConstId>>,
    rev: HashMap<(PredId, ConstId), BTreeSet<ConstId>>,
    empty: BTreeSet<ConstId>,
}

impl FactStore {
    pub fn new(schema: Schema) -> FactStore {
        FactStore {
            schema,
            const_entries: Vec::new(),
            const_ids: HashMap::new(),
            consts_by_type: HashMap::new(),
            facts: BTreeSet::new(),
            fwd: HashMap::new(),
            rev: HashMap::new(),
            empty: BTreeSet::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Intern a constant symbol within a type. Idempotent.
    pub fn intern_const(&mut self, ty: TypeId, symbol: &str) -> ConstId {
        if let Some(&id) = self.const_ids.get(&(ty, symbol.to_string())) {
            return id;
        }
        let id = ConstId(self.const_entries.len() as u32);
        self.const_entries.push((symbol.to_string(), ty));
        self.const_ids.insert((ty, symbol.to_string()), id);
        self.consts_by_type.entry(ty).or_default().push(id);
        id
    }

    pub fn lookup_const(&self, ty: TypeId, symbol: &str) -> Option<ConstId> {
        self.const_ids.get(&(ty, symbol.to_string())).copied()
    }

    pub fn const_symbol(&self, c: ConstId) -> &str {
        &self.const_entries[c.0 as usize].0
    }

    pub fn const_type(&self, c: ConstId) -> TypeId {
        self.const_entries[c.0 as usize].1
    }

    /// Constants of a type, in interning order.
    pub fn constants_of_type(&self, ty: TypeId) -> &[ConstId] {
        self.consts_by_type.get(&ty).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn num_consts(&self) -> usize {
        self.const_entries.len()
    }

    pub fn render_atom(&self, atom: &Atom) -> String {
        format!(
            "{}({},{})",
            self.schema.render_pred(atom.pred),
            self.const_symbol(atom.arg1),
            self.const_symbol(atom.arg2)
        )
    }

    pub fn render_example(&self, ex: &TargetExample) -> String {
        format!(
            "{}({},{})",
            self.schema.decl(ex.target).name,
            self.const_symbol(ex.arg1),
            self.const_symbol(ex.arg2)
        )
    }

    fn check_atom(&self, atom: &Atom) -> Result<(), LogicError> {
        if !self.schema.is_declared(atom.pred.id) {
            return Err(LogicError::UndeclaredPredicate { atom: format!("{atom:?}") });
        }
        let expect1 = atom.pred.src_type(&self.schema);
        let expect2 = atom.pred.dst_type(&self.schema);
        for (position, (c, expect)) in [(atom.arg1, expect1), (atom.arg2, expect2)].iter().enumerate() {
            if self.const_type(*c) != *expect {
                return Err(LogicError::TypeMismatch {
                    atom: self.render_atom(atom),
                    position: position + 1,
                    expected: self.schema.type_name(*expect).to_string(),
                    found: self.schema.type_name(self.const_type(*c)).to_string(),
                });
            }
        }
        Ok(())
    }

    /// Add a ground atom. Returns `true` if it was newly inserted; adding
    /// an existing fact is a no-op.
    pub fn add_fact(&mut self, atom: &Atom) -> Result<bool, LogicError> {
        self.check_atom(atom)?;
        let (p, a, b) = atom.canonical();
        if !self.facts.insert((p, a, b)) {
            return Ok(false);
        }
        self.fwd.entry((p, a)).or_default().insert(b);
        self.rev.entry((p, b)).or_default().insert(a);
        Ok(true)
    }

    /// Membership query; inverse references are normalized first.
    pub fn contains(&self, atom: &Atom) -> bool {
        self.facts.contains(&atom.canonical())
    }

    /// All `z` with `pred(c, z)` in evidence, following the reverse index
    /// when `pred` is inverted. Result iterates in canonical id order.
    pub fn successors(&self, pred: PredRef, c: ConstId) -> Result<&BTreeSet<ConstId>, LogicError> {
        if !self.schema.is_declared(pred.id) {
            return Err(LogicError::UndeclaredPredicate { atom: format!("{pred:?}") });
        }
        let expected = pred.src_type(&self.schema);
        if self.const_type(c) != expected {
            return Err(LogicError::TypeMismatch {
                atom: format!("{}({},_)", self.schema.render_pred(pred), self.const_symbol(c)),
                position: 1,
                expected: self.schema.type_name(expected).to_string(),
                found: self.schema.type_name(self.const_type(c)).to_string(),
            });
        }
        let index = if pred.inverted { &self.rev } else { &self.fwd };
        Ok(index.get(&(pred.id, c)).unwrap_or(&self.empty))
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// All facts as canonical atoms, in deterministic id order.
    pub fn iter_facts(&self) -> impl Iterator<Item = Atom> + '_ {
        self.facts
            .iter()
            .map(|&(p, a, b)| Atom::new(PredRef::forward(p), a, b))
    }
}

impl fmt::Display for FactStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FactStore({} facts, {} constants, {} predicates)",
            self.facts.len(),
            self.const_entries.len(),
            self.schema.num_preds()
        )
    }
}

/// A raw predicate declaration of arity 1..=3, before binarization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDecl {
    pub name: String,
    pub arg_types: Vec<String>,
    pub line: usize,
}

/// A raw fact of arity 1..=3, before binarization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFact {
    pub name: String,
    pub args: Vec<String>,
    pub line: usize,
}

/// A parsed database that may still contain unary and ternary predicates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawDataset {
    pub decls: Vec<RawDecl>,
    pub facts: Vec<RawFact>,
}

/// Fresh type used to encode unary predicates as binary attributes.
pub const BOOL_TYPE: &str = "BoolVal";
/// The singleton constant of [`BOOL_TYPE`].
pub const TRUE_CONST: &str = "true";

fn projection_suffixes() -> [(usize, usize, &'static str); 3] {
    [(0, 1, "_12"), (0, 2, "_13"), (1, 2, "_23")]
}

/// Rewrite a raw database into a purely binary [`FactStore`]:
///
/// - unary `q(a)` becomes `q(a, true)` over a fresh `BoolVal` type;
/// - ternary `r(a,b,c)` becomes the three pairwise projections
///   `r_12(a,b)`, `r_13(a,c)`, `r_23(b,c)`;
/// - binary predicates pass through unchanged.
///
/// `extra_consts` is a list of `(type name, symbol)` pairs interned
/// alongside the fact constants so that example arguments share the
/// canonical constant table.
pub fn build_store(
    raw: &RawDataset,
    extra_consts: &[(String, String)],
) -> Result<FactStore, LogicError> {
    let mut schema = Schema::new();
    // Declared argument types per raw predicate, to type and arity-check facts.
    let mut raw_arity: HashMap<&str, &RawDecl> = HashMap::new();

    for decl in &raw.decls {
        match decl.arg_types.len() {
            1 => {
                schema.declare(&decl.name, &decl.arg_types[0], BOOL_TYPE)?;
            }
            2 => {
                schema.declare(&decl.name, &decl.arg_types[0], &decl.arg_types[1])?;
            }
            3 => {
                for (i, j, suffix) in projection_suffixes() {
                    schema.declare(
                        &format!("{}{}", decl.name, suffix),
                        &decl.arg_types[i],
                        &decl.arg_types[j],
                    )?;
                }
            }
            n => {
                return Err(LogicError::UnsupportedArity { name: decl.name.clone(), arity: n });
            }
        }
        raw_arity.insert(decl.name.as_str(), decl);
    }

    // Expand facts to binary (pred name, arg1 symbol, arg2 symbol) triples.
    let mut binary_facts: Vec<(String, String, String)> = Vec::new();
    let mut has_unary = false;
    for fact in &raw.facts {
        let decl = raw_arity.get(fact.name.as_str()).ok_or_else(|| {
            LogicError::UndeclaredPredicate {
                atom: format!("{}/{} (line {})", fact.name, fact.args.len(), fact.line),
            }
        })?;
        if fact.args.len() != decl.arg_types.len() {
            return Err(LogicError::ArityMismatch {
                atom: format!("{}(...) (line {})", fact.name, fact.line),
                name: fact.name.clone(),
                expected: decl.arg_types.len(),
                found: fact.args.len(),
            });
        }
        match fact.args.len() {
            1 => {
                has_unary = true;
                binary_facts.push((fact.name.clone(), fact.args[0].clone(), TRUE_CONST.into()));
            }
            2 => {
                binary_facts.push((fact.name.clone(), fact.args[0].clone(), fact.args[1].clone()));
            }
            3 => {
                for (i, j, suffix) in projection_suffixes() {
                    binary_facts.push((
                        format!("{}{}", fact.name, suffix),
                        fact.args[i].clone(),
                        fact.args[j].clone(),
                    ));
                }
            }
            _ => unreachable!("arity checked against declaration"),
        }
    }

    let mut store = FactStore::new(schema);

    // Intern constants in sorted (type, symbol) order so downstream
    // iteration is independent of fact-file line order.
    let mut symbols: BTreeSet<(TypeId, String)> = BTreeSet::new();
    for (name, a, b) in &binary_facts {
        let pid = store.schema.pred_id(name).expect("declared above");
        let d = store.schema.decl(pid);
        symbols.insert((d.arg1, a.clone()));
        symbols.insert((d.arg2, b.clone()));
    }
    for (ty_name, symbol) in extra_consts {
        let ty = store.schema.intern_type(ty_name);
        symbols.insert((ty, symbol.clone()));
    }
    if has_unary || raw.decls.iter().any(|d| d.arg_types.len() == 1) {
        let ty = store.schema.type_id(BOOL_TYPE).expect("declared with unary predicate");
        symbols.insert((ty, TRUE_CONST.into()));
    }
    for (ty, symbol) in &symbols {
        store.intern_const(*ty, symbol);
    }

    for (name, a, b) in &binary_facts {
        let pid = store.schema.pred_id(name).expect("declared above");
        let d = store.schema.decl(pid);
        let (t1, t2) = (d.arg1, d.arg2);
        let a = store.lookup_const(t1, a).expect("interned above");
        let b = store.lookup_const(t2, b).expect("interned above");
        store.add_fact(&Atom::new(PredRef::forward(pid), a, b))?;
    }
    Ok(store)
}

/// [`build_store`] with no extra constants.
pub fn binarize(raw: &RawDataset) -> Result<FactStore, LogicError> {
    build_store(raw, &[])
}

#[cfg(test)]
pub use tests::{leo_marty_store, movie_schema};
