//! Text grammar for datasets.
//!
//! Facts files hold one atom per line, `pred(arg1,arg2).` with lowercase
//! constants, a trailing period and `%` comments. Type-declaration files
//! hold `pred(Type1,Type2)` one per line. Arity-1 and arity-3 lines are
//! accepted and routed through binarization; everything downstream of
//! [`parse_dataset`] is purely binary.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::logic::{
    build_store, FactStore, Label, LogicError, RawDataset, RawDecl, RawFact, TargetExample,
};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Syntax {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{path}: {source}")]
    Logic {
        path: PathBuf,
        #[source]
        source: LogicError,
    },
    #[error("target predicate `{name}` is not declared in the types file")]
    TargetUndeclared { name: String },
    #[error("target predicate `{name}` must be binary, found arity {arity}")]
    TargetNotBinary { name: String, arity: usize },
    #[error("{path} line {line}: expected an atom of target `{expected}`, found `{found}`")]
    WrongExamplePredicate {
        path: PathBuf,
        line: usize,
        expected: String,
        found: String,
    },
    #[error("{path} line {line}: example atoms must be binary")]
    ExampleArity { path: PathBuf, line: usize },
}

struct Cursor<'a> {
    line: &'a str,
    lineno: usize,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a str, lineno: usize) -> Self {
        Cursor { line, lineno, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.line[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.line.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn err(&self, expected: &str) -> ParseError {
        let found = match self.peek() {
            Some(c) => format!("`{c}`"),
            None => "end of line".to_string(),
        };
        ParseError {
            line: self.lineno,
            col: self.pos + 1,
            expected: expected.to_string(),
            found,
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(&format!("`{c}`")))
        }
    }

    fn ident(&mut self, what: &str, allow_upper: bool, allow_digit_start: bool) -> Result<String, ParseError> {
        self.skip_ws();
        let start_ok = |c: char| {
            c.is_ascii_lowercase()
                || (allow_upper && c.is_ascii_uppercase())
                || (allow_digit_start && c.is_ascii_digit())
        };
        let cont_ok = |c: char| {
            c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || (allow_upper && c.is_ascii_uppercase())
        };
        match self.peek() {
            Some(c) if start_ok(c) => {}
            _ => return Err(self.err(what)),
        }
        let rest = self.rest();
        let len = rest.chars().take_while(|&c| cont_ok(c)).map(char::len_utf8).sum();
        let ident = &rest[..len];
        self.pos += len;
        Ok(ident.to_string())
    }

    fn end_of_line(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek().is_none() || self.rest().starts_with('%') {
            Ok(())
        } else {
            Err(self.err("end of line"))
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_functor(
    cursor: &mut Cursor,
    name_desc: &str,
    arg_desc: &str,
    upper_args: bool,
) -> Result<(String, Vec<String>), ParseError> {
    let name = cursor.ident(name_desc, false, false)?;
    cursor.expect('(')?;
    let mut args = vec![cursor.ident(arg_desc, upper_args, !upper_args)?];
    loop {
        cursor.skip_ws();
        match cursor.peek() {
            Some(',') => {
                cursor.pos += 1;
                args.push(cursor.ident(arg_desc, upper_args, !upper_args)?);
            }
            Some(')') => {
                cursor.pos += 1;
                break;
            }
            _ => return Err(cursor.err("`,` or `)`")),
        }
    }
    Ok((name, args))
}

/// Parse a type-declaration file: `pred(Type1,Type2)` per line, optional
/// trailing period, `%` comments.
pub fn parse_decls(text: &str) -> Result<Vec<RawDecl>, ParseError> {
    let mut decls = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        if strip_comment(raw_line).trim().is_empty() {
            continue;
        }
        let mut cursor = Cursor::new(raw_line, lineno);
        let (name, arg_types) = parse_functor(&mut cursor, "a predicate name", "a type name", true)?;
        cursor.skip_ws();
        if cursor.peek() == Some('.') {
            cursor.pos += 1;
        }
        cursor.end_of_line()?;
        decls.push(RawDecl { name, arg_types, line: lineno });
    }
    Ok(decls)
}

/// Parse a facts or examples file: `pred(a,b).` per line.
pub fn parse_fact_lines(text: &str) -> Result<Vec<RawFact>, ParseError> {
    let mut facts = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        if strip_comment(raw_line).trim().is_empty() {
            continue;
        }
        let mut cursor = Cursor::new(raw_line, lineno);
        let (name, args) = parse_functor(&mut cursor, "a predicate name", "a constant", false)?;
        cursor.expect('.')?;
        cursor.end_of_line()?;
        facts.push(RawFact { name, args, line: lineno });
    }
    Ok(facts)
}

/// Paths making up one dataset.
#[derive(Debug, Clone)]
pub struct DatasetPaths {
    pub types: PathBuf,
    pub facts: PathBuf,
    pub positives: PathBuf,
    pub negatives: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })
}

fn syntax(path: &Path) -> impl FnOnce(ParseError) -> DatasetError + '_ {
    move |source| DatasetError::Syntax { path: path.to_path_buf(), source }
}

/// Parse and assemble a dataset: types and facts build the evidence store
/// (unary/ternary predicates routed through binarization), the example
/// files become labeled target atoms.
pub fn parse_dataset(
    paths: &DatasetPaths,
    target: &str,
) -> Result<(FactStore, Vec<TargetExample>), DatasetError> {
    let decls = parse_decls(&read(&paths.types)?).map_err(syntax(&paths.types))?;
    let facts = parse_fact_lines(&read(&paths.facts)?).map_err(syntax(&paths.facts))?;

    let target_decl = decls
        .iter()
        .find(|d| d.name == target)
        .ok_or_else(|| DatasetError::TargetUndeclared { name: target.to_string() })?;
    if target_decl.arg_types.len() != 2 {
        return Err(DatasetError::TargetNotBinary {
            name: target.to_string(),
            arity: target_decl.arg_types.len(),
        });
    }
    let (t1, t2) = (target_decl.arg_types[0].clone(), target_decl.arg_types[1].clone());

    let mut example_files: Vec<(&Path, Label, Vec<RawFact>)> = Vec::new();
    let pos =
        parse_fact_lines(&read(&paths.positives)?).map_err(syntax(&paths.positives))?;
    example_files.push((&paths.positives, Label::Positive, pos));
    if let Some(neg_path) = &paths.negatives {
        let neg = parse_fact_lines(&read(neg_path)?).map_err(syntax(neg_path))?;
        example_files.push((neg_path, Label::Negative, neg));
    }

    let mut extra_consts = Vec::new();
    for (path, _, atoms) in &example_files {
        for atom in atoms {
            if atom.name != target {
                return Err(DatasetError::WrongExamplePredicate {
                    path: path.to_path_buf(),
                    line: atom.line,
                    expected: target.to_string(),
                    found: atom.name.clone(),
                });
            }
            if atom.args.len() != 2 {
                return Err(DatasetError::ExampleArity {
                    path: path.to_path_buf(),
                    line: atom.line,
                });
            }
            extra_consts.push((t1.clone(), atom.args[0].clone()));
            extra_consts.push((t2.clone(), atom.args[1].clone()));
        }
    }

    let raw = RawDataset { decls, facts };
    let store = build_store(&raw, &extra_consts)
        .map_err(|source| DatasetError::Logic { path: paths.facts.clone(), source })?;

    let schema = store.schema();
    let target_id = schema.pred_id(target).expect("declared above");
    let decl = schema.decl(target_id);
    let (ty1, ty2) = (decl.arg1, decl.arg2);

    let mut examples = Vec::new();
    for (_, label, atoms) in &example_files {
        for atom in atoms {
            let arg1 = store.lookup_const(ty1, &atom.args[0]).expect("interned above");
            let arg2 = store.lookup_const(ty2, &atom.args[1]).expect("interned above");
            examples.push(TargetExample { target: target_id, arg1, arg2, label: *label });
        }
    }
    Ok((store, examples))
}

/// Render the declarations of a purely binary schema, one per line.
pub fn serialize_decls(store: &FactStore) -> String {
    let schema = store.schema();
    let mut out = String::new();
    for pid in schema.pred_ids_iter() {
        let d = schema.decl(pid);
        out.push_str(&format!(
            "{}({},{})\n",
            d.name,
            schema.type_name(d.arg1),
            schema.type_name(d.arg2)
        ));
    }
    out
}

/// Render all facts in canonical order, one atom per line.
pub fn serialize_facts(store: &FactStore) -> String {
    let mut out = String::new();
    for atom in store.iter_facts() {
        out.push_str(&store.render_atom(&atom));
        out.push_str(".\n");
    }
    out
}

/// Render examples in list order, one atom per line.
pub fn serialize_examples(store: &FactStore, examples: &[TargetExample]) -> String {
    let mut out = String::new();
    for ex in examples {
        out.push_str(&store.render_example(ex));
        out.push_str(".\n");
    }
    out
}

/// One line of a fold-assignment file: `fold,label,atom.`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldLine {
    pub fold: usize,
    pub label: Label,
    pub atom: RawFact,
}

/// Parse a fold-assignment file. Each line pins one example to one fold:
/// `0,pos,workedunder(leo,marty).`
pub fn parse_folds(text: &str) -> Result<Vec<FoldLine>, ParseError> {
    let mut out = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw_line).trim();
        if line.is_empty() {
            continue;
        }
        let mut cursor = Cursor::new(raw_line, lineno);
        cursor.skip_ws();
        let digits = cursor.ident("a fold index", false, true)?;
        let fold: usize = digits
            .parse()
            .map_err(|_| cursor.err("a fold index"))?;
        cursor.expect(',')?;
        let label_text = cursor.ident("a label (pos or neg)", false, false)?;
        let label = Label::parse(&label_text).ok_or_else(|| cursor.err("a label (pos or neg)"))?;
        cursor.expect(',')?;
        let (name, args) = parse_functor(&mut cursor, "a predicate name", "a constant", false)?;
        cursor.expect('.')?;
        cursor.end_of_line()?;
        out.push(FoldLine { fold, label, atom: RawFact { name, args, line: lineno } });
    }
    Ok(out)
}
