//! Build a typed fact store, query it, and binarize a raw database.
//!
//! ```bash
//! cargo run -p relnn --example fact_store
//! ```

use relnn::logic::{binarize, Atom, FactStore, PredRef, RawDataset, RawDecl, RawFact, Schema};

fn main() {
    // Declare the movie-domain vocabulary.
    let mut schema = Schema::new();
    schema.declare("actedin", "Person", "Movie").unwrap();
    schema.declare("directed", "Person", "Movie").unwrap();
    schema.declare("sameperson", "Person", "Person").unwrap();

    let mut store = FactStore::new(schema);
    let person = store.schema().type_id("Person").unwrap();
    let movie = store.schema().type_id("Movie").unwrap();
    let leo = store.intern_const(person, "leo");
    let marty = store.intern_const(person, "marty");
    let departed = store.intern_const(movie, "the_departed");
    let aviator = store.intern_const(movie, "the_aviator");

    let actedin = PredRef::forward(store.schema().pred_id("actedin").unwrap());
    let directed = PredRef::forward(store.schema().pred_id("directed").unwrap());
    for atom in [
        Atom::new(actedin, leo, departed),
        Atom::new(actedin, leo, aviator),
        Atom::new(directed, marty, departed),
        Atom::new(directed, marty, aviator),
    ] {
        store.add_fact(&atom).unwrap();
    }
    println!("{store}");

    // Membership is direction-normalized: an inverse atom denotes the
    // same fact.
    let fwd = Atom::new(actedin, leo, departed);
    let inv = Atom::new(actedin.inverse(), departed, leo);
    println!("contains {}: {}", store.render_atom(&fwd), store.contains(&fwd));
    println!("contains {}: {}", store.render_atom(&inv), store.contains(&inv));

    // The successor index drives walk grounding in both directions.
    let movies: Vec<&str> = store
        .successors(actedin, leo)
        .unwrap()
        .iter()
        .map(|c| store.const_symbol(*c))
        .collect();
    println!("actedin(leo, _): {movies:?}");
    let directors: Vec<&str> = store
        .successors(directed.inverse(), departed)
        .unwrap()
        .iter()
        .map(|c| store.const_symbol(*c))
        .collect();
    println!("directed^-1(the_departed, _): {directors:?}");

    // Unary and ternary predicates binarize into attribute facts and
    // pairwise projections.
    let raw = RawDataset {
        decls: vec![
            RawDecl { name: "professor".into(), arg_types: vec!["Person".into()], line: 1 },
            RawDecl {
                name: "taughtby".into(),
                arg_types: vec!["Course".into(), "Person".into(), "Quarter".into()],
                line: 2,
            },
        ],
        facts: vec![
            RawFact { name: "professor".into(), args: vec!["ana".into()], line: 1 },
            RawFact {
                name: "taughtby".into(),
                args: vec!["cs101".into(), "ana".into(), "autumn".into()],
                line: 2,
            },
        ],
    };
    let binary = binarize(&raw).unwrap();
    println!("\nbinarized raw database:");
    for atom in binary.iter_facts() {
        println!("  {}", binary.render_atom(&atom));
    }
}
