//! Ground two walk rules for one example, exhaustively and by sampling.
//!
//! The evidence is the worked movie example: leo acted in two movies that
//! marty directed, and leo's alias leonardo acted in one of them. The
//! first rule then has two true instantiations for workedunder(leo,marty)
//! and the alias rule exactly one.
//!
//! ```bash
//! cargo run -p relnn --example grounding
//! ```

use relnn::ground::{dump_line, ground_exhaustive, ground_sampled};
use relnn::logic::{Atom, FactStore, Label, PredRef, Schema, TargetExample};
use relnn::schema::walks_from_str;

fn main() {
    let mut schema = Schema::new();
    schema.declare("actedin", "Person", "Movie").unwrap();
    schema.declare("directed", "Person", "Movie").unwrap();
    schema.declare("sameperson", "Person", "Person").unwrap();
    schema.declare("workedunder", "Person", "Person").unwrap();

    let mut store = FactStore::new(schema);
    let person = store.schema().type_id("Person").unwrap();
    let movie = store.schema().type_id("Movie").unwrap();
    let leo = store.intern_const(person, "leo");
    let leonardo = store.intern_const(person, "leonardo");
    let marty = store.intern_const(person, "marty");
    let departed = store.intern_const(movie, "the_departed");
    let aviator = store.intern_const(movie, "the_aviator");
    let actedin = PredRef::forward(store.schema().pred_id("actedin").unwrap());
    let directed = PredRef::forward(store.schema().pred_id("directed").unwrap());
    let sameperson = PredRef::forward(store.schema().pred_id("sameperson").unwrap());
    for atom in [
        Atom::new(actedin, leo, departed),
        Atom::new(actedin, leo, aviator),
        Atom::new(actedin, leonardo, departed),
        Atom::new(directed, marty, departed),
        Atom::new(directed, marty, aviator),
        Atom::new(sameperson, leo, leonardo),
    ] {
        store.add_fact(&atom).unwrap();
    }

    let walks = walks_from_str(
        "1: actedin ; directed^-1\n2: sameperson ; actedin ; directed^-1\n",
        store.schema(),
    )
    .unwrap();
    let example = TargetExample {
        target: store.schema().pred_id("workedunder").unwrap(),
        arg1: leo,
        arg2: marty,
        label: Label::Positive,
    };

    println!("example: {}\n", store.render_example(&example));
    for walk in &walks {
        let set = ground_exhaustive(walk, &example, &store);
        println!(
            "rule {} ({}): {} grounding(s)",
            walk.rule_id,
            walk.display(store.schema()),
            set.len()
        );
        for g in &set.groundings {
            println!("  {}", dump_line(g, &example, &store));
        }
    }

    // Sampling returns a deterministic subset under a budget.
    let sampled = ground_sampled(&walks[0], &example, &store, 1, 42);
    println!(
        "\nsampled rule 1 with budget 1: {} grounding(s), truncated = {}",
        sampled.len(),
        sampled.truncated
    );
    for g in &sampled.groundings {
        println!("  {}", dump_line(g, &example, &store));
    }
}
