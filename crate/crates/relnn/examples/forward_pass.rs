//! Unroll a per-example network and run the forward pass under each
//! combining rule.
//!
//! ```bash
//! cargo run -p relnn --example forward_pass
//! ```

use relnn::logic::{Atom, FactStore, Label, PredRef, Schema, TargetExample};
use relnn::network::{forward, instantiate, CombinerMode, GroundingMode, ModelParams};
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

    // The network layers: fact neurons feed AND-gated grounding neurons
    // through the tied rule weight, a combiner neuron per rule pools the
    // groundings, and the output is a softmax over two classes.
    let net = instantiate(&walks, &example, &store, GroundingMode::Exhaustive, 0);
    println!("example: {}", store.render_example(&example));
    println!("fact neurons: {}", net.fact_node_count(&walks));
    for (walk, set) in walks.iter().zip(&net.per_rule) {
        println!(
            "rule {}: {} grounding neuron(s), body length {}",
            walk.rule_id,
            set.len(),
            walk.body_len()
        );
    }

    let params = ModelParams {
        w: vec![0.4, 0.4],
        u: vec![vec![-1.0, 1.0], vec![-1.0, 1.0]],
        b: vec![0.0, 0.0],
    };
    println!("\ntied weights w = {:?}", params.w);
    for mode in CombinerMode::ALL {
        let trace = forward(&net, &params, mode).unwrap();
        println!(
            "{mode:>8}: rule activations {:?}, p(positive) = {:.4}",
            trace
                .rule_acts
                .iter()
                .map(|c| (c * 1e4).round() / 1e4)
                .collect::<Vec<_>>(),
            trace.score()
        );
    }
}
