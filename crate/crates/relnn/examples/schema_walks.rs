//! Generate lifted random-walk rules over the movie schema.
//!
//! ```bash
//! cargo run -p relnn --example schema_walks
//! ```

use relnn::logic::Schema;
use relnn::schema::{build_schema_graph, generate_walks, validate_walk, walks_to_string};

fn main() {
    let mut schema = Schema::new();
    schema.declare("actedin", "Person", "Movie").unwrap();
    schema.declare("directed", "Person", "Movie").unwrap();
    schema.declare("ingenre", "Movie", "Genre").unwrap();
    schema.declare("sameperson", "Person", "Person").unwrap();
    schema.declare("samegenre", "Genre", "Genre").unwrap();
    schema.declare("workedunder", "Person", "Person").unwrap();
    let target = schema.pred_id("workedunder").unwrap();

    // Every declared predicate contributes itself and its inverse as
    // directed edges between type nodes.
    let graph = build_schema_graph(&schema);
    println!(
        "schema graph: {} type nodes, {} predicate edges",
        graph.nodes().len(),
        graph.edge_count()
    );

    // Walks chain Person -> ... -> Person without using the target, and a
    // step is never followed by its own inverse.
    let walks = generate_walks(&graph, &schema, target, 12, 6, 12_000, 7).unwrap();
    println!("\n{} walks for workedunder(Person,Person):", walks.len());
    print!("{}", walks_to_string(&walks, &schema));

    let all_valid = walks.iter().all(|w| validate_walk(w, target, &schema));
    println!("\nall walks pass validation: {all_valid}");
}
