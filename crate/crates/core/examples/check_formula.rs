//! Parse a sentence, build a graph in code and evaluate the sentence on it.
//!
//!     cargo run --example check_formula

use gradedmu::formula::parse;
use gradedmu::graph::{LabeledGraph, Valuation};
use gradedmu::semantics::evaluate;

fn main() {
    // 0 -> 1 -> 2 -> 2, with p only at 2
    let g = LabeledGraph::from_parts(&[&[], &[], &["p"]], &[(0, 1), (1, 2), (2, 2)]).unwrap();

    for text in ["mu X.(p | <>X)", "nu X.(p & <>X)", "<2>~p", "[1]~p", "<>p", "nu Y.(<>Y & mu X.(p | <>X))"] {
        let phi = parse(text).unwrap();
        let holds = evaluate(&phi, &g, &Valuation::new()).unwrap();
        println!("{:<32} {}", phi.to_string(), serde_json::Value::Object(g.labeling(&holds)));
    }
}
