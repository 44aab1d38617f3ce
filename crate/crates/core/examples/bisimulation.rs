//! Graded bisimilarity by color refinement, checked against the exhaustive
//! relation search, and the invariance of formulas under it.
//!
//!     cargo run --example bisimulation

use gradedmu::bisim::{bisimilar_pairs, brute_force_bisimilar, color_refinement, g_bisimilar};
use gradedmu::formula::parse;
use gradedmu::graph::{LabeledGraph, Valuation};
use gradedmu::semantics::evaluate;

fn main() {
    let one = LabeledGraph::from_parts(&[&[], &["p"]], &[(0, 1)]).unwrap();
    let two = LabeledGraph::from_parts(&[&[], &["p"], &["p"]], &[(0, 1), (0, 2)]).unwrap();
    println!("colors of two: {:?}", color_refinement(&two).colors);
    println!("related pairs: {:?}", bisimilar_pairs(&one, &two).unwrap());

    let roots = g_bisimilar(&one, 0, &two, 0).unwrap();
    assert_eq!(roots, brute_force_bisimilar(&one, 0, &two, 0).unwrap());
    println!("roots bisimilar: {roots}");

    // a graded modality tells the roots apart; a plain one does not
    for text in ["<>p", "<2>p"] {
        let phi = parse(text).unwrap();
        let a = evaluate(&phi, &one, &Valuation::new()).unwrap().contains(0);
        let b = evaluate(&phi, &two, &Valuation::new()).unwrap().contains(0);
        println!("{text:<5} one: {a:<5} two: {b}");
    }
}
