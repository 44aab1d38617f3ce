//! Fixpoints unfolded a bounded number of times, and the smallest bound at
//! which every node has stabilized.
//!
//!     cargo run --example approximations

use gradedmu::formula::parse;
use gradedmu::graph::{LabeledGraph, Valuation};
use gradedmu::semantics::{adorn, evaluate, evaluate_adorned, is_k_stable, model_check_stable};

fn main() {
    // a path of six nodes whose last node satisfies p
    let n = 6;
    let mut labels = vec![&[][..]; n];
    labels[n - 1] = &["p"][..];
    let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    let g = LabeledGraph::from_parts(&labels, &edges).unwrap();

    let phi = parse("mu X.(p | <>X)").unwrap();
    let v = Valuation::new();
    for k in 1..=n + 1 {
        let approx = evaluate_adorned(&adorn(&phi, k, k), &g, &v).unwrap();
        let stable: String = (0..n).map(|i| if is_k_stable(&phi, &g, &v, i, k).unwrap() { 's' } else { '.' }).collect();
        println!("k={k}  {}  stable at {stable}", approx.bit_string());
    }

    let (answer, k) = model_check_stable(&phi, &g).unwrap();
    assert_eq!(answer, evaluate(&phi, &g, &v).unwrap());
    println!("first uniformly stable bound: k={k}, answer {}", answer.bit_string());
}
