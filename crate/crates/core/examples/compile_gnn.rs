//! Compile a sentence into a recurrent GNN, save the model, reload it and run
//! it on a graph, decoding the hidden state after every layer.
//!
//!     cargo run --example compile_gnn

use gradedmu::formula::parse;
use gradedmu::gnn::{compile, RecurrentGnn, RunOptions};
use gradedmu::graph::{LabeledGraph, Valuation};
use gradedmu::semantics::evaluate;

fn main() {
    let phi = parse("mu X.(p | <2>X)").unwrap();
    let gnn = compile(&phi).unwrap();
    let layer = gnn.layer();
    println!(
        "dimension {}, layer depth {}, {} hidden units, {} nonzero weights, max |w| = {}",
        gnn.dim(),
        layer.depth(),
        layer.hidden_units(),
        layer.nonzeros(),
        layer.max_abs_weight()
    );

    let path = std::env::temp_dir().join("gradedmu_example_model.json");
    gnn.save(&path).unwrap();
    let gnn = RecurrentGnn::load(&path).unwrap();

    // node 0 reaches p through two successors, node 3 through only one
    let g = LabeledGraph::from_parts(&[&[], &["p"], &["p"], &[]], &[(0, 1), (0, 2), (3, 1)]).unwrap();
    let run = gnn.run_with(&g, &RunOptions { keep_trace: true, ..RunOptions::default() }).unwrap();
    let lay = gnn.layout();
    for (i, h) in run.trace.iter().enumerate() {
        let x = lay.decode(h).unwrap();
        let halted: String = h.iter().map(|row| char::from(b'0' + row[gnn.hlt_index()] as u8)).collect();
        println!("H{i}: k={} C={:?} halt={halted}", x.config.k, x.config.counters);
    }
    assert_eq!(run.output, evaluate(&phi, &g, &Valuation::new()).unwrap());
    println!("{} iterations, output {}", run.iterations, serde_json::Value::Object(g.labeling(&run.output)));
}
