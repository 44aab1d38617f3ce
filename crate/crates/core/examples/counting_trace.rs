//! Run the counting algorithm transition by transition, checking coherence
//! and printing one JSON line per configuration. The extended run, whose
//! partial transitions pass through incoherent configurations, follows.
//!
//!     cargo run --example counting_trace

use gradedmu::counting::{CountingMachine, Transition};
use gradedmu::formula::parse;
use gradedmu::graph::{LabeledGraph, Valuation};
use gradedmu::semantics::evaluate;

fn main() {
    let g = LabeledGraph::from_parts(&[&[], &["q"], &["p"]], &[(0, 1), (1, 0), (1, 2)]).unwrap();
    // binder scope extends to the right, so the inner fixpoint needs parentheses
    let phi = parse("nu Y.((mu X.(p | <>X)) & <>Y)").unwrap();
    let m = CountingMachine::new(&phi, &g).unwrap();
    let truth = evaluate(&phi, &g, &Valuation::new()).unwrap();

    let mut line = 0;
    let (last, rounds) = m
        .run_counting_observed(None, |t, kappa| {
            m.check_coherent(kappa).expect("counting runs stay coherent");
            let kind = match t {
                Transition::Initial => "init",
                Transition::Type1 => "type1",
                Transition::Type2 => "type2",
                Transition::Type3 => "type3",
            };
            println!("{}", serde_json::to_string(&m.trace_line(line, kind, kappa, &[])).unwrap());
            line += 1;
        })
        .unwrap();
    assert_eq!(m.answer(&last), truth);
    println!("counting: {rounds} rounds, k = {}, answer {}", last.k, truth.bit_string());

    let (x, steps) = m.run_extended(None).unwrap();
    assert_eq!(m.answer(&x.config), truth);
    println!("extended: {steps} steps, k = {}", x.config.k);
}
