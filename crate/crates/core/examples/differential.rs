//! Random sentences and graphs run through every engine, reporting any
//! disagreement.
//!
//!     cargo run --release --example differential -- [trials] [seed]

use gradedmu::counting::CountingMachine;
use gradedmu::gen::{random_formula, random_graph, rng, FormulaParams, GraphParams};
use gradedmu::gnn::compile;
use gradedmu::graph::Valuation;
use gradedmu::semantics::{evaluate, model_check_stable};

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("numeric argument"));
    let trials = args.next().unwrap_or(200);
    let mut r = rng(args.next().unwrap_or(7));
    let (fp, gp) = (FormulaParams::default(), GraphParams::default());

    let mut steps = 0;
    for t in 0..trials {
        let phi = random_formula(&mut r, &fp);
        let g = random_graph(&mut r, &gp);
        let oracle = evaluate(&phi, &g, &Valuation::new()).unwrap();
        let m = CountingMachine::new(&phi, &g).unwrap();
        let (counted, _) = m.run_counting(None).unwrap();
        let (extended, s) = m.run_extended(None).unwrap();
        steps += s;
        let outputs = [
            ("stable", model_check_stable(&phi, &g).unwrap().0),
            ("counting", m.answer(&counted)),
            ("extended", m.answer(&extended.config)),
            ("gnn", compile(&phi).unwrap().run(&g).unwrap().output),
        ];
        for (engine, out) in outputs {
            if out != oracle {
                println!("trial {t}: {engine} disagrees on {phi} ({} nodes)", g.node_count());
            }
        }
    }
    println!("{trials} trials, {steps} extended steps");
}
