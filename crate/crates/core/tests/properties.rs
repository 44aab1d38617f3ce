//! Randomized invariants over formulas, graphs, gadgets, configurations and
//! bisimulation.

use proptest::prelude::*;

use gradedmu::bisim::{color_refinement, g_bisimilar};
use gradedmu::counting::CountingMachine;
use gradedmu::formula::{parse, well_name, Formula};
use gradedmu::gen::{random_formula, random_graph, random_graph_with, rng, FormulaParams, GraphParams};
use gradedmu::gnn::{gadgets, FeatureLayout, Rfnn};
use gradedmu::graph::{LabeledGraph, Valuation};
use gradedmu::semantics::evaluate;

fn small_graphs() -> GraphParams {
    GraphParams { min_nodes: 1, max_nodes: 6, edge_prob: 0.35, ..GraphParams::default() }
}

fn formula_from(seed: u64) -> Formula {
    random_formula(&mut rng(seed), &FormulaParams::default())
}

fn graph_from(seed: u64) -> LabeledGraph {
    random_graph(&mut rng(seed), &small_graphs())
}

fn clip(x: i64) -> i64 {
    x.clamp(0, 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let phi = formula_from(seed);
        prop_assert_eq!(parse(&phi.to_string()).unwrap(), phi);
    }

    #[test]
    fn composed_gadgets_match_direct_composition(a in -500i64..500, b in -500i64..500, c in -500i64..500, d in -500i64..500) {
        // clip(gt(a, b) + (c - d))
        let net = gadgets::gt().parallel(&gadgets::sub()).compose(&gadgets::add()).compose(&gadgets::clip());
        prop_assert_eq!(net.eval(&[a, b, c, d]).unwrap(), vec![clip(clip(a - b) + c - d)]);

        // (eq(a, b), geq(c, d)) fed to or, then negated
        let net = gadgets::eq().parallel(&gadgets::geq()).compose(&gadgets::or()).compose(&gadgets::not());
        let direct = 1 - ((a == b) || (c >= d)) as i64;
        prop_assert_eq!(net.eval(&[a, b, c, d]).unwrap(), vec![direct]);
    }

    #[test]
    fn mux_selects(g in 0i64..=1, a in 0i64..=1, b in 0i64..=1) {
        let net = gadgets::mux().concat(&Rfnn::identity(3));
        prop_assert_eq!(net.eval(&[g, a, b]).unwrap(), vec![if g == 1 { a } else { b }, g, a, b]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn well_naming_is_idempotent_and_preserves_meaning(s1 in any::<u64>(), s2 in any::<u64>(), gs in any::<u64>()) {
        // both halves reuse binder names, so the conjunction usually clashes
        let phi = Formula::and(formula_from(s1), formula_from(s2));
        let named = well_name(&phi);
        prop_assert!(named.is_well_named());
        prop_assert_eq!(well_name(&named), named.clone());
        let g = graph_from(gs);
        let v = Valuation::new();
        prop_assert_eq!(evaluate(&named, &g, &v).unwrap(), evaluate(&phi, &g, &v).unwrap());
    }

    #[test]
    fn graph_files_round_trip(seed in any::<u64>()) {
        let g = graph_from(seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        g.save(&path).unwrap();
        prop_assert_eq!(LabeledGraph::load(&path).unwrap(), g);
    }

    #[test]
    fn feature_matrices_round_trip(fs in any::<u64>(), gs in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let phi = formula_from(fs);
        let g = graph_from(gs);
        let m = CountingMachine::new(&phi, &g).unwrap();
        let lay = FeatureLayout::new(m.index());
        let mut seen = Vec::new();
        m.run_extended_observed(None, |_, _, x| seen.push(x.clone())).unwrap();
        let x = pick.get(&seen);
        prop_assert_eq!(&lay.decode(&lay.encode(x, &g)).unwrap(), x);
    }

    #[test]
    fn bisimilarity_is_an_equivalence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let props = ["p".to_string()];
        let gs: Vec<LabeledGraph> = (0..3).map(|_| random_graph_with(&mut r, 3, 0.4, &props)).collect();
        for a in 0..3 {
            prop_assert!(g_bisimilar(&gs[0], a, &gs[0], a).unwrap());
            for b in 0..3 {
                let ab = g_bisimilar(&gs[0], a, &gs[1], b).unwrap();
                prop_assert_eq!(ab, g_bisimilar(&gs[1], b, &gs[0], a).unwrap());
                for c in 0..3 {
                    if ab && g_bisimilar(&gs[1], b, &gs[2], c).unwrap() {
                        prop_assert!(g_bisimilar(&gs[0], a, &gs[2], c).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn formulas_cannot_separate_bisimilar_nodes(fs in any::<u64>(), gs in any::<u64>()) {
        let phi = formula_from(fs);
        let g = graph_from(gs);
        let truth = evaluate(&phi, &g, &Valuation::new()).unwrap();
        let colors = color_refinement(&g).colors;
        for a in 0..g.node_count() {
            for b in 0..g.node_count() {
                if colors[a] == colors[b] {
                    prop_assert_eq!(truth.contains(a), truth.contains(b), "{} separates {} and {}", phi, a, b);
                }
            }
        }
    }
}
