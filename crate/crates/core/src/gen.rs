//! Seeded random sentences and graphs for differential testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::Formula;
use crate::graph::LabeledGraph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct FormulaParams {
    pub max_fixpoints: usize,
    pub max_nesting: usize,
    pub max_grade: u32,
    /// Upper bound on AST node count.
    pub max_size: usize,
    pub props: Vec<String>,
}

impl Default for FormulaParams {
    fn default() -> Self {
        FormulaParams {
            max_fixpoints: 3,
            max_nesting: 3,
            max_grade: 3,
            max_size: 25,
            props: ["p", "q", "r"].map(String::from).to_vec(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GraphParams {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub edge_prob: f64,
    pub props: Vec<String>,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams { min_nodes: 1, max_nodes: 10, edge_prob: 0.3, props: ["p", "q", "r"].map(String::from).to_vec() }
    }
}

struct FormulaGen<'a, R> {
    rng: &'a mut R,
    params: &'a FormulaParams,
    fixpoints: usize,
    scope: Vec<String>,
}

impl<R: Rng> FormulaGen<'_, R> {
    fn leaf(&mut self) -> Formula {
        if !self.scope.is_empty() && self.rng.gen_bool(0.5) {
            return Formula::Var(self.scope.choose(self.rng).unwrap().clone());
        }
        let p = self.params.props.choose(self.rng).expect("at least one proposition").clone();
        if self.rng.gen_bool(0.3) {
            Formula::NegProp(p)
        } else {
            Formula::Prop(p)
        }
    }

    /// A formula with at most `budget` nodes.
    fn formula(&mut self, budget: usize) -> Formula {
        if budget <= 1 || self.rng.gen_bool(0.1) {
            return self.leaf();
        }
        let can_bind = self.fixpoints < self.params.max_fixpoints && self.scope.len() < self.params.max_nesting;
        let choice = self.rng.gen_range(0..if can_bind { 7 } else { 4 });
        match choice {
            0 | 1 if budget >= 3 => {
                let left = self.rng.gen_range(1..budget - 1);
                let l = self.formula(left);
                let r = self.formula(budget - 1 - l.size());
                if choice == 0 {
                    Formula::and(l, r)
                } else {
                    Formula::or(l, r)
                }
            }
            0..=3 => {
                let k = self.rng.gen_range(1..=self.params.max_grade);
                let body = self.formula(budget - 1);
                if choice % 2 == 0 {
                    Formula::at_least(k, body)
                } else {
                    Formula::all_but(k, body)
                }
            }
            _ => {
                let x = format!("X{}", self.fixpoints);
                self.fixpoints += 1;
                self.scope.push(x.clone());
                let body = self.formula(budget - 1);
                self.scope.pop();
                if choice != 5 {
                    Formula::Mu(x, Box::new(body))
                } else {
                    Formula::Nu(x, Box::new(body))
                }
            }
        }
    }
}

/// A random well-named sentence within the given bounds.
pub fn random_formula<R: Rng>(rng: &mut R, params: &FormulaParams) -> Formula {
    let budget = rng.gen_range(1..=params.max_size);
    let mut g = FormulaGen { rng, params, fixpoints: 0, scope: Vec::new() };
    g.formula(budget)
}

/// An Erdős–Rényi graph (self-loops allowed) with independent random labels.
pub fn random_graph<R: Rng>(rng: &mut R, params: &GraphParams) -> LabeledGraph {
    let n = rng.gen_range(params.min_nodes..=params.max_nodes);
    random_graph_with(rng, n, params.edge_prob, &params.props)
}

pub fn random_graph_with<R: Rng>(rng: &mut R, n: usize, edge_prob: f64, props: &[String]) -> LabeledGraph {
    let nodes =
        (0..n).map(|i| (i.to_string(), props.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect())).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(edge_prob) {
                edges.push((u, v));
            }
        }
    }
    LabeledGraph::new(props.iter().cloned(), nodes, edges).expect("generated graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas_respect_bounds() {
        let params = FormulaParams::default();
        let mut r = rng(7);
        for _ in 0..2000 {
            let f = random_formula(&mut r, &params);
            assert!(f.size() <= params.max_size, "{f}");
            assert!(f.fixpoint_count() <= params.max_fixpoints);
            assert!(f.fixpoint_depth() <= params.max_nesting);
            assert!(f.is_sentence() && f.is_well_named(), "{f}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let params = FormulaParams::default();
        let a = random_formula(&mut rng(3), &params);
        let b = random_formula(&mut rng(3), &params);
        assert_eq!(a, b);
        let gp = GraphParams::default();
        assert_eq!(random_graph(&mut rng(3), &gp), random_graph(&mut rng(3), &gp));
    }
}
