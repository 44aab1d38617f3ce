//! Fixpoint semantics, adorned approximations and k-stability.

mod adorned;
mod engine;

use thiserror::Error;

pub use adorned::{adorn, evaluate_adorned, AdornedFormula};
pub use engine::{Approximator, Env};

use crate::formula::{Formula, SubformulaIndex};
use crate::graph::{LabeledGraph, NodeSet, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("free variable `{0}` has no value")]
    MissingVariable(String),
    #[error("stability needs k >= 1")]
    ZeroBound,
    #[error("expected a fixpoint formula")]
    NotFixpoint,
    #[error("expected a sentence, found free variables {0:?}")]
    NotSentence(Vec<String>),
    #[error("node {0} out of range")]
    NodeOutOfRange(usize),
}

/// `{n : |G[n] ∩ s| ≥ l}`.
pub fn modal_at_least(g: &LabeledGraph, s: &NodeSet, l: u32) -> NodeSet {
    let l = l as usize;
    NodeSet::from_fn(g.node_count(), |n| g.succ(n).iter().filter(|&&m| s.contains(m)).count() >= l)
}

/// `{n : |G[n] \ s| < l}`.
pub fn modal_all_but(g: &LabeledGraph, s: &NodeSet, l: u32) -> NodeSet {
    let l = l as usize;
    NodeSet::from_fn(g.node_count(), |n| g.succ(n).iter().filter(|&&m| !s.contains(m)).count() < l)
}

/// Exact semantics `⟦phi⟧` under `v`, with fixpoints computed by Kleene
/// iteration from ∅ (μ) or all nodes (ν).
pub fn evaluate(phi: &Formula, g: &LabeledGraph, v: &Valuation) -> Result<NodeSet, SemanticsError> {
    let n = g.node_count();
    Ok(match phi {
        Formula::Prop(p) => g.label_set(p),
        Formula::NegProp(p) => g.label_set(p).complement(),
        Formula::Var(x) => v.get(x).cloned().ok_or_else(|| SemanticsError::MissingVariable(x.clone()))?,
        Formula::And(l, r) => evaluate(l, g, v)?.intersection(&evaluate(r, g, v)?),
        Formula::Or(l, r) => evaluate(l, g, v)?.union(&evaluate(r, g, v)?),
        Formula::AtLeast(l, b) => modal_at_least(g, &evaluate(b, g, v)?, *l),
        Formula::AllBut(l, b) => modal_all_but(g, &evaluate(b, g, v)?, *l),
        Formula::Mu(x, b) | Formula::Nu(x, b) => {
            let mut s = if matches!(phi, Formula::Mu(..)) { NodeSet::empty(n) } else { NodeSet::full(n) };
            loop {
                let next = evaluate(b, g, &v.with(x.clone(), s.clone()))?;
                if next == s {
                    break s;
                }
                s = next;
            }
        }
    })
}

/// Index plus an environment built from `v`, checking that every free
/// variable has a value.
fn setup(phi: &Formula, g: &LabeledGraph, v: &Valuation) -> Result<(SubformulaIndex, Vec<NodeSet>), SemanticsError> {
    let idx = SubformulaIndex::new(phi);
    let n = g.node_count();
    let mut env = vec![NodeSet::empty(n); idx.vars().len()];
    for x in idx.free_vars() {
        let s = v.get(x).ok_or_else(|| SemanticsError::MissingVariable(x.clone()))?;
        env[idx.var_id(x).expect("free variable is indexed")] = s.clone();
    }
    Ok((idx, env))
}

/// Whether `phi` is k-stable on `(g, v, n)`.
pub fn is_k_stable(phi: &Formula, g: &LabeledGraph, v: &Valuation, n: usize, k: usize) -> Result<bool, SemanticsError> {
    if k == 0 {
        return Err(SemanticsError::ZeroBound);
    }
    if n >= g.node_count() {
        return Err(SemanticsError::NodeOutOfRange(n));
    }
    let (idx, mut env) = setup(phi, g, v)?;
    Ok(Approximator::new(&idx, g).stable_set(idx.root(), k, &mut env).contains(n))
}

/// Whether the fixpoint `alpha` is (j,k)-stable on `(g, v, n)`.
pub fn is_jk_stable(
    alpha: &Formula,
    j: usize,
    k: usize,
    g: &LabeledGraph,
    v: &Valuation,
    n: usize,
) -> Result<bool, SemanticsError> {
    if !alpha.is_fixpoint() {
        return Err(SemanticsError::NotFixpoint);
    }
    if k == 0 {
        return Err(SemanticsError::ZeroBound);
    }
    if n >= g.node_count() {
        return Err(SemanticsError::NodeOutOfRange(n));
    }
    let (idx, mut env) = setup(alpha, g, v)?;
    Ok(Approximator::new(&idx, g).jk_stable_set(idx.root(), j, k, &mut env).contains(n))
}

/// Find the least `k ≥ 1` at which the sentence `phi` is k-stable at every
/// node and return `(⟦phi^(k)⟧, k)`.
pub fn model_check_stable(phi: &Formula, g: &LabeledGraph) -> Result<(NodeSet, usize), SemanticsError> {
    let idx = SubformulaIndex::new(phi);
    if !idx.is_sentence() {
        return Err(SemanticsError::NotSentence(idx.free_vars().to_vec()));
    }
    let mut ap = Approximator::new(&idx, g);
    let mut env = ap.empty_env();
    for k in 1.. {
        if ap.stable_set(idx.root(), k, &mut env).is_full() {
            return Ok((ap.uniform(idx.root(), k, &mut env), k));
        }
        assert!(k <= g.node_count() + 1, "stability must hold once k exceeds the node count");
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::graph::tests::g1;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let g = g1();
        let v = Valuation::new();
        assert_eq!(evaluate(&f("mu X.(p | <>X)"), &g, &v).unwrap(), NodeSet::full(3));
        assert_eq!(evaluate(&f("mu X.X"), &g, &v).unwrap(), NodeSet::empty(3));
        assert_eq!(evaluate(&f("nu X.X"), &g, &v).unwrap(), NodeSet::full(3));
        assert_eq!(evaluate(&f("<>p"), &g, &v).unwrap(), NodeSet::from_indices(3, [1]));
        assert_eq!(evaluate(&f("[]p"), &g, &v).unwrap(), NodeSet::from_indices(3, [1, 2]));
        assert_eq!(evaluate(&f("X"), &g, &v), Err(SemanticsError::MissingVariable("X".into())));
    }

    #[test]
    fn engine_matches_tree_evaluation() {
        let g = g1();
        let phi = f("mu Y.((p | <>Y) | mu X.(q & <>(Y | <>X)))");
        let idx = SubformulaIndex::new(&phi);
        let ap = Approximator::new(&idx, &g);
        let mut env = ap.empty_env();
        assert_eq!(ap.exact(idx.root(), &mut env), evaluate(&phi, &g, &Valuation::new()).unwrap());
    }

    #[test]
    fn stability_of_reachability() {
        let g = g1();
        let v = Valuation::new();
        let phi = f("mu X.(p | <>X)");
        assert!(!is_k_stable(&phi, &g, &v, 0, 3).unwrap());
        assert!(is_k_stable(&phi, &g, &v, 0, 4).unwrap());
        assert_eq!(is_k_stable(&phi, &g, &v, 0, 0), Err(SemanticsError::ZeroBound));
        for k in 1..5 {
            for n in 0..3 {
                assert!(is_k_stable(&f("p & ~q"), &g, &v, n, k).unwrap());
                assert!(is_jk_stable(&phi, 0, k, &g, &v, n).unwrap());
            }
        }
        assert_eq!(is_jk_stable(&f("p"), 1, 1, &g, &v, 0), Err(SemanticsError::NotFixpoint));
    }

    #[test]
    fn model_check_examples() {
        let g = g1();
        assert_eq!(model_check_stable(&f("mu X.(p | <>X)"), &g).unwrap(), (NodeSet::full(3), 4));
        assert_eq!(model_check_stable(&f("p & q"), &g).unwrap(), (NodeSet::from_indices(3, [2]), 1));
        let single = LabeledGraph::from_parts(&[&[]], &[]).unwrap();
        assert_eq!(model_check_stable(&f("nu X.<>X"), &single).unwrap(), (NodeSet::empty(1), 2));
        assert!(matches!(model_check_stable(&f("X"), &g), Err(SemanticsError::NotSentence(_))));
    }
}
