use std::fmt;

use super::{modal_all_but, modal_at_least, SemanticsError};
use crate::formula::Formula;
use crate::graph::{LabeledGraph, NodeSet, Valuation};

/// A formula whose fixpoints carry an explicit iteration count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdornedFormula {
    Prop(String),
    NegProp(String),
    Var(String),
    And(Box<AdornedFormula>, Box<AdornedFormula>),
    Or(Box<AdornedFormula>, Box<AdornedFormula>),
    AtLeast(u32, Box<AdornedFormula>),
    AllBut(u32, Box<AdornedFormula>),
    Mu(usize, String, Box<AdornedFormula>),
    Nu(usize, String, Box<AdornedFormula>),
}

/// Adorn the outermost fixpoint of `phi` with `outer` (only if `phi` is itself
/// a fixpoint) and every other fixpoint with `inner`.
///
/// `adorn(phi, k, k)` is the uniform approximation and `adorn(phi, i, k)` for a
/// fixpoint `phi` the detail approximation.
pub fn adorn(phi: &Formula, outer: usize, inner: usize) -> AdornedFormula {
    match phi {
        Formula::Mu(x, b) => AdornedFormula::Mu(outer, x.clone(), Box::new(adorn_all(b, inner))),
        Formula::Nu(x, b) => AdornedFormula::Nu(outer, x.clone(), Box::new(adorn_all(b, inner))),
        _ => adorn_all(phi, inner),
    }
}

fn adorn_all(phi: &Formula, k: usize) -> AdornedFormula {
    use AdornedFormula as A;
    match phi {
        Formula::Prop(p) => A::Prop(p.clone()),
        Formula::NegProp(p) => A::NegProp(p.clone()),
        Formula::Var(x) => A::Var(x.clone()),
        Formula::And(l, r) => A::And(Box::new(adorn_all(l, k)), Box::new(adorn_all(r, k))),
        Formula::Or(l, r) => A::Or(Box::new(adorn_all(l, k)), Box::new(adorn_all(r, k))),
        Formula::AtLeast(l, b) => A::AtLeast(*l, Box::new(adorn_all(b, k))),
        Formula::AllBut(l, b) => A::AllBut(*l, Box::new(adorn_all(b, k))),
        Formula::Mu(x, b) => A::Mu(k, x.clone(), Box::new(adorn_all(b, k))),
        Formula::Nu(x, b) => A::Nu(k, x.clone(), Box::new(adorn_all(b, k))),
    }
}

/// Evaluate an adorned formula by literal unfolding: `μ^0 = ∅`, `ν^0 = N`,
/// and `π^i X.ψ` is `ψ` under `X ↦ ⟦π^(i-1) X.ψ⟧`.
pub fn evaluate_adorned(phi: &AdornedFormula, g: &LabeledGraph, v: &Valuation) -> Result<NodeSet, SemanticsError> {
    use AdornedFormula as A;
    let n = g.node_count();
    Ok(match phi {
        A::Prop(p) => g.label_set(p),
        A::NegProp(p) => g.label_set(p).complement(),
        A::Var(x) => v.get(x).cloned().ok_or_else(|| SemanticsError::MissingVariable(x.clone()))?,
        A::And(l, r) => evaluate_adorned(l, g, v)?.intersection(&evaluate_adorned(r, g, v)?),
        A::Or(l, r) => evaluate_adorned(l, g, v)?.union(&evaluate_adorned(r, g, v)?),
        A::AtLeast(l, b) => modal_at_least(g, &evaluate_adorned(b, g, v)?, *l),
        A::AllBut(l, b) => modal_all_but(g, &evaluate_adorned(b, g, v)?, *l),
        A::Mu(i, x, b) | A::Nu(i, x, b) => {
            let mut s = if matches!(phi, A::Mu(..)) { NodeSet::empty(n) } else { NodeSet::full(n) };
            for _ in 0..*i {
                s = evaluate_adorned(b, g, &v.with(x.clone(), s))?;
            }
            s
        }
    })
}

impl fmt::Display for AdornedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use AdornedFormula as A;
        fn operand(f: &mut fmt::Formatter<'_>, g: &AdornedFormula) -> fmt::Result {
            match g {
                A::Prop(_) | A::NegProp(_) | A::Var(_) | A::AtLeast(..) | A::AllBut(..) => write!(f, "{g}"),
                _ => write!(f, "({g})"),
            }
        }
        match self {
            A::Prop(p) => write!(f, "{p}"),
            A::NegProp(p) => write!(f, "~{p}"),
            A::Var(x) => write!(f, "{x}"),
            A::And(l, r) => {
                operand(f, l)?;
                write!(f, " & ")?;
                operand(f, r)
            }
            A::Or(l, r) => {
                operand(f, l)?;
                write!(f, " | ")?;
                operand(f, r)
            }
            A::AtLeast(k, b) => {
                write!(f, "<{k}>")?;
                operand(f, b)
            }
            A::AllBut(k, b) => {
                write!(f, "[{k}]")?;
                operand(f, b)
            }
            A::Mu(i, x, b) => write!(f, "mu^{i} {x}.{b}"),
            A::Nu(i, x, b) => write!(f, "nu^{i} {x}.{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::graph::tests::g1;

    #[test]
    fn uniform_adornment_of_nested_formula() {
        let alpha = parse("mu Y.((p | <>Y) | mu X.(q & <>(Y | <>X)))").unwrap();
        assert_eq!(adorn(&alpha, 3, 3).to_string(), "mu^3 Y.(p | <1>Y) | (mu^3 X.q & <1>(Y | <1>X))");
        assert_eq!(adorn(&alpha, 1, 4).to_string(), "mu^1 Y.(p | <1>Y) | (mu^4 X.q & <1>(Y | <1>X))");
    }

    #[test]
    fn non_fixpoint_ignores_outer() {
        let phi = parse("p & mu X.<>X").unwrap();
        assert_eq!(adorn(&phi, 7, 2).to_string(), "p & (mu^2 X.<1>X)");
        assert_eq!(adorn(&parse("mu X.p").unwrap(), 0, 3).to_string(), "mu^0 X.p");
    }

    #[test]
    fn reachability_approximations() {
        let g = g1();
        let phi = parse("mu X.(p | <>X)").unwrap();
        let at = |k| evaluate_adorned(&adorn(&phi, k, k), &g, &Valuation::new()).unwrap();
        assert_eq!(at(0), NodeSet::empty(3));
        assert_eq!(at(1), NodeSet::from_indices(3, [2]));
        assert_eq!(at(2), NodeSet::from_indices(3, [1, 2]));
        assert_eq!(at(3), NodeSet::full(3));
    }

    #[test]
    fn zero_iterations() {
        let g = g1();
        let v = Valuation::new();
        assert!(evaluate_adorned(&adorn(&parse("nu X.p").unwrap(), 0, 0), &g, &v).unwrap().is_full());
        assert!(evaluate_adorned(&adorn(&parse("mu X.~p").unwrap(), 0, 0), &g, &v).unwrap().is_empty());
    }
}
