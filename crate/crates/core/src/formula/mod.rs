//! Graded modal μ-calculus formulas in negation normal form.
//!
//! A [`Formula`] is a plain owned AST. Everything downstream works on a
//! [`SubformulaIndex`], which well-names the formula and assigns every
//! distinct subformula a dense id in canonical post-order.

mod index;
mod parser;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

pub use index::{Node, SubId, SubformulaIndex, VarId};
pub use parser::{parse, ParseError, MAX_GRADE};

/// A μ-calculus formula. Negation is only ever applied to proposition symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Prop(String),
    NegProp(String),
    Var(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// `<k> body`: at least `k` successors satisfy `body`.
    AtLeast(u32, Box<Formula>),
    /// `[k] body`: strictly fewer than `k` successors violate `body`.
    AllBut(u32, Box<Formula>),
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
}

impl Formula {
    pub fn prop(p: &str) -> Self {
        Formula::Prop(p.to_owned())
    }

    pub fn neg_prop(p: &str) -> Self {
        Formula::NegProp(p.to_owned())
    }

    pub fn var(x: &str) -> Self {
        Formula::Var(x.to_owned())
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Self {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Self {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn at_least(k: u32, body: Formula) -> Self {
        Formula::AtLeast(k, Box::new(body))
    }

    pub fn all_but(k: u32, body: Formula) -> Self {
        Formula::AllBut(k, Box::new(body))
    }

    pub fn diamond(body: Formula) -> Self {
        Self::at_least(1, body)
    }

    pub fn boxed(body: Formula) -> Self {
        Self::all_but(1, body)
    }

    pub fn mu(x: &str, body: Formula) -> Self {
        Formula::Mu(x.to_owned(), Box::new(body))
    }

    pub fn nu(x: &str, body: Formula) -> Self {
        Formula::Nu(x.to_owned(), Box::new(body))
    }

    /// Direct subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Prop(_) | Formula::NegProp(_) | Formula::Var(_) => vec![],
            Formula::And(l, r) | Formula::Or(l, r) => vec![l, r],
            Formula::AtLeast(_, b) | Formula::AllBut(_, b) | Formula::Mu(_, b) | Formula::Nu(_, b) => {
                vec![b]
            }
        }
    }

    pub fn is_fixpoint(&self) -> bool {
        matches!(self, Formula::Mu(..) | Formula::Nu(..))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                Formula::Mu(x, b) | Formula::Nu(x, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                other => {
                    for c in other.children() {
                        go(c, bound, out);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// All variable names occurring free or bound.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Var(x) | Formula::Mu(x, _) | Formula::Nu(x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Prop(p) | Formula::NegProp(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Pre-order visit.
    pub fn visit<F: FnMut(&Formula)>(&self, f: &mut F) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Free variables are disjoint from bound ones and nothing is bound twice.
    pub fn is_well_named(&self) -> bool {
        let free = self.free_vars();
        let mut bound = HashSet::new();
        let mut ok = true;
        self.visit(&mut |f| {
            if let Formula::Mu(x, _) | Formula::Nu(x, _) = f {
                if free.contains(x) || !bound.insert(x.clone()) {
                    ok = false;
                }
            }
        });
        ok
    }

    /// Maximum number of fixpoint binders on any root-to-leaf path.
    pub fn fixpoint_depth(&self) -> usize {
        let below = self.children().into_iter().map(Formula::fixpoint_depth).max().unwrap_or(0);
        below + usize::from(self.is_fixpoint())
    }

    pub fn fixpoint_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |f| n += usize::from(f.is_fixpoint()));
        n
    }
}

/// Rename bound variables so that the result is well-named.
///
/// Binders are visited in pre-order; the first binder of a name keeps it and
/// later clashes get the smallest integer suffix that is not in use anywhere
/// in the formula. Already well-named input is returned unchanged.
pub fn well_name(phi: &Formula) -> Formula {
    let free = phi.free_vars();
    let mut used: HashSet<String> = phi.all_vars().into_iter().collect();
    let mut taken: HashSet<String> = free.iter().cloned().collect();
    let mut scope: Vec<(String, String)> = Vec::new();
    rename(phi, &mut used, &mut taken, &mut scope)
}

fn rename(
    f: &Formula,
    used: &mut HashSet<String>,
    taken: &mut HashSet<String>,
    scope: &mut Vec<(String, String)>,
) -> Formula {
    match f {
        Formula::Prop(_) | Formula::NegProp(_) => f.clone(),
        Formula::Var(x) => {
            let name =
                scope.iter().rev().find(|(orig, _)| orig == x).map(|(_, new)| new.clone()).unwrap_or_else(|| x.clone());
            Formula::Var(name)
        }
        Formula::And(l, r) => Formula::and(rename(l, used, taken, scope), rename(r, used, taken, scope)),
        Formula::Or(l, r) => Formula::or(rename(l, used, taken, scope), rename(r, used, taken, scope)),
        Formula::AtLeast(k, b) => Formula::at_least(*k, rename(b, used, taken, scope)),
        Formula::AllBut(k, b) => Formula::all_but(*k, rename(b, used, taken, scope)),
        Formula::Mu(x, b) | Formula::Nu(x, b) => {
            let new = if taken.contains(x) {
                let fresh = (1..)
                    .map(|i| format!("{x}{i}"))
                    .find(|cand| !used.contains(cand))
                    .expect("unbounded suffix search");
                used.insert(fresh.clone());
                fresh
            } else {
                x.clone()
            };
            taken.insert(new.clone());
            scope.push((x.clone(), new.clone()));
            let body = rename(b, used, taken, scope);
            scope.pop();
            match f {
                Formula::Mu(..) => Formula::Mu(new, Box::new(body)),
                _ => Formula::Nu(new, Box::new(body)),
            }
        }
    }
}

impl fmt::Display for Formula {
    /// Prints concrete syntax accepted by [`parse`]; compound operands are
    /// parenthesized so printing and parsing round-trip.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
            match g {
                Formula::Prop(_) | Formula::NegProp(_) | Formula::Var(_) => write!(f, "{g}"),
                Formula::AtLeast(..) | Formula::AllBut(..) => write!(f, "{g}"),
                _ => write!(f, "({g})"),
            }
        }
        match self {
            Formula::Prop(p) => write!(f, "{p}"),
            Formula::NegProp(p) => write!(f, "~{p}"),
            Formula::Var(x) => write!(f, "{x}"),
            Formula::And(l, r) => {
                operand(f, l)?;
                write!(f, " & ")?;
                operand(f, r)
            }
            Formula::Or(l, r) => {
                operand(f, l)?;
                write!(f, " | ")?;
                operand(f, r)
            }
            Formula::AtLeast(k, b) => {
                if *k == 1 {
                    write!(f, "<>")?;
                } else {
                    write!(f, "<{k}>")?;
                }
                operand(f, b)
            }
            Formula::AllBut(k, b) => {
                if *k == 1 {
                    write!(f, "[]")?;
                } else {
                    write!(f, "[{k}]")?;
                }
                operand(f, b)
            }
            Formula::Mu(x, b) => write!(f, "mu {x}.{b}"),
            Formula::Nu(x, b) => write!(f, "nu {x}.{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use parser::parse_raw;

    #[test]
    fn well_named_input_is_unchanged() {
        let phi = parse_raw("mu X.(p | <>X)").unwrap();
        assert_eq!(well_name(&phi), phi);
    }

    #[test]
    fn sibling_binders_are_renamed() {
        let phi = parse_raw("(mu X.<>X) | (mu X.p)").unwrap();
        assert_eq!(well_name(&phi), parse_raw("(mu X.<>X) | (mu X1.p)").unwrap());
    }

    #[test]
    fn shadowing_binder_is_renamed() {
        let phi = parse_raw("mu X.(X | mu X.p)").unwrap();
        assert_eq!(well_name(&phi), parse_raw("mu X.(X | mu X1.p)").unwrap());
        let phi = parse_raw("mu X.(X | mu X.<>X)").unwrap();
        assert_eq!(well_name(&phi), parse_raw("mu X.(X | mu X1.<>X1)").unwrap());
    }

    #[test]
    fn binder_clashing_with_free_variable_is_renamed() {
        let phi = parse_raw("X & nu X.[]X").unwrap();
        assert_eq!(well_name(&phi), parse_raw("X & nu X1.[]X1").unwrap());
    }

    #[test]
    fn fresh_suffix_avoids_existing_names() {
        let phi = parse_raw("(mu X.X) | (mu X.X) | (mu X1.X1)").unwrap();
        let named = well_name(&phi);
        assert!(named.is_well_named());
        assert_eq!(named, parse("(mu X.X) | (mu X2.X2) | (mu X1.X1)").unwrap());
    }

    #[test]
    fn depth_and_count() {
        let alpha = parse("mu Y.((p | <>Y) | mu X.(q & <>(Y | <>X)))").unwrap();
        assert_eq!(alpha.fixpoint_depth(), 2);
        assert_eq!(alpha.fixpoint_count(), 2);
        assert_eq!(alpha.size(), 14);
    }
}
