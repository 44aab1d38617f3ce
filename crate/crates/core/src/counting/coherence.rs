use std::fmt;

use super::{Configuration, CountingMachine};
use crate::formula::SubId;
use crate::graph::NodeSet;
use crate::semantics::Approximator;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    /// A counter exceeds `k - 1`.
    CounterBound,
    /// `V(X)` differs from the detail approximation of its binder.
    Sound,
    /// `R(α)` differs from the uniform approximation for a valid `α`.
    Result,
    /// A valid formula has an invalid direct subformula.
    Closure,
    /// A valid fixpoint has a counter below `k - 1`.
    Counter,
    /// `S(α)` is not the k-stable set for a valid `α`.
    Stability,
    /// `T(α)` is not the (C,k)-stable set.
    FixStability,
}

/// The first coherence clause a configuration violates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceViolation {
    pub clause: Clause,
    /// The offending subformula.
    pub formula: String,
    /// A node where the stored and expected sets differ, if the clause is
    /// about node sets.
    pub node: Option<usize>,
}

impl fmt::Display for CoherenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} violated at `{}`", self.clause, self.formula)?;
        if let Some(n) = self.node {
            write!(f, " (node {n})")?;
        }
        Ok(())
    }
}

fn witness(a: &NodeSet, b: &NodeSet) -> Option<usize> {
    a.agreement(b).complement().iter().next()
}

impl CountingMachine<'_> {
    /// Check soundness, consistency and stability tracking of `kappa`
    /// against the reference semantics.
    pub fn check_coherent(&self, kappa: &Configuration) -> Result<(), CoherenceViolation> {
        let idx = &self.idx;
        let k = kappa.k;
        let name = |id: SubId| idx.subformula(id).to_string();
        let fail = |clause, id, node| Err(CoherenceViolation { clause, formula: name(id), node });
        let mut ap = Approximator::new(idx, self.g);
        let mut env = kappa.valuation.clone();

        for x in 0..idx.vars().len() {
            let alpha = self.binder(x);
            if kappa.counters[x] + 1 > k {
                return fail(Clause::CounterBound, alpha, None);
            }
            let expected = ap.detail(alpha, kappa.counters[x], k, &mut env);
            if expected != kappa.valuation[x] {
                return fail(Clause::Sound, alpha, witness(&expected, &kappa.valuation[x]));
            }
        }
        for id in kappa.valid.ones() {
            let expected = ap.uniform(id, k, &mut env);
            if expected != kappa.results[id] {
                return fail(Clause::Result, id, witness(&expected, &kappa.results[id]));
            }
            if !self.subs_valid(kappa, id) {
                return fail(Clause::Closure, id, None);
            }
            if idx.is_fixpoint(id) && self.counter(kappa, id) + 1 != k {
                return fail(Clause::Counter, id, None);
            }
            let expected = ap.stable_set(id, k, &mut env);
            if expected != kappa.stable[id] {
                return fail(Clause::Stability, id, witness(&expected, &kappa.stable[id]));
            }
        }
        for x in 0..idx.vars().len() {
            let alpha = self.binder(x);
            let expected = ap.jk_stable_set(alpha, kappa.counters[x], k, &mut env);
            if expected != kappa.fix_stable[x] {
                return fail(Clause::FixStability, alpha, witness(&expected, &kappa.fix_stable[x]));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::graph::tests::g1;

    #[test]
    fn initial_configurations_are_coherent() {
        let g = g1();
        for s in ["mu X.(p | <>X)", "nu X.<>X", "mu Y.((p | <>Y) | mu X.(q & <>(Y | <>X)))"] {
            let m = CountingMachine::new(&parse(s).unwrap(), &g).unwrap();
            for k in 1..5 {
                assert_eq!(m.check_coherent(&m.initial(k)), Ok(()));
            }
        }
    }

    #[test]
    fn flipped_result_is_reported() {
        let g = g1();
        let m = CountingMachine::new(&parse("p & <>q").unwrap(), &g).unwrap();
        let mut c = m.trans1(&m.initial(1));
        let p = m.index().find(&parse("p").unwrap()).unwrap();
        let flipped = !c.results[p].contains(1);
        c.results[p].set(1, flipped);
        let v = m.check_coherent(&c).unwrap_err();
        assert_eq!((v.clause, v.formula.as_str(), v.node), (Clause::Result, "p", Some(1)));
    }

    #[test]
    fn whole_run_stays_coherent() {
        let g = g1();
        let m = CountingMachine::new(&parse("mu X.(p | <>X)").unwrap(), &g).unwrap();
        m.run_counting_observed(None, |_, c| assert_eq!(m.check_coherent(c), Ok(()))).unwrap();
    }
}
