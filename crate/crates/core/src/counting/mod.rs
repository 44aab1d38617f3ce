//! The counting algorithm as an explicit transition system.
//!
//! A [`Configuration`] holds the bound `k`, a counter per fixpoint, the
//! valuation, per-subformula results `R`, the valid set `F`, stability sets
//! `S` and per-fixpoint stability sets `T`. Counters and `T` are indexed by
//! the bound variable, which is in bijection with the fixpoint subformulas.

mod coherence;
mod trace;

use fixedbitset::FixedBitSet;
use thiserror::Error;

pub use coherence::{Clause, CoherenceViolation};
pub use trace::TraceLine;

use crate::formula::{Formula, Node, SubId, SubformulaIndex, VarId};
use crate::graph::{LabeledGraph, NodeSet};
use crate::semantics::{modal_all_but, modal_at_least};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountingError {
    #[error("the counting algorithm needs a sentence, found free variables {0:?}")]
    NotSentence(Vec<String>),
    #[error("step safeguard of {0} exceeded")]
    Safeguard(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub k: usize,
    /// `C`, indexed by variable.
    pub counters: Vec<usize>,
    /// `V`, indexed by variable.
    pub valuation: Vec<NodeSet>,
    /// `R`, indexed by subformula.
    pub results: Vec<NodeSet>,
    /// `F`, a set of subformula ids.
    pub valid: FixedBitSet,
    /// `S`, indexed by subformula.
    pub stable: Vec<NodeSet>,
    /// `T`, indexed by variable.
    pub fix_stable: Vec<NodeSet>,
}

/// A configuration together with the residual set `D` of variables whose
/// counters still have to be counted down to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedConfiguration {
    pub config: Configuration,
    pub residual: FixedBitSet,
}

/// Ticking fixpoints, reset variables and dependent fixpoints, all as sets
/// of variable ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TickInfo {
    pub ticks: FixedBitSet,
    pub reset: FixedBitSet,
    pub dep: FixedBitSet,
}

/// Which transitions a step of a run applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Init,
    /// A type-3 transition moved to the next bound.
    Advance,
    /// Type-1 and type-2 transitions within one bound.
    Update,
    /// Only the reset transition acted.
    Countdown,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Init => "init",
            StepKind::Advance => "advance",
            StepKind::Update => "update",
            StepKind::Countdown => "countdown",
        }
    }
}

/// A single transition, reported to run observers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transition {
    Initial,
    Type1,
    Type2,
    Type3,
}

/// Step safeguard for a sentence with `subformulas` subformulas and
/// `fixpoints` fixpoints on a graph with `nodes` nodes:
/// `16·(|rsub|+2)·(N+2)^(|rfp|+2)`, saturating.
pub fn step_bound(subformulas: usize, fixpoints: usize, nodes: usize) -> u64 {
    let base = (nodes as u64).saturating_add(2);
    let exp = u32::try_from(fixpoints + 2).unwrap_or(u32::MAX);
    16u64.saturating_mul(subformulas as u64 + 2).saturating_mul(base.saturating_pow(exp))
}

/// Runs the counting algorithm for one sentence on one graph.
pub struct CountingMachine<'g> {
    idx: SubformulaIndex,
    g: &'g LabeledGraph,
}

impl<'g> CountingMachine<'g> {
    pub fn new(phi: &Formula, g: &'g LabeledGraph) -> Result<Self, CountingError> {
        Self::from_index(SubformulaIndex::new(phi), g)
    }

    pub fn from_index(idx: SubformulaIndex, g: &'g LabeledGraph) -> Result<Self, CountingError> {
        if !idx.is_sentence() {
            return Err(CountingError::NotSentence(idx.free_vars().to_vec()));
        }
        Ok(CountingMachine { idx, g })
    }

    pub fn index(&self) -> &SubformulaIndex {
        &self.idx
    }

    pub fn graph(&self) -> &LabeledGraph {
        self.g
    }

    fn n(&self) -> usize {
        self.g.node_count()
    }

    fn nvars(&self) -> usize {
        self.idx.vars().len()
    }

    fn var_of(&self, alpha: SubId) -> VarId {
        self.idx.bound_var(alpha).expect("fixpoint subformula")
    }

    fn binder(&self, x: VarId) -> SubId {
        self.idx.binder(x).expect("sentence has no free variables")
    }

    /// `C(α)` for a fixpoint subformula.
    pub fn counter(&self, kappa: &Configuration, alpha: SubId) -> usize {
        kappa.counters[self.var_of(alpha)]
    }

    /// Initial valuation value of `x`: ∅ for μ, all nodes for ν.
    fn bottom(&self, x: VarId) -> NodeSet {
        if self.idx.is_mu(self.binder(x)) {
            NodeSet::empty(self.n())
        } else {
            NodeSet::full(self.n())
        }
    }

    /// The initial configuration for bound `k`.
    ///
    /// `T` starts as all nodes: with every counter at zero, (0,k)-stability
    /// holds vacuously everywhere.
    pub fn initial(&self, k: usize) -> Configuration {
        assert!(k >= 1);
        let n = self.n();
        let m = self.idx.len();
        Configuration {
            k,
            counters: vec![0; self.nvars()],
            valuation: (0..self.nvars()).map(|x| self.bottom(x)).collect(),
            results: vec![NodeSet::empty(n); m],
            valid: FixedBitSet::with_capacity(m),
            stable: vec![NodeSet::empty(n); m],
            fix_stable: vec![NodeSet::full(n); self.nvars()],
        }
    }

    pub fn initial_extended(&self) -> ExtendedConfiguration {
        ExtendedConfiguration { config: self.initial(1), residual: FixedBitSet::with_capacity(self.nvars()) }
    }

    pub fn is_complete(&self, kappa: &Configuration) -> bool {
        kappa.valid.contains(self.idx.root())
    }

    pub fn is_stable(&self, kappa: &Configuration) -> bool {
        kappa.stable[self.idx.root()].is_full()
    }

    fn subs_valid(&self, kappa: &Configuration, alpha: SubId) -> bool {
        self.idx.node(alpha).children().all(|c| kappa.valid.contains(c))
    }

    pub fn ticks_reset_dep(&self, kappa: &Configuration) -> TickInfo {
        let nv = self.nvars();
        let k = kappa.k;
        let mut ticks = FixedBitSet::with_capacity(nv);
        for x in 0..nv {
            let alpha = self.binder(x);
            let ready = self.subs_valid(kappa, alpha)
                && kappa.counters[x] + 1 < k
                && self.idx.tfp(alpha).all(|beta| self.counter(kappa, beta) + 1 == k);
            ticks.set(x, ready);
        }
        let mut reset = ticks.clone();
        loop {
            let mut grown = reset.clone();
            for y in 0..nv {
                if !self.idx.free(self.binder(y)).is_disjoint(&reset) {
                    grown.insert(y);
                }
            }
            if grown == reset {
                break;
            }
            reset = grown;
        }
        let mut dep = reset.clone();
        dep.difference_with(&ticks);
        TickInfo { ticks, reset, dep }
    }

    /// Type-1 transition: recompute `R`, `F` and `S` from the current values.
    pub fn trans1(&self, kappa: &Configuration) -> Configuration {
        let g = self.g;
        let n = self.n();
        let m = self.idx.len();
        let k = kappa.k;
        let r = &kappa.results;
        let mut results = Vec::with_capacity(m);
        for id in 0..m {
            results.push(match self.idx.node(id) {
                Node::Prop(p) => g.label_set(&self.idx.props()[p]),
                Node::NegProp(p) => g.label_set(&self.idx.props()[p]).complement(),
                Node::Var(x) => kappa.valuation[x].clone(),
                Node::And(a, b) => r[a].intersection(&r[b]),
                Node::Or(a, b) => r[a].union(&r[b]),
                Node::AtLeast(l, b) => modal_at_least(g, &r[b], l),
                Node::AllBut(l, b) => modal_all_but(g, &r[b], l),
                Node::Mu(_, b) | Node::Nu(_, b) => r[b].clone(),
            });
        }
        let mut valid = FixedBitSet::with_capacity(m);
        for id in 0..m {
            let ok = self.subs_valid(kappa, id) && !(self.idx.is_fixpoint(id) && self.counter(kappa, id) + 1 < k);
            valid.set(id, ok);
        }
        let mut stable = Vec::with_capacity(m);
        for id in 0..m {
            stable.push(match self.idx.node(id) {
                Node::Mu(x, b) | Node::Nu(x, b) => kappa.stable[b]
                    .intersection(&kappa.fix_stable[x])
                    .intersection(&kappa.valuation[x].agreement(&results[b])),
                node => node.children().fold(NodeSet::full(n), |s, c| s.intersection(&kappa.stable[c])),
            });
        }
        Configuration { results, valid, stable, ..kappa.clone() }
    }

    fn trans2_with(&self, kappa: &Configuration, retain_dep: bool) -> (Configuration, FixedBitSet) {
        let info = self.ticks_reset_dep(kappa);
        let mut out = kappa.clone();
        for x in 0..self.nvars() {
            let alpha = self.binder(x);
            if info.ticks.contains(x) {
                let body = self.idx.sub(alpha)[0];
                out.counters[x] += 1;
                out.valuation[x] = kappa.results[body].clone();
                out.fix_stable[x] = kappa.fix_stable[x].intersection(&kappa.stable[body]);
            } else if info.dep.contains(x) {
                if !retain_dep {
                    out.counters[x] = 0;
                }
                out.valuation[x] = self.bottom(x);
                out.fix_stable[x] = NodeSet::full(self.n());
            }
        }
        for id in kappa.valid.ones() {
            if !self.idx.free(id).is_disjoint(&info.reset) {
                out.valid.set(id, false);
            }
        }
        (out, info.dep)
    }

    /// Type-2 transition: advance ticking fixpoints and reset their dependents.
    pub fn trans2(&self, kappa: &Configuration) -> Configuration {
        self.trans2_with(kappa, false).0
    }

    /// Type-3 transition: move to bound `k+1` once φ is valid.
    pub fn trans3(&self, kappa: &Configuration) -> Configuration {
        if self.is_complete(kappa) {
            self.initial(kappa.k + 1)
        } else {
            kappa.clone()
        }
    }

    /// Like [`trans2`](Self::trans2) but dependent counters are kept and
    /// recorded in the residual set.
    pub fn partial_trans2(&self, kappa: &Configuration) -> ExtendedConfiguration {
        let (config, residual) = self.trans2_with(kappa, true);
        ExtendedConfiguration { config, residual }
    }

    /// Like [`trans3`](Self::trans3) but all counters are kept and every
    /// variable becomes residual. The identity with empty residual set when
    /// κ is incomplete.
    pub fn partial_trans3(&self, kappa: &Configuration) -> ExtendedConfiguration {
        let mut residual = FixedBitSet::with_capacity(self.nvars());
        if !self.is_complete(kappa) {
            return ExtendedConfiguration { config: kappa.clone(), residual };
        }
        let mut config = self.initial(kappa.k + 1);
        config.counters = kappa.counters.clone();
        residual.insert_range(..);
        ExtendedConfiguration { config, residual }
    }

    /// Count residual counters down by one; a variable leaves the residual
    /// set once its counter reaches zero.
    pub fn reset_transition(&self, x: &ExtendedConfiguration) -> ExtendedConfiguration {
        let mut out = x.clone();
        for v in x.residual.ones() {
            let c = x.config.counters[v];
            if c > 0 {
                out.config.counters[v] = c - 1;
            }
            out.residual.set(v, c > 1);
        }
        out
    }

    /// One application of extended type-3, type-1, type-2 and one reset
    /// transition. Each extended transition is the identity while the
    /// residual set is non-empty.
    pub fn etrans_step(&self, x: &ExtendedConfiguration) -> ExtendedConfiguration {
        self.etrans_step_kind(x).0
    }

    pub fn etrans_step_kind(&self, x: &ExtendedConfiguration) -> (ExtendedConfiguration, StepKind) {
        let mut cur = x.clone();
        let mut kind = StepKind::Countdown;
        if cur.residual.is_clear() {
            kind = if self.is_complete(&cur.config) { StepKind::Advance } else { StepKind::Update };
            cur = self.partial_trans3(&cur.config);
        }
        if cur.residual.is_clear() {
            cur.config = self.trans1(&cur.config);
        }
        if cur.residual.is_clear() {
            cur = self.partial_trans2(&cur.config);
        }
        (self.reset_transition(&cur), kind)
    }

    /// Step bound beyond which a run is considered divergent.
    pub fn safeguard(&self) -> u64 {
        step_bound(self.idx.len(), self.idx.fixpoints().len(), self.n())
    }

    pub fn is_done(&self, kappa: &Configuration) -> bool {
        self.is_complete(kappa) && self.is_stable(kappa)
    }

    /// Iterate type-3, type-1, type-2 from the initial configuration at
    /// `k = 1` until complete and stable. Returns the final configuration and
    /// the number of steps.
    pub fn run_counting(&self, max_steps: Option<u64>) -> Result<(Configuration, u64), CountingError> {
        self.run_counting_observed(max_steps, |_, _| {})
    }

    /// [`run_counting`](Self::run_counting), calling `obs` after every
    /// individual transition.
    pub fn run_counting_observed(
        &self,
        max_steps: Option<u64>,
        mut obs: impl FnMut(Transition, &Configuration),
    ) -> Result<(Configuration, u64), CountingError> {
        let limit = max_steps.unwrap_or_else(|| self.safeguard());
        let mut kappa = self.initial(1);
        obs(Transition::Initial, &kappa);
        let mut steps = 0;
        while !self.is_done(&kappa) {
            if steps >= limit {
                return Err(CountingError::Safeguard(limit));
            }
            kappa = self.trans3(&kappa);
            obs(Transition::Type3, &kappa);
            kappa = self.trans1(&kappa);
            obs(Transition::Type1, &kappa);
            kappa = self.trans2(&kappa);
            obs(Transition::Type2, &kappa);
            steps += 1;
        }
        Ok((kappa, steps))
    }

    pub fn is_extended_done(&self, x: &ExtendedConfiguration) -> bool {
        x.residual.is_clear() && self.is_done(&x.config)
    }

    /// Iterate [`etrans_step`](Self::etrans_step) from the initial extended
    /// configuration until complete, stable and with empty residual set.
    pub fn run_extended(&self, max_steps: Option<u64>) -> Result<(ExtendedConfiguration, u64), CountingError> {
        self.run_extended_observed(max_steps, |_, _, _| {})
    }

    /// [`run_extended`](Self::run_extended), calling `obs(step, kind, x)` on
    /// the initial configuration and after every step.
    pub fn run_extended_observed(
        &self,
        max_steps: Option<u64>,
        mut obs: impl FnMut(u64, StepKind, &ExtendedConfiguration),
    ) -> Result<(ExtendedConfiguration, u64), CountingError> {
        let limit = max_steps.unwrap_or_else(|| self.safeguard());
        let mut x = self.initial_extended();
        obs(0, StepKind::Init, &x);
        let mut steps = 0;
        while !self.is_extended_done(&x) {
            if steps >= limit {
                return Err(CountingError::Safeguard(limit));
            }
            let (next, kind) = self.etrans_step_kind(&x);
            x = next;
            steps += 1;
            obs(steps, kind, &x);
        }
        Ok((x, steps))
    }

    /// R(φ) of a configuration.
    pub fn answer(&self, kappa: &Configuration) -> NodeSet {
        kappa.results[self.idx.root()].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::graph::tests::g1;
    use crate::graph::Valuation;
    use crate::semantics::{adorn, evaluate_adorned};

    fn machine<'g>(s: &str, g: &'g LabeledGraph) -> CountingMachine<'g> {
        CountingMachine::new(&parse(s).unwrap(), g).unwrap()
    }

    #[test]
    fn initial_configuration() {
        let g = g1();
        let m = machine("mu X.(p | <>X)", &g);
        let c = m.initial(1);
        assert!(c.valuation[0].is_empty());
        assert_eq!(c.counters, vec![0]);
        assert!(c.valid.is_clear());
        let m = machine("nu X.<>X", &g);
        assert!(m.initial(2).valuation[0].is_full());
    }

    #[test]
    fn open_formula_is_rejected() {
        let g = g1();
        assert!(matches!(CountingMachine::new(&parse("X").unwrap(), &g), Err(CountingError::NotSentence(_))));
    }

    #[test]
    fn nothing_ticks_at_bound_one() {
        let g = g1();
        let m = machine("mu X.(p | <>X)", &g);
        let c = m.trans1(&m.trans1(&m.trans1(&m.initial(1))));
        assert!(m.ticks_reset_dep(&c).ticks.is_clear());
        assert_eq!(m.trans2(&c), c);
    }

    #[test]
    fn type1_reads_labels() {
        let g = g1();
        let m = machine("p | ~p", &g);
        let c = m.trans1(&m.initial(1));
        let p = m.index().find(&parse("p").unwrap()).unwrap();
        let np = m.index().find(&parse("~p").unwrap()).unwrap();
        assert_eq!(c.results[p], NodeSet::from_indices(3, [2]));
        assert_eq!(c.results[np], NodeSet::from_indices(3, [0, 1]));
    }

    #[test]
    fn first_tick_of_reachability() {
        let g = g1();
        let phi = parse("mu X.(p | <>X)").unwrap();
        let m = CountingMachine::new(&phi, &g).unwrap();
        let mut c = m.initial(2);
        // p, X and <>X become valid, then p | <>X, then the body ticks
        for _ in 0..3 {
            c = m.trans1(&c);
        }
        let ticked = m.trans2(&c);
        assert_eq!(ticked.counters, vec![1]);
        let expected = evaluate_adorned(&adorn(&phi, 1, 2), &g, &Valuation::new()).unwrap();
        assert_eq!(ticked.valuation[0], expected);
        assert_eq!(expected, NodeSet::from_indices(3, [2]));
    }

    #[test]
    fn type3() {
        let g = g1();
        let m = machine("p", &g);
        let c = m.initial(1);
        assert_eq!(m.trans3(&c), c);
        let done = m.trans1(&c);
        assert_eq!(m.trans3(&done), m.initial(2));
    }

    #[test]
    fn runs_on_g1() {
        let g = g1();
        let m = machine("mu X.(p | <>X)", &g);
        let (c, _) = m.run_counting(None).unwrap();
        assert_eq!(m.answer(&c), NodeSet::full(3));
        assert_eq!(c.k, 4);
        let (x, _) = m.run_extended(None).unwrap();
        assert_eq!(x.config, c);

        let m = machine("p", &g);
        let (c, steps) = m.run_counting(None).unwrap();
        assert_eq!((c.k, steps), (1, 1));
        assert_eq!(m.answer(&c), NodeSet::from_indices(3, [2]));
    }

    #[test]
    fn reset_arithmetic() {
        let g = g1();
        let m = machine("mu X.(p | <>X)", &g);
        let mut x = m.initial_extended();
        x.config.counters[0] = 3;
        x.residual.insert(0);
        let y = m.reset_transition(&x);
        assert_eq!(y.config.counters[0], 2);
        assert!(y.residual.contains(0));
        assert_eq!(m.etrans_step(&x), y);
        x.config.counters[0] = 1;
        let y = m.reset_transition(&x);
        assert_eq!(y.config.counters[0], 0);
        assert!(y.residual.is_clear());
    }

    #[test]
    fn partial_transitions() {
        let g = g1();
        let m = machine("mu X.(p | <>X)", &g);
        let c = m.trans1(&m.initial(1));
        let x = m.partial_trans2(&c);
        assert_eq!((x.config, x.residual.is_clear()), (m.trans2(&c), true));
        let mut done = m.run_counting(None).unwrap().0;
        done.counters[0] = 2;
        let x = m.partial_trans3(&done);
        let mut expected = m.initial(done.k + 1);
        expected.counters[0] = 2;
        assert_eq!(x.config, expected);
        assert_eq!(x.residual.count_ones(..), 1);
    }

    #[test]
    fn safeguard_trips() {
        let g = g1();
        let m = machine("mu X.(p | <>X)", &g);
        assert_eq!(m.run_counting(Some(2)), Err(CountingError::Safeguard(2)));
        assert!(m.run_extended(Some(2)).is_err());
    }
}
