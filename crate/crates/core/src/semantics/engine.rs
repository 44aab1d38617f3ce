use std::collections::HashMap;

use super::{modal_all_but, modal_at_least};
use crate::formula::{Node, SubId, SubformulaIndex};
use crate::graph::{LabeledGraph, NodeSet};

/// An environment indexed by [`VarId`](crate::formula::VarId).
pub type Env = [NodeSet];

type Key = (SubId, usize, usize, Vec<NodeSet>);

/// Index-based evaluator for exact, uniform and detail semantics and for
/// pointwise stability.
///
/// Results of adorned fixpoints and stability sets are memoized on the
/// values of the subformula's free variables only, since nothing else can
/// influence them.
pub struct Approximator<'a> {
    idx: &'a SubformulaIndex,
    g: &'a LabeledGraph,
    fix_memo: HashMap<Key, NodeSet>,
    stable_memo: HashMap<Key, NodeSet>,
}

impl<'a> Approximator<'a> {
    pub fn new(idx: &'a SubformulaIndex, g: &'a LabeledGraph) -> Self {
        Approximator { idx, g, fix_memo: HashMap::new(), stable_memo: HashMap::new() }
    }

    pub fn index(&self) -> &SubformulaIndex {
        self.idx
    }

    pub fn graph(&self) -> &LabeledGraph {
        self.g
    }

    /// An environment of the right width with every variable set to ∅.
    pub fn empty_env(&self) -> Vec<NodeSet> {
        vec![NodeSet::empty(self.g.node_count()); self.idx.vars().len()]
    }

    fn key(&self, id: SubId, i: usize, k: usize, env: &Env) -> Key {
        (id, i, k, self.idx.free(id).ones().map(|x| env[x].clone()).collect())
    }

    fn prop_set(&self, p: usize) -> NodeSet {
        self.g.label_set(&self.idx.props()[p])
    }

    /// Exact semantics by Kleene iteration.
    pub fn exact(&self, id: SubId, env: &mut Vec<NodeSet>) -> NodeSet {
        let n = self.g.node_count();
        match self.idx.node(id) {
            Node::Prop(p) => self.prop_set(p),
            Node::NegProp(p) => self.prop_set(p).complement(),
            Node::Var(x) => env[x].clone(),
            Node::And(l, r) => self.exact(l, env).intersection(&self.exact(r, env)),
            Node::Or(l, r) => self.exact(l, env).union(&self.exact(r, env)),
            Node::AtLeast(l, b) => modal_at_least(self.g, &self.exact(b, env), l),
            Node::AllBut(l, b) => modal_all_but(self.g, &self.exact(b, env), l),
            Node::Mu(x, b) | Node::Nu(x, b) => {
                let saved = env[x].clone();
                let mut s = if self.idx.is_mu(id) { NodeSet::empty(n) } else { NodeSet::full(n) };
                loop {
                    env[x] = s.clone();
                    let next = self.exact(b, env);
                    if next == s {
                        break;
                    }
                    s = next;
                }
                env[x] = saved;
                s
            }
        }
    }

    /// Uniform approximation: every fixpoint unfolded `k` times.
    pub fn uniform(&mut self, id: SubId, k: usize, env: &mut Vec<NodeSet>) -> NodeSet {
        match self.idx.node(id) {
            Node::Prop(p) => self.prop_set(p),
            Node::NegProp(p) => self.prop_set(p).complement(),
            Node::Var(x) => env[x].clone(),
            Node::And(l, r) => {
                let a = self.uniform(l, k, env);
                a.intersection(&self.uniform(r, k, env))
            }
            Node::Or(l, r) => {
                let a = self.uniform(l, k, env);
                a.union(&self.uniform(r, k, env))
            }
            Node::AtLeast(l, b) => modal_at_least(self.g, &self.uniform(b, k, env), l),
            Node::AllBut(l, b) => modal_all_but(self.g, &self.uniform(b, k, env), l),
            Node::Mu(..) | Node::Nu(..) => self.detail(id, k, k, env),
        }
    }

    /// Detail approximation of a fixpoint: outermost unfolded `i` times, inner
    /// fixpoints `k` times.
    pub fn detail(&mut self, id: SubId, i: usize, k: usize, env: &mut Vec<NodeSet>) -> NodeSet {
        let (x, b) = match self.idx.node(id) {
            Node::Mu(x, b) | Node::Nu(x, b) => (x, b),
            _ => panic!("detail approximation of a non-fixpoint"),
        };
        let key = self.key(id, i, k, env);
        if let Some(s) = self.fix_memo.get(&key) {
            return s.clone();
        }
        let n = self.g.node_count();
        let s = if i == 0 {
            if self.idx.is_mu(id) {
                NodeSet::empty(n)
            } else {
                NodeSet::full(n)
            }
        } else {
            let prev = self.detail(id, i - 1, k, env);
            let saved = std::mem::replace(&mut env[x], prev);
            let s = self.uniform(b, k, env);
            env[x] = saved;
            s
        };
        self.fix_memo.insert(key, s.clone());
        s
    }

    /// Nodes at which `id` is k-stable under `env`.
    pub fn stable_set(&mut self, id: SubId, k: usize, env: &mut Vec<NodeSet>) -> NodeSet {
        assert!(k >= 1, "stability is defined for k >= 1");
        let key = self.key(id, 0, k, env);
        if let Some(s) = self.stable_memo.get(&key) {
            return s.clone();
        }
        let n = self.g.node_count();
        let s = if self.idx.is_fixpoint(id) {
            let top = self.detail(id, k, k, env);
            let below = self.detail(id, k - 1, k, env);
            top.agreement(&below).intersection(&self.jk_stable_set(id, k, k, env))
        } else {
            let mut s = NodeSet::full(n);
            for c in self.idx.sub(id) {
                s = s.intersection(&self.stable_set(c, k, env));
            }
            s
        };
        self.stable_memo.insert(key, s.clone());
        s
    }

    /// Nodes at which fixpoint `id` is (j,k)-stable under `env`.
    pub fn jk_stable_set(&mut self, id: SubId, j: usize, k: usize, env: &mut Vec<NodeSet>) -> NodeSet {
        let (x, b) = match self.idx.node(id) {
            Node::Mu(x, b) | Node::Nu(x, b) => (x, b),
            _ => panic!("(j,k)-stability of a non-fixpoint"),
        };
        let mut s = NodeSet::full(self.g.node_count());
        for i in 0..j {
            let vi = self.detail(id, i, k, env);
            let saved = std::mem::replace(&mut env[x], vi);
            s = s.intersection(&self.stable_set(b, k, env));
            env[x] = saved;
        }
        s
    }
}
