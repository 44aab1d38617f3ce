//! Compiling a sentence into the combine network of one AC layer.
//!
//! The layer computes, per node, one extended step on the feature vector:
//! gated type-3, type-1 reading modal counts from the neighbor sum, type-2
//! with tick and reset conditions, and one countdown of residual counters.
//! Global conditions (completeness, empty residual set, ticks) only read
//! replicated coordinates, so every node reaches the same verdict.

use super::circuit::{Circuit, Lin};
use super::layout::FeatureLayout;
use super::rfnn::Rfnn;
use crate::formula::{Node, SubformulaIndex};

/// The combine network for `idx`, of input width `2d` (own vector, then
/// neighbor sum) and output width `d`.
pub(super) fn combine_network(idx: &SubformulaIndex, lay: &FeatureLayout) -> Rfnn {
    let d = lay.dim;
    let m = idx.len();
    let nv = idx.vars().len();
    let root = idx.root();
    let mut c = Circuit::with_nonnegative_inputs(2 * d);
    let x: Vec<Lin> = (0..d).map(|i| c.input(i)).collect();
    let y: Vec<Lin> = (0..d).map(|i| c.input(d + i)).collect();
    let body = |v: usize| idx.sub(idx.binder(v).unwrap())[0];
    let is_mu = |v: usize| idx.is_mu(idx.binder(v).unwrap());

    // type 3, applied when φ is valid and nothing is residual
    let residual: Vec<Lin> = (0..nv).map(|v| x[lay.residual(v)].clone()).collect();
    let any_residual = c.or_all(&residual);
    let g3 = c.and(&any_residual.not(), &x[lay.valid(root)]);
    let keep = g3.not();
    let k = x[lay.k()].plus(&g3);
    let counters: Vec<Lin> = (0..nv).map(|v| x[lay.counter(v)].clone()).collect();
    let mut val = Vec::with_capacity(nv);
    let mut fix = Vec::with_capacity(nv);
    for v in 0..nv {
        let cur = &x[lay.var(v)];
        val.push(if is_mu(v) { c.and(cur, &keep) } else { c.or(cur, &g3) });
        fix.push(c.or(&x[lay.fix_stable(v)], &g3));
    }
    let res3: Vec<Lin> = (0..m).map(|id| c.and(&x[lay.result(id)], &keep)).collect();
    let valid3: Vec<Lin> = (0..m).map(|id| c.and(&x[lay.valid(id)], &keep)).collect();
    let stable3: Vec<Lin> = (0..m).map(|id| c.and(&x[lay.stable(id)], &keep)).collect();
    // g3 only fires with an empty residual set, so these sums stay boolean
    let residual: Vec<Lin> = residual.iter().map(|r| r.plus(&g3)).collect();

    // type 1, applied when the residual set is still empty
    let g1 = if nv == 0 { Lin::constant(1) } else { any_residual.plus(&g3).not() };
    let degree = &y[lay.pad()];
    let mut res1 = Vec::with_capacity(m);
    for id in 0..m {
        let r = match idx.node(id) {
            Node::Prop(p) => x[lay.label(p)].clone(),
            Node::NegProp(p) => x[lay.label(p)].not(),
            Node::Var(v) => val[v].clone(),
            Node::And(a, b) => c.and(&res3[a], &res3[b]),
            Node::Or(a, b) => c.or(&res3[a], &res3[b]),
            Node::AtLeast(l, b) => {
                // neighbors were reset too when g3 fires
                let enough = c.clip(&y[lay.result(b)].offset(1 - l as i64));
                c.and(&enough, &keep)
            }
            Node::AllBut(l, b) => {
                let missing = degree.scale(-1).offset(l as i64);
                let after_reset = c.clip(&missing);
                let counted = c.clip(&missing.plus(&y[lay.result(b)]));
                c.mux(&g3, &after_reset, &counted)
            }
            Node::Mu(_, b) | Node::Nu(_, b) => res3[b].clone(),
        };
        res1.push(r);
    }
    let mut valid1 = Vec::with_capacity(m);
    let mut stable1 = Vec::with_capacity(m);
    for id in 0..m {
        let node = idx.node(id);
        let mut ok: Vec<Lin> = node.children().map(|ch| valid3[ch].clone()).collect();
        let mut st: Vec<Lin> = node.children().map(|ch| stable3[ch].clone()).collect();
        if let Node::Mu(v, b) | Node::Nu(v, b) = node {
            let behind = c.clip(&k.minus(&counters[v]).offset(-1));
            ok.push(behind.not());
            st.push(fix[v].clone());
            st.push(c.iff(&val[v], &res1[b]));
        }
        valid1.push(c.and_all(&ok));
        stable1.push(c.and_all(&st));
    }
    let results: Vec<Lin> = (0..m).map(|id| c.mux(&g1, &res1[id], &res3[id])).collect();
    let valid: Vec<Lin> = (0..m).map(|id| c.mux(&g1, &valid1[id], &valid3[id])).collect();
    let stable: Vec<Lin> = (0..m).map(|id| c.mux(&g1, &stable1[id], &stable3[id])).collect();

    // type 2, under the same gate as type 1
    let g2 = g1;
    let mut ticks = Vec::with_capacity(nv);
    for v in 0..nv {
        let alpha = idx.binder(v).unwrap();
        let mut conds = vec![valid[body(v)].clone(), c.clip(&k.minus(&counters[v]).offset(-1)), g2.clone()];
        for beta in idx.tfp(alpha) {
            let w = idx.bound_var(beta).unwrap();
            conds.push(c.eq(&counters[w], &k.offset(-1)));
        }
        ticks.push(c.and_all(&conds));
    }
    // a binder's free variables are bound further out, i.e. by higher ids
    let mut reset = vec![Lin::constant(0); nv];
    for v in (0..nv).rev() {
        let mut causes = vec![ticks[v].clone()];
        causes.extend(idx.free(idx.binder(v).unwrap()).ones().map(|z| reset[z].clone()));
        reset[v] = c.or_all(&causes);
    }
    let dep: Vec<Lin> = (0..nv).map(|v| reset[v].minus(&ticks[v])).collect();
    let mut counters2 = Vec::with_capacity(nv);
    let mut val2 = Vec::with_capacity(nv);
    let mut fix2 = Vec::with_capacity(nv);
    let mut residual2 = Vec::with_capacity(nv);
    for v in 0..nv {
        let untouched = reset[v].not();
        counters2.push(counters[v].plus(&ticks[v]));
        let mut next = c.and(&ticks[v], &results[body(v)]).plus(&c.and(&untouched, &val[v]));
        if !is_mu(v) {
            next = next.plus(&dep[v]);
        }
        val2.push(next);
        let advanced = c.and_all(&[ticks[v].clone(), fix[v].clone(), stable[body(v)].clone()]);
        fix2.push(advanced.plus(&dep[v]).plus(&c.and(&untouched, &fix[v])));
        residual2.push(residual[v].plus(&dep[v]));
    }
    let mut valid2 = Vec::with_capacity(m);
    for (id, ok) in valid.iter().enumerate() {
        let hit: Vec<Lin> = idx.free(id).ones().map(|z| reset[z].clone()).collect();
        let any = c.or_all(&hit);
        valid2.push(c.and(ok, &any.not()));
    }

    // countdown of residual counters
    let mut counters_r = Vec::with_capacity(nv);
    let mut residual_r = Vec::with_capacity(nv);
    for v in 0..nv {
        let positive = c.clip(&counters2[v]);
        let dec = c.and(&residual2[v], &positive);
        counters_r.push(counters2[v].minus(&dec));
        let more = c.clip(&counters2[v].offset(-1));
        residual_r.push(c.and(&residual2[v], &more));
    }
    let any_left = c.or_all(&residual_r);
    let halt = c.and_all(&[valid2[root].clone(), stable[root].clone(), any_left.not()]);

    let mut out = vec![Lin::constant(0); d];
    for p in 0..idx.props().len() {
        out[lay.label(p)] = x[lay.label(p)].clone();
    }
    out[lay.k()] = k;
    for v in 0..nv {
        out[lay.counter(v)] = counters_r[v].clone();
        out[lay.var(v)] = val2[v].clone();
        out[lay.fix_stable(v)] = fix2[v].clone();
        out[lay.residual(v)] = residual_r[v].clone();
    }
    for id in 0..m {
        out[lay.result(id)] = results[id].clone();
        out[lay.valid(id)] = valid2[id].clone();
        out[lay.stable(id)] = stable[id].clone();
    }
    out[lay.halt()] = halt;
    out[lay.pad()] = Lin::constant(1);
    c.build(&out)
}
