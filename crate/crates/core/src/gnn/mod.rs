//! Simple halting recurrent GNNs with exact integer arithmetic, and the
//! compiler from sentences to such GNNs.
//!
//! A [`RecurrentGnn`] consists of an initialisation map from label sets to
//! vectors, one aggregate-combine layer (sum over out-neighbors, then a
//! single [`Rfnn`] on `own | sum`), and two coordinates read by positivity:
//! the halting bit and the output bit.

mod circuit;
mod compile;
mod layout;
mod rfnn;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use circuit::{gadgets, Circuit, Lin, Wire};
pub use layout::{DecodeError, FeatureLayout, Offsets};
pub use rfnn::{Affine, Rfnn, RfnnError, WEIGHT_BOUND};

use crate::counting::step_bound;
use crate::formula::{Formula, SubformulaIndex};
use crate::graph::{LabeledGraph, NodeSet};

#[derive(Debug, Error)]
pub enum GnnError {
    #[error("GNN compilation needs a sentence, found free variables {0:?}")]
    NotSentence(Vec<String>),
    #[error("no complete run within {0} iterations")]
    Safeguard(u64),
    #[error(transparent)]
    Rfnn(#[from] RfnnError),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("cannot read or write model: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// The initialisation map: a base vector plus the coordinate each
/// proposition sets to 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Init {
    pub base: Vec<i64>,
    pub labels: Vec<(String, usize)>,
}

impl Init {
    /// The initial vector of a node labeled by the propositions for which
    /// `holds` is true.
    pub fn vector(&self, mut holds: impl FnMut(&str) -> bool) -> Vec<i64> {
        let mut x = self.base.clone();
        for (p, coord) in &self.labels {
            if holds(p) {
                x[*coord] = 1;
            }
        }
        x
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile")]
pub struct RecurrentGnn {
    dim: usize,
    layout: FeatureLayout,
    init: Init,
    layer: Rfnn,
    hlt_index: usize,
    out_index: usize,
}

#[derive(Deserialize)]
struct ModelFile {
    dim: usize,
    layout: FeatureLayout,
    init: Init,
    layer: Rfnn,
    hlt_index: usize,
    out_index: usize,
}

impl TryFrom<ModelFile> for RecurrentGnn {
    type Error = String;

    fn try_from(f: ModelFile) -> Result<Self, String> {
        let d = f.dim;
        if f.layout.dim != d || f.init.base.len() != d {
            return Err(format!("dimension {d} disagrees with layout or init"));
        }
        if f.layer.input_width() != 2 * d || f.layer.output_width() != d {
            return Err(format!(
                "layer maps {} to {}, expected {} to {d}",
                f.layer.input_width(),
                f.layer.output_width(),
                2 * d
            ));
        }
        if f.hlt_index >= d || f.out_index >= d || f.init.labels.iter().any(|&(_, c)| c >= d) {
            return Err("coordinate index out of range".into());
        }
        Ok(RecurrentGnn {
            dim: d,
            layout: f.layout,
            init: f.init,
            layer: f.layer,
            hlt_index: f.hlt_index,
            out_index: f.out_index,
        })
    }
}

/// Result of a GNN run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GnnRun {
    pub output: NodeSet,
    /// Number of layer applications until every node halted.
    pub iterations: u64,
    /// The final feature matrix.
    pub state: Vec<Vec<i64>>,
    /// Feature matrices `H_0, …, H_iterations`, if requested.
    pub trace: Vec<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the default iteration safeguard.
    pub max_iterations: Option<u64>,
    pub keep_trace: bool,
}

/// Compile a sentence into a GNN that computes its semantics on every
/// finite graph.
pub fn compile(phi: &Formula) -> Result<RecurrentGnn, GnnError> {
    let idx = SubformulaIndex::new(phi);
    if !idx.is_sentence() {
        return Err(GnnError::NotSentence(idx.free_vars().to_vec()));
    }
    let layout = FeatureLayout::new(&idx);
    let layer = compile::combine_network(&idx, &layout);
    assert!(layer.max_abs_weight() <= WEIGHT_BOUND, "weight bound exceeded");

    let d = layout.dim;
    let mut base = vec![0; d];
    base[layout.k()] = 1;
    for v in 0..idx.vars().len() {
        base[layout.var(v)] = idx.is_nu(idx.binder(v).unwrap()) as i64;
        base[layout.fix_stable(v)] = 1;
    }
    base[layout.pad()] = 1;
    let labels = idx.props().iter().enumerate().map(|(i, p)| (p.clone(), layout.label(i))).collect();
    Ok(RecurrentGnn {
        dim: d,
        hlt_index: layout.halt(),
        out_index: layout.result(idx.root()),
        init: Init { base, labels },
        layout,
        layer,
    })
}

impl RecurrentGnn {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    pub fn init(&self) -> &Init {
        &self.init
    }

    /// The combine network, of input width `2·dim`.
    pub fn layer(&self) -> &Rfnn {
        &self.layer
    }

    pub fn hlt_index(&self) -> usize {
        self.hlt_index
    }

    pub fn out_index(&self) -> usize {
        self.out_index
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GnnError> {
        serde_json::from_str(text).map_err(|e| if e.is_data() { GnnError::Model(e.to_string()) } else { e.into() })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GnnError> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GnnError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// `H_0`: the initialisation map lifted to every node of `g`.
    pub fn initial(&self, g: &LabeledGraph) -> Vec<Vec<i64>> {
        (0..g.node_count()).map(|n| self.init.vector(|p| g.holds(n, p))).collect()
    }

    /// One layer application: `H'(n) = f(H(n) | Σ_{m ∈ G[n]} H(m))`.
    pub fn apply_layer(&self, g: &LabeledGraph, h: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, GnnError> {
        let d = self.dim;
        let mut input = vec![0i64; 2 * d];
        let mut buf = (Vec::new(), Vec::new());
        let mut out = Vec::with_capacity(h.len());
        for (n, own) in h.iter().enumerate() {
            input[..d].copy_from_slice(own);
            input[d..].fill(0);
            for &m in g.succ(n) {
                for (acc, &v) in input[d..].iter_mut().zip(&h[m]) {
                    *acc = acc.checked_add(v).ok_or(RfnnError::Overflow)?;
                }
            }
            self.layer.eval_into(&input, &mut buf)?;
            out.push(buf.0.clone());
        }
        Ok(out)
    }

    /// Default iteration safeguard on a graph with `nodes` nodes.
    pub fn safeguard(&self, nodes: usize) -> u64 {
        step_bound(self.layout.subformulas.len(), self.layout.vars.len(), nodes).saturating_add(1)
    }

    pub fn run(&self, g: &LabeledGraph) -> Result<GnnRun, GnnError> {
        self.run_with(g, &RunOptions::default())
    }

    /// Apply the layer until every node's halting coordinate is positive.
    pub fn run_with(&self, g: &LabeledGraph, opts: &RunOptions) -> Result<GnnRun, GnnError> {
        let limit = opts.max_iterations.unwrap_or_else(|| self.safeguard(g.node_count()));
        let mut h = self.initial(g);
        let mut trace = Vec::new();
        if opts.keep_trace {
            trace.push(h.clone());
        }
        let mut iterations = 0;
        while !h.iter().all(|row| row[self.hlt_index] > 0) {
            if iterations >= limit {
                return Err(GnnError::Safeguard(limit));
            }
            h = self.apply_layer(g, &h)?;
            iterations += 1;
            if opts.keep_trace {
                trace.push(h.clone());
            }
        }
        let output = NodeSet::from_fn(g.node_count(), |n| h[n][self.out_index] > 0);
        Ok(GnnRun { output, iterations, state: h, trace })
    }
}

/// Run `gnn` on `g` with default options.
pub fn run_gnn(gnn: &RecurrentGnn, g: &LabeledGraph) -> Result<GnnRun, GnnError> {
    gnn.run(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::CountingMachine;
    use crate::formula::parse;
    use crate::gen::{random_formula, random_graph, rng, FormulaParams, GraphParams};
    use crate::graph::tests::g1;
    use crate::graph::Valuation;
    use crate::semantics::evaluate;

    fn gnn(s: &str) -> RecurrentGnn {
        compile(&parse(s).unwrap()).unwrap()
    }

    #[test]
    fn proposition() {
        let g = g1();
        let run = run_gnn(&gnn("p"), &g).unwrap();
        assert_eq!(run.output, NodeSet::from_indices(3, [2]));
        assert_eq!(run.iterations, 1);
    }

    #[test]
    fn empty_least_fixpoint() {
        let g = g1();
        assert!(run_gnn(&gnn("mu X.X"), &g).unwrap().output.is_empty());
    }

    #[test]
    fn reachability_matches_extended_run() {
        let g = g1();
        let phi = parse("mu X.(p | <>X)").unwrap();
        let run = compile(&phi).unwrap().run(&g).unwrap();
        assert_eq!(run.output, NodeSet::full(3));
        let (_, steps) = CountingMachine::new(&phi, &g).unwrap().run_extended(None).unwrap();
        assert_eq!(run.iterations, steps);
    }

    #[test]
    fn init_is_the_encoded_initial_configuration() {
        let g = g1();
        let phi = parse("nu Y.(mu X.(q | <>X) & [1]Y)").unwrap();
        let net = compile(&phi).unwrap();
        let m = CountingMachine::new(&phi, &g).unwrap();
        assert_eq!(net.initial(&g), net.layout().encode(&m.initial_extended(), &g));
    }

    #[test]
    fn lock_step_with_extended_run() {
        let g = g1();
        let phi = parse("mu Y.((p | <>Y) | nu X.(q & [2](Y | <>X)))").unwrap();
        let net = compile(&phi).unwrap();
        let m = CountingMachine::new(&phi, &g).unwrap();
        let lay = net.layout();
        let mut x = m.initial_extended();
        while !m.is_extended_done(&x) {
            let next = m.etrans_step(&x);
            assert_eq!(net.apply_layer(&g, &lay.encode(&x, &g)).unwrap(), lay.encode(&next, &g));
            x = next;
        }
    }

    #[test]
    fn agrees_with_evaluate_on_random_instances() {
        let mut r = rng(11);
        let (fp, gp) = (FormulaParams::default(), GraphParams::default());
        for _ in 0..40 {
            let phi = random_formula(&mut r, &fp);
            let g = random_graph(&mut r, &gp);
            let run = compile(&phi).unwrap().run(&g).unwrap();
            assert_eq!(run.output, evaluate(&phi, &g, &Valuation::new()).unwrap(), "{phi}");
        }
    }

    #[test]
    fn empty_graph_halts_immediately() {
        let run = gnn("mu X.(p | <>X)").run(&LabeledGraph::empty()).unwrap();
        assert_eq!(run.iterations, 0);
    }

    #[test]
    fn model_round_trip() {
        let net = gnn("mu X.(p | <2>X) & [1]~q");
        let back = RecurrentGnn::from_json(&net.to_json()).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_json(), net.to_json());
        let mut v: serde_json::Value = serde_json::from_str(&net.to_json()).unwrap();
        v["hlt_index"] = 100_000.into();
        assert!(matches!(RecurrentGnn::from_json(&v.to_string()), Err(GnnError::Model(_))));
    }

    #[test]
    fn open_formula_is_rejected() {
        assert!(matches!(compile(&parse("<>X").unwrap()), Err(GnnError::NotSentence(_))));
    }

    #[test]
    fn trace_has_one_snapshot_per_iteration_plus_initial() {
        let g = g1();
        let opts = RunOptions { keep_trace: true, ..Default::default() };
        let run = gnn("mu X.(p | <>X)").run_with(&g, &opts).unwrap();
        assert_eq!(run.trace.len() as u64, run.iterations + 1);
        assert!(matches!(
            gnn("mu X.(p | <>X)").run_with(&g, &RunOptions { max_iterations: Some(1), keep_trace: false }),
            Err(GnnError::Safeguard(1))
        ));
    }
}
