//! Coordinates of the per-node feature vector, and the translation between
//! extended configurations and feature matrices.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counting::{Configuration, ExtendedConfiguration};
use crate::formula::{SubId, SubformulaIndex, VarId};
use crate::graph::{LabeledGraph, NodeSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("node {node} has a vector of width {got}, expected {expected}")]
    Width { node: usize, expected: usize, got: usize },
    #[error("coordinate {coord} ({field}) of node {node} is {value}, expected 0 or 1")]
    NotBoolean { node: usize, coord: usize, field: String, value: i64 },
    #[error("coordinate {coord} ({field}) differs between node 0 and node {node}")]
    Disagree { node: usize, coord: usize, field: String },
    #[error("coordinate {coord} ({field}) of node {node} is {value}")]
    OutOfRange { node: usize, coord: usize, field: String, value: i64 },
}

/// First coordinate of each field block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offsets {
    pub labels: usize,
    pub k: usize,
    pub counters: usize,
    pub valuation: usize,
    pub results: usize,
    pub valid: usize,
    pub stable: usize,
    pub fix_stable: usize,
    pub residual: usize,
    pub halt: usize,
    pub pad: usize,
}

/// Coordinate assignment for one sentence. Blocks appear in the order
/// labels, `k`, `C`, `v`, `r`, `F`, `s`, `t`, `D`, halt, pad; within a block
/// entries follow proposition, variable or subformula order of the index.
///
/// The pad coordinate is constantly 1, so summing it over the out-neighbors
/// yields the out-degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub formula: String,
    pub props: Vec<String>,
    pub vars: Vec<String>,
    /// Subformulas by id.
    pub subformulas: Vec<String>,
    pub offsets: Offsets,
    pub dim: usize,
}

impl FeatureLayout {
    pub fn new(idx: &SubformulaIndex) -> Self {
        let p = idx.props().len();
        let v = idx.vars().len();
        let m = idx.len();
        let labels = 0;
        let k = labels + p;
        let counters = k + 1;
        let valuation = counters + v;
        let results = valuation + v;
        let valid = results + m;
        let stable = valid + m;
        let fix_stable = stable + m;
        let residual = fix_stable + v;
        let halt = residual + v;
        let pad = halt + 1;
        FeatureLayout {
            formula: idx.formula().to_string(),
            props: idx.props().to_vec(),
            vars: idx.vars().to_vec(),
            subformulas: (0..m).map(|i| idx.subformula(i).to_string()).collect(),
            offsets: Offsets {
                labels,
                k,
                counters,
                valuation,
                results,
                valid,
                stable,
                fix_stable,
                residual,
                halt,
                pad,
            },
            dim: pad + 1,
        }
    }

    pub fn label(&self, p: usize) -> usize {
        self.offsets.labels + p
    }

    pub fn k(&self) -> usize {
        self.offsets.k
    }

    pub fn counter(&self, x: VarId) -> usize {
        self.offsets.counters + x
    }

    pub fn var(&self, x: VarId) -> usize {
        self.offsets.valuation + x
    }

    pub fn result(&self, id: SubId) -> usize {
        self.offsets.results + id
    }

    pub fn valid(&self, id: SubId) -> usize {
        self.offsets.valid + id
    }

    pub fn stable(&self, id: SubId) -> usize {
        self.offsets.stable + id
    }

    pub fn fix_stable(&self, x: VarId) -> usize {
        self.offsets.fix_stable + x
    }

    pub fn residual(&self, x: VarId) -> usize {
        self.offsets.residual + x
    }

    pub fn halt(&self) -> usize {
        self.offsets.halt
    }

    pub fn pad(&self) -> usize {
        self.offsets.pad
    }

    /// The root subformula, which comes last.
    pub fn root(&self) -> SubId {
        self.subformulas.len() - 1
    }

    /// Human-readable name of a coordinate, e.g. `r(p | <1>X)`.
    pub fn field_name(&self, coord: usize) -> String {
        let o = &self.offsets;
        let nv = self.vars.len();
        let m = self.subformulas.len();
        let var = |base: usize, tag: &str| format!("{tag}({})", self.vars[coord - base]);
        let sub = |base: usize, tag: &str| format!("{tag}({})", self.subformulas[coord - base]);
        match coord {
            c if c < o.k => format!("label({})", self.props[c - o.labels]),
            c if c == o.k => "k".into(),
            c if c < o.counters + nv => var(o.counters, "C"),
            c if c < o.valuation + nv => var(o.valuation, "v"),
            c if c < o.results + m => sub(o.results, "r"),
            c if c < o.valid + m => sub(o.valid, "F"),
            c if c < o.stable + m => sub(o.stable, "s"),
            c if c < o.fix_stable + nv => var(o.fix_stable, "t"),
            c if c < o.residual + nv => var(o.residual, "D"),
            c if c == o.halt => "halt".into(),
            c if c == o.pad => "pad".into(),
            c => format!("#{c}"),
        }
    }

    /// Label coordinates of node `n`: propositions of the layout that the
    /// graph does not know are false.
    fn write_labels(&self, g: &LabeledGraph, n: usize, row: &mut [i64]) {
        for (i, p) in self.props.iter().enumerate() {
            row[self.label(i)] = g.holds(n, p) as i64;
        }
    }

    /// Feature matrix of `x` on `g`, one row per node. Global fields are
    /// replicated into every row.
    pub fn encode(&self, x: &ExtendedConfiguration, g: &LabeledGraph) -> Vec<Vec<i64>> {
        let c = &x.config;
        let root = self.root();
        let no_residual = x.residual.is_clear();
        (0..g.node_count())
            .map(|n| {
                let mut row = vec![0i64; self.dim];
                self.write_labels(g, n, &mut row);
                row[self.k()] = c.k as i64;
                for v in 0..self.vars.len() {
                    row[self.counter(v)] = c.counters[v] as i64;
                    row[self.var(v)] = c.valuation[v].contains(n) as i64;
                    row[self.fix_stable(v)] = c.fix_stable[v].contains(n) as i64;
                    row[self.residual(v)] = x.residual.contains(v) as i64;
                }
                for id in 0..self.subformulas.len() {
                    row[self.result(id)] = c.results[id].contains(n) as i64;
                    row[self.valid(id)] = c.valid.contains(id) as i64;
                    row[self.stable(id)] = c.stable[id].contains(n) as i64;
                }
                row[self.halt()] = (c.valid.contains(root) && c.stable[root].contains(n) && no_residual) as i64;
                row[self.pad()] = 1;
                row
            })
            .collect()
    }

    /// Inverse of [`encode`](Self::encode). Labels and the halt bit are not
    /// part of the configuration and are only checked for being boolean.
    pub fn decode(&self, h: &[Vec<i64>]) -> Result<ExtendedConfiguration, DecodeError> {
        let n = h.len();
        let nv = self.vars.len();
        let m = self.subformulas.len();
        for (node, row) in h.iter().enumerate() {
            if row.len() != self.dim {
                return Err(DecodeError::Width { node, expected: self.dim, got: row.len() });
            }
            for (coord, &value) in row.iter().enumerate() {
                let numeric = coord == self.k() || (self.counter(0)..self.counter(nv)).contains(&coord);
                if !numeric && !(0..=1).contains(&value) {
                    return Err(DecodeError::NotBoolean { node, coord, field: self.field_name(coord), value });
                }
            }
            let bad = |coord: usize| match coord {
                c if c == self.k() => row[c] < 1,
                c if c == self.pad() => row[c] != 1,
                c => row[c] < 0,
            };
            let checked = [self.k(), self.pad()].into_iter().chain(self.counter(0)..self.counter(nv));
            if let Some(coord) = checked.into_iter().find(|&c| bad(c)) {
                return Err(DecodeError::OutOfRange { node, coord, field: self.field_name(coord), value: row[coord] });
            }
        }

        let global = std::iter::once(self.k())
            .chain((0..nv).flat_map(|v| [self.counter(v), self.residual(v)]))
            .chain((0..m).map(|id| self.valid(id)));
        for coord in global {
            if let Some(node) = (1..n).find(|&i| h[i][coord] != h[0][coord]) {
                return Err(DecodeError::Disagree { node, coord, field: self.field_name(coord) });
            }
        }

        let set = |coord: usize| NodeSet::from_fn(n, |i| h[i][coord] == 1);
        let first = |coord: usize| h.first().map_or(0, |row| row[coord]);
        let mut valid = FixedBitSet::with_capacity(m);
        let mut residual = FixedBitSet::with_capacity(nv);
        for id in 0..m {
            valid.set(id, first(self.valid(id)) == 1);
        }
        for v in 0..nv {
            residual.set(v, first(self.residual(v)) == 1);
        }
        let config = Configuration {
            k: first(self.k()).max(1) as usize,
            counters: (0..nv).map(|v| first(self.counter(v)) as usize).collect(),
            valuation: (0..nv).map(|v| set(self.var(v))).collect(),
            results: (0..m).map(|id| set(self.result(id))).collect(),
            valid,
            stable: (0..m).map(|id| set(self.stable(id))).collect(),
            fix_stable: (0..nv).map(|v| set(self.fix_stable(v))).collect(),
        };
        Ok(ExtendedConfiguration { config, residual })
    }
}
