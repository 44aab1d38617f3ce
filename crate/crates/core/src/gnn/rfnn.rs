//! ReLU feedforward networks with integer weights, evaluated exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest weight or bias magnitude a compiled network may contain.
pub const WEIGHT_BOUND: i64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RfnnError {
    #[error("input has width {got}, network expects {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("integer overflow during evaluation")]
    Overflow,
    #[error("malformed layer: {0}")]
    Malformed(String),
}

/// An affine map `x ↦ Wx + b` with a sparse row-major weight matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "AffineFile", try_from = "AffineFile")]
pub struct Affine {
    rows: usize,
    cols: usize,
    row_start: Vec<usize>,
    col: Vec<usize>,
    val: Vec<i64>,
    bias: Vec<i64>,
}

/// Serialized form: weights as `[row, col, value]` triples.
#[derive(Serialize, Deserialize)]
struct AffineFile {
    rows: usize,
    cols: usize,
    weights: Vec<(usize, usize, i64)>,
    bias: Vec<i64>,
}

impl From<Affine> for AffineFile {
    fn from(a: Affine) -> Self {
        let weights = (0..a.rows).flat_map(|r| a.row(r).map(move |(c, w)| (r, c, w))).collect();
        AffineFile { rows: a.rows, cols: a.cols, weights, bias: a.bias }
    }
}

impl TryFrom<AffineFile> for Affine {
    type Error = RfnnError;

    fn try_from(f: AffineFile) -> Result<Self, RfnnError> {
        if f.bias.len() != f.rows {
            return Err(RfnnError::Malformed(format!("{} rows but {} biases", f.rows, f.bias.len())));
        }
        let mut rows: Vec<Vec<(usize, i64)>> = vec![Vec::new(); f.rows];
        for (r, c, w) in f.weights {
            if r >= f.rows || c >= f.cols {
                return Err(RfnnError::Malformed(format!("weight ({r}, {c}) outside {}x{}", f.rows, f.cols)));
            }
            rows[r].push((c, w));
        }
        Ok(Affine::from_rows(f.cols, rows, f.bias))
    }
}

impl Affine {
    /// Build from per-row `(column, weight)` lists. Duplicate columns are
    /// summed and zero weights dropped.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, i64)>>, bias: Vec<i64>) -> Self {
        assert_eq!(rows.len(), bias.len());
        let mut row_start = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for mut row in rows.into_iter() {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, i64)> = Vec::with_capacity(row.len());
            for (c, w) in row {
                assert!(c < cols, "column {c} out of range {cols}");
                match merged.last_mut() {
                    Some((lc, lw)) if *lc == c => *lw += w,
                    _ => merged.push((c, w)),
                }
            }
            for (c, w) in merged.into_iter().filter(|&(_, w)| w != 0) {
                col.push(c);
                val.push(w);
            }
            row_start.push(col.len());
        }
        Affine { rows: bias.len(), cols, row_start, col, val, bias }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_rows(d, (0..d).map(|i| vec![(i, 1)]).collect(), vec![0; d])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bias(&self) -> &[i64] {
        &self.bias
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let span = self.row_start[r]..self.row_start[r + 1];
        self.col[span.clone()].iter().copied().zip(self.val[span].iter().copied())
    }

    pub fn nonzeros(&self) -> usize {
        self.val.len()
    }

    pub fn max_abs(&self) -> i64 {
        self.val.iter().chain(&self.bias).map(|v| v.abs()).max().unwrap_or(0)
    }

    fn apply(&self, x: &[i64], out: &mut Vec<i64>) -> Result<(), RfnnError> {
        out.clear();
        for r in 0..self.rows {
            let mut acc = self.bias[r];
            for (c, w) in self.row(r) {
                acc = w.checked_mul(x[c]).and_then(|p| acc.checked_add(p)).ok_or(RfnnError::Overflow)?;
            }
            out.push(acc);
        }
        Ok(())
    }

    fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|r| self.bias[r] as f64 + self.row(r).map(|(c, w)| w as f64 * x[c]).sum::<f64>()).collect()
    }

    fn to_rows(&self) -> Vec<Vec<(usize, i64)>> {
        (0..self.rows).map(|r| self.row(r).collect()).collect()
    }

    /// `next ∘ self` as a single affine map.
    fn then(&self, next: &Affine) -> Affine {
        assert_eq!(next.cols, self.rows);
        let mut rows = Vec::with_capacity(next.rows);
        let mut bias = Vec::with_capacity(next.rows);
        for r in 0..next.rows {
            let mut row = Vec::new();
            let mut b = next.bias[r];
            for (j, w) in next.row(r) {
                b += w * self.bias[j];
                row.extend(self.row(j).map(|(c, v)| (c, w * v)));
            }
            rows.push(row);
            bias.push(b);
        }
        Affine::from_rows(self.cols, rows, bias)
    }
}

/// `A_l ∘ relu ∘ … ∘ relu ∘ A_1`: ReLU between consecutive affine layers,
/// none after the last.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<Affine>", try_from = "Vec<Affine>")]
pub struct Rfnn {
    layers: Vec<Affine>,
}

impl From<Rfnn> for Vec<Affine> {
    fn from(f: Rfnn) -> Self {
        f.layers
    }
}

impl TryFrom<Vec<Affine>> for Rfnn {
    type Error = RfnnError;

    fn try_from(layers: Vec<Affine>) -> Result<Self, RfnnError> {
        Rfnn::new(layers)
    }
}

impl Rfnn {
    pub fn new(layers: Vec<Affine>) -> Result<Self, RfnnError> {
        if layers.is_empty() {
            return Err(RfnnError::Malformed("no layers".into()));
        }
        for w in layers.windows(2) {
            if w[0].rows != w[1].cols {
                return Err(RfnnError::Malformed(format!("layer widths {} and {} do not chain", w[0].rows, w[1].cols)));
            }
        }
        Ok(Rfnn { layers })
    }

    pub fn identity(d: usize) -> Self {
        Rfnn { layers: vec![Affine::identity(d)] }
    }

    pub fn layers(&self) -> &[Affine] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().unwrap().rows
    }

    /// Number of affine layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Number of ReLU units.
    pub fn hidden_units(&self) -> usize {
        self.layers[..self.layers.len() - 1].iter().map(|a| a.rows).sum()
    }

    pub fn nonzeros(&self) -> usize {
        self.layers.iter().map(Affine::nonzeros).sum()
    }

    pub fn max_abs_weight(&self) -> i64 {
        self.layers.iter().map(Affine::max_abs).max().unwrap_or(0)
    }

    /// Exact evaluation with overflow checks.
    pub fn eval(&self, x: &[i64]) -> Result<Vec<i64>, RfnnError> {
        let mut buf = (Vec::new(), Vec::new());
        self.eval_into(x, &mut buf)?;
        Ok(buf.0)
    }

    /// [`eval`](Self::eval) reusing caller-provided buffers; the result is
    /// left in `buf.0`.
    pub fn eval_into(&self, x: &[i64], buf: &mut (Vec<i64>, Vec<i64>)) -> Result<(), RfnnError> {
        if x.len() != self.input_width() {
            return Err(RfnnError::WidthMismatch { expected: self.input_width(), got: x.len() });
        }
        let (cur, next) = buf;
        cur.clear();
        cur.extend_from_slice(x);
        let last = self.layers.len() - 1;
        for (i, a) in self.layers.iter().enumerate() {
            a.apply(cur, next)?;
            if i < last {
                for v in next.iter_mut() {
                    *v = (*v).max(0);
                }
            }
            std::mem::swap(cur, next);
        }
        Ok(())
    }

    /// Floating-point evaluation, for inspection only.
    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>, RfnnError> {
        if x.len() != self.input_width() {
            return Err(RfnnError::WidthMismatch { expected: self.input_width(), got: x.len() });
        }
        let mut cur = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, a) in self.layers.iter().enumerate() {
            cur = a.apply_f64(&cur);
            if i < last {
                cur.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        Ok(cur)
    }

    /// `next ∘ self`, merging the boundary affine layers.
    pub fn compose(&self, next: &Rfnn) -> Rfnn {
        assert_eq!(self.output_width(), next.input_width(), "widths do not chain");
        let mut layers = self.layers[..self.layers.len() - 1].to_vec();
        layers.push(self.layers.last().unwrap().then(&next.layers[0]));
        layers.extend_from_slice(&next.layers[1..]);
        Rfnn { layers }
    }

    /// One more layer, computing the same function via `x = relu(x) - relu(-x)`.
    fn deepen(&self) -> Rfnn {
        let last = self.layers.last().unwrap();
        let m = last.rows;
        let mut rows = last.to_rows();
        rows.extend(last.to_rows().into_iter().map(|r| r.into_iter().map(|(c, w)| (c, -w)).collect()));
        let mut bias = last.bias.clone();
        bias.extend(last.bias.iter().map(|b| -b));
        let split = Affine::from_rows(last.cols, rows, bias);
        let join = Affine::from_rows(2 * m, (0..m).map(|i| vec![(i, 1), (m + i, -1)]).collect(), vec![0; m]);
        let mut layers = self.layers[..self.layers.len() - 1].to_vec();
        layers.push(split);
        layers.push(join);
        Rfnn { layers }
    }

    fn deepen_to(&self, depth: usize) -> Rfnn {
        let mut f = self.clone();
        while f.depth() < depth {
            f = f.deepen();
        }
        f
    }

    /// `(x | y) ↦ (self(x) | other(y))`.
    pub fn parallel(&self, other: &Rfnn) -> Rfnn {
        let depth = self.depth().max(other.depth());
        let (f, g) = (self.deepen_to(depth), other.deepen_to(depth));
        let layers = f
            .layers
            .iter()
            .zip(&g.layers)
            .map(|(a, b)| {
                let mut rows = a.to_rows();
                rows.extend(b.to_rows().into_iter().map(|r| r.into_iter().map(|(c, w)| (c + a.cols, w)).collect()));
                let mut bias = a.bias.clone();
                bias.extend_from_slice(&b.bias);
                Affine::from_rows(a.cols + b.cols, rows, bias)
            })
            .collect();
        Rfnn { layers }
    }

    /// `x ↦ (self(x) | other(x))`.
    pub fn concat(&self, other: &Rfnn) -> Rfnn {
        let d = self.input_width();
        assert_eq!(d, other.input_width(), "concat needs equal input widths");
        let dup = Affine::from_rows(d, (0..2 * d).map(|i| vec![(i % d, 1)]).collect(), vec![0; 2 * d]);
        Rfnn { layers: vec![dup] }.compose(&self.parallel(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip() -> Rfnn {
        let a1 = Affine::from_rows(1, vec![vec![(0, 1)], vec![(0, 1)]], vec![0, -1]);
        let a2 = Affine::from_rows(2, vec![vec![(0, 1), (1, -1)]], vec![0]);
        let a3 = Affine::identity(1);
        Rfnn::new(vec![a1, a2, a3]).unwrap()
    }

    #[test]
    fn identity_network() {
        let f = Rfnn::identity(3);
        assert_eq!(f.eval(&[-4, 0, 9]).unwrap(), vec![-4, 0, 9]);
        assert!(matches!(f.eval(&[1]), Err(RfnnError::WidthMismatch { .. })));
    }

    #[test]
    fn clip_values() {
        let f = clip();
        let got: Vec<i64> = [-1, 0, 1, 2, 5].iter().map(|&x| f.eval(&[x]).unwrap()[0]).collect();
        assert_eq!(got, vec![0, 0, 1, 1, 1]);
    }

    #[test]
    fn composition_and_combinators() {
        let f = clip();
        let neg = Rfnn::new(vec![Affine::from_rows(1, vec![vec![(0, -3)]], vec![2])]).unwrap();
        let fg = neg.compose(&f);
        let par = f.parallel(&neg);
        let cat = f.concat(&neg);
        for x in -5..5 {
            let c = |v: i64| v.clamp(0, 1);
            assert_eq!(fg.eval(&[x]).unwrap(), vec![c(2 - 3 * x)]);
            assert_eq!(par.eval(&[x, x + 1]).unwrap(), vec![c(x), 2 - 3 * (x + 1)]);
            assert_eq!(cat.eval(&[x]).unwrap(), vec![c(x), 2 - 3 * x]);
            assert_eq!(cat.eval_f64(&[x as f64]).unwrap(), vec![c(x) as f64, (2 - 3 * x) as f64]);
        }
    }

    #[test]
    fn overflow_is_detected() {
        let f = Rfnn::new(vec![Affine::from_rows(1, vec![vec![(0, 1 << 40)]], vec![0])]).unwrap();
        assert_eq!(f.eval(&[1 << 30]), Err(RfnnError::Overflow));
    }

    #[test]
    fn serde_round_trip() {
        let f = clip().concat(&Rfnn::identity(1));
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<Rfnn>(&text).unwrap(), f);
        assert!(serde_json::from_str::<Affine>(r#"{"rows":1,"cols":1,"weights":[[0,3,1]],"bias":[0]}"#).is_err());
    }
}
