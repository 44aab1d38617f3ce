//! Building RFNNs from arithmetic circuits over ReLU neurons.
//!
//! A [`Lin`] is an integer linear combination of wires plus a bias, where a
//! wire is either a network input or a neuron `relu(lin)`. [`Circuit::build`]
//! levels the neurons into layers, carries values across layers where they
//! are needed later, and emits the final affine layer for the outputs.
//!
//! The boolean gadgets are exact on integers: `clip(x) = min(max(x, 0), 1)`,
//! and the derived comparisons and connectives follow from it.

use std::collections::{BTreeMap, HashMap};

use super::rfnn::{Affine, Rfnn};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Wire {
    Input(usize),
    Neuron(usize),
}

/// `Σ w·wire + bias`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Lin {
    terms: BTreeMap<Wire, i64>,
    bias: i64,
}

impl Lin {
    pub fn constant(c: i64) -> Self {
        Lin { terms: BTreeMap::new(), bias: c }
    }

    fn wire(w: Wire) -> Self {
        Lin { terms: BTreeMap::from([(w, 1)]), bias: 0 }
    }

    pub fn as_constant(&self) -> Option<i64> {
        self.terms.is_empty().then_some(self.bias)
    }

    pub fn plus(&self, other: &Lin) -> Lin {
        let mut out = self.clone();
        for (&w, &c) in &other.terms {
            let e = out.terms.entry(w).or_insert(0);
            *e += c;
            if *e == 0 {
                out.terms.remove(&w);
            }
        }
        out.bias += other.bias;
        out
    }

    pub fn minus(&self, other: &Lin) -> Lin {
        self.plus(&other.scale(-1))
    }

    pub fn scale(&self, c: i64) -> Lin {
        if c == 0 {
            return Lin::constant(0);
        }
        Lin { terms: self.terms.iter().map(|(&w, &v)| (w, v * c)).collect(), bias: self.bias * c }
    }

    pub fn offset(&self, c: i64) -> Lin {
        Lin { terms: self.terms.clone(), bias: self.bias + c }
    }

    /// `1 - self`.
    pub fn not(&self) -> Lin {
        self.scale(-1).offset(1)
    }

    pub fn sum<'a>(items: impl IntoIterator<Item = &'a Lin>) -> Lin {
        items.into_iter().fold(Lin::constant(0), |acc, l| acc.plus(l))
    }
}

/// A circuit under construction.
#[derive(Clone, Debug)]
pub struct Circuit {
    inputs: usize,
    nonneg_inputs: bool,
    neurons: Vec<Lin>,
    levels: Vec<usize>,
    dedup: HashMap<Lin, usize>,
}

impl Circuit {
    pub fn new(inputs: usize) -> Self {
        Circuit { inputs, nonneg_inputs: false, neurons: Vec::new(), levels: Vec::new(), dedup: HashMap::new() }
    }

    /// A circuit whose inputs are promised to be non-negative, so they can be
    /// carried across layers by a single ReLU instead of a pair.
    pub fn with_nonnegative_inputs(inputs: usize) -> Self {
        Circuit { nonneg_inputs: true, ..Self::new(inputs) }
    }

    pub fn input(&self, i: usize) -> Lin {
        assert!(i < self.inputs);
        Lin::wire(Wire::Input(i))
    }

    fn level(&self, w: Wire) -> usize {
        match w {
            Wire::Input(_) => 0,
            Wire::Neuron(j) => self.levels[j],
        }
    }

    pub fn relu(&mut self, x: &Lin) -> Lin {
        if let Some(c) = x.as_constant() {
            return Lin::constant(c.max(0));
        }
        if let Some(&j) = self.dedup.get(x) {
            return Lin::wire(Wire::Neuron(j));
        }
        let level = 1 + x.terms.keys().map(|&w| self.level(w)).max().unwrap_or(0);
        let j = self.neurons.len();
        self.neurons.push(x.clone());
        self.levels.push(level);
        self.dedup.insert(x.clone(), j);
        Lin::wire(Wire::Neuron(j))
    }

    /// `relu(relu(x) - relu(x - 1))`, i.e. `x` clamped to `[0, 1]`.
    pub fn clip(&mut self, x: &Lin) -> Lin {
        let a = self.relu(x);
        let b = self.relu(&x.offset(-1));
        self.relu(&a.minus(&b))
    }

    /// `[a > b]` for integers.
    pub fn gt(&mut self, a: &Lin, b: &Lin) -> Lin {
        self.clip(&a.minus(b))
    }

    /// `[a ≥ b]` for integers, as `¬(b > a)`.
    pub fn geq(&mut self, a: &Lin, b: &Lin) -> Lin {
        self.gt(b, a).not()
    }

    /// `[a = b]` for integers.
    pub fn eq(&mut self, a: &Lin, b: &Lin) -> Lin {
        let x = self.geq(a, b);
        let y = self.geq(b, a);
        self.and(&x, &y)
    }

    pub fn and(&mut self, a: &Lin, b: &Lin) -> Lin {
        self.clip(&a.plus(b).offset(-1))
    }

    pub fn or(&mut self, a: &Lin, b: &Lin) -> Lin {
        let n = self.and(&a.not(), &b.not());
        n.not()
    }

    /// Conjunction of booleans; a single operand is returned unchanged.
    pub fn and_all(&mut self, items: &[Lin]) -> Lin {
        match items {
            [] => Lin::constant(1),
            [a] => a.clone(),
            _ => self.clip(&Lin::sum(items).offset(1 - items.len() as i64)),
        }
    }

    /// Disjunction of booleans; a single operand is returned unchanged.
    pub fn or_all(&mut self, items: &[Lin]) -> Lin {
        match items {
            [] => Lin::constant(0),
            [a] => a.clone(),
            _ => self.clip(&Lin::sum(items)),
        }
    }

    /// `g ? a : b` for booleans: `clip(a + g - 1) + clip(b - g)`.
    pub fn mux(&mut self, g: &Lin, a: &Lin, b: &Lin) -> Lin {
        match g.as_constant() {
            Some(1) => return a.clone(),
            Some(0) => return b.clone(),
            _ => {}
        }
        let x = self.clip(&a.plus(g).offset(-1));
        let y = self.clip(&b.minus(g));
        x.plus(&y)
    }

    /// `[a ⟺ b]` for booleans: `1 - a - b + 2·(a ∧ b)`.
    pub fn iff(&mut self, a: &Lin, b: &Lin) -> Lin {
        let both = self.and(a, b);
        Lin::constant(1).minus(a).minus(b).plus(&both.scale(2))
    }

    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    /// Lay the circuit out as an RFNN computing `outputs`.
    pub fn build(&self, outputs: &[Lin]) -> Rfnn {
        let depth = self.levels.iter().copied().max().unwrap_or(0);
        let reachable = self.reachable(outputs);

        // the last layer index at which each wire must be available
        let mut need: HashMap<Wire, usize> = HashMap::new();
        let mut bump = |w: Wire, at: usize| {
            let e = need.entry(w).or_insert(at);
            *e = (*e).max(at);
        };
        for (j, lin) in self.neurons.iter().enumerate() {
            if reachable[j] {
                for &w in lin.terms.keys() {
                    bump(w, self.levels[j] - 1);
                }
            }
        }
        for out in outputs {
            for &w in out.terms.keys() {
                bump(w, depth);
            }
        }

        // representation of each wire at each layer as (unit, coefficient) terms
        let mut rep: HashMap<(Wire, usize), Vec<(usize, i64)>> = HashMap::new();
        for i in 0..self.inputs {
            rep.insert((Wire::Input(i), 0), vec![(i, 1)]);
        }
        let mut layers = Vec::with_capacity(depth + 1);
        let mut width = self.inputs;
        for layer in 1..=depth {
            let mut rows: Vec<Vec<(usize, i64)>> = Vec::new();
            let mut bias = Vec::new();
            for (j, lin) in self.neurons.iter().enumerate() {
                if reachable[j] && self.levels[j] == layer {
                    rep.insert((Wire::Neuron(j), layer), vec![(rows.len(), 1)]);
                    rows.push(self.expand(lin, layer - 1, &rep));
                    bias.push(lin.bias);
                }
            }
            let mut carried: Vec<Wire> =
                need.iter().filter(|&(&w, &at)| self.level(w) < layer && at >= layer).map(|(&w, _)| w).collect();
            carried.sort_unstable();
            for w in carried {
                let prev = rep[&(w, layer - 1)].clone();
                let split = matches!(w, Wire::Input(_)) && !self.nonneg_inputs && self.level(w) + 1 == layer;
                if split {
                    let pos = rows.len();
                    rows.push(prev.clone());
                    rows.push(prev.iter().map(|&(u, c)| (u, -c)).collect());
                    bias.extend([0, 0]);
                    rep.insert((w, layer), vec![(pos, 1), (pos + 1, -1)]);
                } else {
                    let mut terms = Vec::new();
                    for &(u, c) in &prev {
                        terms.push((rows.len(), c));
                        rows.push(vec![(u, 1)]);
                        bias.push(0);
                    }
                    rep.insert((w, layer), terms);
                }
            }
            layers.push(Affine::from_rows(width, rows, bias));
            width = layers.last().unwrap().rows();
        }
        let rows = outputs.iter().map(|o| self.expand(o, depth, &rep)).collect();
        layers.push(Affine::from_rows(width, rows, outputs.iter().map(|o| o.bias).collect()));
        Rfnn::new(layers).expect("layers chain by construction")
    }

    fn expand(&self, lin: &Lin, layer: usize, rep: &HashMap<(Wire, usize), Vec<(usize, i64)>>) -> Vec<(usize, i64)> {
        let mut row = Vec::new();
        for (&w, &c) in &lin.terms {
            let terms = rep.get(&(w, layer)).unwrap_or_else(|| panic!("{w:?} not available at layer {layer}"));
            row.extend(terms.iter().map(|&(u, k)| (u, k * c)));
        }
        row
    }

    fn reachable(&self, outputs: &[Lin]) -> Vec<bool> {
        let mut seen = vec![false; self.neurons.len()];
        let mut stack: Vec<usize> = Vec::new();
        let push = |w: &Wire, stack: &mut Vec<usize>| {
            if let Wire::Neuron(j) = *w {
                stack.push(j);
            }
        };
        for o in outputs {
            o.terms.keys().for_each(|w| push(w, &mut stack));
        }
        while let Some(j) = stack.pop() {
            if !std::mem::replace(&mut seen[j], true) {
                self.neurons[j].terms.keys().for_each(|w| push(w, &mut stack));
            }
        }
        seen
    }
}

/// Stand-alone gadget networks.
pub mod gadgets {
    use super::*;

    fn unary(f: impl FnOnce(&mut Circuit, &Lin) -> Lin) -> Rfnn {
        let mut c = Circuit::new(1);
        let x = c.input(0);
        let out = f(&mut c, &x);
        c.build(&[out])
    }

    fn binary(f: impl FnOnce(&mut Circuit, &Lin, &Lin) -> Lin) -> Rfnn {
        let mut c = Circuit::new(2);
        let (a, b) = (c.input(0), c.input(1));
        let out = f(&mut c, &a, &b);
        c.build(&[out])
    }

    pub fn clip() -> Rfnn {
        unary(|c, x| c.clip(x))
    }

    pub fn not() -> Rfnn {
        unary(|_, x| x.not())
    }

    pub fn gt() -> Rfnn {
        binary(|c, a, b| c.gt(a, b))
    }

    pub fn geq() -> Rfnn {
        binary(|c, a, b| c.geq(a, b))
    }

    pub fn and() -> Rfnn {
        binary(|c, a, b| c.and(a, b))
    }

    pub fn or() -> Rfnn {
        binary(|c, a, b| c.or(a, b))
    }

    pub fn eq() -> Rfnn {
        binary(|c, a, b| c.eq(a, b))
    }

    pub fn add() -> Rfnn {
        binary(|_, a, b| a.plus(b))
    }

    pub fn sub() -> Rfnn {
        binary(|_, a, b| a.minus(b))
    }

    /// Ignores its single input and returns `value`.
    pub fn constant(value: i64) -> Rfnn {
        unary(|_, _| Lin::constant(value))
    }

    /// Boolean inputs `(g, a, b)`; returns `a` if `g = 1` and `b` if `g = 0`.
    pub fn mux() -> Rfnn {
        let mut c = Circuit::new(3);
        let (g, a, b) = (c.input(0), c.input(1), c.input(2));
        let out = c.mux(&g, &a, &b);
        c.build(&[out])
    }

    /// All named gadgets.
    pub fn all() -> Vec<(&'static str, Rfnn)> {
        vec![
            ("clip", clip()),
            ("gt", gt()),
            ("geq", geq()),
            ("and", and()),
            ("or", or()),
            ("not", not()),
            ("eq", eq()),
            ("mux", mux()),
            ("add", add()),
            ("sub", sub()),
            ("const", constant(1)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gadget_examples() {
        let at = |f: &Rfnn, x: &[i64]| f.eval(x).unwrap()[0];
        let clip = gadgets::clip();
        assert_eq!([-1, 0, 1, 5].map(|x| at(&clip, &[x])), [0, 0, 1, 1]);
        assert_eq!(at(&gadgets::gt(), &[3, 1]), 1);
        assert_eq!(at(&gadgets::gt(), &[1, 1]), 0);
        assert_eq!(at(&gadgets::and(), &[1, 1]), 1);
        assert_eq!(at(&gadgets::and(), &[1, 0]), 0);
        assert_eq!(at(&gadgets::not(), &[0]), 1);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(at(&gadgets::or(), &[a, b]), (a | b));
            }
        }
        assert_eq!(at(&gadgets::constant(7), &[-3]), 7);
    }

    #[test]
    fn carries_values_across_layers() {
        // out0 uses a deep neuron, out1 and out2 are shallow or raw inputs
        let mut c = Circuit::new(2);
        let (a, b) = (c.input(0), c.input(1));
        let deep = c.gt(&a, &b);
        let deeper = c.and(&deep, &b);
        let f = c.build(&[deeper, a.clone(), b.scale(3).offset(-2)]);
        assert!(f.depth() > 3);
        for x in -4..4 {
            for y in -4..4 {
                let want = vec![((x > y) as i64 + y - 1).clamp(0, 1), x, 3 * y - 2];
                assert_eq!(f.eval(&[x, y]).unwrap(), want);
            }
        }
    }

    #[test]
    fn nonnegative_inputs_use_single_carries() {
        let build = |mut c: Circuit| {
            let (a, b) = (c.input(0), c.input(1));
            let g = c.gt(&a, &b);
            c.build(&[g, a, b])
        };
        let signed = build(Circuit::new(2));
        let unsigned = build(Circuit::with_nonnegative_inputs(2));
        assert!(unsigned.hidden_units() < signed.hidden_units());
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(signed.eval(&[x, y]).unwrap(), unsigned.eval(&[x, y]).unwrap());
            }
        }
    }

    #[test]
    fn constants_fold() {
        let mut c = Circuit::new(1);
        let k = c.clip(&Lin::constant(5));
        assert_eq!(k.as_constant(), Some(1));
        assert_eq!(c.neuron_count(), 0);
        let f = c.build(&[k]);
        assert_eq!(f.depth(), 1);
        assert_eq!(f.eval(&[9]).unwrap(), vec![1]);
    }
}
