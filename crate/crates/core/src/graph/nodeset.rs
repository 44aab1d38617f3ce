use std::fmt;

use fixedbitset::FixedBitSet;

/// A set of nodes of one fixed graph, stored as a bitset of width `N`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(FixedBitSet);

impl NodeSet {
    pub fn empty(n: usize) -> Self {
        NodeSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(n);
        b.insert_range(..);
        NodeSet(b)
    }

    pub fn from_indices(n: usize, it: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for i in it {
            s.insert(i);
        }
        s
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        Self::from_indices(n, (0..n).filter(|&i| f(i)))
    }

    /// Width of the underlying graph.
    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.width()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn insert(&mut self, i: usize) {
        self.0.insert(i);
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0.set(i, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        out.0.union_with(&other.0);
        out
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        out.0.intersect_with(&other.0);
        out
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        out.0.difference_with(&other.0);
        out
    }

    pub fn complement(&self) -> NodeSet {
        let mut out = self.clone();
        out.0.toggle_range(..);
        out
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Nodes where membership in `self` and `other` agree.
    pub fn agreement(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        out.0.symmetric_difference_with(&other.0);
        out.0.toggle_range(..);
        out
    }

    pub fn as_bitset(&self) -> &FixedBitSet {
        &self.0
    }

    /// One `0`/`1` character per node.
    pub fn bit_string(&self) -> String {
        (0..self.width()).map(|i| if self.contains(i) { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(n: usize) -> impl Strategy<Value = NodeSet> {
        proptest::collection::vec(any::<bool>(), n).prop_map(move |bits| NodeSet::from_fn(n, |i| bits[i]))
    }

    fn triple() -> impl Strategy<Value = (NodeSet, NodeSet, NodeSet)> {
        (0usize..70).prop_flat_map(|n| (set(n), set(n), set(n)))
    }

    proptest! {
        #[test]
        fn boolean_algebra_laws((a, b, c) in triple()) {
            let n = a.width();
            prop_assert_eq!(a.union(&b), b.union(&a));
            prop_assert_eq!(a.intersection(&b.union(&c)), a.intersection(&b).union(&a.intersection(&c)));
            prop_assert_eq!(a.union(&b).complement(), a.complement().intersection(&b.complement()));
            prop_assert_eq!(a.difference(&b), a.intersection(&b.complement()));
            prop_assert_eq!(a.union(&a.complement()), NodeSet::full(n));
            prop_assert_eq!(a.intersection(&a.complement()), NodeSet::empty(n));
            prop_assert_eq!(a.complement().complement(), a.clone());
            prop_assert!(a.intersection(&b).is_subset(&a));
            prop_assert_eq!(a.agreement(&b).len() + a.difference(&b).len() + b.difference(&a).len(), n);
        }
    }

    #[test]
    fn full_and_empty() {
        assert!(NodeSet::full(0).is_empty());
        assert!(NodeSet::full(0).is_full());
        assert_eq!(NodeSet::full(5).len(), 5);
        assert_eq!(NodeSet::from_indices(4, [1, 3]).bit_string(), "0101");
    }
}
