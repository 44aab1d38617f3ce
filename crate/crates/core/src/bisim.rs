//! Graded bisimilarity via color refinement, with a brute-force relation
//! search for cross-checking on tiny graphs.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::LabeledGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error("proposition universes differ: {0:?} vs {1:?}")]
    UniverseMismatch(Vec<String>, Vec<String>),
    #[error("node {0} out of range")]
    NodeOutOfRange(usize),
}

/// A stable partition of the nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    /// Dense color ids, one per node.
    pub colors: Vec<usize>,
    /// Refinement rounds until the partition stopped splitting.
    pub rounds: usize,
}

impl Coloring {
    pub fn class_count(&self) -> usize {
        self.colors.iter().max().map_or(0, |&c| c + 1)
    }
}

/// Renumber signatures densely in their sorted order.
fn densify<K: Ord + Clone>(sigs: &[K]) -> Vec<usize> {
    let mut ids: BTreeMap<K, usize> = sigs.iter().map(|s| (s.clone(), 0)).collect();
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    sigs.iter().map(|s| ids[s]).collect()
}

/// Graded color refinement: start from label sets, then repeatedly pair
/// each color with the multiset of out-neighbor colors until no class splits.
pub fn color_refinement(g: &LabeledGraph) -> Coloring {
    let n = g.node_count();
    let labels: Vec<Vec<usize>> =
        (0..n).map(|v| (0..g.props().len()).filter(|&p| g.has_label(v, p)).collect()).collect();
    let mut colors = densify(&labels);
    let mut classes = colors.iter().max().map_or(0, |&c| c + 1);
    let mut rounds = 0;
    loop {
        let sigs: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut ms: Vec<usize> = g.succ(v).iter().map(|&w| colors[w]).collect();
                ms.sort_unstable();
                (colors[v], ms)
            })
            .collect();
        let next = densify(&sigs);
        let next_classes = next.iter().max().map_or(0, |&c| c + 1);
        rounds += 1;
        if next_classes == classes {
            return Coloring { colors, rounds };
        }
        colors = next;
        classes = next_classes;
    }
}

fn check_universe(g: &LabeledGraph, h: &LabeledGraph) -> Result<(), BisimError> {
    if g.props() != h.props() {
        return Err(BisimError::UniverseMismatch(g.props().to_vec(), h.props().to_vec()));
    }
    Ok(())
}

fn check_node(g: &LabeledGraph, n: usize) -> Result<(), BisimError> {
    if n >= g.node_count() {
        return Err(BisimError::NodeOutOfRange(n));
    }
    Ok(())
}

/// Whether `(g, n)` and `(h, m)` are graded bisimilar, decided by color
/// refinement on `g ⊎ h`.
pub fn g_bisimilar(g: &LabeledGraph, n: usize, h: &LabeledGraph, m: usize) -> Result<bool, BisimError> {
    check_universe(g, h)?;
    check_node(g, n)?;
    check_node(h, m)?;
    let u = g.disjoint_union(h).expect("universes match");
    let c = color_refinement(&u);
    Ok(c.colors[n] == c.colors[g.node_count() + m])
}

/// All pairs `(n, m)` with `(g, n)` and `(h, m)` graded bisimilar.
pub fn bisimilar_pairs(g: &LabeledGraph, h: &LabeledGraph) -> Result<Vec<(usize, usize)>, BisimError> {
    check_universe(g, h)?;
    let u = g.disjoint_union(h).expect("universes match");
    let c = color_refinement(&u);
    let off = g.node_count();
    let mut pairs = Vec::new();
    for n in 0..off {
        for m in 0..h.node_count() {
            if c.colors[n] == c.colors[off + m] {
                pairs.push((n, m));
            }
        }
    }
    Ok(pairs)
}

/// Largest number of candidate pairs [`brute_force_bisimilar`] accepts.
pub const BRUTE_FORCE_MAX_PAIRS: usize = 24;

/// Search every relation over label-compatible pairs that contains `(n, m)`
/// for one satisfying the graded back-and-forth condition. Exponential;
/// meant as an oracle for tiny graphs.
pub fn brute_force_bisimilar(g: &LabeledGraph, n: usize, h: &LabeledGraph, m: usize) -> Result<bool, BisimError> {
    check_universe(g, h)?;
    check_node(g, n)?;
    check_node(h, m)?;
    let same_label = |a: usize, b: usize| (0..g.props().len()).all(|p| g.has_label(a, p) == h.has_label(b, p));
    if !same_label(n, m) {
        return Ok(false);
    }
    let others: Vec<(usize, usize)> = (0..g.node_count())
        .flat_map(|a| (0..h.node_count()).map(move |b| (a, b)))
        .filter(|&(a, b)| (a, b) != (n, m) && same_label(a, b))
        .collect();
    assert!(others.len() <= BRUTE_FORCE_MAX_PAIRS, "graphs too large for brute-force search");
    let hn = h.node_count();
    let mut rel = vec![false; g.node_count() * hn];
    for mask in 0u32..1 << others.len() {
        rel.iter_mut().for_each(|r| *r = false);
        rel[n * hn + m] = true;
        for (i, &(a, b)) in others.iter().enumerate() {
            if mask >> i & 1 == 1 {
                rel[a * hn + b] = true;
            }
        }
        let in_rel = |a: usize, b: usize| rel[a * hn + b];
        let ok = (0..g.node_count())
            .flat_map(|a| (0..hn).map(move |b| (a, b)))
            .filter(|&(a, b)| in_rel(a, b))
            .all(|(a, b)| has_bijection(g.succ(a), h.succ(b), &in_rel));
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether some bijection `f: left → right` (as multisets of positions)
/// keeps every `(i, f(i))` in the relation.
fn has_bijection(left: &[usize], right: &[usize], rel: &impl Fn(usize, usize) -> bool) -> bool {
    fn go(i: usize, left: &[usize], right: &[usize], used: &mut [bool], rel: &impl Fn(usize, usize) -> bool) -> bool {
        if i == left.len() {
            return true;
        }
        for j in 0..right.len() {
            if !used[j] && rel(left[i], right[j]) {
                used[j] = true;
                if go(i + 1, left, right, used, rel) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    left.len() == right.len() && go(0, left, right, &mut vec![false; right.len()], rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::g1;

    fn cycle(len: usize) -> LabeledGraph {
        let labels = vec![&["p"][..]; len];
        let edges: Vec<(usize, usize)> = (0..len).map(|i| (i, (i + 1) % len)).collect();
        LabeledGraph::from_parts(&labels, &edges).unwrap()
    }

    #[test]
    fn reflexive_and_duplicated() {
        let g = g1();
        for n in 0..3 {
            assert!(g_bisimilar(&g, n, &g, n).unwrap());
        }
        let gg = g.disjoint_union(&g).unwrap();
        assert!(g_bisimilar(&g, 0, &gg, 3).unwrap());
        assert!(brute_force_bisimilar(&g, 0, &gg, 3).unwrap());
    }

    #[test]
    fn cycles_and_sinks() {
        let (c2, c3) = (cycle(2), cycle(3));
        let sink = LabeledGraph::from_parts(&[&["p"]], &[]).unwrap();
        assert!(g_bisimilar(&c2, 0, &c3, 1).unwrap());
        assert!(brute_force_bisimilar(&c2, 0, &c3, 1).unwrap());
        assert!(!g_bisimilar(&c2, 0, &sink, 0).unwrap());
        assert!(!brute_force_bisimilar(&c2, 0, &sink, 0).unwrap());
    }

    #[test]
    fn counts_matter() {
        // one p-successor vs two p-successors: plainly bisimilar, not graded
        let one = LabeledGraph::from_parts(&[&[], &["p"]], &[(0, 1)]).unwrap();
        let two = LabeledGraph::from_parts(&[&[], &["p"], &["p"]], &[(0, 1), (0, 2)]).unwrap();
        assert!(!g_bisimilar(&one, 0, &two, 0).unwrap());
        assert!(!brute_force_bisimilar(&one, 0, &two, 0).unwrap());
        assert!(g_bisimilar(&one, 1, &two, 2).unwrap());
    }

    #[test]
    fn refinement_stabilizes() {
        let path = LabeledGraph::from_parts(&[&[], &[], &[], &["p"]], &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let c = color_refinement(&path);
        assert_eq!(c.class_count(), 4);
        assert!(c.rounds <= path.node_count() + 1);
    }

    #[test]
    fn universe_mismatch() {
        let a = LabeledGraph::from_parts(&[&["p"]], &[]).unwrap();
        let b = LabeledGraph::from_parts(&[&["q"]], &[]).unwrap();
        assert!(matches!(g_bisimilar(&a, 0, &b, 0), Err(BisimError::UniverseMismatch(..))));
    }
}
