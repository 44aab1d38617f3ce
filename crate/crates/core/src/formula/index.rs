use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::{well_name, Formula};

/// Dense id of a subformula in canonical post-order.
pub type SubId = usize;
/// Dense id of a variable. Bound variables come first, in the order of their
/// binders; free variables follow sorted by name.
pub type VarId = usize;

/// One interned subformula, with children referenced by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node {
    /// Index into [`SubformulaIndex::props`].
    Prop(usize),
    NegProp(usize),
    Var(VarId),
    And(SubId, SubId),
    Or(SubId, SubId),
    AtLeast(u32, SubId),
    AllBut(u32, SubId),
    Mu(VarId, SubId),
    Nu(VarId, SubId),
}

impl Node {
    pub fn children(&self) -> impl Iterator<Item = SubId> {
        let (a, b) = match *self {
            Node::Prop(_) | Node::NegProp(_) | Node::Var(_) => (None, None),
            Node::And(l, r) | Node::Or(l, r) => (Some(l), if l == r { None } else { Some(r) }),
            Node::AtLeast(_, c) | Node::AllBut(_, c) | Node::Mu(_, c) | Node::Nu(_, c) => (Some(c), None),
        };
        a.into_iter().chain(b)
    }

    pub fn is_fixpoint(&self) -> bool {
        matches!(self, Node::Mu(..) | Node::Nu(..))
    }
}

/// The set rsub(φ) with all the derived maps the algorithms need.
#[derive(Clone, Debug)]
pub struct SubformulaIndex {
    formula: Formula,
    nodes: Vec<Node>,
    formulas: Vec<Formula>,
    props: Vec<String>,
    vars: Vec<String>,
    bound: usize,
    binder: Vec<SubId>,
    fixpoints: Vec<SubId>,
    free: Vec<FixedBitSet>,
    rsub: Vec<FixedBitSet>,
    depth: usize,
}

impl SubformulaIndex {
    /// Index a formula, well-naming it first.
    pub fn new(phi: &Formula) -> Self {
        let formula = well_name(phi);
        let props: Vec<String> = formula.props().into_iter().collect();

        let mut formulas: Vec<Formula> = Vec::new();
        let mut ids: HashMap<Formula, SubId> = HashMap::new();
        intern(&formula, &mut formulas, &mut ids);

        let fixpoints: Vec<SubId> = (0..formulas.len()).filter(|&i| formulas[i].is_fixpoint()).collect();
        let mut vars: Vec<String> = fixpoints
            .iter()
            .map(|&i| match &formulas[i] {
                Formula::Mu(x, _) | Formula::Nu(x, _) => x.clone(),
                _ => unreachable!(),
            })
            .collect();
        let bound = vars.len();
        vars.extend(formula.free_vars());
        let var_id: HashMap<&str, VarId> = vars.iter().enumerate().map(|(i, x)| (x.as_str(), i)).collect();
        let prop_id: HashMap<&str, usize> = props.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();

        let nodes: Vec<Node> = formulas
            .iter()
            .map(|f| match f {
                Formula::Prop(p) => Node::Prop(prop_id[p.as_str()]),
                Formula::NegProp(p) => Node::NegProp(prop_id[p.as_str()]),
                Formula::Var(x) => Node::Var(var_id[x.as_str()]),
                Formula::And(l, r) => Node::And(ids[&**l], ids[&**r]),
                Formula::Or(l, r) => Node::Or(ids[&**l], ids[&**r]),
                Formula::AtLeast(k, b) => Node::AtLeast(*k, ids[&**b]),
                Formula::AllBut(k, b) => Node::AllBut(*k, ids[&**b]),
                Formula::Mu(x, b) => Node::Mu(var_id[x.as_str()], ids[&**b]),
                Formula::Nu(x, b) => Node::Nu(var_id[x.as_str()], ids[&**b]),
            })
            .collect();

        let n = nodes.len();
        let mut free = Vec::with_capacity(n);
        let mut rsub = Vec::with_capacity(n);
        for (i, node) in nodes.iter().enumerate() {
            let mut fv = FixedBitSet::with_capacity(vars.len());
            let mut rs = FixedBitSet::with_capacity(n);
            rs.insert(i);
            if let Node::Var(x) = node {
                fv.insert(*x);
            }
            for c in node.children() {
                fv.union_with(&free[c]);
                rs.union_with(&rsub[c]);
            }
            if let Node::Mu(x, _) | Node::Nu(x, _) = node {
                fv.set(*x, false);
            }
            free.push(fv);
            rsub.push(rs);
        }

        let depth = formula.fixpoint_depth();
        SubformulaIndex {
            formula,
            nodes,
            formulas,
            props,
            vars,
            bound,
            binder: fixpoints.clone(),
            fixpoints,
            free,
            rsub,
            depth,
        }
    }

    /// The well-named formula this index was built from.
    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    /// Number of elements of rsub(φ).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> SubId {
        self.nodes.len() - 1
    }

    pub fn node(&self, id: SubId) -> Node {
        self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn subformula(&self, id: SubId) -> &Formula {
        &self.formulas[id]
    }

    /// Id of a subformula, if it occurs.
    pub fn find(&self, f: &Formula) -> Option<SubId> {
        self.formulas.iter().position(|g| g == f)
    }

    /// Sorted proposition symbols occurring in φ.
    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_name(&self, x: VarId) -> &str {
        &self.vars[x]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v == name)
    }

    /// Number of bound variables, equal to the number of fixpoint subformulas.
    pub fn bound_count(&self) -> usize {
        self.bound
    }

    /// Free variables of φ itself.
    pub fn free_vars(&self) -> &[String] {
        &self.vars[self.bound..]
    }

    pub fn is_sentence(&self) -> bool {
        self.bound == self.vars.len()
    }

    /// The fixpoint subformula binding `x`; `None` for free variables.
    pub fn binder(&self, x: VarId) -> Option<SubId> {
        self.binder.get(x).copied()
    }

    /// The variable bound by a fixpoint subformula.
    pub fn bound_var(&self, id: SubId) -> Option<VarId> {
        match self.nodes[id] {
            Node::Mu(x, _) | Node::Nu(x, _) => Some(x),
            _ => None,
        }
    }

    /// rfp(φ) in canonical order; position `i` binds variable `i`.
    pub fn fixpoints(&self) -> &[SubId] {
        &self.fixpoints
    }

    pub fn is_fixpoint(&self, id: SubId) -> bool {
        self.nodes[id].is_fixpoint()
    }

    pub fn is_mu(&self, id: SubId) -> bool {
        matches!(self.nodes[id], Node::Mu(..))
    }

    pub fn is_nu(&self, id: SubId) -> bool {
        matches!(self.nodes[id], Node::Nu(..))
    }

    /// Direct subformulas, without duplicates.
    pub fn sub(&self, id: SubId) -> Vec<SubId> {
        self.nodes[id].children().collect()
    }

    /// Reflexive subformulas as a bitset over ids.
    pub fn rsub(&self, id: SubId) -> &FixedBitSet {
        &self.rsub[id]
    }

    /// Strict subformulas.
    pub fn tsub(&self, id: SubId) -> impl Iterator<Item = SubId> + '_ {
        self.rsub[id].ones().filter(move |&j| j != id)
    }

    /// Strict fixpoint subformulas.
    pub fn tfp(&self, id: SubId) -> impl Iterator<Item = SubId> + '_ {
        self.tsub(id).filter(move |&j| self.is_fixpoint(j))
    }

    /// Free variables of a subformula as a bitset over variable ids.
    pub fn free(&self, id: SubId) -> &FixedBitSet {
        &self.free[id]
    }

    /// Maximum fixpoint nesting depth q.
    pub fn depth(&self) -> usize {
        self.depth
    }
}

fn intern(f: &Formula, out: &mut Vec<Formula>, ids: &mut HashMap<Formula, SubId>) -> SubId {
    for c in f.children() {
        intern(c, out, ids);
    }
    if let Some(&id) = ids.get(f) {
        return id;
    }
    let id = out.len();
    out.push(f.clone());
    ids.insert(f.clone(), id);
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn ix(s: &str) -> SubformulaIndex {
        SubformulaIndex::new(&parse(s).unwrap())
    }

    #[test]
    fn strict_subformulas_of_open_formula() {
        let idx = ix("~p | (X & <>q)");
        let root = idx.root();
        let mut tsub: Vec<String> = idx.tsub(root).map(|i| idx.subformula(i).to_string()).collect();
        tsub.sort();
        assert_eq!(tsub, vec!["<>q", "X", "X & <>q", "q", "~p"]);
        assert!(!idx.is_sentence());
        assert_eq!(idx.free_vars(), ["X".to_string()]);
        assert_eq!(idx.binder(idx.var_id("X").unwrap()), None);
    }

    #[test]
    fn proposition_has_no_subformulas() {
        let idx = ix("p");
        assert_eq!(idx.len(), 1);
        assert!(idx.sub(0).is_empty());
        assert_eq!(idx.depth(), 0);
    }

    #[test]
    fn single_binder() {
        let idx = ix("mu X.(p | <>X)");
        let x = idx.var_id("X").unwrap();
        assert_eq!(idx.binder(x), Some(idx.root()));
        assert_eq!(idx.fixpoints(), &[idx.root()]);
        assert_eq!(idx.depth(), 1);
        assert!(idx.is_mu(idx.root()));
        assert!(idx.free(idx.root()).is_clear());
    }

    #[test]
    fn post_order_and_sharing() {
        let idx = ix("(p & <>p) | <>p");
        let names: Vec<String> = (0..idx.len()).map(|i| idx.subformula(i).to_string()).collect();
        assert_eq!(names, vec!["p", "<>p", "p & <>p", "(p & <>p) | <>p"]);
        for i in 0..idx.len() {
            for c in idx.sub(i) {
                assert!(c < i);
            }
        }
    }

    #[test]
    fn nested_binders_and_free_sets() {
        let idx = ix("mu Y.((p | <>Y) | mu X.(q & <>(Y | <>X)))");
        let y = idx.var_id("Y").unwrap();
        let x = idx.var_id("X").unwrap();
        let inner = idx.binder(x).unwrap();
        let outer = idx.binder(y).unwrap();
        assert_eq!(outer, idx.root());
        assert!(inner < outer);
        assert_eq!(idx.fixpoints(), &[inner, outer]);
        assert_eq!(x, 0);
        assert_eq!(y, 1);
        assert_eq!(idx.free(inner).ones().collect::<Vec<_>>(), vec![y]);
        assert_eq!(idx.tfp(outer).collect::<Vec<_>>(), vec![inner]);
        assert_eq!(idx.depth(), 2);
    }
}
