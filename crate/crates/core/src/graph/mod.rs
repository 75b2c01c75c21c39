//! Partially directed graphs and the DAG / MPDAG specialisations.

mod cliques;
mod components;
mod critical;
mod degs;
mod dsep;
pub mod io;
mod mec;
mod meek;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

pub use cliques::maximal_cliques;
pub use components::{b_components, BComponent};
pub use critical::critical_set;
pub use degs::{check_degs, constructive_degs, DegsEntry, Rule};
pub use dsep::d_separated;
pub use mec::{enumerate_mec, enumerate_mec_with_cap, DEFAULT_MEC_CAP};
pub use meek::{meek_closure, meek_closure_lenient, meek_closure_traced};
pub(crate) use meek::{close_with, CloseMode};

pub type Node = usize;
pub type NodeSet = BTreeSet<Node>;

/// Status of an unordered node pair `(a, b)` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairStatus {
    Absent,
    Undirected,
    /// `a -> b` for the ordered pair `(a, b)`, `a < b`.
    Forward,
    /// `b -> a`.
    Backward,
}

/// A graph mixing directed and undirected edges over dense node indices.
#[derive(Clone, PartialEq, Eq)]
pub struct Pdag {
    labels: Vec<String>,
    parents: Vec<NodeSet>,
    children: Vec<NodeSet>,
    undirected: Vec<NodeSet>,
}

impl fmt::Debug for Pdag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (a, b) in self.directed_edges() {
            parts.push(format!("{}->{}", self.labels[a], self.labels[b]));
        }
        for (a, b) in self.undirected_edges() {
            parts.push(format!("{}--{}", self.labels[a], self.labels[b]));
        }
        write!(f, "Pdag[{}]{{{}}}", self.n_nodes(), parts.join(", "))
    }
}

impl Pdag {
    /// An empty graph with `n` nodes labelled by their index.
    pub fn new(n: usize) -> Self {
        Self::with_labels((0..n).map(|i| i.to_string()).collect())
    }

    pub fn with_labels(labels: Vec<String>) -> Self {
        let n = labels.len();
        Pdag {
            labels,
            parents: vec![NodeSet::new(); n],
            children: vec![NodeSet::new(); n],
            undirected: vec![NodeSet::new(); n],
        }
    }

    /// Builds a graph from edge lists, rejecting self-loops and duplicate pairs.
    pub fn from_edges(n: usize, directed: &[(Node, Node)], undirected: &[(Node, Node)]) -> Result<Self> {
        let mut g = Pdag::new(n);
        for &(a, b) in directed {
            g.add_directed(a, b)?;
        }
        for &(a, b) in undirected {
            g.add_undirected(a, b)?;
        }
        Ok(g)
    }

    /// An edgeless graph sharing this graph's labels.
    pub fn empty_like(&self) -> Self {
        Self::with_labels(self.labels.clone())
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn nodes(&self) -> std::ops::Range<Node> {
        0..self.n_nodes()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: Node) -> &str {
        &self.labels[v]
    }

    pub fn set_labels(&mut self, labels: Vec<String>) -> Result<()> {
        if labels.len() != self.n_nodes() {
            return Err(Error::InvalidArgument(format!(
                "expected {} labels, got {}",
                self.n_nodes(),
                labels.len()
            )));
        }
        self.labels = labels;
        Ok(())
    }

    pub fn index_of(&self, label: &str) -> Result<Node> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn check_node(&self, v: Node) -> Result<()> {
        if v < self.n_nodes() {
            Ok(())
        } else {
            Err(Error::InvalidNode(v))
        }
    }

    fn check_pair(&self, a: Node, b: Node) -> Result<()> {
        self.check_node(a)?;
        self.check_node(b)?;
        if a == b {
            return Err(Error::Validation(format!("self-loop on {}", self.labels[a])));
        }
        if self.is_adjacent(a, b) {
            return Err(Error::Validation(format!(
                "duplicate edge between {} and {}",
                self.labels[a], self.labels[b]
            )));
        }
        Ok(())
    }

    pub fn add_directed(&mut self, a: Node, b: Node) -> Result<()> {
        self.check_pair(a, b)?;
        self.children[a].insert(b);
        self.parents[b].insert(a);
        Ok(())
    }

    pub fn add_undirected(&mut self, a: Node, b: Node) -> Result<()> {
        self.check_pair(a, b)?;
        self.undirected[a].insert(b);
        self.undirected[b].insert(a);
        Ok(())
    }

    /// Removes whatever edge joins `a` and `b`; returns whether one existed.
    pub fn remove_edge(&mut self, a: Node, b: Node) -> bool {
        let mut hit = self.undirected[a].remove(&b);
        self.undirected[b].remove(&a);
        hit |= self.children[a].remove(&b);
        self.parents[b].remove(&a);
        hit |= self.children[b].remove(&a);
        self.parents[a].remove(&b);
        hit
    }

    /// Turns the undirected edge `a - b` into `a -> b`.
    pub fn orient(&mut self, a: Node, b: Node) -> Result<()> {
        self.check_node(a)?;
        self.check_node(b)?;
        if !self.undirected[a].contains(&b) {
            return Err(Error::State(format!(
                "no undirected edge {} -- {} to orient",
                self.labels[a], self.labels[b]
            )));
        }
        self.undirected[a].remove(&b);
        self.undirected[b].remove(&a);
        self.children[a].insert(b);
        self.parents[b].insert(a);
        Ok(())
    }

    /// Sets the pair `(a, b)` to the given status, replacing any previous edge.
    pub fn set_pair(&mut self, a: Node, b: Node, status: PairStatus) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.remove_edge(lo, hi);
        match status {
            PairStatus::Absent => {}
            PairStatus::Undirected => {
                self.undirected[lo].insert(hi);
                self.undirected[hi].insert(lo);
            }
            PairStatus::Forward => {
                self.children[lo].insert(hi);
                self.parents[hi].insert(lo);
            }
            PairStatus::Backward => {
                self.children[hi].insert(lo);
                self.parents[lo].insert(hi);
            }
        }
    }

    pub fn parents(&self, v: Node) -> &NodeSet {
        &self.parents[v]
    }

    pub fn children(&self, v: Node) -> &NodeSet {
        &self.children[v]
    }

    pub fn siblings(&self, v: Node) -> &NodeSet {
        &self.undirected[v]
    }

    pub fn adjacent(&self, v: Node) -> NodeSet {
        let mut out = self.parents[v].clone();
        out.extend(&self.children[v]);
        out.extend(&self.undirected[v]);
        out
    }

    pub fn degree(&self, v: Node) -> usize {
        self.parents[v].len() + self.children[v].len() + self.undirected[v].len()
    }

    pub fn is_adjacent(&self, a: Node, b: Node) -> bool {
        self.undirected[a].contains(&b) || self.children[a].contains(&b) || self.parents[a].contains(&b)
    }

    pub fn has_directed(&self, a: Node, b: Node) -> bool {
        self.children[a].contains(&b)
    }

    pub fn has_undirected(&self, a: Node, b: Node) -> bool {
        self.undirected[a].contains(&b)
    }

    pub fn pair_status(&self, a: Node, b: Node) -> PairStatus {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if self.undirected[lo].contains(&hi) {
            PairStatus::Undirected
        } else if self.children[lo].contains(&hi) {
            PairStatus::Forward
        } else if self.children[hi].contains(&lo) {
            PairStatus::Backward
        } else {
            PairStatus::Absent
        }
    }

    /// Directed edges sorted by (tail, head).
    pub fn directed_edges(&self) -> Vec<(Node, Node)> {
        let mut out = Vec::new();
        for a in self.nodes() {
            for &b in &self.children[a] {
                out.push((a, b));
            }
        }
        out
    }

    /// Undirected edges as `(a, b)` with `a < b`, sorted.
    pub fn undirected_edges(&self) -> Vec<(Node, Node)> {
        let mut out = Vec::new();
        for a in self.nodes() {
            for &b in self.undirected[a].range(a + 1..) {
                out.push((a, b));
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.directed_edges().len() + self.undirected_edges().len()
    }

    /// The same graph with every edge undirected.
    pub fn skeleton(&self) -> Pdag {
        let mut g = self.empty_like();
        for (a, b) in self.directed_edges().into_iter().chain(self.undirected_edges()) {
            g.undirected[a].insert(b);
            g.undirected[b].insert(a);
        }
        g
    }

    /// Keeps only edges with both endpoints in `keep`; node indices are unchanged.
    pub fn induced(&self, keep: &NodeSet) -> Pdag {
        let mut g = self.empty_like();
        for &a in keep {
            for &b in &self.children[a] {
                if keep.contains(&b) {
                    g.children[a].insert(b);
                    g.parents[b].insert(a);
                }
            }
            for &b in &self.undirected[a] {
                if keep.contains(&b) {
                    g.undirected[a].insert(b);
                }
            }
        }
        g
    }

    /// Topological order of the directed part, or `None` when it has a cycle.
    pub fn topological_order(&self) -> Option<Vec<Node>> {
        let n = self.n_nodes();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.parents[v].len()).collect();
        let mut queue: VecDeque<Node> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn has_directed_cycle(&self) -> bool {
        self.topological_order().is_none()
    }

    /// Whether `to` is reachable from `from` along directed edges.
    pub fn has_directed_path(&self, from: Node, to: Node) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.n_nodes()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for &c in &self.children[v] {
                if c == to {
                    return true;
                }
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        false
    }

    /// Ancestors along directed edges, including `v` itself.
    pub fn ancestors(&self, v: Node) -> NodeSet {
        self.reach(v, |g, u| &g.parents[u])
    }

    /// Descendants along directed edges, including `v` itself.
    pub fn descendants(&self, v: Node) -> NodeSet {
        self.reach(v, |g, u| &g.children[u])
    }

    /// Ancestors of a set along directed edges, including the set.
    pub fn ancestors_of_set(&self, set: &NodeSet) -> NodeSet {
        let mut out = set.clone();
        let mut stack: Vec<Node> = set.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if out.insert(p) {
                    stack.push(p);
                }
            }
        }
        out
    }

    fn reach(&self, v: Node, step: impl Fn(&Pdag, Node) -> &NodeSet) -> NodeSet {
        let mut out = NodeSet::new();
        out.insert(v);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &w in step(self, u) {
                if out.insert(w) {
                    stack.push(w);
                }
            }
        }
        out
    }

    /// Nodes joined to `v` by an undirected path, including `v`.
    pub fn undirected_component(&self, v: Node) -> NodeSet {
        self.reach(v, |g, u| &g.undirected[u])
    }

    /// All `(a, b, c)` with `a -> b <- c`, `a < c` and `a`, `c` nonadjacent.
    pub fn v_structures(&self) -> Vec<(Node, Node, Node)> {
        let mut out = Vec::new();
        for b in self.nodes() {
            let pa: Vec<Node> = self.parents[b].iter().copied().collect();
            for (i, &a) in pa.iter().enumerate() {
                for &c in &pa[i + 1..] {
                    if !self.is_adjacent(a, c) {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out
    }

    /// Skeleton with only the v-structure edges directed.
    pub fn pattern(&self) -> Pdag {
        let mut g = self.skeleton();
        for (a, b, c) in self.v_structures() {
            if g.has_undirected(a, b) {
                g.orient(a, b).expect("edge present in skeleton");
            }
            if g.has_undirected(c, b) {
                g.orient(c, b).expect("edge present in skeleton");
            }
        }
        g
    }
}

/// A directed acyclic graph.
#[derive(Clone, PartialEq, Eq)]
pub struct Dag(Pdag);

impl fmt::Debug for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Dag {
    pub fn new(g: Pdag) -> Result<Self> {
        if !g.undirected_edges().is_empty() {
            return Err(Error::Validation("a DAG cannot contain undirected edges".into()));
        }
        if g.has_directed_cycle() {
            return Err(Error::Validation("graph contains a directed cycle".into()));
        }
        Ok(Dag(g))
    }

    pub fn from_edges(n: usize, edges: &[(Node, Node)]) -> Result<Self> {
        Dag::new(Pdag::from_edges(n, edges, &[])?)
    }

    pub fn topological_order(&self) -> Vec<Node> {
        self.0.topological_order().expect("DAG is acyclic")
    }

    pub fn as_pdag(&self) -> &Pdag {
        &self.0
    }

    pub fn into_pdag(self) -> Pdag {
        self.0
    }

    /// Parents, children and co-parents of `v`.
    pub fn markov_blanket(&self, v: Node) -> NodeSet {
        let mut mb = self.0.parents(v).clone();
        for &c in self.0.children(v) {
            mb.insert(c);
            mb.extend(self.0.parents(c));
        }
        mb.remove(&v);
        mb
    }

    /// The CPDAG of this DAG's Markov equivalence class.
    pub fn to_cpdag(&self) -> Mpdag {
        let pattern = self.0.pattern();
        let closed = meek_closure(&pattern).expect("pattern of a DAG closes without conflict");
        Mpdag(closed)
    }
}

impl Deref for Dag {
    type Target = Pdag;
    fn deref(&self) -> &Pdag {
        &self.0
    }
}

/// Pattern followed by Meek closure.
pub fn dag_to_cpdag(g: &Dag) -> Mpdag {
    g.to_cpdag()
}

/// A partially directed graph closed under the orientation rules.
#[derive(Clone, PartialEq, Eq)]
pub struct Mpdag(Pdag);

impl fmt::Debug for Mpdag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Mpdag {
    /// Validates that `g` has no directed cycle and is a fixed point of the rules.
    pub fn new(g: Pdag) -> Result<Self> {
        if g.has_directed_cycle() {
            return Err(Error::Validation("graph contains a directed cycle".into()));
        }
        let closed = meek_closure(&g)?;
        if closed != g {
            return Err(Error::Validation("graph is not closed under the orientation rules".into()));
        }
        Ok(Mpdag(g))
    }

    /// Closes `g` under the rules and wraps the result.
    pub fn close(g: &Pdag) -> Result<Self> {
        if g.has_directed_cycle() {
            return Err(Error::Inconsistent("directed cycle among oriented edges".into()));
        }
        Ok(Mpdag(meek_closure(g)?))
    }

    pub(crate) fn from_closed(g: Pdag) -> Self {
        Mpdag(g)
    }

    pub fn as_pdag(&self) -> &Pdag {
        &self.0
    }

    pub fn into_pdag(self) -> Pdag {
        self.0
    }

    /// Orients the given edges one at a time, closing after each.
    pub fn orient_with_background(&self, knowledge: &[(Node, Node)]) -> Result<Mpdag> {
        let mut g = self.0.clone();
        let v_structures = g.v_structures();
        for &(a, b) in knowledge {
            g.check_node(a)?;
            g.check_node(b)?;
            let item = format!("{} -> {}", g.label(a), g.label(b));
            if g.has_directed(a, b) {
                continue;
            }
            if g.has_directed(b, a) {
                return Err(Error::Inconsistent(format!(
                    "knowledge {item} contradicts an oriented edge"
                )));
            }
            if !g.has_undirected(a, b) {
                return Err(Error::Inconsistent(format!(
                    "knowledge {item} refers to a missing edge"
                )));
            }
            g.orient(a, b)?;
            g = meek_closure(&g)
                .map_err(|e| Error::Inconsistent(format!("knowledge {item} leads to a conflict: {e}")))?;
            if g.v_structures() != v_structures {
                return Err(Error::Inconsistent(format!(
                    "knowledge {item} creates a new v-structure"
                )));
            }
        }
        Ok(Mpdag(g))
    }
}

impl Deref for Mpdag {
    type Target = Pdag;
    fn deref(&self) -> &Pdag {
        &self.0
    }
}

/// Free-function form of [`Mpdag::orient_with_background`].
pub fn orient_with_background(g: &Mpdag, knowledge: &[(Node, Node)]) -> Result<Mpdag> {
    g.orient_with_background(knowledge)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn four_node() -> Dag {
        // A=0, X=1, B=2, Y=3
        let mut g = Pdag::from_edges(4, &[(0, 1), (1, 2), (0, 3), (2, 3), (1, 3)], &[]).unwrap();
        g.set_labels(vec!["A".into(), "X".into(), "B".into(), "Y".into()]).unwrap();
        Dag::new(g).unwrap()
    }

    #[test]
    fn rejects_duplicates_and_loops() {
        let mut g = Pdag::new(3);
        g.add_directed(0, 1).unwrap();
        assert!(matches!(g.add_undirected(1, 0), Err(Error::Validation(_))));
        assert!(matches!(g.add_directed(2, 2), Err(Error::Validation(_))));
        assert!(matches!(g.add_directed(0, 7), Err(Error::InvalidNode(7))));
    }

    #[test]
    fn dag_rejects_cycle() {
        assert!(Dag::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).is_err());
    }

    #[test]
    fn four_node_cpdag() {
        let g = four_node();
        let c = g.to_cpdag();
        assert_eq!(c.directed_edges(), vec![(0, 3), (1, 3), (2, 3)]);
        assert_eq!(c.undirected_edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn single_edge_and_collider() {
        let c = Dag::from_edges(2, &[(0, 1)]).unwrap().to_cpdag();
        assert_eq!(c.undirected_edges(), vec![(0, 1)]);
        let c = Dag::from_edges(3, &[(0, 1), (2, 1)]).unwrap().to_cpdag();
        assert_eq!(c.directed_edges(), vec![(0, 1), (2, 1)]);
    }

    #[test]
    fn background_on_four_node() {
        let c = four_node().to_cpdag();
        let m = c.orient_with_background(&[(0, 1)]).unwrap();
        assert_eq!(m.as_pdag(), four_node().as_pdag());
        assert_eq!(c.orient_with_background(&[]).unwrap(), c);
        let err = c.orient_with_background(&[(1, 0), (0, 1)]).unwrap_err();
        assert!(matches!(err, Error::Inconsistent(_)));
    }

    #[test]
    fn mpdag_new_rejects_unclosed() {
        // 0 -> 1 - 2 with 0, 2 nonadjacent is not closed.
        let g = Pdag::from_edges(3, &[(0, 1)], &[(1, 2)]).unwrap();
        assert!(Mpdag::new(g).is_err());
    }

    #[test]
    fn markov_blanket_includes_spouses() {
        let g = Dag::from_edges(3, &[(0, 1), (2, 1)]).unwrap();
        assert_eq!(g.markov_blanket(0), NodeSet::from([1, 2]));
    }
}
