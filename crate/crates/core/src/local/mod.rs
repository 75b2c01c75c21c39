//! Local structure learning around a target under background knowledge.

mod knowledge;
mod marginal;
mod mbbymb;

use serde::{Deserialize, Serialize};

use crate::ci::{CiSession, IndEntry};
use crate::error::{Error, Result};
use crate::graph::{io::GraphJson, maximal_cliques, Node, NodeSet, Pdag};

pub use knowledge::{
    candidate_parent_sets, critical_ancestors, learn_local, local_all_knowledge, local_with_nonancestral,
};
pub use marginal::learn_marginal_cpdag;
pub use mbbymb::{baseline_local_learn, mb_by_mb_mpdag};

pub const KNOWLEDGE_FORMAT: &str = "knowledge/v1";

/// Three kinds of prior causal information, as ordered node pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BackgroundKnowledge {
    /// `(F, T)`: the edge `F -> T` exists.
    pub direct: Vec<(Node, Node)>,
    /// `(N, T)`: `N` is not a cause of `T`.
    pub non_ancestral: Vec<(Node, Node)>,
    /// `(F, T)`: `F` is a cause of `T`.
    pub ancestral: Vec<(Node, Node)>,
}

impl BackgroundKnowledge {
    pub fn direct(edges: Vec<(Node, Node)>) -> Self {
        BackgroundKnowledge { direct: edges, ..Default::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.direct.is_empty() && self.non_ancestral.is_empty() && self.ancestral.is_empty()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let all = self.direct.iter().chain(&self.non_ancestral).chain(&self.ancestral);
        for &(a, b) in all {
            if a >= n || b >= n {
                return Err(Error::InvalidNode(a.max(b)));
            }
            if a == b {
                return Err(Error::Validation("knowledge pair with identical endpoints".into()));
            }
        }
        for pair in &self.non_ancestral {
            if self.ancestral.contains(pair) {
                return Err(Error::Inconsistent(format!(
                    "pair ({}, {}) is both ancestral and non-ancestral",
                    pair.0, pair.1
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, labels: &[String]) -> KnowledgeJson {
        let name = |v: &[(Node, Node)]| v.iter().map(|&(a, b)| [labels[a].clone(), labels[b].clone()]).collect();
        KnowledgeJson {
            format: KNOWLEDGE_FORMAT.to_string(),
            direct: name(&self.direct),
            non_ancestral: name(&self.non_ancestral),
            ancestral: name(&self.ancestral),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeJson {
    pub format: String,
    #[serde(default)]
    pub direct: Vec<[String; 2]>,
    #[serde(default)]
    pub non_ancestral: Vec<[String; 2]>,
    #[serde(default)]
    pub ancestral: Vec<[String; 2]>,
}

impl KnowledgeJson {
    pub fn resolve(&self, labels: &[String]) -> Result<BackgroundKnowledge> {
        if self.format != KNOWLEDGE_FORMAT {
            return Err(Error::Parse(format!(
                "unsupported knowledge format `{}` (expected `{KNOWLEDGE_FORMAT}`)",
                self.format
            )));
        }
        let find = |l: &str| {
            labels.iter().position(|x| x == l).ok_or_else(|| Error::UnknownLabel(l.to_string()))
        };
        let map = |v: &[[String; 2]]| -> Result<Vec<(Node, Node)>> {
            v.iter().map(|[a, b]| Ok((find(a)?, find(b)?))).collect()
        };
        let k = BackgroundKnowledge {
            direct: map(&self.direct)?,
            non_ancestral: map(&self.non_ancestral)?,
            ancestral: map(&self.ancestral)?,
        };
        k.validate(labels.len())?;
        Ok(k)
    }
}

/// "At least one of `options` is a child of `source`".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DccClause {
    pub source: Node,
    pub options: NodeSet,
}

/// Behavioural switches for the learning algorithms.
#[derive(Debug, Clone)]
pub struct LearnOptions {
    /// Reuse previously learned marginal graphs when a blanket is covered.
    pub reuse_shortcuts: bool,
    /// Treat conflicting orientations and contradicted knowledge as errors.
    /// Finite-sample runs set this to `false` and skip conflicts instead.
    pub strict: bool,
    /// When set, the node popped next is the waiting node appearing earliest
    /// in this list; nodes not listed follow in queue order.
    pub pop_priority: Option<Vec<Node>>,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions { reuse_shortcuts: true, strict: true, pop_priority: None }
    }
}

impl LearnOptions {
    pub fn lenient() -> Self {
        LearnOptions { strict: false, ..Default::default() }
    }
}

/// Output of a local learning run.
#[derive(Debug, Clone)]
pub struct LocalStructure {
    pub target: Node,
    /// Learned graph over all variables; only the explored region is complete.
    pub graph: Pdag,
    /// Explored nodes in the order their blankets were found.
    pub done_list: Vec<Node>,
    /// Independencies recorded during the run.
    pub ind_set: Vec<IndEntry>,
    pub dcc: Vec<DccClause>,
    pub ci_tests: usize,
}

impl LocalStructure {
    pub fn parents(&self, v: Node) -> &NodeSet {
        self.graph.parents(v)
    }

    pub fn children(&self, v: Node) -> &NodeSet {
        self.graph.children(v)
    }

    pub fn siblings(&self, v: Node) -> &NodeSet {
        self.graph.siblings(v)
    }

    pub fn is_explored(&self, v: Node) -> bool {
        self.done_list.contains(&v)
    }

    /// Maximal cliques of the skeleton induced on `sib(v)`.
    pub fn sibling_cliques(&self, v: Node) -> Vec<NodeSet> {
        maximal_cliques(&self.graph, self.graph.siblings(v))
    }

    /// The target's parents, children and siblings plus the skeleton over its siblings.
    pub fn to_json(&self) -> LocalStructureJson {
        let g = &self.graph;
        let names = |s: &NodeSet| s.iter().map(|&v| g.label(v).to_string()).collect();
        let sib = g.siblings(self.target);
        let mut sibling_edges = Vec::new();
        for (a, b) in g.skeleton().undirected_edges() {
            if sib.contains(&a) && sib.contains(&b) {
                sibling_edges.push([g.label(a).to_string(), g.label(b).to_string()]);
            }
        }
        LocalStructureJson {
            target: g.label(self.target).to_string(),
            parents: names(g.parents(self.target)),
            children: names(g.children(self.target)),
            siblings: names(sib),
            sibling_skeleton: sibling_edges,
            explored: self.done_list.iter().map(|&v| g.label(v).to_string()).collect(),
            graph: GraphJson::from(&self.explored_graph()),
            dcc: self
                .dcc
                .iter()
                .map(|c| DccJson { source: g.label(c.source).to_string(), options: names(&c.options) })
                .collect(),
            ci_tests: self.ci_tests,
        }
    }

    /// Edges with at least one explored endpoint.
    pub fn explored_graph(&self) -> Pdag {
        let mut out = self.graph.empty_like();
        let done: NodeSet = self.done_list.iter().copied().collect();
        for (a, b) in self.graph.directed_edges() {
            if done.contains(&a) || done.contains(&b) {
                out.add_directed(a, b).expect("copy of a valid graph");
            }
        }
        for (a, b) in self.graph.undirected_edges() {
            if done.contains(&a) || done.contains(&b) {
                out.add_undirected(a, b).expect("copy of a valid graph");
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DccJson {
    pub source: String,
    pub options: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalStructureJson {
    pub target: String,
    pub parents: Vec<String>,
    pub children: Vec<String>,
    pub siblings: Vec<String>,
    pub sibling_skeleton: Vec<[String; 2]>,
    pub explored: Vec<String>,
    pub graph: GraphJson,
    pub dcc: Vec<DccJson>,
    pub ci_tests: usize,
}

/// Independence test that treats a conditioning set containing `y` as separating.
pub(crate) fn separated_given(ci: &CiSession<'_>, x: Node, y: Node, s: &NodeSet) -> Result<bool> {
    if s.contains(&y) {
        return Ok(true);
    }
    ci.test(x, y, s)
}

/// Every subset of `items`, by size then lexicographically.
pub(crate) fn subsets(items: &NodeSet) -> Vec<NodeSet> {
    let v: Vec<Node> = items.iter().copied().collect();
    let mut out: Vec<NodeSet> = (0..1u64 << v.len())
        .map(|mask| v.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect())
        .collect();
    out.sort_by(|a: &NodeSet, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Subsets of `items` with exactly `k` elements, lexicographic.
pub(crate) fn subsets_of_size(items: &[Node], k: usize) -> Vec<NodeSet> {
    fn go(items: &[Node], k: usize, start: usize, cur: &mut Vec<Node>, out: &mut Vec<NodeSet>) {
        if cur.len() == k {
            out.push(cur.iter().copied().collect());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_helpers() {
        let s = subsets(&NodeSet::from([3, 5]));
        assert_eq!(s, vec![NodeSet::new(), NodeSet::from([3]), NodeSet::from([5]), NodeSet::from([3, 5])]);
        assert_eq!(subsets_of_size(&[1, 2, 3], 2).len(), 3);
        assert_eq!(subsets_of_size(&[1, 2], 0), vec![NodeSet::new()]);
        assert!(subsets_of_size(&[1], 2).is_empty());
    }

    #[test]
    fn knowledge_json() {
        let labels: Vec<String> = ["A", "X", "B"].iter().map(|s| s.to_string()).collect();
        let k = BackgroundKnowledge { direct: vec![(0, 1)], non_ancestral: vec![(2, 0)], ancestral: vec![] };
        let j = k.to_json(&labels);
        assert_eq!(j.resolve(&labels).unwrap(), k);
        let mut bad = j.clone();
        bad.direct.push(["A".into(), "Q".into()]);
        assert!(matches!(bad.resolve(&labels), Err(Error::UnknownLabel(_))));
        let both = BackgroundKnowledge { non_ancestral: vec![(0, 2)], ancestral: vec![(0, 2)], ..Default::default() };
        assert!(both.validate(3).is_err());
    }
}
