use std::collections::{BTreeMap, HashMap};

use super::subsets_of_size;
use crate::ci::CiSession;
use crate::error::{Error, Result};
use crate::graph::{Node, NodeSet, Pdag};

/// PC-stable restricted to `scope`, followed by v-structure orientation.
///
/// Separating sets are drawn from `scope` only, and every independence found is
/// recorded in the session cache. Returns a graph over all variables whose edges
/// lie inside `scope`. When two v-structures disagree on an edge under finite
/// samples, the edge is left undirected.
pub fn learn_marginal_cpdag(scope: &NodeSet, ci: &CiSession<'_>) -> Result<Pdag> {
    if scope.is_empty() {
        return Err(Error::InvalidArgument("empty scope".into()));
    }
    let n = ci.n_vars();
    if let Some(&bad) = scope.iter().find(|&&v| v >= n) {
        return Err(Error::InvalidNode(bad));
    }
    let nodes: Vec<Node> = scope.iter().copied().collect();
    let mut adj: BTreeMap<Node, NodeSet> = nodes
        .iter()
        .map(|&v| (v, scope.iter().copied().filter(|&u| u != v).collect()))
        .collect();
    let mut sepsets: HashMap<(Node, Node), NodeSet> = HashMap::new();

    let mut level = 0;
    loop {
        if !adj.values().any(|a| a.len() > level) {
            break;
        }
        let frozen = adj.clone();
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                if !adj[&a].contains(&b) {
                    continue;
                }
                let mut removed = false;
                for (from, to) in [(a, b), (b, a)] {
                    let pool: Vec<Node> = frozen[&from].iter().copied().filter(|&v| v != to).collect();
                    if pool.len() < level {
                        continue;
                    }
                    for s in subsets_of_size(&pool, level) {
                        if ci.test(a, b, &s)? {
                            sepsets.insert((a, b), s);
                            removed = true;
                            break;
                        }
                    }
                    if removed {
                        break;
                    }
                }
                if removed {
                    adj.get_mut(&a).expect("node in scope").remove(&b);
                    adj.get_mut(&b).expect("node in scope").remove(&a);
                }
            }
        }
        level += 1;
    }

    let mut g = Pdag::new(n);
    for (&a, nb) in &adj {
        for &b in nb.range(a + 1..) {
            g.add_undirected(a, b)?;
        }
    }
    // Collect arrowheads first so the result does not depend on processing order.
    let mut heads: BTreeMap<(Node, Node), bool> = BTreeMap::new();
    for &m in &nodes {
        let nb: Vec<Node> = adj[&m].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &c in &nb[i + 1..] {
                if adj[&a].contains(&c) {
                    continue;
                }
                let sep = sepsets.get(&(a.min(c), a.max(c)));
                if sep.is_some_and(|s| !s.contains(&m)) {
                    heads.insert((a, m), true);
                    heads.insert((c, m), true);
                }
            }
        }
    }
    for &(a, b) in heads.keys() {
        if heads.contains_key(&(b, a)) {
            continue;
        }
        g.orient(a, b)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::OracleTest;
    use crate::graph::Dag;

    #[test]
    fn chain_and_collider() {
        let o = OracleTest::new(Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap());
        let s = CiSession::new(&o);
        let g = learn_marginal_cpdag(&NodeSet::from([0, 1, 2]), &s).unwrap();
        assert_eq!(g.undirected_edges(), vec![(0, 1), (1, 2)]);
        assert!(g.directed_edges().is_empty());
        assert!(s.cache().has_witness(0, 2, 1));

        let o = OracleTest::new(Dag::from_edges(3, &[(0, 1), (2, 1)]).unwrap());
        let s = CiSession::new(&o);
        let g = learn_marginal_cpdag(&NodeSet::from([0, 1, 2]), &s).unwrap();
        assert_eq!(g.directed_edges(), vec![(0, 1), (2, 1)]);
    }

    #[test]
    fn four_node_scope() {
        // A=0, X=1, B=2, Y=3
        let dag = Dag::from_edges(4, &[(0, 1), (1, 2), (0, 3), (2, 3), (1, 3)]).unwrap();
        let o = OracleTest::new(dag.clone());
        let s = CiSession::new(&o);
        let g = learn_marginal_cpdag(&NodeSet::from([0, 1, 2, 3]), &s).unwrap();
        assert_eq!(g.directed_edges(), vec![(0, 3), (2, 3)]);
        assert_eq!(g.undirected_edges(), vec![(0, 1), (1, 2), (1, 3)]);
        assert_eq!(g.skeleton(), dag.skeleton());
    }
}
