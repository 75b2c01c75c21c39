use super::{NodeSet, Pdag};

/// A maximal set of nodes joined by undirected paths, with its induced subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BComponent {
    pub nodes: NodeSet,
    pub graph: Pdag,
}

/// Partition of the nodes by undirected connectivity, ordered by smallest member.
pub fn b_components(g: &Pdag) -> Vec<BComponent> {
    let mut seen = vec![false; g.n_nodes()];
    let mut out = Vec::new();
    for v in g.nodes() {
        if seen[v] {
            continue;
        }
        let nodes = g.undirected_component(v);
        for &u in &nodes {
            seen[u] = true;
        }
        let graph = g.induced(&nodes);
        out.push(BComponent { nodes, graph });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;

    #[test]
    fn four_node_components() {
        let c = Dag::from_edges(4, &[(0, 1), (1, 2), (0, 3), (2, 3), (1, 3)]).unwrap().to_cpdag();
        let comps: Vec<NodeSet> = b_components(&c).into_iter().map(|b| b.nodes).collect();
        assert_eq!(comps, vec![NodeSet::from([0, 1, 2]), NodeSet::from([3])]);
    }

    #[test]
    fn directed_graph_gives_singletons() {
        let g = Pdag::from_edges(3, &[(0, 1), (1, 2)], &[]).unwrap();
        assert_eq!(b_components(&g).len(), 3);
    }
}
