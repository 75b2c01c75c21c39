use super::{Node, NodeSet, Pdag};

/// Maximal cliques of the skeleton of `g` induced on `nodes`, sorted.
///
/// Bron-Kerbosch with pivoting. An empty node set yields no cliques at all.
pub fn maximal_cliques(g: &Pdag, nodes: &NodeSet) -> Vec<NodeSet> {
    let mut out = Vec::new();
    if nodes.is_empty() {
        return out;
    }
    let nbrs = |v: Node| -> NodeSet { g.adjacent(v).intersection(nodes).copied().collect() };
    bron_kerbosch(&nbrs, NodeSet::new(), nodes.clone(), NodeSet::new(), &mut out);
    out.sort();
    out
}

fn bron_kerbosch(
    nbrs: &dyn Fn(Node) -> NodeSet,
    r: NodeSet,
    mut p: NodeSet,
    mut x: NodeSet,
    out: &mut Vec<NodeSet>,
) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r);
        }
        return;
    }
    let pivot = p
        .union(&x)
        .copied()
        .max_by_key(|&u| (nbrs(u).intersection(&p).count(), std::cmp::Reverse(u)))
        .expect("p is non-empty");
    let pivot_nbrs = nbrs(pivot);
    let candidates: Vec<Node> = p.difference(&pivot_nbrs).copied().collect();
    for v in candidates {
        let nv = nbrs(v);
        let mut r2 = r.clone();
        r2.insert(v);
        let p2 = p.intersection(&nv).copied().collect();
        let x2 = x.intersection(&nv).copied().collect();
        bron_kerbosch(nbrs, r2, p2, x2, out);
        p.remove(&v);
        x.insert(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_and_path() {
        let tri = Pdag::from_edges(3, &[(0, 1)], &[(1, 2), (0, 2)]).unwrap();
        assert_eq!(maximal_cliques(&tri, &NodeSet::from([0, 1, 2])), vec![NodeSet::from([0, 1, 2])]);
        let path = Pdag::from_edges(3, &[], &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            maximal_cliques(&path, &NodeSet::from([0, 1, 2])),
            vec![NodeSet::from([0, 1]), NodeSet::from([1, 2])]
        );
    }

    #[test]
    fn empty_and_isolated() {
        let g = Pdag::new(3);
        assert!(maximal_cliques(&g, &NodeSet::new()).is_empty());
        assert_eq!(
            maximal_cliques(&g, &NodeSet::from([0, 2])),
            vec![NodeSet::from([0]), NodeSet::from([2])]
        );
    }

    #[test]
    fn restricted_to_subset() {
        let tri = Pdag::from_edges(3, &[], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(maximal_cliques(&tri, &NodeSet::from([0, 2])), vec![NodeSet::from([0, 2])]);
    }
}
