use super::{Dag, Node, Pdag};
use crate::error::{Error, Result};

pub const DEFAULT_MEC_CAP: usize = 4096;

/// All DAG extensions of `g` with the default cap.
pub fn enumerate_mec(g: &Pdag) -> Result<Vec<Dag>> {
    enumerate_mec_with_cap(g, DEFAULT_MEC_CAP)
}

/// All acyclic orientations of `g`'s undirected edges that keep its directed
/// edges and introduce no v-structure. Edges are oriented in sorted order,
/// trying `a -> b` (for `a < b`) before `b -> a`.
pub fn enumerate_mec_with_cap(g: &Pdag, cap: usize) -> Result<Vec<Dag>> {
    if g.has_directed_cycle() {
        return Err(Error::Validation("graph contains a directed cycle".into()));
    }
    let free = g.undirected_edges();
    let mut work = g.clone();
    let mut out = Vec::new();
    extend(&mut work, &free, 0, cap, &mut out)?;
    Ok(out)
}

fn creates_v_structure(g: &Pdag, u: Node, v: Node) -> bool {
    g.parents(v).iter().any(|&w| w != u && !g.is_adjacent(w, u))
}

fn extend(g: &mut Pdag, free: &[(Node, Node)], i: usize, cap: usize, out: &mut Vec<Dag>) -> Result<()> {
    if i == free.len() {
        if out.len() >= cap {
            return Err(Error::ResourceLimit(format!(
                "equivalence class has more than {cap} members"
            )));
        }
        out.push(Dag::new(g.clone())?);
        return Ok(());
    }
    let (a, b) = free[i];
    for (u, v) in [(a, b), (b, a)] {
        if creates_v_structure(g, u, v) || g.has_directed_path(v, u) {
            continue;
        }
        g.remove_edge(u, v);
        g.add_directed(u, v)?;
        let res = extend(g, free, i + 1, cap, out);
        g.remove_edge(u, v);
        g.add_undirected(u, v)?;
        res?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;

    #[test]
    fn path_has_three_members() {
        let g = Pdag::from_edges(3, &[], &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(enumerate_mec(&g).unwrap().len(), 3);
    }

    #[test]
    fn four_node_has_three_members() {
        let g = Dag::from_edges(4, &[(0, 1), (1, 2), (0, 3), (2, 3), (1, 3)]).unwrap();
        let c = g.to_cpdag();
        let members = enumerate_mec(&c).unwrap();
        assert_eq!(members.len(), 3);
        assert!(members.iter().any(|m| m.as_pdag() == g.as_pdag()));
    }

    #[test]
    fn directed_graph_is_singleton() {
        let g = Dag::from_edges(3, &[(0, 1), (2, 1)]).unwrap();
        assert_eq!(enumerate_mec(&g).unwrap().len(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        // A complete undirected graph on 5 nodes has 120 extensions.
        let mut g = Pdag::new(5);
        for a in 0..5 {
            for b in a + 1..5 {
                g.add_undirected(a, b).unwrap();
            }
        }
        assert_eq!(enumerate_mec(&g).unwrap().len(), 120);
        assert!(matches!(enumerate_mec_with_cap(&g, 100), Err(Error::ResourceLimit(_))));
    }
}
