use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::meek::{close_with, CloseMode};
use super::{Node, Pdag};
use crate::error::{Error, Result};

/// How a directed edge came to be oriented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    /// Part of a v-structure.
    V,
    /// Given as background knowledge.
    B,
    R1,
    R2,
    R3,
    R4,
}

/// One step of a directed-edge generation sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegsEntry {
    pub edge: (Node, Node),
    pub premises: BTreeSet<(Node, Node)>,
    pub rule: Rule,
}

fn in_v_structure(m: &Pdag, (u, v): (Node, Node)) -> bool {
    m.has_directed(u, v) && m.parents(v).iter().any(|&w| w != u && !m.is_adjacent(w, u))
}

/// `b - a - c` is not a collider at `a` in `m` and `b`, `c` are nonadjacent.
fn open_triple(m: &Pdag, b: Node, a: Node, c: Node) -> bool {
    b != c && !m.is_adjacent(b, c) && !(m.has_directed(b, a) && m.has_directed(c, a))
}

/// Replays `seq` from the skeleton of `m`, validating every step, and checks
/// that the replay ends at `m`.
pub fn check_degs(m: &Pdag, seq: &[DegsEntry], knowledge: &[(Node, Node)]) -> bool {
    let mut h = m.skeleton();
    for entry in seq {
        let (a, b) = entry.edge;
        if a >= m.n_nodes() || b >= m.n_nodes() || !h.has_undirected(a, b) {
            return false;
        }
        if !entry.premises.iter().all(|&(p, q)| p < h.n_nodes() && q < h.n_nodes() && h.has_directed(p, q)) {
            return false;
        }
        let ok = match entry.rule {
            Rule::V => entry.premises.is_empty() && in_v_structure(m, entry.edge),
            Rule::B => entry.premises.is_empty() && knowledge.contains(&entry.edge),
            Rule::R1 => {
                // p -> a - b with p, b nonadjacent.
                entry.premises.len() == 1
                    && entry
                        .premises
                        .iter()
                        .all(|&(p, q)| q == a && p != b && !h.is_adjacent(p, b))
            }
            Rule::R2 => {
                let prem: Vec<_> = entry.premises.iter().copied().collect();
                prem.len() == 2
                    && h.nodes().any(|mid| {
                        prem.contains(&(a, mid)) && prem.contains(&(mid, b))
                    })
            }
            Rule::R3 => {
                // c1 - a - c2, c1 -> b <- c2, a - b.
                let prem: Vec<_> = entry.premises.iter().copied().collect();
                prem.len() == 2
                    && prem.iter().all(|&(_, head)| head == b)
                    && {
                        let (c1, c2) = (prem[0].0, prem[1].0);
                        h.has_undirected(c1, a) && h.has_undirected(c2, a) && open_triple(m, c1, a, c2)
                    }
            }
            Rule::R4 => {
                // b - a - c, c -> d -> b, a - d.
                entry.premises.len() == 1
                    && entry.premises.iter().all(|&(c, d)| {
                        h.has_directed(d, b)
                            && h.has_undirected(a, c)
                            && h.has_undirected(a, d)
                            && open_triple(m, b, a, c)
                    })
            }
        };
        if !ok {
            return false;
        }
        h.orient(a, b).expect("checked undirected above");
    }
    h == *m
}

/// Builds a sequence accepted by [`check_degs`]: v-structure edges first, then
/// each knowledge edge followed by the rule applications it triggers.
pub fn constructive_degs(m: &Pdag, knowledge: &[(Node, Node)]) -> Result<Vec<DegsEntry>> {
    let pattern = m.pattern();
    let mut seq: Vec<DegsEntry> = pattern
        .directed_edges()
        .into_iter()
        .map(|edge| DegsEntry { edge, premises: BTreeSet::new(), rule: Rule::V })
        .collect();
    let plain = |g: &Pdag, a: Node, c: Node, _m: Node| !g.is_adjacent(a, c);
    let mut g = close_with(&pattern, &plain, CloseMode::Strict, Some(&mut seq))?;
    for &(a, b) in knowledge {
        if g.has_directed(a, b) {
            continue;
        }
        if !g.has_undirected(a, b) {
            return Err(Error::Inconsistent(format!(
                "knowledge {} -> {} cannot be oriented",
                g.label(a),
                g.label(b)
            )));
        }
        g.orient(a, b)?;
        seq.push(DegsEntry { edge: (a, b), premises: BTreeSet::new(), rule: Rule::B });
        g = close_with(&g, &plain, CloseMode::Strict, Some(&mut seq))?;
    }
    if g != *m {
        return Err(Error::Inconsistent("knowledge does not reproduce the graph".into()));
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;

    fn entry(edge: (Node, Node), premises: &[(Node, Node)], rule: Rule) -> DegsEntry {
        DegsEntry { edge, premises: premises.iter().copied().collect(), rule }
    }

    #[test]
    fn undirected_graph_with_empty_sequence() {
        let g = Pdag::from_edges(3, &[], &[(0, 1), (1, 2)]).unwrap();
        assert!(check_degs(&g, &[], &[]));
    }

    #[test]
    fn four_node_with_knowledge() {
        // A=0, X=1, B=2, Y=3
        let dag = Dag::from_edges(4, &[(0, 1), (1, 2), (0, 3), (2, 3), (1, 3)]).unwrap();
        let m = dag.to_cpdag().orient_with_background(&[(0, 1)]).unwrap();
        let seq = vec![
            entry((0, 3), &[], Rule::V),
            entry((2, 3), &[], Rule::V),
            entry((1, 3), &[(0, 3), (2, 3)], Rule::R3),
            entry((0, 1), &[], Rule::B),
            entry((1, 2), &[(0, 1)], Rule::R1),
        ];
        assert!(check_degs(&m, &seq, &[(0, 1)]));
        let mut swapped = seq.clone();
        swapped.swap(3, 4);
        assert!(!check_degs(&m, &swapped, &[(0, 1)]));
        let built = constructive_degs(&m, &[(0, 1)]).unwrap();
        assert!(check_degs(&m, &built, &[(0, 1)]));
    }
}
