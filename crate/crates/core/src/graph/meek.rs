use std::collections::{BTreeSet, HashSet};

use super::degs::{DegsEntry, Rule};
use super::{Node, Pdag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CloseMode {
    /// Conflicting orientations and cycles are errors.
    Strict,
    /// Conflicting orientations are skipped, and so is any orientation that closes a cycle.
    Lenient,
}

/// Decides whether `a` and `c` are known to be nonadjacent with `m` in their
/// separating set (so `a - m - c` cannot be a collider).
pub(crate) type Certify<'a> = dyn Fn(&Pdag, Node, Node, Node) -> bool + 'a;

fn plain_certify(g: &Pdag, a: Node, c: Node, _m: Node) -> bool {
    !g.is_adjacent(a, c)
}

/// Finds a rule that orients the undirected edge `u - v` as `u -> v`.
fn find_rule(g: &Pdag, u: Node, v: Node, certify: &Certify<'_>) -> Option<(Rule, Vec<(Node, Node)>)> {
    // R1: a -> u - v, a and v nonadjacent.
    for &a in g.parents(u) {
        if a != v && certify(g, a, v, u) {
            return Some((Rule::R1, vec![(a, u)]));
        }
    }
    // R2: u -> b -> v.
    for &b in g.children(u) {
        if g.has_directed(b, v) {
            return Some((Rule::R2, vec![(u, b), (b, v)]));
        }
    }
    // R3: c - u - d, c -> v <- d, c and d nonadjacent.
    let both: Vec<Node> = g.siblings(u).intersection(g.parents(v)).copied().collect();
    for (i, &c) in both.iter().enumerate() {
        for &d in &both[i + 1..] {
            if certify(g, c, d, u) {
                return Some((Rule::R3, vec![(c, v), (d, v)]));
            }
        }
    }
    // R4: v - u - d, d -> c -> v, u - c, v and d nonadjacent.
    for &c in &both {
        for &d in g.siblings(u).intersection(g.parents(c)) {
            if d != v && certify(g, v, d, u) {
                return Some((Rule::R4, vec![(d, c)]));
            }
        }
    }
    None
}

/// Applies the four orientation rules until nothing changes.
pub(crate) fn close_with(
    g: &Pdag,
    certify: &Certify<'_>,
    mode: CloseMode,
    mut trace: Option<&mut Vec<DegsEntry>>,
) -> Result<Pdag> {
    let strict = mode == CloseMode::Strict;
    if strict && g.has_directed_cycle() {
        return Err(Error::Inconsistent("directed cycle among oriented edges".into()));
    }
    let mut g = g.clone();
    loop {
        let mut proposals = Vec::new();
        for (a, b) in g.undirected_edges() {
            if find_rule(&g, a, b, certify).is_some() {
                proposals.push((a, b));
            }
            if find_rule(&g, b, a, certify).is_some() {
                proposals.push((b, a));
            }
        }
        if proposals.is_empty() {
            break;
        }
        let proposed: HashSet<(Node, Node)> = proposals.iter().copied().collect();
        let mut conflicted = HashSet::new();
        for &(a, b) in &proposals {
            if proposed.contains(&(b, a)) {
                if strict {
                    return Err(Error::Inconsistent(format!(
                        "edge {} -- {} is forced in both directions",
                        g.label(a.min(b)),
                        g.label(a.max(b))
                    )));
                }
                conflicted.insert((a, b));
            }
        }
        let mut applied = false;
        for (u, v) in proposals {
            if conflicted.contains(&(u, v)) || !g.has_undirected(u, v) {
                continue;
            }
            // Earlier orientations in this pass may have consumed the premise.
            let Some((rule, premises)) = find_rule(&g, u, v, certify) else {
                continue;
            };
            if !strict && g.has_directed_path(v, u) {
                continue;
            }
            g.orient(u, v)?;
            applied = true;
            if let Some(t) = trace.as_deref_mut() {
                t.push(DegsEntry {
                    edge: (u, v),
                    premises: premises.into_iter().collect::<BTreeSet<_>>(),
                    rule,
                });
            }
        }
        if strict && g.has_directed_cycle() {
            return Err(Error::Inconsistent("orientation rules closed a directed cycle".into()));
        }
        if !applied {
            break;
        }
    }
    Ok(g)
}

/// Closure under the orientation rules; a two-way conflict is an error.
pub fn meek_closure(g: &Pdag) -> Result<Pdag> {
    close_with(g, &plain_certify, CloseMode::Strict, None)
}

/// Like [`meek_closure`] but also returns the rule application that produced
/// each new directed edge, in order.
pub fn meek_closure_traced(g: &Pdag) -> Result<(Pdag, Vec<DegsEntry>)> {
    let mut trace = Vec::new();
    let out = close_with(g, &plain_certify, CloseMode::Strict, Some(&mut trace))?;
    Ok((out, trace))
}

/// Closure that skips conflicting orientations instead of failing. Meant for
/// graphs estimated from finite samples.
pub fn meek_closure_lenient(g: &Pdag) -> Pdag {
    close_with(g, &plain_certify, CloseMode::Lenient, None).expect("lenient closure does not fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r1_propagates() {
        let g = Pdag::from_edges(3, &[(0, 1)], &[(1, 2)]).unwrap();
        let c = meek_closure(&g).unwrap();
        assert!(c.has_directed(1, 2));
    }

    #[test]
    fn r2_closes_triangle() {
        let g = Pdag::from_edges(3, &[(0, 1), (1, 2)], &[(0, 2)]).unwrap();
        assert!(meek_closure(&g).unwrap().has_directed(0, 2));
    }

    #[test]
    fn r3_four_node_pattern() {
        // A=0, X=1, B=2, Y=3: A->Y<-B plus A-X, B-X, X-Y.
        let g = Pdag::from_edges(4, &[(0, 3), (2, 3)], &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let (c, trace) = meek_closure_traced(&g).unwrap();
        assert!(c.has_directed(1, 3));
        assert_eq!(c.undirected_edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].rule, Rule::R3);
    }

    #[test]
    fn r4_fires() {
        // b=1 - a=0 - c=2, c -> d=3 -> b, a - d, b and c nonadjacent.
        let g = Pdag::from_edges(4, &[(2, 3), (3, 1)], &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let c = meek_closure(&g).unwrap();
        assert!(c.has_directed(0, 1));
    }

    #[test]
    fn idempotent() {
        let g = Pdag::from_edges(4, &[(0, 3), (2, 3)], &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let once = meek_closure(&g).unwrap();
        assert_eq!(meek_closure(&once).unwrap(), once);
    }

    #[test]
    fn two_way_conflict() {
        // 0 -> 1 - 2 <- 3 with 0,2 and 1,3 nonadjacent forces 1 - 2 both ways.
        let g = Pdag::from_edges(4, &[(0, 1), (3, 2)], &[(1, 2)]).unwrap();
        assert!(matches!(meek_closure(&g), Err(Error::Inconsistent(_))));
        let lenient = meek_closure_lenient(&g);
        assert!(lenient.has_undirected(1, 2));
    }
}
