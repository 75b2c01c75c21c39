use std::collections::VecDeque;

use super::{learn_marginal_cpdag, BackgroundKnowledge, LearnOptions, LocalStructure};
use crate::ci::CiSession;
use crate::error::{Error, Result};
use crate::graph::{close_with, CloseMode, Node, NodeSet, Pdag};
use crate::mb::find_mb;

/// Orientation rules on a partially learned graph. A rule that needs two nodes
/// to be nonadjacent (with the middle node in their separating set) only fires
/// when a recorded independence certifies it.
pub(crate) fn guarded_closure(g: &Pdag, ci: &CiSession<'_>, strict: bool) -> Result<Pdag> {
    let cache = ci.cache();
    let certify = |g: &Pdag, a: Node, c: Node, m: Node| !g.is_adjacent(a, c) && cache.has_witness(a, c, m);
    let mode = if strict { CloseMode::Strict } else { CloseMode::Lenient };
    close_with(g, &certify, mode, None)
}

/// Places `a -> b` in `g`, or reports why it cannot.
fn put_directed(g: &mut Pdag, a: Node, b: Node) -> std::result::Result<(), String> {
    if g.has_directed(a, b) {
        return Ok(());
    }
    if g.has_directed(b, a) {
        return Err(format!("{} -> {} contradicts an oriented edge", g.label(a), g.label(b)));
    }
    if g.has_undirected(a, b) {
        g.orient(a, b).expect("edge is undirected");
    } else if g.has_directed_path(b, a) {
        return Err(format!("{} -> {} closes a directed cycle", g.label(a), g.label(b)));
    } else {
        g.add_directed(a, b).expect("pair is free");
    }
    Ok(())
}

fn pop_next(wait: &mut VecDeque<Node>, priority: Option<&[Node]>) -> Option<Node> {
    let idx = match priority {
        None => 0,
        Some(order) => {
            let rank = |v: &Node| order.iter().position(|u| u == v).unwrap_or(usize::MAX);
            let best = wait.iter().map(rank).enumerate().min_by_key(|&(i, r)| (r, i))?;
            best.0
        }
    };
    wait.remove(idx)
}

/// Blanket-by-blanket exploration of the target's undirected neighbourhood,
/// starting from the direct-edge knowledge and orienting as it goes.
pub fn mb_by_mb_mpdag(
    x: Node,
    ci: &CiSession<'_>,
    k: &BackgroundKnowledge,
    opts: &LearnOptions,
) -> Result<LocalStructure> {
    let n = ci.n_vars();
    if x >= n {
        return Err(Error::InvalidNode(x));
    }
    if !k.non_ancestral.is_empty() || !k.ancestral.is_empty() {
        return Err(Error::InvalidArgument(
            "this learner accepts direct-edge knowledge only".into(),
        ));
    }
    k.validate(n)?;
    let mut g = Pdag::new(n);
    for &(a, b) in &k.direct {
        if let Err(msg) = put_directed(&mut g, a, b) {
            if opts.strict {
                return Err(Error::Inconsistent(format!("knowledge {msg}")));
            }
        }
    }
    let all: NodeSet = (0..n).collect();
    let mut wait: VecDeque<Node> = VecDeque::from([x]);
    let mut done: Vec<Node> = Vec::new();
    let mut done_set = NodeSet::new();
    let mut learned: Vec<(NodeSet, Pdag)> = Vec::new();

    while let Some(z) = pop_next(&mut wait, opts.pop_priority.as_deref()) {
        done.push(z);
        done_set.insert(z);
        let mb = find_mb(z, &all, ci)?;
        let plus = mb.plus();

        let reused = if opts.reuse_shortcuts {
            learned
                .iter()
                .find(|(other, _)| plus.is_subset(other))
                .map(|(_, l)| l.induced(&plus))
                .or_else(|| mb.members.is_subset(&done_set).then(|| g.induced(&plus)))
        } else {
            None
        };
        let l = match reused {
            Some(l) => l,
            None => learn_marginal_cpdag(&plus, ci)?,
        };

        // Knowledge edges at z must survive in the learned adjacency.
        for &(a, b) in &k.direct {
            if (a == z || b == z) && !l.is_adjacent(a, b) && opts.strict {
                return Err(Error::Inconsistent(format!(
                    "knowledge {} -> {} is not an edge of the learned graph",
                    g.label(a),
                    g.label(b)
                )));
            }
        }

        let mut conflicts = Vec::new();
        for w in l.adjacent(z) {
            if l.has_directed(z, w) || l.has_directed(w, z) {
                let (a, b) = if l.has_directed(z, w) { (z, w) } else { (w, z) };
                if let Err(msg) = put_directed(&mut g, a, b) {
                    conflicts.push(msg);
                }
            } else if !g.is_adjacent(z, w) {
                g.add_undirected(z, w)?;
            }
        }
        for (a, m, c) in l.v_structures() {
            if z == a || z == m || z == c {
                for p in [a, c] {
                    if let Err(msg) = put_directed(&mut g, p, m) {
                        conflicts.push(msg);
                    }
                }
            }
        }
        if opts.strict {
            if let Some(msg) = conflicts.into_iter().next() {
                return Err(Error::Inconsistent(msg));
            }
        }
        learned.push((plus, l));

        g = guarded_closure(&g, ci, opts.strict)?;

        let reach = g.undirected_component(x);
        wait.retain(|v| reach.contains(v));
        for v in reach {
            if !done_set.contains(&v) && !wait.contains(&v) {
                wait.push_back(v);
            }
        }
    }

    Ok(LocalStructure {
        target: x,
        graph: g,
        done_list: done,
        ind_set: ci.cache().ind_set(),
        dcc: Vec::new(),
        ci_tests: ci.count(),
    })
}

/// Learns the chain component of `x` without knowledge, then applies the
/// direct-edge knowledge and closes the result under the orientation rules.
/// `ci_tests` reflects the full no-knowledge exploration.
pub fn baseline_local_learn(
    x: Node,
    ci: &CiSession<'_>,
    k: &BackgroundKnowledge,
    opts: &LearnOptions,
) -> Result<LocalStructure> {
    if !k.non_ancestral.is_empty() || !k.ancestral.is_empty() {
        return Err(Error::InvalidArgument(
            "this learner accepts direct-edge knowledge only".into(),
        ));
    }
    let mut ls = mb_by_mb_mpdag(x, ci, &BackgroundKnowledge::default(), opts)?;
    let mut g = ls.graph.clone();
    for &(a, b) in &k.direct {
        if let Err(msg) = put_directed(&mut g, a, b) {
            if opts.strict {
                return Err(Error::Inconsistent(format!("knowledge {msg}")));
            }
        }
    }
    ls.graph = guarded_closure(&g, ci, opts.strict)?;
    ls.ind_set = ci.cache().ind_set();
    ls.ci_tests = ci.count();
    Ok(ls)
}
