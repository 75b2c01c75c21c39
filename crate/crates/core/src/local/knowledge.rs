use super::mbbymb::guarded_closure;
use super::{
    mb_by_mb_mpdag, separated_given, subsets, BackgroundKnowledge, DccClause, LearnOptions, LocalStructure,
};
use crate::ci::CiSession;
use crate::error::{Error, Result};
use crate::graph::{maximal_cliques, Node, NodeSet, Pdag};

fn candidate_sets_in(g: &Pdag, v: Node, forbid_triangles: bool) -> Vec<NodeSet> {
    let sib = g.siblings(v);
    let pa = g.parents(v);
    subsets(sib)
        .into_iter()
        .filter(|q| {
            // No new collider at v.
            let new_collider = q.iter().any(|&r| {
                q.iter().chain(pa).any(|&p| p != r && !g.is_adjacent(p, r))
            });
            // No directed cycle r -> v -> c -> r.
            let cycle = forbid_triangles
                && sib
                    .difference(q)
                    .any(|&c| q.iter().any(|&r| g.has_directed(c, r)));
            !new_collider && !cycle
        })
        .collect()
}

/// Subsets `Q` of `sib(v)` such that orienting `Q -> v` and `v -> sib(v) \ Q`
/// adds no collider at `v` and, when `forbid_triangles`, no directed triangle
/// through `v`.
pub fn candidate_parent_sets(ls: &LocalStructure, v: Node, forbid_triangles: bool) -> Result<Vec<NodeSet>> {
    ls.graph.check_node(v)?;
    if !ls.is_explored(v) {
        return Err(Error::State(format!("node {} has not been explored", ls.graph.label(v))));
    }
    Ok(candidate_sets_in(&ls.graph, v, forbid_triangles))
}

fn intersect_separating(
    g: &Pdag,
    v: Node,
    y: Node,
    family: &[NodeSet],
    ci: &CiSession<'_>,
) -> Result<Option<NodeSet>> {
    let mut acc: Option<NodeSet> = None;
    for q in family {
        let mut cond = g.parents(v).clone();
        cond.extend(q);
        if separated_given(ci, v, y, &cond)? {
            acc = Some(match acc {
                None => q.clone(),
                Some(a) => a.intersection(q).copied().collect(),
            });
        }
    }
    Ok(acc)
}

/// Intersection of the candidate parent sets `Q` of `v` for which
/// `v ⊥ y | pa(v) ∪ Q`. `None` when no candidate separates.
pub fn critical_ancestors(ls: &LocalStructure, v: Node, y: Node, ci: &CiSession<'_>) -> Result<Option<NodeSet>> {
    ls.graph.check_node(y)?;
    let family = candidate_parent_sets(ls, v, true)?;
    intersect_separating(&ls.graph, v, y, &family, ci)
}

fn orient_into(g: &mut Pdag, sources: &NodeSet, sink: Node, strict: bool) -> Result<()> {
    for &c in sources {
        if g.has_undirected(c, sink) {
            g.orient(c, sink)?;
        } else if g.has_directed(sink, c) && strict {
            return Err(Error::Inconsistent(format!(
                "{} -> {} contradicts an oriented edge",
                g.label(c),
                g.label(sink)
            )));
        }
    }
    Ok(())
}

/// Non-ancestral step applied to an already learned structure.
fn apply_non_ancestral(
    ls: &mut LocalStructure,
    items: &[(Node, Node)],
    ci: &CiSession<'_>,
    opts: &LearnOptions,
) -> Result<()> {
    for &(nj, tj) in items {
        if !ls.graph.undirected_component(ls.target).contains(&nj) {
            continue;
        }
        let family = candidate_sets_in(&ls.graph, nj, true);
        let cand = match intersect_separating(&ls.graph, nj, tj, &family, ci)? {
            Some(c) => c,
            None if opts.strict => {
                return Err(Error::Inconsistent(format!(
                    "{} is a definite cause of {} given the learned structure",
                    ls.graph.label(nj),
                    ls.graph.label(tj)
                )));
            }
            None => ls.graph.siblings(nj).clone(),
        };
        orient_into(&mut ls.graph, &cand, nj, opts.strict)?;
        ls.graph = guarded_closure(&ls.graph, ci, opts.strict)?;
    }
    Ok(())
}

/// Direct-edge learning followed by the non-ancestral orientation step.
pub fn local_with_nonancestral(
    x: Node,
    ci: &CiSession<'_>,
    k: &BackgroundKnowledge,
    opts: &LearnOptions,
) -> Result<LocalStructure> {
    if !k.ancestral.is_empty() {
        return Err(Error::InvalidArgument("ancestral knowledge needs the full learner".into()));
    }
    k.validate(ci.n_vars())?;
    let direct = BackgroundKnowledge::direct(k.direct.clone());
    let mut ls = mb_by_mb_mpdag(x, ci, &direct, opts)?;
    apply_non_ancestral(&mut ls, &k.non_ancestral, ci, opts)?;
    ls.ind_set = ci.cache().ind_set();
    ls.ci_tests = ci.count();
    Ok(ls)
}

/// Learning under all three knowledge types.
///
/// The no-knowledge local structure is learned first, ancestral items are
/// turned into clauses over the critical set, then direct edges and the
/// non-ancestral step are applied. Clauses that end up with a single open
/// option become edges; the rest are returned.
pub fn local_all_knowledge(
    x: Node,
    ci: &CiSession<'_>,
    k: &BackgroundKnowledge,
    opts: &LearnOptions,
) -> Result<LocalStructure> {
    k.validate(ci.n_vars())?;
    let mut ls = mb_by_mb_mpdag(x, ci, &BackgroundKnowledge::default(), opts)?;
    let mut clauses: Vec<DccClause> = Vec::new();

    for &(f, t) in &k.ancestral {
        let g = &ls.graph;
        if !g.undirected_component(x).contains(&f) {
            continue;
        }
        let cliques = maximal_cliques(g, g.siblings(f));
        let mut cand = g.siblings(f).clone();
        let mut has_cand = false;
        for q in &cliques {
            let mut cond = g.parents(f).clone();
            cond.extend(q);
            if separated_given(ci, f, t, &cond)? {
                cand = cand.intersection(q).copied().collect();
                has_cand = true;
            }
        }
        if !has_cand {
            continue;
        }
        for q in candidate_sets_in(g, f, false) {
            if cliques.contains(&q) {
                continue;
            }
            let mut cond = g.parents(f).clone();
            cond.extend(&q);
            if separated_given(ci, f, t, &cond)? {
                cand = cand.intersection(&q).copied().collect();
            }
        }
        if cand.is_empty() {
            if opts.strict {
                return Err(Error::Inconsistent(format!(
                    "{} cannot be a cause of {} given the learned structure",
                    g.label(f),
                    g.label(t)
                )));
            }
            continue;
        }
        clauses.push(DccClause { source: f, options: cand });
    }
    resolve_clauses(&mut ls.graph, &mut clauses, ci, opts)?;

    for &(a, b) in &k.direct {
        let g = &mut ls.graph;
        if !g.undirected_component(x).contains(&a) {
            continue;
        }
        if g.has_undirected(a, b) {
            g.orient(a, b)?;
        } else if g.has_directed(b, a) && opts.strict {
            return Err(Error::Inconsistent(format!(
                "knowledge {} -> {} contradicts an oriented edge",
                g.label(a),
                g.label(b)
            )));
        } else if !g.is_adjacent(a, b) && opts.strict {
            return Err(Error::Inconsistent(format!(
                "knowledge {} -> {} is not an edge of the learned graph",
                g.label(a),
                g.label(b)
            )));
        }
        ls.graph = guarded_closure(&ls.graph, ci, opts.strict)?;
    }

    apply_non_ancestral(&mut ls, &k.non_ancestral, ci, opts)?;
    resolve_clauses(&mut ls.graph, &mut clauses, ci, opts)?;
    ls.dcc = clauses;
    ls.ind_set = ci.cache().ind_set();
    ls.ci_tests = ci.count();
    Ok(ls)
}

/// Drops satisfied clauses and options that became parents; a clause left
/// with one undirected option is turned into that edge.
fn resolve_clauses(g: &mut Pdag, clauses: &mut Vec<DccClause>, ci: &CiSession<'_>, opts: &LearnOptions) -> Result<()> {
    loop {
        let mut changed = false;
        let mut keep = Vec::new();
        for mut clause in std::mem::take(clauses) {
            let f = clause.source;
            if clause.options.iter().any(|&c| g.has_directed(f, c)) {
                changed = true;
                continue;
            }
            let before = clause.options.len();
            clause.options.retain(|&c| g.has_undirected(f, c));
            changed |= clause.options.len() != before;
            match clause.options.len() {
                0 => {
                    if opts.strict {
                        return Err(Error::Inconsistent(format!(
                            "no option left for the clause at {}",
                            g.label(f)
                        )));
                    }
                }
                1 => {
                    let c = *clause.options.iter().next().expect("one option");
                    g.orient(f, c)?;
                    *g = guarded_closure(g, ci, opts.strict)?;
                    changed = true;
                }
                _ => keep.push(clause),
            }
        }
        *clauses = keep;
        if !changed {
            return Ok(());
        }
    }
}

/// Picks the learner the knowledge calls for.
pub fn learn_local(x: Node, ci: &CiSession<'_>, k: &BackgroundKnowledge, opts: &LearnOptions) -> Result<LocalStructure> {
    if !k.ancestral.is_empty() {
        local_all_knowledge(x, ci, k, opts)
    } else if !k.non_ancestral.is_empty() {
        local_with_nonancestral(x, ci, k, opts)
    } else {
        mb_by_mb_mpdag(x, ci, k, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::OracleTest;
    use crate::graph::Dag;

    fn four_node() -> OracleTest {
        // A=0, X=1, B=2, Y=3
        OracleTest::new(Dag::from_edges(4, &[(0, 1), (1, 2), (0, 3), (2, 3), (1, 3)]).unwrap())
    }

    fn learn(o: &OracleTest, x: Node) -> LocalStructure {
        let s = CiSession::new(o);
        learn_local(x, &s, &BackgroundKnowledge::default(), &LearnOptions::default()).unwrap()
    }

    #[test]
    fn candidate_sets_four_node() {
        let o = four_node();
        let ls = learn(&o, 0);
        assert_eq!(candidate_parent_sets(&ls, 0, true).unwrap(), vec![NodeSet::new(), NodeSet::from([1])]);
        assert!(matches!(candidate_parent_sets(&ls, 3, true), Err(Error::State(_))));
    }

    #[test]
    fn nonadjacent_siblings_excluded() {
        // v=0 with siblings 1 and 2 that are not adjacent.
        let g = Pdag::from_edges(3, &[], &[(0, 1), (0, 2)]).unwrap();
        let sets = candidate_sets_in(&g, 0, true);
        assert!(!sets.contains(&NodeSet::from([1, 2])));
        assert_eq!(sets.len(), 3);
    }

    #[test]
    fn critical_ancestors_four_node() {
        let o = four_node();
        let s = CiSession::new(&o);
        let ls = learn_local(0, &s, &BackgroundKnowledge::default(), &LearnOptions::default()).unwrap();
        assert_eq!(critical_ancestors(&ls, 0, 2, &s).unwrap(), Some(NodeSet::from([1])));
        let ls = learn_local(1, &s, &BackgroundKnowledge::default(), &LearnOptions::default()).unwrap();
        assert_eq!(critical_ancestors(&ls, 1, 3, &s).unwrap(), None);
    }

    #[test]
    fn non_ancestral_four_node() {
        let o = four_node();
        let s = CiSession::new(&o);
        let k = BackgroundKnowledge { non_ancestral: vec![(0, 2)], ..Default::default() };
        let ls = local_with_nonancestral(0, &s, &k, &LearnOptions::default()).unwrap();
        assert_eq!(ls.parents(0), &NodeSet::from([1]));
        assert!(ls.graph.has_undirected(1, 2));
    }

    #[test]
    fn ancestral_four_node() {
        let o = four_node();
        let s = CiSession::new(&o);
        let k = BackgroundKnowledge { ancestral: vec![(0, 2)], ..Default::default() };
        let ls = local_all_knowledge(0, &s, &k, &LearnOptions::default()).unwrap();
        assert!(ls.dcc.is_empty());
        assert!(ls.graph.has_directed(0, 1));
        assert!(ls.graph.has_directed(1, 2));
        assert!(ls.graph.undirected_edges().is_empty());
    }
}
