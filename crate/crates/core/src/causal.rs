//! Three-way classification of causal relations from a target node.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ci::CiSession;
use crate::error::{Error, Result};
use crate::graph::{critical_set, enumerate_mec_with_cap, Dag, Mpdag, Node, NodeSet, Pdag};
use crate::local::{learn_local, separated_given, BackgroundKnowledge, LearnOptions, LocalStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RelationKind {
    DefiniteDescendant,
    DefiniteNonDescendant,
    PossibleDescendant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Flavor {
    Explicit,
    Implicit,
}

/// `flavor` is set exactly when `kind` is `DefiniteDescendant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CausalRelation {
    pub kind: RelationKind,
    pub flavor: Option<Flavor>,
}

impl CausalRelation {
    pub fn definite(flavor: Flavor) -> Self {
        CausalRelation { kind: RelationKind::DefiniteDescendant, flavor: Some(flavor) }
    }

    pub fn non_descendant() -> Self {
        CausalRelation { kind: RelationKind::DefiniteNonDescendant, flavor: None }
    }

    pub fn possible() -> Self {
        CausalRelation { kind: RelationKind::PossibleDescendant, flavor: None }
    }

    /// Short name used in JSON and CSV output.
    pub fn name(&self) -> &'static str {
        match (self.kind, self.flavor) {
            (RelationKind::DefiniteDescendant, Some(Flavor::Implicit)) => "definite-implicit",
            (RelationKind::DefiniteDescendant, _) => "definite-explicit",
            (RelationKind::DefiniteNonDescendant, _) => "non-descendant",
            (RelationKind::PossibleDescendant, _) => "possible",
        }
    }
}

fn check_pair(ls: &LocalStructure, y: Node) -> Result<()> {
    ls.graph.check_node(y)?;
    if y == ls.target {
        return Err(Error::InvalidArgument("y must differ from the target".into()));
    }
    Ok(())
}

/// `x ⊥ y | pa(x)`.
pub fn is_definite_non_descendant(ls: &LocalStructure, y: Node, ci: &CiSession<'_>) -> Result<bool> {
    check_pair(ls, y)?;
    let x = ls.target;
    separated_given(ci, x, y, ls.parents(x))
}

/// `x ⊥̸ y | pa(x) ∪ sib(x)`.
pub fn is_explicit_cause(ls: &LocalStructure, y: Node, ci: &CiSession<'_>) -> Result<bool> {
    check_pair(ls, y)?;
    let x = ls.target;
    let mut s = ls.parents(x).clone();
    s.extend(ls.siblings(x));
    Ok(!separated_given(ci, x, y, &s)?)
}

fn dependent_given_every_clique(ls: &LocalStructure, y: Node, cliques: &[NodeSet], ci: &CiSession<'_>) -> Result<bool> {
    if cliques.is_empty() {
        return Ok(false);
    }
    let x = ls.target;
    for q in cliques {
        let mut s = ls.parents(x).clone();
        s.extend(q);
        if separated_given(ci, x, y, &s)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Not explicit, and `x ⊥̸ y | pa(x) ∪ Q` for every maximal clique `Q` of the
/// sibling-induced subgraph. False when `x` has no siblings.
pub fn is_implicit_cause(ls: &LocalStructure, y: Node, ci: &CiSession<'_>) -> Result<bool> {
    if is_explicit_cause(ls, y, ci)? {
        return Ok(false);
    }
    dependent_given_every_clique(ls, y, &ls.sibling_cliques(ls.target), ci)
}

/// Classifies `y` from the learned local structure of `x` with sibling cliques
/// precomputed. Neighbours of `x` are read off the graph without a test.
pub fn classify_local(ls: &LocalStructure, y: Node, cliques: &[NodeSet], ci: &CiSession<'_>) -> Result<CausalRelation> {
    check_pair(ls, y)?;
    let x = ls.target;
    let g = &ls.graph;
    if g.has_directed(x, y) {
        return Ok(CausalRelation::definite(Flavor::Explicit));
    }
    if g.has_directed(y, x) {
        return Ok(CausalRelation::non_descendant());
    }
    if g.has_undirected(x, y) {
        return Ok(CausalRelation::possible());
    }
    if is_definite_non_descendant(ls, y, ci)? {
        return Ok(CausalRelation::non_descendant());
    }
    if is_explicit_cause(ls, y, ci)? {
        return Ok(CausalRelation::definite(Flavor::Explicit));
    }
    if dependent_given_every_clique(ls, y, cliques, ci)? {
        return Ok(CausalRelation::definite(Flavor::Implicit));
    }
    Ok(CausalRelation::possible())
}

/// Result of a local identification run.
#[derive(Debug, Clone)]
pub struct Identification {
    pub local: LocalStructure,
    pub relations: BTreeMap<Node, CausalRelation>,
    /// Distinct tests used for learning and classification together.
    pub ci_tests: usize,
}

/// Learns the local structure of `x` under `k`, then classifies every other node.
pub fn labiter(x: Node, ci: &CiSession<'_>, k: &BackgroundKnowledge, opts: &LearnOptions) -> Result<Identification> {
    let local = learn_local(x, ci, k, opts)?;
    let cliques = local.sibling_cliques(x);
    let mut relations = BTreeMap::new();
    for y in 0..ci.n_vars() {
        if y != x {
            relations.insert(y, classify_local(&local, y, &cliques, ci)?);
        }
    }
    Ok(Identification { local, relations, ci_tests: ci.count() })
}

/// Critical-set criterion on a full MPDAG. Definite non-descendant when the
/// critical set is empty.
pub fn zuo_classify(g: &Pdag, x: Node, y: Node) -> CausalRelation {
    let c = critical_set(g, x, y);
    if c.is_empty() {
        return CausalRelation::non_descendant();
    }
    let hits_child = c.iter().any(|&v| g.has_directed(x, v));
    let incomplete = c.iter().any(|&a| c.iter().any(|&b| a < b && !g.is_adjacent(a, b)));
    if hits_child || incomplete {
        CausalRelation::definite(explicit_or_implicit(g, x, y))
    } else {
        CausalRelation::possible()
    }
}

fn explicit_or_implicit(g: &Pdag, x: Node, y: Node) -> Flavor {
    if g.has_directed_path(x, y) {
        Flavor::Explicit
    } else {
        Flavor::Implicit
    }
}

/// Ancestry of `x` to `y` over an explicit list of DAGs; `common` supplies the
/// flavor of definite relations.
pub fn classify_over_members(members: &[Dag], common: &Pdag, x: Node, y: Node) -> Result<CausalRelation> {
    if members.is_empty() {
        return Err(Error::Inconsistent("no DAG is consistent with the constraints".into()));
    }
    let hits = members.iter().filter(|d| d.has_directed_path(x, y)).count();
    Ok(if hits == members.len() {
        CausalRelation::definite(explicit_or_implicit(common, x, y))
    } else if hits == 0 {
        CausalRelation::non_descendant()
    } else {
        CausalRelation::possible()
    })
}

/// Classification by enumerating every DAG represented by `g`.
pub fn brute_force_classify(g: &Pdag, x: Node, y: Node, cap: usize) -> Result<CausalRelation> {
    g.check_node(x)?;
    g.check_node(y)?;
    let members = enumerate_mec_with_cap(g, cap)?;
    classify_over_members(&members, g, x, y)
}

/// Members of the class of `g` that satisfy all of `k`.
pub fn restricted_members(g: &Pdag, k: &BackgroundKnowledge, cap: usize) -> Result<Vec<Dag>> {
    k.validate(g.n_nodes())?;
    let members = enumerate_mec_with_cap(g, cap)?;
    Ok(members
        .into_iter()
        .filter(|d| {
            k.direct.iter().all(|&(a, b)| d.has_directed(a, b))
                && k.non_ancestral.iter().all(|&(a, b)| !d.has_directed_path(a, b))
                && k.ancestral.iter().all(|&(a, b)| d.has_directed_path(a, b))
        })
        .collect())
}

/// Edges oriented the same way in every member stay directed; the rest are undirected.
pub fn common_orientation(members: &[Dag]) -> Result<Mpdag> {
    let first = members.first().ok_or_else(|| Error::InvalidArgument("no members".into()))?;
    let mut g = first.as_pdag().empty_like();
    for (a, b) in first.directed_edges() {
        if members.iter().all(|d| d.has_directed(a, b)) {
            g.add_directed(a, b)?;
        } else {
            g.add_undirected(a, b)?;
        }
    }
    Ok(Mpdag::from_closed(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::OracleTest;
    use crate::graph::DEFAULT_MEC_CAP;

    // A=0, X=1, B=2, Y=3
    fn four_node() -> Dag {
        Dag::from_edges(4, &[(0, 1), (1, 2), (0, 3), (2, 3), (1, 3)]).unwrap()
    }

    fn run(x: Node, k: BackgroundKnowledge) -> Identification {
        let o = OracleTest::new(four_node());
        let s = CiSession::new(&o);
        labiter(x, &s, &k, &LearnOptions::default()).unwrap()
    }

    #[test]
    fn four_node_target_a() {
        let id = run(0, BackgroundKnowledge::default());
        assert_eq!(id.relations[&3], CausalRelation::definite(Flavor::Explicit));
        assert_eq!(id.relations[&1], CausalRelation::possible());
        assert_eq!(id.relations[&2], CausalRelation::possible());
    }

    #[test]
    fn four_node_target_a_with_knowledge() {
        let id = run(0, BackgroundKnowledge::direct(vec![(0, 1)]));
        for y in 1..4 {
            assert_eq!(id.relations[&y].kind, RelationKind::DefiniteDescendant);
        }
    }

    #[test]
    fn four_node_target_x() {
        let id = run(1, BackgroundKnowledge::default());
        assert_eq!(id.relations[&3], CausalRelation::definite(Flavor::Explicit));
        assert_eq!(id.relations[&0], CausalRelation::possible());
        assert_eq!(id.relations[&2], CausalRelation::possible());
    }

    #[test]
    fn single_criterion_tests() {
        let o = OracleTest::new(four_node());
        let s = CiSession::new(&o);
        let opts = LearnOptions::default();
        let lx = learn_local(1, &s, &BackgroundKnowledge::default(), &opts).unwrap();
        assert!(!is_definite_non_descendant(&lx, 3, &s).unwrap());
        assert!(is_explicit_cause(&lx, 3, &s).unwrap());
        let la = learn_local(0, &s, &BackgroundKnowledge::default(), &opts).unwrap();
        assert!(!is_definite_non_descendant(&la, 2, &s).unwrap());
        assert!(!is_explicit_cause(&la, 2, &s).unwrap());
        assert!(!is_implicit_cause(&la, 2, &s).unwrap());
    }

    #[test]
    fn isolated_node_is_non_descendant() {
        let o = OracleTest::new(Dag::from_edges(5, &[(0, 1), (1, 2), (0, 3), (2, 3), (1, 3)]).unwrap());
        let s = CiSession::new(&o);
        let ls = learn_local(3, &s, &BackgroundKnowledge::default(), &LearnOptions::default()).unwrap();
        assert!(is_definite_non_descendant(&ls, 4, &s).unwrap());
        assert!(!is_explicit_cause(&ls, 4, &s).unwrap());
    }

    #[test]
    fn zuo_and_brute_force_four_node() {
        let cpdag = four_node().to_cpdag();
        assert_eq!(zuo_classify(&cpdag, 0, 2), CausalRelation::possible());
        assert_eq!(zuo_classify(&cpdag, 1, 3), CausalRelation::definite(Flavor::Explicit));
        assert_eq!(brute_force_classify(&cpdag, 0, 2, DEFAULT_MEC_CAP).unwrap(), CausalRelation::possible());
        assert_eq!(
            brute_force_classify(&cpdag, 1, 3, DEFAULT_MEC_CAP).unwrap(),
            CausalRelation::definite(Flavor::Explicit)
        );
        let m = cpdag.orient_with_background(&[(0, 1)]).unwrap();
        assert_eq!(zuo_classify(&m, 0, 2).kind, RelationKind::DefiniteDescendant);
        assert_eq!(brute_force_classify(&m, 0, 2, DEFAULT_MEC_CAP).unwrap().kind, RelationKind::DefiniteDescendant);
    }

    #[test]
    fn implicit_cause_fan() {
        // x=0 with mutually nonadjacent siblings 1, 2, 3 that all point into y=4;
        // 5 -> 4 shields nothing. Every member has x before y.
        let dag = Dag::from_edges(6, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4), (5, 4)]).unwrap();
        let cpdag = dag.to_cpdag();
        let truth = brute_force_classify(&cpdag, 0, 4, DEFAULT_MEC_CAP).unwrap();
        assert_eq!(truth, CausalRelation::definite(Flavor::Implicit));
        assert_eq!(zuo_classify(&cpdag, 0, 4), truth);
        let o = OracleTest::new(dag);
        let s = CiSession::new(&o);
        let ls = learn_local(0, &s, &BackgroundKnowledge::default(), &LearnOptions::default()).unwrap();
        assert!(is_implicit_cause(&ls, 4, &s).unwrap());
        let id = labiter(0, &s, &BackgroundKnowledge::default(), &LearnOptions::default()).unwrap();
        assert_eq!(id.relations[&4], truth);
    }

    #[test]
    fn restricted_class() {
        let cpdag = four_node().to_cpdag();
        let k = BackgroundKnowledge { non_ancestral: vec![(0, 2)], ..Default::default() };
        let members = restricted_members(&cpdag, &k, DEFAULT_MEC_CAP).unwrap();
        assert_eq!(members.len(), 2);
        let common = common_orientation(&members).unwrap();
        assert!(common.has_directed(1, 0));
        assert!(common.has_undirected(1, 2));
    }
}
