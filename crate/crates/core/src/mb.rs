//! Markov-blanket discovery.

use serde::Serialize;

use crate::ci::CiSession;
use crate::error::{Error, Result};
use crate::graph::{Node, NodeSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkovBlanket {
    pub target: Node,
    pub members: NodeSet,
}

impl MarkovBlanket {
    /// The blanket together with the target.
    pub fn plus(&self) -> NodeSet {
        let mut s = self.members.clone();
        s.insert(self.target);
        s
    }
}

/// IAMB over `variables`.
///
/// Growing adds the most associated candidate given the current blanket while
/// it tests dependent; backends without an association score add the first
/// dependent candidate in index order instead. Shrinking then drops, in index
/// order, each member independent of the target given the remaining members.
pub fn find_mb(target: Node, variables: &NodeSet, ci: &CiSession<'_>) -> Result<MarkovBlanket> {
    if !variables.contains(&target) {
        return Err(Error::InvalidArgument(format!("target {target} is not among the variables")));
    }
    let mut mb = NodeSet::new();
    loop {
        let candidates: Vec<Node> = variables
            .iter()
            .copied()
            .filter(|&v| v != target && !mb.contains(&v))
            .collect();
        let Some(&first) = candidates.first() else { break };
        let added = match ci.association(target, first, &mb)? {
            Some(first_score) => {
                let mut best = (first_score, first);
                for &c in &candidates[1..] {
                    let score = ci.association(target, c, &mb)?.unwrap_or(f64::NEG_INFINITY);
                    if score > best.0 {
                        best = (score, c);
                    }
                }
                (!ci.test(target, best.1, &mb)?).then_some(best.1)
            }
            None => {
                let mut found = None;
                for &c in &candidates {
                    if !ci.test(target, c, &mb)? {
                        found = Some(c);
                        break;
                    }
                }
                found
            }
        };
        match added {
            Some(v) => {
                mb.insert(v);
            }
            None => break,
        }
    }
    let members: Vec<Node> = mb.iter().copied().collect();
    for m in members {
        let mut rest = mb.clone();
        rest.remove(&m);
        if ci.test(target, m, &rest)? {
            mb = rest;
        }
    }
    Ok(MarkovBlanket { target, members: mb })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::OracleTest;
    use crate::graph::Dag;

    fn all(n: usize) -> NodeSet {
        (0..n).collect()
    }

    #[test]
    fn chain_middle() {
        let o = OracleTest::new(Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap());
        let s = CiSession::new(&o);
        assert_eq!(find_mb(1, &all(3), &s).unwrap().members, NodeSet::from([0, 2]));
    }

    #[test]
    fn collider_spouse() {
        let o = OracleTest::new(Dag::from_edges(3, &[(0, 1), (2, 1)]).unwrap());
        let s = CiSession::new(&o);
        let mb = find_mb(0, &all(3), &s).unwrap();
        assert_eq!(mb.members, NodeSet::from([1, 2]));
        assert_eq!(mb.plus(), all(3));
    }

    #[test]
    fn isolated_node() {
        let o = OracleTest::new(Dag::from_edges(3, &[(0, 1)]).unwrap());
        let s = CiSession::new(&o);
        assert!(find_mb(2, &all(3), &s).unwrap().members.is_empty());
        assert!(find_mb(5, &all(3), &s).is_err());
    }
}
