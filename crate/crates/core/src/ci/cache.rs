use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use super::CiTest;
use crate::error::{Error, Result};
use crate::graph::{Node, NodeSet};

type Key = (Node, Node, NodeSet);

/// A recorded independence `a ⊥ b | sepset` with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndEntry {
    pub a: Node,
    pub b: Node,
    pub sepset: NodeSet,
}

#[derive(Debug, Default)]
struct State {
    store: HashMap<Key, bool>,
    ind_set: Vec<IndEntry>,
    by_pair: HashMap<(Node, Node), Vec<usize>>,
    evaluations: usize,
}

/// Memoises test results under a canonical key and keeps every independence
/// found, in discovery order. Safe to share between threads.
#[derive(Debug, Default)]
pub struct CiCache {
    state: Mutex<State>,
}

fn canonical(a: Node, b: Node, s: &NodeSet) -> Key {
    (a.min(b), a.max(b), s.clone())
}

impl CiCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Cached result of `inner.test(a, b, s)`; the inner test runs at most once per key.
    pub fn test(&self, inner: &dyn CiTest, a: Node, b: Node, s: &NodeSet) -> Result<bool> {
        if a == b || s.contains(&a) || s.contains(&b) {
            return Err(Error::InvalidArgument(
                "tested pair must be distinct and outside the conditioning set".into(),
            ));
        }
        let key = canonical(a, b, s);
        if let Some(&hit) = self.lock().store.get(&key) {
            return Ok(hit);
        }
        // Run the test outside the lock; a racing duplicate is resolved below.
        let result = inner.test(key.0, key.1, s)?;
        let mut st = self.lock();
        if let Some(&hit) = st.store.get(&key) {
            return Ok(hit);
        }
        st.evaluations += 1;
        if result {
            let idx = st.ind_set.len();
            st.ind_set.push(IndEntry { a: key.0, b: key.1, sepset: key.2.clone() });
            st.by_pair.entry((key.0, key.1)).or_default().push(idx);
        }
        st.store.insert(key, result);
        Ok(result)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Number of distinct tests evaluated.
    pub fn count(&self) -> usize {
        self.lock().evaluations
    }

    pub fn ind_set(&self) -> Vec<IndEntry> {
        self.lock().ind_set.clone()
    }

    /// Cached answer without running anything.
    pub fn lookup(&self, a: Node, b: Node, s: &NodeSet) -> Option<bool> {
        self.lock().store.get(&canonical(a, b, s)).copied()
    }

    /// First recorded separating set of `a` and `b`.
    pub fn sepset(&self, a: Node, b: Node) -> Option<NodeSet> {
        let st = self.lock();
        let idx = st.by_pair.get(&(a.min(b), a.max(b)))?;
        Some(st.ind_set[idx[0]].sepset.clone())
    }

    /// Whether some recorded independence of `a` and `b` has `m` in its separating set.
    pub fn has_witness(&self, a: Node, b: Node, m: Node) -> bool {
        let st = self.lock();
        st.by_pair
            .get(&(a.min(b), a.max(b)))
            .is_some_and(|idx| idx.iter().any(|&i| st.ind_set[i].sepset.contains(&m)))
    }

    pub fn is_separated(&self, a: Node, b: Node) -> bool {
        self.lock().by_pair.contains_key(&(a.min(b), a.max(b)))
    }
}

/// A tester paired with its cache: every query in a learning run goes through here.
pub struct CiSession<'t> {
    tester: &'t dyn CiTest,
    cache: CiCache,
}

impl<'t> CiSession<'t> {
    pub fn new(tester: &'t dyn CiTest) -> Self {
        CiSession { tester, cache: CiCache::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.tester.n_vars()
    }

    pub fn test(&self, a: Node, b: Node, s: &NodeSet) -> Result<bool> {
        self.cache.test(self.tester, a, b, s)
    }

    pub fn association(&self, a: Node, b: Node, s: &NodeSet) -> Result<Option<f64>> {
        self.tester.association(a, b, s)
    }

    pub fn cache(&self) -> &CiCache {
        &self.cache
    }

    pub fn count(&self) -> usize {
        self.cache.count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::OracleTest;
    use crate::graph::Dag;

    #[test]
    fn memoises_and_records() {
        let o = OracleTest::new(Dag::from_edges(4, &[(0, 1), (1, 2), (3, 2)]).unwrap());
        let s = CiSession::new(&o);
        assert!(s.test(0, 2, &NodeSet::from([1])).unwrap());
        assert!(s.test(2, 0, &NodeSet::from([1])).unwrap());
        assert_eq!(s.count(), 1);
        assert!(!s.test(0, 3, &NodeSet::from([2])).unwrap());
        assert!(!s.test(3, 0, &NodeSet::from([2])).unwrap());
        assert_eq!(s.count(), 2);
        let ind = s.cache().ind_set();
        assert_eq!(ind, vec![IndEntry { a: 0, b: 2, sepset: NodeSet::from([1]) }]);
        assert!(s.cache().has_witness(2, 0, 1));
        assert!(!s.cache().has_witness(0, 2, 3));
        assert_eq!(s.cache().sepset(0, 2), Some(NodeSet::from([1])));
    }

    #[test]
    fn rejects_bad_query() {
        let o = OracleTest::new(Dag::from_edges(2, &[(0, 1)]).unwrap());
        let s = CiSession::new(&o);
        assert!(s.test(0, 0, &NodeSet::new()).is_err());
        assert!(s.test(0, 1, &NodeSet::from([0])).is_err());
        assert_eq!(s.count(), 0);
    }
}
