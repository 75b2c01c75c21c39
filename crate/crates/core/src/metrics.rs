//! Structural Hamming distance, the kappa coefficient and cost ratios.

use serde::{Deserialize, Serialize};

use crate::causal::RelationKind;
use crate::error::{Error, Result};
use crate::graph::{Node, NodeSet, Pdag};

fn check_same_nodes(a: &Pdag, b: &Pdag) -> Result<()> {
    if a.n_nodes() != b.n_nodes() {
        return Err(Error::InvalidArgument(format!(
            "graphs have {} and {} nodes",
            a.n_nodes(),
            b.n_nodes()
        )));
    }
    Ok(())
}

/// Number of node pairs whose edge status differs.
pub fn shd(a: &Pdag, b: &Pdag) -> Result<usize> {
    check_same_nodes(a, b)?;
    let n = a.n_nodes();
    Ok((0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| a.pair_status(i, j) != b.pair_status(i, j))
        .count())
}

/// Which pairs count towards the local distance around a target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum LocalScope {
    /// Pairs touching the target or one of its true siblings.
    #[default]
    TargetAndSiblings,
    /// Pairs touching the target or any node adjacent to it.
    Neighbourhood,
}

/// Nodes whose pairs are scored, read off the true graph.
pub fn local_scope_nodes(truth: &Pdag, target: Node, scope: LocalScope) -> NodeSet {
    let mut s = match scope {
        LocalScope::TargetAndSiblings => truth.siblings(target).clone(),
        LocalScope::Neighbourhood => truth.adjacent(target),
    };
    s.insert(target);
    s
}

/// Distance over pairs with at least one endpoint in the scope around `target`.
pub fn local_shd(learned: &Pdag, truth: &Pdag, target: Node, scope: LocalScope) -> Result<usize> {
    check_same_nodes(learned, truth)?;
    truth.check_node(target)?;
    let nodes = local_scope_nodes(truth, target, scope);
    let n = truth.n_nodes();
    Ok((0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|(i, j)| nodes.contains(i) || nodes.contains(j))
        .filter(|&(i, j)| learned.pair_status(i, j) != truth.pair_status(i, j))
        .count())
}

/// Counts of (true relation, predicted relation) in the order definite,
/// non-descendant, possible.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix3 {
    pub cells: [[u64; 3]; 3],
}

pub fn relation_index(k: RelationKind) -> usize {
    match k {
        RelationKind::DefiniteDescendant => 0,
        RelationKind::DefiniteNonDescendant => 1,
        RelationKind::PossibleDescendant => 2,
    }
}

impl ConfusionMatrix3 {
    pub fn new(cells: [[u64; 3]; 3]) -> Self {
        ConfusionMatrix3 { cells }
    }

    pub fn record(&mut self, truth: RelationKind, predicted: RelationKind) {
        self.cells[relation_index(truth)][relation_index(predicted)] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix3) {
        for i in 0..3 {
            for j in 0..3 {
                self.cells[i][j] += other.cells[i][j];
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    /// `(p − q) / (1 − q)`; `None` when the table is empty or `q = 1`.
    pub fn kappa(&self) -> Option<f64> {
        kappa(self)
    }
}

pub fn kappa(m: &ConfusionMatrix3) -> Option<f64> {
    let total = m.total() as f64;
    if total == 0.0 {
        return None;
    }
    let diag: u64 = (0..3).map(|i| m.cells[i][i]).sum();
    let p = diag as f64 / total;
    let q: f64 = (0..3)
        .map(|i| {
            let row: u64 = m.cells[i].iter().sum();
            let col: u64 = (0..3).map(|j| m.cells[j][i]).sum();
            row as f64 * col as f64
        })
        .sum::<f64>()
        / (total * total);
    if (1.0 - q).abs() < 1e-15 {
        return None;
    }
    Some((p - q) / (1.0 - q))
}

/// `a / b`, or `None` when `b` is zero.
pub fn ci_ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}
