//! Random DAGs, linear-Gaussian models and background-knowledge sampling.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ci::Dataset;
use crate::error::{Error, Result};
use crate::graph::{Dag, Node, Pdag};
use crate::local::BackgroundKnowledge;

/// The generator used everywhere a seed is accepted.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const DEFAULT_WEIGHT_RANGE: (f64, f64) = (0.6, 1.2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub avg_degree: f64,
    pub sample_size: usize,
    pub weight_range: (f64, f64),
    pub knowledge_fraction: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 10,
            avg_degree: 2.0,
            sample_size: 1000,
            weight_range: DEFAULT_WEIGHT_RANGE,
            knowledge_fraction: 0.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument("at least two nodes are needed".into()));
        }
        if !(0.0..=1.0).contains(&self.knowledge_fraction) {
            return Err(Error::InvalidArgument("knowledge fraction must lie in [0, 1]".into()));
        }
        let (lo, hi) = self.weight_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument("invalid weight range".into()));
        }
        if !(self.avg_degree >= 0.0) {
            return Err(Error::InvalidArgument("average degree must be non-negative".into()));
        }
        Ok(())
    }

    pub fn n_edges(&self) -> usize {
        (self.n as f64 * self.avg_degree / 2.0).floor() as usize
    }
}

/// Random causal order, then `n_edges` distinct forward pairs chosen uniformly.
pub fn random_dag_with_edges(n: usize, n_edges: usize, rng: &mut impl Rng) -> Result<Dag> {
    let max = n * n.saturating_sub(1) / 2;
    if n_edges > max {
        return Err(Error::InvalidArgument(format!("{n_edges} edges requested but {n} nodes allow {max}")));
    }
    let mut order: Vec<Node> = (0..n).collect();
    order.shuffle(rng);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let edges: Vec<(Node, Node)> = pairs
        .choose_multiple(rng, n_edges)
        .map(|&(i, j)| (order[i], order[j]))
        .collect();
    Dag::from_edges(n, &edges)
}

/// `⌊n·d/2⌋` edges over `n` nodes.
pub fn random_dag(cfg: &SimConfig, rng: &mut impl Rng) -> Result<Dag> {
    cfg.validate()?;
    random_dag_with_edges(cfg.n, cfg.n_edges(), rng)
}

/// A connected DAG without v-structures, so that its CPDAG is a single
/// undirected chain component. Node `k` (in causal order) attaches to a random
/// earlier node `p` and to a random subset of `pa(p)`; every parent set is then
/// a clique. Indices are shuffled at the end.
pub fn random_chain_component(size: usize, rng: &mut impl Rng) -> Result<Dag> {
    if size == 0 {
        return Err(Error::InvalidArgument("empty component".into()));
    }
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); size];
    for k in 1..size {
        let p = rng.random_range(0..k);
        let mut pa = vec![p];
        for &q in &parents[p] {
            if rng.random_bool(0.5) {
                pa.push(q);
            }
        }
        parents[k] = pa;
    }
    let mut label: Vec<Node> = (0..size).collect();
    label.shuffle(rng);
    let edges: Vec<(Node, Node)> = parents
        .iter()
        .enumerate()
        .flat_map(|(k, pa)| pa.iter().map(move |&p| (p, k)))
        .map(|(a, b)| (label[a], label[b]))
        .collect();
    Dag::from_edges(size, &edges)
}

/// Linear-Gaussian structural equation model with unit-variance noise.
#[derive(Debug, Clone)]
pub struct Sem {
    pub dag: Dag,
    pub weights: BTreeMap<(Node, Node), f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemJson {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String, f64)>,
}

impl Sem {
    pub fn new(dag: Dag, weights: BTreeMap<(Node, Node), f64>) -> Result<Self> {
        let edges = dag.directed_edges();
        if edges.len() != weights.len() || edges.iter().any(|e| !weights.contains_key(e)) {
            return Err(Error::Validation("weights must cover exactly the DAG's edges".into()));
        }
        Ok(Sem { dag, weights })
    }

    /// Weights drawn uniformly from `range`.
    pub fn random(dag: Dag, range: (f64, f64), rng: &mut impl Rng) -> Result<Self> {
        let (lo, hi) = range;
        if !(lo <= hi) {
            return Err(Error::InvalidArgument("invalid weight range".into()));
        }
        let weights = dag
            .directed_edges()
            .into_iter()
            .map(|e| (e, if lo == hi { lo } else { rng.random_range(lo..hi) }))
            .collect();
        Sem::new(dag, weights)
    }

    fn weight_matrix(&self) -> DMatrix<f64> {
        let n = self.dag.n_nodes();
        let mut w = DMatrix::zeros(n, n);
        for (&(a, b), &v) in &self.weights {
            w[(a, b)] = v;
        }
        w
    }

    /// `(I − W)^{-T} (I − W)^{-1}`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.dag.n_nodes();
        let inv = (DMatrix::identity(n, n) - self.weight_matrix())
            .try_inverse()
            .expect("I - W is unit triangular up to permutation");
        inv.transpose() * inv
    }

    pub fn correlation(&self) -> DMatrix<f64> {
        let c = self.covariance();
        DMatrix::from_fn(c.nrows(), c.ncols(), |i, j| c[(i, j)] / (c[(i, i)] * c[(j, j)]).sqrt())
    }

    /// Ancestral sampling in causal order.
    pub fn sample(&self, n_samples: usize, rng: &mut impl Rng) -> Result<Dataset> {
        if n_samples == 0 {
            return Err(Error::InvalidArgument("at least one sample is needed".into()));
        }
        let n = self.dag.n_nodes();
        let order = self.dag.topological_order();
        let mut data = DMatrix::zeros(n_samples, n);
        for r in 0..n_samples {
            for &v in &order {
                let mut x: f64 = rng.sample(StandardNormal);
                for &p in self.dag.parents(v) {
                    x += self.weights[&(p, v)] * data[(r, p)];
                }
                data[(r, v)] = x;
            }
        }
        Dataset::new(self.dag.labels().to_vec(), data)
    }

    pub fn to_json(&self) -> SemJson {
        let l = self.dag.labels();
        SemJson {
            nodes: l.to_vec(),
            edges: self.weights.iter().map(|(&(a, b), &w)| (l[a].clone(), l[b].clone(), w)).collect(),
        }
    }
}

fn pick_oriented(edges: &[(Node, Node)], fraction: f64, rng: &mut impl Rng) -> Result<Vec<(Node, Node)>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument("fraction must lie in [0, 1]".into()));
    }
    // The small offset keeps products like 0.3 * 10 from rounding up to 4.
    let k = (fraction * edges.len() as f64 - 1e-9).ceil().max(0.0) as usize;
    Ok(edges.choose_multiple(rng, k.min(edges.len())).copied().collect())
}

/// `⌈fraction · m⌉` of the `m` undirected CPDAG edges, oriented as in `dag`.
pub fn sample_background(dag: &Dag, fraction: f64, rng: &mut impl Rng) -> Result<BackgroundKnowledge> {
    let cpdag = dag.to_cpdag();
    let oriented: Vec<(Node, Node)> = cpdag
        .undirected_edges()
        .into_iter()
        .map(|(a, b)| if dag.has_directed(a, b) { (a, b) } else { (b, a) })
        .collect();
    Ok(BackgroundKnowledge::direct(pick_oriented(&oriented, fraction, rng)?))
}

/// `⌈fraction · |E|⌉` of all DAG edges.
pub fn sample_background_all_edges(dag: &Dag, fraction: f64, rng: &mut impl Rng) -> Result<BackgroundKnowledge> {
    Ok(BackgroundKnowledge::direct(pick_oriented(&dag.directed_edges(), fraction, rng)?))
}

/// Up to `count` distinct pairs `(a, b)` with `a` not an ancestor of `b`.
pub fn sample_non_ancestral(dag: &Dag, count: usize, rng: &mut impl Rng) -> Vec<(Node, Node)> {
    sample_pairs(dag, count, rng, |g, a, b| !g.has_directed_path(a, b))
}

/// Up to `count` distinct pairs `(a, b)` with `a` a proper ancestor of `b`.
pub fn sample_ancestral(dag: &Dag, count: usize, rng: &mut impl Rng) -> Vec<(Node, Node)> {
    sample_pairs(dag, count, rng, |g, a, b| g.has_directed_path(a, b))
}

fn sample_pairs(dag: &Dag, count: usize, rng: &mut impl Rng, keep: impl Fn(&Pdag, Node, Node) -> bool) -> Vec<(Node, Node)> {
    let n = dag.n_nodes();
    let pairs: Vec<(Node, Node)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b && keep(dag, a, b))
        .collect();
    pairs.choose_multiple(rng, count.min(pairs.len())).copied().collect()
}
