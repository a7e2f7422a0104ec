//! Absorbing Markov chain on the network vertices plus the sink.

use std::collections::VecDeque;

use nalgebra::{DMatrix, Matrix2, Vector2};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::linalg::inverse_identity_minus;
use crate::network::DirectedNetwork;

#[derive(Debug, thiserror::Error)]
pub enum MarkovError {
    #[error("recurrent subnetwork never reaches the sink: vertices {0:?}")]
    Recurrent(Vec<usize>),
    #[error("I - pi is numerically singular")]
    Singular,
    #[error("singular 2x2 visit block for pair ({0}, {1})")]
    SingularPair(usize, usize),
    #[error("pair non-return needs distinct vertices, got ({0}, {0})")]
    SamePair(usize),
}

impl MarkovError {
    pub fn is_numerical(&self) -> bool {
        !matches!(self, MarkovError::SamePair(_))
    }
}

/// Finds a closed strongly connected class: no edge leaves it and none of its
/// vertices leaks mass to the sink. `leak[a]` is the sink mass of `a`.
pub fn find_recurrent_class(n: usize, entries: &[(usize, usize, f64)], leak: &[f64]) -> Option<Vec<usize>> {
    let mut graph = DiGraph::<(), ()>::with_capacity(n, entries.len());
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for &(i, j, p) in entries {
        if p > 0.0 {
            graph.add_edge(nodes[i], nodes[j], ());
        }
    }
    let mut comp_of = vec![usize::MAX; n];
    let sccs = tarjan_scc(&graph);
    for (c, members) in sccs.iter().enumerate() {
        for m in members {
            comp_of[m.index()] = c;
        }
    }
    let mut closed = vec![true; sccs.len()];
    for a in 0..n {
        if leak[a] > 0.0 {
            closed[comp_of[a]] = false;
        }
    }
    for &(i, j, p) in entries {
        if p > 0.0 && comp_of[i] != comp_of[j] {
            closed[comp_of[i]] = false;
        }
    }
    sccs.iter().zip(&closed).find(|(_, &c)| c).map(|(members, _)| {
        let mut v: Vec<usize> = members.iter().map(|m| m.index()).collect();
        v.sort_unstable();
        v
    })
}

fn fundamental_from_entries(n: usize, entries: &[(usize, usize, f64)], leak: &[f64]) -> Result<DMatrix<f64>, MarkovError> {
    if let Some(class) = find_recurrent_class(n, entries, leak) {
        return Err(MarkovError::Recurrent(class));
    }
    inverse_identity_minus(n, entries).ok_or(MarkovError::Singular)
}

/// `G = (I - pi_V)^-1` for a substochastic vertex-restricted transition matrix.
pub fn fundamental_matrix(pi_v: &DMatrix<f64>) -> Result<DMatrix<f64>, MarkovError> {
    let n = pi_v.nrows();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if pi_v[(i, j)] != 0.0 {
                entries.push((i, j, pi_v[(i, j)]));
            }
        }
    }
    let leak: Vec<f64> = (0..n).map(|i| 1.0 - pi_v.row(i).sum()).map(|l| if l > 1e-12 { l } else { 0.0 }).collect();
    fundamental_from_entries(n, &entries, &leak)
}

/// `U(x) = 1 / G[x, x]`: probability of never returning to `x`.
pub fn nonreturn_single(g: &DMatrix<f64>) -> Vec<f64> {
    g.diagonal().iter().map(|d| 1.0 / d).collect()
}

/// Probability that a walk leaving `x` never visits `{x, y}` again.
///
/// Each out-neighbor `x1` outside the pair contributes `pi[x,x1] (1 - h(x1))`
/// where `h(x1)` is the probability of hitting the pair from `x1`, recovered
/// from the first-hit decomposition of the visit counts. Mass sent to the sink
/// never hits the pair and counts in full.
pub fn nonreturn_pair(g: &DMatrix<f64>, net: &DirectedNetwork, x: usize, y: usize) -> Result<f64, MarkovError> {
    if x == y {
        return Err(MarkovError::SamePair(x));
    }
    let block = Matrix2::new(g[(x, x)], g[(x, y)], g[(y, x)], g[(y, y)]);
    let b = block.lu().solve(&Vector2::new(1.0, 1.0)).filter(|b| b.iter().all(|v| v.is_finite()));
    let b = b.ok_or(MarkovError::SingularPair(x, y))?;
    let mut total = net.sink_mass(x);
    for e in net.out_edges(x) {
        let x1 = e.head;
        if x1 == x || x1 == y {
            continue;
        }
        let hit = g[(x1, x)] * b[0] + g[(x1, y)] * b[1];
        total += e.prob * (1.0 - hit.clamp(0.0, 1.0));
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Directed transitive closure computed by breadth-first search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reachability {
    n: usize,
    bits: Vec<bool>,
}

impl Reachability {
    pub fn reaches(&self, x: usize, y: usize) -> bool {
        self.bits[x * self.n + y]
    }

    /// True when a directed path exists in at least one direction.
    pub fn connected(&self, x: usize, y: usize) -> bool {
        self.reaches(x, y) || self.reaches(y, x)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

pub fn reachability(net: &DirectedNetwork) -> Reachability {
    let n = net.len();
    let mut bits = vec![false; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let row = &mut bits[s * n..(s + 1) * n];
        row[s] = true;
        queue.push_back(s);
        while let Some(a) = queue.pop_front() {
            for e in net.out_edges(a) {
                if !row[e.head] {
                    row[e.head] = true;
                    queue.push_back(e.head);
                }
            }
        }
    }
    Reachability { n, bits }
}

/// Visit counts, non-return probabilities and reachability of a network.
#[derive(Debug, Clone)]
pub struct MarkovSolution {
    pub g: DMatrix<f64>,
    pub u: Vec<f64>,
    pub reach: Reachability,
}

impl MarkovSolution {
    pub fn solve(net: &DirectedNetwork) -> Result<Self, MarkovError> {
        let g = fundamental_from_entries(net.len(), &net.transition_entries(), net.sink_masses())?;
        let u = nonreturn_single(&g);
        Ok(Self { g, u, reach: reachability(net) })
    }

    pub fn pair(&self, net: &DirectedNetwork, x: usize, y: usize) -> Result<f64, MarkovError> {
        nonreturn_pair(&self.g, net, x, y)
    }

    /// Correction `U(y, x) / sqrt(U(x) U(y))` applied to paths from `x` to `y`.
    pub fn path_correction(&self, net: &DirectedNetwork, x: usize, y: usize) -> Result<f64, MarkovError> {
        Ok(self.pair(net, y, x)? / (self.u[x] * self.u[y]).sqrt())
    }
}
