//! Directed linear network built from a gridded velocity field.
//!
//! Every water node becomes a vertex. Its velocity is split along the two grid
//! directions that bracket it (parallelogram rule); each component pointing at
//! a water node becomes a directed edge whose transition probability is the
//! component magnitude normalized by the sum of both magnitudes. Components
//! pointing off-water leak their probability to the external sink.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::io::VelocityGrid;

/// Grid offsets of the eight neighbors, counter-clockwise starting east.
pub const GRID_OFFSETS: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

pub const DIRECTION_NAMES: [&str; 8] = ["E", "NE", "N", "NW", "W", "SW", "S", "SE"];

const ROW_SUM_TOLERANCE: f64 = 1e-9;
const NEGATIVE_COEFFICIENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("velocity vector is zero")]
    ZeroVelocity,
    #[error("velocity decomposition produced a negative coefficient {0:e}")]
    NegativeCoefficient(f64),
    #[error("all water velocities are zero: no transition structure")]
    NoFlow,
    #[error("invalid network: {0}")]
    Invalid(String),
}

impl NetworkError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, NetworkError::NegativeCoefficient(_))
    }
}

/// How edge lengths are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeMetric {
    /// Euclidean distance between the endpoints.
    #[default]
    Euclidean,
    /// Travel time: Euclidean length divided by the velocity projected on the edge.
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub length: f64,
    pub prob: f64,
}

/// Directed network with a row-stochastic transition structure over the
/// vertices plus the external sink.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedNetwork {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    sink_mass: Vec<f64>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl DirectedNetwork {
    /// Validates and indexes a network. Vertex ids must equal their position.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>, sink_mass: Vec<f64>) -> Result<Self, NetworkError> {
        let n = vertices.len();
        let invalid = |msg: String| Err(NetworkError::Invalid(msg));
        if sink_mass.len() != n {
            return invalid(format!("sink_mass has {} entries for {} vertices", sink_mass.len(), n));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.id != i {
                return invalid(format!("vertex at position {i} has id {}", v.id));
            }
            if !v.x.is_finite() || !v.y.is_finite() {
                return invalid(format!("vertex {i} has non-finite coordinates"));
            }
        }
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            if e.tail >= n || e.head >= n {
                return invalid(format!("edge {k} references a missing vertex"));
            }
            if e.tail == e.head {
                return invalid(format!("edge {k} is a self-loop"));
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return invalid(format!("edge {k} has non-positive length {}", e.length));
            }
            if !(e.prob > 0.0 && e.prob <= 1.0) {
                return invalid(format!("edge {k} has probability {} outside (0,1]", e.prob));
            }
            if out_edges[e.tail].iter().any(|&j: &usize| edges[j].head == e.head) {
                return invalid(format!("duplicate edge {} -> {}", e.tail, e.head));
            }
            out_edges[e.tail].push(k);
            in_edges[e.head].push(k);
        }
        for a in 0..n {
            if out_edges[a].len() > 2 {
                return invalid(format!("vertex {a} has {} outgoing edges", out_edges[a].len()));
            }
            let s = sink_mass[a];
            if !(s.is_finite() && (0.0..=1.0).contains(&s)) {
                return invalid(format!("vertex {a} has sink mass {s}"));
            }
            let total: f64 = out_edges[a].iter().map(|&k| edges[k].prob).sum::<f64>() + s;
            if (total - 1.0).abs() > ROW_SUM_TOLERANCE {
                return invalid(format!("row {a} sums to {total}, not 1"));
            }
        }
        Ok(Self { vertices, edges, sink_mass, out_edges, in_edges })
    }

    /// Builds a network whose sink mass is whatever probability the edges leave
    /// unassigned (snapped to zero below 1e-12).
    pub fn with_implicit_sink(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self, NetworkError> {
        let mut out = vec![0.0; vertices.len()];
        for e in &edges {
            if e.tail < out.len() {
                out[e.tail] += e.prob;
            }
        }
        let sink = out.iter().map(|&s| if 1.0 - s > 1e-12 { 1.0 - s } else { 0.0 }).collect();
        Self::new(vertices, edges, sink)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn sink_mass(&self, a: usize) -> f64 {
        self.sink_mass[a]
    }

    pub fn sink_masses(&self) -> &[f64] {
        &self.sink_mass
    }

    pub fn out_edges(&self, a: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.out_edges[a].iter().map(move |&k| &self.edges[k])
    }

    /// Indices into [`Self::edges`] of the edges leaving `a`.
    pub fn out_edge_indices(&self, a: usize) -> &[usize] {
        &self.out_edges[a]
    }

    pub fn in_edges(&self, b: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.in_edges[b].iter().map(move |&k| &self.edges[k])
    }

    pub fn is_source(&self, a: usize) -> bool {
        self.in_edges[a].is_empty()
    }

    pub fn is_outlet(&self, a: usize) -> bool {
        self.sink_mass[a] > 0.0
    }

    /// Total probability mass flowing into `b`: `sum_k pi[k, b]`.
    pub fn influx(&self, b: usize) -> f64 {
        self.in_edges(b).map(|e| e.prob).sum()
    }

    pub fn coords(&self) -> Vec<[f64; 2]> {
        self.vertices.iter().map(|v| [v.x, v.y]).collect()
    }

    /// Dense transition matrix restricted to the vertices (sink column dropped).
    pub fn transition_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for e in &self.edges {
            m[(e.tail, e.head)] = e.prob;
        }
        m
    }

    pub(crate) fn transition_entries(&self) -> Vec<(usize, usize, f64)> {
        self.edges.iter().map(|e| (e.tail, e.head, e.prob)).collect()
    }

    /// Largest finite shortest-path distance in hops (directed BFS).
    pub fn diameter_hops(&self) -> usize {
        let n = self.len();
        let mut best = 0;
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[s] = 0;
            queue.push_back(s);
            while let Some(a) = queue.pop_front() {
                best = best.max(dist[a]);
                for e in self.out_edges(a) {
                    if dist[e.head] == usize::MAX {
                        dist[e.head] = dist[a] + 1;
                        queue.push_back(e.head);
                    }
                }
            }
        }
        best
    }

    /// Same topology with every edge reversed and probabilities replaced by
    /// `weights(edge)`; sink mass is recomputed from the new rows.
    pub fn reversed_with(&self, weights: impl Fn(&Edge) -> f64) -> Result<Self, NetworkError> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { tail: e.head, head: e.tail, length: e.length, prob: weights(e) })
            .collect();
        Self::with_implicit_sink(self.vertices.clone(), edges)
    }
}

/// Unit vectors toward the eight grid neighbors for the given spacing.
pub fn grid_directions(spacing_x: f64, spacing_y: f64) -> [[f64; 2]; 8] {
    GRID_OFFSETS.map(|(dx, dy)| {
        let (x, y) = (dx as f64 * spacing_x, dy as f64 * spacing_y);
        let norm = x.hypot(y);
        [x / norm, y / norm]
    })
}

/// Split of a velocity vector along two neighbor directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityDecomposition {
    /// Indices into the direction table: the best-aligned direction first.
    pub directions: [usize; 2],
    pub magnitudes: [f64; 2],
}

impl VelocityDecomposition {
    pub fn magnitude_of(&self, direction: usize) -> f64 {
        self.directions
            .iter()
            .zip(self.magnitudes)
            .filter(|(&d, _)| d == direction)
            .map(|(_, m)| m)
            .sum()
    }

    /// True when the velocity is aligned with a single grid direction.
    pub fn is_aligned(&self) -> bool {
        self.magnitudes[1] == 0.0
    }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Decomposes `v` onto the best cosine-aligned direction and the neighbor
/// direction on the same side as `v`, so that `m0 d0 + m1 d1 = v` with
/// nonnegative magnitudes. Ties in alignment go to the counter-clockwise
/// direction.
pub fn decompose_velocity(v: [f64; 2], dirs: &[[f64; 2]; 8]) -> Result<VelocityDecomposition, NetworkError> {
    let norm = v[0].hypot(v[1]);
    if norm == 0.0 || !norm.is_finite() {
        return Err(NetworkError::ZeroVelocity);
    }
    let unit = [v[0] / norm, v[1] / norm];
    let cosines: Vec<f64> = dirs.iter().map(|d| d[0] * unit[0] + d[1] * unit[1]).collect();
    let mut primary = 0;
    for k in 1..8 {
        let (c, best) = (cosines[k], cosines[primary]);
        if c > best + 1e-15 || ((c - best).abs() <= 1e-15 && k == (primary + 1) % 8) {
            primary = k;
        }
    }
    // Wrap-around tie between SE (7) and E (0): E is counter-clockwise of SE.
    if primary == 7 && (cosines[0] - cosines[7]).abs() <= 1e-15 {
        primary = 0;
    }
    let d_p = dirs[primary];
    let side = cross(d_p, unit);
    if side.abs() <= 1e-12 && cosines[primary] > 0.0 {
        return Ok(VelocityDecomposition { directions: [primary, (primary + 1) % 8], magnitudes: [norm, 0.0] });
    }
    let secondary = if side > 0.0 { (primary + 1) % 8 } else { (primary + 7) % 8 };
    let d_s = dirs[secondary];
    let det = cross(d_p, d_s);
    let mut m_p = cross(v, d_s) / det;
    let mut m_s = cross(d_p, v) / det;
    for m in [&mut m_p, &mut m_s] {
        if *m < -NEGATIVE_COEFFICIENT_TOLERANCE * norm.max(1.0) {
            return Err(NetworkError::NegativeCoefficient(*m));
        }
        if *m < 0.0 {
            *m = 0.0;
        }
    }
    Ok(VelocityDecomposition { directions: [primary, secondary], magnitudes: [m_p, m_s] })
}

/// Builds the directed network from the water nodes of `grid`.
///
/// Vertices are numbered in row-major grid order (`iy`, then `ix`). A water
/// node with zero velocity keeps all of its mass in the sink.
pub fn build_network(grid: &VelocityGrid, metric: EdgeMetric) -> Result<DirectedNetwork, NetworkError> {
    let mut water: Vec<usize> = (0..grid.nodes.len()).filter(|&i| grid.nodes[i].is_water).collect();
    water.sort_by_key(|&i| (grid.nodes[i].iy, grid.nodes[i].ix));
    let mut vertex_of = std::collections::HashMap::with_capacity(water.len());
    for (id, &i) in water.iter().enumerate() {
        vertex_of.insert((grid.nodes[i].ix, grid.nodes[i].iy), id);
    }
    let dirs = grid_directions(grid.spacing_x, grid.spacing_y);
    let vertices: Vec<Vertex> = water
        .iter()
        .enumerate()
        .map(|(id, &i)| Vertex { id, x: grid.nodes[i].x, y: grid.nodes[i].y })
        .collect();

    let mut edges = Vec::new();
    let mut sink_mass = vec![0.0; water.len()];
    let mut any_flow = false;
    for (a, &i) in water.iter().enumerate() {
        let node = &grid.nodes[i];
        let vel = [node.u, node.v];
        if vel[0] == 0.0 && vel[1] == 0.0 {
            sink_mass[a] = 1.0;
            continue;
        }
        any_flow = true;
        let dec = decompose_velocity(vel, &dirs)?;
        let total: f64 = dec.magnitudes.iter().sum();
        let mut leaks = false;
        let mut assigned = 0.0;
        for (&dir, &mag) in dec.directions.iter().zip(&dec.magnitudes) {
            if mag == 0.0 {
                continue;
            }
            let (dx, dy) = GRID_OFFSETS[dir];
            let target = (node.ix as i64 + dx, node.iy as i64 + dy);
            let head = if target.0 >= 0 && target.1 >= 0 {
                vertex_of.get(&(target.0 as usize, target.1 as usize)).copied()
            } else {
                None
            };
            match head {
                Some(b) => {
                    let euclid = (vertices[b].x - vertices[a].x).hypot(vertices[b].y - vertices[a].y);
                    let length = match metric {
                        EdgeMetric::Euclidean => euclid,
                        EdgeMetric::Time => {
                            let speed = vel[0] * dirs[dir][0] + vel[1] * dirs[dir][1];
                            if speed <= 0.0 {
                                return Err(NetworkError::Invalid(format!(
                                    "vertex {a}: non-positive speed along edge direction {}",
                                    DIRECTION_NAMES[dir]
                                )));
                            }
                            euclid / speed
                        }
                    };
                    let prob = mag / total;
                    assigned += prob;
                    edges.push(Edge { tail: a, head: b, length, prob });
                }
                None => leaks = true,
            }
        }
        if leaks {
            sink_mass[a] = (1.0 - assigned).max(0.0);
        }
    }
    if !any_flow {
        return Err(NetworkError::NoFlow);
    }
    DirectedNetwork::new(vertices, edges, sink_mass)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexClasses {
    pub sources: Vec<usize>,
    pub outlets: Vec<usize>,
}

pub fn classify_vertices(net: &DirectedNetwork) -> VertexClasses {
    VertexClasses {
        sources: (0..net.len()).filter(|&a| net.is_source(a)).collect(),
        outlets: (0..net.len()).filter(|&a| net.is_outlet(a)).collect(),
    }
}
