//! Kernels and network covariance assembly.
//!
//! The covariance between two vertices is a sum over directed paths joining
//! them (in either direction) that never revisit the starting vertex. Each path
//! contributes its weight times the kernel evaluated at the path length. The
//! weight multiplies `pi[a,b] / sqrt(influx(b))` over the edges and corrects
//! for returns with `U(y,x) / sqrt(U(x) U(y))`.
//!
//! For the exponential kernel the path sum has a closed form through the
//! inverse of `I - R`, with `R` the length-decayed, influx-normalized
//! transition matrix. Other kernels are assembled by explicit enumeration.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::inverse_identity_minus;
use crate::markov::{find_recurrent_class, MarkovError, MarkovSolution};
use crate::network::DirectedNetwork;

pub const DEFAULT_WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum CovarianceError {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("decayed transition system is singular: {0}")]
    Singular(String),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

impl CovarianceError {
    pub fn is_numerical(&self) -> bool {
        match self {
            CovarianceError::Singular(_) => true,
            CovarianceError::Markov(e) => e.is_numerical(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Exponential,
    Spherical,
    LinearSill,
}

impl KernelKind {
    pub fn has_compact_support(self) -> bool {
        !matches!(self, KernelKind::Exponential)
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Exponential => "exponential",
            KernelKind::Spherical => "spherical",
            KernelKind::LinearSill => "linear_sill",
        }
    }

    /// Correlation at lag `h` for unit sill.
    pub fn correlation(self, h: f64, range: f64) -> f64 {
        let r = h / range;
        match self {
            KernelKind::Exponential => (-r).exp(),
            KernelKind::Spherical if r <= 1.0 => 1.0 - 1.5 * r + 0.5 * r * r * r,
            KernelKind::LinearSill if r <= 1.0 => 1.0 - r,
            _ => 0.0,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = CovarianceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exponential" => Ok(KernelKind::Exponential),
            "spherical" => Ok(KernelKind::Spherical),
            "linear_sill" | "linear-sill" => Ok(KernelKind::LinearSill),
            other => Err(CovarianceError::InvalidKernel(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Kernel family with sill (marginal variance) and range (decay scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub sill: f64,
    pub range: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, sill: f64, range: f64) -> Result<Self, CovarianceError> {
        if !(sill > 0.0 && sill.is_finite()) {
            return Err(CovarianceError::InvalidKernel(format!("sill must be positive, got {sill}")));
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(CovarianceError::InvalidKernel(format!("range must be positive, got {range}")));
        }
        Ok(Self { kind, sill, range })
    }

    pub fn exponential(sill: f64, range: f64) -> Result<Self, CovarianceError> {
        Self::new(KernelKind::Exponential, sill, range)
    }

    /// Covariance at lag `h >= 0`.
    pub fn cov(&self, h: f64) -> f64 {
        self.sill * self.kind.correlation(h, self.range)
    }

    /// Lengths at or beyond this value contribute exactly zero.
    pub fn support(&self) -> Option<f64> {
        self.kind.has_compact_support().then_some(self.range)
    }
}

pub fn kernel_cov(k: &KernelSpec, h: f64) -> f64 {
    k.cov(h)
}

/// Limits of the depth-first path enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions {
    /// Maximum number of edges per path; `None` means four times the hop diameter.
    pub max_hops: Option<usize>,
    /// Prefixes whose weight times kernel decay fall below this are dropped.
    pub weight_floor: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self { max_hops: None, weight_floor: DEFAULT_WEIGHT_FLOOR }
    }
}

impl PathOptions {
    pub fn resolved_max_hops(&self, net: &DirectedNetwork) -> usize {
        self.max_hops.unwrap_or_else(|| (4 * net.diameter_hops()).max(1))
    }
}

/// How far a walk may go and when a prefix stops being worth extending.
#[derive(Clone, Copy)]
pub(crate) struct WalkLimits<'k> {
    pub max_hops: usize,
    pub weight_floor: f64,
    /// Kernel used to bound the contribution of a prefix; `None` prunes on weight only.
    pub kernel: Option<&'k KernelSpec>,
    /// Paths longer than this are not followed.
    pub max_length: Option<f64>,
}

impl WalkLimits<'_> {
    fn decay(&self, length: f64) -> f64 {
        self.kernel.map_or(1.0, |k| k.kind.correlation(length, k.range))
    }

    fn beyond_support(&self, length: f64) -> bool {
        self.kernel.and_then(|k| k.support()).is_some_and(|s| length >= s)
            || self.max_length.is_some_and(|m| length > m)
    }
}

/// Summary of what an enumeration left out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct WalkStats {
    pub paths: usize,
    /// Sum over dropped prefixes of weight times kernel decay.
    pub pruned_weight: f64,
    pub hop_limited: bool,
}

impl WalkStats {
    pub fn merge(&mut self, other: &WalkStats) {
        self.paths += other.paths;
        self.pruned_weight += other.pruned_weight;
        self.hop_limited |= other.hop_limited;
    }
}

pub(crate) fn sqrt_influx(net: &DirectedNetwork) -> Vec<f64> {
    (0..net.len()).map(|b| net.influx(b).sqrt()).collect()
}

/// Depth-first enumeration of every path leaving `x` that never comes back to
/// `x`. Cycles through other vertices are followed until a limit stops them.
/// `visit(target, edge_product, length, edge_indices)` fires once per path.
pub(crate) fn walk_from(
    net: &DirectedNetwork,
    sqrt_influx: &[f64],
    x: usize,
    limits: &WalkLimits<'_>,
    mut visit: impl FnMut(usize, f64, f64, &[usize]),
) -> WalkStats {
    let mut stats = WalkStats::default();
    // Frame: (vertex, next out-edge position, edge product, length).
    let mut frames: Vec<(usize, usize, f64, f64)> = vec![(x, 0, 1.0, 0.0)];
    let mut path: Vec<usize> = Vec::new();
    while let Some(frame) = frames.last_mut() {
        let (v, pos, wprod, length) = *frame;
        let outs = net.out_edge_indices(v);
        if pos >= outs.len() {
            frames.pop();
            path.pop();
            continue;
        }
        frame.1 += 1;
        let k = outs[pos];
        let e = &net.edges()[k];
        if e.head == x {
            continue;
        }
        let w = wprod * e.prob / sqrt_influx[e.head];
        let len = length + e.length;
        if limits.beyond_support(len) {
            continue;
        }
        let bound = w * limits.decay(len);
        if path.len() + 1 > limits.max_hops {
            stats.hop_limited = true;
            stats.pruned_weight += bound;
            continue;
        }
        if bound < limits.weight_floor {
            stats.pruned_weight += bound;
            continue;
        }
        path.push(k);
        stats.paths += 1;
        visit(e.head, w, len, &path);
        frames.push((e.head, 0, w, len));
    }
    stats
}

/// One enumerated path with its weight components.
#[derive(Debug, Clone, PartialEq)]
pub struct PathWeight {
    /// Edge indices into the network's edge list, in travel order.
    pub edges: Vec<usize>,
    pub length: f64,
    /// Product of transition probabilities along the path.
    pub pi_product: f64,
    /// Product of head influxes times the non-return probability of the end vertex.
    pub beta: f64,
    /// Weight multiplying the kernel at `length`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathEnumeration {
    pub paths: Vec<PathWeight>,
    pub stats: WalkStats,
}

/// Enumerates paths from `x` to `y` that never revisit `x`, pruning on weight
/// only (no kernel).
pub fn enumerate_paths(
    net: &DirectedNetwork,
    markov: &MarkovSolution,
    x: usize,
    y: usize,
    opts: &PathOptions,
) -> Result<PathEnumeration, CovarianceError> {
    enumerate_paths_with(net, markov, x, y, opts, None)
}

pub(crate) fn enumerate_paths_with(
    net: &DirectedNetwork,
    markov: &MarkovSolution,
    x: usize,
    y: usize,
    opts: &PathOptions,
    kernel: Option<&KernelSpec>,
) -> Result<PathEnumeration, CovarianceError> {
    if x == y || !markov.reach.reaches(x, y) {
        return Ok(PathEnumeration { paths: Vec::new(), stats: WalkStats::default() });
    }
    let correction = markov.path_correction(net, x, y)?;
    let si = sqrt_influx(net);
    let limits = WalkLimits { max_hops: opts.resolved_max_hops(net), weight_floor: opts.weight_floor, kernel, max_length: None };
    let mut paths = Vec::new();
    let stats = walk_from(net, &si, x, &limits, |target, wprod, length, edges| {
        if target != y {
            return;
        }
        let mut pi_product = 1.0;
        let mut influx_product = 1.0;
        for &k in edges {
            let e = &net.edges()[k];
            pi_product *= e.prob;
            influx_product *= si[e.head] * si[e.head];
        }
        paths.push(PathWeight {
            edges: edges.to_vec(),
            length,
            pi_product,
            beta: influx_product * markov.u[y],
            weight: wprod * correction,
        });
    });
    Ok(PathEnumeration { paths, stats })
}

/// Truncation diagnostics of a path-sum evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TruncationReport {
    pub paths: usize,
    pub pruned_weight: f64,
    pub hop_limited: bool,
    /// Upper bound on the covariance mass lost to pruning; `None` when the
    /// geometric bound does not apply (decayed row sums reach 1).
    pub remainder_bound: Option<f64>,
}

impl TruncationReport {
    /// True when something was pruned and no finite remainder bound exists.
    pub fn unbounded(&self) -> bool {
        self.pruned_weight > 0.0 && self.remainder_bound.is_none()
    }

    fn from_stats(stats: &WalkStats, net: &DirectedNetwork, markov: &MarkovSolution, kernel: &KernelSpec) -> Self {
        let si = sqrt_influx(net);
        let rho = (0..net.len())
            .map(|a| {
                net.out_edges(a)
                    .map(|e| e.prob / si[e.head] * kernel.kind.correlation(e.length, kernel.range))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let min_u = markov.u.iter().copied().fold(1.0, f64::min);
        let remainder_bound = if stats.pruned_weight == 0.0 {
            Some(0.0)
        } else if rho < 1.0 && kernel.kind == KernelKind::Exponential {
            Some(kernel.sill * stats.pruned_weight / min_u.sqrt() / (1.0 - rho))
        } else {
            None
        };
        Self { paths: stats.paths, pruned_weight: stats.pruned_weight, hop_limited: stats.hop_limited, remainder_bound }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSumValue {
    pub value: f64,
    pub report: TruncationReport,
}

/// Covariance of a single pair by explicit enumeration in both directions.
pub fn cov_pathsum(
    net: &DirectedNetwork,
    markov: &MarkovSolution,
    kernel: &KernelSpec,
    x: usize,
    y: usize,
    opts: &PathOptions,
) -> Result<PathSumValue, CovarianceError> {
    if x == y {
        return Ok(PathSumValue { value: kernel.sill, report: TruncationReport { remainder_bound: Some(0.0), ..Default::default() } });
    }
    let mut stats = WalkStats::default();
    let mut value = 0.0;
    for (a, b) in [(x, y), (y, x)] {
        let e = enumerate_paths_with(net, markov, a, b, opts, Some(kernel))?;
        value += e.paths.iter().map(|p| p.weight * kernel.cov(p.length)).sum::<f64>();
        stats.merge(&e.stats);
    }
    Ok(PathSumValue { value, report: TruncationReport::from_stats(&stats, net, markov, kernel) })
}

/// Corrections `U(y,x)/sqrt(U(x)U(y))` for every reachable ordered pair, row `x`.
fn correction_rows(net: &DirectedNetwork, markov: &MarkovSolution) -> Result<Vec<Vec<(usize, f64)>>, CovarianceError> {
    (0..net.len())
        .into_par_iter()
        .map(|x| {
            (0..net.len())
                .filter(|&y| y != x && markov.reach.reaches(x, y))
                .map(|y| Ok((y, markov.path_correction(net, x, y)?)))
                .collect::<Result<Vec<_>, MarkovError>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(CovarianceError::from)
}

/// Builds `sill (T + T^T)` with a `sill` diagonal from the one-directional part `T`.
fn symmetrize(one_way: &DMatrix<f64>, sill: f64) -> DMatrix<f64> {
    let n = one_way.nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = sill;
        for j in 0..i {
            let v = sill * (one_way[(i, j)] + one_way[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Closed-form covariance matrix for the exponential kernel.
pub fn cov_matrix_exponential(
    net: &DirectedNetwork,
    markov: &MarkovSolution,
    sill: f64,
    range: f64,
) -> Result<DMatrix<f64>, CovarianceError> {
    KernelSpec::exponential(sill, range)?;
    let n = net.len();
    let si = sqrt_influx(net);
    let decayed: Vec<(usize, usize, f64)> = net
        .edges()
        .iter()
        .map(|e| (e.tail, e.head, e.prob / si[e.head] * (-e.length / range).exp()))
        .collect();
    let s = inverse_identity_minus(n, &decayed).ok_or_else(|| {
        let leak: Vec<f64> = net.sink_masses().to_vec();
        match find_recurrent_class(n, &net.transition_entries(), &leak) {
            Some(class) => CovarianceError::Markov(MarkovError::Recurrent(class)),
            None => CovarianceError::Singular("I - R could not be inverted".into()),
        }
    })?;
    let corrections = correction_rows(net, markov)?;
    let mut one_way = DMatrix::zeros(n, n);
    for (x, row) in corrections.iter().enumerate() {
        let sxx = s[(x, x)];
        for &(y, c) in row {
            one_way[(x, y)] = s[(x, y)] / sxx * c;
        }
    }
    Ok(symmetrize(&one_way, sill))
}

/// Covariance matrix by path enumeration (any kernel). One walk per source
/// vertex covers every target.
pub fn cov_matrix_pathsum(
    net: &DirectedNetwork,
    markov: &MarkovSolution,
    kernel: &KernelSpec,
    opts: &PathOptions,
) -> Result<(DMatrix<f64>, TruncationReport), CovarianceError> {
    let n = net.len();
    let si = sqrt_influx(net);
    let limits = WalkLimits { max_hops: opts.resolved_max_hops(net), weight_floor: opts.weight_floor, kernel: Some(kernel), max_length: None };
    let corrections = correction_rows(net, markov)?;
    let rows: Vec<(Vec<f64>, WalkStats)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc = vec![0.0; n];
            let stats = walk_from(net, &si, x, &limits, |target, wprod, length, _| {
                acc[target] += wprod * kernel.kind.correlation(length, kernel.range);
            });
            (acc, stats)
        })
        .collect();
    let mut one_way = DMatrix::zeros(n, n);
    let mut stats = WalkStats::default();
    for (x, (acc, st)) in rows.iter().enumerate() {
        stats.merge(st);
        for &(y, c) in &corrections[x] {
            one_way[(x, y)] = acc[y] * c;
        }
    }
    Ok((symmetrize(&one_way, kernel.sill), TruncationReport::from_stats(&stats, net, markov, kernel)))
}

/// Isotropic covariance on Euclidean distances between coordinates.
pub fn cov_matrix_euclidean(coords: &[[f64; 2]], kernel: &KernelSpec) -> DMatrix<f64> {
    let n = coords.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            kernel.sill
        } else {
            kernel.cov((coords[i][0] - coords[j][0]).hypot(coords[i][1] - coords[j][1]))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceMethod {
    ClosedForm,
    PathSum,
}

impl FromStr for CovarianceMethod {
    type Err = CovarianceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closed-form" => Ok(CovarianceMethod::ClosedForm),
            "path-sum" => Ok(CovarianceMethod::PathSum),
            other => Err(CovarianceError::Unsupported(format!("unknown method `{other}`"))),
        }
    }
}

/// Network covariance by the requested method. The closed form is only
/// available for the exponential kernel.
pub fn network_covariance(
    net: &DirectedNetwork,
    markov: &MarkovSolution,
    kernel: &KernelSpec,
    method: CovarianceMethod,
    opts: &PathOptions,
) -> Result<(DMatrix<f64>, Option<TruncationReport>), CovarianceError> {
    match method {
        CovarianceMethod::ClosedForm => {
            if kernel.kind != KernelKind::Exponential {
                return Err(CovarianceError::Unsupported(format!(
                    "closed form is only available for the exponential kernel, not {}",
                    kernel.kind
                )));
            }
            Ok((cov_matrix_exponential(net, markov, kernel.sill, kernel.range)?, None))
        }
        CovarianceMethod::PathSum => {
            let (m, r) = cov_matrix_pathsum(net, markov, kernel, opts)?;
            Ok((m, Some(r)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Edge, Vertex};

    fn net(n: usize, edges: &[(usize, usize, f64, f64)]) -> (DirectedNetwork, MarkovSolution) {
        let vertices = (0..n).map(|i| Vertex { id: i, x: i as f64, y: 0.0 }).collect();
        let edges = edges.iter().map(|&(t, h, p, l)| Edge { tail: t, head: h, length: l, prob: p }).collect();
        let net = DirectedNetwork::with_implicit_sink(vertices, edges).unwrap();
        let m = MarkovSolution::solve(&net).unwrap();
        (net, m)
    }

    #[test]
    fn kernels_at_zero_and_boundary() {
        for kind in [KernelKind::Exponential, KernelKind::Spherical, KernelKind::LinearSill] {
            assert_eq!(KernelSpec::new(kind, 2.5, 7.0).unwrap().cov(0.0), 2.5);
        }
        let sph = KernelSpec::new(KernelKind::Spherical, 1.0, 3.0).unwrap();
        assert!(sph.cov(3.0).abs() < 1e-15);
        assert_eq!(sph.cov(4.0), 0.0);
        let lin = KernelSpec::new(KernelKind::LinearSill, 1.0, 3.0).unwrap();
        assert_eq!(lin.cov(1.5), 0.5);
        assert_eq!(lin.cov(3.5), 0.0);
        let exp = KernelSpec::exponential(1.0, 5.0).unwrap();
        assert!((exp.cov(5.0) - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn kernel_validation_and_names() {
        assert!(KernelSpec::new(KernelKind::Exponential, 0.0, 1.0).is_err());
        assert!(KernelSpec::new(KernelKind::Exponential, 1.0, -1.0).is_err());
        for kind in [KernelKind::Exponential, KernelKind::Spherical, KernelKind::LinearSill] {
            assert_eq!(kind.name().parse::<KernelKind>().unwrap(), kind);
        }
    }

    #[test]
    fn single_edge_chain_path() {
        let (n, m) = net(2, &[(0, 1, 1.0, 2.0)]);
        let e = enumerate_paths(&n, &m, 0, 1, &PathOptions::default()).unwrap();
        assert_eq!(e.paths.len(), 1);
        assert_eq!(e.paths[0].weight, 1.0);
        assert_eq!(e.paths[0].length, 2.0);
        assert_eq!(e.paths[0].beta, 1.0);
        let k = KernelSpec::exponential(1.0, 2.0).unwrap();
        let v = cov_pathsum(&n, &m, &k, 0, 1, &PathOptions::default()).unwrap();
        assert!((v.value - 0.367879).abs() < 1e-6);
        assert_eq!(v.report.pruned_weight, 0.0);
    }

    #[test]
    fn split_path_weight() {
        let (n, m) = net(3, &[(0, 1, 0.5, 1.0), (0, 2, 0.5, 1.0)]);
        let e = enumerate_paths(&n, &m, 0, 1, &PathOptions::default()).unwrap();
        assert_eq!(e.paths.len(), 1);
        assert!((e.paths[0].weight - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((e.paths[0].pi_product - 0.5).abs() < 1e-15);
        assert!((e.paths[0].beta - 0.5).abs() < 1e-15);
        let k = KernelSpec::exponential(2.0, 3.0).unwrap();
        let v = cov_pathsum(&n, &m, &k, 0, 1, &PathOptions::default()).unwrap().value;
        assert!((v - 2.0 * 0.5f64.sqrt() * (-1.0f64 / 3.0).exp()).abs() < 1e-14);
        let s = cov_matrix_exponential(&n, &m, 2.0, 3.0).unwrap();
        assert!((s[(0, 1)] - v).abs() < 1e-14);
        // The two branches are not connected.
        assert_eq!(s[(1, 2)], 0.0);
    }

    #[test]
    fn unreachable_pair_has_no_paths() {
        let (n, m) = net(4, &[(0, 1, 1.0, 1.0), (2, 3, 1.0, 1.0)]);
        assert!(enumerate_paths(&n, &m, 0, 3, &PathOptions::default()).unwrap().paths.is_empty());
        let k = KernelSpec::exponential(1.0, 1.0).unwrap();
        assert_eq!(cov_pathsum(&n, &m, &k, 0, 3, &PathOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn chain_closed_form_and_diagonal() {
        let (n, m) = net(2, &[(0, 1, 1.0, 4.0)]);
        let s = cov_matrix_exponential(&n, &m, 1.5, 4.0).unwrap();
        assert!((s[(0, 1)] - 1.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(s[(0, 0)], 1.5);
        assert_eq!(s[(1, 1)], 1.5);
        assert_eq!(s[(0, 1)], s[(1, 0)]);
    }

    #[test]
    fn cyclic_closed_form_matches_enumeration() {
        let (n, m) = net(3, &[(0, 1, 0.7, 1.5), (1, 2, 0.6, 2.0), (2, 0, 0.5, 1.0), (1, 0, 0.3, 1.5)]);
        let closed = cov_matrix_exponential(&n, &m, 1.0, 1.0).unwrap();
        let k = KernelSpec::exponential(1.0, 1.0).unwrap();
        let opts = PathOptions { max_hops: Some(400), weight_floor: 1e-14 };
        let (paths, report) = cov_matrix_pathsum(&n, &m, &k, &opts).unwrap();
        assert!((&closed - &paths).amax() < 1e-10, "{closed}{paths}");
        assert!(report.remainder_bound.is_some());
    }

    #[test]
    fn compact_kernel_prunes_at_support() {
        let (n, m) = net(3, &[(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0)]);
        let k = KernelSpec::new(KernelKind::LinearSill, 1.0, 1.5).unwrap();
        let (s, report) = cov_matrix_pathsum(&n, &m, &k, &PathOptions::default()).unwrap();
        assert!((s[(0, 1)] - (1.0 - 1.0 / 1.5)).abs() < 1e-15);
        assert_eq!(s[(0, 2)], 0.0);
        assert_eq!(report.pruned_weight, 0.0);
    }

    #[test]
    fn closed_form_rejects_compact_kernels() {
        let (n, m) = net(2, &[(0, 1, 1.0, 1.0)]);
        let k = KernelSpec::new(KernelKind::Spherical, 1.0, 1.0).unwrap();
        assert!(network_covariance(&n, &m, &k, CovarianceMethod::ClosedForm, &PathOptions::default()).is_err());
    }

    #[test]
    fn euclidean_matrix() {
        let k = KernelSpec::exponential(1.0, 5.0).unwrap();
        let s = cov_matrix_euclidean(&[[0.0, 0.0], [0.0, 0.0], [3.0, 4.0]], &k);
        assert_eq!(s[(0, 1)], 1.0);
        assert!((s[(0, 2)] - 0.367879).abs() < 1e-6);
        assert_eq!(s[(2, 2)], 1.0);
    }
}
