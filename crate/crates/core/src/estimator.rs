//! Penalized estimation of the binned network covariance and its parametric fit,
//! plus the Euclidean method-of-moments baseline.
//!
//! Pipeline on a vertex subset: the sill comes from pairs with no connecting
//! path (their covariance is zero, so half the mean squared difference is the
//! variance). For connected pairs the semivariance satisfies
//! `sill - gamma_i = sum_j W[i,j] C_j`, where `W[i,j]` aggregates path weights
//! whose length falls in distance bin `j`. The binned covariance `C` solves a
//! ridge problem whose penalty is the smallest one guaranteeing `|C_j| <= sill`.
//! A range is then fitted to the binned curve.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{sqrt_influx, walk_from, CovarianceError, KernelKind, KernelSpec, PathOptions, WalkLimits};
use crate::markov::MarkovSolution;
use crate::network::DirectedNetwork;

pub const DEFAULT_BINS: usize = 15;
pub const LAMBDA_FLOOR: f64 = 1e-8;
const RANGE_TOLERANCE: f64 = 1e-6;
const RANGE_SCAN_POINTS: usize = 240;

#[derive(Debug, thiserror::Error)]
pub enum EstimationError {
    #[error("every vertex pair is connected: no unconnected pairs to estimate the sill, supply it externally")]
    NoUnconnectedPairs,
    #[error("no finite path lengths to bin")]
    NoPaths,
    #[error("range fit needs at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("sill estimate must be positive, got {0}")]
    NonPositiveSill(f64),
    #[error("invalid estimation input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Covariance(#[from] CovarianceError),
}

impl EstimationError {
    pub fn is_numerical(&self) -> bool {
        match self {
            EstimationError::Covariance(e) => e.is_numerical(),
            _ => false,
        }
    }
}

/// Half the mean squared difference over unconnected pairs.
pub fn estimate_sill(z: &[f64], unconnected: &[(usize, usize)]) -> Result<f64, EstimationError> {
    if unconnected.is_empty() {
        return Err(EstimationError::NoUnconnectedPairs);
    }
    let total: f64 = unconnected.iter().map(|&(x, y)| (z[x] - z[y]).powi(2)).sum();
    Ok(total / (2.0 * unconnected.len() as f64))
}

pub fn empirical_gamma(z: &[f64], pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs.iter().map(|&(x, y)| 0.5 * (z[x] - z[y]).powi(2)).collect()
}

pub type PairList = Vec<(usize, usize)>;

/// Splits the unordered pairs of `subset` into connected and unconnected ones.
pub fn split_pairs(markov: &MarkovSolution, subset: &[usize]) -> (PairList, PairList) {
    let mut connected = Vec::new();
    let mut unconnected = Vec::new();
    for (i, &x) in subset.iter().enumerate() {
        for &y in &subset[i + 1..] {
            let pair = (x.min(y), x.max(y));
            if markov.reach.connected(x, y) {
                connected.push(pair);
            } else {
                unconnected.push(pair);
            }
        }
    }
    (connected, unconnected)
}

/// Equal-width distance bins over `(0, upper]`, empty bins removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Mean of the lengths falling in each bin.
    pub h: Vec<f64>,
    width: f64,
    raw_count: usize,
    /// Kept-bin index of every raw bin, if it was kept.
    kept: Vec<Option<usize>>,
}

impl Bins {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn upper(&self) -> f64 {
        self.width * self.raw_count as f64
    }

    fn raw_index(width: f64, raw_count: usize, length: f64) -> Option<usize> {
        if !(length > 0.0) || length > width * raw_count as f64 {
            return None;
        }
        let k = (length / width).ceil() as usize;
        Some(k.clamp(1, raw_count) - 1)
    }

    /// Kept-bin index of a length, if it falls in a retained bin.
    pub fn index_of(&self, length: f64) -> Option<usize> {
        Self::raw_index(self.width, self.raw_count, length).and_then(|k| self.kept[k])
    }
}

/// Bins path lengths into `l` equal-width intervals over `(0, max]`, where
/// `max` is the largest length (or `upper` if given).
pub fn build_bins(lengths: &[f64], l: usize, upper: Option<f64>) -> Result<Bins, EstimationError> {
    if l == 0 {
        return Err(EstimationError::Invalid("bin count must be at least 1".into()));
    }
    let max = lengths.iter().copied().filter(|v| v.is_finite() && *v > 0.0).fold(f64::NAN, f64::max);
    let top = match upper {
        Some(u) if u > 0.0 => u,
        Some(u) => return Err(EstimationError::Invalid(format!("bin upper bound must be positive, got {u}"))),
        None => max,
    };
    if !top.is_finite() {
        return Err(EstimationError::NoPaths);
    }
    let width = top / l as f64;
    let mut sums = vec![0.0; l];
    let mut counts = vec![0usize; l];
    for &len in lengths {
        if let Some(k) = Bins::raw_index(width, l, len) {
            sums[k] += len;
            counts[k] += 1;
        }
    }
    let mut bins = Bins { lo: vec![], hi: vec![], h: vec![], width, raw_count: l, kept: vec![None; l] };
    for k in 0..l {
        if counts[k] > 0 {
            bins.kept[k] = Some(bins.h.len());
            bins.lo.push(width * k as f64);
            bins.hi.push(if k + 1 == l { top } else { width * (k + 1) as f64 });
            bins.h.push(sums[k] / counts[k] as f64);
        }
    }
    if bins.is_empty() {
        return Err(EstimationError::NoPaths);
    }
    Ok(bins)
}

/// `W[i,j]`: total weight of pair `i`'s paths with length in bin `j`. Each
/// pair's paths are `(length, weight)` over both directions.
pub fn build_w(pair_paths: &[Vec<(f64, f64)>], bins: &Bins) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(pair_paths.len(), bins.len());
    for (i, paths) in pair_paths.iter().enumerate() {
        for &(len, weight) in paths {
            if let Some(j) = bins.index_of(len) {
                w[(i, j)] += weight;
            }
        }
    }
    w
}

/// Smallest ridge penalty that keeps the solution within `[-sill, sill]`:
/// `max(|W^T rhs|_inf / sill - min_j delta_j, floor)`, with `delta_j` the
/// diagonal dominance margin of row `j` of `W^T W`. The bound is nudged up by a
/// few ulps so that the guarantee survives rounding.
pub fn lambda_rule(w: &DMatrix<f64>, rhs: &DVector<f64>, sill: f64) -> Result<f64, EstimationError> {
    if !(sill > 0.0) {
        return Err(EstimationError::NonPositiveSill(sill));
    }
    let wtw = w.transpose() * w;
    let wtr = w.transpose() * rhs;
    let min_delta = (0..wtw.nrows())
        .map(|i| {
            let off: f64 = (0..wtw.ncols()).filter(|&j| j != i).map(|j| wtw[(i, j)].abs()).sum();
            wtw[(i, i)].abs() - off
        })
        .fold(f64::INFINITY, f64::min);
    let load = wtr.amax() / sill;
    let bound = load - min_delta;
    let slack = 16.0 * f64::EPSILON * (load.abs() + min_delta.abs());
    Ok((bound + slack).max(LAMBDA_FLOOR))
}

/// `(W^T W + lambda I)^-1 W^T rhs`.
pub fn ridge_solve(w: &DMatrix<f64>, rhs: &DVector<f64>, lambda: f64) -> Result<DVector<f64>, EstimationError> {
    if !(lambda > 0.0) {
        return Err(EstimationError::Invalid(format!("ridge penalty must be positive, got {lambda}")));
    }
    let mut a = w.transpose() * w;
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    let b = w.transpose() * rhs;
    match a.clone().cholesky() {
        Some(ch) => Ok(ch.solve(&b)),
        None => a
            .lu()
            .solve(&b)
            .ok_or_else(|| EstimationError::Invalid("ridge system could not be solved".into())),
    }
}

/// Minimizes a unimodal-ish objective on `[lo, hi]`: a log-spaced scan brackets
/// the best grid point, golden-section search refines it.
fn minimize_log_bracket(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (llo, lhi) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..RANGE_SCAN_POINTS)
        .map(|i| (llo + (lhi - llo) * i as f64 / (RANGE_SCAN_POINTS - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let best = (0..grid.len()).fold(0, |b, i| if values[i] < values[b] { i } else { b });
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > RANGE_TOLERANCE * (a.abs() + b.abs()) / 2.0 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // Keep the scan point if refinement wandered off.
    if f(mid) <= values[best] {
        mid
    } else {
        grid[best]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeFit {
    pub theta_r: f64,
    pub objective: f64,
    /// No decay signal: every binned covariance is non-positive.
    pub degenerate: bool,
}

/// Least-squares range for a fixed sill over `[min h / 10, 10 max h]`.
pub fn fit_range(c_hat: &[f64], h: &[f64], kind: KernelKind, sill: f64) -> Result<RangeFit, EstimationError> {
    if c_hat.len() != h.len() {
        return Err(EstimationError::Invalid("binned covariance and distances differ in length".into()));
    }
    if h.len() < 2 {
        return Err(EstimationError::TooFewBins(h.len()));
    }
    let lo = h.iter().copied().fold(f64::INFINITY, f64::min) / 10.0;
    let hi = h.iter().copied().fold(0.0, f64::max) * 10.0;
    let objective =
        |r: f64| -> f64 { h.iter().zip(c_hat).map(|(&hj, &cj)| (sill * kind.correlation(hj, r) - cj).powi(2)).sum() };
    if c_hat.iter().all(|&c| c <= 0.0) {
        return Ok(RangeFit { theta_r: lo, objective: objective(lo), degenerate: true });
    }
    let theta_r = minimize_log_bracket(lo, hi, objective);
    Ok(RangeFit { theta_r, objective: objective(theta_r), degenerate: false })
}

/// Method-of-moments semivariogram on Euclidean distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalVariogram {
    pub h: Vec<f64>,
    pub gamma: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn euclidean_variogram(z: &[f64], coords: &[[f64; 2]], l: usize) -> Result<EmpiricalVariogram, EstimationError> {
    if z.len() != coords.len() || z.len() < 2 {
        return Err(EstimationError::Invalid("need at least 2 co-indexed values and coordinates".into()));
    }
    if l == 0 {
        return Err(EstimationError::Invalid("bin count must be at least 1".into()));
    }
    let n = z.len();
    let dist = |i: usize, j: usize| (coords[i][0] - coords[j][0]).hypot(coords[i][1] - coords[j][1]);
    let dmax = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| dist(i, j)).fold(0.0, f64::max);
    let cutoff = dmax / 2.0;
    if !(cutoff > 0.0) {
        return Err(EstimationError::Invalid("all points coincide".into()));
    }
    let width = cutoff / l as f64;
    let mut sum_h = vec![0.0; l];
    let mut sum_g = vec![0.0; l];
    let mut counts = vec![0usize; l];
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(i, j);
            if let Some(k) = Bins::raw_index(width, l, d) {
                sum_h[k] += d;
                sum_g[k] += 0.5 * (z[i] - z[j]).powi(2);
                counts[k] += 1;
            }
        }
    }
    let mut v = EmpiricalVariogram { h: vec![], gamma: vec![], counts: vec![] };
    for k in (0..l).filter(|&k| counts[k] > 0) {
        v.h.push(sum_h[k] / counts[k] as f64);
        v.gamma.push(sum_g[k] / counts[k] as f64);
        v.counts.push(counts[k]);
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclideanFit {
    pub theta_s: f64,
    pub theta_r: f64,
    /// Range pinned at the lower search bound (flat variogram).
    pub degenerate: bool,
}

impl EuclideanFit {
    pub fn kernel(&self) -> Result<KernelSpec, CovarianceError> {
        KernelSpec::exponential(self.theta_s.max(f64::MIN_POSITIVE), self.theta_r)
    }
}

/// Fits `gamma(h) = sill (1 - exp(-h / range))` by least squares; for each
/// candidate range the optimal sill is available in closed form.
pub fn euclidean_fit(z: &[f64], coords: &[[f64; 2]], l: usize) -> Result<EuclideanFit, EstimationError> {
    let v = euclidean_variogram(z, coords, l)?;
    let profiled = |r: f64| -> (f64, f64) {
        let g: Vec<f64> = v.h.iter().map(|&h| 1.0 - (-h / r).exp()).collect();
        let gg: f64 = g.iter().map(|x| x * x).sum();
        let sill = (g.iter().zip(&v.gamma).map(|(a, b)| a * b).sum::<f64>() / gg).max(0.0);
        let sse = g.iter().zip(&v.gamma).map(|(a, b)| (sill * a - b).powi(2)).sum();
        (sill, sse)
    };
    let lo = v.h.iter().copied().fold(f64::INFINITY, f64::min) / 10.0;
    let hi = v.h.iter().copied().fold(0.0, f64::max) * 10.0;
    let theta_r = if v.h.len() < 2 { lo } else { minimize_log_bracket(lo, hi, |r| profiled(r).1) };
    let (theta_s, _) = profiled(theta_r);
    Ok(EuclideanFit { theta_s, theta_r, degenerate: theta_r <= lo * (1.0 + 1e-3) })
}

/// Weighted paths joining every connected pair of an estimation subset.
#[derive(Debug, Clone)]
pub struct PathCatalog {
    pub pairs: Vec<(usize, usize)>,
    /// Per pair, `(length, weight)` over both directions.
    pub paths: Vec<Vec<(f64, f64)>>,
    pub unconnected: Vec<(usize, usize)>,
    pub path_count: usize,
    pub pruned_weight: f64,
    pub hop_limited: bool,
}

impl PathCatalog {
    /// Enumerates once per subset vertex; the walk may pass through vertices
    /// outside the subset.
    pub fn build(
        net: &DirectedNetwork,
        markov: &MarkovSolution,
        subset: &[usize],
        opts: &PathOptions,
        max_length: Option<f64>,
    ) -> Result<Self, EstimationError> {
        let (pairs, unconnected) = split_pairs(markov, subset);
        let index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut in_subset = vec![false; net.len()];
        for &s in subset {
            in_subset[s] = true;
        }
        let si = sqrt_influx(net);
        let limits = WalkLimits { max_hops: opts.resolved_max_hops(net), weight_floor: opts.weight_floor, kernel: None, max_length };
        type Walk = (Vec<(usize, f64, f64)>, crate::covariance::WalkStats);
        let walks: Vec<Result<Walk, EstimationError>> = subset
            .par_iter()
            .map(|&x| {
                let mut found = Vec::new();
                let stats = walk_from(net, &si, x, &limits, |t, w, len, _| {
                    if in_subset[t] {
                        found.push((t, w, len));
                    }
                });
                let mut corrections: HashMap<usize, f64> = HashMap::new();
                let mut out = Vec::with_capacity(found.len());
                for (t, w, len) in found {
                    let c = match corrections.get(&t) {
                        Some(&c) => c,
                        None => {
                            let c = markov.path_correction(net, x, t).map_err(CovarianceError::from)?;
                            corrections.insert(t, c);
                            c
                        }
                    };
                    out.push((t, w * c, len));
                }
                Ok((out, stats))
            })
            .collect();
        let mut paths = vec![Vec::new(); pairs.len()];
        let mut cat = PathCatalog { pairs, paths: Vec::new(), unconnected, path_count: 0, pruned_weight: 0.0, hop_limited: false };
        for (&x, walk) in subset.iter().zip(walks) {
            let (found, stats) = walk?;
            cat.pruned_weight += stats.pruned_weight;
            cat.hop_limited |= stats.hop_limited;
            for (t, w, len) in found {
                if let Some(&i) = index.get(&(x.min(t), x.max(t))) {
                    paths[i].push((len, w));
                    cat.path_count += 1;
                }
            }
        }
        cat.paths = paths;
        Ok(cat)
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.paths.iter().flatten().map(|&(l, _)| l).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOptions {
    pub kind: KernelKind,
    pub bins: usize,
    pub paths: PathOptions,
    /// Paths longer than this are ignored (and bins stop there).
    pub max_lag: Option<f64>,
    /// Use this sill instead of estimating it from unconnected pairs.
    pub sill: Option<f64>,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { kind: KernelKind::Exponential, bins: DEFAULT_BINS, paths: PathOptions::default(), max_lag: None, sill: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationDiagnostics {
    pub replicates: usize,
    pub vertices: usize,
    pub connected_pairs: usize,
    pub unconnected_pairs: usize,
    pub paths: usize,
    pub pruned_weight: f64,
    pub hop_limited: bool,
    pub range_degenerate: bool,
    pub range_objective: f64,
    pub max_abs_c_hat: f64,
    pub sill_per_replicate: Vec<f64>,
    pub lambda_per_replicate: Vec<f64>,
}

/// Result of the network estimator, averaged point-wise over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFit {
    pub kind: KernelKind,
    pub theta_s: f64,
    pub theta_r: f64,
    pub lambda: f64,
    pub bins: Bins,
    pub c_hat: Vec<f64>,
    pub diagnostics: EstimationDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRecord {
    pub lo: f64,
    pub hi: f64,
    pub h: f64,
    pub c_hat: f64,
    /// `theta_s - c_hat`: the implied semivariogram.
    pub gamma_hat: f64,
}

/// Fitted parameters as written to and read from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub kernel: KernelKind,
    pub theta_s: f64,
    pub theta_r: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub bins: Vec<BinRecord>,
    #[serde(default)]
    pub diagnostics: Option<EstimationDiagnostics>,
}

impl ParamsDoc {
    pub fn kernel_spec(&self) -> Result<KernelSpec, CovarianceError> {
        KernelSpec::new(self.kernel, self.theta_s, self.theta_r)
    }
}

impl NetworkFit {
    pub fn kernel_spec(&self) -> Result<KernelSpec, CovarianceError> {
        KernelSpec::new(self.kind, self.theta_s, self.theta_r)
    }

    pub fn params(&self) -> ParamsDoc {
        let bins = (0..self.bins.len())
            .map(|j| BinRecord {
                lo: self.bins.lo[j],
                hi: self.bins.hi[j],
                h: self.bins.h[j],
                c_hat: self.c_hat[j],
                gamma_hat: self.theta_s - self.c_hat[j],
            })
            .collect();
        ParamsDoc {
            kernel: self.kind,
            theta_s: self.theta_s,
            theta_r: self.theta_r,
            lambda: Some(self.lambda),
            bins,
            diagnostics: Some(self.diagnostics.clone()),
        }
    }
}

/// Binned covariance of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateFit {
    pub sill: f64,
    pub lambda: f64,
    pub c_hat: DVector<f64>,
}

/// Sill, penalty and binned covariance for one replicate against a fixed `W`.
pub fn fit_replicate(
    z: &[f64],
    w: &DMatrix<f64>,
    pairs: &[(usize, usize)],
    unconnected: &[(usize, usize)],
    sill: Option<f64>,
) -> Result<ReplicateFit, EstimationError> {
    let sill = match sill {
        Some(s) => s,
        None => estimate_sill(z, unconnected)?,
    };
    if !(sill > 0.0) {
        return Err(EstimationError::NonPositiveSill(sill));
    }
    let gamma = empirical_gamma(z, pairs);
    let rhs = DVector::from_iterator(gamma.len(), gamma.iter().map(|g| sill - g));
    let lambda = lambda_rule(w, &rhs, sill)?;
    let c_hat = ridge_solve(w, &rhs, lambda)?;
    Ok(ReplicateFit { sill, lambda, c_hat })
}

/// Estimates sill, binned covariance and range from one or more replicate
/// fields observed on `subset` (all vertices when `None`). Replicate curves are
/// averaged point-wise before the range fit.
pub fn estimate_network(
    net: &DirectedNetwork,
    markov: &MarkovSolution,
    replicates: &[Vec<f64>],
    subset: Option<&[usize]>,
    opts: &EstimatorOptions,
) -> Result<NetworkFit, EstimationError> {
    if replicates.is_empty() {
        return Err(EstimationError::Invalid("no replicate fields".into()));
    }
    if let Some(bad) = replicates.iter().find(|z| z.len() != net.len()) {
        return Err(EstimationError::Invalid(format!("field has {} values for {} vertices", bad.len(), net.len())));
    }
    let all: Vec<usize> = (0..net.len()).collect();
    let subset = subset.unwrap_or(&all);
    let catalog = PathCatalog::build(net, markov, subset, &opts.paths, opts.max_lag)?;
    let bins = build_bins(&catalog.lengths(), opts.bins, opts.max_lag)?;
    let w = build_w(&catalog.paths, &bins);
    let fits: Vec<ReplicateFit> = replicates
        .iter()
        .map(|z| fit_replicate(z, &w, &catalog.pairs, &catalog.unconnected, opts.sill))
        .collect::<Result<_, _>>()?;
    let r = fits.len() as f64;
    let theta_s = fits.iter().map(|f| f.sill).sum::<f64>() / r;
    let lambda = fits.iter().map(|f| f.lambda).sum::<f64>() / r;
    let c_hat: Vec<f64> = (0..bins.len()).map(|j| fits.iter().map(|f| f.c_hat[j]).sum::<f64>() / r).collect();
    let range = if bins.len() >= 2 {
        fit_range(&c_hat, &bins.h, opts.kind, theta_s)?
    } else {
        // A single bin carries no shape information.
        let lo = bins.h[0] / 10.0;
        RangeFit { theta_r: lo, objective: f64::NAN, degenerate: true }
    };
    let diagnostics = EstimationDiagnostics {
        replicates: fits.len(),
        vertices: subset.len(),
        connected_pairs: catalog.pairs.len(),
        unconnected_pairs: catalog.unconnected.len(),
        paths: catalog.path_count,
        pruned_weight: catalog.pruned_weight,
        hop_limited: catalog.hop_limited,
        range_degenerate: range.degenerate,
        range_objective: range.objective,
        max_abs_c_hat: c_hat.iter().fold(0.0, |m: f64, c| m.max(c.abs())),
        sill_per_replicate: fits.iter().map(|f| f.sill).collect(),
        lambda_per_replicate: fits.iter().map(|f| f.lambda).collect(),
    };
    Ok(NetworkFit { kind: opts.kind, theta_s, theta_r: range.theta_r, lambda, bins, c_hat, diagnostics })
}
