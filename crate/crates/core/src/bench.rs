//! Desk-scale simulation study: simulate fields from the network covariance,
//! estimate with the network and Euclidean frameworks on a training split,
//! krige the held-out vertices and compare errors.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{cov_matrix_euclidean, cov_matrix_exponential, CovarianceError, KernelKind, PathOptions};
use crate::estimator::{estimate_network, euclidean_fit, EstimatorOptions, DEFAULT_BINS};
use crate::fields::{krige, sample_gaussian, FieldError, KrigingMode};
use crate::io::{GridNode, VelocityGrid};
use crate::linalg::logdet_spd;
use crate::markov::{MarkovError, MarkovSolution};
use crate::network::{build_network, DirectedNetwork, EdgeMetric, NetworkError};

/// Ranges of the study, in km.
pub const DEFAULT_RANGES: [f64; 5] = [50.0, 87.0, 125.0, 162.0, 200.0];
pub const DEFAULT_REPLICATES: usize = 50;
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;
/// Node spacing of the desk grid, in km.
pub const DESK_SPACING: f64 = 20.0;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),
    #[error("invalid study configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Covariance(#[from] CovarianceError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl BenchError {
    pub fn is_numerical(&self) -> bool {
        match self {
            BenchError::NotPositiveDefinite(_) => true,
            BenchError::Invalid(_) => false,
            BenchError::Network(e) => e.is_numerical(),
            BenchError::Markov(e) => e.is_numerical(),
            BenchError::Covariance(e) => e.is_numerical(),
            BenchError::Field(e) => e.is_numerical(),
        }
    }
}

pub fn frobenius_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm()
}

/// `KL(N(0, truth) || N(0, estimate))`.
pub fn kl_gaussian(truth: &DMatrix<f64>, estimate: &DMatrix<f64>) -> Result<f64, BenchError> {
    let n = truth.nrows();
    let chol = estimate.clone().cholesky().ok_or(BenchError::NotPositiveDefinite("estimate"))?;
    let trace = chol.solve(truth).trace();
    let ld_est = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let ld_true = logdet_spd(truth).ok_or(BenchError::NotPositiveDefinite("truth"))?;
    Ok(0.5 * (trace - n as f64 + ld_est - ld_true))
}

pub fn mse(pred: &[f64], truth: &[f64]) -> f64 {
    pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / pred.len() as f64
}

/// Velocity field of the desk study: uniform eastward flow around an elliptic
/// island with a smooth meridional perturbation, on a 16 x 10 grid.
pub fn desk_grid(spacing: f64) -> VelocityGrid {
    let (nx, ny) = (16usize, 10usize);
    let mut nodes = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let (fx, fy) = (ix as f64, iy as f64);
            let (x, y) = (fx - 7.5, fy - 4.5);
            let land = x * x / 9.0 + y * y / 2.5 < 1.0;
            let r2 = x * x + y * y + 1e-9;
            let u = 1.0 - 4.0 * (x * x - y * y) / (r2 * r2);
            let v = -8.0 * x * y / (r2 * r2) + 0.6 * (0.9 * fx + 0.5 * fy).sin();
            nodes.push(GridNode {
                ix,
                iy,
                x: fx * spacing,
                y: fy * spacing,
                u: if land { 0.0 } else { u },
                v: if land { 0.0 } else { v },
                value: if land { None } else { Some(0.0) },
                is_water: !land,
            });
        }
    }
    VelocityGrid::with_spacing(nodes, spacing, spacing).expect("desk grid is valid")
}

pub fn desk_network() -> Result<DirectedNetwork, BenchError> {
    Ok(build_network(&desk_grid(DESK_SPACING), EdgeMetric::Euclidean)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub ranges: Vec<f64>,
    pub sill: f64,
    pub replicates: usize,
    pub test_fraction: f64,
    pub bins: usize,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            ranges: DEFAULT_RANGES.to_vec(),
            sill: 1.0,
            replicates: DEFAULT_REPLICATES,
            test_fraction: DEFAULT_TEST_FRACTION,
            bins: DEFAULT_BINS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub range: f64,
    pub replicate: usize,
    pub theta_s_hat: f64,
    pub theta_r_hat: f64,
    pub euclid_theta_s: f64,
    pub euclid_theta_r: f64,
    pub frobenius_network: f64,
    pub frobenius_euclid: f64,
    pub kl_network: f64,
    pub kl_euclid: f64,
    pub mse_network: f64,
    pub mse_euclid: f64,
    pub network_degenerate: bool,
    pub euclid_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeSummary {
    pub range: f64,
    pub replicates: usize,
    pub mean_theta_s_hat: f64,
    pub median_theta_r_hat: f64,
    pub mean_mse_network: f64,
    pub mean_mse_euclid: f64,
    pub mean_frobenius_network: f64,
    pub mean_frobenius_euclid: f64,
    pub mean_kl_network: f64,
    pub mean_kl_euclid: f64,
    /// Fractions of replicates where the network estimate beats the Euclidean one.
    pub network_wins_mse: f64,
    pub network_wins_frobenius: f64,
    pub network_wins_kl: f64,
    pub network_degenerate: usize,
    pub euclid_degenerate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub vertices: usize,
    pub records: Vec<StudyRecord>,
    pub summaries: Vec<RangeSummary>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

pub fn median(xs: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = xs.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn win_rate(records: &[&StudyRecord], pick: impl Fn(&StudyRecord) -> (f64, f64)) -> f64 {
    let wins = records
        .iter()
        .filter(|r| {
            let (a, b) = pick(r);
            a < b || (a.is_finite() && !b.is_finite())
        })
        .count();
    wins as f64 / records.len().max(1) as f64
}

impl StudyReport {
    fn summarize(config: &StudyConfig, records: &[StudyRecord]) -> Vec<RangeSummary> {
        config
            .ranges
            .iter()
            .map(|&range| {
                let rs: Vec<&StudyRecord> = records.iter().filter(|r| r.range == range).collect();
                RangeSummary {
                    range,
                    replicates: rs.len(),
                    mean_theta_s_hat: mean(rs.iter().map(|r| r.theta_s_hat)),
                    median_theta_r_hat: median(rs.iter().map(|r| r.theta_r_hat)),
                    mean_mse_network: mean(rs.iter().map(|r| r.mse_network)),
                    mean_mse_euclid: mean(rs.iter().map(|r| r.mse_euclid)),
                    mean_frobenius_network: mean(rs.iter().map(|r| r.frobenius_network)),
                    mean_frobenius_euclid: mean(rs.iter().map(|r| r.frobenius_euclid)),
                    mean_kl_network: mean(rs.iter().map(|r| r.kl_network)),
                    mean_kl_euclid: mean(rs.iter().map(|r| r.kl_euclid)),
                    network_wins_mse: win_rate(&rs, |r| (r.mse_network, r.mse_euclid)),
                    network_wins_frobenius: win_rate(&rs, |r| (r.frobenius_network, r.frobenius_euclid)),
                    network_wins_kl: win_rate(&rs, |r| (r.kl_network, r.kl_euclid)),
                    network_degenerate: rs.iter().filter(|r| r.network_degenerate).count(),
                    euclid_degenerate: rs.iter().filter(|r| r.euclid_degenerate).count(),
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "range,replicate,theta_s_hat,theta_r_hat,euclid_theta_s,euclid_theta_r,frobenius_network,\
             frobenius_euclid,kl_network,kl_euclid,mse_network,mse_euclid,network_degenerate,euclid_degenerate\n",
        );
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.range,
                r.replicate,
                r.theta_s_hat,
                r.theta_r_hat,
                r.euclid_theta_s,
                r.euclid_theta_r,
                r.frobenius_network,
                r.frobenius_euclid,
                r.kl_network,
                r.kl_euclid,
                r.mse_network,
                r.mse_euclid,
                u8::from(r.network_degenerate),
                u8::from(r.euclid_degenerate)
            ));
        }
        out
    }

    /// JSON summary without the per-replicate records.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "vertices": self.vertices,
            "records": self.records.len(),
            "summaries": self.summaries,
        })
    }
}

/// Per-(range, replicate) generator derived from the master seed.
fn replicate_rng(seed: u64, range_index: usize, replicate: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((range_index as u64) << 32) | replicate as u64);
    rng
}

/// Simple kriging with zero mean; a vanishing covariance predicts the mean.
fn krige_mse(cov: &DMatrix<f64>, train: &[usize], test: &[usize], z: &[f64]) -> f64 {
    let truth: Vec<f64> = test.iter().map(|&i| z[i]).collect();
    let zeros = vec![0.0; cov.nrows()];
    let obs: Vec<f64> = train.iter().map(|&i| z[i]).collect();
    match krige(cov, &zeros, train, &obs, test, KrigingMode::Simple) {
        Ok(k) => mse(&k.predictions, &truth),
        Err(_) => mse(&vec![0.0; test.len()], &truth),
    }
}

fn run_replicate(
    net: &DirectedNetwork,
    markov: &MarkovSolution,
    truth: &DMatrix<f64>,
    config: &StudyConfig,
    range_index: usize,
    replicate: usize,
) -> Result<StudyRecord, BenchError> {
    let n = net.len();
    let range = config.ranges[range_index];
    let mut rng = replicate_rng(config.seed, range_index, replicate);
    let field_seed: u64 = rng.random();
    let z = sample_gaussian(&vec![0.0; n], truth, 1, field_seed)?.realization(0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_test = ((n as f64) * config.test_fraction).round().clamp(1.0, (n - 1) as f64) as usize;
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();

    let opts = EstimatorOptions { kind: KernelKind::Exponential, bins: config.bins, paths: PathOptions::default(), max_lag: None, sill: None };
    let net_fit = estimate_network(net, markov, std::slice::from_ref(&z), Some(&train), &opts);
    let (theta_s_hat, theta_r_hat, network_degenerate, net_cov) = match net_fit {
        Ok(fit) => {
            let cov = cov_matrix_exponential(net, markov, fit.theta_s, fit.theta_r).ok();
            (fit.theta_s, fit.theta_r, fit.diagnostics.range_degenerate, cov)
        }
        Err(_) => (f64::NAN, f64::NAN, true, None),
    };

    let coords = net.coords();
    let train_coords: Vec<[f64; 2]> = train.iter().map(|&i| coords[i]).collect();
    let train_z: Vec<f64> = train.iter().map(|&i| z[i]).collect();
    let euc = euclidean_fit(&train_z, &train_coords, config.bins).ok();
    let euc_cov = euc.as_ref().and_then(|f| f.kernel().ok()).map(|k| cov_matrix_euclidean(&coords, &k));

    let metrics = |cov: &Option<DMatrix<f64>>| -> (f64, f64, f64) {
        match cov {
            Some(c) => (
                frobenius_diff(truth, c),
                kl_gaussian(truth, c).unwrap_or(f64::INFINITY),
                krige_mse(c, &train, &test, &z),
            ),
            None => (f64::NAN, f64::NAN, krige_mse(&DMatrix::zeros(n, n), &train, &test, &z)),
        }
    };
    let (frobenius_network, kl_network, mse_network) = metrics(&net_cov);
    let (frobenius_euclid, kl_euclid, mse_euclid) = metrics(&euc_cov);
    Ok(StudyRecord {
        range,
        replicate,
        theta_s_hat,
        theta_r_hat,
        euclid_theta_s: euc.map_or(f64::NAN, |f| f.theta_s),
        euclid_theta_r: euc.map_or(f64::NAN, |f| f.theta_r),
        frobenius_network,
        frobenius_euclid,
        kl_network,
        kl_euclid,
        mse_network,
        mse_euclid,
        network_degenerate,
        euclid_degenerate: euc.is_none_or(|f| f.degenerate || f.theta_s <= 0.0),
    })
}

/// Runs every (range, replicate) combination. Each combination draws from its
/// own generator, so the report does not depend on scheduling.
pub fn run_sim_study(net: &DirectedNetwork, config: &StudyConfig) -> Result<StudyReport, BenchError> {
    if config.ranges.is_empty() || config.ranges.iter().any(|r| !(*r > 0.0)) {
        return Err(BenchError::Invalid("ranges must be positive and nonempty".into()));
    }
    if !(config.sill > 0.0) {
        return Err(BenchError::Invalid(format!("sill must be positive, got {}", config.sill)));
    }
    if !(config.test_fraction > 0.0 && config.test_fraction < 1.0) {
        return Err(BenchError::Invalid(format!("test fraction must lie in (0, 1), got {}", config.test_fraction)));
    }
    if net.len() < 3 {
        return Err(BenchError::Invalid("study needs at least 3 vertices".into()));
    }
    let markov = MarkovSolution::solve(net)?;
    let mut records = Vec::with_capacity(config.ranges.len() * config.replicates);
    for (ri, &range) in config.ranges.iter().enumerate() {
        let truth = cov_matrix_exponential(net, &markov, config.sill, range)?;
        let batch: Vec<StudyRecord> = (0..config.replicates)
            .into_par_iter()
            .map(|rep| run_replicate(net, &markov, &truth, config, ri, rep))
            .collect::<Result<_, _>>()?;
        records.extend(batch);
    }
    let summaries = StudyReport::summarize(config, &records);
    Ok(StudyReport { config: config.clone(), vertices: net.len(), records, summaries })
}
