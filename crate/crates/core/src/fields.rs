//! Gaussian ensembles, kriging and projection bias correction.

use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{read_matrix, write_matrix, IoError};

/// Eigenvalues below this fraction of the largest variance are raised to it.
pub const EIGEN_FLOOR: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum FieldError {
    #[error("covariance must be square and symmetric")]
    NotSymmetric,
    #[error("covariance factorization failed after eigenvalue flooring")]
    Factorization,
    #[error("singular observation covariance: {0}")]
    Singular(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl FieldError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, FieldError::Factorization | FieldError::Singular(_))
    }
}

/// `M` realizations over `n` vertices (one per row) and the seed that made them.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldEnsemble {
    pub values: DMatrix<f64>,
    pub mean: Vec<f64>,
    pub seed: u64,
}

impl FieldEnsemble {
    pub fn m(&self) -> usize {
        self.values.nrows()
    }

    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn realization(&self, r: usize) -> Vec<f64> {
        self.values.row(r).iter().copied().collect()
    }
}

fn check_symmetric(cov: &DMatrix<f64>) -> Result<(), FieldError> {
    if !cov.is_square() {
        return Err(FieldError::NotSymmetric);
    }
    let n = cov.nrows();
    let scale = cov.amax().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in 0..i {
            if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                return Err(FieldError::NotSymmetric);
            }
        }
    }
    Ok(())
}

/// Lower Cholesky factor of `cov`, with eigenvalues floored at
/// `EIGEN_FLOOR * max diag` when the matrix is numerically singular or
/// indefinite. Cholesky is tried first and accepted when its smallest pivot
/// clears the floor (the smallest eigenvalue never exceeds the smallest pivot).
pub fn floored_cholesky(cov: &DMatrix<f64>) -> Result<DMatrix<f64>, FieldError> {
    check_symmetric(cov)?;
    let n = cov.nrows();
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (cov[(i, j)] + cov[(j, i)]));
    let scale = sym.diagonal().iter().copied().fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(FieldError::Invalid("covariance has no positive variance".into()));
    }
    let floor = EIGEN_FLOOR * scale;
    if let Some(ch) = Cholesky::new(sym.clone()) {
        let l = ch.unpack();
        if l.diagonal().iter().all(|&d| d * d >= floor) {
            return Ok(l);
        }
    }
    let eig = SymmetricEigen::new(sym);
    let lambda = eig.eigenvalues.map(|v| v.max(floor));
    let q = &eig.eigenvectors;
    let rebuilt = q * DMatrix::from_diagonal(&lambda) * q.transpose();
    let rebuilt = DMatrix::from_fn(n, n, |i, j| 0.5 * (rebuilt[(i, j)] + rebuilt[(j, i)]));
    Cholesky::<f64, Dyn>::new(rebuilt).map(|c| c.unpack()).ok_or(FieldError::Factorization)
}

/// Independent stream for realization `index` of master `seed`.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `m` realizations of `N(mean, cov)`. Realization `r` depends only on
/// `(seed, r)`, so results do not depend on thread count or order.
pub fn sample_gaussian(mean: &[f64], cov: &DMatrix<f64>, m: usize, seed: u64) -> Result<FieldEnsemble, FieldError> {
    if mean.len() != cov.nrows() {
        return Err(FieldError::Invalid(format!("mean has {} entries for a {}x{} covariance", mean.len(), cov.nrows(), cov.ncols())));
    }
    let l = floored_cholesky(cov)?;
    let n = mean.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|r| {
            let mut rng = realization_rng(seed, r as u64);
            let xi = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let x = &l * xi;
            (0..n).map(|i| mean[i] + x[i]).collect()
        })
        .collect();
    let values = DMatrix::from_fn(m, n, |r, i| rows[r][i]);
    Ok(FieldEnsemble { values, mean: mean.to_vec(), seed })
}

/// Writes an ensemble as an `M x n` matrix file; the sidecar stores the seed,
/// shape, mean and caller parameters.
pub fn write_ensemble(path: impl AsRef<Path>, ens: &FieldEnsemble, params: serde_json::Value) -> Result<(), FieldError> {
    let mut meta = serde_json::Map::new();
    meta.insert("seed".into(), ens.seed.into());
    meta.insert("m".into(), ens.m().into());
    meta.insert("n".into(), ens.n().into());
    meta.insert("mean".into(), serde_json::to_value(&ens.mean).map_err(IoError::from)?);
    meta.insert("params".into(), params);
    write_matrix(path, &ens.values, meta)?;
    Ok(())
}

pub fn read_ensemble(path: impl AsRef<Path>) -> Result<FieldEnsemble, FieldError> {
    let (values, desc) = read_matrix(path)?;
    let seed = desc.meta.get("seed").and_then(|v| v.as_u64()).unwrap_or(0);
    let mean = match desc.meta.get("mean") {
        Some(v) => serde_json::from_value(v.clone()).map_err(IoError::from)?,
        None => vec![0.0; values.ncols()],
    };
    Ok(FieldEnsemble { values, mean, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KrigingMode {
    Simple,
    Ordinary,
}

impl std::str::FromStr for KrigingMode {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(KrigingMode::Simple),
            "ordinary" => Ok(KrigingMode::Ordinary),
            other => Err(FieldError::Invalid(format!("unknown kriging mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrigingResult {
    pub targets: Vec<usize>,
    pub predictions: Vec<f64>,
    pub variances: Vec<f64>,
    /// Weights on the observations, one row per target.
    #[serde(skip)]
    pub weights: Vec<Vec<f64>>,
}

/// Predicts `targets` from observations at `obs_idx`.
///
/// Simple mode uses the known mean; ordinary mode constrains the weights to sum
/// to one and ignores the mean.
pub fn krige(
    cov: &DMatrix<f64>,
    mean: &[f64],
    obs_idx: &[usize],
    obs_vals: &[f64],
    targets: &[usize],
    mode: KrigingMode,
) -> Result<KrigingResult, FieldError> {
    let n = cov.nrows();
    if obs_idx.is_empty() {
        return Err(FieldError::Invalid("no observations".into()));
    }
    if obs_idx.len() != obs_vals.len() {
        return Err(FieldError::Invalid("observation indices and values differ in length".into()));
    }
    if mean.len() != n || obs_idx.iter().chain(targets).any(|&i| i >= n) {
        return Err(FieldError::Invalid("index or mean outside the covariance".into()));
    }
    let k = obs_idx.len();
    let koo = DMatrix::from_fn(k, k, |i, j| cov[(obs_idx[i], obs_idx[j])]);
    let rhs = DMatrix::from_fn(k, targets.len(), |i, t| cov[(obs_idx[i], targets[t])]);
    let (weights, multipliers) = match mode {
        KrigingMode::Simple => {
            let sol = match Cholesky::new(koo.clone()) {
                Some(ch) => ch.solve(&rhs),
                None => koo.lu().solve(&rhs).ok_or_else(|| FieldError::Singular(format!("{k} observations")))?,
            };
            (sol, vec![0.0; targets.len()])
        }
        KrigingMode::Ordinary => {
            let mut a = DMatrix::zeros(k + 1, k + 1);
            a.view_mut((0, 0), (k, k)).copy_from(&koo);
            for i in 0..k {
                a[(i, k)] = 1.0;
                a[(k, i)] = 1.0;
            }
            let mut b = DMatrix::from_element(k + 1, targets.len(), 1.0);
            b.view_mut((0, 0), (k, targets.len())).copy_from(&rhs);
            let sol = a.lu().solve(&b).ok_or_else(|| FieldError::Singular(format!("bordered system of {k} observations")))?;
            let mult = (0..targets.len()).map(|t| sol[(k, t)]).collect();
            (sol.rows(0, k).into_owned(), mult)
        }
    };
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(FieldError::Singular(format!("{k} observations")));
    }
    let mut result = KrigingResult { targets: targets.to_vec(), predictions: vec![], variances: vec![], weights: vec![] };
    for (t, &target) in targets.iter().enumerate() {
        let w: Vec<f64> = weights.column(t).iter().copied().collect();
        let pred = match mode {
            KrigingMode::Simple => mean[target] + (0..k).map(|i| w[i] * (obs_vals[i] - mean[obs_idx[i]])).sum::<f64>(),
            KrigingMode::Ordinary => (0..k).map(|i| w[i] * obs_vals[i]).sum(),
        };
        let explained: f64 = (0..k).map(|i| w[i] * rhs[(i, t)]).sum();
        let var = (cov[(target, target)] - explained - multipliers[t]).max(0.0);
        result.predictions.push(pred);
        result.variances.push(var);
        result.weights.push(w);
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasMode {
    #[default]
    Global,
    PerVertex,
}

impl std::str::FromStr for BiasMode {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "global" => Ok(BiasMode::Global),
            "per-vertex" => Ok(BiasMode::PerVertex),
            other => Err(FieldError::Invalid(format!("unknown bias mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCorrection {
    /// Bias per vertex (constant in global mode).
    pub bias: Vec<f64>,
    /// `projection - bias`, per year.
    pub corrected: Vec<Vec<f64>>,
    /// `corrected - observation`, per year.
    pub residuals: Vec<Vec<f64>>,
}

/// Removes the mean projection-minus-observation offset over the years where
/// both are available (given co-indexed, year by year).
pub fn bias_correct(projections: &[Vec<f64>], observations: &[Vec<f64>], mode: BiasMode) -> Result<BiasCorrection, FieldError> {
    if projections.is_empty() || observations.is_empty() {
        return Err(FieldError::Invalid("no overlapping years between projections and observations".into()));
    }
    if projections.len() != observations.len() {
        return Err(FieldError::Invalid(format!(
            "{} projection years but {} observation years",
            projections.len(),
            observations.len()
        )));
    }
    let n = projections[0].len();
    if projections.iter().chain(observations).any(|v| v.len() != n) {
        return Err(FieldError::Invalid("every year must cover the same vertices".into()));
    }
    let years = projections.len() as f64;
    let per_vertex: Vec<f64> = (0..n)
        .map(|i| projections.iter().zip(observations).map(|(p, o)| p[i] - o[i]).sum::<f64>() / years)
        .collect();
    let bias = match mode {
        BiasMode::PerVertex => per_vertex,
        BiasMode::Global => vec![per_vertex.iter().sum::<f64>() / n as f64; n],
    };
    let corrected: Vec<Vec<f64>> = projections.iter().map(|p| p.iter().zip(&bias).map(|(a, b)| a - b).collect()).collect();
    let residuals = corrected.iter().zip(observations).map(|(c, o)| c.iter().zip(o).map(|(a, b)| a - b).collect()).collect();
    Ok(BiasCorrection { bias, corrected, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_covariance_variance() {
        let m = 4000;
        let ens = sample_gaussian(&[0.0; 3], &DMatrix::identity(3, 3), m, 11).unwrap();
        for i in 0..3 {
            let col = ens.values.column(i);
            let var = col.iter().map(|v| v * v).sum::<f64>() / m as f64;
            assert!((var - 1.0).abs() < 3.0 / (m as f64).sqrt() * 2f64.sqrt(), "{var}");
        }
    }

    #[test]
    fn rank_one_covariance_gives_equal_vertices() {
        let ens = sample_gaussian(&[0.0; 4], &DMatrix::from_element(4, 4, 2.0), 50, 3).unwrap();
        for r in 0..50 {
            let row = ens.realization(r);
            for v in &row {
                assert!((v - row[0]).abs() < 1e-3, "{row:?}");
            }
        }
    }

    #[test]
    fn seeded_determinism() {
        let cov = DMatrix::from_fn(3, 3, |i, j| 0.5f64.powi((i as i32 - j as i32).abs()));
        let a = sample_gaussian(&[1.0, 2.0, 3.0], &cov, 20, 99).unwrap();
        let b = sample_gaussian(&[1.0, 2.0, 3.0], &cov, 20, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_gaussian(&[1.0, 2.0, 3.0], &cov, 20, 100).unwrap();
        assert_ne!(a.values, c.values);
        // Prefix stability: fewer realizations reproduce the leading rows.
        let d = sample_gaussian(&[1.0, 2.0, 3.0], &cov, 5, 99).unwrap();
        assert_eq!(d.values, a.values.rows(0, 5).into_owned());
    }

    #[test]
    fn kriging_interpolates_observations() {
        let cov = DMatrix::from_fn(3, 3, |i, j| (-(i as f64 - j as f64).abs()).exp());
        for mode in [KrigingMode::Simple, KrigingMode::Ordinary] {
            let r = krige(&cov, &[0.0; 3], &[0, 2], &[1.3, -0.4], &[0], mode).unwrap();
            assert!((r.predictions[0] - 1.3).abs() < 1e-12);
            assert!(r.variances[0] < 1e-12);
        }
    }

    #[test]
    fn simple_kriging_one_observation_chain() {
        let rho = (-1.0f64).exp();
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        let r = krige(&cov, &[0.5, 0.5], &[0], &[2.0], &[1], KrigingMode::Simple).unwrap();
        assert!((r.weights[0][0] - 0.367879).abs() < 1e-6);
        assert!((r.predictions[0] - (0.5 + rho * 1.5)).abs() < 1e-12);
        assert!((r.variances[0] - (1.0 - rho * rho)).abs() < 1e-12);
    }

    #[test]
    fn disconnected_target_falls_back_to_mean() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let r = krige(&cov, &[0.1, 0.7], &[0], &[5.0], &[1], KrigingMode::Simple).unwrap();
        assert_eq!(r.predictions[0], 0.7);
        assert_eq!(r.variances[0], 2.0);
    }

    #[test]
    fn ordinary_weights_sum_to_one() {
        let cov = DMatrix::from_fn(4, 4, |i, j| (-(i as f64 - j as f64).abs() / 2.0).exp());
        let r = krige(&cov, &[0.0; 4], &[0, 1, 3], &[1.0, 2.0, 0.5], &[2], KrigingMode::Ordinary).unwrap();
        assert!((r.weights[0].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bias_examples() {
        let obs = vec![vec![1.0, 2.0], vec![0.0, -1.0]];
        let same = bias_correct(&obs, &obs, BiasMode::Global).unwrap();
        assert_eq!(same.bias, vec![0.0, 0.0]);
        assert!(same.residuals.iter().flatten().all(|&r| r == 0.0));
        let shifted: Vec<Vec<f64>> = obs.iter().map(|y| y.iter().map(|v| v + 0.5).collect()).collect();
        let c = bias_correct(&shifted, &obs, BiasMode::Global).unwrap();
        assert!(c.bias.iter().all(|&b| (b - 0.5).abs() < 1e-15));
        assert!(c.residuals.iter().flatten().all(|r| r.abs() < 1e-15));
        assert!(bias_correct(&[], &[], BiasMode::Global).is_err());
    }

    #[test]
    fn per_vertex_bias() {
        let proj = vec![vec![1.0, 5.0]];
        let obs = vec![vec![0.0, 2.0]];
        let c = bias_correct(&proj, &obs, BiasMode::PerVertex).unwrap();
        assert_eq!(c.bias, vec![1.0, 3.0]);
        let g = bias_correct(&proj, &obs, BiasMode::Global).unwrap();
        assert_eq!(g.bias, vec![2.0, 2.0]);
    }
}
