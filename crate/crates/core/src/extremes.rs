//! Joint exceedance over neighborhoods and inner/outer excursion sets,
//! estimated by counting over a Monte Carlo ensemble.

use serde::{Deserialize, Serialize};

use crate::fields::FieldEnsemble;

/// Slack when comparing a count against `(1 - alpha) M`.
const COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum ExtremesError {
    #[error("empty neighborhood")]
    EmptyNeighborhood,
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointExceedance {
    pub radius: f64,
    pub members: Vec<usize>,
    /// Frequency of at least one member exceeding the threshold.
    pub p_union: f64,
    /// Frequency of every member exceeding the threshold.
    pub p_intersection: f64,
}

/// Vertices within distance `radius` of `center` (closed ball), always
/// including the vertex nearest to the center so a zero radius still selects
/// a location.
pub fn neighborhood(coords: &[[f64; 2]], center: [f64; 2], radius: f64) -> Vec<usize> {
    let dist: Vec<f64> = coords.iter().map(|c| (c[0] - center[0]).hypot(c[1] - center[1])).collect();
    let nearest = (0..coords.len()).fold(None, |best: Option<usize>, i| match best {
        Some(b) if dist[b] <= dist[i] => Some(b),
        _ => Some(i),
    });
    (0..coords.len()).filter(|&i| dist[i] <= radius || Some(i) == nearest).collect()
}

pub fn joint_exceedance(
    ens: &FieldEnsemble,
    coords: &[[f64; 2]],
    center: [f64; 2],
    radii: &[f64],
    threshold: f64,
) -> Result<Vec<JointExceedance>, ExtremesError> {
    if coords.len() != ens.n() {
        return Err(ExtremesError::Invalid(format!("{} coordinates for {} ensemble vertices", coords.len(), ens.n())));
    }
    if ens.m() == 0 {
        return Err(ExtremesError::Invalid("ensemble has no realizations".into()));
    }
    let m = ens.m() as f64;
    radii
        .iter()
        .map(|&radius| {
            if !(radius >= 0.0) {
                return Err(ExtremesError::Invalid(format!("radius must be nonnegative, got {radius}")));
            }
            let members = neighborhood(coords, center, radius);
            if members.is_empty() {
                return Err(ExtremesError::EmptyNeighborhood);
            }
            let (mut any, mut all) = (0usize, 0usize);
            for r in 0..ens.m() {
                let row = ens.values.row(r);
                let hits = members.iter().filter(|&&i| row[i] > threshold).count();
                any += usize::from(hits > 0);
                all += usize::from(hits == members.len());
            }
            Ok(JointExceedance { radius, members, p_union: any as f64 / m, p_intersection: all as f64 / m })
        })
        .collect()
}

/// CSV with columns `radius,p_union,p_intersection`.
pub fn joint_exceedance_csv(rows: &[JointExceedance]) -> String {
    let mut out = String::from("radius,p_union,p_intersection\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.radius, r.p_union, r.p_intersection));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionResult {
    pub threshold: f64,
    pub alpha: f64,
    /// Vertices that all exceed the threshold with frequency at least `1 - alpha`.
    pub inner: Vec<usize>,
    /// Vertices outside which nothing exceeds with frequency at least `1 - alpha`.
    pub outer: Vec<usize>,
    pub marginals: Vec<f64>,
    /// Frequency of `inner` lying inside the exceedance set.
    pub inner_containment: f64,
    /// Frequency of the exceedance set lying inside `outer`.
    pub outer_containment: f64,
}

/// Exceedance indicator per realization and vertex.
fn exceedances(ens: &FieldEnsemble, threshold: f64) -> Vec<Vec<bool>> {
    (0..ens.m()).map(|r| ens.values.row(r).iter().map(|&v| v > threshold).collect()).collect()
}

/// Length of the longest prefix of `order` for which `holds(realization)`
/// stays true in at least `need` realizations, and that count. `holds` is
/// evaluated on the running conjunction, which makes the count nonincreasing.
fn longest_prefix(rows: &[Vec<bool>], order: &[usize], need: f64, keep: impl Fn(bool) -> bool) -> (usize, usize) {
    let mut alive = vec![true; rows.len()];
    let mut count = rows.len();
    for (k, &v) in order.iter().enumerate() {
        let next: usize = rows.iter().zip(&alive).filter(|(row, &a)| a && keep(row[v])).count();
        if (next as f64) < need {
            return (k, count);
        }
        for (a, row) in alive.iter_mut().zip(rows) {
            *a = *a && keep(row[v]);
        }
        count = next;
    }
    (order.len(), count)
}

/// Greedy inner and outer excursion sets at level `1 - alpha`.
///
/// Inner: vertices by decreasing exceedance frequency, longest prefix that
/// jointly exceeds often enough. Outer: vertices by increasing frequency,
/// longest prefix that jointly stays below often enough; the outer set is its
/// complement.
pub fn excursion_sets(ens: &FieldEnsemble, threshold: f64, alpha: f64) -> Result<ExcursionResult, ExtremesError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ExtremesError::Invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let m = ens.m();
    if (m as f64) * alpha < 1.0 - 1e-12 {
        return Err(ExtremesError::Invalid(format!("{m} realizations are too few for alpha = {alpha}")));
    }
    let rows = exceedances(ens, threshold);
    let n = ens.n();
    let marginals: Vec<f64> =
        (0..n).map(|i| rows.iter().filter(|r| r[i]).count() as f64 / m as f64).collect();
    let need = (1.0 - alpha) * m as f64 - COUNT_SLACK;

    let mut desc: Vec<usize> = (0..n).collect();
    desc.sort_by(|&a, &b| marginals[b].total_cmp(&marginals[a]).then(a.cmp(&b)));
    let (k_inner, inner_count) = longest_prefix(&rows, &desc, need, |e| e);
    let mut inner = desc[..k_inner].to_vec();
    inner.sort_unstable();

    let mut asc: Vec<usize> = (0..n).collect();
    asc.sort_by(|&a, &b| marginals[a].total_cmp(&marginals[b]).then(a.cmp(&b)));
    let (k_low, outer_count) = longest_prefix(&rows, &asc, need, |e| !e);
    let mut outer = asc[k_low..].to_vec();
    outer.sort_unstable();

    Ok(ExcursionResult {
        threshold,
        alpha,
        inner,
        outer,
        marginals,
        inner_containment: inner_count as f64 / m as f64,
        outer_containment: outer_count as f64 / m as f64,
    })
}
