//! Flow-informed covariance models on directed linear networks.
//!
//! The crate turns a gridded velocity field into a directed network whose
//! edges follow the flow, models the flow as an absorbing Markov chain, and
//! builds a valid covariance structure on the network vertices from path
//! weights and a one-dimensional kernel. On top of that it provides a
//! penalized covariance estimator, Gaussian simulation, kriging and
//! excursion-set analysis of Monte Carlo ensembles.
//!
//! Module map:
//!
//! * [`io`] grid CSV parsing, network JSON, binary matrix files
//! * [`network`] velocity decomposition and network construction
//! * [`markov`] fundamental matrix, non-return probabilities, reachability
//! * [`covariance`] kernels, path enumeration, closed-form and path-sum assembly
//! * [`estimator`] sill, binned covariance, admissible ridge penalty, range fit
//! * [`fields`] Gaussian ensembles, simple/ordinary kriging, bias correction
//! * [`extremes`] joint exceedance and inner/outer excursion sets
//! * [`bench`] desk-scale simulation study against the Euclidean baseline
//! * [`cli`] the `netcov` command-line front end

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod covariance;
pub mod estimator;
pub mod extremes;
pub mod fields;
pub mod io;
pub mod markov;
pub mod network;

mod linalg;

pub use covariance::{KernelKind, KernelSpec};
pub use fields::FieldEnsemble;
pub use io::VelocityGrid;
pub use markov::MarkovSolution;
pub use network::DirectedNetwork;

/// Crate-level error, wrapping the per-module error types.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error(transparent)]
    Network(#[from] network::NetworkError),
    #[error(transparent)]
    Markov(#[from] markov::MarkovError),
    #[error(transparent)]
    Covariance(#[from] covariance::CovarianceError),
    #[error(transparent)]
    Estimation(#[from] estimator::EstimationError),
    #[error(transparent)]
    Field(#[from] fields::FieldError),
    #[error(transparent)]
    Extremes(#[from] extremes::ExtremesError),
    #[error(transparent)]
    Bench(#[from] bench::BenchError),
}

impl Error {
    /// True when the failure comes from a numerical breakdown (singular
    /// systems, failed factorizations) rather than from invalid input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Io(_) | Error::Extremes(_) => false,
            Error::Network(e) => e.is_numerical(),
            Error::Markov(e) => e.is_numerical(),
            Error::Covariance(e) => e.is_numerical(),
            Error::Estimation(e) => e.is_numerical(),
            Error::Field(e) => e.is_numerical(),
            Error::Bench(e) => e.is_numerical(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
