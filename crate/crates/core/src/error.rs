use thiserror::Error;

use crate::linalg::{EigenError, SingularMatrix};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("invalid bath: {0}")]
    InvalidBath(String),
    #[error("dispersive approximation violated: |lambda| = {lambda} >= 1")]
    DispersiveViolation { lambda: f64 },
    #[error("{what} requires a positive frequency, got {omega}")]
    Domain { what: &'static str, omega: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "Bohr frequencies {first} and {second} differ by less than the grouping tolerance {tol} \
         but are numerically distinct"
    )]
    DegenerateGrouping { first: f64, second: f64, tol: f64 },
    #[error("number superoperator does not commute with the Liouvillian (max |[N, L]| = {residual:e})")]
    SymmetryViolation { residual: f64 },
    #[error("block {d} is defective: {source}")]
    DefectiveMatrix {
        d: i64,
        #[source]
        source: EigenError,
    },
    #[error("eigensolver failed: {0}")]
    Eigen(#[from] EigenError),
    #[error("no mode passes the sigma_x overlap filter (eps = {eps:e})")]
    EmptyModeSet { eps: f64 },
    #[error("coherent state loses {lost:e} of its weight to truncation at S = {s}")]
    TruncationLoss { lost: f64, s: usize },
    #[error("coherence decay is not exponential over the window (R^2 = {r_squared:.6})")]
    NonExponential { r_squared: f64 },
    #[error("fit window contains {0} usable samples; need at least 2")]
    FitWindow(usize),
    #[error("linear solve failed: {0}")]
    Singular(#[from] SingularMatrix),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
