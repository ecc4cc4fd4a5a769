use std::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An edge failed validation (wrong arity, repeated vertex, out-of-range vertex).
    InvalidEdge { edge: Vec<u32>, reason: String },
    /// The same edge appeared twice in a construction or file.
    DuplicateEdge { edge: Vec<u32> },
    /// A vertex index outside [0, n).
    VertexOutOfRange { vertex: u32, n: u32 },
    /// Co-degree requested on the diagonal.
    DiagonalCodegree { vertex: u32 },
    /// Malformed `.hg` text.
    Parse { line: usize, reason: String },
    /// A regime cannot be realized at the given (n, k).
    InfeasibleRegime { reason: String },
    /// A size limit was exceeded (C(n,k) overflow, matrix dimension cap, ...).
    Capacity { reason: String },
    /// Vector/matrix dimensions do not agree.
    Dimension { expected: usize, got: usize },
    /// A partition is not equitable for the given matrix.
    NotEquitable { max_deviation: f64 },
    /// A partition does not cover the vertex set exactly once.
    BadPartition { reason: String },
    /// Eigensolver input was not symmetric.
    Asymmetric { max_asymmetry: f64 },
    /// Eigensolver hit its sweep cap before converging.
    NoConvergence { sweeps: usize },
    /// Kernel evaluation failed at a vertex.
    Kernel { vertex: u32, reason: String },
    /// Initial state is not constant on units.
    NotUnitConstant { unit_min_vertex: u32, deviation: f64 },
    /// The regime admits no limit law (fixed p).
    NoLimitLaw,
    /// A pmf failed a precondition (not normalized, negative mass).
    BadPmf { reason: String },
    /// Index outside its declared domain.
    IndexOutOfRange { index: u128, bound: u128 },
    /// An empty input where at least one element is required.
    Empty { what: &'static str },
    /// Invalid construction parameters (n, k, trials, ...).
    InvalidParameter { reason: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidEdge { edge, reason } => {
                write!(f, "invalid edge {edge:?}: {reason}")
            }
            Error::DuplicateEdge { edge } => write!(f, "duplicate edge {edge:?}"),
            Error::VertexOutOfRange { vertex, n } => {
                write!(f, "vertex {vertex} out of range [0, {n})")
            }
            Error::DiagonalCodegree { vertex } => {
                write!(f, "co-degree is undefined on the diagonal (vertex {vertex})")
            }
            Error::Parse { line, reason } => write!(f, "parse error at line {line}: {reason}"),
            Error::InfeasibleRegime { reason } => write!(f, "infeasible regime: {reason}"),
            Error::Capacity { reason } => write!(f, "capacity exceeded: {reason}"),
            Error::Dimension { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NotEquitable { max_deviation } => {
                write!(f, "partition is not equitable (max deviation {max_deviation:e})")
            }
            Error::BadPartition { reason } => write!(f, "bad partition: {reason}"),
            Error::Asymmetric { max_asymmetry } => {
                write!(f, "matrix is not symmetric (max asymmetry {max_asymmetry:e})")
            }
            Error::NoConvergence { sweeps } => {
                write!(f, "eigensolver did not converge after {sweeps} sweeps")
            }
            Error::Kernel { vertex, reason } => {
                write!(f, "kernel evaluation failed at vertex {vertex}: {reason}")
            }
            Error::NotUnitConstant { unit_min_vertex, deviation } => write!(
                f,
                "state is not constant on the unit containing vertex {unit_min_vertex} \
                 (deviation {deviation:e})"
            ),
            Error::NoLimitLaw => write!(f, "no limit law for a fixed-p regime"),
            Error::BadPmf { reason } => write!(f, "bad pmf: {reason}"),
            Error::IndexOutOfRange { index, bound } => {
                write!(f, "index {index} out of range [0, {bound})")
            }
            Error::Empty { what } => write!(f, "empty {what}"),
            Error::InvalidParameter { reason } => write!(f, "invalid parameter: {reason}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
