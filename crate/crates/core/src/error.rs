//! Error type shared by all modules.

use std::error;
use std::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of lattice construction, spectral computation and
/// time evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Parameter or configuration violates a documented precondition.
    InvalidParams(String),
    /// The band gap closed (or fell below tolerance) somewhere on the
    /// requested loop; topological quantities are ill-defined there.
    GapClosed { k: f64, t: f64, gap: f64 },
    /// Population reached the truncation boundary of the chain.
    EdgeLeak { time: f64, population: f64 },
    /// The integrator failed to reach the requested tolerance.
    StepFailure(String),
    /// The cavity geometry is outside the ray-matrix stability region.
    Unstable { half_trace: f64 },
    /// The requested OAM change cannot be represented with the given
    /// base and stage count.
    Unrepresentable { delta_l: i64, base: u32, stages: u32 },
    /// A unit-cell index falls outside the truncated chain.
    CellOutOfRange { cell: i64 },
    /// The schedule start point is not dimerized (|J-| != 0), so no
    /// single-cell Wannier state exists there.
    NotDimerized { j_minus_mag: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::GapClosed { k, t, gap } => {
                write!(f, "band gap closed at k={k:.6}, t={t:.6} (gap={gap:.3e})")
            }
            Error::EdgeLeak { time, population } => write!(
                f,
                "edge population {population:.3e} exceeded tolerance at t={time:.6}; \
                 enlarge the chain truncation"
            ),
            Error::StepFailure(msg) => write!(f, "integrator failure: {msg}"),
            Error::Unstable { half_trace } => {
                write!(f, "cavity unstable: |(A+D)/2| = {half_trace:.6} > 1")
            }
            Error::Unrepresentable {
                delta_l,
                base,
                stages,
            } => write!(
                f,
                "OAM change {delta_l} is not representable with base {base} and {stages} stage(s)"
            ),
            Error::CellOutOfRange { cell } => {
                write!(f, "unit cell {cell} lies outside the truncated chain")
            }
            Error::NotDimerized { j_minus_mag } => write!(
                f,
                "schedule start is not dimerized (|J-| = {j_minus_mag:.3e}); \
                 Wannier preparation requires a flat-band start"
            ),
        }
    }
}

impl error::Error for Error {}

/// Machine-readable error category, used by the CLI for exit codes and
/// structured error output.
impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::GapClosed { .. } => "gap_closed",
            Error::EdgeLeak { .. } => "edge_leak",
            Error::StepFailure(_) => "step_failure",
            Error::Unstable { .. } => "unstable",
            Error::Unrepresentable { .. } => "unrepresentable",
            Error::CellOutOfRange { .. } => "cell_out_of_range",
            Error::NotDimerized { .. } => "not_dimerized",
        }
    }
}
