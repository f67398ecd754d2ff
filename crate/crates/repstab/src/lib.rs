//! Matrix-valued Fourier analysis on finite groups.
//!
//! The crate implements, at desk scale, the analysis needed to study functions
//! `f : G -> M_n(C)` on a finite group `G`:
//!
//! * [`group`] — finite groups as validated Cayley tables,
//! * [`cmatrix`] — a dense complex linear-algebra kernel (Jacobi SVD,
//!   Hermitian eigen, Schatten norms, polar rounding),
//! * [`irreps`] — complete tables of irreducible unitary representations with
//!   orthogonality certificates,
//! * [`fourier`] — the matrix-valued Fourier transform and the U² norm,
//! * [`inverse`] — the U² inverse theorem pipeline producing a correlating
//!   partial affine representation,
//! * [`stability`] — recovery of a genuine representation near an approximate
//!   one, with explicit constants,
//! * [`uniqueness`] — almost-unitary intertwiners between nearby
//!   representations,
//! * [`harness`] — seeded experiment generators and machine-readable reports.
//!
//! The `repstab` binary exposes the pipelines as CLI subcommands.

pub mod cmatrix;
pub mod fourier;
pub mod group;
pub mod harness;
pub mod inverse;
pub mod irreps;
pub mod stability;
pub mod uniqueness;

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the library.
#[derive(Debug)]
pub enum Error {
    /// A group spec string or its parameters are malformed.
    InvalidSpec(String),
    /// A Cayley table fails the group axioms.
    GroupValidation(String),
    /// Two objects live over different groups.
    GroupMismatch(String),
    /// Matrix shapes are incompatible with the requested operation.
    ShapeMismatch(String),
    /// A numeric parameter is out of its admissible range.
    BadParameter(String),
    /// A documented precondition does not hold; the message carries the
    /// measured quantity.
    Precondition(String),
    /// An iterative kernel hit its iteration cap.
    NonConvergence(String),
    /// An irrep table is not complete enough to invert against.
    IncompleteTable { residual: f64 },
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(m) => write!(f, "invalid group spec: {m}"),
            Error::GroupValidation(m) => write!(f, "group validation failed: {m}"),
            Error::GroupMismatch(m) => write!(f, "group mismatch: {m}"),
            Error::ShapeMismatch(m) => write!(f, "shape mismatch: {m}"),
            Error::BadParameter(m) => write!(f, "bad parameter: {m}"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::NonConvergence(m) => write!(f, "did not converge: {m}"),
            Error::IncompleteTable { residual } => {
                write!(f, "irrep table incomplete: Schur delta residual {residual:.3e}")
            }
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}
