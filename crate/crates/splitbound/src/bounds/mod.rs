//! Explicit tail bounds as clamped sums of terms.
//!
//! Every bound is built by a pure function in [`families`] and can also be
//! looked up by name in a [`BoundRegistry`], which is how the command line
//! selects one.

mod curve;
pub mod families;
mod registry;

use thiserror::Error;

pub use curve::{Shape, TailBoundCurve, Term};
pub use families::*;
pub use registry::{BoundFamily, BoundInputs, BoundRegistry};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BoundError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bound family {family} needs parameter {name}")]
    MissingParameter { family: String, name: String },
    #[error("unknown bound family {0}")]
    UnknownFamily(String),
    #[error("n = {n} is not a multiple of m = {m}")]
    NotMultiple { n: u64, m: u64 },
}
