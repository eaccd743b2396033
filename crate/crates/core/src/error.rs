use thiserror::Error;

use crate::expr::ExprError;
use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("{source} (at {cube})")]
    AtCube { cube: String, source: Box<Error> },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("bounds of {cube} do not intersect its parent's bounds {parent}: {child}")]
    Inconsistent { cube: String, parent: String, child: String },
}

impl Error {
    pub(crate) fn at(self, cube: impl std::fmt::Display) -> Error {
        match self {
            e @ Error::AtCube { .. } => e,
            e => Error::AtCube { cube: cube.to_string(), source: Box::new(e) },
        }
    }

    /// The innermost error, with cube context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtCube { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
