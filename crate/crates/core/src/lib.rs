//! Refutation proving for first-order logic over nested graph diagrams.
//!
//! Formulas are converted into graphs of slices (drafts with distinguished
//! name lists). A consequence `Φ ⊨ θ` holds iff the 0-ary difference slice
//! built from `Φ` and the complement of `θ` is null; the prover shows this
//! by converting to basic form and expanding until every slice contains a
//! syntactically recognizable conflict.

pub mod canon;
pub mod conversion;
pub mod exec;
pub mod formula;
pub mod json;
pub mod matching;
pub mod model;
pub mod name;
pub mod ops;
pub mod prover;
pub mod render;
pub mod semantics;
pub mod session;
pub mod syntax;

pub use canon::{iso_equal, Canonicalize};
pub use exec::Exec;
pub use formula::{Formula, Quantifier, Term};
pub use model::{Arc, Draft, Expr, Graph, Slice, StructureError};
pub use name::{Name, NameGen, PredSym};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] syntax::SyntaxError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Json(#[from] json::JsonError),
    #[error(transparent)]
    Semantics(#[from] semantics::SemanticsError),
    #[error(transparent)]
    Conversion(#[from] conversion::ConversionError),
    #[error(transparent)]
    Ops(#[from] ops::OpsError),
    #[error(transparent)]
    Prover(#[from] prover::ProverError),
}
