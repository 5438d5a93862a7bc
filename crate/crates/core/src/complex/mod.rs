//! Finite directed complexes, diagrams in them, markings and horns, and
//! the lazily materialised free inflate and merge views.

mod directed;
mod inflate;
mod marked;
mod merge;

pub use directed::{named_shape, CellRef, Cell, Diagram, DirectedComplex, Extensions};
pub use inflate::{DegeneracyKind, InflateCell, InflateView};
pub use marked::{
    all_markings, enumerate_marked_horns, fibrancy_report, horn_filler_search, horn_morphisms, marked_equiv_search,
    saturation_instance, EquivSearch, FibrancyReport, HornInstance, InventoryItem, ItemReport, ItemStatus, LayeringWitness,
    MarkedComplex, Saturation, Variant,
};
pub use merge::{
    cells_of_shape, comaps_between, globular_star, marked_closure, rounding, unit, ClosureResult, ClosureUniverse, MergeCell,
};

use thiserror::Error;

use crate::molecule::MoleculeError;
use crate::morphism::MorphismError;
use crate::ogposet::OgError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("attachment incompatible: {0}")]
    AttachmentIncompatible(String),
    #[error("diagrams do not agree on the glued boundary")]
    GlueMismatch,
    #[error("not a rewritable subdiagram")]
    NotRewritable,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("diagram is not round")]
    NotRound,
    #[error("boundaries do not match")]
    BoundaryMismatch,
    #[error("diagrams are not parallel")]
    NotParallel,
    #[error("pasting undefined")]
    PasteUndefined,
    #[error("invalid marking: {0}")]
    InvalidMarking(String),
    #[error("malformed complex: {0}")]
    Parse(String),
    #[error(transparent)]
    Og(#[from] OgError),
    #[error(transparent)]
    Molecule(#[from] MoleculeError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}
