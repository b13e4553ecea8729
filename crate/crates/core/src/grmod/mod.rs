//! Graded modules over the polynomial ring and the quadric cone.

mod map;
mod presentation;
pub mod kernel;
pub mod pushforward;
pub mod resolution;

pub use map::{Generator, GradedMap};
pub(crate) use map::{vector_to_column, weights_in_degree, Block};
pub use presentation::{
    multisets, EntryDoc, GradedModulePresentation, GradedPiece, PresentationDoc, RelationDoc,
    PRESENTATION_VERSION,
};
