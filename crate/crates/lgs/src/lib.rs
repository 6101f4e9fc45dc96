//! λ-graph systems (labeled Bratteli diagrams with a shift), the subshifts
//! they present, their symbolic matrix systems, a finite model of the
//! étale groupoid, the exact generator/relation algebra and checkers for
//! equivalence certificates.

pub mod algebra;
pub mod code;
pub mod equivalence;
pub mod error;
pub mod examples;
pub mod expr;
pub mod fine;
pub mod gen;
pub mod groupoid;
pub mod language;
pub mod points;
pub mod sms;
pub mod system;
pub mod text;
pub mod twosided;

pub use error::{Error, Result};
pub use system::{Alphabet, Edge, LabeledGraph, Lgs, Sym, VertexRef, Word};
