//! Finite-group laboratory: presentations, coset enumeration, exterior
//! squares, and the extension functors built on them.

pub mod automorphisms;
pub mod constructors;
pub mod error;
pub mod functors;
pub mod group;
pub mod isoscope;
pub mod presentation;
pub mod todd_coxeter;
pub mod wedge;
pub mod words;

pub use error::{Error, Result};
pub use group::{ElemId, GroupView, Morphism, Subgroup};
