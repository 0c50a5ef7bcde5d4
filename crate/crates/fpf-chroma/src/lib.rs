//! Certified bright colorings of fixed-point-free multivalued maps.
//!
//! A continuous map f from a compact boxed domain X in R^k into the
//! hyperspace of at-most-n-point sets is *fixed-point free* when x is never
//! an element of f(x). A closed subset F of X is a *bright color* when F
//! stays a positive distance away from the closure of the union of images
//! of its points; a *bright coloring* is a finite cover of X by bright
//! colors. This crate certifies fixed-point freeness with interval
//! arithmetic, constructs bright colorings by a recursive
//! split-by-projection pipeline, and independently verifies the result.
//!
//! Module map:
//!
//! - [`expr`] — the branch expression language (parser, point and interval
//!   evaluation, affine displacement enclosures);
//! - [`geometry`] — cell complexes, finite point sets, box separations;
//! - [`multimap`] — the set-valued map, enclosures, fixed-point-freeness
//!   certification;
//! - [`strata`] — certified classification of cells by argmax multiplicity,
//!   branch collisions, and singleton projections;
//! - [`colorer`] — the coloring pipeline and the color-count bound;
//! - [`verifier`] — independent certificate checking;
//! - [`discrete`] — the finite set-theoretic colorers and the doubling-map
//!   example.

pub mod colorer;
pub mod discrete;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod interval;
pub mod multimap;
pub mod strata;
pub mod verifier;

pub use error::{ColorError, DiscreteError, EvalError, GeometryError, MapError};
