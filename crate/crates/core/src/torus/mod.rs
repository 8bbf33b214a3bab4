//! Rotations of the torus and the combinatorics of their codings.

pub mod circle;
pub mod coverage;
pub mod diophantine;
pub mod lattice;
pub mod real;
pub mod spec;

pub use circle::{Arc1, Coord, Lin};
pub use real::{Dyadic, Real};
pub use coverage::{CoverageCertificate, TBox};
pub use spec::{RegionBound, TorusSpec};
