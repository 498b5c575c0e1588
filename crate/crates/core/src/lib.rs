//! Laboratory for uniformly dense 3-uniform hypergraphs.
//!
//! The crate is organised around the objects that show up when studying
//! hypergraphs in which every "pair of pairs" `((x,y),(x,z))` sees a fixed
//! proportion of hyperedges:
//!
//! * [`hypercore`]: hypergraphs, pair sets and exact incidence counters.
//! * [`palette`]: colour patterns and palettes with their codegree density.
//! * [`construct`]: random edge colourings and the hypergraphs they induce.
//! * [`ramsey`]: exact search for palette-respecting colourings of `K_k`.
//! * [`systems`]: sequences, `M`-ary trees and subsystem extraction.
//! * [`reduced`]: reduced hypergraphs, cliques, admissible selections and
//!   fortresses, including the recursive fortress builder.
//!
//! Numeric parameters (densities, tolerances) are generic over [`Scalar`],
//! which is implemented for `f32`, `f64` and exact rationals.

mod bits;
pub mod construct;
pub mod error;
pub mod hypercore;
pub mod palette;
pub mod ramsey;
pub mod reduced;
pub mod scalar;
pub mod systems;

pub use bits::Bits;
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact ratio of two counts, as reported by the density counters.
pub type Ratio = num_rational::Ratio<u64>;
/// Machine-word rational for exact density parameters.
pub type Rational = num_rational::Ratio<i64>;
/// Arbitrary-precision rational.
pub type BigRational = num_rational::BigRational;
/// Default floating-point scalar.
pub type Real = f64;
