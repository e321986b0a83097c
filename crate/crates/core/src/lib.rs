//! Affine linear sieve on the variety of `n x n` integer matrices of fixed
//! determinant.
//!
//! The crate is `no_std` (with `alloc`). The `std` feature (default) only
//! switches the error type over to `std::error::Error`; `parallel` adds
//! rayon-backed data parallelism to the enumeration loops. Every parallel
//! path produces results identical to the sequential one.
//!
//! Module map:
//!
//! * [`arithmetic`]: primality, factorization, CRT, Möbius.
//! * [`matrix`]: the [`IntMatrix`] point type and exact determinants.
//! * [`orbit`]: enumeration and counting of `V_{m,n}(Z)` in norm balls,
//!   Hermite normal form orbit decomposition, congruence cosets.
//! * [`densities`]: residue orbits, vanishing counts, local densities.
//! * [`sieve`]: sift sequences, Legendre sift, remainders, prime counts.
//! * [`bounds`]: saturation and level-of-distribution formulas.
//! * [`prime_matrix`]: all-prime matrices of determinant `2^{n-1}`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod arithmetic;
pub mod bounds;
pub mod densities;
mod error;
pub mod matrix;
pub mod orbit;
mod par;
pub mod polynomial;
pub mod prime_matrix;
pub mod sieve;

pub use error::{Error, Result};
pub use matrix::IntMatrix;
pub use orbit::{NormKind, NormSpec};
pub use polynomial::PolynomialOnV;

/// Exact rational used for densities and singular-series products.
pub type Rational = num_rational::BigRational;

/// Default cap on candidate visits for enumeration routines.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;
