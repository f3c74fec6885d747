//! Exact infinite-wedge engine for relative Gromov–Witten invariants of P¹.
//!
//! The charge-zero fermionic Fock space is modelled with partition-indexed
//! sparse vectors whose coefficients live in an exact ring (rationals,
//! Laurent polynomials in the equivariant parameter `t`, or truncated
//! Laurent series over either). On top of that sit the operator algebra,
//! closed-form invariant evaluators, the finite-`r` orbifold bracket, the
//! interaction-diagram combinatorics and a small genus-zero recursion.

pub mod combinat;
pub mod diagrams;
pub mod error;
pub mod exactseries;
pub mod fock;
pub mod gwformulas;
pub mod johnson;
pub mod suites;
pub mod wdvv;
pub mod wedgeops;

pub use error::{Error, Result};
pub use exactseries::{Coeff, FracMonomial, Rational, SeriesElement, SeriesRing, TPoly};

/// Truncated Laurent series with rational coefficients.
pub type Series = SeriesElement<Rational>;
/// Truncated Laurent series with coefficients Laurent polynomial in `t`.
pub type TSeries = SeriesElement<TPoly>;
