//! Numerics for weight-zero polar harmonic Maass forms on Gamma0(N).
//!
//! The crate evaluates the two-variable Poincare series `y Psi_2` obtained
//! from Hecke's trick, builds Maass-Poincare series at cusps and forms with
//! prescribed poles in the upper half-plane, computes their Fourier
//! expansions through Kloosterman-sum series, and decides meromorphy of a
//! prescribed principal part through the Bruinier-Funke pairing against
//! cusp forms.

// Guards of the form `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod arith;
pub mod continuation;
pub mod kloosterman;
pub mod numeric;
pub mod pairing;
pub mod poincarebasis;
pub mod specialfn;

pub use numeric::{Precision, C64};
