//! Berglund–Hübsch orbifold zeta functions over finite fields.
//!
//! Everything here is `no_std` + `alloc`: lattice combinatorics of `G_A`,
//! Milnor rings, truncated p-adic arithmetic with Morita's `Gamma_p`,
//! Jacobi sums in cyclotomic rings, supertraces and zeta reconstruction,
//! and the diagonal Monsky–Washnitzer trace.
#![no_std]

extern crate alloc;

pub mod error;
pub mod matrix;
pub mod milnor;
pub mod charsum;
pub mod padic;
pub mod spectrum;
pub mod mw;

pub use error::{Error, Result};
