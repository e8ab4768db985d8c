//! Entanglement certification for beam-split mixtures of Fock states.
//!
//! Two-mode states are dense density matrices on the truncated Fock space
//! `{|a,b> : a, b <= n_max}`. The crate builds the state family, takes partial
//! transposes, runs the Hankel/Sylvester and Gerschgorin positivity tests and
//! searches the range of a state for product vectors.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod exact;
pub mod fock;
pub mod gerschgorin;
pub mod hankel;
pub mod partial_transpose;
pub mod range_search;
pub mod states;

pub(crate) mod math;

pub use error::{Error, Result};
pub use math::{ln_factorial, sqrt_binomial};
