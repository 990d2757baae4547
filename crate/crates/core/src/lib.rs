//! Semiclassical spin dynamics in a quantized transverse field: the
//! leading-order Bloch flow, its order-ħ correction, photon-number rates,
//! a transition-amplitude bound and a truncated Fock-space reference.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch_core;
pub mod error;
pub mod field_symbols;
pub mod fock_oracle;
pub mod mode_space;
pub mod photon_number;
pub mod quadrature;
pub mod radiative;
pub mod selftest;
pub mod spin;
pub mod transition;

pub use error::{Error, Result};
pub use field_symbols::SpinSystem;
pub use mode_space::{Helicity, KGrid, PhasePoint, RadialCutoff, Vec3};
pub use num_complex::Complex64;
pub use spin::{CMatrix, CVector};
