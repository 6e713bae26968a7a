//! Spectral Galerkin simulation of a clamped viscoelastic plate with
//! nonlinear inertia, a logarithmic source and frictional damping, together
//! with diagnostics for its energy, potential well and decay.

// range checks are written so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod kernels;
pub mod numeric;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
