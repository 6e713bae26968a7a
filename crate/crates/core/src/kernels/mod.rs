//! Admissible memory kernels, convexity moduli, damping laws, their
//! validation on sampling grids, and the decay envelopes built from them.

pub mod catalog;
pub mod damping;
pub mod envelope;
pub mod modulus;
pub mod relaxation;
pub mod validate;
pub mod xi;

pub use catalog::{auto_decay_law, parse_damping, parse_kernel, parse_modulus, parse_xi};
pub use damping::{DampingForm, DampingLaw};
pub use envelope::{
    envelope_linear_b, envelope_nonlinear_b, envelope_nonlinear_both, DecayEnvelope, EnvelopeCase, DEFAULT_EPS0,
};
pub use modulus::{convex_conjugate, extend_modulus, ConvexModulus, ModulusForm, QuadraticTail};
pub use relaxation::{KernelFamily, RelaxationKernel, ScalarFn};
pub use validate::{symmetric_grid, uniform_grid, validate_h1, validate_h2, validate_h3, ValidationReport};
pub use xi::XiWeight;
