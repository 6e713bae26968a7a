//! Galerkin space of clamped beam modes and their tensor products: basis
//! construction, Gram assembly, projection and the embedding constant.

mod basis;
mod beam;
mod grams;

pub use basis::{build_basis, default_quad_order, eval_field, eval_laplacian, min_quad_order, Basis};
pub use beam::{beam_roots, BeamMode};
pub use grams::{assemble_grams, estimate_cp, generalized_eigenvalues, project_initial, GramSet, CP_TOLERANCE};
