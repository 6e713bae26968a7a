//! Time integration of the Galerkin system: average-acceleration Newmark
//! with a Newton solve for the acceleration and a stored uniform history for
//! the memory integral.

mod history;
mod integrator;
mod params;
mod solver;
mod state;

pub use history::{
    memory_coefficients, memory_coefficients_ahead, memory_forms, memory_term, HistoryBuffer, KernelTable,
};
pub use integrator::{simulate, Integrator, StepStats, Trajectory, MAX_HALVINGS, NEWMARK_BETA, NEWMARK_GAMMA};
pub use params::{ln_abs_clamped, s_ln_abs, PhysicalParams, DEFAULT_SIGMA};
pub use solver::{accel_jacobian, newton_solve_accel, residual, NewtonInfo, NewtonOptions};
pub use state::PlateState;
