//! Scalar functionals along a trajectory: energies and the dissipation
//! identity, logarithmic Sobolev gaps, the potential well, Lyapunov
//! functionals, memory and damping estimates, and decay fitting.

mod energy;
mod fit;
mod logsobolev;
mod lyapunov;
mod memory;
mod well;

pub use energy::{energy, energy_rate_residual, kernel_mass, max_abs_finite, EnergySample};
pub use fit::{fit_decay, FitReport, MIN_FIT_SAMPLES, OVERSHOOT_TOLERANCE};
pub use logsobolev::{log_sobolev_gap, log_sobolev_worst_a, s_log_constant};
pub use lyapunov::{
    lyapunov_search, lyapunov_series, memory_difference, psi1, psi2, FunctionalSample, LyapunovSample, LyapunovSeries,
    DEFAULT_LYAPUNOV_EPS, ENERGY_FLOOR, MAX_LYAPUNOV_N,
};
pub use memory::{damping_diag, memory_cs_check, DampingDiagnostics, MemoryGaps, TailLaw, DEFAULT_DELTA};
pub use well::{
    check_well, initial_energy, scale_into_well, well_constants, well_optimal_a, WellConstants, WellReport,
};
