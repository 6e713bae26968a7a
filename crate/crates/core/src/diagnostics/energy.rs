use nalgebra::DVector;
use serde::Serialize;

use crate::dynamics::{memory_forms, s_ln_abs, HistoryBuffer, KernelTable, PhysicalParams, PlateState};
use crate::numeric::trapezoid_weight;
use crate::spectral::{Basis, GramSet};

/// Scalar functionals at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnergySample {
    pub t: f64,
    /// `‖u_t‖_{ρ+2}^{ρ+2} / (ρ+2)`.
    pub kin_rho: f64,
    /// `‖Δu‖²`.
    pub bend: f64,
    /// `‖Δu_t‖²`.
    pub bend_rate: f64,
    /// `‖u‖²`.
    pub mass: f64,
    /// `∫ u² ln|u|`.
    pub logterm: f64,
    /// `(b∘Δu)(t)`.
    pub memory: f64,
    /// `(b'∘Δu)(t)`.
    pub memory_rate: f64,
    /// `∫₀ᵗ b`.
    pub kernel_mass: f64,
    /// `b(t)`.
    pub kernel_now: f64,
    /// `∫ u_t h(u_t)`.
    pub dissipation: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "I")]
    pub i: f64,
}

impl EnergySample {
    /// `½(b'∘Δu) - ½ b(t)‖Δu‖² - ∫u_t h(u_t)`, the exact rate of `E`.
    pub fn predicted_rate(&self) -> f64 {
        0.5 * self.memory_rate - 0.5 * self.kernel_now * self.bend - self.dissipation
    }

    /// `‖u_t‖_{ρ+2}^{ρ+2}`.
    pub fn inertia_norm(&self, rho: f64) -> f64 {
        (rho + 2.0) * self.kin_rho
    }
}

/// `∫₀^{t_n} b` by the trapezoid rule on the kernel table, matching the
/// memory quadrature.
pub fn kernel_mass(table: &KernelTable, n: usize) -> f64 {
    let len = n + 1;
    (0..len).map(|i| trapezoid_weight(i, len) * table.value(i)).sum::<f64>() * table.dt()
}

/// All energy terms of `state`; `history` must end at `state.g`.
pub fn energy(
    state: &PlateState,
    params: &PhysicalParams,
    grams: &GramSet,
    basis: &Basis,
    history: &HistoryBuffer,
    table: &KernelTable,
) -> EnergySample {
    let w = basis.weights();
    let uq = basis.synthesize(&state.g);
    let vq = basis.synthesize(&state.v);
    let kin = DVector::from_fn(vq.len(), |q, _| params.kinetic_density(vq[q]));
    let log = uq.map(|u| u * s_ln_abs(u));
    let diss = vq.map(|v| v * params.damping.value(v));
    let bend = GramSet::quad(&grams.m2, &state.g);
    let bend_rate = GramSet::quad(&grams.m2, &state.v);
    let mass = GramSet::quad(&grams.m0, &state.g);
    let logterm = w.dot(&log);
    let (memory, memory_rate) = if params.kernel.is_zero() {
        (0.0, 0.0)
    } else {
        memory_forms(history, table)
    };
    let n = history.len().saturating_sub(1);
    let km = if params.kernel.is_zero() {
        0.0
    } else {
        kernel_mass(table, n)
    };
    let kin_rho = w.dot(&kin);
    let k = params.k;
    let j = 0.5 * (bend_rate + (1.0 - km) * bend + mass + memory - k * logterm) + 0.25 * k * mass;
    let i = 2.0 * j - 0.5 * k * mass;
    EnergySample {
        t: state.t,
        kin_rho,
        bend,
        bend_rate,
        mass,
        logterm,
        memory,
        memory_rate,
        kernel_mass: km,
        kernel_now: if params.kernel.is_zero() { 0.0 } else { table.value(n) },
        dissipation: w.dot(&diss),
        e: kin_rho + j,
        j,
        i,
    }
}

/// Central-difference residual of the energy identity at interior samples:
/// `(E_{n+1} - E_{n-1}) / 2Δt - predicted_rate(t_n)`. The first and last
/// entries are `NaN`.
pub fn energy_rate_residual(samples: &[EnergySample], dt: f64) -> Vec<f64> {
    let n = samples.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 >= n {
                f64::NAN
            } else {
                (samples[i + 1].e - samples[i - 1].e) / (2.0 * dt) - samples[i].predicted_rate()
            }
        })
        .collect()
}

/// Largest `|r|` over the finite entries.
pub fn max_abs_finite(r: &[f64]) -> f64 {
    r.iter().filter(|x| x.is_finite()).fold(0.0, |m, x| m.max(x.abs()))
}
