use nalgebra::DVector;
use serde::Serialize;

use crate::diagnostics::energy::kernel_mass;
use crate::dynamics::{memory_coefficients, HistoryBuffer, KernelTable, PhysicalParams, PlateState};
use crate::spectral::{Basis, GramSet};

/// Default weight of `Ψ₁` in `L`.
pub const DEFAULT_LYAPUNOV_EPS: f64 = 0.1;

/// Largest `N` tried by [`lyapunov_search`].
pub const MAX_LYAPUNOV_N: f64 = 1024.0;

/// Samples with smaller energy are left out of ratio statistics.
pub const ENERGY_FLOOR: f64 = 1e-14;

fn inertia_flux(v: f64, rho: f64) -> f64 {
    if rho == 0.0 {
        v
    } else {
        v.abs().powf(rho) * v
    }
}

/// `Ψ₁ = (1/(ρ+1)) ∫|u_t|^ρ u_t u + ∫Δu Δu_t`.
pub fn psi1(state: &PlateState, params: &PhysicalParams, grams: &GramSet, basis: &Basis) -> f64 {
    let uq = basis.synthesize(&state.g);
    let vq = basis.synthesize(&state.v);
    let flux = DVector::from_fn(uq.len(), |q, _| inertia_flux(vq[q], params.rho) * uq[q]);
    basis.integrate(&flux) / (params.rho + 1.0) + state.g.dot(&(&grams.m2 * &state.v))
}

/// Coefficients of `∫₀ᵗ b(t-s)(u(t) - u(s)) ds` at the newest snapshot.
pub fn memory_difference(history: &HistoryBuffer, table: &KernelTable) -> Option<DVector<f64>> {
    if history.len() < 2 {
        return None;
    }
    let n = history.len() - 1;
    let g = history.last()?;
    Some(g * kernel_mass(table, n) - memory_coefficients(history, table))
}

/// `Ψ₂ = -∫(Δ²u_t + (1/(ρ+1))|u_t|^ρ u_t) ∫₀ᵗ b(t-s)(u(t) - u(s)) ds`,
/// with the bending part taken weakly as `v·M2 c`.
pub fn psi2(
    state: &PlateState,
    params: &PhysicalParams,
    grams: &GramSet,
    basis: &Basis,
    history: &HistoryBuffer,
    table: &KernelTable,
) -> f64 {
    if params.kernel.is_zero() {
        return 0.0;
    }
    let Some(c) = memory_difference(history, table) else {
        return 0.0;
    };
    let cq = basis.synthesize(&c);
    let vq = basis.synthesize(&state.v);
    let flux = DVector::from_fn(vq.len(), |q, _| inertia_flux(vq[q], params.rho) * cq[q]);
    -(state.v.dot(&(&grams.m2 * &c)) + basis.integrate(&flux) / (params.rho + 1.0))
}

/// Energy and the two auxiliary functionals at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FunctionalSample {
    pub t: f64,
    pub e: f64,
    pub psi1: f64,
    pub psi2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovSample {
    pub t: f64,
    pub psi1: f64,
    pub psi2: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: f64,
    pub eps: f64,
}

/// `L/E` bounds over samples with `E ≥` [`ENERGY_FLOOR`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovSeries {
    pub n: f64,
    pub eps: f64,
    pub samples: Vec<LyapunovSample>,
    pub counted: usize,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
}

impl LyapunovSeries {
    /// `0 < min(L/E) ≤ max(L/E) < ∞`.
    pub fn equivalent(&self) -> bool {
        matches!((self.min_ratio, self.max_ratio), (Some(lo), Some(hi)) if lo > 0.0 && hi.is_finite())
    }
}

/// `L = N E + ε Ψ₁ + Ψ₂` along `series`.
pub fn lyapunov_series(series: &[FunctionalSample], n: f64, eps: f64) -> LyapunovSeries {
    let samples: Vec<LyapunovSample> = series
        .iter()
        .map(|s| LyapunovSample {
            t: s.t,
            psi1: s.psi1,
            psi2: s.psi2,
            l: n * s.e + eps * s.psi1 + s.psi2,
            n,
            eps,
        })
        .collect();
    let ratios: Vec<f64> = series
        .iter()
        .zip(&samples)
        .filter(|(s, _)| s.e >= ENERGY_FLOOR)
        .map(|(s, l)| l.l / s.e)
        .collect();
    LyapunovSeries {
        n,
        eps,
        counted: ratios.len(),
        min_ratio: ratios.iter().copied().reduce(f64::min),
        max_ratio: ratios.iter().copied().reduce(f64::max),
        samples,
    }
}

/// Doubles `N` from 1 until `min(L/E) > 0`, giving up past
/// [`MAX_LYAPUNOV_N`]; the last series tried is returned.
pub fn lyapunov_search(series: &[FunctionalSample], eps: f64) -> LyapunovSeries {
    let mut n = 1.0;
    loop {
        let out = lyapunov_series(series, n, eps);
        if out.equivalent() || out.counted == 0 || n >= MAX_LYAPUNOV_N {
            return out;
        }
        n *= 2.0;
    }
}
