use std::f64::consts::PI;

use nalgebra::DVector;
use serde::Serialize;

use crate::diagnostics::energy::{energy, EnergySample};
use crate::dynamics::{HistoryBuffer, KernelTable, PhysicalParams, PlateState};
use crate::error::{Error, Result};
use crate::spectral::{Basis, GramSet};

/// Potential-well thresholds for a source strength `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WellConstants {
    pub k: f64,
    /// Residual stiffness `l = 1 - ∫₀^∞ b`.
    pub l: f64,
    pub cp: f64,
    pub a: f64,
    pub q0: f64,
    pub rho_bar: f64,
    pub d: f64,
    /// `2π l e³ / c_p`.
    pub k0: f64,
    /// Admissible `a` interval `(e^{-3/2}, √(2πl/(k c_p)))`.
    pub window: (f64, f64),
    /// Upper end `√(2π c_p l / k)` of the alternative reading of the window.
    pub window_upper_alt: f64,
    pub window_empty: bool,
    /// `d ≤ 0`: no initial data can satisfy `0 < E(0) < d`.
    pub d_nonpositive: bool,
    /// `|d - ρ̄²(k - Q₀)/2|`.
    pub identity_gap: f64,
}

/// `a` maximizing `d` for fixed `k`, where `Q₀ = 3k/4`.
pub fn well_optimal_a(k: f64) -> f64 {
    (-0.75 - 1.0 / k).exp()
}

/// Constants of the potential well. Without an explicit `a` the midpoint of
/// the admissible window is used, or `a = 1` when the window is empty.
pub fn well_constants(k: f64, l: f64, cp: f64, a: Option<f64>) -> Result<WellConstants> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::input(format!("k must be positive, got {k}")));
    }
    if !(l > 0.0 && l <= 1.0) {
        return Err(Error::input(format!("l must lie in (0, 1], got {l}")));
    }
    if !(cp > 0.0) || !cp.is_finite() {
        return Err(Error::input(format!("c_p must be positive, got {cp}")));
    }
    let k0 = 2.0 * PI * l * 1f64.exp().powi(3) / cp;
    if k >= k0 {
        return Err(Error::Hypothesis(format!("k = {k} is not below k0 = {k0}")));
    }
    let window = ((-1.5f64).exp(), (2.0 * PI * l / (k * cp)).sqrt());
    let window_empty = window.0 >= window.1;
    let a = match a {
        Some(a) if a > 0.0 && a.is_finite() => a,
        Some(a) => return Err(Error::input(format!("a must be positive, got {a}"))),
        None if window_empty => 1.0,
        None => 0.5 * (window.0 + window.1),
    };
    let q0 = 0.5 * (k + 2.0) + k * (1.0 + a.ln());
    let rho_bar = ((2.0 * q0 - k) / k).exp();
    let r2 = rho_bar * rho_bar;
    let d = 0.5 * q0 * r2 - 0.25 * k * r2 * r2.ln();
    Ok(WellConstants {
        k,
        l,
        cp,
        a,
        q0,
        rho_bar,
        d,
        k0,
        window,
        window_upper_alt: (2.0 * PI * cp * l / k).sqrt(),
        window_empty,
        d_nonpositive: d <= 0.0,
        identity_gap: (d - 0.5 * r2 * (k - q0)).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellReport {
    /// Preconditions `‖u₀‖ < ρ̄` and `0 < E(0) < d` hold.
    pub certified: bool,
    pub reason: Option<String>,
    pub e0: f64,
    pub norm0: f64,
    pub samples: usize,
    pub violations: usize,
    pub first_violation: Option<f64>,
    pub min_i: f64,
    pub max_norm: f64,
    /// `max ‖u_t‖_{ρ+2}^{ρ+2} / ((ρ+2) E(0))`.
    pub max_inertia_ratio: f64,
    /// `max ‖Δu_t‖² / (2E(0))`.
    pub max_bend_rate_ratio: f64,
    /// `max (b∘Δu) / (2E)`.
    pub max_memory_ratio: f64,
}

impl WellReport {
    /// Certified and free of violations.
    pub fn holds(&self) -> bool {
        self.certified && self.violations == 0
    }
}

/// Checks the well preconditions at the first sample and the bounds of the
/// bounded-solution regime along the rest.
pub fn check_well(samples: &[EnergySample], wc: &WellConstants, rho: f64) -> WellReport {
    let mut report = WellReport {
        certified: false,
        reason: None,
        e0: 0.0,
        norm0: 0.0,
        samples: samples.len(),
        violations: 0,
        first_violation: None,
        min_i: f64::INFINITY,
        max_norm: 0.0,
        max_inertia_ratio: 0.0,
        max_bend_rate_ratio: 0.0,
        max_memory_ratio: 0.0,
    };
    let Some(first) = samples.first() else {
        report.reason = Some("no samples".into());
        return report;
    };
    report.e0 = first.e;
    report.norm0 = first.mass.sqrt();
    if wc.d_nonpositive {
        report.reason = Some(format!("d = {} is not positive", wc.d));
    } else if !(report.norm0 < wc.rho_bar) {
        report.reason = Some(format!("‖u₀‖ = {} is not below ρ̄ = {}", report.norm0, wc.rho_bar));
    } else if !(first.e > 0.0 && first.e < wc.d) {
        report.reason = Some(format!("E(0) = {} is outside (0, d = {})", first.e, wc.d));
    } else {
        report.certified = true;
    }
    if !report.certified {
        return report;
    }
    let e0 = first.e;
    for s in samples {
        let norm = s.mass.sqrt();
        let inertia = s.inertia_norm(rho) / ((rho + 2.0) * e0);
        let bend_rate = s.bend_rate / (2.0 * e0);
        report.min_i = report.min_i.min(s.i);
        report.max_norm = report.max_norm.max(norm);
        report.max_inertia_ratio = report.max_inertia_ratio.max(inertia);
        report.max_bend_rate_ratio = report.max_bend_rate_ratio.max(bend_rate);
        if s.e > 0.0 {
            report.max_memory_ratio = report.max_memory_ratio.max(s.memory / (2.0 * s.e));
        }
        let bad = !(norm < wc.rho_bar) || !(s.i > 0.0) || inertia > 1.0 || bend_rate > 1.0;
        if bad {
            report.violations += 1;
            report.first_violation.get_or_insert(s.t);
        }
    }
    report
}

/// Energy of `(g, v)` at `t = 0`, where the memory vanishes.
pub fn initial_energy(
    g: &DVector<f64>,
    v: &DVector<f64>,
    params: &PhysicalParams,
    grams: &GramSet,
    basis: &Basis,
) -> EnergySample {
    let mut history = HistoryBuffer::new(1.0, &grams.m2_factor());
    history.push(g.clone());
    let table = KernelTable::new(&params.kernel, 1.0, 2);
    let state = PlateState {
        t: 0.0,
        g: g.clone(),
        v: v.clone(),
        a: DVector::zeros(g.len()),
        step_index: 0,
    };
    energy(&state, params, grams, basis, &history, &table)
}

/// Largest factor `2^{-j}`, `j ≤ 60`, for which `λ(g, v)` satisfies
/// `‖u₀‖ < ρ̄` and `0 < E(0) < d`.
pub fn scale_into_well(
    g: &DVector<f64>,
    v: &DVector<f64>,
    params: &PhysicalParams,
    grams: &GramSet,
    basis: &Basis,
    wc: &WellConstants,
) -> Option<f64> {
    if wc.d_nonpositive {
        return None;
    }
    let mut lambda = 1.0;
    for _ in 0..=60 {
        let s = initial_energy(&(g * lambda), &(v * lambda), params, grams, basis);
        if s.mass.sqrt() < wc.rho_bar && s.e > 0.0 && s.e < wc.d {
            return Some(lambda);
        }
        lambda *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_constants_at_lower_window_end() {
        let wc = well_constants(2.0, 1.0, 1.0, Some((-1.5f64).exp())).unwrap();
        assert!((wc.q0 - 1.0).abs() < 1e-14);
        assert!((wc.rho_bar - 1.0).abs() < 1e-14);
        assert!((wc.d - 0.5).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_d_is_flagged() {
        let wc = well_constants(1.0, 1.0, 1.0, Some(1.0)).unwrap();
        assert!((wc.q0 - 2.5).abs() < 1e-14);
        assert!((wc.rho_bar - 4f64.exp()).abs() < 1e-10);
        assert!((wc.d - 8f64.exp() * (0.5 - 1.25)).abs() < 1e-9);
        assert!(wc.d_nonpositive);
    }

    #[test]
    fn closed_form_identity_for_d() {
        for (k, a) in [(0.5, 0.3), (2.0, 0.2865), (3.0, 0.1), (1.0, 0.9)] {
            let wc = well_constants(k, 0.5, 2.0, Some(a)).unwrap();
            assert!(wc.identity_gap <= 1e-12 * wc.d.abs().max(1.0));
        }
    }

    #[test]
    fn optimal_a_maximizes_d() {
        let k = 2.0;
        let a = well_optimal_a(k);
        let best = well_constants(k, 1.0, 1.0, Some(a)).unwrap().d;
        for f in [0.9, 0.99, 1.01, 1.1] {
            assert!(well_constants(k, 1.0, 1.0, Some(a * f)).unwrap().d < best);
        }
        assert!((best - 0.5 * 1f64.exp() * 0.5).abs() < 1e-12);
    }

    #[test]
    fn source_above_threshold_is_a_hypothesis_error() {
        let k0 = 2.0 * PI * 1f64.exp().powi(3);
        assert!(matches!(
            well_constants(k0 * 1.01, 1.0, 1.0, None),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn window_closes_exactly_at_threshold() {
        // e^{-3/2} < √(2πl/(k c_p)) is the same condition as k < k0.
        let cp = 3.0;
        let k0 = 2.0 * PI * 1f64.exp().powi(3) / cp;
        let wc = well_constants(k0 * 0.999, 1.0, cp, None).unwrap();
        assert!(!wc.window_empty);
        assert!(wc.window.1 / wc.window.0 < 1.001);
    }

    fn sample(mass: f64, e: f64) -> EnergySample {
        EnergySample {
            mass,
            e,
            j: e,
            i: 2.0 * e - 0.5 * mass,
            ..Default::default()
        }
    }

    #[test]
    fn zero_data_is_not_certified() {
        let wc = well_constants(2.0, 1.0, 1.0, Some(well_optimal_a(2.0))).unwrap();
        let r = check_well(&[sample(0.0, 0.0)], &wc, 0.0);
        assert!(!r.certified);
    }

    #[test]
    fn norm_above_rho_bar_fails_precondition() {
        let wc = well_constants(2.0, 1.0, 1.0, Some(well_optimal_a(2.0))).unwrap();
        let m = (1.01 * wc.rho_bar).powi(2);
        let r = check_well(&[sample(m, 0.1)], &wc, 0.0);
        assert!(!r.certified);
        assert!(r.reason.unwrap().contains("ρ̄"));
    }
}
