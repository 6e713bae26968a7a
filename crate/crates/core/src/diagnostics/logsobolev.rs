use std::f64::consts::PI;

use nalgebra::DVector;

use crate::dynamics::s_ln_abs;
use crate::error::{Error, Result};
use crate::numeric::golden_max;
use crate::spectral::{Basis, GramSet};

/// `RHS - LHS` of the logarithmic Sobolev inequality
/// `∫u² ln|u| ≤ ½‖u‖² ln‖u‖² + (c_p a²/2π)‖Δu‖² - (1 + ln a)‖u‖²`
/// for `u = Σ g_j φ_j`.
pub fn log_sobolev_gap(g: &DVector<f64>, a: f64, cp: f64, basis: &Basis, grams: &GramSet) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::input(format!("a must be positive, got {a}")));
    }
    let mass = GramSet::quad(&grams.m0, g);
    let bend = GramSet::quad(&grams.m2, g);
    let uq = basis.synthesize(g);
    let lhs = basis.integrate(&uq.map(|u| u * s_ln_abs(u)));
    let mass_log = if mass > 0.0 { 0.5 * mass * mass.ln() } else { 0.0 };
    let rhs = mass_log + cp * a * a / (2.0 * PI) * bend - (1.0 + a.ln()) * mass;
    Ok(rhs - lhs)
}

/// `a` minimizing the gap for fixed `u`, by golden section on `ln a`.
pub fn log_sobolev_worst_a(g: &DVector<f64>, cp: f64, basis: &Basis, grams: &GramSet) -> (f64, f64) {
    // In a the gap is c a² - ln a up to constants, minimized at a² = 1/(2c).
    let (x, neg) = golden_max(
        |x: f64| -log_sobolev_gap(g, x.exp(), cp, basis, grams).unwrap_or(f64::INFINITY),
        -20.0,
        20.0,
        1e-10,
    );
    (x.exp(), -neg)
}

/// `d_{ε₀} = sup_{s>0} (s|ln s| - s²) / s^{1-ε₀}`, the constant making
/// `s|ln s| ≤ s² + d s^{1-ε₀}` hold for all `s > 0`.
pub fn s_log_constant(eps0: f64) -> Result<f64> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::domain(format!("ε₀ must lie in (0, 1), got {eps0}")));
    }
    // On (0, 1] in x = ln s: -x e^{ε₀x} - e^{(1+ε₀)x}.
    let f = |x: f64| -x * (eps0 * x).exp() - ((1.0 + eps0) * x).exp();
    let (lo, hi, cells) = (-800.0, 0.0, 8000);
    let step = (hi - lo) / cells as f64;
    let best = (0..=cells)
        .map(|i| lo + i as f64 * step)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap();
    let (_, inner) = golden_max(f, (best - step).max(lo), (best + step).min(hi), 1e-13);
    // On (1, ∞) the numerator s ln s - s² is negative.
    let outer = (1..=64)
        .map(|i| {
            let s = 1.0 + 0.25 * i as f64;
            (s * s.ln() - s * s) / s.powf(1.0 - eps0)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(inner.max(outer).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{assemble_grams, build_basis, default_quad_order, estimate_cp};

    fn setup(dim: usize, n: usize) -> (Basis, GramSet, f64) {
        let basis = build_basis(dim, n, 1.0, default_quad_order(n)).unwrap();
        let grams = assemble_grams(&basis).unwrap();
        let cp = estimate_cp(&grams);
        (basis, grams, cp)
    }

    #[test]
    fn zero_field_has_zero_gap() {
        let (basis, grams, cp) = setup(1, 4);
        assert_eq!(
            log_sobolev_gap(&DVector::zeros(4), 1.0, cp, &basis, &grams).unwrap(),
            0.0
        );
    }

    #[test]
    fn first_mode_positive_at_unit_a() {
        let (basis, grams, cp) = setup(1, 6);
        let mut g = DVector::zeros(6);
        g[0] = 1.0;
        assert!(log_sobolev_gap(&g, 1.0, cp, &basis, &grams).unwrap() > 0.0);
    }

    #[test]
    fn gap_is_homogeneous_of_degree_two() {
        let (basis, grams, cp) = setup(1, 5);
        let g = DVector::from_vec(vec![0.3, -0.1, 0.05, 0.02, -0.01]);
        let g1 = log_sobolev_gap(&g, 0.7, cp, &basis, &grams).unwrap();
        let g2 = log_sobolev_gap(&(&g * 3.0), 0.7, cp, &basis, &grams).unwrap();
        assert!((g2 - 9.0 * g1).abs() < 1e-10 * g2.abs().max(1.0));
    }

    #[test]
    fn interior_minimum_in_a_is_nonnegative_in_two_dims() {
        let (basis, grams, cp) = setup(2, 4);
        let mut g = DVector::zeros(16);
        g[0] = 1.0;
        g[5] = 0.3;
        let (a_star, worst) = log_sobolev_worst_a(&g, cp, &basis, &grams);
        // grid scan oracle
        let grid_min = (0..4000)
            .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 3999.0))
            .map(|a| log_sobolev_gap(&g, a, cp, &basis, &grams).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(a_star > 1e-3 && a_star < 1e3);
        assert!(worst <= grid_min + 1e-9);
        assert!(worst >= -1e-8, "worst gap {worst}");
    }

    #[test]
    fn one_dimensional_minimizer_breaks_the_planar_constant() {
        // The constant c_p a²/2π belongs to the planar inequality; on an
        // interval the first mode dips below zero at the worst a.
        let (basis, grams, cp) = setup(1, 8);
        let mut g = DVector::zeros(8);
        g[0] = 1.0;
        let (a_star, worst) = log_sobolev_worst_a(&g, cp, &basis, &grams);
        assert!((a_star - 0.5).abs() < 0.05, "a* = {a_star}");
        assert!(worst < -1e-3, "worst = {worst}");
    }

    fn grid_oracle(eps0: f64) -> f64 {
        (0..1_000_000)
            .map(|i| 10f64.powf(-8.0 + 9.0 * i as f64 / 999_999.0))
            .map(|s: f64| (s * s.ln().abs() - s * s) / s.powf(1.0 - eps0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn s_log_constant_matches_grid_oracle() {
        let d = s_log_constant(0.5).unwrap();
        assert!((d - grid_oracle(0.5)).abs() < 1e-6, "d = {d}");
        assert!((d - 0.696).abs() < 1e-2);
    }

    #[test]
    fn s_log_inequality_at_one() {
        for eps0 in [0.1, 0.5, 0.9] {
            let d = s_log_constant(eps0).unwrap();
            assert!(0.0 <= 1.0 + d);
        }
        assert!(s_log_constant(1.0).is_err());
        assert!(s_log_constant(0.0).is_err());
    }
}
