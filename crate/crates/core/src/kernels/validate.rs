use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::damping::DampingLaw;
use crate::kernels::modulus::ConvexModulus;
use crate::kernels::relaxation::RelaxationKernel;
use crate::kernels::xi::XiWeight;

/// Relative tolerance of the pointwise decay-law check.
pub const H2_TOLERANCE: f64 = 1e-12;

/// Outcome of a hypothesis check on a sampling grid.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ValidationReport {
    pub hypothesis: String,
    pub passed: bool,
    pub violations: Vec<String>,
    /// Largest violation found (relative for the decay law, absolute
    /// otherwise); zero on pass.
    pub max_violation: f64,
    /// Residual stiffness `l`, for the kernel check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_stiffness: Option<f64>,
}

impl ValidationReport {
    fn new(hypothesis: &str) -> Self {
        Self {
            hypothesis: hypothesis.to_owned(),
            passed: true,
            violations: Vec::new(),
            max_violation: 0.0,
            residual_stiffness: None,
        }
    }

    fn fail(&mut self, msg: String, amount: f64) {
        self.passed = false;
        self.violations.push(msg);
        self.max_violation = self.max_violation.max(amount);
    }
}

fn check_time_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::input("empty grid"));
    }
    if grid[0] != 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("time grid must start at 0 and increase strictly"));
    }
    Ok(())
}

/// Uniform grid `0, h, …, horizon`.
pub fn uniform_grid(horizon: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect()
}

/// Checks `b(0) > 0`, `b` nonincreasing on the grid and `l > 0`.
pub fn validate_h1(kernel: &RelaxationKernel, grid: &[f64]) -> Result<ValidationReport> {
    check_time_grid(grid)?;
    let mut report = ValidationReport::new("H1");
    let l = kernel.residual_stiffness();
    report.residual_stiffness = Some(l);
    let b0 = kernel.initial();
    if !(b0 > 0.0) {
        report.fail(format!("b(0) = {b0} is not positive"), b0.abs());
    }
    let scale = b0.abs().max(f64::MIN_POSITIVE);
    let mut first_increase = None;
    let mut worst = 0.0f64;
    for w in grid.windows(2) {
        let rise = kernel.value(w[1]) - kernel.value(w[0]);
        if rise > 1e-12 * scale {
            first_increase.get_or_insert(w[0]);
            worst = worst.max(rise);
        }
    }
    if let Some(t) = first_increase {
        report.fail(format!("b increases after t = {t} (largest rise {worst:e})"), worst);
    }
    if !(l > 0.0) {
        report.fail(format!("l = 1 - ∫b = {l} is not positive"), -l);
    }
    Ok(report)
}

/// Checks `b'(t) ≤ -ξ(t) B(b(t))` on the grid to [`H2_TOLERANCE`] relative.
pub fn validate_h2(
    kernel: &RelaxationKernel,
    modulus: &ConvexModulus,
    xi: &XiWeight,
    grid: &[f64],
) -> Result<ValidationReport> {
    check_time_grid(grid)?;
    let b0 = kernel.initial();
    if b0 > modulus.r1() {
        return Err(Error::domain(format!(
            "range of b reaches {b0} but the modulus is only given on (0, {}]",
            modulus.r1()
        )));
    }
    if xi.value(0.0) <= 0.0 {
        return Err(Error::input("ξ(0) must be positive"));
    }
    let mut report = ValidationReport::new("H2");
    let mut first = None;
    for &t in grid {
        let b = kernel.value(t);
        let db = kernel.derivative(t);
        let bound = -xi.value(t) * modulus.value(b);
        let scale = db.abs().max(bound.abs()).max(f64::MIN_POSITIVE);
        let excess = (db - bound) / scale;
        if excess > H2_TOLERANCE {
            first.get_or_insert(t);
            report.max_violation = report.max_violation.max(excess);
        }
    }
    if let Some(t) = first {
        report.passed = false;
        report.violations.push(format!(
            "b' > -ξ B(b) from t = {t} (max relative excess {:e})",
            report.max_violation
        ));
    }
    Ok(report)
}

/// Checks monotonicity, the sign condition `s h(s) > 0`, the two-regime
/// sandwich bounds and strict convexity of `H` on `(0, r2]`.
pub fn validate_h3(damping: &DampingLaw, grid: &[f64]) -> Result<ValidationReport> {
    if grid.is_empty() {
        return Err(Error::input("empty grid"));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    for i in 0..n {
        if (sorted[i] + sorted[n - 1 - i]).abs() > 1e-12 * sorted[n - 1].abs().max(1.0) {
            return Err(Error::input("value grid must be symmetric about 0"));
        }
    }
    let mut report = ValidationReport::new("H3");
    let tol = 1e-12;

    let h0 = damping.value(0.0);
    if h0 != 0.0 {
        report.fail(format!("h(0) = {h0}"), h0.abs());
    }
    if let Some(w) = sorted
        .windows(2)
        .find(|w| damping.value(w[1]) < damping.value(w[0]) - tol * damping.value(w[0]).abs())
    {
        report.fail(format!("h decreases between {} and {}", w[0], w[1]), 0.0);
    }
    if let Some(&s) = sorted.iter().find(|&&s| s != 0.0 && !(s * damping.value(s) > 0.0)) {
        report.fail(
            format!("sign condition s·h(s) > 0 fails at s = {s}"),
            (s * damping.value(s)).abs(),
        );
    }

    let eps = damping.eps();
    for &s in &sorted {
        let a = s.abs();
        let h = damping.value(s).abs();
        if a <= eps {
            let lo = damping.origin_profile(a);
            let hi = damping.origin_profile_inverse(a);
            if h < lo * (1.0 - tol) || h > hi * (1.0 + tol) {
                report.fail(
                    format!("origin sandwich h₁(|s|) ≤ |h(s)| ≤ h₁⁻¹(|s|) fails at s = {s}"),
                    (lo - h).max(h - hi),
                );
                break;
            }
        }
        if a >= eps {
            let lo = damping.c1() * a;
            let hi = damping.c2() * a;
            if h < lo * (1.0 - tol) || h > hi * (1.0 + tol) {
                report.fail(
                    format!("linear-growth bounds c₁|s| ≤ |h(s)| ≤ c₂|s| fail at s = {s}"),
                    (lo - h).max(h - hi),
                );
                break;
            }
        }
    }

    if let Some(cap_h) = damping.convexifier() {
        let r2 = damping.r2();
        let m = 400;
        let step = r2 / m as f64;
        for i in 1..m {
            let s = i as f64 * step;
            let second = cap_h.value(s + step) - 2.0 * cap_h.value(s) + cap_h.value(s - step);
            if !(second > 0.0) {
                report.fail(format!("H is not strictly convex near s = {s}"), -second);
                break;
            }
        }
    }
    Ok(report)
}

/// Symmetric value grid `-max..=max` with `2 half + 1` points.
pub fn symmetric_grid(max: f64, half: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (1..=half).map(|i| max * i as f64 / half as f64).collect();
    let neg: Vec<f64> = g.iter().rev().map(|s| -s).collect();
    let mut out = neg;
    out.push(0.0);
    out.append(&mut g);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn grid() -> Vec<f64> {
        uniform_grid(20.0, 4001)
    }

    #[test]
    fn h1_exponential_passes() {
        let r = validate_h1(&RelaxationKernel::exponential(0.5, 1.0).unwrap(), &grid()).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.residual_stiffness.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn h1_heavy_kernel_fails_on_l() {
        let r = validate_h1(&RelaxationKernel::exponential(2.0, 1.0).unwrap(), &grid()).unwrap();
        assert!(!r.passed);
        assert!((r.residual_stiffness.unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn h1_detects_oscillating_kernel() {
        let k = RelaxationKernel::custom(
            "wiggle",
            Arc::new(|t: f64| (-t).exp() * (1.0 + 0.5 * (10.0 * t).sin())),
            Arc::new(|t: f64| (-t).exp() * (-(1.0 + 0.5 * (10.0 * t).sin()) + 5.0 * (10.0 * t).cos())),
            60.0,
        )
        .unwrap();
        let r = validate_h1(&k, &grid()).unwrap();
        assert!(!r.passed);
        assert!(r.violations.iter().any(|v| v.contains("increases")));
    }

    #[test]
    fn h1_rejects_empty_grid() {
        assert!(validate_h1(&RelaxationKernel::exponential(0.5, 1.0).unwrap(), &[]).is_err());
    }

    #[test]
    fn h2_exponential_with_equality() {
        let k = RelaxationKernel::exponential(0.5, 1.3).unwrap();
        let b = ConvexModulus::linear(1.0).unwrap();
        let r = validate_h2(&k, &b, &XiWeight::constant(1.3).unwrap(), &grid()).unwrap();
        assert!(r.passed, "{r:?}");
        let r = validate_h2(&k, &b, &XiWeight::constant(2.6).unwrap(), &grid()).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn h2_power_kernel_with_three_halves_modulus() {
        let b0 = 0.4;
        let k = RelaxationKernel::power(b0, 2.0).unwrap();
        let m = ConvexModulus::power(1.0, 1.5, b0).unwrap();
        let xi = XiWeight::constant(2.0 / b0.sqrt()).unwrap();
        let r = validate_h2(&k, &m, &xi, &grid()).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.max_violation <= H2_TOLERANCE);
    }

    #[test]
    fn h2_domain_error_when_range_exceeds_r1() {
        let k = RelaxationKernel::power(0.4, 2.0).unwrap();
        let m = ConvexModulus::power(1.0, 1.5, 0.1).unwrap();
        let err = validate_h2(&k, &m, &XiWeight::constant(1.0).unwrap(), &grid());
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn h3_examples() {
        let g = symmetric_grid(3.0, 600);
        assert!(validate_h3(&DampingLaw::linear(1.0).unwrap(), &g).unwrap().passed);
        let r = validate_h3(&DampingLaw::cubic(0.5).unwrap(), &g).unwrap();
        assert!(r.passed, "{r:?}");
        let anti = DampingLaw::custom(
            "anti",
            Arc::new(|s: f64| -s),
            Arc::new(|_| -1.0),
            Arc::new(|s: f64| s),
            Arc::new(|s: f64| s),
            None,
            1.0,
            1.0,
            1.0,
        )
        .unwrap();
        let r = validate_h3(&anti, &g).unwrap();
        assert!(!r.passed);
        assert!(r.violations.iter().any(|v| v.contains("sign condition")));
    }

    #[test]
    fn h3_needs_symmetric_grid() {
        assert!(validate_h3(&DampingLaw::linear(1.0).unwrap(), &[0.0, 1.0]).is_err());
    }
}
