use std::f64::consts::PI;

use crate::numeric::bisect;

/// First `count` positive roots of `cos β cosh β = 1`.
///
/// Each root is bracketed in `((j+¼)π, (j+¾)π)`; the equation is solved in
/// the equivalent form `cos β - 1/cosh β = 0`, which stays bounded.
pub fn beam_roots(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|j| {
            let lo = (j as f64 + 0.25) * PI;
            let hi = (j as f64 + 0.75) * PI;
            bisect(|b| b.cos() - 1.0 / b.cosh(), lo, hi).expect("beam root bracket always changes sign")
        })
        .collect()
}

/// Coefficients of the clamped–clamped beam mode with root `β`, arranged so
/// that no term grows like `e^β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamMode {
    pub beta: f64,
    /// `(cosh β - cos β) / (sinh β - sin β)`.
    pub sigma: f64,
    grow: f64,
    decay: f64,
}

impl BeamMode {
    pub fn new(beta: f64) -> Self {
        let e = (-beta).exp();
        let d = 1.0 - e * e - 2.0 * e * beta.sin();
        let sigma = (1.0 + e * e - 2.0 * e * beta.cos()) / d;
        Self {
            beta,
            sigma,
            grow: (beta.cos() - beta.sin() - e) / d,
            decay: 0.5 * (1.0 + sigma),
        }
    }

    /// `k`-th derivative (`k ≤ 4`) with respect to `z = βx/L` of
    /// `cosh z - cos z - σ(sinh z - sin z)`, for `z ∈ [0, β]`.
    pub fn eval_z(&self, z: f64, k: usize) -> f64 {
        let (s, c) = z.sin_cos();
        let trig = match k % 4 {
            0 => -c + self.sigma * s,
            1 => s + self.sigma * c,
            2 => c - self.sigma * s,
            _ => -s - self.sigma * c,
        };
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        self.grow * (z - self.beta).exp() + sign * self.decay * (-z).exp() + trig
    }

    /// `k`-th derivative in `x` on `(0, L)`, unnormalized.
    pub fn eval(&self, x: f64, length: f64, k: usize) -> f64 {
        let scale = self.beta / length;
        self.eval_z(scale * x, k) * scale.powi(k as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_roots() {
        let r = beam_roots(2);
        assert!((r[0] - 4.730_040_744_862_704).abs() < 1e-10);
        assert!((r[1] - 7.853_204_624_095_838).abs() < 1e-10);
    }

    #[test]
    fn stable_form_matches_textbook_form_for_small_beta() {
        let m = BeamMode::new(beam_roots(1)[0]);
        let b = m.beta;
        let sigma = (b.cosh() - b.cos()) / (b.sinh() - b.sin());
        assert!((m.sigma - sigma).abs() < 1e-12);
        for z in [0.3f64, 1.7, 4.0] {
            let direct = z.cosh() - z.cos() - sigma * (z.sinh() - z.sin());
            assert!((m.eval_z(z, 0) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn clamped_ends_for_high_modes() {
        for &b in &beam_roots(40) {
            let m = BeamMode::new(b);
            for k in 0..2 {
                assert!(m.eval_z(0.0, k).abs() < 1e-9, "β = {b}, k = {k}");
                assert!(m.eval_z(b, k).abs() < 1e-9, "β = {b}, k = {k}");
            }
        }
    }
}
