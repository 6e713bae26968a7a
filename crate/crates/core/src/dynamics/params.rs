use crate::error::{Error, Result};
use crate::kernels::{DampingLaw, RelaxationKernel};

/// Default regularization of `|u_t|^ρ`.
pub const DEFAULT_SIGMA: f64 = 1e-8;

/// Coefficients of the plate equation.
#[derive(Debug, Clone)]
pub struct PhysicalParams {
    /// Inertia exponent `ρ ≥ 0`.
    pub rho: f64,
    /// Strength of the logarithmic source `k u ln|u|`.
    pub k: f64,
    /// `|s|^ρ` is evaluated as `(s² + σ²)^{ρ/2}`.
    pub sigma: f64,
    pub kernel: RelaxationKernel,
    pub damping: DampingLaw,
}

impl PhysicalParams {
    pub fn new(rho: f64, k: f64, sigma: f64, kernel: RelaxationKernel, damping: DampingLaw) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::input(format!("ρ must be ≥ 0, got {rho}")));
        }
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::input(format!("k must be ≥ 0, got {k}")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::input(format!("σ must be ≥ 0, got {sigma}")));
        }
        if sigma == 0.0 && rho > 0.0 && rho < 1.0 {
            return Err(Error::input("σ = 0 needs ρ = 0 or ρ ≥ 1 for a differentiable inertia"));
        }
        Ok(Self {
            rho,
            k,
            sigma,
            kernel,
            damping,
        })
    }

    /// `(s² + σ²)^{ρ/2}`.
    pub fn inertia_weight(&self, s: f64) -> f64 {
        if self.rho == 0.0 {
            return 1.0;
        }
        (s * s + self.sigma * self.sigma).powf(0.5 * self.rho)
    }

    /// `d/ds (s² + σ²)^{ρ/2}`.
    pub fn inertia_weight_slope(&self, s: f64) -> f64 {
        if self.rho == 0.0 {
            return 0.0;
        }
        let r2 = s * s + self.sigma * self.sigma;
        if r2 == 0.0 {
            return 0.0;
        }
        self.rho * s * r2.powf(0.5 * self.rho - 1.0)
    }

    /// Regularized kinetic density whose time derivative is
    /// `(v² + σ²)^{ρ/2} v v_t`; equals `|v|^{ρ+2}/(ρ+2)` when `σ = 0`.
    pub fn kinetic_density(&self, v: f64) -> f64 {
        let p = self.rho + 2.0;
        let s2 = self.sigma * self.sigma;
        if self.rho == 0.0 {
            return 0.5 * v * v;
        }
        ((v * v + s2).powf(0.5 * p) - s2.powf(0.5 * p)) / p
    }
}

/// `s ln|s|` with `0 ln 0 = 0`.
pub fn s_ln_abs(s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s * s.abs().ln()
    }
}

/// `ln|s|` clamped at the smallest positive normal number.
pub fn ln_abs_clamped(s: f64) -> f64 {
    s.abs().max(f64::MIN_POSITIVE).ln()
}
