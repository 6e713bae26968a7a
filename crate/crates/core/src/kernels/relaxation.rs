use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;

/// Scalar function of one real variable shared between workers.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form or sampled shape of a relaxation kernel.
#[derive(Clone)]
pub enum KernelFamily {
    /// `b ≡ 0`: purely elastic plate.
    Zero,
    /// `b(t) = b0 e^{-a t}`.
    Exponential { b0: f64, rate: f64 },
    /// `b(t) = b0 (1 + t)^{-q}`, `q > 1`.
    Power { b0: f64, exponent: f64 },
    /// Piecewise-linear interpolation of samples, zero past `horizon`.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
        horizon: f64,
    },
    /// User supplied `b` and `b'`; integrated numerically up to `horizon`.
    Custom {
        name: String,
        value: ScalarFn,
        derivative: ScalarFn,
        horizon: f64,
    },
}

impl fmt::Debug for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFamily::Zero => write!(f, "Zero"),
            KernelFamily::Exponential { b0, rate } => write!(f, "Exponential({b0}, {rate})"),
            KernelFamily::Power { b0, exponent } => write!(f, "Power({b0}, {exponent})"),
            KernelFamily::Tabulated { times, horizon, .. } => {
                write!(f, "Tabulated({} samples, horizon {horizon})", times.len())
            }
            KernelFamily::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Memory kernel `b` of the viscoelastic term.
///
/// The residual stiffness `l = 1 - ∫₀^∞ b` is computed at construction.
/// It is not required to be positive here; [`validate_h1`] reports it.
///
/// [`validate_h1`]: crate::kernels::validate_h1
#[derive(Debug, Clone)]
pub struct RelaxationKernel {
    family: KernelFamily,
    total: f64,
}

impl RelaxationKernel {
    pub fn zero() -> Self {
        Self {
            family: KernelFamily::Zero,
            total: 0.0,
        }
    }

    pub fn exponential(b0: f64, rate: f64) -> Result<Self> {
        if !(b0 > 0.0 && rate > 0.0) || !b0.is_finite() || !rate.is_finite() {
            return Err(Error::input(format!(
                "exponential kernel needs b0 > 0 and a > 0, got ({b0}, {rate})"
            )));
        }
        Ok(Self {
            family: KernelFamily::Exponential { b0, rate },
            total: b0 / rate,
        })
    }

    pub fn power(b0: f64, exponent: f64) -> Result<Self> {
        if !(b0 > 0.0) || !b0.is_finite() {
            return Err(Error::input(format!("power kernel needs b0 > 0, got {b0}")));
        }
        if !(exponent > 1.0) || !exponent.is_finite() {
            return Err(Error::input(format!(
                "power kernel needs q > 1 for integrability, got {exponent}"
            )));
        }
        Ok(Self {
            family: KernelFamily::Power { b0, exponent },
            total: b0 / (exponent - 1.0),
        })
    }

    /// Tabulated kernel. `times` must start at 0 and increase strictly;
    /// `b` is zero after the last sample.
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::input(
                "tabulated kernel needs at least two (t, b) samples of equal length",
            ));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input(
                "tabulated kernel times must start at 0 and increase strictly",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("tabulated kernel values must be finite"));
        }
        let total = times
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
            .sum();
        let horizon = *times.last().unwrap();
        Ok(Self {
            family: KernelFamily::Tabulated { times, values, horizon },
            total,
        })
    }

    pub fn custom(name: impl Into<String>, value: ScalarFn, derivative: ScalarFn, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::input("custom kernel needs a finite positive horizon"));
        }
        let total = adaptive_simpson(&|t: f64| value(t), 0.0, horizon, 1e-13);
        Ok(Self {
            family: KernelFamily::Custom {
                name: name.into(),
                value,
                derivative,
                horizon,
            },
            total,
        })
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, KernelFamily::Zero)
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.family {
            KernelFamily::Zero => 0.0,
            KernelFamily::Exponential { b0, rate } => b0 * (-rate * t).exp(),
            KernelFamily::Power { b0, exponent } => b0 * (1.0 + t).powf(-exponent),
            KernelFamily::Tabulated { times, values, horizon } => {
                if t > *horizon || t < 0.0 {
                    return 0.0;
                }
                let j = segment(times, t);
                let s = (t - times[j]) / (times[j + 1] - times[j]);
                values[j] + s * (values[j + 1] - values[j])
            }
            KernelFamily::Custom { value, horizon, .. } => {
                if t > *horizon {
                    0.0
                } else {
                    value(t)
                }
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match &self.family {
            KernelFamily::Zero => 0.0,
            KernelFamily::Exponential { b0, rate } => -rate * b0 * (-rate * t).exp(),
            KernelFamily::Power { b0, exponent } => -exponent * b0 * (1.0 + t).powf(-exponent - 1.0),
            KernelFamily::Tabulated { times, values, horizon } => {
                if t >= *horizon || t < 0.0 {
                    return 0.0;
                }
                let j = segment(times, t);
                (values[j + 1] - values[j]) / (times[j + 1] - times[j])
            }
            KernelFamily::Custom {
                derivative, horizon, ..
            } => {
                if t > *horizon {
                    0.0
                } else {
                    derivative(t)
                }
            }
        }
    }

    /// `∫₀^t b(τ) dτ`.
    pub fn integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.family {
            KernelFamily::Zero => 0.0,
            KernelFamily::Exponential { b0, rate } => b0 / rate * (1.0 - (-rate * t).exp()),
            KernelFamily::Power { b0, exponent } => b0 / (exponent - 1.0) * (1.0 - (1.0 + t).powf(1.0 - exponent)),
            KernelFamily::Tabulated { times, values, horizon } => {
                let end = t.min(*horizon);
                let mut acc = 0.0;
                for j in 0..times.len() - 1 {
                    if times[j] >= end {
                        break;
                    }
                    let hi = times[j + 1].min(end);
                    let vhi = self.value(hi);
                    acc += 0.5 * (hi - times[j]) * (values[j] + vhi);
                }
                acc
            }
            KernelFamily::Custom { value, horizon, .. } => {
                adaptive_simpson(&|s: f64| value(s), 0.0, t.min(*horizon), 1e-13)
            }
        }
    }

    /// `∫₀^∞ b`.
    pub fn total_integral(&self) -> f64 {
        self.total
    }

    /// Residual stiffness `l = 1 - ∫₀^∞ b`.
    pub fn residual_stiffness(&self) -> f64 {
        1.0 - self.total
    }

    pub fn initial(&self) -> f64 {
        self.value(0.0)
    }

    /// `b(0) - lim_{t→∞} b(t) = ∫₀^∞ (-b')`.
    pub fn total_decay(&self) -> f64 {
        self.initial()
    }

    pub fn describe(&self) -> String {
        match &self.family {
            KernelFamily::Zero => "none".into(),
            KernelFamily::Exponential { b0, rate } => format!("exp({b0},{rate})"),
            KernelFamily::Power { b0, exponent } => format!("power({b0},{exponent})"),
            KernelFamily::Tabulated { times, .. } => format!("table({} samples)", times.len()),
            KernelFamily::Custom { name, .. } => format!("custom({name})"),
        }
    }
}

fn segment(times: &[f64], t: f64) -> usize {
    match times.binary_search_by(|probe| probe.partial_cmp(&t).unwrap()) {
        Ok(i) => i.min(times.len() - 2),
        Err(i) => i.saturating_sub(1).min(times.len() - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_residual_stiffness() {
        let b = RelaxationKernel::exponential(0.5, 1.0).unwrap();
        assert!((b.residual_stiffness() - 0.5).abs() < 1e-15);
        assert!((b.integral(2.0) - 0.5 * (1.0 - (-2.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn power_kernel_requires_integrability() {
        assert!(RelaxationKernel::power(0.5, 1.0).is_err());
        let b = RelaxationKernel::power(0.5, 2.0).unwrap();
        assert!((b.total_integral() - 0.5).abs() < 1e-15);
        // ∫₀³ 0.5 (1+t)^{-2} = 0.5 (1 - 1/4)
        assert!((b.integral(3.0) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn tabulated_interpolates_and_vanishes_past_horizon() {
        let b = RelaxationKernel::tabulated(vec![0.0, 1.0, 2.0], vec![0.4, 0.2, 0.0]).unwrap();
        assert!((b.value(0.5) - 0.3).abs() < 1e-15);
        assert_eq!(b.value(3.0), 0.0);
        assert!((b.total_integral() - 0.4).abs() < 1e-15);
        assert!((b.integral(0.5) - 0.5 * 0.5 * (0.4 + 0.3)).abs() < 1e-15);
        assert!((b.derivative(1.5) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn custom_kernel_integrates_numerically() {
        let b = RelaxationKernel::custom(
            "exp",
            Arc::new(|t: f64| 0.5 * (-t).exp()),
            Arc::new(|t: f64| -0.5 * (-t).exp()),
            60.0,
        )
        .unwrap();
        assert!((b.residual_stiffness() - 0.5).abs() < 1e-10);
    }
}
