use std::fmt;

use crate::error::{Error, Result};
use crate::kernels::modulus::ConvexModulus;
use crate::kernels::relaxation::ScalarFn;

#[derive(Clone)]
pub enum DampingForm {
    None,
    /// `h(s) = c s`.
    Linear {
        c: f64,
    },
    /// `h(s) = |s|^{p-1} s` for `|s| ≤ ε`, continued with matching slope
    /// `p ε^{p-1}` beyond.
    OriginPower {
        exponent: f64,
        eps: f64,
    },
    Custom {
        name: String,
        value: ScalarFn,
        derivative: ScalarFn,
        origin: ScalarFn,
        origin_inverse: ScalarFn,
        convexifier: Option<ConvexModulus>,
    },
}

impl fmt::Debug for DampingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DampingForm::None => write!(f, "None"),
            DampingForm::Linear { c } => write!(f, "Linear({c})"),
            DampingForm::OriginPower { exponent, eps } => write!(f, "OriginPower({exponent}, {eps})"),
            DampingForm::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Frictional damping `h` together with its origin profile `h₁`, the growth
/// constants `c₁, c₂` past `ε` and the convexifier `H(s) = √s h₁(√s)`.
#[derive(Debug, Clone)]
pub struct DampingLaw {
    form: DampingForm,
    c1: f64,
    c2: f64,
    eps: f64,
    r2: f64,
}

impl DampingLaw {
    pub fn none() -> Self {
        Self {
            form: DampingForm::None,
            c1: 0.0,
            c2: 0.0,
            eps: 1.0,
            r2: 1.0,
        }
    }

    pub fn linear(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::input(format!("linear damping needs c > 0, got {c}")));
        }
        Ok(Self {
            form: DampingForm::Linear { c },
            c1: c,
            c2: c,
            eps: 1.0,
            r2: 1.0,
        })
    }

    pub fn origin_power(exponent: f64, eps: f64) -> Result<Self> {
        if !(exponent > 1.0) || !(eps > 0.0) || !exponent.is_finite() || !eps.is_finite() {
            return Err(Error::input(format!(
                "origin-power damping needs p > 1 and ε > 0, got ({exponent}, {eps})"
            )));
        }
        let base = eps.powf(exponent - 1.0);
        Ok(Self {
            form: DampingForm::OriginPower { exponent, eps },
            c1: base,
            c2: exponent * base,
            eps,
            r2: eps * eps,
        })
    }

    /// `h(s) = s³` near the origin.
    pub fn cubic(eps: f64) -> Result<Self> {
        Self::origin_power(3.0, eps)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        name: impl Into<String>,
        value: ScalarFn,
        derivative: ScalarFn,
        origin: ScalarFn,
        origin_inverse: ScalarFn,
        convexifier: Option<ConvexModulus>,
        c1: f64,
        c2: f64,
        eps: f64,
    ) -> Result<Self> {
        if !(c1 > 0.0 && c2 >= c1 && eps > 0.0) {
            return Err(Error::input("custom damping needs 0 < c1 ≤ c2 and ε > 0"));
        }
        let r2 = convexifier.as_ref().map(|h| h.r1()).unwrap_or(eps * eps);
        Ok(Self {
            form: DampingForm::Custom {
                name: name.into(),
                value,
                derivative,
                origin,
                origin_inverse,
                convexifier,
            },
            c1,
            c2,
            eps,
            r2,
        })
    }

    pub fn form(&self) -> &DampingForm {
        &self.form
    }

    pub fn is_none(&self) -> bool {
        matches!(self.form, DampingForm::None)
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    pub fn value(&self, s: f64) -> f64 {
        match &self.form {
            DampingForm::None => 0.0,
            DampingForm::Linear { c } => c * s,
            DampingForm::OriginPower { exponent, eps } => {
                let a = s.abs();
                let mag = if a <= *eps {
                    a.powf(*exponent)
                } else {
                    eps.powf(*exponent) + exponent * eps.powf(exponent - 1.0) * (a - eps)
                };
                mag.copysign(s)
            }
            DampingForm::Custom { value, .. } => value(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match &self.form {
            DampingForm::None => 0.0,
            DampingForm::Linear { c } => *c,
            DampingForm::OriginPower { exponent, eps } => {
                let a = s.abs().min(*eps);
                exponent * a.powf(exponent - 1.0)
            }
            DampingForm::Custom { derivative, .. } => derivative(s),
        }
    }

    /// Origin profile `h₁(s)` for `s ≥ 0`.
    pub fn origin_profile(&self, s: f64) -> f64 {
        match &self.form {
            DampingForm::None => 0.0,
            DampingForm::Linear { c } => c.min(1.0 / c) * s,
            DampingForm::OriginPower { exponent, .. } => s.powf(*exponent),
            DampingForm::Custom { origin, .. } => origin(s),
        }
    }

    /// `h₁⁻¹(s)` for `s ≥ 0`.
    pub fn origin_profile_inverse(&self, s: f64) -> f64 {
        match &self.form {
            DampingForm::None => 0.0,
            DampingForm::Linear { c } => s / c.min(1.0 / c),
            DampingForm::OriginPower { exponent, .. } => s.powf(1.0 / exponent),
            DampingForm::Custom { origin_inverse, .. } => origin_inverse(s),
        }
    }

    pub fn has_nonlinear_origin(&self) -> bool {
        match &self.form {
            DampingForm::OriginPower { .. } => true,
            DampingForm::Custom { convexifier, .. } => convexifier.is_some(),
            _ => false,
        }
    }

    /// `H(s) = √s h₁(√s)` on `(0, r2]` when `h₁` is nonlinear.
    pub fn convexifier(&self) -> Option<ConvexModulus> {
        match &self.form {
            DampingForm::OriginPower { exponent, eps } => {
                ConvexModulus::power(1.0, 0.5 * (exponent + 1.0), eps * eps).ok()
            }
            DampingForm::Custom { convexifier, .. } => convexifier.clone(),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.form {
            DampingForm::None => "none".into(),
            DampingForm::Linear { c } => format!("damp-linear({c})"),
            DampingForm::OriginPower { exponent, eps } if *exponent == 3.0 => format!("damp-cubic({eps})"),
            DampingForm::OriginPower { exponent, eps } => format!("damp-power({exponent},{eps})"),
            DampingForm::Custom { name, .. } => format!("custom({name})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_splice_is_continuous_with_matching_slope() {
        let h = DampingLaw::cubic(0.5).unwrap();
        let e = 0.5;
        let below = h.value(e - 1e-9);
        let above = h.value(e + 1e-9);
        assert!((below - above).abs() < 1e-8);
        assert!((h.derivative(e) - 3.0 * e * e).abs() < 1e-15);
        assert!((h.value(-2.0) + h.value(2.0)).abs() < 1e-15);
        assert!((h.c1() - 0.25).abs() < 1e-15 && (h.c2() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn cubic_convexifier_is_square() {
        let h = DampingLaw::cubic(0.5).unwrap();
        let cap_h = h.convexifier().unwrap();
        for s in [0.01f64, 0.1, 0.2] {
            let direct = s.sqrt() * h.origin_profile(s.sqrt());
            assert!((cap_h.value(s) - direct).abs() < 1e-15);
            assert!((cap_h.value(s) - s * s).abs() < 1e-15);
        }
    }
}
