use std::fmt;

use crate::error::{Error, Result};
use crate::kernels::relaxation::ScalarFn;
use crate::numeric::{bisect, invert_increasing};

/// Convexity floor for the quadratic continuation past `r1`.
pub const EXTENSION_CURVATURE_FLOOR: f64 = 1e-8;

#[derive(Clone)]
pub enum ModulusForm {
    /// `B(s) = slope · s`.
    Linear { slope: f64 },
    /// `B(s) = coef · s^p`, `p > 1`.
    Power { coef: f64, exponent: f64 },
    /// User supplied `B`, `B'`, `B''`.
    Custom {
        name: String,
        value: ScalarFn,
        first: ScalarFn,
        second: ScalarFn,
    },
}

impl fmt::Debug for ModulusForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModulusForm::Linear { slope } => write!(f, "Linear({slope})"),
            ModulusForm::Power { coef, exponent } => write!(f, "Power({coef}, {exponent})"),
            ModulusForm::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// `C²` quadratic continuation `B(r1) + B'(r1)(s-r1) + ½κ(s-r1)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticTail {
    pub at: f64,
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// Convexity modulus `B` on `(0, r1]`, optionally extended to `(0, ∞)`.
///
/// Once extended, every evaluation past `r1` uses the quadratic tail, so
/// the same object serves as `B̄`.
#[derive(Debug, Clone)]
pub struct ConvexModulus {
    form: ModulusForm,
    r1: f64,
    tail: Option<QuadraticTail>,
}

impl ConvexModulus {
    pub fn linear(slope: f64) -> Result<Self> {
        if !(slope > 0.0) || !slope.is_finite() {
            return Err(Error::input(format!("linear modulus needs slope > 0, got {slope}")));
        }
        Ok(Self {
            form: ModulusForm::Linear { slope },
            r1: f64::INFINITY,
            tail: None,
        })
    }

    pub fn power(coef: f64, exponent: f64, r1: f64) -> Result<Self> {
        if !(coef > 0.0) || !(exponent > 1.0) || !(r1 > 0.0) {
            return Err(Error::input(format!(
                "power modulus needs coef > 0, p > 1, r1 > 0, got ({coef}, {exponent}, {r1})"
            )));
        }
        Ok(Self {
            form: ModulusForm::Power { coef, exponent },
            r1,
            tail: None,
        })
    }

    pub fn custom(
        name: impl Into<String>,
        value: ScalarFn,
        first: ScalarFn,
        second: ScalarFn,
        r1: f64,
    ) -> Result<Self> {
        if !(r1 > 0.0) {
            return Err(Error::input("custom modulus needs r1 > 0"));
        }
        Ok(Self {
            form: ModulusForm::Custom {
                name: name.into(),
                value,
                first,
                second,
            },
            r1,
            tail: None,
        })
    }

    pub fn form(&self) -> &ModulusForm {
        &self.form
    }

    /// Right end of the domain on which the modulus is given.
    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn tail(&self) -> Option<&QuadraticTail> {
        self.tail.as_ref()
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.form, ModulusForm::Linear { .. })
    }

    pub fn is_extended(&self) -> bool {
        self.is_linear() || self.tail.is_some()
    }

    fn base_value(&self, s: f64) -> f64 {
        match &self.form {
            ModulusForm::Linear { slope } => slope * s,
            ModulusForm::Power { coef, exponent } => coef * s.max(0.0).powf(*exponent),
            ModulusForm::Custom { value, .. } => value(s),
        }
    }

    fn base_first(&self, s: f64) -> f64 {
        match &self.form {
            ModulusForm::Linear { slope } => *slope,
            ModulusForm::Power { coef, exponent } => coef * exponent * s.max(0.0).powf(exponent - 1.0),
            ModulusForm::Custom { first, .. } => first(s),
        }
    }

    fn base_second(&self, s: f64) -> f64 {
        match &self.form {
            ModulusForm::Linear { .. } => 0.0,
            ModulusForm::Power { coef, exponent } => {
                coef * exponent * (exponent - 1.0) * s.max(0.0).powf(exponent - 2.0)
            }
            ModulusForm::Custom { second, .. } => second(s),
        }
    }

    /// `B(s)` on `(0, r1]`, `B̄(s)` beyond when extended.
    pub fn value(&self, s: f64) -> f64 {
        match &self.tail {
            Some(q) if s > q.at => {
                let d = s - q.at;
                q.value + q.slope * d + 0.5 * q.curvature * d * d
            }
            _ => self.base_value(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match &self.tail {
            Some(q) if s > q.at => q.slope + q.curvature * (s - q.at),
            _ => self.base_first(s),
        }
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        match &self.tail {
            Some(q) if s > q.at => q.curvature,
            _ => self.base_second(s),
        }
    }

    /// `B̄⁻¹(y)` for `y ≥ 0`. Closed form for the linear and power forms,
    /// bisection otherwise.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        if let Some(q) = &self.tail {
            if y > q.value {
                let excess = y - q.value;
                let disc = q.slope * q.slope + 2.0 * q.curvature * excess;
                return Ok(q.at + 2.0 * excess / (q.slope + disc.sqrt()));
            }
        }
        match &self.form {
            ModulusForm::Linear { slope } => Ok(y / slope),
            ModulusForm::Power { coef, exponent } => Ok((y / coef).powf(1.0 / exponent)),
            ModulusForm::Custom { .. } => {
                let hi = if self.r1.is_finite() { self.r1 } else { 1.0 };
                invert_increasing(|s| self.value(s), y, 0.0, hi)
            }
        }
    }

    /// `(B')⁻¹(τ)` on `(0, r1]` by bisection.
    pub fn derivative_inverse(&self, tau: f64) -> Result<f64> {
        if self.is_linear() {
            return Err(Error::domain("derivative of a linear modulus is not invertible"));
        }
        let r = self.r1;
        let top = self.base_first(r);
        if !(tau > 0.0 && tau < top) {
            return Err(Error::domain(format!("τ = {tau} outside (0, B'(r1)) = (0, {top})")));
        }
        bisect(|s| self.base_first(s) - tau, 0.0, r)
    }

    pub fn describe(&self) -> String {
        match &self.form {
            ModulusForm::Linear { slope } => format!("linear({slope})"),
            ModulusForm::Power { coef, exponent } => format!("power({coef},{exponent},{})", self.r1),
            ModulusForm::Custom { name, .. } => format!("custom({name})"),
        }
    }
}

/// Extends a strictly convex modulus past `r1` by the `C²` quadratic
/// continuation with curvature `max(B''(r1), κ)`. Linear moduli come back
/// unchanged.
pub fn extend_modulus(modulus: &ConvexModulus) -> Result<ConvexModulus> {
    if modulus.is_linear() {
        return Ok(modulus.clone());
    }
    let r1 = modulus.r1;
    let value = modulus.base_value(r1);
    let slope = modulus.base_first(r1);
    let second = modulus.base_second(r1);
    if !(value.is_finite() && slope.is_finite() && second.is_finite()) {
        return Err(Error::domain(format!(
            "modulus derivatives undefined at r1 = {r1}; cannot extend"
        )));
    }
    if !(slope > 0.0) {
        return Err(Error::domain("modulus must be strictly increasing at r1"));
    }
    Ok(ConvexModulus {
        form: modulus.form.clone(),
        r1,
        tail: Some(QuadraticTail {
            at: r1,
            value,
            slope,
            curvature: second.max(EXTENSION_CURVATURE_FLOOR),
        }),
    })
}

/// Young conjugate `K*(τ) = τ (K')⁻¹(τ) - K((K')⁻¹(τ))` for
/// `τ ∈ (0, K'(r1))`.
pub fn convex_conjugate(k: &ConvexModulus, tau: f64) -> Result<f64> {
    let s = k.derivative_inverse(tau)?;
    Ok(tau * s - k.base_value(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_its_own_continuation() {
        let b = extend_modulus(&ConvexModulus::power(1.0, 2.0, 1.0).unwrap()).unwrap();
        for s in [0.5, 1.0, 2.0, 7.5] {
            assert!((b.value(s) - s * s).abs() < 1e-12);
        }
    }

    #[test]
    fn three_halves_continuation_value() {
        // B(1) = 1, B'(1) = 1.5, B''(1) = 0.75
        let b = extend_modulus(&ConvexModulus::power(1.0, 1.5, 1.0).unwrap()).unwrap();
        assert!((b.value(2.0) - (1.0 + 1.5 + 0.5 * 0.75)).abs() < 1e-14);
    }

    #[test]
    fn linear_passthrough() {
        let b = extend_modulus(&ConvexModulus::linear(2.0).unwrap()).unwrap();
        assert_eq!(b.value(5.0), 10.0);
        assert!(b.tail().is_none());
    }

    #[test]
    fn inverse_round_trips_across_the_tail() {
        let b = extend_modulus(&ConvexModulus::power(1.0, 1.5, 1.0).unwrap()).unwrap();
        for s in [0.1, 0.9, 1.0, 1.7, 40.0] {
            let y = b.value(s);
            assert!((b.inverse(y).unwrap() - s).abs() < 1e-12 * s.max(1.0));
        }
    }

    #[test]
    fn conjugate_examples() {
        let half_square = ConvexModulus::power(0.5, 2.0, 10.0).unwrap();
        assert!((convex_conjugate(&half_square, 3.0).unwrap() - 4.5).abs() < 1e-11);
        let third_cube = ConvexModulus::power(1.0 / 3.0, 3.0, 10.0).unwrap();
        assert!((convex_conjugate(&third_cube, 4.0).unwrap() - 16.0 / 3.0).abs() < 1e-10);
        // Young: 0.3 * 0.5 <= K*(0.3) + K(0.5)
        let lhs = 0.3 * 0.5;
        let rhs = convex_conjugate(&half_square, 0.3).unwrap() + half_square.value(0.5);
        assert!((rhs - 0.17).abs() < 1e-11);
        assert!(lhs <= rhs);
    }

    #[test]
    fn conjugate_rejects_out_of_domain() {
        let k = ConvexModulus::power(0.5, 2.0, 1.0).unwrap();
        assert!(convex_conjugate(&k, 0.0).is_err());
        assert!(convex_conjugate(&k, 1.0).is_err());
        assert!(convex_conjugate(&ConvexModulus::linear(1.0).unwrap(), 0.5).is_err());
    }
}
