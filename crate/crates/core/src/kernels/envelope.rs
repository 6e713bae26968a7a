use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::damping::DampingLaw;
use crate::kernels::modulus::{extend_modulus, ConvexModulus};
use crate::kernels::xi::XiWeight;
use crate::numeric::invert_increasing_positive;

/// Default `ε₀`.
pub const DEFAULT_EPS0: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeCase {
    /// `c (1 + ∫_{t0}^t ξ^{1+ε₀})^{-1/ε₀}`.
    LinearB,
    /// `c (t-t0)^{1/(1+ε₀)} K₁⁻¹(c₁ / ((t-t0)^{1/(1+ε₀)} ∫_{t1}^t ξ))`.
    NonlinearB,
    /// `c (t-t0)^{1/(1+ε)} W₂⁻¹(c / ((t-t0)^{1/(1+ε)} ∫_{t0}^t ξ))`.
    NonlinearBoth,
}

/// Upper-bound curve for the energy, known up to its leading constant.
#[derive(Debug, Clone)]
pub struct DecayEnvelope {
    case: EnvelopeCase,
    c: f64,
    c1: f64,
    eps0: f64,
    eps1: f64,
    t0: f64,
    t1: f64,
    xi: XiWeight,
    modulus: Option<ConvexModulus>,
    damping_modulus: Option<ConvexModulus>,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be positive, got {x}")))
    }
}

pub fn envelope_linear_b(xi: &XiWeight, eps0: f64, c: f64, t0: f64) -> Result<DecayEnvelope> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::domain(format!("ε₀ must lie in (0, 1), got {eps0}")));
    }
    positive("c", c)?;
    if !(t0 >= 0.0) {
        return Err(Error::input(format!("t0 must be ≥ 0, got {t0}")));
    }
    Ok(DecayEnvelope {
        case: EnvelopeCase::LinearB,
        c,
        c1: 1.0,
        eps0,
        eps1: 1.0,
        t0,
        t1: t0,
        xi: xi.clone(),
        modulus: None,
        damping_modulus: None,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn envelope_nonlinear_b(
    xi: &XiWeight,
    eps0: f64,
    eps1: f64,
    c: f64,
    c1: f64,
    t0: f64,
    t1: f64,
    modulus: &ConvexModulus,
) -> Result<DecayEnvelope> {
    if modulus.is_linear() {
        return Err(Error::input("nonlinear-B envelope needs a nonlinear modulus"));
    }
    positive("ε₀", eps0)?;
    positive("ε₁", eps1)?;
    positive("c", c)?;
    positive("c₁", c1)?;
    if !(t1 > t0) {
        return Err(Error::input(format!("need t1 > t0, got t0 = {t0}, t1 = {t1}")));
    }
    Ok(DecayEnvelope {
        case: EnvelopeCase::NonlinearB,
        c,
        c1,
        eps0,
        eps1,
        t0,
        t1,
        xi: xi.clone(),
        modulus: Some(extend_modulus(modulus)?),
        damping_modulus: None,
    })
}

pub fn envelope_nonlinear_both(
    xi: &XiWeight,
    eps: f64,
    eps1: f64,
    c: f64,
    t0: f64,
    modulus: &ConvexModulus,
    damping: &DampingLaw,
) -> Result<DecayEnvelope> {
    if modulus.is_linear() {
        return Err(Error::input("nonlinear-both envelope needs a nonlinear modulus B"));
    }
    let h = damping
        .convexifier()
        .ok_or_else(|| Error::input("nonlinear-both envelope needs a damping law with nonlinear origin profile"))?;
    positive("ε", eps)?;
    positive("ε₁", eps1)?;
    positive("c", c)?;
    Ok(DecayEnvelope {
        case: EnvelopeCase::NonlinearBoth,
        c,
        c1: c,
        eps0: eps,
        eps1,
        t0,
        t1: t0,
        xi: xi.clone(),
        modulus: Some(extend_modulus(modulus)?),
        damping_modulus: Some(extend_modulus(&h)?),
    })
}

impl DecayEnvelope {
    pub fn case(&self) -> EnvelopeCase {
        self.case
    }

    pub fn scale(&self) -> f64 {
        self.c
    }

    pub fn inner_constant(&self) -> f64 {
        self.c1
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    /// Left end of the domain on which [`eval`](Self::eval) is defined.
    /// Inclusive for the linear case, exclusive otherwise.
    pub fn valid_from(&self) -> f64 {
        match self.case {
            EnvelopeCase::LinearB => self.t0,
            EnvelopeCase::NonlinearB => self.t1,
            EnvelopeCase::NonlinearBoth => self.t0,
        }
    }

    /// Same curve with a different leading constant.
    pub fn with_scale(&self, c: f64) -> Self {
        Self { c, ..self.clone() }
    }

    /// Envelope value divided by the leading constant.
    pub fn shape(&self, t: f64) -> Result<f64> {
        let ex = self.eps0;
        match self.case {
            EnvelopeCase::LinearB => {
                if t < self.t0 {
                    return Err(self.before_domain(t));
                }
                let inner = 1.0 + self.xi.power_integral(self.t0, t, 1.0 + ex);
                Ok(inner.powf(-1.0 / ex))
            }
            EnvelopeCase::NonlinearB => {
                if t <= self.t1 {
                    return Err(self.before_domain(t));
                }
                let b = self.modulus.as_ref().unwrap();
                let tau = (t - self.t0).powf(1.0 / (1.0 + ex));
                let y = self.c1 / (tau * self.xi.integral(self.t1, t));
                Ok(tau * k1_inverse(b, ex, self.eps1, y)?)
            }
            EnvelopeCase::NonlinearBoth => {
                if t <= self.t0 {
                    return Err(self.before_domain(t));
                }
                let b = self.modulus.as_ref().unwrap();
                let h = self.damping_modulus.as_ref().unwrap();
                let tau = (t - self.t0).powf(1.0 / (1.0 + ex));
                let y = self.c1 / (tau * self.xi.integral(self.t0, t));
                Ok(tau * w2_inverse(b, h, ex, self.eps1, y)?)
            }
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.c * self.shape(t)?)
    }

    pub fn sample(&self, times: &[f64]) -> Result<Vec<f64>> {
        times.iter().map(|&t| self.eval(t)).collect()
    }

    fn before_domain(&self, t: f64) -> Error {
        Error::domain(format!(
            "envelope evaluated at t = {t}, before its domain starts at {}",
            self.valid_from()
        ))
    }
}

/// `K(x) = B̄(x^{1+ε})`, the inverse of `y ↦ B̄⁻¹(y)^{1/(1+ε)}`.
pub fn k_fn(b: &ConvexModulus, eps: f64, x: f64) -> f64 {
    b.value(x.powf(1.0 + eps))
}

pub fn k_prime(b: &ConvexModulus, eps: f64, x: f64) -> f64 {
    b.derivative(x.powf(1.0 + eps)) * (1.0 + eps) * x.powf(eps)
}

/// `K₁(x) = x K'(ε₁ x)`.
pub fn k1_fn(b: &ConvexModulus, eps: f64, eps1: f64, x: f64) -> f64 {
    x * k_prime(b, eps, eps1 * x)
}

pub fn k1_inverse(b: &ConvexModulus, eps: f64, eps1: f64, y: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    invert_increasing_positive(|x| k1_fn(b, eps, eps1, x), y, 1.0)
}

fn root_inverse(m: &ConvexModulus, eps: f64, y: f64) -> f64 {
    m.inverse(y).map(|s| s.powf(1.0 / (1.0 + eps))).unwrap_or(f64::NAN)
}

fn root_inverse_slope(m: &ConvexModulus, eps: f64, y: f64) -> f64 {
    let s = m.inverse(y).unwrap_or(f64::NAN);
    s.powf(1.0 / (1.0 + eps) - 1.0) / ((1.0 + eps) * m.derivative(s))
}

/// `W = (B̄⁻¹^{1/(1+ε)} + H̄⁻¹^{1/(1+ε)})⁻¹`.
pub fn w_fn(b: &ConvexModulus, h: &ConvexModulus, eps: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let w = invert_increasing_positive(|y| root_inverse(b, eps, y) + root_inverse(h, eps, y), x, 1.0)?;
    if !w.is_finite() {
        return Err(Error::domain(format!("W could not be evaluated at {x}")));
    }
    Ok(w)
}

/// `W'(x) = 1 / f'(W(x))` with `f` the sum of root-composed inverses.
pub fn w_prime(b: &ConvexModulus, h: &ConvexModulus, eps: f64, x: f64) -> Result<f64> {
    let y = w_fn(b, h, eps, x)?;
    Ok(1.0 / (root_inverse_slope(b, eps, y) + root_inverse_slope(h, eps, y)))
}

/// `W₂(x) = x W'(ε₁ x)`.
pub fn w2_fn(b: &ConvexModulus, h: &ConvexModulus, eps: f64, eps1: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(x * w_prime(b, h, eps, eps1 * x)?)
}

pub fn w2_inverse(b: &ConvexModulus, h: &ConvexModulus, eps: f64, eps1: f64, y: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    invert_increasing_positive(|x| w2_fn(b, h, eps, eps1, x).unwrap_or(f64::NAN), y, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexModulus {
        extend_modulus(&ConvexModulus::power(1.0, 2.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn linear_b_constant_and_rational_xi() {
        let e = envelope_linear_b(&XiWeight::constant(1.0).unwrap(), 0.5, 1.0, 0.0).unwrap();
        assert!((e.eval(3.0).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(e.eval(0.0).unwrap(), 1.0);
        let e = envelope_linear_b(&XiWeight::rational(1.0, 1.0).unwrap(), 0.5, 1.0, 0.0).unwrap();
        assert!((e.eval(3.0).unwrap() - 0.25).abs() < 1e-14);
        assert!(envelope_linear_b(&XiWeight::constant(1.0).unwrap(), 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn k1_square_closed_form() {
        let b = square();
        let eps1: f64 = 0.3;
        for x in [0.1f64, 0.5, 1.0, 2.0] {
            let closed = 4.0 * eps1.powi(3) * x.powi(4);
            assert!((k1_fn(&b, 1.0, eps1, x) - closed).abs() < 1e-12 * closed.max(1.0));
            let y = closed;
            let inv = (y / (4.0 * eps1.powi(3))).powf(0.25);
            assert!((k1_inverse(&b, 1.0, eps1, y).unwrap() - inv).abs() < 1e-10);
        }
    }

    #[test]
    fn w2_square_closed_form() {
        let b = square();
        let h = DampingLaw::cubic(1.0).unwrap().convexifier().unwrap();
        let h = extend_modulus(&h).unwrap();
        for x in [0.2, 1.0, 3.0] {
            assert!((w_fn(&b, &h, 1.0, x).unwrap() - (x / 2.0).powi(4)).abs() < 1e-10);
        }
        let eps1: f64 = 0.5;
        for y in [1e-3, 0.1, 2.0] {
            let closed = (4.0 * y / eps1.powi(3)).powf(0.25);
            assert!((w2_inverse(&b, &h, 1.0, eps1, y).unwrap() - closed).abs() < 1e-10);
        }
    }

    #[test]
    fn nonlinear_b_rejects_early_times() {
        let m = ConvexModulus::power(1.0, 1.5, 1.0).unwrap();
        let e = envelope_nonlinear_b(&XiWeight::constant(1.0).unwrap(), 0.5, 1.0, 1.0, 1.0, 0.0, 1.0, &m).unwrap();
        assert!(e.eval(1.0).is_err());
        assert!(e.eval(2.0).unwrap() > 0.0);
    }
}
