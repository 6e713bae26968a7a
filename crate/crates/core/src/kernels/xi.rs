use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;

/// Weight `ξ` in the kernel decay law `b' ≤ -ξ B(b)`.
#[derive(Debug, Clone, PartialEq)]
pub enum XiWeight {
    Constant {
        value: f64,
    },
    /// `scale / (1 + t)^θ` with `0 < θ ≤ 1`.
    Rational {
        scale: f64,
        theta: f64,
    },
    /// Linear interpolation, held constant after the last sample.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl XiWeight {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::input(format!("ξ must be positive, got {value}")));
        }
        Ok(XiWeight::Constant { value })
    }

    pub fn rational(scale: f64, theta: f64) -> Result<Self> {
        if !(scale > 0.0) || !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::input(format!(
                "rational ξ needs scale > 0 and 0 < θ ≤ 1, got ({scale}, {theta})"
            )));
        }
        Ok(XiWeight::Rational { scale, theta })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() || times[0] != 0.0 {
            return Err(Error::input("tabulated ξ needs ≥ 2 samples starting at t = 0"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("tabulated ξ times must increase strictly"));
        }
        if values.iter().any(|v| !(*v > 0.0)) || values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::input("tabulated ξ must be positive and nonincreasing"));
        }
        Ok(XiWeight::Tabulated { times, values })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            XiWeight::Constant { value } => *value,
            XiWeight::Rational { scale, theta } => scale * (1.0 + t).powf(-theta),
            XiWeight::Tabulated { times, values } => {
                if t <= 0.0 {
                    return values[0];
                }
                let last = times.len() - 1;
                if t >= times[last] {
                    return values[last];
                }
                let j = times.partition_point(|&s| s <= t) - 1;
                let s = (t - times[j]) / (times[j + 1] - times[j]);
                values[j] + s * (values[j + 1] - values[j])
            }
        }
    }

    /// `∫_{t0}^{t} ξ`.
    pub fn integral(&self, t0: f64, t: f64) -> f64 {
        self.power_integral(t0, t, 1.0)
    }

    /// `∫_{t0}^{t} ξ^e`, closed form except for tabulated weights.
    pub fn power_integral(&self, t0: f64, t: f64, e: f64) -> f64 {
        if t <= t0 {
            return 0.0;
        }
        match self {
            XiWeight::Constant { value } => value.powf(e) * (t - t0),
            XiWeight::Rational { scale, theta } => {
                let s = scale.powf(e);
                let k = theta * e;
                if (k - 1.0).abs() < 1e-14 {
                    s * ((1.0 + t) / (1.0 + t0)).ln()
                } else {
                    s * ((1.0 + t).powf(1.0 - k) - (1.0 + t0).powf(1.0 - k)) / (1.0 - k)
                }
            }
            XiWeight::Tabulated { .. } => adaptive_simpson(&|s: f64| self.value(s).powf(e), t0, t, 1e-12),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            XiWeight::Constant { value } => format!("const({value})"),
            XiWeight::Rational { scale, theta } => format!("rational({scale},{theta})"),
            XiWeight::Tabulated { times, .. } => format!("table({} samples)", times.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_power_integral_closed_form() {
        let xi = XiWeight::rational(1.0, 1.0).unwrap();
        // ∫₀³ (1+s)^{-3/2} = 2 (1 - 1/2)
        assert!((xi.power_integral(0.0, 3.0, 1.5) - 1.0).abs() < 1e-14);
        assert!((xi.integral(0.0, 3.0) - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn tabulated_matches_constant() {
        let xi = XiWeight::tabulated(vec![0.0, 1.0], vec![2.0, 2.0]).unwrap();
        assert!((xi.power_integral(0.0, 3.0, 1.5) - 2f64.powf(1.5) * 3.0).abs() < 1e-10);
    }
}
