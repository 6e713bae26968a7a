use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{DecayEnvelope, EnvelopeCase};
use crate::numeric::ls_slope;

/// Fewest positive-energy samples accepted in the fitting window.
pub const MIN_FIT_SAMPLES: usize = 50;

/// Overshoot tolerated for a valid bound.
pub const OVERSHOOT_TOLERANCE: f64 = 1e-6;

/// Envelope constant fitted to an energy series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub case: EnvelopeCase,
    pub window: (f64, f64),
    pub samples: usize,
    /// `sup E / shape`, the smallest constant making the envelope a bound.
    pub c_max: f64,
    /// Least-squares constant.
    pub c_ls: f64,
    /// `max (E - c_max shape) / (c_max shape)`, clipped at 0.
    pub overshoot: f64,
    /// Same for `c_ls`.
    pub ls_overshoot: f64,
    /// Same for the constant matching `E` at the window start.
    pub start_overshoot: f64,
    /// `-d ln E / dt` by log-linear regression, for the linear-B case.
    pub exponent: Option<f64>,
}

impl FitReport {
    pub fn bound_holds(&self) -> bool {
        self.overshoot <= OVERSHOOT_TOLERANCE
    }
}

fn overshoot(energy: &[f64], shape: &[f64], c: f64) -> f64 {
    energy
        .iter()
        .zip(shape)
        .map(|(e, s)| (e - c * s) / (c * s))
        .fold(0.0, f64::max)
}

/// Fits the leading constant of `envelope` to `(times, energy)` on
/// `window`, both ends inclusive. Returns `None` when every energy in the
/// window is zero.
pub fn fit_decay(
    times: &[f64],
    energy: &[f64],
    envelope: &DecayEnvelope,
    window: (f64, f64),
) -> Result<Option<FitReport>> {
    if times.len() != energy.len() {
        return Err(Error::input("times and energies differ in length"));
    }
    let picked: Vec<(f64, f64)> = times
        .iter()
        .zip(energy)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1 && **t > envelope.valid_from())
        .map(|(t, e)| (*t, *e))
        .collect();
    if !picked.is_empty() && picked.iter().all(|(_, e)| *e == 0.0) {
        return Ok(None);
    }
    let positive: Vec<(f64, f64)> = picked.into_iter().filter(|(_, e)| *e > 0.0).collect();
    if positive.len() < MIN_FIT_SAMPLES {
        return Err(Error::input(format!(
            "fit needs at least {MIN_FIT_SAMPLES} positive samples in [{}, {}], got {}",
            window.0,
            window.1,
            positive.len()
        )));
    }
    let t: Vec<f64> = positive.iter().map(|p| p.0).collect();
    let e: Vec<f64> = positive.iter().map(|p| p.1).collect();
    let shape = t.iter().map(|&ti| envelope.shape(ti)).collect::<Result<Vec<f64>>>()?;
    let c_max = e.iter().zip(&shape).map(|(e, s)| e / s).fold(0.0, f64::max);
    let c_ls = e.iter().zip(&shape).map(|(e, s)| e * s).sum::<f64>() / shape.iter().map(|s| s * s).sum::<f64>();
    let c_start = e[0] / shape[0];
    let exponent = (envelope.case() == EnvelopeCase::LinearB).then(|| {
        let log_e: Vec<f64> = e.iter().map(|x| x.ln()).collect();
        -ls_slope(&t, &log_e)
    });
    Ok(Some(FitReport {
        case: envelope.case(),
        window,
        samples: t.len(),
        c_max,
        c_ls,
        overshoot: overshoot(&e, &shape, c_max),
        ls_overshoot: overshoot(&e, &shape, c_ls),
        start_overshoot: overshoot(&e, &shape, c_start),
        exponent,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{envelope_linear_b, XiWeight};

    fn grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn synthetic_exponential_recovers_its_rate() {
        // small ε₀ turns the envelope into e^{-ξ^{1+ε₀} t/ε₀}
        let xi = XiWeight::constant(0.002).unwrap();
        let env = envelope_linear_b(&xi, 1e-3, 1.0, 0.0).unwrap();
        let t = grid(0.0, 5.0, 501);
        let e: Vec<f64> = t.iter().map(|t| 5.0 * (-2.0 * t).exp()).collect();
        let fit = fit_decay(&t, &e, &env, (2.5, 5.0)).unwrap().unwrap();
        let rate = fit.exponent.unwrap();
        assert!((rate - 2.0).abs() < 0.02, "rate {rate}");
        assert!(fit.bound_holds());
    }

    #[test]
    fn algebraic_decay_under_its_envelope() {
        // ε₀ = ½, ξ ≡ 1 gives (1 + t)^{-2}.
        let xi = XiWeight::constant(1.0).unwrap();
        let env = envelope_linear_b(&xi, 0.5, 1.0, 0.0).unwrap();
        let t = grid(0.0, 10.0, 201);
        let e: Vec<f64> = t.iter().map(|t| (1.0 + t).powi(-2)).collect();
        let fit = fit_decay(&t, &e, &env, (5.0, 10.0)).unwrap().unwrap();
        assert!(fit.overshoot <= 1e-6);
        assert!((fit.c_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn max_ratio_is_sup_of_ratio() {
        let xi = XiWeight::constant(1.0).unwrap();
        let env = envelope_linear_b(&xi, 0.5, 1.0, 0.0).unwrap();
        let t = grid(1.0, 4.0, 100);
        let e: Vec<f64> = t.iter().map(|t| (-t).exp() * (1.0 + 0.1 * (5.0 * t).sin())).collect();
        let fit = fit_decay(&t, &e, &env, (1.0, 4.0)).unwrap().unwrap();
        let sup = t
            .iter()
            .zip(&e)
            .map(|(t, e)| e / env.shape(*t).unwrap())
            .fold(0.0, f64::max);
        assert!((fit.c_max - sup).abs() <= 1e-12 * sup);
        assert_eq!(fit.overshoot, 0.0);
    }

    #[test]
    fn zero_energy_skips_and_short_series_errors() {
        let xi = XiWeight::constant(1.0).unwrap();
        let env = envelope_linear_b(&xi, 0.5, 1.0, 0.0).unwrap();
        let t = grid(0.0, 1.0, 100);
        assert!(fit_decay(&t, &[0.0; 100], &env, (0.5, 1.0)).unwrap().is_none());
        let short = grid(0.0, 1.0, 10);
        assert!(fit_decay(&short, &[1.0; 10], &env, (0.0, 1.0)).is_err());
    }
}
