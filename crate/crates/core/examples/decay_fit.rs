//! Fits decay envelopes to energy series: a synthetic exponential and a
//! simulated run with a power-law kernel.

use viscoplate::diagnostics::fit_decay;
use viscoplate::kernels::{auto_decay_law, envelope_linear_b, envelope_nonlinear_b, parse_kernel, XiWeight};
use viscoplate::scenario::{preset, run_scenario, RunOptions};

fn main() -> viscoplate::Result<()> {
    // with ε₀ small and ξ = 2/1000 the linear-B shape is close to e^{-2t}
    let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
    let energy: Vec<f64> = times.iter().map(|t| 5.0 * (-2.0 * t).exp()).collect();
    let env = envelope_linear_b(&XiWeight::constant(0.002)?, 1e-3, 1.0, 0.0)?;
    let fit = fit_decay(&times, &energy, &env, (0.0, 4.0))?.expect("nonzero energy");
    println!(
        "synthetic 5e^(-2t): exponent {:.4}, c = {:.4}",
        fit.exponent.unwrap_or(f64::NAN),
        fit.c_max
    );

    let scenario = preset("power-linear").expect("built-in preset");
    let outcome = run_scenario(&scenario, &RunOptions::default());
    let times: Vec<f64> = outcome.samples.iter().map(|s| s.t).collect();
    let energy: Vec<f64> = outcome.samples.iter().map(|s| s.e).collect();
    let kernel = parse_kernel(&scenario.physics.kernel)?;
    let (xi, b) = auto_decay_law(&kernel)?.expect("nonzero kernel");
    let t_end = scenario.time.t_end;
    let env = envelope_nonlinear_b(&xi, 0.5, 1.0, 1.0, 1.0, 0.0, scenario.t1(), &b)?;
    let fit = fit_decay(&times, &energy, &env, (t_end / 2.0, t_end))?.expect("nonzero energy");
    println!(
        "power kernel run: c = {:.4e} over {} samples, overshoot {:.1e}, least-squares c = {:.4e}",
        fit.c_max, fit.samples, fit.overshoot, fit.c_ls
    );
    Ok(())
}
