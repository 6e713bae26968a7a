//! Integrates a damped plate and prints the energy budget along the way.

use nalgebra::DVector;
use viscoplate::diagnostics::{energy, energy_rate_residual, max_abs_finite};
use viscoplate::dynamics::{simulate, NewtonOptions, PhysicalParams, DEFAULT_SIGMA};
use viscoplate::kernels::{parse_damping, parse_kernel};
use viscoplate::spectral::{assemble_grams, build_basis, default_quad_order};

fn main() -> viscoplate::Result<()> {
    let n = 8;
    let basis = build_basis(1, n, 1.0, default_quad_order(n))?;
    let grams = assemble_grams(&basis)?;
    let params = PhysicalParams::new(
        1.0,
        0.5,
        DEFAULT_SIGMA,
        parse_kernel("exp(0.5,1)")?,
        parse_damping("damp-cubic(0.5)")?,
    )?;

    let mut g0 = DVector::zeros(n);
    g0[0] = 0.1;
    g0[1] = 0.05;
    let v0 = DVector::zeros(n);
    let dt = 1e-3;

    let mut samples = Vec::new();
    let traj = simulate(
        &basis,
        &grams,
        &params,
        g0,
        v0,
        dt,
        3000,
        500,
        NewtonOptions::default(),
        |it| {
            samples.push(energy(
                it.state(),
                it.params(),
                it.grams(),
                it.basis(),
                it.history(),
                it.table(),
            ));
            Ok(())
        },
    )?;

    println!(
        "{:>6} {:>14} {:>14} {:>14} {:>14}",
        "t", "E", "kinetic", "bending", "memory"
    );
    for s in samples.iter().step_by(500) {
        println!(
            "{:>6.2} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
            s.t, s.e, s.kin_rho, s.bend, s.memory
        );
    }
    let rise = samples
        .windows(2)
        .map(|w| w[1].e - w[0].e)
        .fold(f64::NEG_INFINITY, f64::max);
    println!("largest one-step energy change: {rise:.3e}");
    println!(
        "largest energy-identity residual: {:.3e}",
        max_abs_finite(&energy_rate_residual(&samples, dt))
    );
    println!("kept {} states, {:?}", traj.states.len(), traj.stats);
    Ok(())
}
