//! Builds `L = N E + ε Ψ₁ + Ψ₂` along a run and finds the smallest dyadic
//! `N` that makes it equivalent to the energy.

use nalgebra::DVector;
use viscoplate::diagnostics::{energy, lyapunov_search, psi1, psi2, FunctionalSample, DEFAULT_LYAPUNOV_EPS};
use viscoplate::dynamics::{simulate, NewtonOptions, PhysicalParams, DEFAULT_SIGMA};
use viscoplate::kernels::{parse_damping, parse_kernel};
use viscoplate::spectral::{assemble_grams, build_basis, default_quad_order};

fn main() -> viscoplate::Result<()> {
    let basis = build_basis(1, 6, 1.0, default_quad_order(6))?;
    let grams = assemble_grams(&basis)?;
    let params = PhysicalParams::new(
        1.0,
        0.5,
        DEFAULT_SIGMA,
        parse_kernel("power(0.4,2)")?,
        parse_damping("damp-linear(1)")?,
    )?;
    let mut g0 = DVector::zeros(6);
    g0[0] = 0.1;
    let v0 = DVector::from_fn(6, |i, _| if i == 1 { 0.2 } else { 0.0 });

    let mut series = Vec::new();
    simulate(
        &basis,
        &grams,
        &params,
        g0,
        v0,
        2e-3,
        2500,
        1,
        NewtonOptions::default(),
        |it| {
            let st = it.state();
            if st.step_index % 25 == 0 {
                series.push(FunctionalSample {
                    t: st.t,
                    e: energy(st, it.params(), it.grams(), it.basis(), it.history(), it.table()).e,
                    psi1: psi1(st, it.params(), it.grams(), it.basis()),
                    psi2: psi2(st, it.params(), it.grams(), it.basis(), it.history(), it.table()),
                });
            }
            Ok(())
        },
    )?;

    let found = lyapunov_search(&series, DEFAULT_LYAPUNOV_EPS);
    println!(
        "N = {} with ε = {}: L/E between {:.4} and {:.4} over {} samples",
        found.n,
        found.eps,
        found.min_ratio.unwrap_or(f64::NAN),
        found.max_ratio.unwrap_or(f64::NAN),
        found.counted
    );
    for s in found.samples.iter().step_by(20) {
        println!(
            "t = {:5.2}: Ψ₁ = {:+.4e}, Ψ₂ = {:+.4e}, L = {:.4e}",
            s.t, s.psi1, s.psi2, s.l
        );
    }
    Ok(())
}
