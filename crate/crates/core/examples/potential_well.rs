//! Potential-well constants for the logarithmic source and scaling of
//! initial data into the well.

use nalgebra::DVector;
use viscoplate::diagnostics::{initial_energy, scale_into_well, well_constants, well_optimal_a};
use viscoplate::dynamics::{PhysicalParams, DEFAULT_SIGMA};
use viscoplate::kernels::{parse_damping, parse_kernel};
use viscoplate::spectral::{assemble_grams, build_basis, default_quad_order, estimate_cp};

fn main() -> viscoplate::Result<()> {
    let basis = build_basis(1, 8, 1.0, default_quad_order(8))?;
    let grams = assemble_grams(&basis)?;
    let cp = estimate_cp(&grams);
    let kernel = parse_kernel("exp(0.5,1)")?;
    let l = kernel.residual_stiffness();

    for k in [2.0, 4.0, 8.0] {
        let wc = well_constants(k, l, cp, Some(well_optimal_a(k)))?;
        println!(
            "k = {k}: k0 = {:.1}, a = {:.4} (window {:.4}..{:.4}), depth d = {:.4}, radius = {:.4}",
            wc.k0, wc.a, wc.window.0, wc.window.1, wc.d, wc.rho_bar
        );
    }

    let k = 2.0;
    let wc = well_constants(k, l, cp, Some(well_optimal_a(k)))?;
    let params = PhysicalParams::new(1.0, k, DEFAULT_SIGMA, kernel, parse_damping("damp-linear(1)")?)?;
    let mut g = DVector::zeros(8);
    g[0] = 1.0;
    g[1] = 0.5;
    let v = DVector::zeros(8);
    let before = initial_energy(&g, &v, &params, &grams, &basis);
    match scale_into_well(&g, &v, &params, &grams, &basis, &wc) {
        Some(lambda) => {
            let after = initial_energy(&(&g * lambda), &v, &params, &grams, &basis);
            println!(
                "E(0) = {:.4} before scaling, {:.4} < d after scaling by {lambda}",
                before.e, after.e
            );
        }
        None => println!("no dyadic scaling lands in the well"),
    }
    Ok(())
}
