//! The logarithmic Sobolev gap on beams and plates, and the constant
//! `d` in `s|ln s| ≤ s² + d s^{1-ε₀}`.

use nalgebra::DVector;
use viscoplate::diagnostics::{log_sobolev_gap, log_sobolev_worst_a, s_log_constant};
use viscoplate::spectral::{assemble_grams, build_basis, default_quad_order, estimate_cp};

fn main() -> viscoplate::Result<()> {
    for dim in [1, 2] {
        let n = if dim == 1 { 8 } else { 4 };
        let basis = build_basis(dim, n, 1.0, default_quad_order(n))?;
        let grams = assemble_grams(&basis)?;
        let cp = estimate_cp(&grams);
        let mut g = DVector::zeros(basis.dim());
        g[0] = 1.0;
        let (a, worst) = log_sobolev_worst_a(&g, cp, &basis, &grams);
        println!(
            "{dim}D first mode: gap at a = 1 is {:.4e}, smallest gap {worst:.4e} at a = {a:.4}",
            log_sobolev_gap(&g, 1.0, cp, &basis, &grams)?
        );
    }
    for eps0 in [0.1, 0.3, 0.5, 0.7, 0.9] {
        println!("ε₀ = {eps0}: d = {:.6}", s_log_constant(eps0)?);
    }
    Ok(())
}
