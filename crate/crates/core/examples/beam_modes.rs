//! Clamped beam modes, their Gram matrices and the Poincaré-type constant.

use viscoplate::spectral::{assemble_grams, beam_roots, build_basis, default_quad_order, estimate_cp};

fn main() -> viscoplate::Result<()> {
    println!("first clamped-clamped roots of cos β cosh β = 1:");
    for (j, b) in beam_roots(5).iter().enumerate() {
        println!("  β_{} = {b:.10}", j + 1);
    }

    for n in [4, 8, 16] {
        let basis = build_basis(1, n, 1.0, default_quad_order(n))?;
        let grams = assemble_grams(&basis)?;
        let beta = basis.beam_roots();
        let off_diag = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| grams.m2[(i, j)].abs())
            .fold(0.0, f64::max);
        println!(
            "n = {n:2}: M2[0,0] = {:.8} (β₁⁴ = {:.8}), largest off-diagonal {off_diag:.1e}, c_p = {:.6}",
            grams.m2[(0, 0)],
            beta[0].powi(4),
            estimate_cp(&grams)
        );
    }

    let plate = build_basis(2, 4, 1.0, default_quad_order(4))?;
    let grams = assemble_grams(&plate)?;
    println!(
        "2D plate with {} tensor modes: c_p = {:.6}",
        plate.dim(),
        estimate_cp(&grams)
    );
    Ok(())
}
