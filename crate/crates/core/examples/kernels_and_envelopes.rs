//! Relaxation kernels, their hypothesis checks, and the decay envelopes
//! they induce.

use viscoplate::kernels::{
    auto_decay_law, convex_conjugate, envelope_linear_b, envelope_nonlinear_b, parse_damping, parse_kernel,
    symmetric_grid, uniform_grid, validate_h1, validate_h2, validate_h3,
};

fn main() -> viscoplate::Result<()> {
    let grid = uniform_grid(20.0, 2001);
    for spec in ["exp(0.5,1)", "power(0.4,2)", "exp(1,1)"] {
        let kernel = parse_kernel(spec)?;
        let h1 = validate_h1(&kernel, &grid)?;
        let (xi, modulus) = auto_decay_law(&kernel)?.expect("nonzero kernel");
        let h2 = validate_h2(&kernel, &modulus, &xi, &grid)?;
        println!(
            "{spec:>13}: l = {:.4}, H1 {}, H2 {} (ξ = {}, B = {})",
            kernel.residual_stiffness(),
            if h1.passed { "ok" } else { "fails" },
            if h2.passed { "ok" } else { "fails" },
            xi.describe(),
            modulus.describe()
        );
    }

    for spec in ["damp-linear(1)", "damp-cubic(0.5)"] {
        let law = parse_damping(spec)?;
        let h3 = validate_h3(&law, &symmetric_grid(4.0, 400))?;
        println!("{spec:>15}: H3 {}", if h3.passed { "ok" } else { "fails" });
    }

    // B(s) = s^{3/2} and its Young conjugate
    let power = parse_kernel("power(0.4,2)")?;
    let (xi, b) = auto_decay_law(&power)?.expect("nonzero kernel");
    for tau in [0.1, 0.5, 0.9] {
        println!("B*({tau}) = {:.6}", convex_conjugate(&b, tau)?);
    }

    let exp_env = envelope_linear_b(&viscoplate::kernels::XiWeight::constant(1.0)?, 0.5, 1.0, 0.0)?;
    let pow_env = envelope_nonlinear_b(&xi, 0.5, 1.0, 1.0, 1.0, 0.0, 2.0, &b)?;
    println!("{:>6} {:>14} {:>14}", "t", "linear B", "B = s^(3/2)");
    for t in [2.5, 5.0, 10.0, 20.0, 40.0] {
        println!("{t:>6} {:>14.6e} {:>14.6e}", exp_env.shape(t)?, pow_env.shape(t)?);
    }
    Ok(())
}
