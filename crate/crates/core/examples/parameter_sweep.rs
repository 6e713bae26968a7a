//! Sweeps the relaxation rate of an exponential kernel at fixed residual
//! stiffness and compares the fitted energy decay rates.

use viscoplate::scenario::{parse_axis, preset, sweep, RunOptions};

fn main() -> viscoplate::Result<()> {
    let mut template = preset("memory-only").expect("built-in preset");
    template.grid.length = 10.0;
    template.time.t_end = 10.0;
    template.physics.rho = 1.0;
    template.physics.k = 0.0;
    let axes = [parse_axis("kernel=exp(0.25,0.5),exp(0.5,1),exp(1,2)")?];
    let out = std::env::temp_dir().join("viscoplate-sweep");
    let result = sweep(
        &template,
        &axes,
        &out,
        None,
        &RunOptions {
            write: true,
            ..Default::default()
        },
    )?;
    for cell in &result.cells {
        let rate = cell.report.as_ref().and_then(|r| r.energy.tail_rate);
        println!("{:<14} decay rate {:.4e}", cell.values[0].1, rate.unwrap_or(f64::NAN));
    }
    println!("summary in {}", out.join("summary.csv").display());
    Ok(())
}
