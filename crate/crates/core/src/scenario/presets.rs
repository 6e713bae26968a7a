use std::f64::consts::PI;

use crate::diagnostics::well_optimal_a;
use crate::scenario::config::Scenario;

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 9] = [
    "conservative",
    "exp-linear",
    "exp-cubic",
    "power-linear",
    "power-cubic",
    "memory-only",
    "friction-only",
    "plate-2d",
    "well",
];

fn base(name: &str, rho: f64, k: f64, kernel: &str, damping: &str, t_end: f64) -> Scenario {
    let mut s = Scenario {
        name: name.into(),
        ..Default::default()
    };
    s.physics.rho = rho;
    s.physics.k = k;
    s.physics.kernel = kernel.into();
    s.physics.damping = damping.into();
    s.time.t_end = t_end;
    s.output.dir = format!("out/{name}").into();
    s
}

/// Built-in scenarios.
pub fn preset(name: &str) -> Option<Scenario> {
    let s = match name {
        // ten periods of the unit-frequency modes
        "conservative" => {
            let mut s = base(name, 0.0, 0.0, "none", "none", 20.0 * PI);
            s.diagnostics.stride = 100;
            s
        }
        "exp-linear" => base(name, 1.0, 0.5, "exp(0.5,1)", "damp-linear(1)", 5.0),
        "exp-cubic" => base(name, 1.0, 0.5, "exp(0.5,1)", "damp-cubic(0.5)", 5.0),
        "power-linear" => base(name, 1.0, 0.5, "power(0.4,2)", "damp-linear(1)", 10.0),
        "power-cubic" => base(name, 1.0, 0.5, "power(0.4,2)", "damp-cubic(0.5)", 10.0),
        "memory-only" => base(name, 0.5, 0.5, "exp(0.5,1)", "none", 5.0),
        "friction-only" => base(name, 2.0, 0.5, "none", "damp-linear(1)", 5.0),
        "plate-2d" => {
            let mut s = base(name, 1.0, 0.5, "exp(0.5,1)", "damp-linear(1)", 2.0);
            s.grid.spatial_dim = 2;
            s.grid.n = 4;
            s.initial.displacement = "mode(1,1,0.1)+mode(1,2,0.05)".into();
            s
        }
        "well" => {
            let mut s = base(name, 1.0, 2.0, "exp(0.5,1)", "damp-linear(1)", 10.0);
            s.initial.displacement = "mode(1,1)+mode(2,0.5)".into();
            s.initial.scale_into_well = true;
            s.diagnostics.well_a = Some(well_optimal_a(2.0));
            s
        }
        _ => return None,
    };
    Some(s)
}
