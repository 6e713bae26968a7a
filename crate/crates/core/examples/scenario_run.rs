//! Runs a built-in scenario, writes its artifacts and prints the verdicts.
//!
//! `cargo run --release --example scenario_run -- well /tmp/well`

use viscoplate::scenario::{preset, run_scenario, RunOptions, PRESET_NAMES};

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "exp-linear".into());
    let Some(mut scenario) = preset(&name) else {
        eprintln!("unknown preset {name}; choose one of {}", PRESET_NAMES.join(", "));
        std::process::exit(2);
    };
    if let Some(dir) = args.next() {
        scenario.output.dir = dir.into();
    }
    let outcome = run_scenario(
        &scenario,
        &RunOptions {
            write: true,
            ..Default::default()
        },
    );
    for (check, c) in outcome.report.checks() {
        println!("{check:<14} {:<5} {}", c.verdict, c.detail);
    }
    println!(
        "E(0) = {:.6e}, E(T) = {:.6e}",
        outcome.report.energy.e0, outcome.report.energy.e_final
    );
    println!("artifacts in {}", scenario.output.dir.display());
    std::process::exit(outcome.exit_code);
}
