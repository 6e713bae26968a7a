use std::fs;

use viscoplate::scenario::{
    parse_axis, parse_scenario_str, preset, run_scenario, sweep, RunOptions, Scenario, Verdict, PRESET_NAMES,
};

fn short(name: &str, t_end: f64) -> Scenario {
    let mut s = preset(name).unwrap();
    s.time.t_end = t_end;
    s
}

fn written() -> RunOptions {
    RunOptions {
        write: true,
        ..Default::default()
    }
}

fn without_wall_clock(bytes: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("wall_clock_s");
    v
}

#[test]
fn effective_config_reparses_to_the_same_scenario() {
    for name in PRESET_NAMES {
        let s = preset(name).unwrap().resolved();
        let again = parse_scenario_str(&s.effective_config().unwrap()).unwrap();
        assert_eq!(again, s, "{name}");
    }
}

#[test]
fn reruns_are_identical_apart_from_wall_clock() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for run in ["first", "second"] {
        let mut s = short("power-cubic", 0.5);
        s.output.dir = dir.path().join(run);
        let out = run_scenario(&s, &written());
        assert_eq!(out.exit_code, 0, "{:?}", out.report.error);
        files.push((
            fs::read(s.output.dir.join("timeseries.csv")).unwrap(),
            fs::read(s.output.dir.join("report.json")).unwrap(),
        ));
    }
    assert_eq!(files[0].0, files[1].0);
    assert_eq!(without_wall_clock(&files[0].1), without_wall_clock(&files[1].1));
}

#[test]
fn one_cell_sweep_matches_a_direct_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = short("exp-cubic", 0.3);
    s.output.dir = dir.path().join("direct");
    let direct = run_scenario(&s, &written());
    let axes = [parse_axis("k=0.5").unwrap()];
    let swept = sweep(&s, &axes, &dir.path().join("sweep"), Some(1), &written()).unwrap();
    assert_eq!(swept.cells.len(), 1);
    assert_eq!(swept.exit_code, direct.exit_code);
    assert_eq!(
        fs::read(s.output.dir.join("timeseries.csv")).unwrap(),
        fs::read(dir.path().join("sweep/cell_000/timeseries.csv")).unwrap()
    );
}

#[test]
fn decay_rate_grows_with_relaxation_rate_at_fixed_residual_stiffness() {
    // long plate, so the mode frequencies sit above every relaxation rate
    let mut s = preset("memory-only").unwrap();
    s.grid.length = 10.0;
    s.time.t_end = 10.0;
    s.physics.rho = 1.0;
    s.physics.k = 0.0;
    let axes = [parse_axis("kernel=exp(0.25,0.5),exp(0.5,1),exp(1,2)").unwrap()];
    let dir = tempfile::tempdir().unwrap();
    let out = sweep(&s, &axes, dir.path(), None, &RunOptions::default()).unwrap();
    let rates: Vec<f64> = out
        .cells
        .iter()
        .map(|c| c.report.as_ref().unwrap().energy.tail_rate.unwrap())
        .collect();
    assert!(
        rates[0] > 0.0 && rates[0] < rates[1] && rates[1] < rates[2],
        "{rates:?}"
    );
}

#[test]
fn zero_data_gives_zero_energy_and_no_fit() {
    let mut s = short("exp-linear", 0.2);
    s.initial.displacement = "none".into();
    let out = run_scenario(&s, &RunOptions::default());
    assert!(out.report.completed);
    assert!(out.samples.iter().all(|x| x.e == 0.0));
    assert!(out.report.decay_fit.is_none());
    assert_eq!(out.report.verdicts.monotonicity.verdict, Verdict::Pass);
}

#[test]
fn failing_hypothesis_skips_the_simulation() {
    let mut s = short("exp-linear", 0.2);
    s.physics.kernel = "exp(1,1)".into();
    let out = run_scenario(&s, &RunOptions::default());
    assert_eq!(out.exit_code, 1);
    assert_eq!(out.report.hypotheses.h1.verdict, Verdict::Fail);
    assert!(out.samples.is_empty());
    assert_eq!(out.report.verdicts.monotonicity.verdict, Verdict::NotApplicable);
}

#[test]
fn two_dimensional_table_data_is_rejected() {
    let mut s = short("plate-2d", 0.1);
    s.initial.displacement = "table(0:0,0.5:0.1,1:0)".into();
    let out = run_scenario(&s, &RunOptions::default());
    assert_eq!(out.exit_code, 2);
    assert!(out.report.error.is_some());
}

#[test]
fn tabulated_initial_displacement_runs() {
    let mut s = short("exp-linear", 0.2);
    s.initial.displacement = "table(0:0,0.25:0.05,0.5:0.1,0.75:0.05,1:0)".into();
    let out = run_scenario(&s, &RunOptions::default());
    assert_eq!(out.exit_code, 0, "{:?}", out.report.error);
    assert!(out.report.energy.e0 > 0.0);
}
