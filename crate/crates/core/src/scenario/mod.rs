//! Scenario files, single runs with their artifacts, and parameter sweeps.

mod config;
mod initial;
mod presets;
mod run;
mod sweep;

pub use config::{
    parse_scenario, parse_scenario_str, DiagnosticsSection, GridSection, InitialSection, OutputSection, PhysicsSection,
    Scenario, TimeSection,
};
pub use initial::{parse_initial, split_top_level, InitialData};
pub use presets::{preset, PRESET_NAMES};
pub use run::{
    dump_grams, fmt_real, run_scenario, Check, EnergySummary, FunctionalSummary, Hypotheses, NewtonSummary,
    RefineReport, RunOptions, RunOutcome, RunReport, Setup, Verdict, Verdicts, CONSERVATION_TOLERANCE,
    MEMORY_GAP_TOLERANCE, MONOTONICITY_TOLERANCE, SLOPE_TOLERANCE, SOBOLEV_TOLERANCE, TIMESERIES_HEADER,
};
pub use sweep::{parse_axis, pool_size, sweep, Axis, SweepCell, SweepOutcome, THREADS_ENV};
