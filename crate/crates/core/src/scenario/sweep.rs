use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::config::Scenario;
use crate::scenario::initial::split_top_level;
use crate::scenario::run::{fmt_real, run_scenario, RunOptions, RunReport};

/// Environment variable capping the sweep worker pool.
pub const THREADS_ENV: &str = "VISCOPLATE_THREADS";

/// One sweep dimension, `key=v1,v2,...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

/// Parses `key=v1,v2,...`, splitting values at commas outside parentheses.
pub fn parse_axis(spec: &str) -> Result<Axis> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(None, format!("axis `{spec}` is not key=v1,v2,...")))?;
    let key = key.trim();
    let values: Vec<String> = split_top_level(values, ',')
        .into_iter()
        .map(|v| v.trim().to_owned())
        .collect();
    if key.is_empty() || values.iter().any(|v| v.is_empty()) {
        return Err(Error::config(
            Some(key),
            format!("axis `{spec}` has an empty key or value"),
        ));
    }
    Ok(Axis {
        key: key.to_owned(),
        values,
    })
}

/// Worker count from [`THREADS_ENV`]; `None` means one per logical core.
pub fn pool_size() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::config(
                Some(THREADS_ENV),
                format!("`{v}` is not a positive integer"),
            )),
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub index: usize,
    pub values: Vec<(String, String)>,
    pub dir: PathBuf,
    pub exit_code: i32,
    pub error: Option<String>,
    #[serde(skip)]
    pub report: Option<RunReport>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub cells: Vec<SweepCell>,
    /// Largest cell exit code.
    pub exit_code: i32,
}

fn product(axes: &[Axis]) -> Vec<Vec<(String, String)>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push((axis.key.clone(), v.clone()));
                    p
                })
            })
            .collect()
    })
}

fn run_cell(
    template: &Scenario,
    index: usize,
    values: Vec<(String, String)>,
    out: &Path,
    opts: &RunOptions,
) -> SweepCell {
    let dir = out.join(format!("cell_{index:03}"));
    let mut scenario = template.clone();
    for (k, v) in &values {
        match scenario.with_value(k, v) {
            Ok(s) => scenario = s,
            Err(e) => {
                return SweepCell {
                    index,
                    values,
                    dir,
                    exit_code: 2,
                    error: Some(e.to_string()),
                    report: None,
                }
            }
        }
    }
    scenario.output.dir = dir.clone();
    scenario.name = format!("{}#{index:03}", template.name);
    let outcome = run_scenario(&scenario, opts);
    SweepCell {
        index,
        values,
        dir,
        exit_code: outcome.exit_code,
        error: outcome.report.error.clone(),
        report: Some(outcome.report),
    }
}

/// Runs the Cartesian product of `axes` over `template` on a pool of
/// `threads` workers (all cores when `None`). Each cell writes to
/// `out/cell_NNN`; `out/summary.csv` gets one row per cell. Failing cells
/// are recorded and the sweep continues.
pub fn sweep(
    template: &Scenario,
    axes: &[Axis],
    out: &Path,
    threads: Option<usize>,
    opts: &RunOptions,
) -> Result<SweepOutcome> {
    let cells = product(axes);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config(Some(THREADS_ENV), e.to_string()))?;
    let cells: Vec<SweepCell> = pool.install(|| {
        cells
            .into_par_iter()
            .enumerate()
            .map(|(i, values)| run_cell(template, i, values, out, opts))
            .collect()
    });
    if opts.write {
        write_summary(out, axes, &cells)?;
    }
    let exit_code = cells.iter().map(|c| c.exit_code).max().unwrap_or(0);
    Ok(SweepOutcome { cells, exit_code })
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

fn write_summary(out: &Path, axes: &[Axis], cells: &[SweepCell]) -> Result<()> {
    fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("summary.csv"))?;
    let mut header = vec!["cell".to_owned()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    header.extend(
        [
            "exit_code",
            "E0",
            "E_final",
            "tail_rate",
            "decay_exponent",
            "c_max",
            "error",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for c in cells {
        let mut rec = vec![format!("{:03}", c.index)];
        rec.extend(c.values.iter().map(|(_, v)| v.clone()));
        rec.push(c.exit_code.to_string());
        let r = c.report.as_ref();
        rec.push(opt(r.map(|r| r.energy.e0)));
        rec.push(opt(r.map(|r| r.energy.e_final)));
        rec.push(opt(r.and_then(|r| r.energy.tail_rate)));
        rec.push(opt(r.and_then(|r| r.decay_fit.as_ref()?.exponent)));
        rec.push(opt(r.and_then(|r| Some(r.decay_fit.as_ref()?.c_max))));
        rec.push(c.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values_keep_parenthesized_commas() {
        let a = parse_axis("kernel=exp(0.5,1),power(0.4,2)").unwrap();
        assert_eq!(a.key, "kernel");
        assert_eq!(a.values, vec!["exp(0.5,1)", "power(0.4,2)"]);
        assert!(parse_axis("k").is_err());
        assert!(parse_axis("k=1,,2").is_err());
    }

    #[test]
    fn cartesian_product_order() {
        let axes = [parse_axis("a=1,2").unwrap(), parse_axis("b=x,y,z").unwrap()];
        let p = product(&axes);
        assert_eq!(p.len(), 6);
        assert_eq!(p[1], vec![("a".into(), "1".into()), ("b".into(), "y".into())]);
    }
}
