use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::diagnostics::{
    check_well, damping_diag, energy, energy_rate_residual, fit_decay, log_sobolev_gap, lyapunov_search,
    max_abs_finite, memory_cs_check, psi1, psi2, scale_into_well, well_constants, EnergySample, FitReport,
    FunctionalSample, TailLaw, WellConstants, WellReport,
};
use crate::dynamics::{simulate, NewtonOptions, PhysicalParams};
use crate::error::{Error, Result};
use crate::kernels::{
    envelope_linear_b, envelope_nonlinear_b, envelope_nonlinear_both, extend_modulus, parse_damping, parse_kernel,
    parse_modulus, parse_xi, symmetric_grid, uniform_grid, validate_h1, validate_h2, validate_h3, ConvexModulus,
    DampingLaw, DecayEnvelope, RelaxationKernel, XiWeight,
};
use crate::numeric::ls_slope;
use crate::scenario::config::Scenario;
use crate::scenario::initial::parse_initial;
use crate::spectral::{assemble_grams, build_basis, estimate_cp, Basis, GramSet};

/// Header of `timeseries.csv`.
pub const TIMESERIES_HEADER: [&str; 17] = [
    "t",
    "E",
    "J",
    "I",
    "kin_rho",
    "bend",
    "bend_rate",
    "mass",
    "logterm",
    "memory",
    "psi1",
    "psi2",
    "L",
    "G",
    "M",
    "dissipation",
    "rate_residual",
];

/// Tolerated energy rise per step.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-10;
/// Relative energy drift tolerated without memory, friction or source.
pub const CONSERVATION_TOLERANCE: f64 = 1e-6;
pub const SOBOLEV_TOLERANCE: f64 = 1e-8;
pub const MEMORY_GAP_TOLERANCE: f64 = 1e-10;
/// Accepted distance of the refinement slope from 2.
pub const SLOPE_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "n/a",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub verdict: Verdict,
    pub detail: String,
}

impl Check {
    pub fn pass(detail: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::Pass,
            detail: detail.into(),
        }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::Fail,
            detail: detail.into(),
        }
    }

    pub fn na(detail: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::NotApplicable,
            detail: detail.into(),
        }
    }

    pub fn from_bool(ok: bool, detail: impl Into<String>) -> Self {
        if ok {
            Self::pass(detail)
        } else {
            Self::fail(detail)
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypotheses {
    #[serde(rename = "H1")]
    pub h1: Check,
    #[serde(rename = "H2")]
    pub h2: Check,
    #[serde(rename = "H3")]
    pub h3: Check,
    #[serde(rename = "H4")]
    pub h4: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    pub monotonicity: Check,
    pub rate_sign: Check,
    pub conservation: Check,
    pub well: Check,
    pub log_sobolev: Check,
    pub memory_bounds: Check,
    pub lyapunov: Check,
    pub tail_bound: Check,
    pub decay_fit: Check,
    pub refinement: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Setup {
    pub spatial_dim: usize,
    pub modes: usize,
    pub quad_order: usize,
    pub dt: f64,
    pub steps: usize,
    pub cp: f64,
    pub l: f64,
    /// Factor applied to the initial data by the well scaling.
    pub initial_scale: f64,
    pub well_constants: Option<WellConstants>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct EnergySummary {
    pub e0: f64,
    pub e_final: f64,
    /// Largest `E(t_{n+1}) - E(t_n)`.
    pub max_rise: f64,
    pub max_rate_residual: f64,
    /// `-d ln E/dt` by regression over the fit window.
    pub tail_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct FunctionalSummary {
    pub sobolev_a: f64,
    pub min_sobolev_gap: f64,
    pub min_memory_gap_b: f64,
    pub min_memory_gap_db: f64,
    pub lyapunov_n: Option<f64>,
    pub lyapunov_eps: f64,
    pub lyapunov_min_ratio: Option<f64>,
    pub lyapunov_max_ratio: Option<f64>,
    pub max_g: f64,
    pub max_m: f64,
    pub empty_omega1_rows: usize,
    pub tail_checked: usize,
    pub tail_failures: usize,
    pub max_tail_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefineReport {
    pub dts: Vec<f64>,
    pub max_residuals: Vec<f64>,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct NewtonSummary {
    pub iterations: usize,
    pub max_residual: f64,
    pub halved_steps: usize,
}

/// Everything a run decided and measured.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    /// Finished without an execution error.
    pub completed: bool,
    pub error: Option<String>,
    pub hypotheses: Hypotheses,
    pub verdicts: Verdicts,
    pub setup: Setup,
    pub energy: EnergySummary,
    pub functionals: FunctionalSummary,
    pub well: Option<WellReport>,
    pub decay_fit: Option<FitReport>,
    pub refinement: Option<RefineReport>,
    pub newton: NewtonSummary,
    pub wall_clock_s: f64,
}

impl RunReport {
    fn new(name: &str) -> Self {
        let na = || Check::na("not run");
        Self {
            scenario: name.to_owned(),
            completed: false,
            error: None,
            hypotheses: Hypotheses {
                h1: na(),
                h2: na(),
                h3: na(),
                h4: na(),
            },
            verdicts: Verdicts {
                monotonicity: na(),
                rate_sign: na(),
                conservation: na(),
                well: na(),
                log_sobolev: na(),
                memory_bounds: na(),
                lyapunov: na(),
                tail_bound: na(),
                decay_fit: na(),
                refinement: na(),
            },
            setup: Setup::default(),
            energy: EnergySummary::default(),
            functionals: FunctionalSummary::default(),
            well: None,
            decay_fit: None,
            refinement: None,
            newton: NewtonSummary::default(),
            wall_clock_s: 0.0,
        }
    }

    pub fn checks(&self) -> Vec<(&'static str, &Check)> {
        let h = &self.hypotheses;
        let v = &self.verdicts;
        vec![
            ("H1", &h.h1),
            ("H2", &h.h2),
            ("H3", &h.h3),
            ("H4", &h.h4),
            ("monotonicity", &v.monotonicity),
            ("rate_sign", &v.rate_sign),
            ("conservation", &v.conservation),
            ("well", &v.well),
            ("log_sobolev", &v.log_sobolev),
            ("memory_bounds", &v.memory_bounds),
            ("lyapunov", &v.lyapunov),
            ("tail_bound", &v.tail_bound),
            ("decay_fit", &v.decay_fit),
            ("refinement", &v.refinement),
        ]
    }

    /// 0 when every applicable verdict passes, 1 when one fails, 2 after an
    /// execution error.
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            2
        } else if self.checks().iter().any(|(_, c)| c.verdict == Verdict::Fail) {
            1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    /// Number of step sizes `dt, dt/2, …` in the refinement study; below 2
    /// no study is made.
    pub refine: usize,
    pub dump_grams: bool,
    /// Write artifacts to the scenario's output directory.
    pub write: bool,
}

/// Diagnostics gathered at one timeseries row.
#[derive(Debug, Clone, Copy, Default)]
struct Row {
    step: usize,
    psi1: f64,
    psi2: f64,
    g: f64,
    m: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    /// Energy at every step.
    pub samples: Vec<EnergySample>,
    pub exit_code: i32,
}

/// Runs `scenario`: hypothesis checks, simulation, diagnostics and the decay
/// fit, then writes `timeseries.csv`, `report.json` and
/// `effective_config.toml` when `opts.write` is set. Never panics on bad
/// input; errors end up in the report with exit code 2.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> RunOutcome {
    let start = Instant::now();
    let mut report = RunReport::new(&scenario.name);
    let mut samples = Vec::new();
    let mut rows = Vec::new();
    match execute(scenario, opts, &mut report, &mut samples, &mut rows) {
        Ok(()) => report.completed = true,
        Err(e) => report.error = Some(e.to_string()),
    }
    report.wall_clock_s = start.elapsed().as_secs_f64();
    if opts.write {
        if let Err(e) = write_artifacts(scenario, &report, &samples, &rows) {
            report.error.get_or_insert(e.to_string());
        }
    }
    let exit_code = report.exit_code();
    RunOutcome {
        report,
        samples,
        exit_code,
    }
}

struct Model {
    kernel: RelaxationKernel,
    damping: DampingLaw,
    xi: Option<XiWeight>,
    modulus: Option<ConvexModulus>,
}

fn model(s: &Scenario) -> Result<Model> {
    let kernel = parse_kernel(&s.physics.kernel)?;
    Ok(Model {
        xi: parse_xi(&s.physics.xi, &kernel)?,
        modulus: parse_modulus(&s.physics.modulus, &kernel)?,
        damping: parse_damping(&s.physics.damping)?,
        kernel,
    })
}

fn joined(v: &[String]) -> String {
    if v.is_empty() {
        "ok".into()
    } else {
        v.join("; ")
    }
}

fn hypotheses(s: &Scenario, m: &Model, cp: f64, report: &mut RunReport) -> Result<Option<WellConstants>> {
    let horizon = s.time.t_end.max(1.0);
    let grid = uniform_grid(horizon, 4001);
    let h = &mut report.hypotheses;
    h.h1 = if m.kernel.is_zero() {
        Check::na("no memory kernel")
    } else {
        let r = validate_h1(&m.kernel, &grid)?;
        Check::from_bool(r.passed, joined(&r.violations))
    };
    h.h2 = match (&m.xi, &m.modulus) {
        _ if m.kernel.is_zero() => Check::na("no memory kernel"),
        (Some(xi), Some(b)) => match validate_h2(&m.kernel, b, xi, &grid) {
            Ok(r) => Check::from_bool(r.passed, joined(&r.violations)),
            Err(e) => Check::fail(e.to_string()),
        },
        _ => Check::na("no decay law given"),
    };
    h.h3 = if m.damping.is_none() {
        Check::na("no friction")
    } else {
        let r = validate_h3(&m.damping, &symmetric_grid(4.0, 800))?;
        Check::from_bool(r.passed, joined(&r.violations))
    };
    let l = m.kernel.residual_stiffness();
    report.setup.l = l;
    let k = s.physics.k;
    if k == 0.0 {
        h.h4 = Check::na("no logarithmic source");
        return Ok(None);
    }
    if !(l > 0.0) {
        h.h4 = Check::fail(format!("l = {l} is not positive"));
        return Ok(None);
    }
    match well_constants(k, l, cp, s.diagnostics.well_a) {
        Ok(wc) => {
            h.h4 = Check::pass(format!("k = {k} < k0 = {}", wc.k0));
            Ok(Some(wc))
        }
        Err(Error::Hypothesis(msg)) => {
            h.h4 = Check::fail(msg);
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Decay envelope matching the kernel and damping of `m`.
fn envelope(s: &Scenario, m: &Model) -> Result<Option<DecayEnvelope>> {
    let (Some(xi), Some(b)) = (&m.xi, &m.modulus) else {
        return Ok(None);
    };
    if m.kernel.is_zero() {
        return Ok(None);
    }
    let d = &s.diagnostics;
    let env = if b.is_linear() {
        envelope_linear_b(xi, d.eps0, 1.0, 0.0)?
    } else if m.damping.has_nonlinear_origin() {
        envelope_nonlinear_both(xi, d.eps0, d.eps1, d.envelope_c1, 0.0, b, &m.damping)?
    } else {
        envelope_nonlinear_b(
            xi,
            d.eps0,
            d.eps1,
            1.0,
            d.envelope_c1,
            0.0,
            s.t1().max(f64::MIN_POSITIVE),
            b,
        )?
    };
    Ok(Some(env))
}

fn execute(
    s: &Scenario,
    opts: &RunOptions,
    report: &mut RunReport,
    samples: &mut Vec<EnergySample>,
    rows: &mut Vec<(usize, Row)>,
) -> Result<()> {
    s.validate()?;
    let m = model(s)?;
    let basis = build_basis(s.grid.spatial_dim, s.grid.n, s.grid.length, s.quad_order())?;
    let grams = assemble_grams(&basis)?;
    if opts.dump_grams && opts.write {
        dump_grams(&s.output.dir, &grams)?;
    }
    let cp = estimate_cp(&grams);
    let steps = s.steps();
    let dt = s.time.dt;
    report.setup = Setup {
        spatial_dim: s.grid.spatial_dim,
        modes: basis.dim(),
        quad_order: s.quad_order(),
        dt,
        steps,
        cp,
        l: 0.0,
        initial_scale: 1.0,
        well_constants: None,
    };
    let wc = hypotheses(s, &m, cp, report)?;
    report.setup.well_constants = wc;
    let failed: Vec<&str> = report
        .checks()
        .iter()
        .filter(|(_, c)| c.verdict == Verdict::Fail)
        .map(|(n, _)| *n)
        .collect();
    if !failed.is_empty() {
        let why = format!("skipped: {} failed", failed.join(", "));
        for c in [
            &mut report.verdicts.monotonicity,
            &mut report.verdicts.rate_sign,
            &mut report.verdicts.conservation,
            &mut report.verdicts.well,
            &mut report.verdicts.log_sobolev,
            &mut report.verdicts.memory_bounds,
            &mut report.verdicts.lyapunov,
            &mut report.verdicts.tail_bound,
            &mut report.verdicts.decay_fit,
            &mut report.verdicts.refinement,
        ] {
            *c = Check::na(why.clone());
        }
        return Ok(());
    }
    let params = PhysicalParams::new(
        s.physics.rho,
        s.physics.k,
        s.physics.sigma,
        m.kernel.clone(),
        m.damping.clone(),
    )?;
    let (dim, n) = (s.grid.spatial_dim, s.grid.n);
    let mut g0 = parse_initial(&s.initial.displacement, dim, n)?.coefficients(&basis, &grams);
    let mut v0 = parse_initial(&s.initial.velocity, dim, n)?.coefficients(&basis, &grams);
    if s.initial.scale_into_well {
        let wc = wc
            .as_ref()
            .ok_or_else(|| Error::config(Some("initial.scale_into_well"), "needs k > 0"))?;
        let lambda = scale_into_well(&g0, &v0, &params, &grams, &basis, wc)
            .ok_or_else(|| Error::config(Some("initial.scale_into_well"), "no scaling puts the data in the well"))?;
        g0 *= lambda;
        v0 *= lambda;
        report.setup.initial_scale = lambda;
    }
    let sobolev_a = s.diagnostics.sobolev_a.or(wc.map(|w| w.a)).unwrap_or(1.0);
    let extended = m.modulus.as_ref().map(extend_modulus).transpose()?;
    let tail_law = match (&m.xi, &extended) {
        (Some(xi), Some(b)) if !m.kernel.is_zero() => Some(TailLaw {
            xi,
            modulus: b,
            delta: s.diagnostics.delta,
        }),
        _ => None,
    };
    let stride = s.diagnostics.stride;
    let t1 = s.t1();
    let mut sobolev_min = f64::INFINITY;
    let mut gap_b = f64::INFINITY;
    let mut gap_db = f64::INFINITY;
    let mut fsum = FunctionalSummary {
        sobolev_a,
        lyapunov_eps: s.diagnostics.lyapunov_eps,
        ..Default::default()
    };
    let sim = simulate(
        &basis,
        &grams,
        &params,
        g0,
        v0,
        dt,
        steps,
        stride,
        NewtonOptions::default(),
        |it| {
            let st = it.state();
            samples.push(energy(
                st,
                it.params(),
                it.grams(),
                it.basis(),
                it.history(),
                it.table(),
            ));
            if st.step_index % stride != 0 && st.step_index != steps {
                return Ok(());
            }
            let dd = damping_diag(st, it.params(), it.basis(), it.history(), it.table(), t1, tail_law)?;
            let gaps = memory_cs_check(it.history(), it.table(), &it.params().kernel);
            sobolev_min = sobolev_min.min(log_sobolev_gap(&st.g, sobolev_a, cp, it.basis(), it.grams())?);
            if !it.params().kernel.is_zero() {
                gap_b = gap_b.min(gaps.gap_b);
                gap_db = gap_db.min(gaps.gap_db);
            }
            fsum.max_g = fsum.max_g.max(dd.g);
            fsum.max_m = fsum.max_m.max(dd.m);
            fsum.empty_omega1_rows += dd.omega1_empty as usize;
            if let Some(ok) = dd.tail_holds() {
                fsum.tail_checked += 1;
                fsum.tail_failures += (!ok) as usize;
                fsum.max_tail_weight = fsum.max_tail_weight.max(dd.tail_weight);
            }
            rows.push((
                st.step_index,
                Row {
                    step: st.step_index,
                    psi1: psi1(st, it.params(), it.grams(), it.basis()),
                    psi2: psi2(st, it.params(), it.grams(), it.basis(), it.history(), it.table()),
                    g: dd.g,
                    m: dd.m,
                },
            ));
            Ok(())
        },
    );
    fsum.min_sobolev_gap = sobolev_min;
    fsum.min_memory_gap_b = gap_b;
    fsum.min_memory_gap_db = gap_db;
    report.functionals = fsum;
    let traj = sim?;
    report.newton = NewtonSummary {
        iterations: traj.stats.newton_iterations,
        max_residual: traj.stats.max_residual,
        halved_steps: traj.stats.halved_steps,
    };
    summarize(s, &m, &params, wc, samples, rows, report)?;
    if opts.refine >= 2 {
        refine(s, &params, &basis, &grams, opts.refine, samples, report)?;
    } else {
        report.verdicts.refinement = Check::na("no refinement requested");
    }
    Ok(())
}

fn summarize(
    s: &Scenario,
    m: &Model,
    params: &PhysicalParams,
    wc: Option<WellConstants>,
    samples: &[EnergySample],
    rows: &[(usize, Row)],
    report: &mut RunReport,
) -> Result<()> {
    let dt = s.time.dt;
    let v = &mut report.verdicts;
    let e0 = samples.first().map_or(0.0, |x| x.e);
    let residual = energy_rate_residual(samples, dt);
    let max_rise = samples
        .windows(2)
        .map(|w| w[1].e - w[0].e)
        .fold(f64::NEG_INFINITY, f64::max);
    let rises = samples
        .windows(2)
        .filter(|w| w[1].e - w[0].e > MONOTONICITY_TOLERANCE)
        .count();
    report.energy = EnergySummary {
        e0,
        e_final: samples.last().map_or(0.0, |x| x.e),
        max_rise,
        max_rate_residual: max_abs_finite(&residual),
        tail_rate: None,
    };
    v.monotonicity = Check::from_bool(
        rises == 0,
        format!("{rises} steps rise by more than {MONOTONICITY_TOLERANCE:e}; largest rise {max_rise:e}"),
    );
    let worst_rate = samples
        .iter()
        .map(|x| x.predicted_rate())
        .fold(f64::NEG_INFINITY, f64::max);
    v.rate_sign = Check::from_bool(worst_rate <= 0.0, format!("largest predicted rate {worst_rate:e}"));
    v.conservation = if m.kernel.is_zero() && m.damping.is_none() && params.k == 0.0 {
        let drift = samples.iter().map(|x| (x.e - e0).abs()).fold(0.0, f64::max);
        Check::from_bool(
            drift <= CONSERVATION_TOLERANCE * e0,
            format!("drift {drift:e} against E(0) = {e0:e}"),
        )
    } else {
        Check::na("memory, friction or source present")
    };
    match wc {
        Some(wc) => {
            let w = check_well(samples, &wc, params.rho);
            v.well = if !w.certified {
                Check::na(format!("well not certified: {}", w.reason.clone().unwrap_or_default()))
            } else {
                Check::from_bool(
                    w.violations == 0,
                    format!("{} violations, min I = {:e}", w.violations, w.min_i),
                )
            };
            report.well = Some(w);
        }
        None => v.well = Check::na("no logarithmic source"),
    }
    let f = &report.functionals;
    v.log_sobolev = Check::from_bool(
        f.min_sobolev_gap >= -SOBOLEV_TOLERANCE,
        format!("min gap {:e} at a = {}", f.min_sobolev_gap, f.sobolev_a),
    );
    v.memory_bounds = if m.kernel.is_zero() {
        Check::na("no memory kernel")
    } else {
        let worst = f.min_memory_gap_b.min(f.min_memory_gap_db);
        Check::from_bool(worst >= -MEMORY_GAP_TOLERANCE, format!("min gap {worst:e}"))
    };
    v.tail_bound = if f.tail_checked == 0 {
        Check::na("no tail rows")
    } else {
        Check::from_bool(
            f.tail_failures == 0,
            format!(
                "{} of {} rows fail; largest Jensen weight {:e}",
                f.tail_failures, f.tail_checked, f.max_tail_weight
            ),
        )
    };
    let series: Vec<FunctionalSample> = rows
        .iter()
        .map(|(step, r)| FunctionalSample {
            t: samples[*step].t,
            e: samples[*step].e,
            psi1: r.psi1,
            psi2: r.psi2,
        })
        .collect();
    let lyap = lyapunov_search(&series, s.diagnostics.lyapunov_eps);
    report.functionals.lyapunov_n = Some(lyap.n);
    report.functionals.lyapunov_min_ratio = lyap.min_ratio;
    report.functionals.lyapunov_max_ratio = lyap.max_ratio;
    v.lyapunov = if lyap.counted == 0 {
        Check::na("no samples with positive energy")
    } else {
        Check::from_bool(
            lyap.equivalent(),
            format!(
                "N = {}, L/E in [{}, {}]",
                lyap.n,
                lyap.min_ratio.map_or("-".into(), |r| r.to_string()),
                lyap.max_ratio.map_or("-".into(), |r| r.to_string())
            ),
        )
    };
    let t_end = s.time.t_end;
    let window = (s.diagnostics.fit_from * t_end, t_end);
    let tail: Vec<(f64, f64)> = samples
        .iter()
        .filter(|x| x.t >= window.0 && x.e > 0.0)
        .map(|x| (x.t, x.e.ln()))
        .collect();
    if tail.len() >= 2 {
        let (t, y): (Vec<f64>, Vec<f64>) = tail.into_iter().unzip();
        report.energy.tail_rate = Some(-ls_slope(&t, &y));
    }
    v.decay_fit = match envelope(s, m)? {
        None => Check::na("no decay law"),
        Some(env) => {
            let times: Vec<f64> = samples.iter().map(|x| x.t).collect();
            let energies: Vec<f64> = samples.iter().map(|x| x.e).collect();
            match fit_decay(&times, &energies, &env, window) {
                Ok(Some(fit)) => {
                    let c = Check::from_bool(
                        fit.bound_holds(),
                        format!(
                            "{:?} envelope, c = {:e}, overshoot {:e}",
                            fit.case, fit.c_max, fit.overshoot
                        ),
                    );
                    report.decay_fit = Some(fit);
                    c
                }
                Ok(None) => Check::na("energy vanishes on the fit window"),
                Err(e) => Check::na(format!("fit skipped: {e}")),
            }
        }
    };
    Ok(())
}

/// Max energy-rate residual of the same run at step `dt`.
fn max_rate_residual(
    s: &Scenario,
    params: &PhysicalParams,
    basis: &Basis,
    grams: &GramSet,
    g0: &DVector<f64>,
    v0: &DVector<f64>,
    dt: f64,
) -> Result<f64> {
    let steps = (s.time.t_end / dt).round() as usize;
    let mut e = Vec::with_capacity(steps + 1);
    simulate(
        basis,
        grams,
        params,
        g0.clone(),
        v0.clone(),
        dt,
        steps,
        steps.max(1),
        NewtonOptions::default(),
        |it| {
            e.push(energy(
                it.state(),
                it.params(),
                it.grams(),
                it.basis(),
                it.history(),
                it.table(),
            ));
            Ok(())
        },
    )?;
    Ok(max_abs_finite(&energy_rate_residual(&e, dt)))
}

fn refine(
    s: &Scenario,
    params: &PhysicalParams,
    basis: &Basis,
    grams: &GramSet,
    levels: usize,
    samples: &[EnergySample],
    report: &mut RunReport,
) -> Result<()> {
    let (dim, n) = (s.grid.spatial_dim, s.grid.n);
    let lambda = report.setup.initial_scale;
    let g0 = parse_initial(&s.initial.displacement, dim, n)?.coefficients(basis, grams) * lambda;
    let v0 = parse_initial(&s.initial.velocity, dim, n)?.coefficients(basis, grams) * lambda;
    let mut dts = vec![s.time.dt];
    let mut res = vec![report.energy.max_rate_residual];
    for i in 1..levels {
        let dt = s.time.dt / (1u64 << i) as f64;
        dts.push(dt);
        res.push(max_rate_residual(s, params, basis, grams, &g0, &v0, dt)?);
    }
    let e0 = samples.first().map_or(0.0, |x| x.e);
    let floor = 1e-12 * e0.max(f64::MIN_POSITIVE);
    let slope = if res.iter().all(|r| *r > 0.0) {
        let lx: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
        let ly: Vec<f64> = res.iter().map(|r| r.ln()).collect();
        ls_slope(&lx, &ly)
    } else {
        f64::NAN
    };
    report.verdicts.refinement = if res[0] <= floor {
        Check::na(format!("residual {:e} already at round-off", res[0]))
    } else {
        Check::from_bool(
            (slope - 2.0).abs() <= SLOPE_TOLERANCE,
            format!("slope {slope:.4} over {levels} step sizes"),
        )
    };
    report.refinement = Some(RefineReport {
        dts,
        max_residuals: res,
        slope,
    });
    Ok(())
}

/// Formats with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_artifacts(s: &Scenario, report: &RunReport, samples: &[EnergySample], rows: &[(usize, Row)]) -> Result<()> {
    let dir = &s.output.dir;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("effective_config.toml"), s.effective_config()?)?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(dir.join("report.json"), json)?;
    write_timeseries(&dir.join("timeseries.csv"), report, samples, rows, s.time.dt)
}

fn write_timeseries(
    path: &Path,
    report: &RunReport,
    samples: &[EnergySample],
    rows: &[(usize, Row)],
    dt: f64,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TIMESERIES_HEADER)?;
    let residual = energy_rate_residual(samples, dt);
    let n_l = report.functionals.lyapunov_n.unwrap_or(1.0);
    let eps = report.functionals.lyapunov_eps;
    for (_, r) in rows {
        let Some(e) = samples.get(r.step) else { continue };
        let l = n_l * e.e + eps * r.psi1 + r.psi2;
        let vals = [
            e.t,
            e.e,
            e.j,
            e.i,
            e.kin_rho,
            e.bend,
            e.bend_rate,
            e.mass,
            e.logterm,
            e.memory,
            r.psi1,
            r.psi2,
            l,
            r.g,
            r.m,
            e.dissipation,
            residual.get(r.step).copied().unwrap_or(f64::NAN),
        ];
        w.write_record(vals.iter().map(|x| fmt_real(*x)))?;
    }
    w.flush()?;
    Ok(())
}

fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|x| fmt_real(*x)).collect();
        writeln!(f, "{}", line.join(","))?;
    }
    Ok(())
}

/// Writes `M0`, `M1` and `M2` as `gram_m0.csv` etc.
pub fn dump_grams(dir: &Path, grams: &GramSet) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix(&dir.join("gram_m0.csv"), &grams.m0)?;
    write_matrix(&dir.join("gram_m1.csv"), &grams.m1)?;
    write_matrix(&dir.join("gram_m2.csv"), &grams.m2)
}
