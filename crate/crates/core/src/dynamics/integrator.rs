use nalgebra::DVector;

use crate::dynamics::history::{memory_coefficients_ahead, HistoryBuffer, KernelTable};
use crate::dynamics::params::PhysicalParams;
use crate::dynamics::solver::{NewtonInfo, NewtonOptions, Stage};
use crate::dynamics::state::PlateState;
use crate::error::{Error, Result};
use crate::spectral::{Basis, GramSet};

/// Newmark parameters of the average-acceleration rule.
pub const NEWMARK_GAMMA: f64 = 0.5;
pub const NEWMARK_BETA: f64 = 0.25;

/// Times a failed step is retried on halved substeps.
pub const MAX_HALVINGS: usize = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub newton_iterations: usize,
    pub max_residual: f64,
    /// Steps that needed substepping.
    pub halved_steps: usize,
}

/// Average-acceleration Newmark integrator for the Galerkin system, holding
/// the uniform history needed by the memory integral.
pub struct Integrator<'a> {
    basis: &'a Basis,
    grams: &'a GramSet,
    params: &'a PhysicalParams,
    dt: f64,
    table: KernelTable,
    history: HistoryBuffer,
    state: PlateState,
    opts: NewtonOptions,
    stats: StepStats,
}

impl<'a> Integrator<'a> {
    /// Starts at rest-or-moving data `(g0, v0)` and solves for the initial
    /// acceleration. `steps` sizes the kernel table.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        basis: &'a Basis,
        grams: &'a GramSet,
        params: &'a PhysicalParams,
        dt: f64,
        steps: usize,
        g0: DVector<f64>,
        v0: DVector<f64>,
        opts: NewtonOptions,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::input(format!("dt must be positive, got {dt}")));
        }
        let m = basis.dim();
        if g0.len() != m || v0.len() != m {
            return Err(Error::input(format!("initial data must have {m} coefficients")));
        }
        let table = KernelTable::new(&params.kernel, dt, steps + 2);
        let mut history = HistoryBuffer::new(dt, &grams.m2_factor());
        history.push(g0.clone());
        let mut state = PlateState {
            t: 0.0,
            g: g0,
            v: v0,
            a: DVector::zeros(m),
            step_index: 0,
        };
        let stage = Stage {
            basis,
            grams,
            params,
            t: 0.0,
            g0: state.g.clone(),
            v0: state.v.clone(),
            cg: 0.0,
            cv: 0.0,
            memory: DVector::zeros(m),
            memory_implicit: 0.0,
        };
        let (a, info) = stage.solve(&state.a, &opts)?;
        state.a = a;
        Ok(Self {
            basis,
            grams,
            params,
            dt,
            table,
            history,
            state,
            opts,
            stats: StepStats {
                newton_iterations: info.iterations,
                max_residual: info.residual,
                halved_steps: 0,
            },
        })
    }

    pub fn state(&self) -> &PlateState {
        &self.state
    }

    pub fn history(&self) -> &HistoryBuffer {
        &self.history
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn params(&self) -> &PhysicalParams {
        self.params
    }

    pub fn basis(&self) -> &Basis {
        self.basis
    }

    pub fn grams(&self) -> &GramSet {
        self.grams
    }

    fn advance(&self, parts: usize) -> Result<(PlateState, Vec<NewtonInfo>)> {
        let h = self.dt / parts as f64;
        let mut s = self.state.clone();
        let mut infos = Vec::with_capacity(parts);
        let b0 = self.params.kernel.initial();
        let has_memory = !self.params.kernel.is_zero();
        for j in 1..=parts {
            let tau = if j == parts { self.dt } else { j as f64 * h };
            let cg = NEWMARK_BETA * h * h;
            let cv = NEWMARK_GAMMA * h;
            let stage = Stage {
                basis: self.basis,
                grams: self.grams,
                params: self.params,
                t: self.state.t + tau,
                g0: &s.g + &s.v * h + &s.a * ((0.5 - NEWMARK_BETA) * h * h),
                v0: &s.v + &s.a * ((1.0 - NEWMARK_GAMMA) * h),
                cg,
                cv,
                memory: if has_memory {
                    memory_coefficients_ahead(&self.history, &self.params.kernel, &self.table, tau)
                } else {
                    DVector::zeros(s.dim())
                },
                memory_implicit: if has_memory { 0.5 * tau * b0 } else { 0.0 },
            };
            let (a, info) = stage.solve(&s.a, &self.opts)?;
            s.g = &stage.g0 + &a * cg;
            s.v = &stage.v0 + &a * cv;
            s.a = a;
            s.t = stage.t;
            infos.push(info);
        }
        Ok((s, infos))
    }

    /// Advances one uniform step, retrying on `2, 4, 8` substeps when
    /// Newton fails.
    pub fn step(&mut self) -> Result<&PlateState> {
        let mut last_err = None;
        for halvings in 0..=MAX_HALVINGS {
            match self.advance(1 << halvings) {
                Ok((mut next, infos)) => {
                    next.step_index = self.state.step_index + 1;
                    next.t = next.step_index as f64 * self.dt;
                    if !next.is_finite() {
                        break;
                    }
                    for info in &infos {
                        self.stats.newton_iterations += info.iterations;
                        self.stats.max_residual = self.stats.max_residual.max(info.residual);
                    }
                    if halvings > 0 {
                        self.stats.halved_steps += 1;
                    }
                    self.history.push(next.g.clone());
                    self.state = next;
                    return Ok(&self.state);
                }
                Err(e @ Error::NewtonFailed { .. }) => last_err = Some(e),
                Err(Error::Diverged { t, reason, .. }) => {
                    return Err(Error::Diverged {
                        t,
                        reason,
                        last_good: Some(Box::new(self.state.clone())),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::Diverged {
            t: self.state.t + self.dt,
            reason: match last_err {
                Some(e) => format!("{e} after {MAX_HALVINGS} halvings"),
                None => "non-finite state".into(),
            },
            last_good: Some(Box::new(self.state.clone())),
        })
    }
}

/// States kept at the sampling stride plus the full displacement history.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub stride: usize,
    pub states: Vec<PlateState>,
    pub history: HistoryBuffer,
    pub stats: StepStats,
}

/// Integrates `steps` steps, calling `observer` after the initial solve and
/// after every step, and keeps every `stride`-th state.
#[allow(clippy::too_many_arguments)]
pub fn simulate<F>(
    basis: &Basis,
    grams: &GramSet,
    params: &PhysicalParams,
    g0: DVector<f64>,
    v0: DVector<f64>,
    dt: f64,
    steps: usize,
    stride: usize,
    opts: NewtonOptions,
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(&Integrator<'_>) -> Result<()>,
{
    let stride = stride.max(1);
    let mut integ = Integrator::new(basis, grams, params, dt, steps, g0, v0, opts)?;
    let mut states = vec![integ.state().clone()];
    observer(&integ)?;
    for n in 1..=steps {
        integ.step()?;
        observer(&integ)?;
        if n % stride == 0 || n == steps {
            states.push(integ.state().clone());
        }
    }
    Ok(Trajectory {
        dt,
        stride,
        states,
        stats: integ.stats(),
        history: integ.history,
    })
}
