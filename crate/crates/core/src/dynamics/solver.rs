use nalgebra::{DMatrix, DVector};

use crate::dynamics::history::{memory_coefficients, HistoryBuffer, KernelTable};
use crate::dynamics::params::{ln_abs_clamped, s_ln_abs, PhysicalParams};
use crate::dynamics::state::PlateState;
use crate::error::{Error, Result};
use crate::spectral::{Basis, GramSet};

/// Newton controls for the acceleration solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Target for `‖R‖∞`.
    pub tol: f64,
    pub max_iter: usize,
    /// Residuals within this many ulps of the largest term count as
    /// converged.
    pub roundoff_ulps: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 25,
            roundoff_ulps: 64.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NewtonInfo {
    pub iterations: usize,
    pub residual: f64,
}

/// Residual of the Galerkin system with displacement and velocity tied to
/// the unknown acceleration by `g = g₀ + c_g a`, `v = v₀ + c_v a`.
///
/// With `c_g = c_v = 0` this is the plain residual at a fixed state.
pub(crate) struct Stage<'a> {
    pub basis: &'a Basis,
    pub grams: &'a GramSet,
    pub params: &'a PhysicalParams,
    pub t: f64,
    pub g0: DVector<f64>,
    pub v0: DVector<f64>,
    pub cg: f64,
    pub cv: f64,
    /// Memory coefficients not depending on `a`.
    pub memory: DVector<f64>,
    /// Weight of the unknown displacement in the memory integral.
    pub memory_implicit: f64,
}

pub(crate) struct Evaluated {
    pub residual: DVector<f64>,
    pub scale: f64,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

impl Stage<'_> {
    fn fields(&self, a: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (&self.g0 + a * self.cg, &self.v0 + a * self.cv)
    }

    pub fn residual(&self, a: &DVector<f64>) -> Result<Evaluated> {
        let (g, v) = self.fields(a);
        let phi = self.basis.phi();
        let uq = phi * &g;
        let vq = phi * &v;
        let aq = phi * a;
        let p = self.params;
        let inertia = DVector::from_fn(uq.len(), |q, _| p.inertia_weight(vq[q]) * aq[q]);
        let friction = vq.map(|s| p.damping.value(s));
        let source = uq.map(|s| p.k * s_ln_abs(s));
        if inertia
            .iter()
            .chain(friction.iter())
            .chain(source.iter())
            .any(|x| !x.is_finite())
        {
            return Err(Error::Diverged {
                t: self.t,
                reason: "non-finite pointwise value in the nonlinear terms".into(),
                last_good: None,
            });
        }
        let p_inertia = self.basis.project_nodal(&inertia);
        let p_friction = self.basis.project_nodal(&friction);
        let p_source = self.basis.project_nodal(&source);
        let m2a = &self.grams.m2 * a;
        let m2g = &self.grams.m2 * &g;
        let m0g = &self.grams.m0 * &g;
        let mem = &self.grams.m2 * (&self.memory + &g * self.memory_implicit);
        let residual = &p_inertia + &m2a + &m2g + &m0g - &mem + &p_friction - &p_source;
        let scale = [&p_inertia, &m2a, &m2g, &m0g, &mem, &p_friction, &p_source]
            .iter()
            .map(|x| inf_norm(x))
            .fold(0.0, f64::max);
        Ok(Evaluated { residual, scale })
    }

    pub fn jacobian(&self, a: &DVector<f64>) -> DMatrix<f64> {
        let (g, v) = self.fields(a);
        let phi = self.basis.phi();
        let uq = phi * &g;
        let vq = phi * &v;
        let aq = phi * a;
        let p = self.params;
        let w = self.basis.weights();
        let diag = DVector::from_fn(uq.len(), |q, _| {
            let mut c = p.inertia_weight(vq[q]);
            if self.cv != 0.0 {
                c += self.cv * (p.inertia_weight_slope(vq[q]) * aq[q] + p.damping.derivative(vq[q]));
            }
            if self.cg != 0.0 && p.k != 0.0 {
                c -= p.k * self.cg * (ln_abs_clamped(uq[q]) + 1.0);
            }
            c * w[q]
        });
        let mut scaled = phi.clone();
        for (mut row, d) in scaled.row_iter_mut().zip(diag.iter()) {
            row *= *d;
        }
        let mut jac = phi.tr_mul(&scaled);
        jac += &self.grams.m2 * (1.0 + self.cg - self.cg * self.memory_implicit);
        jac += &self.grams.m0 * self.cg;
        (&jac + jac.transpose()) * 0.5
    }

    pub fn solve(&self, a_start: &DVector<f64>, opts: &NewtonOptions) -> Result<(DVector<f64>, NewtonInfo)> {
        let mut a = a_start.clone();
        let mut last = f64::INFINITY;
        for iter in 0..=opts.max_iter {
            let ev = self.residual(&a)?;
            let r = inf_norm(&ev.residual);
            last = r;
            let floor = opts.roundoff_ulps * f64::EPSILON * ev.scale;
            if r <= opts.tol.max(floor) {
                return Ok((
                    a,
                    NewtonInfo {
                        iterations: iter,
                        residual: r,
                    },
                ));
            }
            if iter == opts.max_iter {
                break;
            }
            let jac = self.jacobian(&a);
            let delta = match jac.clone().cholesky() {
                Some(ch) => ch.solve(&ev.residual),
                None => jac.lu().solve(&ev.residual).ok_or(Error::NewtonFailed {
                    iterations: iter,
                    residual: r,
                })?,
            };
            a -= delta;
            if a.iter().any(|x| !x.is_finite()) {
                break;
            }
        }
        Err(Error::NewtonFailed {
            iterations: opts.max_iter,
            residual: last,
        })
    }
}

/// `R(a)` at a fixed state: displacement and velocity are taken from
/// `state`, the memory integral from `history` (whose newest snapshot must
/// be `state.g`).
pub fn residual(
    a: &DVector<f64>,
    state: &PlateState,
    params: &PhysicalParams,
    grams: &GramSet,
    basis: &Basis,
    history: &HistoryBuffer,
    table: &KernelTable,
) -> Result<DVector<f64>> {
    Ok(static_stage(state, params, grams, basis, history, table)
        .residual(a)?
        .residual)
}

fn static_stage<'a>(
    state: &PlateState,
    params: &'a PhysicalParams,
    grams: &'a GramSet,
    basis: &'a Basis,
    history: &HistoryBuffer,
    table: &KernelTable,
) -> Stage<'a> {
    let memory = if params.kernel.is_zero() || history.is_empty() {
        DVector::zeros(state.dim())
    } else {
        memory_coefficients(history, table)
    };
    Stage {
        basis,
        grams,
        params,
        t: state.t,
        g0: state.g.clone(),
        v0: state.v.clone(),
        cg: 0.0,
        cv: 0.0,
        memory,
        memory_implicit: 0.0,
    }
}

/// Jacobian `∂R/∂a` at a fixed state: the inertia mass plus `M2`.
pub fn accel_jacobian(
    a: &DVector<f64>,
    state: &PlateState,
    params: &PhysicalParams,
    grams: &GramSet,
    basis: &Basis,
    history: &HistoryBuffer,
    table: &KernelTable,
) -> DMatrix<f64> {
    static_stage(state, params, grams, basis, history, table).jacobian(a)
}

/// Solves `R(a) = 0` at a fixed state, starting from `state.a`.
pub fn newton_solve_accel(
    state: &PlateState,
    params: &PhysicalParams,
    grams: &GramSet,
    basis: &Basis,
    history: &HistoryBuffer,
    table: &KernelTable,
    opts: &NewtonOptions,
) -> Result<(DVector<f64>, NewtonInfo)> {
    static_stage(state, params, grams, basis, history, table).solve(&state.a, opts)
}
