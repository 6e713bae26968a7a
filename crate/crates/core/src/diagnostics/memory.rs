use nalgebra::DVector;
use serde::Serialize;

use crate::diagnostics::energy::kernel_mass;
use crate::dynamics::{memory_forms, HistoryBuffer, KernelTable, PhysicalParams, PlateState};
use crate::error::{Error, Result};
use crate::kernels::{ConvexModulus, RelaxationKernel, XiWeight};
use crate::numeric::trapezoid_weight;
use crate::spectral::Basis;

/// Default fraction of the admissible `δ` range used in the tail bound.
pub const DEFAULT_DELTA: f64 = 0.5;

/// Both sides of the two Cauchy–Schwarz bounds on the memory convolution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MemoryGaps {
    /// `‖∫b(t-s)(Δu(t) - Δu(s)) ds‖²`.
    pub lhs_b: f64,
    /// `c_b (b∘Δu)(t)`.
    pub rhs_b: f64,
    pub gap_b: f64,
    /// `‖∫b'(t-s)(Δu(t) - Δu(s)) ds‖²`.
    pub lhs_db: f64,
    /// `-c_{b'} (b'∘Δu)(t)`.
    pub rhs_db: f64,
    pub gap_db: f64,
}

impl MemoryGaps {
    pub fn min_gap(&self) -> f64 {
        self.gap_b.min(self.gap_db)
    }
}

/// Evaluates both bounds at the newest snapshot. The constants are
/// `c_b = max(1 - l, Σ w b)` and `c_{b'} = max(b(0), Σ w (-b'))`: the
/// discrete sums are the exact constants for the trapezoid rule and exceed
/// the continuous ones by `O(Δt²)`.
pub fn memory_cs_check(history: &HistoryBuffer, table: &KernelTable, kernel: &RelaxationKernel) -> MemoryGaps {
    let len = history.len();
    if len < 2 || kernel.is_zero() {
        return MemoryGaps::default();
    }
    let n = len - 1;
    let z = history.bending_coords();
    let zt = &z[n];
    let dt = history.dt();
    let mut conv_b = DVector::zeros(zt.len());
    let mut conv_db = DVector::zeros(zt.len());
    let mut mass_db = 0.0;
    for (i, zi) in z.iter().enumerate() {
        let w = trapezoid_weight(i, len) * dt;
        let diff = zt - zi;
        conv_b.axpy(w * table.value(n - i), &diff, 1.0);
        conv_db.axpy(w * table.derivative(n - i), &diff, 1.0);
        mass_db -= w * table.derivative(n - i);
    }
    let (form_b, form_db) = memory_forms(history, table);
    let c_b = kernel.total_integral().max(kernel_mass(table, n));
    let c_db = kernel.initial().max(mass_db);
    let lhs_b = conv_b.norm_squared();
    let lhs_db = conv_db.norm_squared();
    let rhs_b = c_b * form_b;
    let rhs_db = -c_db * form_db;
    MemoryGaps {
        lhs_b,
        rhs_b,
        gap_b: rhs_b - lhs_b,
        lhs_db,
        rhs_db,
        gap_db: rhs_db - lhs_db,
    }
}

/// Frictional and memory-tail quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DampingDiagnostics {
    pub t: f64,
    /// Mean of `u_t h(u_t)` over `Ω₁ = {|u_t| ≤ ε}`.
    #[serde(rename = "G")]
    pub g: f64,
    /// `|Ω₁| / |Ω|`.
    pub omega1_fraction: f64,
    /// `Ω₁` has no quadrature node, `G` set to 0.
    pub omega1_empty: bool,
    /// `∫u_t h(u_t)`.
    pub dissipation: f64,
    /// `-∫_{t₁}^t b'(s)‖Δu(t) - Δu(t-s)‖² ds`.
    #[serde(rename = "M")]
    pub m: f64,
    /// `∫_{t₁}^t b(s)‖Δu(t) - Δu(t-s)‖² ds`.
    pub tail: f64,
    /// `(t-t₁)/δ · B̄⁻¹(δM / ((t-t₁)ξ(t)))`.
    pub tail_bound: Option<f64>,
    /// `δ/(t-t₁) ∫_{t₁}^t ‖Δu(t) - Δu(t-s)‖² ds`, which the bound needs below 1.
    pub tail_weight: f64,
    /// The `δ` actually used.
    pub delta: f64,
}

impl DampingDiagnostics {
    /// `None` when no bound was computed.
    pub fn tail_holds(&self) -> Option<bool> {
        self.tail_bound
            .map(|b| b >= self.tail - 1e-12 * self.tail.abs().max(b.abs()) - 1e-300)
    }
}

/// Modulus data for the tail bound.
#[derive(Debug, Clone, Copy)]
pub struct TailLaw<'a> {
    pub xi: &'a XiWeight,
    /// Extended modulus `B̄`.
    pub modulus: &'a ConvexModulus,
    /// Fraction of the admissible range: `δ = delta · min(1, (t-t₁)/∫‖Δu(t) - Δu(t-s)‖²)`,
    /// which keeps the Jensen weight at most `delta`.
    pub delta: f64,
}

/// `G`, `M`, the dissipation and the tail bound at the newest snapshot of
/// `history`, which must be `state.g`. Lags are taken on the history grid
/// from the one nearest `t₁`; before `t₁` the memory quantities stay 0.
pub fn damping_diag(
    state: &PlateState,
    params: &PhysicalParams,
    basis: &Basis,
    history: &HistoryBuffer,
    table: &KernelTable,
    t1: f64,
    tail_law: Option<TailLaw<'_>>,
) -> Result<DampingDiagnostics> {
    let w = basis.weights();
    let vq = basis.synthesize(&state.v);
    let eps = params.damping.eps();
    let (mut in_mass, mut in_int, mut diss) = (0.0, 0.0, 0.0);
    for (q, &v) in vq.iter().enumerate() {
        let p = v * params.damping.value(v);
        diss += w[q] * p;
        if v.abs() <= eps {
            in_mass += w[q];
            in_int += w[q] * p;
        }
    }
    let mut out = DampingDiagnostics {
        t: state.t,
        g: if in_mass > 0.0 { in_int / in_mass } else { 0.0 },
        omega1_fraction: in_mass / basis.measure(),
        omega1_empty: in_mass == 0.0,
        dissipation: diss,
        ..Default::default()
    };
    let len = history.len();
    if len < 2 || params.kernel.is_zero() {
        return Ok(out);
    }
    let n = len - 1;
    let dt = history.dt();
    let t = n as f64 * dt;
    if !(t1 >= 0.0) {
        return Err(Error::input(format!("t1 must be ≥ 0, got {t1}")));
    }
    let j1 = ((t1 / dt).round() as usize).min(n);
    let lags = n - j1 + 1;
    if lags < 2 {
        return Ok(out);
    }
    let z = history.bending_coords();
    let (mut m, mut tail, mut spread) = (0.0, 0.0, 0.0);
    for (k, j) in (j1..=n).enumerate() {
        let wk = trapezoid_weight(k, lags) * dt;
        let d2 = (&z[n] - &z[n - j]).norm_squared();
        m -= wk * table.derivative(j) * d2;
        tail += wk * table.value(j) * d2;
        spread += wk * d2;
    }
    out.m = m;
    out.tail = tail;
    let span = (n - j1) as f64 * dt;
    if let Some(law) = tail_law {
        if !(law.delta > 0.0 && law.delta < 1.0) {
            return Err(Error::domain(format!("δ must lie in (0, 1), got {}", law.delta)));
        }
        let delta = if spread > span {
            law.delta * span / spread
        } else {
            law.delta
        };
        out.delta = delta;
        out.tail_weight = delta * spread / span;
        let xi_t = law.xi.value(t);
        let y = delta * m / (span * xi_t);
        out.tail_bound = Some(span / delta * law.modulus.inverse(y)?);
    }
    Ok(out)
}
