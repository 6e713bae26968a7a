use nalgebra::{DMatrix, DVector};

use crate::kernels::RelaxationKernel;
use crate::numeric::trapezoid_weight;

/// Snapshots `g(t_i)` on the uniform grid `t_i = i Δt`, together with
/// `z_i = Lᵀ g_i` where `M2 = L Lᵀ`, so that
/// `‖Δu(t_i) - Δu(t_j)‖² = ‖z_i - z_j‖²`.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    dt: f64,
    g: Vec<DVector<f64>>,
    z: Vec<DVector<f64>>,
    factor_t: DMatrix<f64>,
}

impl HistoryBuffer {
    /// `m2_factor` is the lower Cholesky factor of `M2`.
    pub fn new(dt: f64, m2_factor: &DMatrix<f64>) -> Self {
        Self {
            dt,
            g: Vec::new(),
            z: Vec::new(),
            factor_t: m2_factor.transpose(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn push(&mut self, g: DVector<f64>) {
        self.z.push(&self.factor_t * &g);
        self.g.push(g);
    }

    pub fn snapshots(&self) -> &[DVector<f64>] {
        &self.g
    }

    pub fn bending_coords(&self) -> &[DVector<f64>] {
        &self.z
    }

    pub fn last(&self) -> Option<&DVector<f64>> {
        self.g.last()
    }

    /// Time of the newest snapshot.
    pub fn time(&self) -> f64 {
        self.dt * (self.len().max(1) - 1) as f64
    }
}

/// `b(iΔt)` and `b'(iΔt)` for the uniform grid.
#[derive(Debug, Clone)]
pub struct KernelTable {
    dt: f64,
    b: Vec<f64>,
    db: Vec<f64>,
}

impl KernelTable {
    pub fn new(kernel: &RelaxationKernel, dt: f64, len: usize) -> Self {
        Self {
            dt,
            b: (0..len).map(|i| kernel.value(i as f64 * dt)).collect(),
            db: (0..len).map(|i| kernel.derivative(i as f64 * dt)).collect(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.b[i]
    }

    pub fn derivative(&self, i: usize) -> f64 {
        self.db[i]
    }
}

/// Coefficients of `∫₀^{t_n} b(t_n - s) g(s) ds` by the trapezoid rule on
/// the stored history, `t_n` being the newest snapshot.
pub fn memory_coefficients(history: &HistoryBuffer, table: &KernelTable) -> DVector<f64> {
    let n = history.len();
    let mut acc = DVector::zeros(history.g.first().map_or(0, |g| g.len()));
    for (i, g) in history.g.iter().enumerate() {
        let w = trapezoid_weight(i, n);
        if w != 0.0 {
            acc.axpy(w * history.dt * table.value(n - 1 - i), g, 1.0);
        }
    }
    acc
}

/// Explicit part of `∫₀^{t_n+τ} b(t_n + τ - s) g(s) ds`: the trapezoid rule
/// on the stored history plus one panel over `[t_n, t_n + τ]` whose right
/// end (weight `½τ b(0)` on the unknown `g(t_n+τ)`) is left out.
pub fn memory_coefficients_ahead(
    history: &HistoryBuffer,
    kernel: &RelaxationKernel,
    table: &KernelTable,
    tau: f64,
) -> DVector<f64> {
    let n = history.len();
    let Some(last) = history.g.last() else {
        return DVector::zeros(0);
    };
    let exact_step = tau == history.dt;
    let b_at = |lag: usize| {
        if exact_step && lag + 1 < table.len() {
            table.value(lag + 1)
        } else {
            kernel.value(lag as f64 * history.dt + tau)
        }
    };
    let mut acc = DVector::zeros(last.len());
    for (i, g) in history.g.iter().enumerate() {
        let w = trapezoid_weight(i, n);
        if w != 0.0 {
            acc.axpy(w * history.dt * b_at(n - 1 - i), g, 1.0);
        }
    }
    acc.axpy(0.5 * tau * b_at(0), last, 1.0);
    acc
}

/// `M2 · memory_coefficients`.
pub fn memory_term(history: &HistoryBuffer, table: &KernelTable, m2: &DMatrix<f64>) -> DVector<f64> {
    if history.is_empty() {
        return DVector::zeros(m2.nrows());
    }
    m2 * memory_coefficients(history, table)
}

/// `(b∘Δu)(t_n)` and `(b'∘Δu)(t_n)` at the newest snapshot.
pub fn memory_forms(history: &HistoryBuffer, table: &KernelTable) -> (f64, f64) {
    let n = history.len();
    if n < 2 {
        return (0.0, 0.0);
    }
    let zt = &history.z[n - 1];
    let (mut b_form, mut db_form) = (0.0, 0.0);
    for (i, z) in history.z.iter().enumerate().take(n - 1) {
        let w = trapezoid_weight(i, n) * history.dt;
        let d2 = (z - zt).norm_squared();
        b_form += w * table.value(n - 1 - i) * d2;
        db_form += w * table.derivative(n - 1 - i) * d2;
    }
    (b_form, db_form)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_history(dt: f64, values: &[f64]) -> HistoryBuffer {
        let mut h = HistoryBuffer::new(dt, &DMatrix::identity(1, 1));
        for v in values {
            h.push(DVector::from_element(1, *v));
        }
        h
    }

    #[test]
    fn constant_history_convolution() {
        let kernel = RelaxationKernel::exponential(1.0, 1.0).unwrap();
        let dt = 1e-3;
        let n = 2001;
        let h = identity_history(dt, &vec![1.0; n]);
        let table = KernelTable::new(&kernel, dt, n);
        let c = memory_coefficients(&h, &table)[0];
        let t = dt * (n - 1) as f64;
        assert!((c - (1.0 - (-t).exp())).abs() < 1e-6);
        assert_eq!(memory_forms(&h, &table), (0.0, 0.0));
    }

    #[test]
    fn ahead_matches_uniform_after_push() {
        let kernel = RelaxationKernel::power(0.5, 2.0).unwrap();
        let dt = 0.01;
        let vals: Vec<f64> = (0..50).map(|i| (0.1 * i as f64).sin()).collect();
        let mut h = identity_history(dt, &vals);
        let table = KernelTable::new(&kernel, dt, 60);
        let ahead = memory_coefficients_ahead(&h, &kernel, &table, dt)[0];
        let next = 5.0f64.sin();
        h.push(DVector::from_element(1, next));
        let full = memory_coefficients(&h, &table)[0];
        assert!((ahead + 0.5 * dt * kernel.value(0.0) * next - full).abs() < 1e-15);
    }

    #[test]
    fn zero_kernel_gives_zero_term() {
        let h = identity_history(0.1, &[1.0, 2.0, 3.0]);
        let table = KernelTable::new(&RelaxationKernel::zero(), 0.1, 4);
        assert_eq!(memory_term(&h, &table, &DMatrix::identity(1, 1))[0], 0.0);
    }
}
