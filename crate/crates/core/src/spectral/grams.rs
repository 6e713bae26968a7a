use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::spectral::basis::Basis;

/// Tolerance of the power iteration in [`estimate_cp`].
pub const CP_TOLERANCE: f64 = 1e-10;

/// Mass, gradient and bending Gram matrices of a basis.
#[derive(Debug, Clone)]
pub struct GramSet {
    pub m0: DMatrix<f64>,
    pub m1: DMatrix<f64>,
    pub m2: DMatrix<f64>,
    m0_chol: Cholesky<f64, Dyn>,
    m2_chol: Cholesky<f64, Dyn>,
    m2_condition: f64,
}

fn weighted_gram(table: &DMatrix<f64>, weights: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = table.clone();
    for (mut row, w) in scaled.row_iter_mut().zip(weights.iter()) {
        row *= *w;
    }
    let g = table.tr_mul(&scaled);
    (&g + g.transpose()) * 0.5
}

fn cholesky(name: &str, m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| {
        Error::Assembly(format!(
            "{name} is not positive definite; quadrature is probably underresolved"
        ))
    })
}

pub fn assemble_grams(basis: &Basis) -> Result<GramSet> {
    let w = basis.weights();
    let m0 = weighted_gram(basis.phi(), w);
    let m2 = weighted_gram(basis.laplacian_table(), w);
    let mut m1 = DMatrix::zeros(basis.dim(), basis.dim());
    for g in basis.gradient_tables() {
        m1 += weighted_gram(g, w);
    }
    let m0_chol = cholesky("M0", &m0)?;
    cholesky("M1", &m1)?;
    let m2_chol = cholesky("M2", &m2)?;
    let eig = SymmetricEigen::new(m2.clone()).eigenvalues;
    let m2_condition = eig.max() / eig.min();
    Ok(GramSet {
        m0,
        m1,
        m2,
        m0_chol,
        m2_chol,
        m2_condition,
    })
}

impl GramSet {
    pub fn dim(&self) -> usize {
        self.m0.nrows()
    }

    pub fn m2_condition(&self) -> f64 {
        self.m2_condition
    }

    pub fn m0_cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.m0_chol
    }

    /// Lower factor `L` of `M2 = L Lᵀ`.
    pub fn m2_factor(&self) -> DMatrix<f64> {
        self.m2_chol.l()
    }

    pub fn m2_cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.m2_chol
    }

    /// `xᵀ M x`.
    pub fn quad(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
        x.dot(&(m * x))
    }
}

/// `L²` projection `M0⁻¹ [∫ f w_j]` of a pointwise field.
pub fn project_initial<F>(field: F, basis: &Basis, grams: &GramSet) -> DVector<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let nodal = DVector::from_fn(basis.num_nodes(), |q, _| field(&basis.node(q)));
    grams.m0_chol.solve(&basis.project_nodal(&nodal))
}

/// Largest `λ` with `M1 x = λ M2 x`, by power iteration on `M2⁻¹ M1`.
pub fn estimate_cp(grams: &GramSet) -> f64 {
    let n = grams.dim();
    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let y = grams.m2_chol.solve(&(&grams.m1 * &x));
        // Rayleigh quotient in the M2 inner product
        let next = x.dot(&(&grams.m1 * &x)) / x.dot(&(&grams.m2 * &x));
        let norm = GramSet::quad(&grams.m2, &y).sqrt();
        x = y / norm;
        if (next - lambda).abs() <= CP_TOLERANCE * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}

/// All generalized eigenvalues of `M1 x = λ M2 x`, ascending.
pub fn generalized_eigenvalues(grams: &GramSet) -> Vec<f64> {
    let l = grams.m2_chol.l();
    let linv = l.clone().try_inverse().expect("Cholesky factor is invertible");
    let s = &linv * &grams.m1 * linv.transpose();
    let s = (&s + s.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}
