use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric::gauss_legendre_on;
use crate::spectral::beam::{beam_roots, BeamMode};

/// Smallest Gauss–Legendre order accepted for `n` modes per axis.
pub fn min_quad_order(n: usize) -> usize {
    2 * n + 4
}

/// Default quadrature order for `n` modes per axis.
pub fn default_quad_order(n: usize) -> usize {
    4 * n + 16
}

/// Clamped–clamped beam modes on `(0, L)`, or their tensor products on
/// `(0, L)²`, with the Gauss–Legendre tables used by every integral.
///
/// Mode `j = (i₁, i₂)` of the plane basis has flat index `i₁ n + i₂`;
/// quadrature node `(q₁, q₂)` has flat index `q₁ Q + q₂`.
#[derive(Debug, Clone)]
pub struct Basis {
    spatial_dim: usize,
    n: usize,
    length: f64,
    quad_order: usize,
    modes: Vec<BeamMode>,
    /// `1/‖w_i‖` for the 1D factors.
    scale: Vec<f64>,
    axis_nodes: Vec<f64>,
    axis_weights: Vec<f64>,
    weights: DVector<f64>,
    /// `w_j(x_q)`, one row per node.
    phi: DMatrix<f64>,
    /// `Δw_j(x_q)`.
    lap: DMatrix<f64>,
    /// Components of `∇w_j(x_q)`.
    grad: Vec<DMatrix<f64>>,
}

pub fn build_basis(spatial_dim: usize, n: usize, length: f64, quad_order: usize) -> Result<Basis> {
    if spatial_dim != 1 && spatial_dim != 2 {
        return Err(Error::input(format!("spatial_dim must be 1 or 2, got {spatial_dim}")));
    }
    if n == 0 {
        return Err(Error::input("need at least one mode per axis"));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::input(format!("domain length must be positive, got {length}")));
    }
    if quad_order < min_quad_order(n) {
        return Err(Error::input(format!(
            "quadrature order {quad_order} is below {} for {n} modes per axis",
            min_quad_order(n)
        )));
    }
    let modes: Vec<BeamMode> = beam_roots(n).into_iter().map(BeamMode::new).collect();
    let (axis_nodes, axis_weights) = gauss_legendre_on(quad_order, 0.0, length);

    let axis_table = |k: usize| DMatrix::from_fn(quad_order, n, |q, i| modes[i].eval(axis_nodes[q], length, k));
    let raw = axis_table(0);
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let norm2: f64 = (0..quad_order).map(|q| axis_weights[q] * raw[(q, i)].powi(2)).sum();
            1.0 / norm2.sqrt()
        })
        .collect();
    let normalize = |mut m: DMatrix<f64>| {
        for (i, s) in scale.iter().enumerate() {
            m.column_mut(i).scale_mut(*s);
        }
        m
    };
    let p0 = normalize(raw);
    let p1 = normalize(axis_table(1));
    let p2 = normalize(axis_table(2));

    let (weights, phi, lap, grad) = if spatial_dim == 1 {
        (DVector::from_vec(axis_weights.clone()), p0, p2, vec![p1])
    } else {
        let nq = quad_order * quad_order;
        let m = n * n;
        let tensor = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
            DMatrix::from_fn(nq, m, |q, j| {
                let (q1, q2) = (q / quad_order, q % quad_order);
                let (i1, i2) = (j / n, j % n);
                a[(q1, i1)] * b[(q2, i2)]
            })
        };
        let w = DVector::from_fn(nq, |q, _| axis_weights[q / quad_order] * axis_weights[q % quad_order]);
        let lap = tensor(&p2, &p0) + tensor(&p0, &p2);
        (w, tensor(&p0, &p0), lap, vec![tensor(&p1, &p0), tensor(&p0, &p1)])
    };

    Ok(Basis {
        spatial_dim,
        n,
        length,
        quad_order,
        modes,
        scale,
        axis_nodes,
        axis_weights,
        weights,
        phi,
        lap,
        grad,
    })
}

impl Basis {
    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    pub fn modes_per_axis(&self) -> usize {
        self.n
    }

    /// Number of basis functions, `n` or `n²`.
    pub fn dim(&self) -> usize {
        self.phi.ncols()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    pub fn beam_roots(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.beta).collect()
    }

    pub fn axis_nodes(&self) -> &[f64] {
        &self.axis_nodes
    }

    pub fn axis_weights(&self) -> &[f64] {
        &self.axis_weights
    }

    pub fn num_nodes(&self) -> usize {
        self.weights.len()
    }

    /// Coordinates of quadrature node `q`.
    pub fn node(&self, q: usize) -> Vec<f64> {
        if self.spatial_dim == 1 {
            vec![self.axis_nodes[q]]
        } else {
            vec![
                self.axis_nodes[q / self.quad_order],
                self.axis_nodes[q % self.quad_order],
            ]
        }
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Area (or length) of the domain.
    pub fn measure(&self) -> f64 {
        self.length.powi(self.spatial_dim as i32)
    }

    /// `w_j` at the quadrature nodes, one row per node.
    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn laplacian_table(&self) -> &DMatrix<f64> {
        &self.lap
    }

    pub fn gradient_tables(&self) -> &[DMatrix<f64>] {
        &self.grad
    }

    /// Synthesizes `Σ g_j w_j` at every quadrature node.
    pub fn synthesize(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        &self.phi * coeffs
    }

    /// `Σ_q ω_q f_q w_j(x_q)` for each `j`.
    pub fn project_nodal(&self, nodal: &DVector<f64>) -> DVector<f64> {
        self.phi.tr_mul(&nodal.component_mul(&self.weights))
    }

    /// Quadrature of nodal values.
    pub fn integrate(&self, nodal: &DVector<f64>) -> f64 {
        self.weights.dot(nodal)
    }

    fn axis_value(&self, i: usize, x: f64, k: usize) -> f64 {
        self.modes[i].eval(x, self.length, k) * self.scale[i]
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.iter().any(|&x| !(x >= 0.0 && x <= self.length)) {
            return Err(Error::input(format!(
                "point {p:?} lies outside the domain (0, {})^{}",
                self.length, self.spatial_dim
            )));
        }
        Ok(())
    }

    /// Value of basis function `j` at `p`. In the plane `derivs = [k₁, k₂]`
    /// gives the mixed partial `∂^{k₁}_x ∂^{k₂}_y`; on the line only the
    /// first entry is used.
    pub fn mode_value(&self, j: usize, p: &[f64], derivs: [usize; 2]) -> Result<f64> {
        if p.len() != self.spatial_dim {
            return Err(Error::input(format!(
                "point {p:?} has {} coordinates, expected {}",
                p.len(),
                self.spatial_dim
            )));
        }
        self.check_point(p)?;
        if j >= self.dim() {
            return Err(Error::input(format!("mode index {j} out of range {}", self.dim())));
        }
        Ok(if self.spatial_dim == 1 {
            self.axis_value(j, p[0], derivs[0])
        } else {
            let (i1, i2) = (j / self.n, j % self.n);
            self.axis_value(i1, p[0], derivs[0]) * self.axis_value(i2, p[1], derivs[1])
        })
    }

    fn mode_laplacian(&self, j: usize, p: &[f64]) -> Result<f64> {
        if self.spatial_dim == 1 {
            self.mode_value(j, p, [2, 0])
        } else {
            Ok(self.mode_value(j, p, [2, 0])? + self.mode_value(j, p, [0, 2])?)
        }
    }
}

fn chunked(basis: &Basis, points: &[f64]) -> Result<Vec<Vec<f64>>> {
    let d = basis.spatial_dim;
    if !points.len().is_multiple_of(d) {
        return Err(Error::input(format!(
            "{} coordinates do not form whole {d}-dimensional points",
            points.len()
        )));
    }
    Ok(points.chunks(d).map(<[f64]>::to_vec).collect())
}

fn check_coeffs(coeffs: &DVector<f64>, basis: &Basis) -> Result<()> {
    if coeffs.len() != basis.dim() {
        return Err(Error::input(format!(
            "{} coefficients for a basis of dimension {}",
            coeffs.len(),
            basis.dim()
        )));
    }
    Ok(())
}

/// `Σ g_j w_j(x)` at each point. `points` holds the coordinates of
/// consecutive points back to back (`spatial_dim` numbers per point).
pub fn eval_field(coeffs: &DVector<f64>, basis: &Basis, points: &[f64]) -> Result<Vec<f64>> {
    check_coeffs(coeffs, basis)?;
    chunked(basis, points)?
        .iter()
        .map(|p| (0..basis.dim()).try_fold(0.0, |acc, j| Ok(acc + coeffs[j] * basis.mode_value(j, p, [0, 0])?)))
        .collect()
}

/// `Σ g_j Δw_j(x)` at each point, same layout as [`eval_field`].
pub fn eval_laplacian(coeffs: &DVector<f64>, basis: &Basis, points: &[f64]) -> Result<Vec<f64>> {
    check_coeffs(coeffs, basis)?;
    chunked(basis, points)?
        .iter()
        .map(|p| (0..basis.dim()).try_fold(0.0, |acc, j| Ok(acc + coeffs[j] * basis.mode_laplacian(j, p)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refuses_underresolved_quadrature() {
        assert!(build_basis(1, 8, 1.0, 19).is_err());
        assert!(build_basis(1, 8, 1.0, 20).is_ok());
        assert!(build_basis(3, 2, 1.0, 20).is_err());
    }

    #[test]
    fn clamped_boundary_1d() {
        let b = build_basis(1, 10, 2.0, default_quad_order(10)).unwrap();
        for j in 0..b.dim() {
            for x in [0.0, 2.0] {
                assert!(b.mode_value(j, &[x], [0, 0]).unwrap().abs() < 1e-8);
                assert!(b.mode_value(j, &[x], [1, 0]).unwrap().abs() < 1e-8);
            }
        }
    }

    #[test]
    fn clamped_boundary_2d_normal_derivative() {
        let b = build_basis(2, 4, 1.0, default_quad_order(4)).unwrap();
        for j in 0..b.dim() {
            for s in 0..20 {
                let y = s as f64 / 19.0;
                for (p, d) in [
                    ([0.0, y], [1, 0]),
                    ([1.0, y], [1, 0]),
                    ([y, 0.0], [0, 1]),
                    ([y, 1.0], [0, 1]),
                ] {
                    assert!(b.mode_value(j, &p, [0, 0]).unwrap().abs() < 1e-8);
                    assert!(b.mode_value(j, &p, d).unwrap().abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn nodal_tables_agree_with_pointwise_evaluation() {
        let b = build_basis(2, 3, 1.5, default_quad_order(3)).unwrap();
        let g = DVector::from_fn(b.dim(), |i, _| 0.1 * i as f64 - 0.3);
        let nodal = b.synthesize(&g);
        let lap = b.laplacian_table() * &g;
        for q in [0, 17, b.num_nodes() - 1] {
            let p = b.node(q);
            assert!((eval_field(&g, &b, &p).unwrap()[0] - nodal[q]).abs() < 1e-12);
            assert!((eval_laplacian(&g, &b, &p).unwrap()[0] - lap[q]).abs() < 1e-9);
        }
    }

    #[test]
    fn eval_rejects_outside_points() {
        let b = build_basis(1, 2, 1.0, 8).unwrap();
        let g = DVector::from_element(2, 1.0);
        assert!(eval_field(&g, &b, &[1.5]).is_err());
        assert_eq!(
            eval_field(&DVector::zeros(2), &b, &[0.25, 0.5]).unwrap(),
            vec![0.0, 0.0]
        );
    }
}
