use nalgebra::DVector;

/// Galerkin coefficients of displacement, velocity and acceleration at one
/// time level.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateState {
    pub t: f64,
    pub g: DVector<f64>,
    pub v: DVector<f64>,
    pub a: DVector<f64>,
    pub step_index: usize,
}

impl PlateState {
    pub fn at_rest(dim: usize) -> Self {
        Self {
            t: 0.0,
            g: DVector::zeros(dim),
            v: DVector::zeros(dim),
            a: DVector::zeros(dim),
            step_index: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn is_finite(&self) -> bool {
        self.g
            .iter()
            .chain(self.v.iter())
            .chain(self.a.iter())
            .all(|x| x.is_finite())
    }
}
