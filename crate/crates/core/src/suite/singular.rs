//! Rank-deficient variants `r̂(x) = r(x) − J(x*) A (AᵀA)⁻¹ Aᵀ (x − x*)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::{Residual, ResidualProblem};

/// Smallest singular value below which `A` is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

pub struct SingularModification {
    base: Arc<dyn Residual>,
    x_star: DVector<f64>,
    /// `J(x*) A (AᵀA)⁻¹ Aᵀ`, fixed at construction.
    correction: DMatrix<f64>,
}

impl SingularModification {
    pub fn new(base: &ResidualProblem, x_star: &DVector<f64>, a: &DMatrix<f64>) -> Result<Self> {
        if x_star.len() != base.n || a.nrows() != base.n || a.ncols() == 0 || a.ncols() > base.n {
            return Err(Error::Dimension(format!(
                "need x* of length {n} and A of shape {n}×k with 1 ≤ k ≤ {n}",
                n = base.n
            )));
        }
        let jac_star = base
            .jacobian(x_star)
            .ok_or_else(|| Error::MissingJacobian(base.id.clone()))?;
        let sigma_min = a.clone().svd(false, false).singular_values.min();
        if !(sigma_min > RANK_TOL) {
            return Err(Error::SingularProjection);
        }
        let gram = a.transpose() * a;
        let chol = gram.cholesky().ok_or(Error::SingularProjection)?;
        let projection = a * chol.solve(&a.transpose());
        Ok(Self {
            base: base.model().clone(),
            x_star: x_star.clone(),
            correction: jac_star * projection,
        })
    }

    pub fn correction(&self) -> &DMatrix<f64> {
        &self.correction
    }
}

impl Residual for SingularModification {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        self.base.residuals(x) - &self.correction * (x - &self.x_star)
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(self.base.jacobian(x)? - &self.correction)
    }
}

/// The all-ones `n×1` matrix.
pub fn ones_column(n: usize) -> DMatrix<f64> {
    DMatrix::from_element(n, 1, 1.0)
}

/// Wraps `base` with the rank-reducing correction anchored at `x_star`.
/// The result keeps the base start point; its optimum is `x_star` with
/// `f* = ½‖r(x*)‖²`.
pub fn apply_singular_modification(
    base: &ResidualProblem,
    x_star: &DVector<f64>,
    a: &DMatrix<f64>,
) -> Result<ResidualProblem> {
    let modified = SingularModification::new(base, x_star, a)?;
    let f_star = 0.5 * base.eval(x_star).norm_squared();
    Ok(ResidualProblem::new(
        format!("{}-mod", base.id),
        base.n,
        base.m,
        base.x0.clone(),
        modified,
    )
    .with_f_star(f_star)
    .with_x_star(x_star.clone())
    .with_start(base.start))
}
