//! Residual maps `r: Rⁿ → Rᵐ` and the least-squares objective `f(x) = ½‖r(x)‖²`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

/// A residual map with an optional analytic Jacobian.
///
/// Implementations must be pure: repeated evaluation at the same point
/// returns bitwise-identical output.
pub trait Residual: Send + Sync {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64>;

    fn jacobian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }
}

/// Wraps closures as a [`Residual`].
pub struct FnResidual<R, J = fn(&DVector<f64>) -> DMatrix<f64>> {
    eval: R,
    jac: Option<J>,
}

impl<R> FnResidual<R>
where
    R: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
{
    pub fn new(eval: R) -> Self {
        Self { eval, jac: None }
    }
}

impl<R, J> FnResidual<R, J>
where
    R: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
    J: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync,
{
    pub fn with_jacobian(eval: R, jac: J) -> Self {
        Self {
            eval,
            jac: Some(jac),
        }
    }
}

impl<R, J> Residual for FnResidual<R, J>
where
    R: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
    J: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync,
{
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.eval)(x)
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.jac.as_ref().map(|j| j(x))
    }
}

/// How a benchmark harness chooses starting points for a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartRule {
    /// Use the stored `x0`, optionally scaled by 1, 10 and 100.
    Fixed,
    /// Draw `x0 = factor · v` with `v ~ N(0, I)` per repetition.
    Gaussian { factor: f64 },
}

#[derive(Clone)]
pub struct ResidualProblem {
    pub id: String,
    pub n: usize,
    pub m: usize,
    /// Canonical start point. For [`StartRule::Gaussian`] problems this is
    /// only a reproducible fallback; harnesses draw their own.
    pub x0: DVector<f64>,
    /// Known optimal value of `½‖r(x)‖²`.
    pub f_star: Option<f64>,
    pub x_star: Option<DVector<f64>>,
    pub start: StartRule,
    model: Arc<dyn Residual>,
}

impl fmt::Debug for ResidualProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResidualProblem")
            .field("id", &self.id)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("f_star", &self.f_star)
            .field("start", &self.start)
            .finish_non_exhaustive()
    }
}

impl ResidualProblem {
    pub fn new(
        id: impl Into<String>,
        n: usize,
        m: usize,
        x0: DVector<f64>,
        model: impl Residual + 'static,
    ) -> Self {
        Self::from_arc(id, n, m, x0, Arc::new(model))
    }

    pub fn from_arc(
        id: impl Into<String>,
        n: usize,
        m: usize,
        x0: DVector<f64>,
        model: Arc<dyn Residual>,
    ) -> Self {
        assert!(n > 0 && m > 0, "problem dimensions must be positive");
        assert_eq!(x0.len(), n, "start point has wrong length");
        Self {
            id: id.into(),
            n,
            m,
            x0,
            f_star: None,
            x_star: None,
            start: StartRule::Fixed,
            model,
        }
    }

    pub fn with_f_star(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }

    pub fn with_x_star(mut self, x_star: DVector<f64>) -> Self {
        assert_eq!(x_star.len(), self.n);
        self.x_star = Some(x_star);
        self
    }

    pub fn with_start(mut self, start: StartRule) -> Self {
        self.start = start;
        self
    }

    pub fn model(&self) -> &Arc<dyn Residual> {
        &self.model
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.n);
        let r = self.model.residuals(x);
        assert_eq!(r.len(), self.m, "residual map `{}` returned wrong length", self.id);
        r
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let j = self.model.jacobian(x)?;
        assert_eq!(j.shape(), (self.m, self.n));
        Some(j)
    }

    pub fn has_jacobian(&self) -> bool {
        self.model.jacobian(&self.x0).is_some()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.eval(x).norm_squared()
    }

    /// Exact gradient `J(x)ᵀ r(x)`, when an analytic Jacobian exists.
    pub fn gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(self.jacobian(x)?.transpose() * self.eval(x))
    }
}

/// Central-difference Jacobian, used to check hand-coded Jacobians.
pub fn central_difference_jacobian(problem: &ResidualProblem, x: &DVector<f64>) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(problem.m, problem.n);
    for j in 0..problem.n {
        let h = 1e-6 * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let col = (problem.eval(&xp) - problem.eval(&xm)) / (2.0 * h);
        jac.set_column(j, &col);
    }
    jac
}

/// Relative max-norm discrepancy between the analytic and central-difference
/// Jacobians at `x`. Returns `None` when the problem has no analytic Jacobian.
pub fn jacobian_discrepancy(problem: &ResidualProblem, x: &DVector<f64>) -> Option<f64> {
    let analytic = problem.jacobian(x)?;
    let numeric = central_difference_jacobian(problem, x);
    let scale = analytic.amax().max(1.0);
    Some((analytic - numeric).amax() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic() -> ResidualProblem {
        ResidualProblem::new(
            "q",
            2,
            2,
            DVector::from_vec(vec![1.0, 1.0]),
            FnResidual::with_jacobian(
                |x: &DVector<f64>| DVector::from_vec(vec![x[0] * x[0], x[0] * x[1]]),
                |x: &DVector<f64>| DMatrix::from_row_slice(2, 2, &[2.0 * x[0], 0.0, x[1], x[0]]),
            ),
        )
    }

    #[test]
    fn objective_is_half_squared_norm() {
        let p = quadratic();
        let x = DVector::from_vec(vec![2.0, 3.0]);
        assert_eq!(p.objective(&x), 0.5 * (16.0 + 36.0));
    }

    #[test]
    fn gradient_uses_analytic_jacobian() {
        let p = quadratic();
        let x = DVector::from_vec(vec![2.0, 3.0]);
        let g = p.gradient(&x).unwrap();
        // J = [[4,0],[3,2]], r = (4,6)
        assert_eq!(g.as_slice(), &[4.0 * 4.0 + 3.0 * 6.0, 2.0 * 6.0]);
    }

    #[test]
    fn discrepancy_is_small_for_correct_jacobian() {
        let p = quadratic();
        let d = jacobian_discrepancy(&p, &DVector::from_vec(vec![0.3, -1.7])).unwrap();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn missing_jacobian_reported() {
        let p = ResidualProblem::new(
            "nojac",
            1,
            1,
            DVector::from_element(1, 0.0),
            FnResidual::new(|x: &DVector<f64>| x.clone()),
        );
        assert!(!p.has_jacobian());
        assert!(jacobian_discrepancy(&p, &p.x0).is_none());
    }

    #[test]
    #[should_panic(expected = "wrong length")]
    fn wrong_residual_length_panics() {
        let p = ResidualProblem::new(
            "bad",
            1,
            2,
            DVector::from_element(1, 0.0),
            FnResidual::new(|x: &DVector<f64>| x.clone()),
        );
        p.eval(&p.x0);
    }
}
