//! Derivative-free Jacobian models and the gradient model `∇f̃ = J̃ᵀ r`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::directions::DirectionFrame;
use crate::error::{Error, Result};
use crate::problem::ResidualProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateMethod {
    /// Orthogonal spherical smoothing along a random frame.
    Oss,
    /// Forward differences along coordinate axes.
    Fd,
}

#[derive(Debug, Clone)]
pub struct JacobianEstimate {
    pub jm: DMatrix<f64>,
    /// Residual-vector evaluations consumed. The center value is supplied by
    /// the caller and is not counted here.
    pub nf_cost: usize,
    pub gamma: f64,
    pub method: EstimateMethod,
}

fn check_inputs(problem: &ResidualProblem, x: &DVector<f64>, r_x: &DVector<f64>, gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Parameter(format!("smoothing step must be positive, got {gamma}")));
    }
    if x.len() != problem.n || r_x.len() != problem.m {
        return Err(Error::Dimension(format!(
            "expected x ∈ R^{} and r(x) ∈ R^{}",
            problem.n, problem.m
        )));
    }
    Ok(())
}

/// OSS Jacobian `(n/(bγ)) · ΔR · Uᵀ`, where column `j` of `ΔR` is
/// `r(x + γuⱼ) − r(x)`. Row `i` equals `(n/b) Σⱼ (rᵢ(x+γuⱼ) − rᵢ(x))/γ · uⱼᵀ`.
pub fn estimate_oss(
    problem: &ResidualProblem,
    x: &DVector<f64>,
    r_x: &DVector<f64>,
    frame: &DirectionFrame,
    gamma: f64,
) -> Result<JacobianEstimate> {
    check_inputs(problem, x, r_x, gamma)?;
    if frame.n() != problem.n {
        return Err(Error::Dimension(format!(
            "frame has {} rows, problem has n={}",
            frame.n(),
            problem.n
        )));
    }
    let (n, b) = (frame.n(), frame.b());
    let u = frame.matrix();
    let mut delta = DMatrix::zeros(problem.m, b);
    for j in 0..b {
        let point = x + gamma * u.column(j);
        let r = problem.eval(&point);
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow);
        }
        delta.set_column(j, &(r - r_x));
    }
    let jm = (delta * u.transpose()) * (n as f64 / (b as f64 * gamma));
    if jm.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok(JacobianEstimate {
        jm,
        nf_cost: b,
        gamma,
        method: EstimateMethod::Oss,
    })
}

/// Forward-difference Jacobian, column `j` = `(r(x + γeⱼ) − r(x))/γ`.
pub fn estimate_fd(
    problem: &ResidualProblem,
    x: &DVector<f64>,
    r_x: &DVector<f64>,
    gamma: f64,
) -> Result<JacobianEstimate> {
    check_inputs(problem, x, r_x, gamma)?;
    let mut jm = DMatrix::zeros(problem.m, problem.n);
    for j in 0..problem.n {
        let mut point = x.clone();
        point[j] += gamma;
        let r = problem.eval(&point);
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow);
        }
        let col = (r - r_x) / gamma;
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow);
        }
        jm.set_column(j, &col);
    }
    Ok(JacobianEstimate {
        jm,
        nf_cost: problem.n,
        gamma,
        method: EstimateMethod::Fd,
    })
}

pub fn gradient_model(jm: &DMatrix<f64>, r_x: &DVector<f64>) -> DVector<f64> {
    jm.tr_mul(r_x)
}
