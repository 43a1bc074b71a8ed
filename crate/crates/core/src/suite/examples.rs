//! Small fixed-form least-squares problems used as the first four benchmark entries.

use nalgebra::{DMatrix, DVector};

use crate::problem::{Residual, ResidualProblem, StartRule};

const GAUSSIAN_START: StartRule = StartRule::Gaussian { factor: 10.0 };

/// Three coupled Rosenbrock-type residuals in R³.
pub struct CoupledRosenbrock;

impl Residual for CoupledRosenbrock {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let term = |a: f64, b: f64| 100.0 * (a - b * b).powi(2) + (1.0 - b).powi(2);
        DVector::from_vec(vec![term(x[0], x[1]), term(x[1], x[2]), term(x[2], x[0])])
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(3, 3);
        // row i couples (x_i, x_{i+1 mod 3})
        for i in 0..3 {
            let (a, b) = (x[i], x[(i + 1) % 3]);
            let inner = a - b * b;
            jac[(i, i)] += 200.0 * inner;
            jac[(i, (i + 1) % 3)] += -400.0 * inner * b - 2.0 * (1.0 - b);
        }
        Some(jac)
    }
}

pub fn coupled_rosenbrock() -> ResidualProblem {
    ResidualProblem::new("ex1", 3, 3, DVector::zeros(3), CoupledRosenbrock)
        .with_f_star(0.0)
        .with_x_star(DVector::from_element(3, 1.0))
        .with_start(GAUSSIAN_START)
}

/// Singular-at-the-solution quartic system, `x* = (1, …, 1, 0)`.
pub struct PowellQuartic {
    pub n: usize,
}

impl Residual for PowellQuartic {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let xn2 = x[n - 1] * x[n - 1];
        DVector::from_fn(n, |i, _| {
            if i + 1 < n {
                100.0 * ((x[i] * x[i] + xn2).powi(2) - 4.0 * x[i] + 3.0)
            } else {
                100.0 * xn2 * xn2
            }
        })
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.n;
        let xn = x[n - 1];
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            let s = x[i] * x[i] + xn * xn;
            jac[(i, i)] = 100.0 * (4.0 * x[i] * s - 4.0);
            jac[(i, n - 1)] = 400.0 * xn * s;
        }
        jac[(n - 1, n - 1)] = 400.0 * xn.powi(3);
        Some(jac)
    }
}

pub fn powell_quartic(n: usize) -> ResidualProblem {
    assert!(n >= 2);
    let mut x_star = DVector::from_element(n, 1.0);
    x_star[n - 1] = 0.0;
    ResidualProblem::new(format!("ex2-n{n}"), n, n, DVector::zeros(n), PowellQuartic { n })
        .with_f_star(0.0)
        .with_x_star(x_star)
        .with_start(GAUSSIAN_START)
}

/// `rᵢ = 10(xᵢ² − x_{i+10})`, `r_{i+10} = xᵢ − 1` for `i = 1..10`.
pub struct PairedQuadratic;

impl Residual for PairedQuadratic {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(20, |i, _| {
            if i < 10 {
                10.0 * (x[i] * x[i] - x[i + 10])
            } else {
                x[i - 10] - 1.0
            }
        })
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(20, 20);
        for i in 0..10 {
            jac[(i, i)] = 20.0 * x[i];
            jac[(i, i + 10)] = -10.0;
            jac[(i + 10, i)] = 1.0;
        }
        Some(jac)
    }
}

pub fn paired_quadratic() -> ResidualProblem {
    ResidualProblem::new("ex3", 20, 20, DVector::zeros(20), PairedQuadratic)
        .with_f_star(0.0)
        .with_x_star(DVector::from_element(20, 1.0))
        .with_start(GAUSSIAN_START)
}

/// Penalty function I: `rᵢ = √a (xᵢ − 1)`, `r_{n+1} = Σ xⱼ² − ¼`, `a = 1e-5`.
pub struct PenaltyOne {
    pub n: usize,
}

pub const PENALTY_WEIGHT: f64 = 1e-5;

impl Residual for PenaltyOne {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let w = PENALTY_WEIGHT.sqrt();
        DVector::from_fn(self.n + 1, |i, _| {
            if i < self.n {
                w * (x[i] - 1.0)
            } else {
                x.norm_squared() - 0.25
            }
        })
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.n;
        let w = PENALTY_WEIGHT.sqrt();
        let mut jac = DMatrix::zeros(n + 1, n);
        for j in 0..n {
            jac[(j, j)] = w;
            jac[(n, j)] = 2.0 * x[j];
        }
        Some(jac)
    }
}

impl PenaltyOne {
    /// The minimizer has equal coordinates `t` solving `2n t³ + (a − ½) t − a = 0`.
    pub fn minimizer(&self) -> DVector<f64> {
        let n = self.n as f64;
        let a = PENALTY_WEIGHT;
        let cubic = |t: f64| 2.0 * n * t.powi(3) + (a - 0.5) * t - a;
        let slope = |t: f64| 6.0 * n * t * t + (a - 0.5);
        let mut t = (0.25 / n).sqrt();
        for _ in 0..100 {
            let step = cubic(t) / slope(t);
            t -= step;
            if step.abs() <= 1e-16 * t.abs() {
                break;
            }
        }
        DVector::from_element(self.n, t)
    }
}

/// Literature value of `Σ rᵢ²` at the minimizer for n = 10.
pub const PENALTY_ONE_SUM_SQUARES_N10: f64 = 7.08765e-5;

pub fn penalty_one(n: usize) -> ResidualProblem {
    let model = PenaltyOne { n };
    let x_star = model.minimizer();
    let f_star = 0.5 * model.residuals(&x_star).norm_squared();
    let x0 = DVector::from_fn(n, |i, _| (i + 1) as f64);
    let id = if n == 10 { "ex4".to_string() } else { format!("ex4-n{n}") };
    ResidualProblem::new(id, n, n + 1, x0, model)
        .with_f_star(f_star)
        .with_x_star(x_star)
}
