//! Nonlinear-equation test functions from the Moré–Garbow–Hillstrom collection.
//!
//! Numbering follows the "systems of nonlinear equations" list for #1–#14.
//! Entry #23 is Penalty function I from the global numbering; it has a
//! nonzero minimum rather than a root.

use nalgebra::{DMatrix, DVector};

use crate::problem::Residual;
use crate::suite::examples::PenaltyOne;

pub struct Rosenbrock;

impl Residual for Rosenbrock {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]])
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_row_slice(2, 2, &[-20.0 * x[0], 10.0, -1.0, 0.0]))
    }
}

pub struct BrownAlmostLinear {
    pub n: usize,
}

impl Residual for BrownAlmostLinear {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let sum = x.sum();
        DVector::from_fn(n, |i, _| {
            if i + 1 < n {
                x[i] + sum - (n as f64 + 1.0)
            } else {
                x.iter().product::<f64>() - 1.0
            }
        })
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.n;
        let mut jac = DMatrix::from_element(n, n, 1.0);
        for i in 0..n - 1 {
            jac[(i, i)] = 2.0;
        }
        for j in 0..n {
            jac[(n - 1, j)] = x
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, v)| v)
                .product();
        }
        Some(jac)
    }
}

fn grid(n: usize) -> (f64, impl Fn(usize) -> f64) {
    let h = 1.0 / (n as f64 + 1.0);
    (h, move |i: usize| (i as f64 + 1.0) * h)
}

pub struct DiscreteBoundaryValue {
    pub n: usize,
}

impl Residual for DiscreteBoundaryValue {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let (h, t) = grid(n);
        DVector::from_fn(n, |i, _| {
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] } else { 0.0 };
            2.0 * x[i] - left - right + 0.5 * h * h * (x[i] + t(i) + 1.0).powi(3)
        })
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.n;
        let (h, t) = grid(n);
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n {
            jac[(i, i)] = 2.0 + 1.5 * h * h * (x[i] + t(i) + 1.0).powi(2);
            if i > 0 {
                jac[(i, i - 1)] = -1.0;
            }
            if i + 1 < n {
                jac[(i, i + 1)] = -1.0;
            }
        }
        Some(jac)
    }
}

/// Start point shared by #9 and #10: `tⱼ(tⱼ − 1)`.
pub fn boundary_start(n: usize) -> DVector<f64> {
    let (_, t) = grid(n);
    DVector::from_fn(n, |i, _| t(i) * (t(i) - 1.0))
}

pub struct DiscreteIntegral {
    pub n: usize,
}

impl DiscreteIntegral {
    fn weight(&self, i: usize, j: usize) -> f64 {
        let (_, t) = grid(self.n);
        if j <= i {
            (1.0 - t(i)) * t(j)
        } else {
            t(i) * (1.0 - t(j))
        }
    }
}

impl Residual for DiscreteIntegral {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let (h, t) = grid(n);
        let cubes: Vec<f64> = (0..n).map(|j| (x[j] + t(j) + 1.0).powi(3)).collect();
        DVector::from_fn(n, |i, _| {
            let s: f64 = (0..n).map(|j| self.weight(i, j) * cubes[j]).sum();
            x[i] + 0.5 * h * s
        })
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.n;
        let (h, t) = grid(n);
        Some(DMatrix::from_fn(n, n, |i, j| {
            let d = 1.5 * h * self.weight(i, j) * (x[j] + t(j) + 1.0).powi(2);
            if i == j {
                1.0 + d
            } else {
                d
            }
        }))
    }
}

pub struct Trigonometric {
    pub n: usize,
}

impl Residual for Trigonometric {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let cos_sum: f64 = x.iter().map(|v| v.cos()).sum();
        DVector::from_fn(n, |i, _| {
            n as f64 - cos_sum + (i as f64 + 1.0) * (1.0 - x[i].cos()) - x[i].sin()
        })
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.n;
        Some(DMatrix::from_fn(n, n, |i, j| {
            let mut v = x[j].sin();
            if i == j {
                v += (i as f64 + 1.0) * x[i].sin() - x[i].cos();
            }
            v
        }))
    }
}

/// Variably dimensioned function, `m = n + 2`.
pub struct VariablyDimensioned {
    pub n: usize,
}

impl VariablyDimensioned {
    fn weighted_sum(&self, x: &DVector<f64>) -> f64 {
        x.iter()
            .enumerate()
            .map(|(j, v)| (j as f64 + 1.0) * (v - 1.0))
            .sum()
    }
}

impl Residual for VariablyDimensioned {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let s = self.weighted_sum(x);
        DVector::from_fn(n + 2, |i, _| {
            if i < n {
                x[i] - 1.0
            } else if i == n {
                s
            } else {
                s * s
            }
        })
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.n;
        let s = self.weighted_sum(x);
        let mut jac = DMatrix::zeros(n + 2, n);
        for j in 0..n {
            let w = j as f64 + 1.0;
            jac[(j, j)] = 1.0;
            jac[(n, j)] = w;
            jac[(n + 1, j)] = 2.0 * s * w;
        }
        Some(jac)
    }
}

pub struct BroydenTridiagonal {
    pub n: usize,
}

impl Residual for BroydenTridiagonal {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |i, _| {
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] } else { 0.0 };
            (3.0 - 2.0 * x[i]) * x[i] - left - 2.0 * right + 1.0
        })
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.n;
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n {
            jac[(i, i)] = 3.0 - 4.0 * x[i];
            if i > 0 {
                jac[(i, i - 1)] = -1.0;
            }
            if i + 1 < n {
                jac[(i, i + 1)] = -2.0;
            }
        }
        Some(jac)
    }
}

pub struct BroydenBanded {
    pub n: usize,
}

impl BroydenBanded {
    const LOWER: usize = 5;
    const UPPER: usize = 1;

    fn band(&self, i: usize) -> impl Iterator<Item = usize> {
        let lo = i.saturating_sub(Self::LOWER);
        let hi = (i + Self::UPPER).min(self.n - 1);
        (lo..=hi).filter(move |&j| j != i)
    }
}

impl Residual for BroydenBanded {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| {
            let coupling: f64 = self.band(i).map(|j| x[j] * (1.0 + x[j])).sum();
            x[i] * (2.0 + 5.0 * x[i] * x[i]) + 1.0 - coupling
        })
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.n;
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n {
            jac[(i, i)] = 2.0 + 15.0 * x[i] * x[i];
            for j in self.band(i) {
                jac[(i, j)] = -(1.0 + 2.0 * x[j]);
            }
        }
        Some(jac)
    }
}

/// A base problem for the singular-modification entries: residual model,
/// standard start point, and the point `x*` the modification is anchored at.
pub struct MghBase {
    pub number: u32,
    pub n: usize,
    pub m: usize,
    pub model: Box<dyn Residual>,
    pub x0: DVector<f64>,
    pub x_star: DVector<f64>,
}

/// Newton's method with the analytic Jacobian, for bases whose root has no
/// closed form.
fn newton_root(model: &dyn Residual, start: &DVector<f64>) -> DVector<f64> {
    let mut x = start.clone();
    for _ in 0..100 {
        let r = model.residuals(&x);
        if r.amax() <= 1e-15 {
            break;
        }
        let jac = model.jacobian(&x).expect("newton needs a Jacobian");
        let step = jac.lu().solve(&(-r)).expect("singular Jacobian in newton");
        x += &step;
        if step.amax() <= 1e-16 * (1.0 + x.amax()) {
            break;
        }
    }
    x
}

/// Builds MGH base `number` at dimension `n`. Returns `None` for numbers
/// outside the benchmark catalog.
pub fn base(number: u32, n: usize) -> Option<MghBase> {
    let ones = || DVector::from_element(n, 1.0);
    let (model, m, x0, x_star): (Box<dyn Residual>, usize, DVector<f64>, Option<DVector<f64>>) =
        match number {
            1 => {
                if n != 2 {
                    return None;
                }
                let x0 = DVector::from_vec(vec![-1.2, 1.0]);
                (Box::new(Rosenbrock), 2, x0, Some(ones()))
            }
            8 => (
                Box::new(BrownAlmostLinear { n }),
                n,
                DVector::from_element(n, 0.5),
                Some(ones()),
            ),
            9 => (Box::new(DiscreteBoundaryValue { n }), n, boundary_start(n), None),
            10 => (Box::new(DiscreteIntegral { n }), n, boundary_start(n), None),
            11 => (
                Box::new(Trigonometric { n }),
                n,
                DVector::from_element(n, 1.0 / n as f64),
                Some(DVector::zeros(n)),
            ),
            12 => (
                Box::new(VariablyDimensioned { n }),
                n + 2,
                DVector::from_fn(n, |j, _| 1.0 - (j as f64 + 1.0) / n as f64),
                Some(ones()),
            ),
            13 => (
                Box::new(BroydenTridiagonal { n }),
                n,
                DVector::from_element(n, -1.0),
                None,
            ),
            14 => (
                Box::new(BroydenBanded { n }),
                n,
                DVector::from_element(n, -1.0),
                None,
            ),
            23 => {
                let model = PenaltyOne { n };
                let x_star = model.minimizer();
                let x0 = DVector::from_fn(n, |i, _| (i + 1) as f64);
                (Box::new(model), n + 1, x0, Some(x_star))
            }
            _ => return None,
        };
    let x_star = x_star.unwrap_or_else(|| newton_root(model.as_ref(), &x0));
    Some(MghBase {
        number,
        n,
        m,
        model,
        x0,
        x_star,
    })
}

/// Problem numbers and dimensions of the singular-modification benchmark.
pub const CATALOG: [(u32, usize); 9] = [
    (1, 2),
    (8, 50),
    (9, 50),
    (10, 50),
    (11, 50),
    (12, 50),
    (13, 50),
    (14, 50),
    (23, 10),
];
