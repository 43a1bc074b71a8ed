//! The derivative-free Levenberg–Marquardt iteration.
//!
//! Each iteration builds a Jacobian model at `x_k` (forward differences or
//! orthogonal spherical smoothing with step `γ_k`), stops when the gradient
//! model `‖J̃ᵀr‖` is at most `ε₀`, and otherwise solves the regularized
//! normal equations with `λ_k = θ_k ‖J̃ᵀr‖`. The trial point is accepted when
//! `ρ_k ≥ p₀`; θ follows the three-way rule in [`update_theta`]. The next
//! smoothing step is the norm of the step just solved, accepted or not.

mod config;
pub mod invariants;
mod step;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::directions::{build_pool, sample_frame};
use crate::error::{Error, Result};
use crate::jacobian::{estimate_fd, estimate_oss, gradient_model, JacobianEstimate};
use crate::problem::ResidualProblem;

pub use config::{Method, SolverConfig};
pub use step::{predicted_reduction, reduction_ratio, solve_lm_step, update_theta, LmStep};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    /// Spectral norm of `J̃ᵀJ̃`.
    pub jtj_norm: f64,
    /// `‖(J̃ᵀJ̃ + λI)d + J̃ᵀr‖`.
    pub step_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub theta: f64,
    pub lambda: f64,
    /// Undefined for the terminal record and on numerical breakdown.
    pub rho: Option<f64>,
    pub norm_r: f64,
    pub norm_grad_model: f64,
    pub norm_d: f64,
    pub gamma: f64,
    pub accepted: bool,
    pub nf_cumulative: usize,
    pub theta_next: f64,
    pub pred: f64,
    /// The stopping test fired at this record; no step was taken.
    pub terminal: bool,
    pub diagnostics: Option<StepDiagnostics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    GradientSmall,
    MaxIter,
    Overflow,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::GradientSmall => "gradient_small",
            Status::MaxIter => "max_iter",
            Status::Overflow => "overflow",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gradient_small" => Some(Status::GradientSmall),
            "max_iter" => Some(Status::MaxIter),
            "overflow" => Some(Status::Overflow),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x_final: DVector<f64>,
    pub f_final: f64,
    pub norm_grad_model_final: f64,
    pub status: Status,
    /// Steps taken (accepted or rejected).
    pub niter: usize,
    /// Residual-vector evaluations, including the start point.
    pub nf: usize,
    pub trace: Vec<IterationRecord>,
    /// `x_k` for every record, when `keep_iterates` is set.
    pub iterates: Vec<DVector<f64>>,
}

fn finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Runs the solver from the problem's canonical start point.
pub fn run_solver<R: Rng + ?Sized>(
    problem: &ResidualProblem,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<SolveResult> {
    run_solver_from(problem, &problem.x0, cfg, rng)
}

pub fn run_solver_from<R: Rng + ?Sized>(
    problem: &ResidualProblem,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<SolveResult> {
    cfg.validate()?;
    let n = problem.n;
    if x0.len() != n {
        return Err(Error::Dimension(format!("start point has length {}, expected {n}", x0.len())));
    }
    let b = cfg.sampling_size(n)?;
    let cap = cfg.iteration_cap(n);
    let pool = match cfg.method {
        Method::OssV2 => Some(build_pool(n, b, cfg.pool_size, rng)?),
        _ => None,
    };
    let nominal_cost = match cfg.method {
        Method::Fd => n,
        _ => b,
    };

    let mut x = x0.clone();
    let mut r = problem.eval(&x);
    let mut nf = 1;
    let mut theta = cfg.theta0;
    let mut gamma = cfg.initial_gamma(x0);
    let mut trace = Vec::new();
    let mut iterates = Vec::new();
    let mut last_grad = f64::NAN;

    let finish = |x: DVector<f64>, r: &DVector<f64>, g: f64, status, niter, nf, trace, iterates| {
        SolveResult {
            f_final: 0.5 * r.norm_squared(),
            x_final: x,
            norm_grad_model_final: g,
            status,
            niter,
            nf,
            trace,
            iterates,
        }
    };

    if !finite(&x) || !finite(&r) {
        return Ok(finish(x, &r, last_grad, Status::Overflow, 0, nf, trace, iterates));
    }

    for k in 0..cap {
        let estimate: Result<JacobianEstimate> = match cfg.method {
            Method::Fd => estimate_fd(problem, &x, &r, gamma),
            Method::OssV1 => {
                let frame = sample_frame(n, b, rng)?;
                estimate_oss(problem, &x, &r, &frame, gamma)
            }
            Method::OssV2 => {
                let frame = pool.as_ref().expect("pool built for v2").pick(rng);
                estimate_oss(problem, &x, &r, frame, gamma)
            }
        };
        let est = match estimate {
            Ok(est) => est,
            Err(Error::Overflow) => {
                nf += nominal_cost;
                return Ok(finish(x, &r, last_grad, Status::Overflow, k, nf, trace, iterates));
            }
            Err(e) => return Err(e),
        };
        nf += est.nf_cost;
        let jm = est.jm;
        let g = gradient_model(&jm, &r);
        let g_norm = g.norm();
        last_grad = g_norm;
        if !g_norm.is_finite() {
            return Ok(finish(x, &r, g_norm, Status::Overflow, k, nf, trace, iterates));
        }
        if cfg.keep_iterates {
            iterates.push(x.clone());
        }

        if g_norm <= cfg.eps0 {
            trace.push(IterationRecord {
                k,
                theta,
                lambda: theta * g_norm,
                rho: None,
                norm_r: r.norm(),
                norm_grad_model: g_norm,
                norm_d: 0.0,
                gamma,
                accepted: false,
                nf_cumulative: nf,
                theta_next: theta,
                pred: 0.0,
                terminal: true,
                diagnostics: None,
            });
            return Ok(finish(x, &r, g_norm, Status::GradientSmall, k, nf, trace, iterates));
        }

        let step = match solve_lm_step(&jm, &r, theta) {
            Ok(s) => s,
            Err(Error::Overflow) => {
                return Ok(finish(x, &r, g_norm, Status::Overflow, k, nf, trace, iterates));
            }
            Err(e) => return Err(e),
        };
        let d = step.d;
        let norm_d = d.norm();
        let x_trial = &x + &d;
        if !finite(&x_trial) {
            return Ok(finish(x, &r, g_norm, Status::Overflow, k, nf, trace, iterates));
        }
        let r_trial = problem.eval(&x_trial);
        nf += 1;

        let pred = predicted_reduction(&r, &jm, &d);
        let rho = match reduction_ratio(&r, &r_trial, &jm, &d) {
            Ok(v) => Some(v),
            Err(Error::Breakdown(_)) => None,
            Err(e) => return Err(e),
        };
        let accepted = matches!(rho, Some(v) if v >= cfg.p0);
        let theta_next = update_theta(theta, rho.unwrap_or(f64::NEG_INFINITY), g_norm, cfg);
        let diagnostics = cfg.diagnostics.then(|| diagnose(&jm, &g, &d, step.lambda));

        trace.push(IterationRecord {
            k,
            theta,
            lambda: step.lambda,
            rho,
            norm_r: r.norm(),
            norm_grad_model: g_norm,
            norm_d,
            gamma,
            accepted,
            nf_cumulative: nf,
            theta_next,
            pred,
            terminal: false,
            diagnostics,
        });

        if accepted {
            x = x_trial;
            r = r_trial;
        }
        theta = theta_next;
        gamma = norm_d.max(cfg.gamma_floor);
    }

    Ok(finish(x, &r, last_grad, Status::MaxIter, cap, nf, trace, iterates))
}

fn diagnose(jm: &DMatrix<f64>, g: &DVector<f64>, d: &DVector<f64>, lambda: f64) -> StepDiagnostics {
    let jtj = jm.tr_mul(jm);
    let residual = &jtj * d + lambda * d + g;
    StepDiagnostics {
        jtj_norm: jtj.symmetric_eigenvalues().amax(),
        step_residual: residual.norm(),
    }
}
