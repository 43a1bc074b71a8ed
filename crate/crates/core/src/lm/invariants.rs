//! Runtime-checkable inequalities that every trace must satisfy.

use std::fmt;

use serde::Serialize;

use super::{IterationRecord, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum InvariantKind {
    /// `λ_k = θ_k ‖J̃ᵀr_k‖`.
    LambdaDefinition,
    /// `‖d_k‖ ≤ 1/θ_k`.
    StepBound,
    /// `Pred_k ≥ ‖J̃ᵀr‖ · min{‖d‖, ‖J̃ᵀr‖/‖J̃ᵀJ̃‖}`.
    PowellBound,
    /// `θ_{k+1} ∈ {a₁θ, θ, max(a₂θ, θ_min)}`, `θ_{k+1} ≤ a₁θ`, `θ ≥ θ_min`.
    ThetaUpdate,
    /// Accepted steps never increase `‖r‖`.
    Descent,
    /// `nf_cumulative` strictly increases.
    NfMonotone,
    /// Normwise backward error of the step solve:
    /// `‖(J̃ᵀJ̃ + λI)d + J̃ᵀr‖ ≤ 1e-10 ((‖J̃ᵀJ̃‖ + λ)‖d‖ + ‖J̃ᵀr‖)`.
    StepResidual,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub k: usize,
    pub kind: InvariantKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} {:?}: {}", self.k, self.kind, self.detail)
    }
}

const LAMBDA_RTOL: f64 = 1e-12;
const STEP_RTOL: f64 = 1e-10;
const POWELL_RTOL: f64 = 1e-8;
const SOLVE_TOL: f64 = 1e-10;

/// Checks every record of `trace`. Powell and step-residual checks need the
/// records' diagnostics and are skipped when those are absent.
pub fn check_trace(trace: &[IterationRecord], cfg: &SolverConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |k, kind, detail: String| out.push(Violation { k, kind, detail });

    for (idx, rec) in trace.iter().enumerate() {
        let k = rec.k;
        let g = rec.norm_grad_model;
        let expected_lambda = rec.theta * g;
        if (rec.lambda - expected_lambda).abs() > LAMBDA_RTOL * expected_lambda.abs() {
            push(k, InvariantKind::LambdaDefinition, format!("λ={} θ‖g‖={}", rec.lambda, expected_lambda));
        }
        if rec.norm_d > (1.0 / rec.theta) * (1.0 + STEP_RTOL) {
            push(k, InvariantKind::StepBound, format!("‖d‖={} 1/θ={}", rec.norm_d, 1.0 / rec.theta));
        }

        let t = rec.theta;
        let allowed = [cfg.a1 * t, t, (cfg.a2 * t).max(cfg.theta_min)];
        if !allowed.contains(&rec.theta_next) || rec.theta_next > cfg.a1 * t || t < cfg.theta_min {
            push(k, InvariantKind::ThetaUpdate, format!("θ={t} → {}", rec.theta_next));
        }
        if rec.terminal && rec.theta_next != t {
            push(k, InvariantKind::ThetaUpdate, "terminal record changed θ".into());
        }

        if let Some(diag) = rec.diagnostics {
            if g > 0.0 && !rec.terminal {
                let bound = g * rec.norm_d.min(g / diag.jtj_norm);
                if rec.pred < bound - POWELL_RTOL * bound.abs().max(rec.pred.abs()) {
                    push(k, InvariantKind::PowellBound, format!("pred={} bound={bound}", rec.pred));
                }
            }
            let scale = (diag.jtj_norm + rec.lambda) * rec.norm_d + g;
            if diag.step_residual > SOLVE_TOL * scale {
                push(k, InvariantKind::StepResidual, format!("residual={}", diag.step_residual));
            }
        }

        if let Some(next) = trace.get(idx + 1) {
            if next.theta != rec.theta_next {
                push(k, InvariantKind::ThetaUpdate, format!("θ_next={} but next θ={}", rec.theta_next, next.theta));
            }
            if next.nf_cumulative <= rec.nf_cumulative {
                push(k, InvariantKind::NfMonotone, format!("{} → {}", rec.nf_cumulative, next.nf_cumulative));
            }
            if rec.accepted && next.norm_r > rec.norm_r {
                push(k, InvariantKind::Descent, format!("‖r‖ {} → {}", rec.norm_r, next.norm_r));
            }
            if !rec.accepted && next.norm_r != rec.norm_r {
                push(k, InvariantKind::Descent, "rejected step moved the iterate".into());
            }
        }
    }
    out
}
