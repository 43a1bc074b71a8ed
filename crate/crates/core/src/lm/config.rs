use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::directions::DEFAULT_POOL_SIZE;
use crate::error::{Error, Result};

/// How the Jacobian model is built each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Coordinate forward differences.
    Fd,
    /// Orthogonal spherical smoothing with a fresh frame every iteration.
    OssV1,
    /// Orthogonal spherical smoothing with frames picked from a fixed pool.
    OssV2,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Fd, Method::OssV1, Method::OssV2];

    /// Identifier used in benchmark records.
    pub fn solver_id(self) -> &'static str {
        match self {
            Method::Fd => "dflm-fd",
            Method::OssV1 => "dflm-ossv1",
            Method::OssV2 => "dflm-ossv2",
        }
    }

    pub fn is_randomized(self) -> bool {
        !matches!(self, Method::Fd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.solver_id())
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts both short (`ossv1`) and record (`dflm-ossv1`) forms.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches("dflm-") {
            "fd" => Ok(Method::Fd),
            "ossv1" => Ok(Method::OssV1),
            "ossv2" => Ok(Method::OssV2),
            _ => Err(Error::UnknownSolver(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub a1: f64,
    pub a2: f64,
    pub theta0: f64,
    pub theta_min: f64,
    pub eps0: f64,
    /// Sampling size; `None` means `b = n`.
    pub b: Option<usize>,
    /// Initial smoothing step; `None` means `1e-2 · max(1, ‖x₀‖∞)`.
    pub gamma0: Option<f64>,
    pub gamma_floor: f64,
    /// Iteration cap; `None` means `1000 (n + 1)`.
    pub max_iter: Option<usize>,
    pub method: Method,
    pub pool_size: usize,
    pub seed: u64,
    /// Record per-iteration diagnostics (`‖JᵀJ‖`, step-solve residual).
    pub diagnostics: bool,
    /// Keep every iterate `x_k` in the result.
    pub keep_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            p0: 1e-3,
            p1: 0.25,
            p2: 0.75,
            a1: 4.0,
            a2: 0.25,
            theta0: 1e-8,
            theta_min: 1e-8,
            eps0: 1e-4,
            b: None,
            gamma0: None,
            gamma_floor: 1e-12,
            max_iter: None,
            method: Method::OssV1,
            pool_size: DEFAULT_POOL_SIZE,
            seed: 0,
            diagnostics: false,
            keep_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Parameter(msg.to_string()));
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return bad("need 0 < p0 < 1");
        }
        if !(self.p0 < self.p1 && self.p1 < self.p2) {
            return bad("need p0 < p1 < p2");
        }
        if !(self.a1 > 1.0 && self.a2 > 0.0 && self.a2 < 1.0 && self.a1 * self.a2 <= 1.0) {
            return bad("need a1 > 1 > a2 > 0 and a1·a2 ≤ 1");
        }
        if !(self.theta_min > 0.0 && self.theta0 >= self.theta_min) {
            return bad("need theta0 ≥ theta_min > 0");
        }
        if !(self.eps0 >= 0.0) {
            return bad("need eps0 ≥ 0");
        }
        if !(self.gamma_floor > 0.0) {
            return bad("need gamma_floor > 0");
        }
        if let Some(g) = self.gamma0 {
            if !(g > 0.0 && g.is_finite()) {
                return bad("need gamma0 > 0");
            }
        }
        if self.pool_size == 0 {
            return bad("need pool_size ≥ 1");
        }
        if self.b == Some(0) {
            return bad("need b ≥ 1");
        }
        Ok(())
    }

    pub fn sampling_size(&self, n: usize) -> Result<usize> {
        let b = self.b.unwrap_or(n);
        if b == 0 || b > n {
            return Err(Error::Dimension(format!("sampling size b={b} outside 1..={n}")));
        }
        Ok(b)
    }

    pub fn iteration_cap(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(1000 * (n + 1))
    }

    pub fn initial_gamma(&self, x0: &nalgebra::DVector<f64>) -> f64 {
        self.gamma0
            .unwrap_or_else(|| 1e-2 * x0.amax().max(1.0))
            .max(self.gamma_floor)
    }
}
