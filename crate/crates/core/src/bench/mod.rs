//! Solver × problem × repetition grids, the convergence test and
//! Dolan–Moré performance profiles.

mod io;
mod profile;

use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::lm::{run_solver_from, Method, SolveResult, SolverConfig, Status};
use crate::problem::{ResidualProblem, StartRule};
use crate::seed;

pub use io::{
    fmt_float, read_curves, read_records, read_trace, write_curves, write_records, write_summary, write_trace,
    CURVES_HEADER, RECORDS_HEADER, TRACE_HEADER,
};
pub use profile::{performance_profile, ProfileCurve, ProfileTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub problem_id: String,
    pub solver_id: String,
    pub rep: usize,
    pub seed: u64,
    pub start_scale: u32,
    pub niter: usize,
    pub nf: usize,
    pub f_final: f64,
    pub status: Status,
    pub converged: bool,
    /// Seconds; not written to the records file.
    pub wall_time: f64,
}

impl BenchRecord {
    /// Equality ignoring `wall_time`.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let strip = |r: &Self| Self {
            wall_time: 0.0,
            ..r.clone()
        };
        strip(self) == strip(other)
    }
}

/// `|f − f*| ≤ τ`.
pub fn convergence_test(f_final: f64, f_star: f64, tau: f64) -> bool {
    (f_final - f_star).abs() <= tau
}

/// Convergence flag of a finished run. Unknown `f*` and overflow never count.
pub fn converged(status: Status, f_final: f64, f_star: Option<f64>, tau: f64) -> bool {
    match f_star {
        Some(fs) if status != Status::Overflow => convergence_test(f_final, fs, tau),
        _ => false,
    }
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub reps: usize,
    pub base_seed: u64,
    pub tau: f64,
    /// Template for every run; `method` and `seed` are overwritten per cell.
    pub config: SolverConfig,
}

impl GridSpec {
    pub fn new(reps: usize, base_seed: u64, tau: f64) -> Self {
        Self {
            reps,
            base_seed,
            tau,
            config: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Usage("need reps ≥ 1".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Usage(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        self.config.validate()
    }
}

/// One run of the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCell {
    pub problem: usize,
    pub method: Method,
    pub start_scale: u32,
    pub rep: usize,
}

/// Start-point scalings applied to problems with a fixed start.
pub const START_SCALES: [u32; 3] = [1, 10, 100];

/// Enumerates the cells. Fixed-start problems are run at every scaling in
/// [`START_SCALES`]; a deterministic solver from a fixed start runs once.
pub fn grid_cells(problems: &[ResidualProblem], solvers: &[Method], reps: usize) -> Vec<GridCell> {
    let mut cells = Vec::new();
    for (pi, p) in problems.iter().enumerate() {
        let scales: &[u32] = match p.start {
            StartRule::Fixed => &START_SCALES,
            StartRule::Gaussian { .. } => &[1],
        };
        for &method in solvers {
            let runs = match p.start {
                StartRule::Fixed if !method.is_randomized() => 1,
                _ => reps,
            };
            for &start_scale in scales {
                for rep in 0..runs {
                    cells.push(GridCell {
                        problem: pi,
                        method,
                        start_scale,
                        rep,
                    });
                }
            }
        }
    }
    cells
}

/// Start point of a cell; independent of the solver.
pub fn start_point(problem: &ResidualProblem, start_scale: u32, rep: usize, base_seed: u64) -> DVector<f64> {
    match problem.start {
        StartRule::Fixed => &problem.x0 * start_scale as f64,
        StartRule::Gaussian { factor } => {
            let mut rng = seed::rng(seed::start_seed(base_seed, &problem.id, rep));
            DVector::from_fn(problem.n, |_, _| factor * rng.sample::<f64, _>(StandardNormal))
        }
    }
}

/// Runs one cell and returns its record together with the full result.
pub fn run_cell(problem: &ResidualProblem, cell: &GridCell, spec: &GridSpec) -> Result<(BenchRecord, SolveResult)> {
    let solver_id = cell.method.solver_id();
    let cell_seed = seed::cell_seed(spec.base_seed, &problem.id, solver_id, cell.start_scale, cell.rep);
    let cfg = SolverConfig {
        method: cell.method,
        seed: cell_seed,
        ..spec.config.clone()
    };
    let x0 = start_point(problem, cell.start_scale, cell.rep, spec.base_seed);
    let started = Instant::now();
    let res = run_solver_from(problem, &x0, &cfg, &mut seed::rng(cell_seed))?;
    let record = BenchRecord {
        problem_id: problem.id.clone(),
        solver_id: solver_id.to_string(),
        rep: cell.rep,
        seed: cell_seed,
        start_scale: cell.start_scale,
        niter: res.niter,
        nf: res.nf,
        f_final: res.f_final,
        status: res.status,
        converged: converged(res.status, res.f_final, problem.f_star, spec.tau),
        wall_time: started.elapsed().as_secs_f64(),
    };
    Ok((record, res))
}

/// Sorts records by problem, solver, start scale and repetition.
pub fn canonical_order(records: &mut [BenchRecord]) {
    records.sort_by(|a, b| {
        (&a.problem_id, &a.solver_id, a.start_scale, a.rep).cmp(&(&b.problem_id, &b.solver_id, b.start_scale, b.rep))
    });
}

pub fn run_grid(
    problems: &[ResidualProblem],
    solvers: &[Method],
    spec: &GridSpec,
    mode: Execution,
) -> Result<Vec<BenchRecord>> {
    spec.validate()?;
    if problems.is_empty() || solvers.is_empty() {
        return Err(Error::Usage("empty problem or solver list".into()));
    }
    let cells = grid_cells(problems, solvers, spec.reps);
    let mut records = exec::map(&cells, mode, |cell| {
        run_cell(&problems[cell.problem], cell, spec).map(|(rec, _)| rec)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    canonical_order(&mut records);
    Ok(records)
}

/// Parses `fd,ossv1,...`.
pub fn parse_solvers(list: &str) -> Result<Vec<Method>> {
    let methods = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Method>>>()?;
    if methods.is_empty() {
        return Err(Error::Usage("no solvers given".into()));
    }
    Ok(methods)
}

/// Recomputes every `converged` flag at tolerance `tau`, taking `f*` from
/// `f_star_of(problem_id)`.
pub fn reassess(records: &mut [BenchRecord], tau: f64, f_star_of: impl Fn(&str) -> Option<f64>) {
    for r in records {
        r.converged = converged(r.status, r.f_final, f_star_of(&r.problem_id), tau);
    }
}

/// Per-(problem, solver, scale) means for the summary file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub problem_id: String,
    pub solver_id: String,
    pub start_scale: u32,
    pub runs: usize,
    pub converged: usize,
    pub overflow: usize,
    pub mean_niter: f64,
    pub mean_nf: f64,
}

pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let mut sorted = records.to_vec();
    canonical_order(&mut sorted);
    let mut rows: Vec<SummaryRow> = Vec::new();
    for group in sorted.chunk_by(|a, b| {
        a.problem_id == b.problem_id && a.solver_id == b.solver_id && a.start_scale == b.start_scale
    }) {
        let k = group.len() as f64;
        rows.push(SummaryRow {
            problem_id: group[0].problem_id.clone(),
            solver_id: group[0].solver_id.clone(),
            start_scale: group[0].start_scale,
            runs: group.len(),
            converged: group.iter().filter(|r| r.converged).count(),
            overflow: group.iter().filter(|r| r.status == Status::Overflow).count(),
            mean_niter: group.iter().map(|r| r.niter as f64).sum::<f64>() / k,
            mean_nf: group.iter().map(|r| r.nf as f64).sum::<f64>() / k,
        });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite;

    #[test]
    fn convergence_examples() {
        assert!(convergence_test(0.3, 0.3, 1e-9));
        assert!(!convergence_test(0.3 + 2e-3, 0.3, 1e-3));
        assert!(!converged(Status::Overflow, 0.0, Some(0.0), 1e-3));
        assert!(!converged(Status::GradientSmall, 0.0, None, 1e-3));
    }

    #[test]
    fn cells_follow_start_rules() {
        let problems = vec![suite::lookup("ex1").unwrap(), suite::lookup("ex4").unwrap()];
        let cells = grid_cells(&problems, &Method::ALL, 4);
        // ex1: Gaussian start, 3 solvers × 4 reps; ex4: 3 scales × (1 + 4 + 4)
        assert_eq!(cells.len(), 12 + 27);
        let x = start_point(&problems[1], 10, 0, 1);
        assert_eq!(x[9], 100.0);
        let a = start_point(&problems[0], 1, 3, 5);
        assert_eq!(a, start_point(&problems[0], 1, 3, 5));
        assert_ne!(a, start_point(&problems[0], 1, 2, 5));
    }

    #[test]
    fn grid_is_reproducible_and_order_independent() {
        let problems = vec![suite::lookup("ex1").unwrap(), suite::lookup("ex4").unwrap()];
        let spec = GridSpec::new(2, 11, 1e-5);
        let a = run_grid(&problems, &Method::ALL, &spec, Execution::Sequential).unwrap();
        let b = run_grid(&problems, &Method::ALL, &spec, Execution::Parallel).unwrap();
        assert_eq!(a.len(), b.len());
        assert!(a.iter().zip(&b).all(|(x, y)| x.same_outcome(y)));
    }

    #[test]
    fn stricter_tau_never_adds_convergence() {
        let problems = vec![suite::lookup("ex1").unwrap()];
        let mut recs = run_grid(&problems, &[Method::OssV1], &GridSpec::new(6, 2, 1e-3), Execution::Sequential).unwrap();
        let loose = recs.iter().filter(|r| r.converged).count();
        reassess(&mut recs, 1e-5, |_| Some(0.0));
        assert!(recs.iter().filter(|r| r.converged).count() <= loose);
    }

    #[test]
    fn bad_grid_arguments() {
        let problems = vec![suite::lookup("ex1").unwrap()];
        let spec = GridSpec::new(0, 1, 1e-3);
        assert!(matches!(run_grid(&problems, &[Method::Fd], &spec, Execution::Sequential), Err(Error::Usage(_))));
        assert!(matches!(parse_solvers("fd,bfgs"), Err(Error::UnknownSolver(_))));
        assert_eq!(parse_solvers("fd, dflm-ossv2").unwrap(), vec![Method::Fd, Method::OssV2]);
    }
}
