use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::BenchRecord;
use crate::error::{Error, Result};

/// Cost `t_{p,s}` per problem and solver. A problem is a
/// `(problem_id, start_scale)` pair. `t` is the mean NF over converged
/// repetitions, or `∞` when fewer than half of the repetitions converged.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub problems: Vec<(String, u32)>,
    pub solvers: Vec<String>,
    /// `cost[p][s]`.
    pub cost: Vec<Vec<f64>>,
}

impl ProfileTable {
    pub fn from_records(records: &[BenchRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Usage("no records to profile".into()));
        }
        let solvers: BTreeSet<&str> = records.iter().map(|r| r.solver_id.as_str()).collect();
        let problems: BTreeSet<(&str, u32)> = records.iter().map(|r| (r.problem_id.as_str(), r.start_scale)).collect();
        // (problem, scale, solver) -> (runs, converged, converged nf sum)
        let mut acc: BTreeMap<(&str, u32, &str), (usize, usize, f64)> = BTreeMap::new();
        for r in records {
            let e = acc.entry((&r.problem_id, r.start_scale, &r.solver_id)).or_default();
            e.0 += 1;
            if r.converged {
                e.1 += 1;
                e.2 += r.nf as f64;
            }
        }
        let cost = problems
            .iter()
            .map(|&(p, scale)| {
                solvers
                    .iter()
                    .map(|&s| match acc.get(&(p, scale, s)) {
                        Some(&(runs, ok, sum)) if ok > 0 && 2 * ok >= runs => sum / ok as f64,
                        _ => f64::INFINITY,
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            problems: problems.into_iter().map(|(p, s)| (p.to_string(), s)).collect(),
            solvers: solvers.into_iter().map(str::to_string).collect(),
            cost,
        })
    }

    /// `r_{p,s} = t_{p,s} / min_s t_{p,s}`; `∞` when either is infinite.
    pub fn ratios(&self) -> Vec<Vec<f64>> {
        self.cost
            .iter()
            .map(|row| {
                let best = row.iter().copied().fold(f64::INFINITY, f64::min);
                row.iter()
                    .map(|&t| if t.is_finite() && best.is_finite() { t / best } else { f64::INFINITY })
                    .collect()
            })
            .collect()
    }
}

/// Step function `π_s(α)`, sampled at every breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub solver_id: String,
    /// `(α, π_s(α))`, sorted by `α ≥ 1`.
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// Value of the right-continuous step function at `alpha`.
    pub fn pi_at(&self, alpha: f64) -> f64 {
        self.points
            .iter()
            .take_while(|(a, _)| *a <= alpha)
            .last()
            .map_or(0.0, |&(_, p)| p)
    }
}

/// Profiles of every solver present in `records`, sampled at the union of
/// finite ratios across all solvers plus `α = 1`.
pub fn performance_profile(records: &[BenchRecord]) -> Result<Vec<ProfileCurve>> {
    let table = ProfileTable::from_records(records)?;
    let ratios = table.ratios();
    let np = table.problems.len() as f64;
    let mut alphas: Vec<f64> = ratios.iter().flatten().copied().filter(|r| r.is_finite()).collect();
    alphas.push(1.0);
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    Ok(table
        .solvers
        .iter()
        .enumerate()
        .map(|(s, id)| ProfileCurve {
            solver_id: id.clone(),
            points: alphas
                .iter()
                .map(|&a| {
                    let hits = ratios.iter().filter(|row| row[s] <= a).count();
                    (a, hits as f64 / np)
                })
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::Status;

    fn rec(p: &str, s: &str, rep: usize, nf: usize, ok: bool) -> BenchRecord {
        BenchRecord {
            problem_id: p.into(),
            solver_id: s.into(),
            rep,
            seed: 0,
            start_scale: 1,
            niter: 1,
            nf,
            f_final: 0.0,
            status: Status::GradientSmall,
            converged: ok,
            wall_time: 0.0,
        }
    }

    #[test]
    fn two_solver_example() {
        let recs = vec![
            rec("p1", "s1", 0, 10, true),
            rec("p1", "s2", 0, 20, true),
            rec("p2", "s1", 0, 30, true),
            rec("p2", "s2", 0, 15, true),
            rec("p3", "s1", 0, 99, false),
            rec("p3", "s2", 0, 40, true),
        ];
        let curves = performance_profile(&recs).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(curves[0].pi_at(1.0), third);
        assert_eq!(curves[0].pi_at(2.0), 2.0 * third);
        assert_eq!(curves[1].pi_at(1.0), 2.0 * third);
        assert_eq!(curves[1].pi_at(2.0), 1.0);
        assert_eq!(curves[0].points.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1.0, 2.0]);
    }

    #[test]
    fn half_of_reps_must_converge() {
        let recs = vec![
            rec("p", "a", 0, 10, true),
            rec("p", "a", 1, 30, true),
            rec("p", "a", 2, 99, false),
            rec("p", "b", 0, 10, true),
            rec("p", "b", 1, 10, false),
            rec("p", "b", 2, 10, false),
        ];
        let t = ProfileTable::from_records(&recs).unwrap();
        assert_eq!(t.cost[0], vec![20.0, f64::INFINITY]);
        let c = performance_profile(&recs).unwrap();
        assert_eq!(c[1].pi_at(1e9), 0.0);
        assert_eq!(c[0].pi_at(1.0), 1.0);
    }

    #[test]
    fn empty_records_rejected() {
        assert!(matches!(performance_profile(&[]), Err(Error::Usage(_))));
    }
}
