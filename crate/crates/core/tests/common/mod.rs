use std::collections::HashMap;

use dflm::bench::BenchRecord;

/// Direct evaluation of the profile definition: `π_s(α)` for one solver.
pub fn brute_force_pi(records: &[BenchRecord], solver: &str, alpha: f64) -> f64 {
    let mut groups: HashMap<(String, u32), HashMap<String, Vec<&BenchRecord>>> = HashMap::new();
    for r in records {
        groups
            .entry((r.problem_id.clone(), r.start_scale))
            .or_default()
            .entry(r.solver_id.clone())
            .or_default()
            .push(r);
    }
    let cost = |runs: &Vec<&BenchRecord>| {
        let ok: Vec<_> = runs.iter().filter(|r| r.converged).collect();
        if ok.is_empty() || ok.len() * 2 < runs.len() {
            f64::INFINITY
        } else {
            ok.iter().map(|r| r.nf as f64).sum::<f64>() / ok.len() as f64
        }
    };
    let mut within = 0;
    for by_solver in groups.values() {
        let best = by_solver.values().map(cost).fold(f64::INFINITY, f64::min);
        let mine = by_solver.get(solver).map_or(f64::INFINITY, cost);
        if mine.is_finite() && best.is_finite() && mine / best <= alpha {
            within += 1;
        }
    }
    within as f64 / groups.len() as f64
}
