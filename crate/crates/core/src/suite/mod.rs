//! The benchmark catalog, addressable by string id.

pub mod examples;
pub mod mgh;
pub mod singular;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::ResidualProblem;

pub use singular::{apply_singular_modification, ones_column, SingularModification};

/// Rank-one singular modification of MGH problem `number` at dimension `n`,
/// with id `mgh{number}-mod-n{n}`.
pub fn mgh_modified(number: u32, n: usize) -> Result<ResidualProblem> {
    let base = mgh::base(number, n).ok_or_else(|| Error::UnknownProblem(format!("mgh{number}-n{n}")))?;
    let problem = ResidualProblem::from_arc(
        format!("mgh{number}-n{n}"),
        base.n,
        base.m,
        base.x0.clone(),
        Arc::from(base.model),
    );
    let mut modified = apply_singular_modification(&problem, &base.x_star, &ones_column(n))?;
    modified.id = format!("mgh{number}-mod-n{n}");
    Ok(modified)
}

/// The full catalog in benchmark order.
pub fn make_suite() -> Vec<ResidualProblem> {
    let mut suite = vec![
        examples::coupled_rosenbrock(),
        examples::powell_quartic(30),
        examples::powell_quartic(50),
        examples::paired_quadratic(),
        examples::penalty_one(10),
    ];
    suite.extend(
        mgh::CATALOG
            .iter()
            .map(|&(num, n)| mgh_modified(num, n).expect("catalog entry must build")),
    );
    suite
}

pub fn suite_ids() -> Vec<String> {
    make_suite().into_iter().map(|p| p.id).collect()
}

/// Resolves a catalog id such as `ex4` or `mgh8-mod-n50`.
pub fn lookup(id: &str) -> Result<ResidualProblem> {
    match id {
        "ex1" => return Ok(examples::coupled_rosenbrock()),
        "ex3" => return Ok(examples::paired_quadratic()),
        "ex4" => return Ok(examples::penalty_one(10)),
        _ => {}
    }
    let unknown = || Error::UnknownProblem(id.to_string());
    if let Some(n) = id.strip_prefix("ex2-n") {
        let n: usize = n.parse().map_err(|_| unknown())?;
        if n < 2 {
            return Err(unknown());
        }
        return Ok(examples::powell_quartic(n));
    }
    if let Some(rest) = id.strip_prefix("mgh") {
        let (num, n) = rest.split_once("-mod-n").ok_or_else(unknown)?;
        let num: u32 = num.parse().map_err(|_| unknown())?;
        let n: usize = n.parse().map_err(|_| unknown())?;
        if n == 0 {
            return Err(unknown());
        }
        return mgh_modified(num, n).map_err(|_| unknown());
    }
    Err(unknown())
}

/// Expands `all` or a comma-separated id list.
pub fn resolve_ids(spec: &str) -> Result<Vec<ResidualProblem>> {
    if spec.trim() == "all" {
        return Ok(make_suite());
    }
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(lookup)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_ids_resolve() {
        for p in make_suite() {
            let q = lookup(&p.id).unwrap();
            assert_eq!((q.n, q.m), (p.n, p.m), "{}", p.id);
        }
    }

    #[test]
    fn catalog_size_and_ids() {
        let ids = suite_ids();
        assert_eq!(ids.len(), 14);
        assert!(ids.contains(&"mgh8-mod-n50".to_string()));
        assert!(ids.contains(&"ex4".to_string()));
    }

    #[test]
    fn unknown_ids() {
        for id in ["ex9", "mgh2-mod-n4", "mgh8-n50", "ex2-nX", "mgh1-mod-n3"] {
            assert!(matches!(lookup(id), Err(Error::UnknownProblem(_))), "{id}");
        }
    }

    #[test]
    fn resolve_list() {
        let ps = resolve_ids("ex1, ex4").unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(resolve_ids("all").unwrap().len(), 14);
    }

    #[test]
    fn ex4_carries_optimal_value() {
        let p = lookup("ex4").unwrap();
        let f_star = p.f_star.unwrap();
        assert!((2.0 * f_star - examples::PENALTY_ONE_SUM_SQUARES_N10).abs() <= 5e-11);
    }
}
