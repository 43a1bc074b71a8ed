//! The regularized subproblem, the acceptance ratio and the θ update.

use nalgebra::{DMatrix, DVector};

use super::config::SolverConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LmStep {
    pub d: DVector<f64>,
    pub lambda: f64,
    /// True when the Cholesky path failed and the stacked QR solve was used.
    pub used_fallback: bool,
}

fn all_finite<'a>(mut it: impl Iterator<Item = &'a f64>) -> bool {
    it.all(|v| v.is_finite())
}

/// Solves `(JᵀJ + λI) d = −Jᵀr` with `λ = θ‖Jᵀr‖`.
pub fn solve_lm_step(jm: &DMatrix<f64>, r_x: &DVector<f64>, theta: f64) -> Result<LmStep> {
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!("theta must be positive, got {theta}")));
    }
    if jm.nrows() != r_x.len() {
        return Err(Error::Dimension(format!(
            "Jacobian has {} rows but residual has length {}",
            jm.nrows(),
            r_x.len()
        )));
    }
    if !all_finite(jm.iter()) || !all_finite(r_x.iter()) {
        return Err(Error::Overflow);
    }
    let n = jm.ncols();
    let g = jm.tr_mul(r_x);
    let g_norm = g.norm();
    if !g_norm.is_finite() {
        return Err(Error::Overflow);
    }
    if g_norm == 0.0 {
        return Ok(LmStep {
            d: DVector::zeros(n),
            lambda: 0.0,
            used_fallback: false,
        });
    }
    let lambda = theta * g_norm;
    let mut normal = jm.tr_mul(jm);
    for i in 0..n {
        normal[(i, i)] += lambda;
    }
    let neg_g = -&g;

    let (d, used_fallback) = match normal.clone().cholesky() {
        Some(chol) => {
            let mut d = chol.solve(&neg_g);
            // one round of iterative refinement
            let res = &normal * &d + &g;
            if res.norm() > 1e-12 * (1.0 + g_norm) {
                d -= chol.solve(&res);
            }
            (d, false)
        }
        None => (stacked_solve(jm, r_x, lambda)?, true),
    };
    if !all_finite(d.iter()) {
        return Err(Error::Overflow);
    }
    Ok(LmStep {
        d,
        lambda,
        used_fallback,
    })
}

/// Least-squares solve of `[J; √λ I] d ≈ [−r; 0]` by Householder QR.
fn stacked_solve(jm: &DMatrix<f64>, r_x: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let (m, n) = jm.shape();
    let mut stacked = DMatrix::zeros(m + n, n);
    stacked.view_mut((0, 0), (m, n)).copy_from(jm);
    let root = lambda.sqrt();
    for i in 0..n {
        stacked[(m + i, i)] = root;
    }
    let mut rhs = DVector::zeros(m + n);
    rhs.rows_mut(0, m).copy_from(&(-r_x));
    let qr = stacked.qr();
    let qtb = qr.q().tr_mul(&rhs);
    qr.r().solve_upper_triangular(&qtb).ok_or(Error::Overflow)
}

/// Predicted decrease `‖r‖² − ‖r + Jd‖²`, evaluated as `−2(Jᵀr)ᵀd − ‖Jd‖²`
/// to avoid cancellation against `‖r‖²`.
pub fn predicted_reduction(r_x: &DVector<f64>, jm: &DMatrix<f64>, d: &DVector<f64>) -> f64 {
    let jd = jm * d;
    -2.0 * r_x.dot(&jd) - jd.norm_squared()
}

/// `ρ = (‖r‖² − ‖r_trial‖²) / Pred`.
///
/// A non-finite trial residual gives `ρ = −∞`. A non-positive predicted
/// reduction is reported as [`Error::Breakdown`].
pub fn reduction_ratio(
    r_x: &DVector<f64>,
    r_trial: &DVector<f64>,
    jm: &DMatrix<f64>,
    d: &DVector<f64>,
) -> Result<f64> {
    let pred = predicted_reduction(r_x, jm, d);
    if !(pred > 0.0) {
        return Err(Error::Breakdown(pred));
    }
    if !all_finite(r_trial.iter()) {
        return Ok(f64::NEG_INFINITY);
    }
    let ared = r_x.norm_squared() - r_trial.norm_squared();
    if !ared.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ared / pred)
}

/// θ update: inflate on rejection; otherwise compare `‖Jᵀr‖` against
/// `[p₁/θ, p₂/θ)`.
pub fn update_theta(theta: f64, rho: f64, grad_model_norm: f64, cfg: &SolverConfig) -> f64 {
    if !(rho >= cfg.p0) {
        return cfg.a1 * theta;
    }
    if grad_model_norm < cfg.p1 / theta {
        cfg.a1 * theta
    } else if grad_model_norm < cfg.p2 / theta {
        theta
    } else {
        (cfg.a2 * theta).max(cfg.theta_min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_jacobian_closed_form() {
        let j = DMatrix::identity(2, 2);
        let r = DVector::from_vec(vec![1.0, 1.0]);
        let step = solve_lm_step(&j, &r, 1.0).unwrap();
        let s2 = 2f64.sqrt();
        assert!((step.lambda - s2).abs() < 1e-15);
        let expect = -1.0 / (1.0 + s2);
        assert!((step.d[0] - expect).abs() < 1e-15);
        assert!((step.d[1] - expect).abs() < 1e-15);
        assert!((step.d[0] + 0.41421).abs() < 1e-5);

        let step = solve_lm_step(&j, &r, 10.0).unwrap();
        let norm = step.d.norm();
        assert!((norm - s2 / (1.0 + 10.0 * s2)).abs() < 1e-15);
        assert!((norm - 0.0934).abs() < 1e-4);
        assert!(norm <= 0.1);
    }

    #[test]
    fn zero_gradient_gives_zero_step() {
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let r = DVector::from_vec(vec![0.0, 3.0]);
        let step = solve_lm_step(&j, &r, 1.0).unwrap();
        assert_eq!(step.lambda, 0.0);
        assert_eq!(step.d.norm(), 0.0);
    }

    #[test]
    fn invalid_inputs() {
        let j = DMatrix::identity(2, 2);
        let r = DVector::from_vec(vec![1.0, f64::NAN]);
        assert!(matches!(solve_lm_step(&j, &r, 1.0), Err(Error::Overflow)));
        assert!(matches!(
            solve_lm_step(&j, &DVector::zeros(2), 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            solve_lm_step(&j, &DVector::zeros(3), 1.0),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn stacked_fallback_agrees_with_cholesky() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let j = DMatrix::from_fn(6, 4, |_, _| rng.gen_range(-1.0..1.0));
        let r = DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
        let step = solve_lm_step(&j, &r, 0.5).unwrap();
        let d = stacked_solve(&j, &r, step.lambda).unwrap();
        assert!((d - &step.d).norm() < 1e-12);
    }

    #[test]
    fn affine_ratio_is_one() {
        let j = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 0.5, 0.0, 3.0]);
        let r = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let d = solve_lm_step(&j, &r, 0.1).unwrap().d;
        let r_trial = &r + &j * &d;
        let rho = reduction_ratio(&r, &r_trial, &j, &d).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_progress_ratio_is_zero() {
        let j = DMatrix::identity(2, 2);
        let r = DVector::from_vec(vec![1.0, 1.0]);
        let d = solve_lm_step(&j, &r, 1.0).unwrap().d;
        let rho = reduction_ratio(&r, &r, &j, &d).unwrap();
        assert_eq!(rho, 0.0);
        assert!(rho < SolverConfig::default().p0);
    }

    #[test]
    fn quadratic_ratio_brute_force() {
        // r(x) = x², x = 1, J = 2, d = −0.1
        let r = DVector::from_element(1, 1.0);
        let j = DMatrix::from_element(1, 1, 2.0);
        let d = DVector::from_element(1, -0.1);
        let r_trial = DVector::from_element(1, 0.81);
        let ared = 1.0 - 0.81f64 * 0.81;
        let pred = 1.0 - (1.0f64 - 0.2).powi(2);
        let rho = reduction_ratio(&r, &r_trial, &j, &d).unwrap();
        assert!((rho - ared / pred).abs() < 1e-12, "{rho} vs {}", ared / pred);
    }

    #[test]
    fn nonfinite_trial_and_breakdown() {
        let j = DMatrix::identity(1, 1);
        let r = DVector::from_element(1, 1.0);
        let d = DVector::from_element(1, -0.5);
        let bad = DVector::from_element(1, f64::INFINITY);
        assert_eq!(reduction_ratio(&r, &bad, &j, &d).unwrap(), f64::NEG_INFINITY);
        // ascent direction has negative predicted reduction
        let up = DVector::from_element(1, 0.5);
        assert!(matches!(reduction_ratio(&r, &r, &j, &up), Err(Error::Breakdown(_))));
    }

    #[test]
    fn theta_update_branches() {
        let cfg = SolverConfig::default();
        assert_eq!(update_theta(1.0, 0.5, 0.05, &cfg), 4.0);
        assert_eq!(update_theta(1.0, 0.5, 0.5, &cfg), 1.0);
        assert_eq!(update_theta(1.0, 0.5, 0.9, &cfg), 0.25);
        assert_eq!(update_theta(1.0, 0.0, 0.9, &cfg), 4.0);
        // half-open interval edges
        assert_eq!(update_theta(1.0, 0.5, 0.25, &cfg), 1.0);
        assert_eq!(update_theta(1.0, 0.5, 0.75, &cfg), 0.25);
        assert_eq!(update_theta(1e-8, 0.5, 1e9, &cfg), 1e-8);
        assert_eq!(update_theta(1.0, f64::NEG_INFINITY, 1e9, &cfg), 4.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn step_satisfies_normal_equations_and_bounds(seed in any::<u64>(), m in 1usize..12, n in 1usize..10, log_theta in -8.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta = 10f64.powf(log_theta);
            let j = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-2.0..2.0));
            let r = DVector::from_fn(m, |_, _| rng.gen_range(-2.0..2.0));
            let step = solve_lm_step(&j, &r, theta).unwrap();
            let g = j.tr_mul(&r);
            let g_norm = g.norm();
            prop_assume!(g_norm > 0.0);
            prop_assert!((step.lambda - theta * g_norm).abs() <= 1e-12 * step.lambda);
            let res = j.tr_mul(&(&j * &step.d)) + step.lambda * &step.d + &g;
            prop_assert!(res.norm() <= 1e-10 * (1.0 + g_norm), "residual {}", res.norm());
            prop_assert!(step.d.norm() <= (1.0 / theta) * (1.0 + 1e-10));
            // Powell's decrease bound
            let pred = predicted_reduction(&r, &j, &step.d);
            let jtj_norm = j.tr_mul(&j).symmetric_eigenvalues().amax();
            let bound = g_norm * step.d.norm().min(g_norm / jtj_norm);
            prop_assert!(pred >= bound * (1.0 - 1e-8), "pred {pred} < {bound}");
        }
    }
}
