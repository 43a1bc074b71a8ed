//! Uniform sampling of orthonormal direction frames on the Stiefel manifold
//! `St(n, b) = {U ∈ Rⁿˣᵇ : UᵀU = I_b}`.
//!
//! A frame is obtained from an `n×b` standard-normal matrix by a Householder
//! QR factorization, with column signs chosen so that the triangular factor
//! has a positive diagonal. The sign convention makes the map well defined
//! and the resulting distribution is the Haar measure.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const MAX_ATTEMPTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionFrame {
    u: DMatrix<f64>,
}

impl DirectionFrame {
    /// Wraps an explicit matrix. Columns must be orthonormal to 1e-12.
    pub fn from_matrix(u: DMatrix<f64>) -> Result<Self> {
        let (n, b) = u.shape();
        if b == 0 || b > n {
            return Err(Error::Dimension(format!("frame must have 1 ≤ b ≤ n, got {n}×{b}")));
        }
        let frame = Self { u };
        let dev = frame.orthonormality_error();
        if dev > 1e-12 {
            return Err(Error::Parameter(format!("columns not orthonormal (deviation {dev:e})")));
        }
        Ok(frame)
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn b(&self) -> usize {
        self.u.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.u.column(j).into_owned()
    }

    /// `max |UᵀU − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.u.transpose() * &self.u;
        (gram - DMatrix::identity(self.b(), self.b())).amax()
    }
}

pub fn sample_frame<R: Rng + ?Sized>(n: usize, b: usize, rng: &mut R) -> Result<DirectionFrame> {
    if b == 0 || b > n {
        return Err(Error::Dimension(format!("need 1 ≤ b ≤ n, got n={n}, b={b}")));
    }
    for _ in 0..MAX_ATTEMPTS {
        let w = DMatrix::from_fn(n, b, |_, _| rng.sample::<f64, _>(StandardNormal));
        let scale = w.amax();
        let qr = w.qr();
        let r = qr.r();
        let diag = r.diagonal();
        if diag.iter().any(|d| !(d.abs() > 1e-10 * scale)) {
            continue;
        }
        let mut q = qr.q();
        for (j, d) in diag.iter().enumerate() {
            if *d < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        return Ok(DirectionFrame { u: q });
    }
    Err(Error::DegenerateFrame(MAX_ATTEMPTS))
}

pub const DEFAULT_POOL_SIZE: usize = 10;

/// A fixed set of frames drawn once; each iteration picks one uniformly.
#[derive(Debug, Clone)]
pub struct FramePool {
    frames: Vec<DirectionFrame>,
}

impl FramePool {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[DirectionFrame] {
        &self.frames
    }

    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> &DirectionFrame {
        &self.frames[rng.gen_range(0..self.frames.len())]
    }

    /// Like [`pick`](Self::pick) but also returns the chosen index.
    pub fn pick_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.gen_range(0..self.frames.len())
    }
}

pub fn build_pool<R: Rng + ?Sized>(n: usize, b: usize, count: usize, rng: &mut R) -> Result<FramePool> {
    if count == 0 {
        return Err(Error::Parameter("frame pool needs at least one frame".into()));
    }
    let frames = (0..count)
        .map(|_| sample_frame(n, b, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(FramePool { frames })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_dimensional_frames_are_fair_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 10_000;
        let mut plus = 0;
        for _ in 0..draws {
            let f = sample_frame(1, 1, &mut rng).unwrap();
            let v = f.matrix()[(0, 0)];
            assert!(v == 1.0 || v == -1.0);
            if v > 0.0 {
                plus += 1;
            }
        }
        let freq = plus as f64 / draws as f64;
        assert!((freq - 0.5).abs() <= 0.02, "{freq}");
    }

    #[test]
    fn invalid_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(sample_frame(3, 4, &mut rng), Err(Error::Dimension(_))));
        assert!(matches!(sample_frame(3, 0, &mut rng), Err(Error::Dimension(_))));
        assert!(matches!(build_pool(3, 2, 0, &mut rng), Err(Error::Parameter(_))));
    }

    #[test]
    fn deterministic_under_seed() {
        let a = sample_frame(6, 4, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        let b = sample_frame(6, 4, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn default_pool_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pool = build_pool(12, 12, DEFAULT_POOL_SIZE, &mut rng).unwrap();
        assert_eq!(pool.len(), 10);
        for f in pool.frames() {
            assert!(f.orthonormality_error() <= 1e-12);
        }
        let picked = pool.pick(&mut rng);
        assert!(picked.orthonormality_error() <= 1e-12);
    }

    #[test]
    fn singleton_pool_always_returns_same_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pool = build_pool(4, 2, 1, &mut rng).unwrap();
        let first = pool.frames()[0].clone();
        for _ in 0..20 {
            assert_eq!(pool.pick(&mut rng), &first);
        }
    }

    #[test]
    fn pool_selection_is_uniform() {
        // chi-square against uniform, 9 dof; 27.88 is the 0.999 quantile
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pool = build_pool(3, 3, 10, &mut rng).unwrap();
        let picks = 10_000;
        let mut counts = [0usize; 10];
        for _ in 0..picks {
            counts[pool.pick_index(&mut rng)] += 1;
        }
        let expected = picks as f64 / 10.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 27.88, "{chi2}");
        for c in counts {
            assert!((c as f64 / picks as f64 - 0.1).abs() <= 0.02);
        }
    }

    #[test]
    fn from_matrix_rejects_non_orthonormal() {
        let m = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(DirectionFrame::from_matrix(m).is_err());
        let e = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!(DirectionFrame::from_matrix(e).is_ok());
    }

    proptest! {
        #[test]
        fn frames_are_orthonormal(seed in any::<u64>(), n in 1usize..40, frac in 0.0f64..1.0) {
            let b = 1 + ((n - 1) as f64 * frac) as usize;
            let f = sample_frame(n, b, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(f.matrix().shape(), (n, b));
            prop_assert!(f.orthonormality_error() <= 1e-12);
            for j in 0..b {
                prop_assert!((f.column(j).norm() - 1.0).abs() <= 1e-12);
            }
        }
    }
}
