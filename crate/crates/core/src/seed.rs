//! Stable seed derivation for independent random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// 64-bit FNV-1a over the given byte strings, each followed by a separator.
pub fn stable_hash(parts: &[&[u8]]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for part in parts {
        for &byte in part.iter().chain(std::iter::once(&0xff)) {
            h ^= byte as u64;
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}

/// `base_seed ⊕ hash(problem_id, solver_id, rep)`.
pub fn cell_seed(base_seed: u64, problem_id: &str, solver_id: &str, start_scale: u32, rep: usize) -> u64 {
    base_seed
        ^ stable_hash(&[
            problem_id.as_bytes(),
            solver_id.as_bytes(),
            &start_scale.to_le_bytes(),
            &(rep as u64).to_le_bytes(),
        ])
}

/// Seed of the random start point for a repetition; shared by all solvers
/// so they are compared from the same `x₀`.
pub fn start_seed(base_seed: u64, problem_id: &str, rep: usize) -> u64 {
    base_seed ^ stable_hash(&[b"start", problem_id.as_bytes(), &(rep as u64).to_le_bytes()])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_value() {
        // FNV-1a of "a" followed by the 0xff separator
        let mut h: u64 = 0xcbf29ce484222325;
        for b in [b'a', 0xff] {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        assert_eq!(stable_hash(&[b"a"]), h);
    }

    #[test]
    fn seeds_differ_across_cells() {
        let a = cell_seed(1, "ex1", "dflm-fd", 1, 0);
        let b = cell_seed(1, "ex1", "dflm-fd", 1, 1);
        let c = cell_seed(1, "ex1", "dflm-ossv1", 1, 0);
        assert!(a != b && a != c && b != c);
        assert_eq!(a, cell_seed(1, "ex1", "dflm-fd", 1, 0));
        assert_ne!(start_seed(1, "ex1", 0), start_seed(1, "ex1", 1));
    }
}
