//! Seeded Haar-random states and unitaries.
//!
//! All samplers use ChaCha8 seeded from a `u64`, so a seed fixes the output
//! bitwise across platforms.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::partial_trace;
use crate::state::{BipartitePureState, DensityMatrix, PureState, Subsystem};
use crate::C64;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with an index (SplitMix64 finalizer) so sibling streams
/// do not overlap.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn haar_pure_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    assert!(dim >= 1, "dimension must be positive");
    loop {
        let v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        if let Ok((s, _)) = PureState::normalized(v) {
            return s;
        }
    }
}

/// A Haar-distributed pure state of dimension `dim`.
pub fn haar_random_pure(dim: usize, seed: u64) -> PureState {
    haar_pure_with(dim, &mut rng_from_seed(seed))
}

pub fn haar_bipartite_with<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> BipartitePureState {
    assert!(dim_a >= 1 && dim_b >= 1, "dimensions must be positive");
    loop {
        let m = DMatrix::from_fn(dim_a, dim_b, |_, _| complex_gaussian(rng));
        if let Ok((s, _)) = BipartitePureState::normalized(m) {
            return s;
        }
    }
}

/// A Haar-distributed pure state on `C^{d_A} ⊗ C^{d_B}`.
pub fn haar_random_bipartite(dim_a: usize, dim_b: usize, seed: u64) -> BipartitePureState {
    haar_bipartite_with(dim_a, dim_b, &mut rng_from_seed(seed))
}

/// A full-rank random density matrix drawn from the Hilbert–Schmidt measure
/// (reduced state of a Haar-random `dim × dim` pure state).
pub fn random_density_matrix(dim: usize, seed: u64) -> DensityMatrix {
    partial_trace(&haar_random_bipartite(dim, dim, seed), Subsystem::A)
}

/// A Haar-random `n × n` unitary (QR of a Ginibre matrix with the phases of
/// `R`'s diagonal divided out).
pub fn haar_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = DVector::from_iterator(
        n,
        (0..n).map(|k| {
            let d = r[(k, k)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        }),
    );
    q * DMatrix::from_diagonal(&phases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_one_is_a_phase() {
        let s = haar_random_pure(1, 7);
        assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seeds_are_deterministic() {
        assert_eq!(haar_random_pure(5, 42), haar_random_pure(5, 42));
        assert_ne!(haar_random_pure(5, 42), haar_random_pure(5, 43));
        assert_eq!(haar_random_bipartite(3, 2, 9), haar_random_bipartite(3, 2, 9));
    }

    #[test]
    fn first_population_has_haar_mean() {
        let n = 10_000;
        let samples: Vec<f64> = (0..n)
            .map(|k| haar_random_pure(4, derive_seed(2024, k)).probabilities()[0])
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn unitaries_are_unitary() {
        let mut rng = rng_from_seed(3);
        for n in 1..=6 {
            let u = haar_unitary_with(n, &mut rng);
            let dev = (u.adjoint() * &u - DMatrix::identity(n, n)).norm();
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(1, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
