//! Reductions, entropies and distances on states.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::state::{sorted_eigen, BipartitePureState, DensityMatrix, PureState, Subsystem};
use crate::C64;

/// Conditional branches with weight below this are dropped.
pub const BRANCH_TOL: f64 = 1e-14;

/// Reduced state of one side: `c·c†` for A, `cᵀ·c̄` for B.
pub fn partial_trace(state: &BipartitePureState, keep: Subsystem) -> DensityMatrix {
    let c = state.coeffs();
    let m = match keep {
        Subsystem::A => c * c.adjoint(),
        Subsystem::B => c.transpose() * c.map(|z| z.conj()),
    };
    DensityMatrix::from_matrix_unchecked(m)
}

/// Decomposes the other side's reduced state by conditioning on the basis of
/// `conditioned_on`.
///
/// Conditioning on A yields `{(q_i, |φ_i⟩_B)}` with `q_i = Σ_j |c_ij|²` and
/// `|φ_i⟩_B = Σ_j c_ij |j⟩/√q_i`; conditioning on B yields `{(p_j, |φ_j⟩_A)}`.
/// Branches with weight below [`BRANCH_TOL`] are omitted.
pub fn conditional_decomposition(state: &BipartitePureState, conditioned_on: Subsystem) -> Vec<(f64, PureState)> {
    let c = state.coeffs();
    let slices: Vec<DVector<C64>> = match conditioned_on {
        Subsystem::A => c.row_iter().map(|r| r.transpose()).collect(),
        Subsystem::B => c.column_iter().map(|col| col.into_owned()).collect(),
    };
    slices
        .into_iter()
        .filter_map(|v| {
            let w = v.norm_squared();
            (w >= BRANCH_TOL).then(|| {
                let scale = C64::new(1.0 / w.sqrt(), 0.0);
                (w, PureState::from_vector_unchecked(v * scale))
            })
        })
        .collect()
}

/// Marginal weights `q_i = Σ_j |c_ij|²` of the A side, including zeros.
pub fn marginal_weights(state: &BipartitePureState) -> Vec<f64> {
    state.coeffs().row_iter().map(|r| r.norm_squared()).collect()
}

/// The pure state `Σ_i √q_i |i⟩_A`.
pub fn marginal_pure_state(state: &BipartitePureState) -> PureState {
    let q = marginal_weights(state);
    let v = DVector::from_iterator(q.len(), q.iter().map(|&w| C64::new(w.sqrt(), 0.0)));
    let norm = v.norm();
    PureState::from_vector_unchecked(v / C64::new(norm, 0.0))
}

/// The dephased state `Δ(ρ) = Σ_i ρ_ii |i⟩⟨i|`.
pub fn diagonal_part(rho: &DensityMatrix) -> DensityMatrix {
    let d = DVector::from_iterator(rho.dim(), (0..rho.dim()).map(|i| rho.entry(i, i)));
    DensityMatrix::from_matrix_unchecked(DMatrix::from_diagonal(&d))
}

/// `-Σ p log₂ p` with `0 log 0 = 0`.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    -probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let vals: Vec<f64> = rho.eigenvalues().into_iter().map(|l| l.max(0.0)).collect();
    shannon_entropy(&vals).max(0.0)
}

/// Eigenvalues at or below this are rounding noise and are clamped to zero
/// before square roots are taken; otherwise a `1e-17` residue becomes a
/// `3e-9` contribution.
const SPECTRAL_FLOOR: f64 = 1e-14;

fn clamped_sqrt(l: f64) -> f64 {
    if l <= SPECTRAL_FLOOR {
        0.0
    } else {
        l.sqrt()
    }
}

/// Principal square root of a positive semidefinite Hermitian matrix, with
/// negative and noise-level eigenvalues clamped to zero.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = sorted_eigen(m);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&l| C64::new(clamped_sqrt(l), 0.0)));
    &vecs * DMatrix::from_diagonal(&d) * vecs.adjoint()
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let s = psd_sqrt(rho.matrix());
    let inner = &s * sigma.matrix() * &s;
    let inner = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
    let (vals, _) = sorted_eigen(&inner);
    let tr: f64 = vals.iter().map(|&l| clamped_sqrt(l)).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// `Σ_{i≠j} |ρ_ij|`.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let n = rho.dim();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    total
}

/// True iff every off-diagonal magnitude is at most `tol`.
pub fn is_incoherent(rho: &DensityMatrix, tol: f64) -> bool {
    let m = rho.matrix();
    let n = rho.dim();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].norm() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_all() -> BipartitePureState {
        BipartitePureState::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap()
    }

    fn half_entropy_witness() -> BipartitePureState {
        BipartitePureState::from_real_rows(&[
            &[(0.53f64).sqrt(), (0.22f64).sqrt()],
            &[(0.22f64).sqrt(), (0.03f64).sqrt()],
        ])
        .unwrap()
    }

    fn plus() -> PureState {
        PureState::from_real(&[1.0, 1.0]).unwrap()
    }

    #[test]
    fn partial_trace_of_product_state() {
        let s = BipartitePureState::product(&PureState::basis(2, 0), &PureState::basis(2, 0));
        let rho = partial_trace(&s, Subsystem::A);
        assert!((rho.entry(0, 0).re - 1.0).abs() < 1e-15);
        assert!(rho.entry(1, 1).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_uniform_is_rank_one_half() {
        let rho = partial_trace(&half_all(), Subsystem::A);
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho.entry(i, j) - C64::new(0.5, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_bell_is_maximally_mixed() {
        let s = BipartitePureState::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let rho = partial_trace(&s, Subsystem::B);
        assert!((rho.entry(0, 0).re - 0.5).abs() < 1e-15);
        assert!((rho.entry(1, 1).re - 0.5).abs() < 1e-15);
        assert!(rho.entry(0, 1).norm() < 1e-15);
    }

    #[test]
    fn conditional_decomposition_cases() {
        let parts = conditional_decomposition(&half_all(), Subsystem::A);
        assert_eq!(parts.len(), 2);
        for (w, s) in &parts {
            assert!((w - 0.5).abs() < 1e-15);
            assert!((s.inner(&plus()).unwrap().norm() - 1.0).abs() < 1e-14);
        }

        let parts = conditional_decomposition(&half_entropy_witness(), Subsystem::A);
        assert!((parts[0].0 - 0.75).abs() < 1e-14);
        assert!((parts[1].0 - 0.25).abs() < 1e-14);

        let s = BipartitePureState::product(&PureState::basis(2, 0), &PureState::basis(2, 0));
        let parts = conditional_decomposition(&s, Subsystem::A);
        assert_eq!(parts.len(), 1);
        assert!((parts[0].0 - 1.0).abs() < 1e-15);
        assert_eq!(parts[0].1, PureState::basis(2, 0));
    }

    #[test]
    fn marginal_pure_state_cases() {
        let m = marginal_pure_state(&half_all());
        assert!((m.inner(&plus()).unwrap().norm() - 1.0).abs() < 1e-14);

        let s = BipartitePureState::product(&PureState::basis(2, 1), &PureState::basis(2, 0));
        assert_eq!(marginal_pure_state(&s).amplitudes()[1], C64::new(1.0, 0.0));

        let m = marginal_pure_state(&half_entropy_witness());
        assert!((m.amplitudes()[0].re - 0.75f64.sqrt()).abs() < 1e-14);
        assert!((m.amplitudes()[1].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn diagonal_part_cases() {
        let d = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        assert_eq!(diagonal_part(&d), d);
        let p = diagonal_part(&plus().projector());
        assert!((p.entry(0, 0).re - 0.5).abs() < 1e-15 && p.entry(0, 1).norm() == 0.0);
        let rho_a = partial_trace(&half_entropy_witness(), Subsystem::A);
        let pops = diagonal_part(&rho_a).populations();
        assert!((pops[0] - 0.75).abs() < 1e-14 && (pops[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn entropy_cases() {
        assert!(von_neumann_entropy(&plus().projector()).abs() < 1e-12);
        let mixed = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
        assert!((von_neumann_entropy(&mixed) - 1.0).abs() < 1e-14);
        let skew = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        let h = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((von_neumann_entropy(&skew) - h).abs() < 1e-14);
        assert!((h - 0.811_278_124_459_132_8).abs() < 1e-15);
    }

    #[test]
    fn fidelity_cases() {
        let rho = partial_trace(&half_entropy_witness(), Subsystem::A);
        assert!((uhlmann_fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        let f = uhlmann_fidelity(&PureState::basis(2, 0).projector(), &PureState::basis(2, 1).projector()).unwrap();
        assert!(f.abs() < 1e-12);
        let mixed = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
        assert!((uhlmann_fidelity(&plus().projector(), &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            uhlmann_fidelity(&mixed, &DensityMatrix::diagonal(&[1.0, 0.0, 0.0]).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn l1_cases() {
        assert_eq!(l1_coherence(&DensityMatrix::diagonal(&[0.2, 0.3, 0.5]).unwrap()), 0.0);
        assert!((l1_coherence(&plus().projector()) - 1.0).abs() < 1e-14);
        for d in 2..=6 {
            let m = PureState::maximally_coherent(d).projector();
            assert!((l1_coherence(&m) - (d as f64 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn incoherence_cases() {
        assert!(is_incoherent(&DensityMatrix::diagonal(&[0.2, 0.8]).unwrap(), 1e-10));
        assert!(!is_incoherent(&plus().projector(), 1e-10));
        let rho = partial_trace(&half_entropy_witness(), Subsystem::A);
        assert!(is_incoherent(&diagonal_part(&rho), 1e-10));
    }

    #[test]
    fn zero_rows_are_dropped() {
        let s = BipartitePureState::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(conditional_decomposition(&s, Subsystem::A).len(), 1);
        assert_eq!(conditional_decomposition(&s, Subsystem::B).len(), 2);
    }
}
