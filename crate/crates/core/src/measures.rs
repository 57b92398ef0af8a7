//! Closed forms of the six convex-roof coherence measures.
//!
//! With populations `w_i = |c_i|²` of a pure state:
//!
//! | measure          | pure-state value          |
//! |------------------|---------------------------|
//! | `Formation`      | `-Σ w_i log₂ w_i`         |
//! | `Concurrence`    | `(Σ |c_i|)² - 1`          |
//! | `Geometric`      | `1 - max w_i`             |
//! | `Fidelity`       | `√(1 - max w_i)`          |
//! | `LinearEntropy`  | `1 - Σ w_i²`              |
//! | `HalfEntropy`    | `2 log₂ Σ |c_i|`          |
//!
//! `LinearEntropy` also has a literal convention `Σ w_i²`, which does not
//! vanish on incoherent states and exists only to reproduce published
//! numbers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{l1_coherence, shannon_entropy};
use crate::state::{DensityMatrix, PureState};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureId {
    Formation,
    Concurrence,
    Geometric,
    Fidelity,
    LinearEntropy,
    HalfEntropy,
}

impl MeasureId {
    pub const ALL: [MeasureId; 6] = [
        MeasureId::Formation,
        MeasureId::Concurrence,
        MeasureId::Geometric,
        MeasureId::Fidelity,
        MeasureId::LinearEntropy,
        MeasureId::HalfEntropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::Formation => "formation",
            MeasureId::Concurrence => "concurrence",
            MeasureId::Geometric => "geometric",
            MeasureId::Fidelity => "fidelity",
            MeasureId::LinearEntropy => "linear-entropy",
            MeasureId::HalfEntropy => "half-entropy",
        }
    }

    /// Largest value on a `dim`-dimensional pure state, attained by the
    /// uniform superposition.
    pub fn pure_state_cap(self, dim: usize) -> f64 {
        let d = dim as f64;
        match self {
            MeasureId::Formation | MeasureId::HalfEntropy => d.log2(),
            MeasureId::Concurrence => d - 1.0,
            MeasureId::Geometric | MeasureId::LinearEntropy => 1.0 - 1.0 / d,
            MeasureId::Fidelity => (1.0 - 1.0 / d).sqrt(),
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        MeasureId::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| Error::UnknownMeasure(s.to_string()))
    }
}

/// How the linear-entropy measure is evaluated on pure states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearEntropyConvention {
    /// `1 - Σ |c_i|⁴`, the linear entropy of the dephased state.
    #[default]
    Corrected,
    /// `Σ |c_i|⁴` as printed in the literature.
    Literal,
}

/// A measure together with the linear-entropy convention in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Functional {
    pub measure: MeasureId,
    pub convention: LinearEntropyConvention,
}

impl Functional {
    pub fn new(measure: MeasureId, convention: LinearEntropyConvention) -> Self {
        Self { measure, convention }
    }

    pub fn is_literal(&self) -> bool {
        self.measure == MeasureId::LinearEntropy && self.convention == LinearEntropyConvention::Literal
    }

    /// Value on the normalized state with amplitudes `amps`.
    pub fn evaluate(&self, amps: &[C64]) -> f64 {
        self.weighted(amps)
    }

    /// `p · C(ψ̃/√p)` for an unnormalized vector `ψ̃` with `p = ‖ψ̃‖²`.
    ///
    /// Every measure here is written in a form homogeneous in `ψ̃`, so the
    /// sub-normalized ensemble members of a decomposition can be scored
    /// without dividing through first.
    pub fn weighted(&self, amps: &[C64]) -> f64 {
        let p: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if p <= 0.0 || !p.is_finite() {
            return 0.0;
        }
        match self.measure {
            MeasureId::Formation => {
                let s: f64 = amps
                    .iter()
                    .map(|c| c.norm_sqr())
                    .filter(|&m| m > 0.0)
                    .map(|m| m * (m / p).log2())
                    .sum();
                (-s).max(0.0)
            }
            MeasureId::Concurrence => {
                let l1: f64 = amps.iter().map(|c| c.norm()).sum();
                (l1 * l1 - p).max(0.0)
            }
            MeasureId::Geometric => (p - max_population(amps)).max(0.0),
            MeasureId::Fidelity => (p * (p - max_population(amps)).max(0.0)).sqrt(),
            MeasureId::LinearEntropy => {
                let purity = amps.iter().map(|c| c.norm_sqr().powi(2)).sum::<f64>() / p;
                match self.convention {
                    LinearEntropyConvention::Corrected => (p - purity).max(0.0),
                    LinearEntropyConvention::Literal => purity,
                }
            }
            MeasureId::HalfEntropy => {
                let l1: f64 = amps.iter().map(|c| c.norm()).sum();
                (p * (2.0 * l1.log2() - p.log2())).max(0.0)
            }
        }
    }
}

impl From<MeasureId> for Functional {
    fn from(measure: MeasureId) -> Self {
        Self::new(measure, LinearEntropyConvention::Corrected)
    }
}

fn max_population(amps: &[C64]) -> f64 {
    amps.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max)
}

/// Closed-form value of `measure` on a pure state.
pub fn pure_coherence(measure: MeasureId, psi: &PureState) -> f64 {
    pure_coherence_with(measure, psi, LinearEntropyConvention::Corrected)
}

pub fn pure_coherence_with(measure: MeasureId, psi: &PureState, convention: LinearEntropyConvention) -> f64 {
    let w = psi.probabilities();
    let l1 = || psi.amplitudes().iter().map(|c| c.norm()).sum::<f64>();
    let max_w = || w.iter().copied().fold(0.0, f64::max);
    match measure {
        MeasureId::Formation => shannon_entropy(&w).max(0.0),
        MeasureId::Concurrence => (l1().powi(2) - 1.0).max(0.0),
        MeasureId::Geometric => (1.0 - max_w()).max(0.0),
        MeasureId::Fidelity => (1.0 - max_w()).max(0.0).sqrt(),
        MeasureId::LinearEntropy => {
            let purity: f64 = w.iter().map(|x| x * x).sum();
            match convention {
                LinearEntropyConvention::Corrected => (1.0 - purity).max(0.0),
                LinearEntropyConvention::Literal => purity,
            }
        }
        MeasureId::HalfEntropy => (2.0 * l1().log2()).max(0.0),
    }
}

fn qubit_l1(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::NotQubit(rho.dim()));
    }
    Ok(l1_coherence(rho).clamp(0.0, 1.0))
}

/// `2 log₂(√((1+s)/2) + √((1-s)/2))` with `s = √(1 - C_l1(ρ)²)`.
///
/// Equals the pure-state value on pure qubits. On mixed qubits it is the
/// value of a concrete two-member decomposition (both members share `ρ`'s
/// off-diagonal magnitude), so it bounds the convex roof from above; it is
/// not the infimum in general.
pub fn qubit_half_entropy(rho: &DensityMatrix) -> Result<f64> {
    let t = qubit_l1(rho)?;
    let s = (1.0 - t * t).max(0.0).sqrt();
    Ok((2.0 * (((1.0 + s) / 2.0).sqrt() + ((1.0 - s) / 2.0).sqrt()).log2()).max(0.0))
}

/// Whether a single-qubit closed form is the convex roof itself or only an
/// upper bound on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedFormKind {
    Exact,
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitClosedForm {
    pub value: f64,
    pub kind: ClosedFormKind,
}

/// Single-qubit convex-roof closed form as a function of `t = C_l1(ρ)`.
///
/// With `s = √(1 - t²)`: formation `h((1+s)/2)`, concurrence `t`, geometric
/// `(1-s)/2`, fidelity `√((1-s)/2)`, linear entropy `t²/2`, and the
/// half-entropy bound of [`qubit_half_entropy`]. Returns `None` for the
/// literal linear-entropy convention.
pub fn qubit_closed_form(functional: impl Into<Functional>, rho: &DensityMatrix) -> Result<Option<QubitClosedForm>> {
    let functional = functional.into();
    let t = qubit_l1(rho)?;
    let s = (1.0 - t * t).max(0.0).sqrt();
    let exact = |value: f64| {
        Some(QubitClosedForm {
            value: value.max(0.0),
            kind: ClosedFormKind::Exact,
        })
    };
    Ok(match functional.measure {
        MeasureId::Formation => {
            let p = (1.0 + s) / 2.0;
            exact(shannon_entropy(&[p, 1.0 - p]))
        }
        MeasureId::Concurrence => exact(t),
        MeasureId::Geometric => exact((1.0 - s) / 2.0),
        MeasureId::Fidelity => exact(((1.0 - s) / 2.0).max(0.0).sqrt()),
        MeasureId::LinearEntropy => match functional.convention {
            LinearEntropyConvention::Corrected => exact(t * t / 2.0),
            LinearEntropyConvention::Literal => None,
        },
        MeasureId::HalfEntropy => Some(QubitClosedForm {
            value: qubit_half_entropy(rho)?,
            kind: ClosedFormKind::UpperBound,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::BipartitePureState;

    fn half_all() -> PureState {
        PureState::from_real(&[0.5, 0.5, 0.5, 0.5]).unwrap()
    }

    fn half_entropy_witness() -> PureState {
        PureState::from_real(&[0.53f64.sqrt(), 0.22f64.sqrt(), 0.22f64.sqrt(), 0.03f64.sqrt()]).unwrap()
    }

    fn qubit(p0: f64, off: C64) -> DensityMatrix {
        DensityMatrix::new(nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(p0, 0.0), off, off.conj(), C64::new(1.0 - p0, 0.0)],
        ))
        .unwrap()
    }

    #[test]
    fn names_round_trip_case_insensitively() {
        for m in MeasureId::ALL {
            assert_eq!(m.name().parse::<MeasureId>().unwrap(), m);
            assert_eq!(m.name().to_uppercase().parse::<MeasureId>().unwrap(), m);
        }
        assert!(matches!("entropy".parse::<MeasureId>(), Err(Error::UnknownMeasure(_))));
    }

    #[test]
    fn uniform_two_qubit_values() {
        let s = half_all();
        assert!((pure_coherence(MeasureId::Formation, &s) - 2.0).abs() < 1e-14);
        assert!((pure_coherence(MeasureId::Geometric, &s) - 0.75).abs() < 1e-15);
        assert!((pure_coherence(MeasureId::Fidelity, &s) - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((pure_coherence(MeasureId::LinearEntropy, &s) - 0.75).abs() < 1e-15);
        let lit = pure_coherence_with(MeasureId::LinearEntropy, &s, LinearEntropyConvention::Literal);
        assert!((lit - 0.25).abs() < 1e-15);
    }

    #[test]
    fn half_entropy_witness_value() {
        let exact = 2.0 * ((53f64.sqrt() + 3f64.sqrt() + 2.0 * 22f64.sqrt()) / 10.0).log2();
        let v = pure_coherence(MeasureId::HalfEntropy, &half_entropy_witness());
        assert!((v - exact).abs() < 1e-13);
        assert!((v - 1.7583).abs() < 1e-4, "{v}");
    }

    #[test]
    fn basis_states_have_zero_coherence() {
        for d in 1..=5 {
            for k in 0..d {
                let s = PureState::basis(d, k);
                for m in MeasureId::ALL {
                    assert_eq!(pure_coherence(m, &s), 0.0, "{m} on |{k}⟩");
                }
            }
        }
    }

    #[test]
    fn concurrence_of_uniform_state() {
        for d in 2..=8 {
            let v = pure_coherence(MeasureId::Concurrence, &PureState::maximally_coherent(d));
            assert!((v - (d as f64 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_form_matches_pure_form() {
        let s = half_entropy_witness();
        let scaled: Vec<C64> = s.amplitudes().iter().map(|c| c * 0.6).collect();
        for m in MeasureId::ALL {
            let f = Functional::from(m);
            let direct = pure_coherence(m, &s);
            assert!((f.evaluate(s.amplitudes()) - direct).abs() < 1e-14);
            assert!((f.weighted(&scaled) - 0.36 * direct).abs() < 1e-13, "{m}");
        }
    }

    #[test]
    fn qubit_half_entropy_cases() {
        assert_eq!(
            qubit_half_entropy(&DensityMatrix::diagonal(&[0.3, 0.7]).unwrap()).unwrap(),
            0.0
        );
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap().projector();
        assert!((qubit_half_entropy(&plus).unwrap() - 1.0).abs() < 1e-12);
        let three = DensityMatrix::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(qubit_half_entropy(&three), Err(Error::NotQubit(3))));
    }

    #[test]
    fn qubit_half_entropy_of_witness_marginal() {
        let c =
            BipartitePureState::from_real_rows(&[&[0.53f64.sqrt(), 0.22f64.sqrt()], &[0.22f64.sqrt(), 0.03f64.sqrt()]])
                .unwrap();
        let rho_a = crate::linalg::partial_trace(&c, crate::state::Subsystem::A);
        let v = qubit_half_entropy(&rho_a).unwrap();
        // t = 2·√0.22·(√0.53 + √0.03); value is log₂(1 + t).
        let t = 2.0 * 0.22f64.sqrt() * (0.53f64.sqrt() + 0.03f64.sqrt());
        assert!((v - (1.0 + t).log2()).abs() < 1e-12);
    }

    #[test]
    fn qubit_closed_forms_at_t_point_six() {
        let rho = qubit(0.5, C64::new(0.3, 0.0));
        let h09 = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
        let f = qubit_closed_form(MeasureId::Formation, &rho).unwrap().unwrap();
        assert!((f.value - h09).abs() < 1e-12 && f.kind == ClosedFormKind::Exact);
        assert!((f.value - 0.4690).abs() < 1e-4);
        let g = qubit_closed_form(MeasureId::Geometric, &rho).unwrap().unwrap();
        assert!((g.value - 0.1).abs() < 1e-12);
        let h = qubit_closed_form(MeasureId::HalfEntropy, &rho).unwrap().unwrap();
        assert_eq!(h.kind, ClosedFormKind::UpperBound);
        let lit = Functional::new(MeasureId::LinearEntropy, LinearEntropyConvention::Literal);
        assert!(qubit_closed_form(lit, &rho).unwrap().is_none());
    }

    #[test]
    fn qubit_closed_forms_vanish_on_diagonal_states() {
        let rho = DensityMatrix::diagonal(&[0.35, 0.65]).unwrap();
        for m in MeasureId::ALL {
            assert_eq!(qubit_closed_form(m, &rho).unwrap().unwrap().value, 0.0, "{m}");
        }
    }

    #[test]
    fn qubit_closed_forms_agree_with_pure_values() {
        for seed in 0..50 {
            let psi = crate::haar::haar_random_pure(2, seed);
            let rho = psi.projector();
            for m in MeasureId::ALL {
                let cf = qubit_closed_form(m, &rho).unwrap().unwrap().value;
                assert!((cf - pure_coherence(m, &psi)).abs() < 1e-10, "{m} seed {seed}");
            }
        }
    }
}
