//! Superadditivity checks on bipartite pure states.
//!
//! Three inequalities are checked, each as `lhs ≥ Σ rhs_terms`:
//!
//! - [`Condition::Sufficient`]: `C(φ_AB) ≥ C(Σ_i √q_i |i⟩_A) + Σ_i q_i C(φ_i^B)`.
//!   Holding for every pure `φ_AB` implies superadditivity on all states.
//! - [`Condition::Alternative`]: `C(φ_AB) ≥ Σ_j p_j C(φ_j^A) + Σ_i q_i C(φ_i^B)`,
//!   whose right side never exceeds the sufficient condition's.
//! - [`Condition::Full`]: `C(φ_AB) ≥ C(ρ_A) + C(ρ_B)` itself.
//!
//! The sufficient condition is tied to the full one by an incoherent channel
//! (see [`build_theorem_channel`]) taking the marginal pure state to `ρ_A`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{conditional_decomposition, marginal_pure_state, marginal_weights, partial_trace, BRANCH_TOL};
use crate::measures::{qubit_closed_form, ClosedFormKind, Functional, LinearEntropyConvention, MeasureId};
use crate::roof::{convex_roof_upper_bound, RoofConfig};
use crate::state::{BipartitePureState, DensityMatrix, Subsystem};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Sufficient,
    Alternative,
    Full,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Sufficient => "sufficient",
            Condition::Alternative => "alternative",
            Condition::Full => "full",
        }
    }
}

impl std::str::FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sufficient" | "theorem" => Ok(Condition::Sufficient),
            "alternative" | "alt" => Ok(Condition::Alternative),
            "full" | "superadditivity" => Ok(Condition::Full),
            other => Err(format!("unknown condition `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    /// Every term came from an exact closed form.
    Exact,
    /// Some right-side term is an upper bound; a non-negative gap is certified.
    UpperBoundedRhs,
    /// Some right-side term is an upper bound and the gap is negative, so the
    /// violation is only indicative.
    Estimated,
}

/// How a right-side term was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermSource {
    ClosedForm,
    PureMarginal,
    QubitClosedForm,
    QubitUpperBound,
    ConvexRoof,
}

impl TermSource {
    pub fn is_exact(self) -> bool {
        !matches!(self, TermSource::QubitUpperBound | TermSource::ConvexRoof)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhsTerm {
    pub label: String,
    pub value: f64,
    pub source: TermSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    pub measure: MeasureId,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub literal_linear_entropy: bool,
    pub condition: Condition,
    pub lhs: f64,
    pub rhs_terms: Vec<RhsTerm>,
    pub gap: f64,
    pub satisfied: bool,
    pub certification: Certification,
    pub state_digest: String,
}

impl CheckReport {
    pub fn rhs_sum(&self) -> f64 {
        self.rhs_terms.iter().map(|t| t.value).sum()
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.rhs_terms.iter().find(|t| t.label == label).map(|t| t.value)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// A check is satisfied when `gap ≥ -numeric_slack`.
    pub numeric_slack: f64,
    pub convention: LinearEntropyConvention,
    /// When a qubit marginal only has an upper-bound expression, also run the
    /// optimizer and keep the smaller value.
    pub refine_qubit_bounds: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            numeric_slack: 1e-9,
            convention: LinearEntropyConvention::Corrected,
            refine_qubit_bounds: false,
        }
    }
}

impl CheckOptions {
    fn functional(&self, measure: MeasureId) -> Functional {
        Functional::new(measure, self.convention)
    }
}

/// Short SHA-256 digest of the coefficient matrix (dims, then row-major
/// real/imaginary bit patterns).
pub fn state_digest(phi: &BipartitePureState) -> String {
    let mut h = Sha256::new();
    h.update((phi.dim_a() as u64).to_le_bytes());
    h.update((phi.dim_b() as u64).to_le_bytes());
    for i in 0..phi.dim_a() {
        for j in 0..phi.dim_b() {
            let z = phi.coeffs()[(i, j)];
            h.update(z.re.to_bits().to_le_bytes());
            h.update(z.im.to_bits().to_le_bytes());
        }
    }
    hex::encode(&h.finalize()[..8])
}

fn averaged(f: Functional, phi: &BipartitePureState, on: Subsystem) -> f64 {
    conditional_decomposition(phi, on)
        .iter()
        .map(|(w, s)| w * f.evaluate(s.amplitudes()))
        .sum()
}

fn assemble(
    measure: MeasureId,
    condition: Condition,
    phi: &BipartitePureState,
    lhs: f64,
    rhs_terms: Vec<RhsTerm>,
    opts: &CheckOptions,
) -> CheckReport {
    let gap = lhs - rhs_terms.iter().map(|t| t.value).sum::<f64>();
    let satisfied = gap >= -opts.numeric_slack;
    let certification = if rhs_terms.iter().all(|t| t.source.is_exact()) {
        Certification::Exact
    } else if satisfied {
        Certification::UpperBoundedRhs
    } else {
        Certification::Estimated
    };
    CheckReport {
        label: None,
        measure,
        literal_linear_entropy: opts.functional(measure).is_literal(),
        condition,
        lhs,
        rhs_terms,
        gap,
        satisfied,
        certification,
        state_digest: state_digest(phi),
    }
}

fn closed(label: &str, value: f64) -> RhsTerm {
    RhsTerm {
        label: label.to_string(),
        value,
        source: TermSource::ClosedForm,
    }
}

/// `C(φ_AB)` against `C(Σ_i √q_i |i⟩_A) + Σ_i q_i C(φ_i^B)`.
pub fn theorem_condition_check(measure: MeasureId, phi: &BipartitePureState, opts: &CheckOptions) -> CheckReport {
    let f = opts.functional(measure);
    let lhs = f.evaluate(phi.flatten().amplitudes());
    let marginal = f.evaluate(marginal_pure_state(phi).amplitudes());
    let avg_b = averaged(f, phi, Subsystem::A);
    assemble(
        measure,
        Condition::Sufficient,
        phi,
        lhs,
        vec![closed("marginal_A_pure", marginal), closed("avg_B", avg_b)],
        opts,
    )
}

/// `C(φ_AB)` against `Σ_j p_j C(φ_j^A) + Σ_i q_i C(φ_i^B)`.
pub fn alt_condition_check(measure: MeasureId, phi: &BipartitePureState, opts: &CheckOptions) -> CheckReport {
    let f = opts.functional(measure);
    let lhs = f.evaluate(phi.flatten().amplitudes());
    let avg_a = averaged(f, phi, Subsystem::B);
    let avg_b = averaged(f, phi, Subsystem::A);
    assemble(
        measure,
        Condition::Alternative,
        phi,
        lhs,
        vec![closed("avg_A", avg_a), closed("avg_B", avg_b)],
        opts,
    )
}

fn marginal_term(
    f: Functional,
    phi: &BipartitePureState,
    side: Subsystem,
    config: &RoofConfig,
    refine: bool,
    label: &str,
) -> Result<RhsTerm> {
    let rho = partial_trace(phi, side);
    let term = |value, source| RhsTerm {
        label: label.to_string(),
        value,
        source,
    };
    if rho.rank() == 1 {
        let (_, vecs) = rho.eigen();
        let top: Vec<C64> = vecs.column(0).iter().copied().collect();
        return Ok(term(f.evaluate(&top), TermSource::PureMarginal));
    }
    if rho.dim() == 2 {
        if let Some(cf) = qubit_closed_form(f, &rho)? {
            match cf.kind {
                ClosedFormKind::Exact => return Ok(term(cf.value, TermSource::QubitClosedForm)),
                ClosedFormKind::UpperBound if !refine => return Ok(term(cf.value, TermSource::QubitUpperBound)),
                ClosedFormKind::UpperBound => {
                    let roof = convex_roof_upper_bound(f, &rho, config)?.value;
                    return Ok(if roof < cf.value {
                        term(roof, TermSource::ConvexRoof)
                    } else {
                        term(cf.value, TermSource::QubitUpperBound)
                    });
                }
            }
        }
    }
    let roof = convex_roof_upper_bound(f, &rho, config)?;
    // Conditioning on the other side is itself a decomposition of `rho`.
    let other = match side {
        Subsystem::A => Subsystem::B,
        Subsystem::B => Subsystem::A,
    };
    let conditional = averaged(f, phi, other);
    Ok(term(roof.value.min(conditional), TermSource::ConvexRoof))
}

/// `C(φ_AB)` against `C(ρ_A) + C(ρ_B)`.
///
/// Pure marginals and single-qubit marginals with an exact closed form are
/// evaluated exactly. Otherwise the marginal term is the smaller of the
/// convex-roof estimate and the conditional decomposition induced by the
/// other subsystem; both are realized by concrete ensembles, so such terms
/// are upper bounds.
pub fn full_superadditivity_gap(
    measure: MeasureId,
    phi: &BipartitePureState,
    config: &RoofConfig,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let f = opts.functional(measure);
    let lhs = f.evaluate(phi.flatten().amplitudes());
    let refine = opts.refine_qubit_bounds;
    let a = marginal_term(f, phi, Subsystem::A, config, refine, "rho_A")?;
    let b = marginal_term(f, phi, Subsystem::B, config, refine, "rho_B")?;
    Ok(assemble(measure, Condition::Full, phi, lhs, vec![a, b], opts))
}

/// For each ordered pair `i ≠ j`, the cross term `√(Σ_kl |c_ik c_jl|²)` of
/// the marginal concurrence next to its termwise bound `Σ_kl |c_ik c_jl|`.
pub fn concurrence_cross_terms(phi: &BipartitePureState) -> Vec<(usize, usize, f64, f64)> {
    let c = phi.coeffs();
    let (da, db) = c.shape();
    let mut out = Vec::new();
    for i in 0..da {
        for j in 0..da {
            if i == j {
                continue;
            }
            let mut sq = 0.0;
            let mut abs = 0.0;
            for k in 0..db {
                for l in 0..db {
                    let x = (c[(i, k)] * c[(j, l)]).norm();
                    sq += x * x;
                    abs += x;
                }
            }
            out.push((i, j, sq.sqrt(), abs));
        }
    }
    out
}

/// Entries below this count as structural zeros in Kraus operators.
pub const KRAUS_ZERO: f64 = 1e-14;
/// Largest accepted deviation of `Σ K†K` from the identity.
pub const COMPLETENESS_TOL: f64 = 1e-8;

/// Kraus operators of an incoherent channel: each operator sends every basis
/// state to a multiple of a basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<DMatrix<C64>>,
}

impl KrausSet {
    pub fn new(operators: Vec<DMatrix<C64>>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::EmptyKraus);
        };
        let d = first.nrows();
        for (idx, k) in operators.iter().enumerate() {
            if k.nrows() != k.ncols() {
                return Err(Error::NotSquare(k.nrows(), k.ncols()));
            }
            if k.nrows() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: k.nrows(),
                });
            }
            let coherent = k
                .column_iter()
                .any(|col| col.iter().filter(|z| z.norm() > KRAUS_ZERO).count() > 1);
            if coherent {
                return Err(Error::CoherentKraus(idx));
            }
        }
        let set = Self { operators };
        let dev = set.completeness_error();
        if dev > COMPLETENESS_TOL {
            return Err(Error::IncompleteKraus(dev));
        }
        Ok(set)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            operators: vec![DMatrix::identity(dim, dim)],
        }
    }

    pub fn operators(&self) -> &[DMatrix<C64>] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    /// Frobenius norm of `Σ K†K - 1`.
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .operators
            .iter()
            .fold(DMatrix::<C64>::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        (sum - DMatrix::<C64>::identity(d, d)).norm()
    }
}

/// The diagonal operators `K_j = Σ_i (c_ij/√q_i) |i⟩⟨i|`, `j = 1..d_B`.
///
/// Rows with `q_i < 1e-14` get zero entries in every `K_j`; one extra
/// projector onto those rows is appended to keep the set complete.
pub fn build_theorem_channel(phi: &BipartitePureState) -> KrausSet {
    let c = phi.coeffs();
    let q = marginal_weights(phi);
    let scale: Vec<Option<f64>> = q.iter().map(|&w| (w >= BRANCH_TOL).then(|| 1.0 / w.sqrt())).collect();
    let mut operators: Vec<DMatrix<C64>> = (0..phi.dim_b())
        .map(|j| {
            let diag = DVector::from_iterator(
                phi.dim_a(),
                (0..phi.dim_a()).map(|i| scale[i].map_or(C64::new(0.0, 0.0), |s| c[(i, j)] * s)),
            );
            DMatrix::from_diagonal(&diag)
        })
        .collect();
    if scale.iter().any(Option::is_none) {
        let diag = DVector::from_iterator(
            phi.dim_a(),
            scale.iter().map(|s| {
                if s.is_none() {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        );
        operators.push(DMatrix::from_diagonal(&diag));
    }
    KrausSet { operators }
}

/// `Σ_n K_n ρ K_n†`.
pub fn apply_channel(kraus: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if kraus.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: kraus.dim(),
            found: rho.dim(),
        });
    }
    let d = rho.dim();
    let out = kraus.operators().iter().fold(DMatrix::<C64>::zeros(d, d), |acc, k| {
        acc + k * rho.matrix() * k.adjoint()
    });
    let drift = (out.trace().re - rho.trace()).abs();
    if drift > COMPLETENESS_TOL {
        return Err(Error::IncompleteKraus(drift));
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}
