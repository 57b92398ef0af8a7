//! Convex-roof quantum coherence measures.
//!
//! The crate evaluates six convex-roof coherence measures on pure states in
//! closed form, estimates them on mixed states by optimizing over ensemble
//! decompositions, and checks superadditivity inequalities of the form
//! `C(ρ_AB) ≥ C(ρ_A) + C(ρ_B)` on bipartite pure states.
//!
//! - [`state`] and [`linalg`]: states, partial traces, entropies, fidelity.
//! - [`haar`]: seeded random sampling.
//! - [`measures`]: pure-state and single-qubit closed forms.
//! - [`roof`]: numerical convex-roof upper bounds.
//! - [`superadditivity`]: inequality checks and the incoherent channel that
//!   maps the marginal pure state onto the reduced state.
//! - [`state_file`]: the JSON state file format.

pub mod error;
pub mod haar;
pub mod linalg;
pub mod measures;
pub mod roof;
pub mod state;
pub mod state_file;
pub mod superadditivity;

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;

pub use error::{Error, Result};
pub use haar::{derive_seed, haar_random_bipartite, haar_random_pure, random_density_matrix};
pub use linalg::{
    conditional_decomposition, diagonal_part, is_incoherent, l1_coherence, marginal_pure_state, partial_trace,
    uhlmann_fidelity, von_neumann_entropy,
};
pub use measures::{
    pure_coherence, pure_coherence_with, qubit_closed_form, qubit_half_entropy, ClosedFormKind, Functional,
    LinearEntropyConvention, MeasureId, QubitClosedForm,
};
pub use roof::{convex_roof_upper_bound, decomposition_from_mixer, RoofConfig, RoofResult};
pub use state::{BipartitePureState, DensityMatrix, Ensemble, PureState, Subsystem};
pub use superadditivity::{
    alt_condition_check, apply_channel, build_theorem_channel, full_superadditivity_gap, theorem_condition_check,
    Certification, CheckOptions, CheckReport, Condition, KrausSet, TermSource,
};
