use coherence_core::haar::{derive_seed, haar_random_bipartite};
use coherence_core::linalg::{is_incoherent, marginal_pure_state, partial_trace};
use coherence_core::measures::{pure_coherence, qubit_closed_form, ClosedFormKind, MeasureId};
use coherence_core::roof::{convex_roof_upper_bound, RoofConfig};
use coherence_core::state::{BipartitePureState, DensityMatrix, Subsystem};
use coherence_core::superadditivity::{
    alt_condition_check, apply_channel, build_theorem_channel, concurrence_cross_terms, full_superadditivity_gap,
    theorem_condition_check, Certification, CheckOptions, TermSource,
};

/// 500 states spread over `d_A, d_B ∈ {2, 3, 4}`.
fn sample(stream: u64) -> Vec<BipartitePureState> {
    (0..500u64)
        .map(|k| {
            let da = 2 + (k % 3) as usize;
            let db = 2 + (k / 3 % 3) as usize;
            haar_random_bipartite(da, db, derive_seed(stream, k))
        })
        .collect()
}

#[test]
fn formation_condition_holds_with_equality() {
    let opts = CheckOptions::default();
    let worst = sample(40)
        .iter()
        .map(|phi| theorem_condition_check(MeasureId::Formation, phi, &opts).gap.abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn concurrence_condition_is_one_sided() {
    let opts = CheckOptions::default();
    for phi in sample(40) {
        let r = theorem_condition_check(MeasureId::Concurrence, &phi, &opts);
        assert!(r.gap >= -1e-9, "{}", r.gap);
        assert!(r.satisfied);
        assert_eq!(r.certification, Certification::Exact);
    }
}

#[test]
fn concurrence_cross_terms_are_termwise_bounded() {
    for k in 0..50 {
        let phi = haar_random_bipartite(3, 3, derive_seed(41, k));
        for (i, j, root, sum) in concurrence_cross_terms(&phi) {
            assert!(i != j);
            assert!(root <= sum + 1e-12);
        }
    }
}

#[test]
fn report_arithmetic_is_consistent() {
    let opts = CheckOptions::default();
    for phi in sample(42).iter().take(100) {
        for m in MeasureId::ALL {
            for r in [
                theorem_condition_check(m, phi, &opts),
                alt_condition_check(m, phi, &opts),
            ] {
                assert!((r.gap - (r.lhs - r.rhs_sum())).abs() < 1e-12);
                assert_eq!(r.satisfied, r.gap >= -opts.numeric_slack);
            }
        }
    }
}

#[test]
fn alternative_rhs_never_exceeds_theorem_rhs() {
    let opts = CheckOptions::default();
    for phi in sample(43) {
        for m in MeasureId::ALL {
            let alt = alt_condition_check(m, &phi, &opts).rhs_sum();
            let thm = theorem_condition_check(m, &phi, &opts).rhs_sum();
            assert!(alt <= thm + 1e-9, "{m}: {alt} > {thm}");
        }
    }
}

fn consistency(da: usize, db: usize, n: u64, stream: u64, cfg: &RoofConfig) -> usize {
    let opts = CheckOptions::default();
    let mut checked = 0;
    for k in 0..n {
        let phi = haar_random_bipartite(da, db, derive_seed(stream, k));
        for m in MeasureId::ALL {
            if theorem_condition_check(m, &phi, &opts).gap < 0.0 {
                continue;
            }
            checked += 1;
            let full = full_superadditivity_gap(m, &phi, cfg, &opts).unwrap();
            assert!(full.gap >= -1e-6, "{m} {da}x{db} #{k}: {}", full.gap);
        }
    }
    checked
}

#[test]
fn theorem_condition_implies_superadditivity_on_qubits() {
    assert!(consistency(2, 2, 200, 44, &RoofConfig::default()) > 200);
}

#[test]
fn theorem_condition_implies_superadditivity_beyond_qubits() {
    let cfg = RoofConfig::default().with_restarts(8);
    assert!(consistency(2, 3, 15, 45, &cfg) + consistency(3, 3, 10, 46, &cfg) > 0);
}

#[test]
fn roof_terms_are_labelled_as_estimates() {
    let phi = haar_random_bipartite(3, 3, 47);
    let cfg = RoofConfig::default().with_restarts(4);
    let r = full_superadditivity_gap(MeasureId::Geometric, &phi, &cfg, &CheckOptions::default()).unwrap();
    assert!(r.rhs_terms.iter().all(|t| t.source == TermSource::ConvexRoof));
    assert_ne!(r.certification, Certification::Exact);
}

#[test]
fn theorem_channel_maps_marginal_pure_state_to_marginal() {
    for k in 0..100 {
        let phi = haar_random_bipartite(3, 3, derive_seed(48, k));
        let kraus = build_theorem_channel(&phi);
        assert_eq!(kraus.operators().len(), 3);
        assert!(kraus.completeness_error() < 1e-10);
        for op in kraus.operators() {
            for col in 0..3 {
                assert!(op.column(col).iter().filter(|z| z.norm() > 0.0).count() <= 1);
            }
        }
        let out = apply_channel(&kraus, &marginal_pure_state(&phi).projector()).unwrap();
        assert!(out.frobenius_distance(&partial_trace(&phi, Subsystem::A)) < 1e-10);

        let diag = DensityMatrix::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        assert!(is_incoherent(&apply_channel(&kraus, &diag).unwrap(), 1e-12));
    }
}

/// Coherence of `ρ_A = Λ(Σ_i √q_i |i⟩)` never exceeds that of the input.
/// Exact qubit closed forms are used where they exist; otherwise a
/// convex-roof upper bound below the input value is enough.
#[test]
fn theorem_channel_does_not_increase_coherence() {
    let cfg = RoofConfig::default().with_restarts(8);
    for k in 0..100 {
        let phi = haar_random_bipartite(2, 2 + (k % 2) as usize, derive_seed(49, k));
        let input = marginal_pure_state(&phi);
        let output = apply_channel(&build_theorem_channel(&phi), &input.projector()).unwrap();
        for m in MeasureId::ALL {
            let value = match qubit_closed_form(m, &output).unwrap() {
                Some(cf) if cf.kind == ClosedFormKind::Exact => cf.value,
                _ => convex_roof_upper_bound(m, &output, &cfg).unwrap().value,
            };
            assert!(value <= pure_coherence(m, &input) + 1e-6, "{m} #{k}");
        }
    }
}

fn witness() -> BipartitePureState {
    let (a, b, d) = ((0.53f64).sqrt(), (0.22f64).sqrt(), (0.03f64).sqrt());
    BipartitePureState::from_real_rows(&[&[a, b], &[b, d]]).unwrap()
}

#[test]
fn half_entropy_witness_full_gap() {
    let phi = witness();
    let cfg = RoofConfig::default();
    let plain = full_superadditivity_gap(MeasureId::HalfEntropy, &phi, &cfg, &CheckOptions::default()).unwrap();
    assert!((plain.gap + 0.0096).abs() < 5e-5, "{}", plain.gap);
    assert!(plain.rhs_terms.iter().all(|t| t.source == TermSource::QubitUpperBound));
    assert_eq!(plain.certification, Certification::Estimated);

    let opts = CheckOptions {
        refine_qubit_bounds: true,
        ..CheckOptions::default()
    };
    let refined = full_superadditivity_gap(MeasureId::HalfEntropy, &phi, &cfg, &opts).unwrap();
    assert!(refined.rhs_terms.iter().all(|t| t.source == TermSource::ConvexRoof));
    assert!(refined.gap > 0.006, "{}", refined.gap);
    assert_eq!(refined.certification, Certification::UpperBoundedRhs);
}
