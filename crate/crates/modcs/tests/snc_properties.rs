//! Structural properties of the recoverability certificate beyond the
//! acceptance gate: order independence, erroneous-support handling and
//! cross-checker agreement.

mod common;

use common::{random_instance, seeded, oracle_unique_optimum};
use modcs::lp::DEFAULT_FEAS_TOL;
use modcs::numkit::{DenseMatrix, IndexSet};
use modcs::probability::{
    enumerate_quads, check_quad, substream, CheckerKind, Scenario,
};
use modcs::experiments::gen_uniform_matrix;
use modcs::snc::{self, subset_lp_max};

// Worst margin must not depend on the order subsets are visited in.
#[test]
fn subset_enumeration_order_is_irrelevant() {
    let mut rng = seeded(31, 0);
    for _ in 0..30 {
        let inst = random_instance(&mut rng).snc_instance();
        let members = inst.delta.members().to_vec();
        let d = members.len();
        let n = inst.a.cols();
        let max_over = |masks: Box<dyn Iterator<Item = u64>>| -> f64 {
            let mut largest = 0.0f64;
            for mask in masks {
                let picked: Vec<usize> = (0..d)
                    .filter(|&b| mask >> b & 1 == 1)
                    .map(|b| members[b])
                    .collect();
                let subset = IndexSet::new(n, picked).unwrap();
                if let Some(v) = subset_lp_max(&inst, &subset, DEFAULT_FEAS_TOL).unwrap() {
                    largest = largest.max(v);
                }
            }
            largest
        };
        let forward = max_over(Box::new(0..(1u64 << d)));
        let backward = max_over(Box::new((0..(1u64 << d)).rev()));
        assert_eq!(forward, backward);
    }
}

// Certificate verdicts must match the brute-force LP oracle even when the
// known support contains errors (T not a subset of the true support).
#[test]
fn erroneous_support_agrees_with_oracle() {
    let mut rng = seeded(32, 0);
    let mut with_errors = 0;
    let mut checked = 0;
    while with_errors < 50 {
        let inst = random_instance(&mut rng);
        if inst.quad.errors.is_empty() {
            continue;
        }
        with_errors += 1;
        let report = snc::check_snc(&inst.snc_instance(), 1e-9).unwrap();
        let oracle = oracle_unique_optimum(&inst).unwrap();
        assert_eq!(
            report.recoverable, oracle,
            "disagreement on erroneous-support instance {checked}: \
             certificate {} vs oracle {}",
            report.recoverable, oracle
        );
        checked += 1;
    }
}

// SncCertificate and DirectSolve must produce identical counts when the
// whole quad space is exhausted.
#[test]
fn checkers_agree_on_exhaustive_scenario() {
    let a = gen_uniform_matrix(5, 7, -0.5, 0.5, &mut substream(33, 0));
    let s = Scenario::new(7, 3, 2, 1).unwrap();
    let mut snc_count = 0u64;
    let mut solve_count = 0u64;
    let mut disagreements = Vec::new();
    for quad in enumerate_quads(&s).unwrap() {
        let by_snc = check_quad(&a, &quad, CheckerKind::SncCertificate, 1e-7).unwrap();
        let by_solve = check_quad(&a, &quad, CheckerKind::DirectSolve, 1e-7).unwrap();
        snc_count += u64::from(by_snc);
        solve_count += u64::from(by_solve);
        if by_snc != by_solve {
            disagreements.push(quad);
        }
    }
    assert!(
        disagreements.is_empty(),
        "checkers disagreed on {} quads, e.g. {:?}",
        disagreements.len(),
        disagreements.first()
    );
    assert_eq!(snc_count, solve_count);
}

// A certificate that holds with slack must be insensitive to nonzero
// magnitudes (sign-pattern dependence only).
#[test]
fn magnitude_invariance_with_margin() {
    use modcs::recovery::DEFAULT_RECOVERY_TOL;
    use rand::Rng;
    let mut rng = seeded(34, 0);
    let mut certified = 0;
    while certified < 30 {
        let inst = random_instance(&mut rng);
        let report = snc::check_snc(&inst.snc_instance(), 1e-7).unwrap();
        if !report.recoverable || report.worst_margin <= 1e-3 {
            continue;
        }
        certified += 1;
        let count = inst.quad.support.len();
        for _ in 0..3 {
            let mags: Vec<f64> = (0..count).map(|_| rng.gen_range(0.1..10.0)).collect();
            let ok = snc::check_by_solving(
                &inst.a,
                &inst.quad.known_support(),
                &inst.quad.known_true,
                &inst.quad.pattern,
                &mags,
                DEFAULT_RECOVERY_TOL,
            )
            .unwrap();
            assert!(ok, "rescaled magnitudes broke a certified instance");
        }
    }
}

// Rank-deficient known support must short-circuit with zero subsets.
#[test]
fn report_invariants() {
    let mut rng = seeded(35, 0);
    for _ in 0..50 {
        let inst = random_instance(&mut rng).snc_instance();
        let report = snc::check_snc(&inst, 1e-7).unwrap();
        if report.rank_ok {
            assert_eq!(report.subsets_checked, 1u64 << inst.delta.len());
        } else {
            assert_eq!(report.subsets_checked, 0);
        }
        if report.recoverable {
            assert!(report.rank_ok);
        }
        assert!(report.worst_subset.is_subset_of(&inst.delta) || report.worst_subset.is_empty());
    }
}

// The BP-failure instance from the module docs, via the public surface.
#[test]
fn bp_trap_requires_support_knowledge() {
    let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.3], vec![0.0, 1.0, 0.3]]).unwrap();
    let s = Scenario::new(3, 1, 1, 0).unwrap();
    // with the support known exactly, every quad recovers
    for quad in enumerate_quads(&s).unwrap() {
        assert!(check_quad(&a, &quad, CheckerKind::SncCertificate, 1e-7).unwrap());
    }
}
