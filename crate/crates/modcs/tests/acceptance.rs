//! Release gate. Each test covers one acceptance criterion and prints a
//! single PASS/FAIL line (visible with `--nocapture`); any FAIL is a
//! release blocker.

mod common;

use std::sync::OnceLock;

use common::{oracle_unique_optimum, pin_variable, random_instance, seeded, subset_main_col};
use modcs::experiments::{gen_uniform_matrix, run_example1, ExperimentConfig};
use modcs::numkit::IndexSet;
use modcs::probability::{
    exact_probability, mc_probability, quad_space_size, substream, CheckerKind, Scenario,
};
use modcs::snc;
use num_traits::ToPrimitive;
use rand::Rng;

fn report(name: &str, ok: bool) {
    println!("acceptance: {name} ... {}", if ok { "PASS" } else { "FAIL" });
}

struct Fig1Run {
    points: Vec<(usize, usize, f64, f64)>, // (ell, p1, theoretical, empirical)
    csv: Vec<u8>,
}

fn fig1_run() -> &'static Fig1Run {
    static RUN: OnceLock<Fig1Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let outcome = run_example1(&ExperimentConfig::example1(42), dir.path()).unwrap();
        let csv = std::fs::read(dir.path().join("fig1.csv")).unwrap();
        let points = outcome
            .points
            .iter()
            .map(|p| {
                (p.scenario.ell, p.scenario.p1, p.theoretical.unwrap(), p.empirical.unwrap())
            })
            .collect();
        Fig1Run { points, csv }
    })
}

// 1. Exact curves track the 1000-trial empirical rates within 0.05 at
// all 18 grid points (ell 2..=7, p = 2, p1 0..=2) for one seeded 7x9
// uniform matrix.
#[test]
fn figure1_exact_vs_empirical_fit() {
    let run = fig1_run();
    assert_eq!(run.points.len(), 18);
    let worst = run
        .points
        .iter()
        .map(|&(_, _, theo, emp)| (theo - emp).abs())
        .fold(0.0f64, f64::max);
    let ok = worst <= 0.05;
    report("figure-1 fit (|exact - empirical| <= 0.05 at 18 points)", ok);
    assert!(ok, "worst gap {worst:.4}");
}

// 2. For each sparsity level the exact curves are ordered by error
// count: P(p1=0) >= P(p1=1) - 0.01 >= P(p1=2) - 0.02.
#[test]
fn figure1_curve_ordering() {
    let run = fig1_run();
    let mut ok = true;
    for ell in 2..=7usize {
        let at = |p1: usize| {
            run.points
                .iter()
                .find(|&&(l, e, _, _)| l == ell && e == p1)
                .map(|&(_, _, theo, _)| theo)
                .unwrap()
        };
        ok &= at(0) >= at(1) - 0.01 && at(1) - 0.01 >= at(2) - 0.02;
    }
    report("figure-1 ordering (fewer support errors never hurt)", ok);
    assert!(ok);
}

// 3. Quad-space cardinalities: 20160 for (9,4,2,1) and 1.24e37 (to 3
// significant figures) for (128,20,8,3).
#[test]
fn quad_space_cardinalities() {
    let small = quad_space_size(&Scenario::new(9, 4, 2, 1).unwrap());
    let large = quad_space_size(&Scenario::new(128, 20, 8, 3).unwrap())
        .to_f64()
        .unwrap();
    let rounded = (large / 1e35).round() / 100.0;
    let ok = small == 20160u32.into() && (rounded - 1.24).abs() < 1e-12;
    report("quad-space counts (20160 and 1.24e37)", ok);
    assert!(ok, "small {small}, large {large:e} rounds to {rounded}");
}

// 4. Monte Carlo converges on the small study-2 case: the M = 10000
// estimate sits within 0.03 of the exact probability and the estimates
// across M in {100,...,10000} spread by at most 0.1.
#[test]
fn monte_carlo_convergence_small_case() {
    let a = gen_uniform_matrix(7, 9, -0.5, 0.5, &mut substream(42, 10));
    let s = Scenario::new(9, 4, 2, 1).unwrap();
    let exact = exact_probability(&a, &s, CheckerKind::DirectSolve, 1e-7).unwrap().value;
    let grid = [100u64, 500, 1000, 5000, 10000];
    let estimates: Vec<f64> = grid
        .iter()
        .map(|&m| {
            mc_probability(&a, &s, m, 7, CheckerKind::Auto, 1e-7).unwrap().value
        })
        .collect();
    let top = *estimates.last().unwrap();
    let spread = estimates.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - estimates.iter().cloned().fold(f64::INFINITY, f64::min);
    let ok = (top - exact).abs() <= 0.03 && spread <= 0.1;
    report("Monte Carlo convergence (within 0.03 of exact, spread <= 0.1)", ok);
    assert!(ok, "exact {exact:.4}, top-M {top:.4}, spread {spread:.4}");
}

// 5. The certificate agrees with the brute-force unique-optimal-vertex
// oracle on 500 seeded random instances. 100% agreement required.
#[test]
fn certificate_matches_vertex_oracle() {
    let mut rng = seeded(5, 0);
    let mut disagreements = 0usize;
    for _ in 0..500 {
        let inst = random_instance(&mut rng);
        let verdict = snc::check_snc(&inst.snc_instance(), 1e-9).unwrap().recoverable;
        let oracle = oracle_unique_optimum(&inst).unwrap();
        if verdict != oracle {
            disagreements += 1;
        }
    }
    let ok = disagreements == 0;
    report("certificate equals vertex-enumeration oracle (500 instances)", ok);
    assert!(ok, "{disagreements} disagreements out of 500");
}

// 6. Relaxation exactness. Pinning delta_k = 0 inside the subset-I
// program yields the same value as pinning it inside the subset-(I\{k})
// program, to 1e-8; and the pinned value never exceeds the free
// subset-(I\{k}) value (the two programs constrain delta_k with opposite
// signs, so the unpinned values themselves need not match).
#[test]
fn subset_pinning_exactness() {
    let mut rng = seeded(6, 0);
    let mut checked = 0;
    let mut ok = true;
    while checked < 200 {
        let inst = random_instance(&mut rng).snc_instance();
        let d = inst.delta.len();
        if d == 0 {
            continue;
        }
        // a uniformly random nonempty I and a k inside it
        let mask = rng.gen_range(1u64..(1 << d));
        let members: Vec<usize> = (0..d)
            .filter(|&b| mask >> b & 1 == 1)
            .map(|b| inst.delta.members()[b])
            .collect();
        let k = members[rng.gen_range(0..members.len())];
        let n = inst.a.cols();
        let with_k = IndexSet::new(n, members.clone()).unwrap();
        let without_k =
            IndexSet::new(n, members.iter().copied().filter(|&j| j != k).collect()).unwrap();
        let lp_i = snc::build_subset_lp(&inst, &with_k).unwrap();
        let lp_minus = snc::build_subset_lp(&inst, &without_k).unwrap();
        let col = subset_main_col(&inst, k);
        let pinned_i = common::lp_max(&pin_variable(&lp_i, col));
        let pinned_minus = common::lp_max(&pin_variable(&lp_minus, col));
        let free_minus = common::lp_max(&lp_minus);
        match (pinned_i, pinned_minus) {
            (Some(a), Some(b)) => {
                ok &= (a - b).abs() <= 1e-8;
                if let Some(f) = free_minus {
                    ok &= a <= f + 1e-8;
                }
            }
            (None, None) => {}
            _ => ok = false,
        }
        checked += 1;
    }
    report("subset-LP pinning exactness (200 triples, 1e-8)", ok);
    assert!(ok);
}

// 7. Magnitude invariance: on 100 certified-recoverable instances,
// direct solving still recovers after rescaling every magnitude by a
// random factor in [0.1, 10].
#[test]
fn magnitude_invariance() {
    use modcs::recovery::DEFAULT_RECOVERY_TOL;
    let mut rng = seeded(7, 0);
    let mut certified = 0;
    let mut ok = true;
    while certified < 100 {
        let inst = random_instance(&mut rng);
        let report = snc::check_snc(&inst.snc_instance(), 1e-7).unwrap();
        if !report.recoverable || report.worst_margin <= 1e-3 {
            continue;
        }
        certified += 1;
        let mags: Vec<f64> = (0..inst.quad.support.len())
            .map(|_| rng.gen_range(0.1..10.0))
            .collect();
        ok &= snc::check_by_solving(
            &inst.a,
            &inst.quad.known_support(),
            &inst.quad.known_true,
            &inst.quad.pattern,
            &mags,
            DEFAULT_RECOVERY_TOL,
        )
        .unwrap();
    }
    report("magnitude invariance (100 certified instances)", ok);
    assert!(ok);
}

// 8. Determinism: a second study-1 run with the same seed reproduces
// fig1.csv byte for byte.
#[test]
fn figure1_rerun_is_byte_identical() {
    let first = fig1_run();
    let dir = tempfile::tempdir().unwrap();
    run_example1(&ExperimentConfig::example1(42), dir.path()).unwrap();
    let second = std::fs::read(dir.path().join("fig1.csv")).unwrap();
    let ok = first.csv == second;
    report("determinism (fig1.csv byte-identical across reruns)", ok);
    assert!(ok);
}

// 9. Large-case smoke: the (52,128) case at M = 500 completes inside
// the 20-minute budget with a value in [0,1].
#[test]
fn large_case_smoke() {
    let start = std::time::Instant::now();
    let a = gen_uniform_matrix(52, 128, -0.5, 0.5, &mut substream(42, 11));
    let s = Scenario::new(128, 20, 8, 3).unwrap();
    let est = mc_probability(&a, &s, 500, 9, CheckerKind::DirectSolve, 1e-7).unwrap();
    let elapsed = start.elapsed();
    let ok = (0.0..=1.0).contains(&est.value) && elapsed.as_secs() < 20 * 60;
    report("large-case smoke ((52,128) Monte Carlo at M = 500)", ok);
    assert!(ok, "value {}, elapsed {elapsed:?}", est.value);
}
