//! Cross-checks between the simplex solver and the brute-force vertex
//! enumerator on random small programs.

mod common;

use common::seeded;
use modcs::lp::{self, LinearProgram, LpSolution, DEFAULT_FEAS_TOL};
use modcs::numkit::{DenseMatrix, IndexSet, RealVector};
use rand::Rng;

fn random_lp(rng: &mut modcs::probability::SeededStream) -> LinearProgram {
    let n = rng.gen_range(2..=5usize);
    let m = rng.gen_range(1..=3.min(n));
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let a = DenseMatrix::from_rows(&a).unwrap();
    // feasible by construction: b = A x0 with x0 >= 0
    let x0 = RealVector::new((0..n).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap();
    let b = a.mat_vec(&x0).unwrap();
    let c = RealVector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    LinearProgram::new(c, a, b, IndexSet::full(n)).unwrap()
}

#[test]
fn solver_agrees_with_vertex_enumeration() {
    let mut rng = seeded(2024, 0);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 200 {
        attempts += 1;
        assert!(attempts < 2000, "too many unbounded instances");
        let lp = random_lp(&mut rng);
        let sol = lp::solve(&lp, DEFAULT_FEAS_TOL).unwrap();
        let Some((value, point)) = sol.optimal() else {
            // feasible by construction, so this is an unbounded draw
            assert_eq!(sol, LpSolution::Unbounded);
            continue;
        };
        let vertices = lp::enumerate_optimal_vertices(&lp, DEFAULT_FEAS_TOL).unwrap();
        assert!(!vertices.is_empty(), "oracle found no vertex for a solved LP");
        let best: f64 = vertices
            .iter()
            .map(|v| lp.objective.dot(v).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(
            (best - value).abs() <= 1e-8,
            "simplex value {value} vs oracle {best}"
        );
        // feasibility of the returned point
        let residual = lp.eq_lhs.mat_vec(point).unwrap();
        let gap = residual.inf_dist(&lp.eq_rhs).unwrap();
        assert!(gap <= 1e-8, "residual {gap}");
        assert!(point.iter().all(|&v| v >= -DEFAULT_FEAS_TOL));
        checked += 1;
    }
}

#[test]
fn resolving_with_pinned_value_stays_feasible() {
    let mut rng = seeded(77, 0);
    let mut checked = 0;
    while checked < 50 {
        let lp = random_lp(&mut rng);
        let Ok(sol) = lp::solve(&lp, DEFAULT_FEAS_TOL) else {
            continue;
        };
        let Some((value, _)) = sol.optimal() else {
            continue;
        };
        // append the objective row pinned at the optimal value
        let n = lp.num_vars();
        let mut rows: Vec<Vec<f64>> = (0..lp.eq_lhs.rows())
            .map(|i| lp.eq_lhs.row(i).to_vec())
            .collect();
        rows.push(lp.objective.as_slice().to_vec());
        let mut rhs = lp.eq_rhs.as_slice().to_vec();
        rhs.push(value);
        let pinned = LinearProgram::new(
            RealVector::zeros(n),
            DenseMatrix::from_rows(&rows).unwrap(),
            RealVector::new(rhs).unwrap(),
            IndexSet::full(n),
        )
        .unwrap();
        // the pin sits at the boundary of feasibility; allow roundoff
        let sol = lp::solve(&pinned, 1e-7).unwrap();
        assert!(sol.optimal().is_some(), "pinned program infeasible");
        checked += 1;
    }
}
