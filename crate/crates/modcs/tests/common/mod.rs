//! Shared helpers for the integration suites: seeded random instances
//! and the brute-force uniqueness oracle.
#![allow(dead_code)] // each suite uses a different subset of the helpers

use modcs::experiments::gen_uniform_matrix;
use modcs::lp::{self, LpError};
use modcs::numkit::{DenseMatrix, RealVector};
use modcs::probability::{sample_quad, substream, Quad, Scenario, SeededStream};
use modcs::recovery::{modified_cs_lp, RecoveryProblem};
use modcs::snc::SncInstance;
use rand::Rng;

pub struct TestInstance {
    pub a: DenseMatrix,
    pub quad: Quad,
}

impl TestInstance {
    pub fn snc_instance(&self) -> SncInstance {
        self.quad.snc_instance(&self.a).expect("consistent quad")
    }

    /// Ground truth with unit magnitudes: pattern signs on the unknown
    /// part, positive on the correctly known part.
    pub fn xstar(&self) -> RealVector {
        let n = self.a.cols();
        let mut x = vec![0.0; n];
        for &k in self.quad.support.members() {
            x[k] = f64::from(self.quad.pattern.sign_of(k).unwrap_or(1));
        }
        RealVector::new(x).unwrap()
    }
}

/// Seeded random instance small enough for the vertex-enumeration
/// oracle: n <= 9, m <= 7, |Delta| <= 5, |T| < m.
pub fn random_instance(rng: &mut SeededStream) -> TestInstance {
    loop {
        let n = rng.gen_range(4..=9usize);
        let m = rng.gen_range(2..=7.min(n - 1));
        let ell = rng.gen_range(1..=m.min(n - 1));
        let p1 = rng.gen_range(0..=2.min(n - ell));
        let p2_max = ell.min(m.saturating_sub(1).saturating_sub(p1));
        let p2_min = ell.saturating_sub(5); // keep |Delta| <= 5
        if p2_min > p2_max {
            continue;
        }
        let p2 = rng.gen_range(p2_min..=p2_max);
        let p = p1 + p2;
        let Ok(s) = Scenario::new(n, ell, p, p1) else {
            continue;
        };
        let a = gen_uniform_matrix(m, n, -0.5, 0.5, rng);
        let quad = sample_quad(&s, rng);
        return TestInstance { a, quad };
    }
}

/// Independent oracle for the certificate: enumerate every optimal
/// vertex of the truncated-l1 LP and ask whether the unit-magnitude
/// truth is its unique optimum.
pub fn oracle_unique_optimum(inst: &TestInstance) -> Result<bool, LpError> {
    let xstar = inst.xstar();
    let y = inst.a.mat_vec(&xstar).unwrap();
    let problem =
        RecoveryProblem::new(inst.a.clone(), y, inst.quad.known_support()).unwrap();
    let lp = modified_cs_lp(&problem);
    let vertices = lp::enumerate_optimal_vertices(&lp, 1e-9)?;
    // vertices live in the split (u, v) space; map back to x and dedupe
    let n = inst.a.cols();
    let mut xs: Vec<RealVector> = Vec::new();
    for v in &vertices {
        let x: Vec<f64> = (0..n).map(|k| v.get(k) - v.get(n + k)).collect();
        let x = RealVector::new(x).unwrap();
        if !xs.iter().any(|seen| seen.inf_dist(&x).unwrap() <= 1e-9) {
            xs.push(x);
        }
    }
    Ok(xs.len() == 1 && xs[0].inf_dist(&xstar).unwrap() <= 1e-6)
}

pub fn seeded(seed: u64, stream: u64) -> SeededStream {
    substream(seed, stream)
}

/// Copy of `lp` with an extra equality row pinning variable `col` to 0.
pub fn pin_variable(lp: &lp::LinearProgram, col: usize) -> lp::LinearProgram {
    use modcs::numkit::IndexSet;
    let n = lp.num_vars();
    let mut rows: Vec<Vec<f64>> = (0..lp.eq_lhs.rows())
        .map(|i| lp.eq_lhs.row(i).to_vec())
        .collect();
    let mut pin = vec![0.0; n];
    pin[col] = 1.0;
    rows.push(pin);
    let mut rhs = lp.eq_rhs.as_slice().to_vec();
    rhs.push(0.0);
    lp::LinearProgram::new(
        lp.objective.clone(),
        DenseMatrix::from_rows(&rows).unwrap(),
        RealVector::new(rhs).unwrap(),
        IndexSet::new(n, lp.nonneg.members().to_vec()).unwrap(),
    )
    .unwrap()
}

/// Column of the variable holding delta_k in the subset-LP layout
/// documented on `build_subset_lp`: one column for indices in T or
/// Delta, a split pair elsewhere, assigned in index order.
pub fn subset_main_col(inst: &SncInstance, k: usize) -> usize {
    let mut col = 0;
    for j in 0..k {
        if inst.known_support.contains(j) || inst.delta.contains(j) {
            col += 1;
        } else {
            col += 2;
        }
    }
    col
}

/// Maximum of a subset LP given directly (None = infeasible).
pub fn lp_max(prog: &lp::LinearProgram) -> Option<f64> {
    match lp::solve(prog, modcs::lp::DEFAULT_FEAS_TOL).unwrap() {
        lp::LpSolution::Optimal { value, .. } => Some(-value),
        lp::LpSolution::Infeasible => None,
        lp::LpSolution::Unbounded => panic!("subset LP cannot be unbounded"),
    }
}
