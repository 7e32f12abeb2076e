//! Sparse recovery by truncated l1 minimization: minimize the l1 norm of
//! x outside the known support T subject to Ax = y. Basis Pursuit is the
//! T = empty special case.

use crate::lp::{self, LinearProgram, LpError, LpSolution};
use crate::numkit::{DenseMatrix, IndexSet, NumKitError, RealVector};
use thiserror::Error;

/// Default tolerance for deciding that a solution equals the truth.
pub const DEFAULT_RECOVERY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("measurement system is infeasible: y is not in the column space of A")]
    InfeasibleSystem,
    #[error("numerical failure in LP solve: {0}")]
    NumericalFailure(#[from] LpError),
    #[error(transparent)]
    NumKit(#[from] NumKitError),
}

#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    pub a: DenseMatrix,
    pub y: RealVector,
    pub known_support: IndexSet,
}

impl RecoveryProblem {
    pub fn new(a: DenseMatrix, y: RealVector, known_support: IndexSet) -> Result<Self, RecoveryError> {
        if y.len() != a.rows() {
            return Err(NumKitError::DimensionMismatch(format!(
                "y has length {}, A has {} rows",
                y.len(),
                a.rows()
            ))
            .into());
        }
        if known_support.universe() != a.cols() {
            return Err(NumKitError::DimensionMismatch(format!(
                "support universe {} does not match {} columns",
                known_support.universe(),
                a.cols()
            ))
            .into());
        }
        Ok(Self { a, y, known_support })
    }
}

/// LP reformulation: each coordinate splits as x_k = u_k - v_k with
/// u_k, v_k >= 0; the objective charges 1 on both halves for k outside T
/// and 0 for k in T.
pub fn modified_cs_lp(p: &RecoveryProblem) -> LinearProgram {
    let n = p.a.cols();
    let m = p.a.rows();
    let mut c = vec![0.0; 2 * n];
    for k in 0..n {
        if !p.known_support.contains(k) {
            c[k] = 1.0;
            c[n + k] = 1.0;
        }
    }
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut r = Vec::with_capacity(2 * n);
        r.extend_from_slice(p.a.row(i));
        r.extend(p.a.row(i).iter().map(|v| -v));
        rows.push(r);
    }
    LinearProgram::new(
        RealVector::new(c).unwrap(),
        DenseMatrix::from_rows(&rows).unwrap(),
        p.y.clone(),
        IndexSet::full(2 * n),
    )
    .expect("well-formed by construction")
}

/// Solve the truncated l1 program. When the optimum is not unique the
/// deterministic simplex picks one optimal vertex; uniqueness questions
/// belong to the snc module.
pub fn solve_modified_cs(p: &RecoveryProblem, feas_tol: f64) -> Result<RealVector, RecoveryError> {
    let lp = modified_cs_lp(p);
    match lp::solve(&lp, feas_tol)? {
        LpSolution::Optimal { point, .. } => {
            let n = p.a.cols();
            let x: Vec<f64> = (0..n).map(|k| point.get(k) - point.get(n + k)).collect();
            Ok(RealVector::new(x)?)
        }
        LpSolution::Infeasible => Err(RecoveryError::InfeasibleSystem),
        LpSolution::Unbounded => unreachable!("nonnegative objective cannot be unbounded"),
    }
}

pub fn solve_basis_pursuit(
    a: &DenseMatrix,
    y: &RealVector,
    feas_tol: f64,
) -> Result<RealVector, RecoveryError> {
    let p = RecoveryProblem::new(a.clone(), y.clone(), IndexSet::empty(a.cols()))?;
    solve_modified_cs(&p, feas_tol)
}

/// True iff the two vectors agree within `tol` in the infinity norm.
pub fn recovered(xhat: &RealVector, xstar: &RealVector, tol: f64) -> Result<bool, RecoveryError> {
    assert!(tol > 0.0);
    Ok(xhat.inf_dist(xstar)? <= tol)
}
