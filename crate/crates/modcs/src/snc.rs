//! Sufficient-and-necessary recoverability certificate.
//!
//! A signal with unknown support part Delta and sign pattern s is the
//! unique truncated-l1 optimum iff rank(A_T) = |T| and, for every subset
//! I of Delta, the maximum of sum_{k in I} |d_k| over null-space vectors
//! d of A with the Eq-style sign constraints and sum_{k in T^c} |d_k| = 1
//! stays strictly below 1/2. The margin reported is 1/2 minus the largest
//! such maximum.

use crate::lp::{self, LinearProgram, LpError, LpSolution, DEFAULT_FEAS_TOL};
use crate::numkit::{
    DenseMatrix, IndexSet, NumKitError, RealVector, SignPattern, DEFAULT_PIVOT_TOL,
};
use crate::recovery::{self, RecoveryError, RecoveryProblem};
use serde::Serialize;
use thiserror::Error;

/// Default decision tolerance around the 1/2 threshold.
pub const DEFAULT_MARGIN_TOL: f64 = 1e-7;

// 2^|Delta| subset LPs; beyond this the enumeration is hopeless anyway.
const MAX_DELTA: usize = 30;

#[derive(Debug, Error)]
pub enum SncError {
    #[error("unknown-support part has {0} indices; subset enumeration capped at {MAX_DELTA}")]
    EnumerationTooLarge(usize),
    #[error("numerical failure in subset LP: {0}")]
    NumericalFailure(#[from] LpError),
    #[error(transparent)]
    NumKit(#[from] NumKitError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
}

#[derive(Debug, Clone)]
pub struct SncInstance {
    pub a: DenseMatrix,
    pub known_support: IndexSet,
    pub delta: IndexSet,
    pub signs: SignPattern,
}

impl SncInstance {
    pub fn new(
        a: DenseMatrix,
        known_support: IndexSet,
        delta: IndexSet,
        signs: SignPattern,
    ) -> Result<Self, SncError> {
        let n = a.cols();
        if known_support.universe() != n || delta.universe() != n {
            return Err(NumKitError::DimensionMismatch(
                "index universes must match the column count".into(),
            )
            .into());
        }
        if !known_support.is_disjoint_from(&delta) {
            return Err(NumKitError::InvalidValue(
                "known support and unknown part must be disjoint".into(),
            )
            .into());
        }
        if signs.support() != &delta {
            return Err(NumKitError::InvalidValue(
                "sign pattern must cover exactly the unknown part".into(),
            )
            .into());
        }
        Ok(Self { a, known_support, delta, signs })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SncReport {
    pub recoverable: bool,
    pub rank_ok: bool,
    pub worst_margin: f64,
    pub worst_subset: IndexSet,
    pub subsets_checked: u64,
    pub marginal: bool,
}

/// The subset-I maximization encoded as a minimization LP (negated
/// objective). Variable layout, in index order over 0..n:
/// k in T -> one free variable holding d_k; k in I -> w_k = s_k d_k >= 0;
/// k in Delta\I -> w_k = -s_k d_k >= 0; other k -> nonneg split pair.
/// Rows: A d = 0 plus the T^c l1 normalization.
pub fn build_subset_lp(inst: &SncInstance, subset: &IndexSet) -> Result<LinearProgram, SncError> {
    if !subset.is_subset_of(&inst.delta) {
        return Err(NumKitError::InvalidValue(
            "subset must be contained in the unknown part".into(),
        )
        .into());
    }
    let n = inst.a.cols();
    let m = inst.a.rows();

    // first pass: assign columns
    let mut col_of = vec![(0usize, None::<usize>); n];
    let mut free_cols: Vec<usize> = Vec::new();
    let mut ncols = 0;
    for k in 0..n {
        if inst.known_support.contains(k) {
            col_of[k] = (ncols, None);
            free_cols.push(ncols);
            ncols += 1;
        } else if inst.delta.contains(k) {
            col_of[k] = (ncols, None);
            ncols += 1;
        } else {
            col_of[k] = (ncols, Some(ncols + 1));
            ncols += 2;
        }
    }

    // d_k expressed as coeff * column (plus minus the split partner)
    let d_coeff = |k: usize| -> f64 {
        if inst.known_support.contains(k) {
            1.0
        } else if subset.contains(k) {
            f64::from(inst.signs.sign_of(k).expect("subset within pattern"))
        } else if inst.delta.contains(k) {
            -f64::from(inst.signs.sign_of(k).expect("delta within pattern"))
        } else {
            1.0
        }
    };

    let mut rows = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut r = vec![0.0; ncols];
        for k in 0..n {
            let a = inst.a.get(i, k);
            let (pos, neg) = col_of[k];
            r[pos] = a * d_coeff(k);
            if let Some(neg) = neg {
                r[neg] = -a;
            }
        }
        rows.push(r);
    }
    // normalization over T^c
    let mut norm = vec![0.0; ncols];
    for k in 0..n {
        if inst.known_support.contains(k) {
            continue;
        }
        let (pos, neg) = col_of[k];
        norm[pos] = 1.0;
        if let Some(neg) = neg {
            norm[neg] = 1.0;
        }
    }
    rows.push(norm);

    let mut c = vec![0.0; ncols];
    for &k in subset.members() {
        c[col_of[k].0] = -1.0;
    }

    let mut rhs = vec![0.0; m];
    rhs.push(1.0);

    let nonneg_members: Vec<usize> = (0..ncols).filter(|j| !free_cols.contains(j)).collect();
    Ok(LinearProgram::new(
        RealVector::new(c).unwrap(),
        DenseMatrix::from_rows(&rows).unwrap(),
        RealVector::new(rhs).unwrap(),
        IndexSet::new(ncols, nonneg_members).unwrap(),
    )?)
}

/// Maximum of the subset objective; `None` when the subset LP is
/// infeasible (the certificate condition holds vacuously there).
pub fn subset_lp_max(
    inst: &SncInstance,
    subset: &IndexSet,
    feas_tol: f64,
) -> Result<Option<f64>, SncError> {
    let lp = build_subset_lp(inst, subset)?;
    match lp::solve(&lp, feas_tol)? {
        LpSolution::Optimal { value, .. } => Ok(Some(-value)),
        LpSolution::Infeasible => Ok(None),
        LpSolution::Unbounded => {
            unreachable!("objective is bounded by the normalization constraint")
        }
    }
}

/// Run the full certificate: rank test plus all 2^|Delta| subset LPs.
pub fn check_snc(inst: &SncInstance, margin_tol: f64) -> Result<SncReport, SncError> {
    assert!(margin_tol > 0.0);
    let d = inst.delta.len();
    if d > MAX_DELTA {
        return Err(SncError::EnumerationTooLarge(d));
    }
    let a_t = inst.a.columns(&inst.known_support)?;
    let rank_ok = a_t.rank(DEFAULT_PIVOT_TOL) == inst.known_support.len();
    if !rank_ok {
        return Ok(SncReport {
            recoverable: false,
            rank_ok: false,
            worst_margin: 0.0,
            worst_subset: IndexSet::empty(inst.a.cols()),
            subsets_checked: 0,
            marginal: false,
        });
    }

    let members = inst.delta.members();
    let mut largest = 0.0f64; // infeasible subsets contribute 0
    let mut worst_subset = IndexSet::empty(inst.a.cols());
    for mask in 0u64..(1u64 << d) {
        let picked: Vec<usize> = (0..d)
            .filter(|&b| mask >> b & 1 == 1)
            .map(|b| members[b])
            .collect();
        let subset = IndexSet::new(inst.a.cols(), picked).unwrap();
        if let Some(value) = subset_lp_max(inst, &subset, DEFAULT_FEAS_TOL)? {
            if value > largest {
                largest = value;
                worst_subset = subset;
            }
        }
    }
    let worst_margin = 0.5 - largest;
    let marginal = (largest - 0.5).abs() <= margin_tol;
    Ok(SncReport {
        recoverable: worst_margin > margin_tol,
        rank_ok,
        worst_margin,
        worst_subset,
        subsets_checked: 1u64 << d,
        marginal,
    })
}

/// One-LP check: build the signal from support, signs and magnitudes,
/// measure it, solve the truncated-l1 program and compare. `known_true`
/// is the correct part of the known support (its signs are irrelevant to
/// recoverability and are taken positive); `signs` covers the unknown
/// part; `magnitudes` align with the sorted true support and must be
/// strictly positive.
pub fn check_by_solving(
    a: &DenseMatrix,
    known_support: &IndexSet,
    known_true: &IndexSet,
    signs: &SignPattern,
    magnitudes: &[f64],
    tol: f64,
) -> Result<bool, SncError> {
    if !known_true.is_subset_of(known_support) {
        return Err(NumKitError::InvalidValue(
            "known_true must be contained in the known support".into(),
        )
        .into());
    }
    if !known_support.is_disjoint_from(signs.support()) {
        return Err(NumKitError::InvalidValue(
            "sign-pattern support must avoid the known support".into(),
        )
        .into());
    }
    let support = known_true.union(signs.support())?;
    if magnitudes.len() != support.len() {
        return Err(NumKitError::DimensionMismatch(format!(
            "{} magnitudes for a support of size {}",
            magnitudes.len(),
            support.len()
        ))
        .into());
    }
    if magnitudes.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(NumKitError::InvalidValue("magnitudes must be strictly positive".into()).into());
    }

    let n = a.cols();
    let mut xstar = vec![0.0; n];
    for (&k, &mag) in support.members().iter().zip(magnitudes) {
        let sign = signs.sign_of(k).unwrap_or(1);
        xstar[k] = f64::from(sign) * mag;
    }
    let xstar = RealVector::new(xstar)?;
    let y = a.mat_vec(&xstar)?;
    let problem = RecoveryProblem::new(a.clone(), y, known_support.clone())?;
    let xhat = recovery::solve_modified_cs(&problem, DEFAULT_FEAS_TOL)?;
    Ok(recovery::recovered(&xhat, &xstar, tol)?)
}

/// `check_by_solving` with the default all-ones magnitudes.
pub fn check_by_solving_unit(
    a: &DenseMatrix,
    known_support: &IndexSet,
    known_true: &IndexSet,
    signs: &SignPattern,
    tol: f64,
) -> Result<bool, SncError> {
    let count = known_true.len() + signs.support().len();
    check_by_solving(a, known_support, known_true, signs, &vec![1.0; count], tol)
}
