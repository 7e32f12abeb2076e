//! Self-contained dense linear-programming solver.
//!
//! `solve` is a two-phase tableau simplex with Bland's smallest-index
//! anti-cycling rule; `enumerate_optimal_vertices` is a brute-force basis
//! enumerator used as an independent oracle on small instances. Both work
//! on the same standard-form conversion (free variables split into
//! nonnegative pairs) but share no solve path.

use crate::numkit::{DenseMatrix, IndexSet, RealVector};
use itertools::Itertools;
use thiserror::Error;

/// Default feasibility tolerance for all solver decisions.
pub const DEFAULT_FEAS_TOL: f64 = 1e-9;

// Pivot-eligibility threshold; below this an entry is treated as zero.
const PIVOT_EPS: f64 = 1e-9;

// Dual-feasibility (entering) threshold, relative to the cost row's
// magnitude. Tableau arithmetic leaves ~1e-9-scale noise in the reduced
// costs at a degenerate optimum; a tighter threshold makes the solver
// churn there forever.
const COST_EPS: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("iteration cap of {cap} exceeded; instance is numerically pathological")]
    MaxIterationsExceeded { cap: usize },
    #[error("instance too large for vertex enumeration: {0}")]
    InstanceTooLarge(String),
    #[error("malformed program: {0}")]
    Malformed(String),
}

/// Minimize `objective . z` subject to `eq_lhs z = eq_rhs`, with
/// `z_j >= 0` for `j` in `nonneg` and the remaining variables free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: RealVector,
    pub eq_lhs: DenseMatrix,
    pub eq_rhs: RealVector,
    pub nonneg: IndexSet,
}

impl LinearProgram {
    pub fn new(
        objective: RealVector,
        eq_lhs: DenseMatrix,
        eq_rhs: RealVector,
        nonneg: IndexSet,
    ) -> Result<Self, LpError> {
        let n = eq_lhs.cols();
        if objective.len() != n {
            return Err(LpError::Malformed(format!(
                "objective length {} != {} variables",
                objective.len(),
                n
            )));
        }
        if eq_rhs.len() != eq_lhs.rows() {
            return Err(LpError::Malformed(format!(
                "rhs length {} != {} rows",
                eq_rhs.len(),
                eq_lhs.rows()
            )));
        }
        if nonneg.universe() != n {
            return Err(LpError::Malformed(format!(
                "nonneg universe {} != {} variables",
                nonneg.universe(),
                n
            )));
        }
        Ok(Self { objective, eq_lhs, eq_rhs, nonneg })
    }

    pub fn num_vars(&self) -> usize {
        self.eq_lhs.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { value: f64, point: RealVector },
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn optimal(&self) -> Option<(f64, &RealVector)> {
        match self {
            LpSolution::Optimal { value, point } => Some((*value, point)),
            _ => None,
        }
    }
}

// Standard form: min sc.w  s.t.  sa w = sb, w >= 0. Original variable k
// maps to column map[k].0, minus column map[k].1 when it is split.
struct StandardForm {
    ncols: usize,
    sa: Vec<Vec<f64>>,
    sb: Vec<f64>,
    sc: Vec<f64>,
    map: Vec<(usize, Option<usize>)>,
}

fn to_standard_form(lp: &LinearProgram) -> StandardForm {
    let n = lp.num_vars();
    let m = lp.eq_lhs.rows();
    let mut map = Vec::with_capacity(n);
    let mut ncols = 0;
    for k in 0..n {
        if lp.nonneg.contains(k) {
            map.push((ncols, None));
            ncols += 1;
        } else {
            map.push((ncols, Some(ncols + 1)));
            ncols += 2;
        }
    }
    let mut sa = vec![vec![0.0; ncols]; m];
    let mut sc = vec![0.0; ncols];
    for k in 0..n {
        let (pos, neg) = map[k];
        sc[pos] = lp.objective.get(k);
        if let Some(neg) = neg {
            sc[neg] = -lp.objective.get(k);
        }
        for i in 0..m {
            let a = lp.eq_lhs.get(i, k);
            sa[i][pos] = a;
            if let Some(neg) = neg {
                sa[i][neg] = -a;
            }
        }
    }
    let sb = lp.eq_rhs.as_slice().to_vec();
    StandardForm { ncols, sa, sb, sc, map }
}

fn recover_point(sf: &StandardForm, w: &[f64]) -> RealVector {
    let x: Vec<f64> = sf
        .map
        .iter()
        .map(|&(pos, neg)| w[pos] - neg.map_or(0.0, |j| w[j]))
        .collect();
    RealVector::new(x).expect("finite solver output")
}

struct Tableau {
    ncols: usize,            // columns excluding rhs
    rows: Vec<Vec<f64>>,     // m rows, each ncols + 1 wide (rhs last)
    cost: Vec<f64>,          // reduced-cost row, ncols + 1 wide
    basis: Vec<usize>,
    iters: usize,
    cap: usize,
    // Pristine copy of the constraint rows and the raw (un-priced)
    // objective, used to rebuild the tableau and wash out accumulated
    // roundoff every REFRESH_EVERY pivots.
    snap_rows: Vec<Vec<f64>>,
    snap_cost: Vec<f64>,
}

// Rebuild the tableau from the snapshot this often. An updated tableau
// accumulates error with every pivot; after a few thousand pivots the
// reduced costs near a degenerate optimum become pure noise and the
// anti-cycling rule stops terminating.
const REFRESH_EVERY: usize = 256;

enum PivotOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (v, p) in r.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
        }
        self.basis[row] = col;
    }

    // Gauss-Jordan from the snapshot on the current basis; restores the
    // canonical tableau at snapshot precision.
    fn rebuild(&mut self) {
        let m = self.rows.len();
        let mut rows = self.snap_rows.clone();
        for i in 0..m {
            let col = self.basis[i];
            let mut piv = i;
            for r in i + 1..m {
                if rows[r][col].abs() > rows[piv][col].abs() {
                    piv = r;
                }
            }
            rows.swap(i, piv);
            let val = rows[i][col];
            for v in rows[i].iter_mut() {
                *v /= val;
            }
            let pivot_row = rows[i].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == i {
                    continue;
                }
                let factor = row[col];
                if factor != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= factor * p;
                    }
                }
            }
        }
        let mut cost = self.snap_cost.clone();
        for i in 0..m {
            let cb = self.snap_cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..=self.ncols {
                    cost[j] -= cb * rows[i][j];
                }
            }
        }
        self.rows = rows;
        self.cost = cost;
    }

    // Dantzig's rule: entering = most negative reduced cost (first such
    // column on exact ties, so the path is deterministic); leaving = min
    // ratio with ties broken by smallest basic variable. Dantzig can
    // cycle on degenerate instances where Bland's rule could not, but in
    // practice it needs orders of magnitude fewer pivots, and cycling is
    // covered by the iteration cap plus the perturbation retry in
    // `solve_with_cap`. The tableau is rebuilt from the snapshot
    // periodically so pivot-to-pivot roundoff cannot accumulate without
    // bound.
    fn run(&mut self) -> Result<PivotOutcome, LpError> {
        let mut since_refresh = 0usize;
        loop {
            if since_refresh >= REFRESH_EVERY {
                self.rebuild();
                since_refresh = 0;
            }
            let cost_scale = self.cost[..self.ncols]
                .iter()
                .fold(1.0f64, |a, v| a.max(v.abs()));
            let entering = (0..self.ncols)
                .filter(|&j| self.cost[j] < -COST_EPS * cost_scale)
                .min_by(|&a, &b| self.cost[a].partial_cmp(&self.cost[b]).unwrap());
            let Some(col) = entering else {
                return Ok(PivotOutcome::Optimal);
            };
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > PIVOT_EPS {
                    let ratio = self.rows[i][self.ncols] / a;
                    let better = match leave {
                        None => true,
                        Some(prev) => {
                            ratio < best_ratio - PIVOT_EPS
                                || (ratio < best_ratio + PIVOT_EPS
                                    && self.basis[i] < self.basis[prev])
                        }
                    };
                    if better {
                        leave = Some(i);
                        best_ratio = ratio;
                    }
                }
            }
            let Some(row) = leave else {
                return Ok(PivotOutcome::Unbounded);
            };
            self.pivot(row, col);
            self.iters += 1;
            since_refresh += 1;
            if self.iters > self.cap {
                return Err(LpError::MaxIterationsExceeded { cap: self.cap });
            }
        }
    }

    fn objective_value(&self) -> f64 {
        -self.cost[self.ncols]
    }
}

/// Two-phase simplex. Phase 1 declares `Infeasible` iff its optimum
/// exceeds `feas_tol`. Deterministic: identical inputs give bit-identical
/// outputs.
pub fn solve(lp: &LinearProgram, feas_tol: f64) -> Result<LpSolution, LpError> {
    solve_with_cap(lp, feas_tol, None)
}

pub fn solve_with_cap(
    lp: &LinearProgram,
    feas_tol: f64,
    max_iters: Option<usize>,
) -> Result<LpSolution, LpError> {
    assert!(feas_tol > 0.0);
    // A blown iteration budget means the simplex is wandering a
    // (near-)degenerate plateau. Retry with a deterministic tiny relative
    // right-hand-side perturbation, the classic degeneracy breaker; it
    // moves the optimum by the same tiny order, well inside every
    // tolerance this crate works at. The last rung also doubles the
    // iteration budget.
    let mut result = solve_inner(lp, feas_tol, max_iters, 0.0, 1);
    for (perturb, cap_factor) in [(1e-8, 1), (1e-6, 2)] {
        match result {
            Err(LpError::MaxIterationsExceeded { .. }) => {
                result = solve_inner(lp, feas_tol, max_iters, perturb, cap_factor);
            }
            other => return other,
        }
    }
    result
}

fn solve_inner(
    lp: &LinearProgram,
    feas_tol: f64,
    max_iters: Option<usize>,
    perturb: f64,
    cap_factor: usize,
) -> Result<LpSolution, LpError> {
    let sf = to_standard_form(lp);
    let m = sf.sb.len();
    let nc = sf.ncols;
    let cap = max_iters.unwrap_or(50 * (m + nc + m)) * cap_factor;
    let bscale = sf.sb.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let sb: Vec<f64> = sf
        .sb
        .iter()
        .enumerate()
        .map(|(i, &b)| b + perturb * bscale * (i + 1) as f64 / (m + 1) as f64)
        .collect();

    // Phase 1: artificial basis, minimize the sum of artificials.
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut r = Vec::with_capacity(nc + m + 1);
        let flip = if sb[i] < 0.0 { -1.0 } else { 1.0 };
        r.extend(sf.sa[i].iter().map(|&v| flip * v));
        for j in 0..m {
            r.push(if j == i { 1.0 } else { 0.0 });
        }
        r.push(flip * sb[i]);
        rows.push(r);
    }
    let total = nc + m;
    let mut raw_cost = vec![0.0; total + 1];
    for j in nc..total {
        raw_cost[j] = 1.0;
    }
    // price out the artificial basis
    let mut cost = raw_cost.clone();
    for i in 0..m {
        for j in 0..=total {
            cost[j] -= rows[i][j];
        }
    }
    let mut t = Tableau {
        ncols: total,
        snap_rows: rows.clone(),
        snap_cost: raw_cost,
        rows,
        cost,
        basis: (nc..total).collect(),
        iters: 0,
        cap,
    };
    match t.run()? {
        // The phase-1 objective is bounded below by zero, so "unbounded"
        // can only mean the descent direction was roundoff; the current
        // point is optimal to within tolerance and the feasibility test
        // below decides.
        PivotOutcome::Unbounded | PivotOutcome::Optimal => {}
    }
    // Phase 1 terminates once every reduced cost clears the relative
    // COST_EPS threshold, so its optimum carries up to COST_EPS * bscale
    // of residual even on feasible systems; the infeasibility decision
    // cannot be sharper than that.
    if t.objective_value() > feas_tol.max(COST_EPS * bscale) {
        return Ok(LpSolution::Infeasible);
    }

    // Drive artificials out of the basis; a row where no structural pivot
    // exists is redundant and is dropped.
    let mut i = 0;
    while i < t.basis.len() {
        if t.basis[i] >= nc {
            let col = (0..nc).find(|&j| t.rows[i][j].abs() > PIVOT_EPS);
            match col {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2: strip artificial columns, install the real objective.
    let m2 = t.rows.len();
    let mut rows2 = Vec::with_capacity(m2);
    for r in &t.rows {
        let mut nr: Vec<f64> = r[..nc].to_vec();
        nr.push(r[total]);
        rows2.push(nr);
    }
    let mut cost2: Vec<f64> = sf.sc.clone();
    cost2.push(0.0);
    for i in 0..m2 {
        let cb = sf.sc[t.basis[i]];
        if cb != 0.0 {
            for j in 0..=nc {
                cost2[j] -= cb * rows2[i][j];
            }
        }
    }
    let mut snap_cost2: Vec<f64> = sf.sc.clone();
    snap_cost2.push(0.0);
    let mut t2 = Tableau {
        ncols: nc,
        snap_rows: rows2.clone(),
        snap_cost: snap_cost2,
        rows: rows2,
        cost: cost2,
        basis: t.basis.clone(),
        iters: t.iters,
        cap,
    };
    match t2.run()? {
        PivotOutcome::Unbounded => return Ok(LpSolution::Unbounded),
        PivotOutcome::Optimal => {}
    }

    let mut w = vec![0.0; nc];
    for i in 0..t2.rows.len() {
        w[t2.basis[i]] = t2.rows[i][nc];
    }
    let point = recover_point(&sf, &w);
    let value = lp.objective.dot(&point).expect("matching lengths");
    Ok(LpSolution::Optimal { value, point })
}

// Guards for the brute-force oracle.
const MAX_ORACLE_COLS: usize = 24;
const MAX_ORACLE_ROWS: usize = 12;

/// Brute-force oracle: enumerates every basis of the standard form,
/// keeps feasible basic points, and returns all vertices whose objective
/// is within `feas_tol` of the minimum, deduplicated in the infinity
/// norm. Intended for small instances only.
pub fn enumerate_optimal_vertices(
    lp: &LinearProgram,
    feas_tol: f64,
) -> Result<Vec<RealVector>, LpError> {
    assert!(feas_tol > 0.0);
    let sf = to_standard_form(lp);
    if sf.ncols > MAX_ORACLE_COLS {
        return Err(LpError::InstanceTooLarge(format!(
            "{} standard-form columns exceeds {}",
            sf.ncols, MAX_ORACLE_COLS
        )));
    }
    if sf.sb.len() > MAX_ORACLE_ROWS {
        return Err(LpError::InstanceTooLarge(format!(
            "{} rows exceeds {}",
            sf.sb.len(),
            MAX_ORACLE_ROWS
        )));
    }

    // Reduce [sa | sb] to independent rows; an inconsistent zero row means
    // no feasible point at all.
    let (rows, rhs) = match independent_rows(&sf.sa, &sf.sb, feas_tol) {
        Some(r) => r,
        None => return Ok(Vec::new()),
    };
    let m = rows.len();
    if m == 0 {
        // Every w >= 0 is feasible; the minimum is at w = 0 when costs are
        // nonnegative, otherwise the problem is unbounded (no vertices in
        // either sense worth reporting beyond the origin).
        let w = vec![0.0; sf.ncols];
        return Ok(vec![recover_point(&sf, &w)]);
    }

    let mut candidates: Vec<(f64, RealVector)> = Vec::new();
    let mut best = f64::INFINITY;
    for basis in (0..sf.ncols).combinations(m) {
        let Some(wb) = solve_square(&rows, &rhs, &basis) else {
            continue;
        };
        if wb.iter().any(|&v| v < -feas_tol) {
            continue;
        }
        let mut w = vec![0.0; sf.ncols];
        for (slot, &j) in basis.iter().enumerate() {
            w[j] = wb[slot];
        }
        let obj: f64 = sf.sc.iter().zip(&w).map(|(c, v)| c * v).sum();
        best = best.min(obj);
        candidates.push((obj, recover_point(&sf, &w)));
    }

    let mut out: Vec<RealVector> = Vec::new();
    for (obj, x) in candidates {
        if obj <= best + feas_tol
            && !out
                .iter()
                .any(|seen| seen.inf_dist(&x).unwrap() <= feas_tol)
        {
            out.push(x);
        }
    }
    Ok(out)
}

// Row-reduce the augmented system; returns None when inconsistent.
fn independent_rows(sa: &[Vec<f64>], sb: &[f64], tol: f64) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    let m = sa.len();
    if m == 0 {
        return Some((Vec::new(), Vec::new()));
    }
    let n = sa[0].len();
    let mut aug: Vec<Vec<f64>> = sa
        .iter()
        .zip(sb)
        .map(|(r, &b)| {
            let mut v = r.clone();
            v.push(b);
            v
        })
        .collect();
    let scale = aug
        .iter()
        .flat_map(|r| r[..n].iter())
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(1.0);
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let mut best = rank;
        for i in rank + 1..m {
            if aug[i][col].abs() > aug[best][col].abs() {
                best = i;
            }
        }
        if aug[best][col].abs() <= 1e-12 * scale {
            continue;
        }
        aug.swap(rank, best);
        for i in rank + 1..m {
            let factor = aug[i][col] / aug[rank][col];
            if factor != 0.0 {
                for j in col..=n {
                    aug[i][j] -= factor * aug[rank][j];
                }
            }
        }
        rank += 1;
    }
    for row in aug[rank..].iter() {
        if row[n].abs() > tol {
            return None;
        }
    }
    aug.truncate(rank);
    let rhs = aug.iter().map(|r| r[n]).collect();
    let rows = aug.into_iter().map(|mut r| {
        r.truncate(n);
        r
    });
    Some((rows.collect(), rhs))
}

// Gaussian elimination on the basis columns; None when near-singular.
fn solve_square(rows: &[Vec<f64>], rhs: &[f64], basis: &[usize]) -> Option<Vec<f64>> {
    let m = rows.len();
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| basis.iter().map(|&j| r[j]).collect())
        .collect();
    let mut b = rhs.to_vec();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for col in 0..m {
        let mut piv = col;
        for i in col + 1..m {
            if a[i][col].abs() > a[piv][col].abs() {
                piv = i;
            }
        }
        if a[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..m {
            let factor = a[i][col] / a[col][col];
            if factor != 0.0 {
                for j in col..m {
                    a[i][j] -= factor * a[col][j];
                }
                b[i] -= factor * b[col];
            }
        }
    }
    for col in (0..m).rev() {
        let mut v = b[col];
        for j in col + 1..m {
            v -= a[col][j] * b[j];
        }
        b[col] = v / a[col][col];
    }
    Some(b)
}
