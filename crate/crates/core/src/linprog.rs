//! Minimal dense linear-program solver.
//!
//! Two-phase tableau simplex over problems of the form
//!
//! ```text
//!   min / max  c·z
//!   s.t.       A_ineq z ≤ b_ineq,   A_eq z = b_eq,   low ≤ z ≤ high
//! ```
//!
//! Pivoting is deterministic: Dantzig pricing with lowest-index
//! tie-breaks, falling back to Bland's rule when an iteration budget is
//! exceeded, which guarantees termination under degeneracy. Intended for
//! dense desk-scale problems (a few thousand rows); no sparsity, no warm
//! starts.

use thiserror::Error;

/// Reduced costs within `-OPT_TOL` count as optimal.
const OPT_TOL: f64 = 1e-9;
/// Minimum magnitude accepted for a pivot element.
const PIVOT_TOL: f64 = 1e-11;
/// Phase-1 objective above this value means infeasible.
const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("objective has {c} coefficients but bounds describe {bounds} variables")]
    BoundsMismatch { c: usize, bounds: usize },
    #[error("{which} row {row} has {got} coefficients, expected {expected}")]
    RowMismatch {
        which: &'static str,
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("{which} has {rows} rows but {rhs} right-hand sides")]
    RhsMismatch {
        which: &'static str,
        rows: usize,
        rhs: usize,
    },
    #[error("variable {index} has empty bound interval [{low}, {high}]")]
    EmptyBound { index: usize, low: f64, high: f64 },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A dense LP. Use `f64::NEG_INFINITY` / `f64::INFINITY` for one-sided
/// variable bounds.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    sense: Sense,
    c: Vec<f64>,
    a_ineq: Vec<Vec<f64>>,
    b_ineq: Vec<f64>,
    a_eq: Vec<Vec<f64>>,
    b_eq: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Solution in the original variable space; empty unless `Optimal`.
    pub z: Vec<f64>,
    /// `c · z` for `Optimal`, otherwise 0.
    pub objective: f64,
    /// Largest absolute constraint/bound violation of `z`.
    pub max_violation: f64,
}

impl LinearProgram {
    /// Validate dimensions and bounds; every mismatch is rejected here so
    /// the solver itself never sees malformed input.
    pub fn new(
        sense: Sense,
        c: Vec<f64>,
        a_ineq: Vec<Vec<f64>>,
        b_ineq: Vec<f64>,
        a_eq: Vec<Vec<f64>>,
        b_eq: Vec<f64>,
        bounds: Vec<(f64, f64)>,
    ) -> Result<Self, LpError> {
        let n = c.len();
        if bounds.len() != n {
            return Err(LpError::BoundsMismatch {
                c: n,
                bounds: bounds.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        for (which, a, b) in [("inequality", &a_ineq, &b_ineq), ("equality", &a_eq, &b_eq)] {
            if a.len() != b.len() {
                return Err(LpError::RhsMismatch {
                    which,
                    rows: a.len(),
                    rhs: b.len(),
                });
            }
            for (r, row) in a.iter().enumerate() {
                if row.len() != n {
                    return Err(LpError::RowMismatch {
                        which,
                        row: r,
                        expected: n,
                        got: row.len(),
                    });
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(LpError::NonFinite("constraint matrix"));
                }
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(LpError::NonFinite("right-hand side"));
            }
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if lo > hi || lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::EmptyBound {
                    index: i,
                    low: lo,
                    high: hi,
                });
            }
        }
        Ok(LinearProgram {
            sense,
            c,
            a_ineq,
            b_ineq,
            a_eq,
            b_eq,
            bounds,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    /// Largest violation of the program's constraints and bounds at `z`.
    pub fn violation(&self, z: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for (row, &b) in self.a_ineq.iter().zip(&self.b_ineq) {
            let lhs: f64 = row.iter().zip(z).map(|(a, x)| a * x).sum();
            v = v.max(lhs - b);
        }
        for (row, &b) in self.a_eq.iter().zip(&self.b_eq) {
            let lhs: f64 = row.iter().zip(z).map(|(a, x)| a * x).sum();
            v = v.max((lhs - b).abs());
        }
        for (&(lo, hi), &x) in self.bounds.iter().zip(z) {
            if lo.is_finite() {
                v = v.max(lo - x);
            }
            if hi.is_finite() {
                v = v.max(x - hi);
            }
        }
        v
    }
}

/// How each original variable maps into the nonnegative solver space.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `z = shift + y[col]`
    Shifted { col: usize, shift: f64 },
    /// `z = shift - y[col]` (upper-bounded-only variables)
    Negated { col: usize, shift: f64 },
    /// `z = y[pos] - y[neg]` (free variables)
    Split { pos: usize, neg: usize },
}

/// Solve `lp` to a vertex optimum.
pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    // --- 1. Map variables to y ≥ 0 and collect rows in y-space. ---
    let n = lp.num_vars();
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut extra_upper: Vec<(usize, f64)> = Vec::new(); // y[col] ≤ cap
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            maps.push(VarMap::Shifted { col: ncols, shift: lo });
            if hi.is_finite() && hi > lo {
                extra_upper.push((ncols, hi - lo));
            }
            // lo == hi pins the variable: cap 0
            if hi.is_finite() && hi == lo {
                extra_upper.push((ncols, 0.0));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Negated { col: ncols, shift: hi });
            ncols += 1;
        } else {
            maps.push(VarMap::Split {
                pos: ncols,
                neg: ncols + 1,
            });
            ncols += 2;
        }
    }

    let to_y_row = |row: &[f64], b: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; ncols];
        let mut rhs = b;
        for (j, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shifted { col, shift } => {
                    out[col] += a;
                    rhs -= a * shift;
                }
                VarMap::Negated { col, shift } => {
                    out[col] -= a;
                    rhs -= a * shift;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        (out, rhs)
    };

    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new(); // (coeffs, rhs, is_eq)
    for (row, &b) in lp.a_ineq.iter().zip(&lp.b_ineq) {
        let (r, rhs) = to_y_row(row, b);
        rows.push((r, rhs, false));
    }
    for &(col, cap) in &extra_upper {
        let mut r = vec![0.0; ncols];
        r[col] = 1.0;
        rows.push((r, cap, false));
    }
    for (row, &b) in lp.a_eq.iter().zip(&lp.b_eq) {
        let (r, rhs) = to_y_row(row, b);
        rows.push((r, rhs, true));
    }

    // Objective in y-space (constant offset drops out; recomputed later).
    let mut cost = vec![0.0; ncols];
    for (j, &cj) in lp.c.iter().enumerate() {
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        match maps[j] {
            VarMap::Shifted { col, .. } => cost[col] += sign * cj,
            VarMap::Negated { col, .. } => cost[col] -= sign * cj,
            VarMap::Split { pos, neg } => {
                cost[pos] += sign * cj;
                cost[neg] -= sign * cj;
            }
        }
    }

    // --- 2. Standard form with slacks; choose initial basis. ---
    let m = rows.len();
    let nslack = rows.iter().filter(|(_, _, eq)| !eq).count();
    let mut tableau: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs_col = Vec::with_capacity(m);
    let mut basis = vec![usize::MAX; m];
    let mut art_rows: Vec<usize> = Vec::new();

    let width = ncols + nslack; // artificial columns appended after
    let mut slack_idx = 0usize;
    for (i, (r, b, is_eq)) in rows.iter().enumerate() {
        let mut row = vec![0.0; width];
        row[..ncols].copy_from_slice(r);
        let mut b = *b;
        let mut slack_coef = 0.0;
        if !is_eq {
            slack_coef = 1.0;
        }
        if b < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
            b = -b;
            slack_coef = -slack_coef;
        }
        if !is_eq {
            row[ncols + slack_idx] = slack_coef;
            if slack_coef > 0.0 {
                basis[i] = ncols + slack_idx;
            }
            slack_idx += 1;
        }
        if basis[i] == usize::MAX {
            art_rows.push(i);
        }
        tableau.push(row);
        rhs_col.push(b);
    }

    let nart = art_rows.len();
    let total = width + nart;
    for row in tableau.iter_mut() {
        row.resize(total, 0.0);
    }
    for (k, &i) in art_rows.iter().enumerate() {
        tableau[i][width + k] = 1.0;
        basis[i] = width + k;
    }

    // --- 3. Phase 1: drive artificials to zero. ---
    if nart > 0 {
        let mut obj = vec![0.0; total];
        for k in 0..nart {
            obj[width + k] = 1.0;
        }
        let mut obj_rhs = 0.0;
        price_out(&mut obj, &mut obj_rhs, &tableau, &rhs_col, &basis);
        if !run_simplex(&mut tableau, &mut rhs_col, &mut obj, &mut obj_rhs, &mut basis, total) {
            // Phase 1 is always bounded below by 0; unbounded means a bug.
            unreachable!("phase-1 simplex reported unbounded");
        }
        if -obj_rhs > FEAS_TOL {
            return LpSolution {
                status: LpStatus::Infeasible,
                z: Vec::new(),
                objective: 0.0,
                max_violation: f64::INFINITY,
            };
        }
        // Pivot surviving artificials out of the basis where possible.
        let mut drop_rows: Vec<usize> = Vec::new();
        for i in 0..m {
            if basis[i] >= width {
                let piv = (0..width).find(|&j| tableau[i][j].abs() > PIVOT_TOL);
                match piv {
                    Some(j) => pivot(&mut tableau, &mut rhs_col, &mut basis, i, j, None, None),
                    None => drop_rows.push(i), // redundant constraint
                }
            }
        }
        for &i in drop_rows.iter().rev() {
            tableau.remove(i);
            rhs_col.remove(i);
            basis.remove(i);
        }
        // Remove artificial columns entirely.
        for row in tableau.iter_mut() {
            row.truncate(width);
        }
    }

    // --- 4. Phase 2. ---
    let m = tableau.len();
    let mut obj = vec![0.0; width];
    obj[..ncols].copy_from_slice(&cost);
    let mut obj_rhs = 0.0;
    price_out(&mut obj, &mut obj_rhs, &tableau, &rhs_col, &basis);
    if !run_simplex(&mut tableau, &mut rhs_col, &mut obj, &mut obj_rhs, &mut basis, width) {
        return LpSolution {
            status: LpStatus::Unbounded,
            z: Vec::new(),
            objective: 0.0,
            max_violation: f64::INFINITY,
        };
    }

    // --- 5. Read out the solution. ---
    let mut y = vec![0.0; width];
    for i in 0..m {
        if basis[i] < width {
            y[basis[i]] = rhs_col[i];
        }
    }
    let z: Vec<f64> = maps
        .iter()
        .map(|mp| match *mp {
            VarMap::Shifted { col, shift } => shift + y[col],
            VarMap::Negated { col, shift } => shift - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective: f64 = lp.c.iter().zip(&z).map(|(c, x)| c * x).sum();
    let max_violation = lp.violation(&z);
    LpSolution {
        status: LpStatus::Optimal,
        z,
        objective,
        max_violation,
    }
}

/// Subtract multiples of the basic rows from `obj` so that every basic
/// column has zero reduced cost.
fn price_out(
    obj: &mut [f64],
    obj_rhs: &mut f64,
    tableau: &[Vec<f64>],
    rhs: &[f64],
    basis: &[usize],
) {
    for (i, &b) in basis.iter().enumerate() {
        let f = obj[b];
        if f != 0.0 {
            for (o, t) in obj.iter_mut().zip(&tableau[i]) {
                *o -= f * t;
            }
            *obj_rhs -= f * rhs[i];
        }
    }
}

/// Primal simplex iterations on a feasible tableau. Returns `false` when
/// the objective is unbounded. `limit` restricts entering columns (used
/// to forbid artificial columns in phase 2).
fn run_simplex(
    tableau: &mut Vec<Vec<f64>>,
    rhs: &mut Vec<f64>,
    obj: &mut Vec<f64>,
    obj_rhs: &mut f64,
    basis: &mut Vec<usize>,
    limit: usize,
) -> bool {
    let m = tableau.len();
    let bland_after = 50 * (m + limit) + 1000;
    let hard_cap = 400 * (m + limit) + 100_000;
    let mut iter = 0usize;
    loop {
        iter += 1;
        assert!(iter < hard_cap, "simplex exceeded {hard_cap} iterations");
        let bland = iter > bland_after;
        // entering column
        let mut enter = None;
        if bland {
            for j in 0..limit {
                if obj[j] < -OPT_TOL {
                    enter = Some(j);
                    break;
                }
            }
        } else {
            let mut best = -OPT_TOL;
            for j in 0..limit {
                if obj[j] < best {
                    best = obj[j];
                    enter = Some(j);
                }
            }
        }
        let Some(jc) = enter else {
            return true; // optimal
        };
        // ratio test; ties broken by smallest basis index (anti-cycling)
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let a = tableau[i][jc];
            if a > PIVOT_TOL {
                let ratio = rhs[i] / a;
                let better = match leave {
                    None => true,
                    Some(prev) => {
                        ratio < best_ratio - 1e-12
                            || (ratio <= best_ratio + 1e-12 && basis[i] < basis[prev])
                    }
                };
                if better {
                    best_ratio = ratio.min(best_ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(ir) = leave else {
            return false; // unbounded direction
        };
        pivot(tableau, rhs, basis, ir, jc, Some(obj), Some(obj_rhs));
    }
}

fn pivot(
    tableau: &mut [Vec<f64>],
    rhs: &mut [f64],
    basis: &mut [usize],
    ir: usize,
    jc: usize,
    obj: Option<&mut Vec<f64>>,
    obj_rhs: Option<&mut f64>,
) {
    let p = tableau[ir][jc];
    debug_assert!(p.abs() > 0.0);
    let inv = 1.0 / p;
    for v in tableau[ir].iter_mut() {
        *v *= inv;
    }
    rhs[ir] *= inv;
    tableau[ir][jc] = 1.0; // kill roundoff on the pivot element

    let (before, rest) = tableau.split_at_mut(ir);
    let (prow, after) = rest.split_first_mut().unwrap();
    let eliminate = |row: &mut Vec<f64>, r: &mut f64, prow: &[f64], prhs: f64| {
        let f = row[jc];
        if f != 0.0 {
            for (x, p) in row.iter_mut().zip(prow) {
                *x -= f * p;
            }
            row[jc] = 0.0;
            *r -= f * prhs;
        }
    };
    let prhs = rhs[ir];
    for (k, row) in before.iter_mut().enumerate() {
        eliminate(row, &mut rhs[k], prow, prhs);
    }
    for (k, row) in after.iter_mut().enumerate() {
        eliminate(row, &mut rhs[ir + 1 + k], prow, prhs);
    }
    if let (Some(o), Some(orhs)) = (obj, obj_rhs) {
        let f = o[jc];
        if f != 0.0 {
            for (x, p) in o.iter_mut().zip(prow.iter()) {
                *x -= f * p;
            }
            o[jc] = 0.0;
            *orhs -= f * prhs;
        }
    }
    // Clamp tiny negative right-hand sides introduced by roundoff.
    if rhs[ir] < 0.0 && rhs[ir] > -1e-11 {
        rhs[ir] = 0.0;
    }
    basis[ir] = jc;
}
