//! Linear programming: the receding-horizon subproblem builder and a dense
//! two-phase simplex solver behind a narrow interface, so an alternate exact
//! LP backend can be swapped in without touching callers.

use crate::interval::{Interval, IntervalVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("numerical breakdown: best available pivot {0:e} below tolerance")]
    NumericalBreakdown(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("iteration limit exceeded")]
    IterationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormChoice {
    Inf,
    One,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub row: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize c'x subject to rows, bounds`. Bounds may be infinite on either
/// side; all coefficients must be finite.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Interval>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point in the original variable space (empty unless Optimal).
    pub x: Vec<f64>,
    pub objective_value: f64,
}

pub const FEAS_TOL: f64 = 1e-8;
const PIVOT_TOL: f64 = 1e-12;
const PHASE1_TOL: f64 = 1e-9;

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::DimensionMismatch(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        if !self.objective.iter().all(|c| c.is_finite()) {
            return Err(LpError::DimensionMismatch("non-finite objective".into()));
        }
        for (i, con) in self.constraints.iter().enumerate() {
            if con.row.len() != n {
                return Err(LpError::DimensionMismatch(format!(
                    "constraint {i} has {} coefficients for {} variables",
                    con.row.len(),
                    n
                )));
            }
            if !con.row.iter().all(|c| c.is_finite()) || !con.rhs.is_finite() {
                return Err(LpError::DimensionMismatch(format!(
                    "constraint {i} has non-finite data"
                )));
            }
        }
        Ok(())
    }

    /// Residual-checked feasibility of a candidate point.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        for (xi, b) in x.iter().zip(&self.bounds) {
            if *xi < b.lo() - tol || *xi > b.hi() + tol {
                return false;
            }
        }
        for con in &self.constraints {
            let lhs: f64 = con.row.iter().zip(x).map(|(a, v)| a * v).sum();
            match con.relation {
                Relation::Le => {
                    if lhs > con.rhs + tol {
                        return false;
                    }
                }
                Relation::Eq => {
                    if (lhs - con.rhs).abs() > tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Plain-text tableau dump for debugging.
    pub fn dump_tableau(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(s, "min {:?}", self.objective);
        for con in &self.constraints {
            let rel = match con.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
            };
            let _ = writeln!(s, "{:?} {} {}", con.row, rel, con.rhs);
        }
        for (i, b) in self.bounds.iter().enumerate() {
            let _ = writeln!(s, "x{} in {}", i, b);
        }
        s
    }
}

/// Solves the LP to full optimality with a dense two-phase simplex.
///
/// Variables are shifted/reflected/split to the nonnegative orthant, finite
/// upper bounds become rows, phase 1 drives artificials out, and phase 2
/// uses Dantzig pricing with a Bland's-rule fallback once degenerate pivots
/// accumulate. `Optimal` solutions satisfy every constraint within 1e-8.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars();

    // variable transforms to y >= 0
    #[derive(Clone, Copy)]
    enum VarMap {
        Shift(usize, f64),          // x = y[col] + lo
        Mirror(usize, f64),         // x = hi - y[col]
        Split(usize, usize),        // x = y[pos] - y[neg]
    }
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new(); // (orig var, range) for x - lo <= hi - lo
    for (i, b) in lp.bounds.iter().enumerate() {
        let (lo, hi) = (b.lo(), b.hi());
        if lo.is_finite() {
            maps.push(VarMap::Shift(ncols, lo));
            ncols += 1;
            if hi.is_finite() {
                extra_rows.push((i, hi - lo));
            }
        } else if hi.is_finite() {
            maps.push(VarMap::Mirror(ncols, hi));
            ncols += 1;
        } else {
            maps.push(VarMap::Split(ncols, ncols + 1));
            ncols += 2;
        }
    }

    // assemble rows in transformed space
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    let transform_row = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; ncols];
        let mut r = rhs;
        for (i, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[i] {
                VarMap::Shift(c, lo) => {
                    out[c] += a;
                    r -= a * lo;
                }
                VarMap::Mirror(c, hi) => {
                    out[c] -= a;
                    r -= a * hi;
                }
                VarMap::Split(p, q) => {
                    out[p] += a;
                    out[q] -= a;
                }
            }
        }
        (out, r)
    };
    for con in &lp.constraints {
        let (row, rhs) = transform_row(&con.row, con.rhs);
        rows.push((row, con.relation, rhs));
    }
    for &(var, range) in &extra_rows {
        let mut row = vec![0.0; ncols];
        if let VarMap::Shift(c, _) = maps[var] {
            row[c] = 1.0;
        }
        rows.push((row, Relation::Le, range));
    }

    // objective in transformed space
    let mut obj = vec![0.0; ncols];
    let mut obj_const = 0.0;
    for (i, &c) in lp.objective.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        match maps[i] {
            VarMap::Shift(col, lo) => {
                obj[col] += c;
                obj_const += c * lo;
            }
            VarMap::Mirror(col, hi) => {
                obj[col] -= c;
                obj_const += c * hi;
            }
            VarMap::Split(p, q) => {
                obj[p] += c;
                obj[q] -= c;
            }
        }
    }

    // slacks for <= rows, then force rhs >= 0
    let num_slack = rows.iter().filter(|r| r.1 == Relation::Le).count();
    let total = ncols + num_slack;
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    let mut b_vec: Vec<f64> = Vec::with_capacity(rows.len());
    let mut slack_idx = ncols;
    for (row, rel, rhs) in rows {
        let mut full = vec![0.0; total];
        full[..ncols].copy_from_slice(&row);
        if rel == Relation::Le {
            full[slack_idx] = 1.0;
            slack_idx += 1;
        }
        if rhs < 0.0 {
            for v in full.iter_mut() {
                *v = -*v;
            }
            b_vec.push(-rhs);
        } else {
            b_vec.push(rhs);
        }
        a.push(full);
    }

    let mut tab = Tableau::new(a, b_vec, total)?;
    match tab.optimize_two_phase(&obj)? {
        SimplexOutcome::Infeasible => Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective_value: f64::NAN,
        }),
        SimplexOutcome::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective_value: f64::NEG_INFINITY,
        }),
        SimplexOutcome::Optimal(y) => {
            let mut x = vec![0.0; n];
            for (i, map) in maps.iter().enumerate() {
                x[i] = match *map {
                    VarMap::Shift(c, lo) => y[c] + lo,
                    VarMap::Mirror(c, hi) => hi - y[c],
                    VarMap::Split(p, q) => y[p] - y[q],
                };
            }
            let objective_value =
                obj_const + obj.iter().zip(&y).map(|(c, v)| c * v).sum::<f64>();
            debug_assert!(lp.is_feasible(&x, FEAS_TOL * 10.0));
            Ok(LpSolution {
                status: LpStatus::Optimal,
                x,
                objective_value,
            })
        }
    }
}

enum SimplexOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

/// Dense simplex tableau over `A y = b, y >= 0` with artificial columns.
struct Tableau {
    rows: usize,
    cols: usize, // structural columns (no artificials)
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(a: Vec<Vec<f64>>, b: Vec<f64>, cols: usize) -> Result<Self, LpError> {
        let rows = a.len();
        Ok(Self {
            rows,
            cols,
            a,
            b,
            basis: Vec::new(),
        })
    }

    fn optimize_two_phase(&mut self, obj: &[f64]) -> Result<SimplexOutcome, LpError> {
        let rows = self.rows;
        let cols = self.cols;
        // phase 1: artificial basis
        for (r, row) in self.a.iter_mut().enumerate() {
            row.resize(cols + rows, 0.0);
            row[cols + r] = 1.0;
        }
        self.basis = (0..rows).map(|r| cols + r).collect();
        let mut phase1_cost = vec![0.0; cols + rows];
        for c in cols..cols + rows {
            phase1_cost[c] = 1.0;
        }
        let p1 = self.run_simplex(&phase1_cost, cols + rows)?;
        if let SimplexOutcome::Unbounded = p1 {
            unreachable!("phase-1 objective is bounded below by zero");
        }
        let p1_obj: f64 = self
            .basis
            .iter()
            .zip(&self.b)
            .map(|(&bi, &v)| if bi >= cols { v } else { 0.0 })
            .sum();
        if p1_obj > PHASE1_TOL {
            return Ok(SimplexOutcome::Infeasible);
        }
        // drive remaining artificials out of the basis
        for r in 0..rows {
            if self.basis[r] >= cols {
                let mut pivot_col = None;
                for c in 0..cols {
                    if self.a[r][c].abs() > 1e-9 {
                        pivot_col = Some(c);
                        break;
                    }
                }
                if let Some(c) = pivot_col {
                    self.pivot(r, c);
                }
                // otherwise the row is redundant; the artificial stays basic
                // at value zero and never re-enters (cost below)
            }
        }
        // phase 2
        let mut phase2_cost = vec![0.0; cols + rows];
        phase2_cost[..obj.len()].copy_from_slice(obj);
        // forbid artificial re-entry
        for c in cols..cols + rows {
            phase2_cost[c] = 1e30;
        }
        match self.run_simplex(&phase2_cost, cols)? {
            SimplexOutcome::Unbounded => Ok(SimplexOutcome::Unbounded),
            _ => {
                let mut y = vec![0.0; cols];
                for (r, &bi) in self.basis.iter().enumerate() {
                    if bi < cols {
                        y[bi] = self.b[r];
                    }
                }
                Ok(SimplexOutcome::Optimal(y))
            }
        }
    }

    /// Primal simplex with Dantzig pricing and a Bland fallback after
    /// 10 * (rows + cols) degenerate pivots.
    fn run_simplex(&mut self, cost: &[f64], enter_limit: usize) -> Result<SimplexOutcome, LpError> {
        let rows = self.rows;
        let degen_cap = 10 * (rows + enter_limit);
        let iter_cap = 200 * (rows + enter_limit) + 1000;
        let mut degen_count = 0usize;
        let mut bland = false;
        for _ in 0..iter_cap {
            // reduced costs via basis multipliers (tableau is kept in
            // canonical form, so reduced cost = c_j - c_B' a_j)
            let mut entering = None;
            let mut best = -1e-9;
            for j in 0..enter_limit {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut red = cost[j];
                for (r, &bi) in self.basis.iter().enumerate() {
                    let cb = cost[bi];
                    if cb != 0.0 {
                        red -= cb * self.a[r][j];
                    }
                }
                if red < best {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    best = red;
                    entering = Some(j);
                }
            }
            let Some(e) = entering else {
                return Ok(SimplexOutcome::Optimal(Vec::new()));
            };
            // ratio test
            let mut leave = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..rows {
                let coef = self.a[r][e];
                if coef > PIVOT_TOL {
                    let ratio = self.b[r] / coef;
                    let better = ratio < best_ratio - 1e-12
                        || (bland
                            && (ratio - best_ratio).abs() <= 1e-12
                            && leave.map_or(true, |lr: usize| self.basis[r] < self.basis[lr]));
                    if better {
                        best_ratio = ratio;
                        leave = Some(r);
                    }
                }
            }
            let Some(lr) = leave else {
                return Ok(SimplexOutcome::Unbounded);
            };
            if self.a[lr][e].abs() < PIVOT_TOL {
                return Err(LpError::NumericalBreakdown(self.a[lr][e].abs()));
            }
            if best_ratio <= 1e-12 {
                degen_count += 1;
                if degen_count > degen_cap {
                    bland = true;
                }
            }
            self.pivot(lr, e);
        }
        Err(LpError::IterationLimit)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.a[r][c];
        let inv = 1.0 / piv;
        for v in self.a[r].iter_mut() {
            *v *= inv;
        }
        self.b[r] *= inv;
        let pivot_row = self.a[r].clone();
        let pivot_rhs = self.b[r];
        for rr in 0..self.rows {
            if rr == r {
                continue;
            }
            let factor = self.a[rr][c];
            if factor != 0.0 {
                for (v, pv) in self.a[rr].iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                self.b[rr] -= factor * pivot_rhs;
                if self.b[rr].abs() < 1e-14 {
                    self.b[rr] = 0.0;
                }
            }
        }
        self.basis[r] = c;
    }
}

/// Per-stage linearization data for the receding-horizon subproblem.
#[derive(Clone, Debug)]
pub struct StageLin {
    /// State transition gradient (n x n), point selection.
    pub a: Vec<Vec<f64>>,
    /// Control gradient (n x m), point selection.
    pub b: Vec<Vec<f64>>,
    /// Selected next state at the reference (the linearization offset).
    pub h0: Vec<f64>,
    /// Reference next state of the current iterate.
    pub x_next_ref: Vec<f64>,
    /// Reference control of the current iterate.
    pub u_ref: Vec<f64>,
    /// Stage cost at the reference triple.
    pub cost: f64,
    /// Cost gradient w.r.t. the stage's current state (ignored at stage 0,
    /// where the current state is the known measurement).
    pub grad_x: Vec<f64>,
    pub grad_u: Vec<f64>,
    pub grad_xnext: Vec<f64>,
}

/// Column layout of the subproblem variables.
#[derive(Clone, Copy, Debug)]
pub struct SubproblemLayout {
    pub n: usize,
    pub m: usize,
    pub stages: usize,
    pub dx0: usize,
    pub du0: usize,
    pub vplus0: usize,
    pub vminus0: usize,
    pub total: usize,
}

impl SubproblemLayout {
    pub fn dx(&self, sol: &[f64], stage: usize) -> Vec<f64> {
        sol[self.dx0 + stage * self.n..self.dx0 + (stage + 1) * self.n].to_vec()
    }

    pub fn du(&self, sol: &[f64], stage: usize) -> Vec<f64> {
        sol[self.du0 + stage * self.m..self.du0 + (stage + 1) * self.m].to_vec()
    }

    /// Penalty magnitude sum(|v|) of a stage (from the split variables).
    pub fn v_abs(&self, sol: &[f64], stage: usize) -> f64 {
        (0..self.n)
            .map(|k| {
                sol[self.vplus0 + stage * self.n + k] + sol[self.vminus0 + stage * self.n + k]
            })
            .sum()
    }
}

/// Builds the trust-region linear subproblem around the current iterate.
///
/// Decision variables are the stacked state deviations, control deviations
/// and split penalty slacks; the dynamics rows
/// `dx_{q+1} - A dx_q - B du_q - v_q = h0_q - x_{q+1,ref}` are always
/// satisfiable thanks to the slacks. The trust region is a box on `du` for
/// the infinity norm, or an epigraph budget row for the 1-norm; the penalty
/// enters the objective through the split slack columns (1-norm) or a
/// per-stage epigraph variable (infinity norm).
pub fn build_subproblem(
    stages: &[StageLin],
    radius: f64,
    lambda: f64,
    x_box: &IntervalVector,
    u_box: &IntervalVector,
    trust_norm: NormChoice,
    penalty_norm: NormChoice,
) -> Result<(LinearProgram, SubproblemLayout), LpError> {
    let stages_n = stages.len();
    if stages_n == 0 {
        return Err(LpError::DimensionMismatch("no stages".into()));
    }
    let n = x_box.dim();
    let m = u_box.dim();
    for (q, st) in stages.iter().enumerate() {
        let ok = st.a.len() == n
            && st.a.iter().all(|r| r.len() == n)
            && st.b.len() == n
            && st.b.iter().all(|r| r.len() == m)
            && st.h0.len() == n
            && st.x_next_ref.len() == n
            && st.u_ref.len() == m
            && st.grad_x.len() == n
            && st.grad_u.len() == m
            && st.grad_xnext.len() == n;
        if !ok {
            return Err(LpError::DimensionMismatch(format!("stage {q}")));
        }
    }
    if !(radius > 0.0) || lambda < 0.0 {
        return Err(LpError::DimensionMismatch(
            "radius must be positive, lambda nonnegative".into(),
        ));
    }

    let dx0 = 0;
    let du0 = dx0 + n * stages_n;
    let vplus0 = du0 + m * stages_n;
    let vminus0 = vplus0 + n * stages_n;
    let mut total = vminus0 + n * stages_n;
    // optional epigraph columns
    let t0 = if trust_norm == NormChoice::One {
        let t = total;
        total += m * stages_n;
        Some(t)
    } else {
        None
    };
    let s0 = if penalty_norm == NormChoice::Inf {
        let s = total;
        total += stages_n;
        Some(s)
    } else {
        None
    };

    let mut lp = LinearProgram {
        objective: vec![0.0; total],
        constraints: Vec::new(),
        bounds: vec![Interval::new(f64::NEG_INFINITY, f64::INFINITY); total],
    };

    // objective: linearized cost
    let mut cost_const = 0.0;
    for (q, st) in stages.iter().enumerate() {
        cost_const += st.cost;
        if q > 0 {
            // the stage's current state is the previous block's next state
            for k in 0..n {
                lp.objective[dx0 + (q - 1) * n + k] += st.grad_x[k];
            }
        }
        for l in 0..m {
            lp.objective[du0 + q * m + l] += st.grad_u[l];
        }
        for k in 0..n {
            lp.objective[dx0 + q * n + k] += st.grad_xnext[k];
        }
        match penalty_norm {
            NormChoice::One => {
                for k in 0..n {
                    lp.objective[vplus0 + q * n + k] += lambda;
                    lp.objective[vminus0 + q * n + k] += lambda;
                }
            }
            NormChoice::Inf => {
                lp.objective[s0.unwrap() + q] += lambda;
            }
        }
    }

    // dynamics rows
    for (q, st) in stages.iter().enumerate() {
        for k in 0..n {
            let mut row = vec![0.0; total];
            row[dx0 + q * n + k] = 1.0;
            if q > 0 {
                for l in 0..n {
                    row[dx0 + (q - 1) * n + l] -= st.a[k][l];
                }
            }
            for l in 0..m {
                row[du0 + q * m + l] -= st.b[k][l];
            }
            row[vplus0 + q * n + k] = -1.0;
            row[vminus0 + q * n + k] = 1.0;
            lp.constraints.push(Constraint {
                row,
                relation: Relation::Eq,
                rhs: st.h0[k] - st.x_next_ref[k],
            });
        }
    }

    // bounds
    for (q, st) in stages.iter().enumerate() {
        for k in 0..n {
            lp.bounds[dx0 + q * n + k] = Interval::new(
                x_box[k].lo() - st.x_next_ref[k],
                x_box[k].hi() - st.x_next_ref[k],
            );
            lp.bounds[vplus0 + q * n + k] = Interval::new(0.0, f64::INFINITY);
            lp.bounds[vminus0 + q * n + k] = Interval::new(0.0, f64::INFINITY);
        }
        for l in 0..m {
            let lo = u_box[l].lo() - st.u_ref[l];
            let hi = u_box[l].hi() - st.u_ref[l];
            let (lo, hi) = match trust_norm {
                NormChoice::Inf => (lo.max(-radius), hi.min(radius)),
                NormChoice::One => (lo, hi),
            };
            lp.bounds[du0 + q * m + l] = Interval::new(lo.min(0.0), hi.max(0.0));
        }
    }

    // 1-norm trust region: |du| <= t componentwise, sum t <= radius
    if let Some(t0) = t0 {
        for q in 0..stages_n {
            for l in 0..m {
                let t_col = t0 + q * m + l;
                lp.bounds[t_col] = Interval::new(0.0, radius);
                let mut row_pos = vec![0.0; total];
                row_pos[du0 + q * m + l] = 1.0;
                row_pos[t_col] = -1.0;
                lp.constraints.push(Constraint {
                    row: row_pos,
                    relation: Relation::Le,
                    rhs: 0.0,
                });
                let mut row_neg = vec![0.0; total];
                row_neg[du0 + q * m + l] = -1.0;
                row_neg[t_col] = -1.0;
                lp.constraints.push(Constraint {
                    row: row_neg,
                    relation: Relation::Le,
                    rhs: 0.0,
                });
            }
        }
        let mut budget = vec![0.0; total];
        for i in 0..m * stages_n {
            budget[t0 + i] = 1.0;
        }
        lp.constraints.push(Constraint {
            row: budget,
            relation: Relation::Le,
            rhs: radius,
        });
    }

    // infinity-norm penalty epigraph: v+ + v- <= s_q
    if let Some(s0) = s0 {
        for q in 0..stages_n {
            lp.bounds[s0 + q] = Interval::new(0.0, f64::INFINITY);
            for k in 0..n {
                let mut row = vec![0.0; total];
                row[vplus0 + q * n + k] = 1.0;
                row[vminus0 + q * n + k] = 1.0;
                row[s0 + q] = -1.0;
                lp.constraints.push(Constraint {
                    row,
                    relation: Relation::Le,
                    rhs: 0.0,
                });
            }
        }
    }

    // fold the constant into the objective afterwards: callers read it from
    // the layout-evaluated solution; keep it in the LP by convention
    let layout = SubproblemLayout {
        n,
        m,
        stages: stages_n,
        dx0,
        du0,
        vplus0,
        vminus0,
        total,
    };
    // represent the constant with an explicit fixed column? simpler: leave
    // the constant out of the LP and let callers add `cost_const`
    let _ = cost_const;
    Ok((lp, layout))
}

/// The constant part of the linearized cost (sum of reference stage costs),
/// to be added to the LP objective value.
pub fn subproblem_cost_const(stages: &[StageLin]) -> f64 {
    stages.iter().map(|s| s.cost).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    fn solve_simple(
        obj: Vec<f64>,
        cons: Vec<(Vec<f64>, Relation, f64)>,
        bounds: Vec<Interval>,
    ) -> LpSolution {
        let lp = LinearProgram {
            objective: obj,
            constraints: cons
                .into_iter()
                .map(|(row, relation, rhs)| Constraint { row, relation, rhs })
                .collect(),
            bounds,
        };
        solve(&lp).unwrap()
    }

    #[test]
    fn min_x_between_one_and_two() {
        let sol = solve_simple(vec![1.0], vec![], vec![iv(1.0, 2.0)]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
        assert!((sol.objective_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn simplex_edge_optimum() {
        // min -x - y st x + y <= 1, x, y >= 0 -> obj -1
        let sol = solve_simple(
            vec![-1.0, -1.0],
            vec![(vec![1.0, 1.0], Relation::Le, 1.0)],
            vec![iv(0.0, f64::INFINITY), iv(0.0, f64::INFINITY)],
        );
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value + 1.0).abs() < 1e-9);
        assert!((sol.x[0] + sol.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_bounds_infeasible() {
        // x <= 0 and x >= 1
        let sol = solve_simple(
            vec![1.0],
            vec![
                (vec![1.0], Relation::Le, 0.0),
                (vec![-1.0], Relation::Le, -1.0),
            ],
            vec![iv(f64::NEG_INFINITY, f64::INFINITY)],
        );
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let sol = solve_simple(vec![-1.0], vec![], vec![iv(0.0, f64::INFINITY)]);
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_with_free_variable() {
        // min x + y st x - y = 2, x in [0, 10], y free
        let sol = solve_simple(
            vec![1.0, 1.0],
            vec![(vec![1.0, -1.0], Relation::Eq, 2.0)],
            vec![iv(0.0, 10.0), iv(f64::NEG_INFINITY, f64::INFINITY)],
        );
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - sol.x[1] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn degenerate_lp_terminates() {
        // several redundant rows through the optimum
        let sol = solve_simple(
            vec![-1.0, -1.0],
            vec![
                (vec![1.0, 0.0], Relation::Le, 1.0),
                (vec![1.0, 0.0], Relation::Le, 1.0),
                (vec![0.0, 1.0], Relation::Le, 1.0),
                (vec![1.0, 1.0], Relation::Le, 2.0),
                (vec![2.0, 2.0], Relation::Le, 4.0),
            ],
            vec![iv(0.0, f64::INFINITY), iv(0.0, f64::INFINITY)],
        );
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value + 2.0).abs() < 1e-8);
    }

    fn one_stage_inputs() -> Vec<StageLin> {
        vec![StageLin {
            a: vec![vec![1.0]],
            b: vec![vec![0.5]],
            h0: vec![0.2],
            x_next_ref: vec![0.2],
            u_ref: vec![0.0],
            cost: 3.0,
            grad_x: vec![0.0],
            grad_u: vec![0.4],
            grad_xnext: vec![1.0],
        }]
    }

    #[test]
    fn inf_trust_region_becomes_du_box() {
        let stages = one_stage_inputs();
        let x_box = IntervalVector::new(vec![iv(-5.0, 5.0)]);
        let u_box = IntervalVector::new(vec![iv(-2.0, 2.0)]);
        let (lp, layout) = build_subproblem(
            &stages,
            0.5,
            10.0,
            &x_box,
            &u_box,
            NormChoice::Inf,
            NormChoice::One,
        )
        .unwrap();
        assert_eq!(lp.bounds[layout.du0], iv(-0.5, 0.5));
    }

    #[test]
    fn zero_gradients_and_zero_lambda_give_constant_cost() {
        let mut stages = one_stage_inputs();
        stages[0].grad_u = vec![0.0];
        stages[0].grad_xnext = vec![0.0];
        let x_box = IntervalVector::new(vec![iv(-5.0, 5.0)]);
        let u_box = IntervalVector::new(vec![iv(-2.0, 2.0)]);
        let (lp, _) = build_subproblem(
            &stages,
            0.5,
            0.0,
            &x_box,
            &u_box,
            NormChoice::Inf,
            NormChoice::One,
        )
        .unwrap();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let total = sol.objective_value + subproblem_cost_const(&stages);
        assert!((total - 3.0).abs() < 1e-9);
    }

    #[test]
    fn subproblem_always_feasible_even_with_wild_reference() {
        // reference chain far from the linearized dynamics: slacks absorb it
        let stages = vec![StageLin {
            a: vec![vec![2.0]],
            b: vec![vec![1.0]],
            h0: vec![4.0],
            x_next_ref: vec![-4.9],
            u_ref: vec![1.9],
            cost: 1.0,
            grad_x: vec![1.0],
            grad_u: vec![1.0],
            grad_xnext: vec![1.0],
        }];
        let x_box = IntervalVector::new(vec![iv(-5.0, 5.0)]);
        let u_box = IntervalVector::new(vec![iv(-2.0, 2.0)]);
        for trust in [NormChoice::Inf, NormChoice::One] {
            for pen in [NormChoice::One, NormChoice::Inf] {
                let (lp, _) =
                    build_subproblem(&stages, 0.25, 100.0, &x_box, &u_box, trust, pen).unwrap();
                let sol = solve(&lp).unwrap();
                assert_eq!(sol.status, LpStatus::Optimal, "{trust:?}/{pen:?}");
            }
        }
    }

    #[test]
    fn one_norm_trust_region_budget() {
        // linear cost pushing both controls up; 1-norm budget splits them
        let stages = vec![
            StageLin {
                a: vec![vec![1.0]],
                b: vec![vec![1.0]],
                h0: vec![0.0],
                x_next_ref: vec![0.0],
                u_ref: vec![0.0],
                cost: 0.0,
                grad_x: vec![0.0],
                grad_u: vec![-1.0],
                grad_xnext: vec![0.0],
            },
            StageLin {
                a: vec![vec![1.0]],
                b: vec![vec![1.0]],
                h0: vec![0.0],
                x_next_ref: vec![0.0],
                u_ref: vec![0.0],
                cost: 0.0,
                grad_x: vec![0.0],
                grad_u: vec![-1.0],
                grad_xnext: vec![0.0],
            },
        ];
        let x_box = IntervalVector::new(vec![iv(-5.0, 5.0)]);
        let u_box = IntervalVector::new(vec![iv(-2.0, 2.0)]);
        let (lp, layout) = build_subproblem(
            &stages,
            0.6,
            1000.0,
            &x_box,
            &u_box,
            NormChoice::One,
            NormChoice::One,
        )
        .unwrap();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let total_du: f64 = (0..2).map(|q| layout.du(&sol.x, q)[0].abs()).sum();
        assert!(total_du <= 0.6 + 1e-8);
        assert!(total_du >= 0.6 - 1e-6, "budget should be exhausted");
    }

    #[test]
    fn grid_oracle_one_stage() {
        // brute-force the linearized objective over the feasible box
        let stages = one_stage_inputs();
        let x_box = IntervalVector::new(vec![iv(-1.0, 1.0)]);
        let u_box = IntervalVector::new(vec![iv(-2.0, 2.0)]);
        let lambda = 50.0;
        let r = 0.7;
        let (lp, layout) = build_subproblem(
            &stages,
            r,
            lambda,
            &x_box,
            &u_box,
            NormChoice::Inf,
            NormChoice::One,
        )
        .unwrap();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);

        // grid over (dx1, du0); v pinned by the dynamics row
        let st = &stages[0];
        let mut best = f64::INFINITY;
        let steps = 400;
        for i in 0..=steps {
            let dx = x_box[0].lo() - st.x_next_ref[0]
                + (x_box[0].width() ) * i as f64 / steps as f64;
            for j in 0..=steps {
                let du = -r + 2.0 * r * j as f64 / steps as f64;
                if st.u_ref[0] + du < u_box[0].lo() || st.u_ref[0] + du > u_box[0].hi() {
                    continue;
                }
                let v = dx - st.b[0][0] * du - (st.h0[0] - st.x_next_ref[0]);
                let obj = st.grad_u[0] * du + st.grad_xnext[0] * dx + lambda * v.abs();
                if obj < best {
                    best = obj;
                }
            }
        }
        assert!(
            (sol.objective_value - best).abs() < 1e-5,
            "lp {} vs grid {}",
            sol.objective_value,
            best
        );
        let _ = layout;
    }
}
