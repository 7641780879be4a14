//! Small expression language with sound interval semantics.
//!
//! Expressions are built once (by the harness or a config layer), compiled to
//! a flat tape, and then evaluated two ways: a forward pass that produces an
//! enclosure of the expression's range, and an HC4-revise forward-backward
//! pass that narrows the variable domains against a constraint on the root
//! value without discarding any feasible point.
//!
//! The primitive set (+, -, *, /, integer power, sqrt, sin, cos, exp, min,
//! max) is closed: forward evaluation is total on its domain and every
//! backward rule either narrows or leaves the child domain unchanged.
//! Transcendental enclosures pad the libm result by a few ULPs, which covers
//! faithfully-rounded implementations.

use crate::interval::Interval;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("expression domain is empty at node {0}")]
    EmptyDomain(usize),
    #[error("variable slot {0} out of range")]
    BadSlot(usize),
}

/// Expression tree. `Var(i)` refers to slot `i` of the evaluation context.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Sqrt(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }

    pub fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    pub fn pow(self, n: u32) -> Expr {
        Expr::Pow(Box::new(self), n)
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn min(self, rhs: Expr) -> Expr {
        Expr::Min(Box::new(self), Box::new(rhs))
    }

    pub fn max(self, rhs: Expr) -> Expr {
        Expr::Max(Box::new(self), Box::new(rhs))
    }

    /// Plain f64 evaluation (used for ground-truth models and coefficients).
    pub fn eval_point(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => vars[*i],
            Expr::Neg(a) => -a.eval_point(vars),
            Expr::Add(a, b) => a.eval_point(vars) + b.eval_point(vars),
            Expr::Sub(a, b) => a.eval_point(vars) - b.eval_point(vars),
            Expr::Mul(a, b) => a.eval_point(vars) * b.eval_point(vars),
            Expr::Div(a, b) => a.eval_point(vars) / b.eval_point(vars),
            Expr::Pow(a, n) => a.eval_point(vars).powi(*n as i32),
            Expr::Sqrt(a) => a.eval_point(vars).sqrt(),
            Expr::Sin(a) => a.eval_point(vars).sin(),
            Expr::Cos(a) => a.eval_point(vars).cos(),
            Expr::Exp(a) => a.eval_point(vars).exp(),
            Expr::Min(a, b) => a.eval_point(vars).min(b.eval_point(vars)),
            Expr::Max(a, b) => a.eval_point(vars).max(b.eval_point(vars)),
        }
    }

    /// Highest referenced slot + 1.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Sqrt(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.arity(),
            Expr::Pow(a, _) => a.arity(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn compile(&self) -> CompiledExpr {
        let mut nodes = Vec::new();
        let root = flatten(self, &mut nodes);
        CompiledExpr { nodes, root }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Const(f64),
    Var(usize),
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Pow(usize, u32),
    Sqrt(usize),
    Sin(usize),
    Cos(usize),
    Exp(usize),
    Min(usize, usize),
    Max(usize, usize),
}

fn flatten(e: &Expr, nodes: &mut Vec<Node>) -> usize {
    let node = match e {
        Expr::Const(c) => Node::Const(*c),
        Expr::Var(i) => Node::Var(*i),
        Expr::Neg(a) => Node::Neg(flatten(a, nodes)),
        Expr::Add(a, b) => Node::Add(flatten(a, nodes), flatten(b, nodes)),
        Expr::Sub(a, b) => Node::Sub(flatten(a, nodes), flatten(b, nodes)),
        Expr::Mul(a, b) => Node::Mul(flatten(a, nodes), flatten(b, nodes)),
        Expr::Div(a, b) => Node::Div(flatten(a, nodes), flatten(b, nodes)),
        Expr::Pow(a, n) => Node::Pow(flatten(a, nodes), *n),
        Expr::Sqrt(a) => Node::Sqrt(flatten(a, nodes)),
        Expr::Sin(a) => Node::Sin(flatten(a, nodes)),
        Expr::Cos(a) => Node::Cos(flatten(a, nodes)),
        Expr::Exp(a) => Node::Exp(flatten(a, nodes)),
        Expr::Min(a, b) => Node::Min(flatten(a, nodes), flatten(b, nodes)),
        Expr::Max(a, b) => Node::Max(flatten(a, nodes), flatten(b, nodes)),
    };
    nodes.push(node);
    nodes.len() - 1
}

/// Expression compiled to a flat tape in evaluation order.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    nodes: Vec<Node>,
    root: usize,
}

const HUGE: f64 = 1e300;

fn whole_line() -> Interval {
    Interval::new(-HUGE, HUGE)
}

/// Padded enclosure of sin over a box (faithful libm assumed, 4-ULP pad).
fn sin_range(a: Interval) -> Interval {
    range_with_extrema(a, f64::sin, std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2)
}

fn cos_range(a: Interval) -> Interval {
    range_with_extrema(a, f64::cos, 0.0, std::f64::consts::PI)
}

/// Range of a 2-pi-periodic map with one max (at `max_at + 2k pi`) and one
/// min (at `min_at + 2k pi`) per period, values in [-1, 1].
fn range_with_extrema(a: Interval, f: fn(f64) -> f64, max_at: f64, min_at: f64) -> Interval {
    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
    const PAD: f64 = 1e-14;
    if a.width() >= TWO_PI {
        return Interval::new(-1.0, 1.0);
    }
    let contains_shifted = |c: f64| -> bool {
        // conservative: treat near-misses as hits
        let k_lo = ((a.lo() - c) / TWO_PI - 1e-12).ceil();
        let k_hi = ((a.hi() - c) / TWO_PI + 1e-12).floor();
        k_lo <= k_hi
    };
    let (fa, fb) = (f(a.lo()), f(a.hi()));
    let mut lo = fa.min(fb) - PAD;
    let mut hi = fa.max(fb) + PAD;
    if contains_shifted(max_at) {
        hi = 1.0;
    }
    if contains_shifted(min_at) {
        lo = -1.0;
    }
    Interval::new(lo.max(-1.0), hi.min(1.0))
}

fn exp_range(a: Interval) -> Interval {
    const PAD_ULPS: u32 = 4;
    let mut lo = a.lo().exp();
    let mut hi = a.hi().exp();
    for _ in 0..PAD_ULPS {
        lo = lo.next_down();
        hi = hi.next_up();
    }
    Interval::new(lo.max(0.0), hi.max(0.0))
}

fn ln_range(a: Interval) -> Interval {
    const PAD_ULPS: u32 = 4;
    let mut lo = a.lo().ln();
    let mut hi = a.hi().ln();
    for _ in 0..PAD_ULPS {
        lo = lo.next_down();
        hi = hi.next_up();
    }
    Interval::new(lo.min(hi), hi.max(lo))
}

/// Enclosure of the non-negative n-th root, padded outward.
fn root_range(a: Interval, n: u32) -> Interval {
    debug_assert!(a.lo() >= 0.0);
    if n == 2 {
        return a.sqrt();
    }
    let inv = 1.0 / n as f64;
    let mut lo = a.lo().powf(inv);
    let mut hi = a.hi().powf(inv);
    for _ in 0..4 {
        lo = lo.next_down();
        hi = hi.next_up();
    }
    Interval::new(lo.max(0.0), hi)
}

impl CompiledExpr {
    /// Forward interval evaluation. Division by a zero-containing interval
    /// yields a huge (but valid) enclosure rather than an error, keeping the
    /// contractor total; sqrt restricts to the nonnegative part of its input
    /// and reports an empty domain when there is none.
    pub fn eval(&self, vars: &[Interval]) -> Result<Interval, ExprError> {
        let mut vals = vec![Interval::zero(); self.nodes.len()];
        self.forward(vars, &mut vals)?;
        Ok(vals[self.root])
    }

    fn forward(&self, vars: &[Interval], vals: &mut [Interval]) -> Result<(), ExprError> {
        for (idx, node) in self.nodes.iter().enumerate() {
            let v = match node {
                Node::Const(c) => Interval::point(*c),
                Node::Var(i) => *vars.get(*i).ok_or(ExprError::BadSlot(*i))?,
                Node::Neg(a) => -vals[*a],
                Node::Add(a, b) => vals[*a] + vals[*b],
                Node::Sub(a, b) => vals[*a] - vals[*b],
                Node::Mul(a, b) => vals[*a] * vals[*b],
                Node::Div(a, b) => match vals[*a].checked_div(vals[*b]) {
                    Ok(q) => q,
                    Err(_) => whole_line(),
                },
                Node::Pow(a, n) => vals[*a].powi(*n),
                Node::Sqrt(a) => {
                    let dom = vals[*a]
                        .intersect(&Interval::new(0.0, f64::INFINITY))
                        .ok_or(ExprError::EmptyDomain(idx))?;
                    dom.sqrt()
                }
                Node::Sin(a) => sin_range(vals[*a]),
                Node::Cos(a) => cos_range(vals[*a]),
                Node::Exp(a) => exp_range(vals[*a]),
                Node::Min(a, b) => Interval::new(
                    vals[*a].lo().min(vals[*b].lo()),
                    vals[*a].hi().min(vals[*b].hi()),
                ),
                Node::Max(a, b) => Interval::new(
                    vals[*a].lo().max(vals[*b].lo()),
                    vals[*a].hi().max(vals[*b].hi()),
                ),
            };
            vals[idx] = v;
        }
        Ok(())
    }

    /// HC4-revise: narrows `vars` so that the expression value can still lie
    /// in `target`. Returns `Ok(true)` when any slot changed, and
    /// `Err(EmptyDomain)` when the constraint is infeasible over the input
    /// box. Slots never widen.
    pub fn hc4_revise(&self, vars: &mut [Interval], target: Interval) -> Result<bool, ExprError> {
        let mut vals = vec![Interval::zero(); self.nodes.len()];
        self.forward(vars, &mut vals)?;
        let rooted = vals[self.root]
            .intersect(&target)
            .ok_or(ExprError::EmptyDomain(self.root))?;
        vals[self.root] = rooted;
        // backward pass in reverse tape order
        for idx in (0..self.nodes.len()).rev() {
            let nv = vals[idx];
            match &self.nodes[idx] {
                Node::Const(c) => {
                    if !nv.contains(*c) {
                        return Err(ExprError::EmptyDomain(idx));
                    }
                }
                Node::Var(_) => {}
                Node::Neg(a) => narrow(&mut vals, *a, -nv, idx)?,
                Node::Add(a, b) => {
                    let (va, vb) = (vals[*a], vals[*b]);
                    narrow(&mut vals, *a, nv - vb, idx)?;
                    narrow(&mut vals, *b, nv - va, idx)?;
                }
                Node::Sub(a, b) => {
                    let (va, vb) = (vals[*a], vals[*b]);
                    narrow(&mut vals, *a, nv + vb, idx)?;
                    narrow(&mut vals, *b, va - nv, idx)?;
                }
                Node::Mul(a, b) => {
                    let (va, vb) = (vals[*a], vals[*b]);
                    if let Ok(q) = nv.checked_div(vb) {
                        narrow(&mut vals, *a, q, idx)?;
                    }
                    if let Ok(q) = nv.checked_div(va) {
                        narrow(&mut vals, *b, q, idx)?;
                    }
                }
                Node::Div(a, b) => {
                    let (va, vb) = (vals[*a], vals[*b]);
                    narrow(&mut vals, *a, nv * vb, idx)?;
                    if let Ok(q) = va.checked_div(nv) {
                        narrow(&mut vals, *b, q, idx)?;
                    }
                }
                Node::Pow(a, n) => {
                    if *n == 0 {
                        if !nv.contains(1.0) {
                            return Err(ExprError::EmptyDomain(idx));
                        }
                        continue;
                    }
                    let va = vals[*a];
                    let inv = if *n % 2 == 0 {
                        match nv.intersect(&Interval::new(0.0, f64::INFINITY)) {
                            None => return Err(ExprError::EmptyDomain(idx)),
                            Some(pos) => {
                                let mag = root_range(pos, *n);
                                let neg_branch = va.intersect(&-mag);
                                let pos_branch = va.intersect(&mag);
                                match (neg_branch, pos_branch) {
                                    (Some(x), Some(y)) => x.hull(&y),
                                    (Some(x), None) | (None, Some(x)) => x,
                                    (None, None) => return Err(ExprError::EmptyDomain(idx)),
                                }
                            }
                        }
                    } else {
                        // odd power: monotone, signed root
                        let root_of = |v: f64| -> f64 {
                            let r = v.abs().powf(1.0 / *n as f64).copysign(v);
                            r
                        };
                        let mut lo = root_of(nv.lo());
                        let mut hi = root_of(nv.hi());
                        for _ in 0..4 {
                            lo = lo.next_down();
                            hi = hi.next_up();
                        }
                        Interval::new(lo, hi)
                    };
                    let merged = vals[*a].intersect(&inv).ok_or(ExprError::EmptyDomain(idx))?;
                    vals[*a] = merged;
                }
                Node::Sqrt(a) => {
                    let pos = nv
                        .intersect(&Interval::new(0.0, f64::INFINITY))
                        .ok_or(ExprError::EmptyDomain(idx))?;
                    narrow(&mut vals, *a, pos.sq(), idx)?;
                }
                Node::Sin(a) => {
                    let va = vals[*a];
                    if let Some(inv) = invert_sin(va, nv) {
                        narrow(&mut vals, *a, inv, idx)?;
                    }
                }
                Node::Cos(a) => {
                    let va = vals[*a];
                    if let Some(inv) = invert_cos(va, nv) {
                        narrow(&mut vals, *a, inv, idx)?;
                    }
                }
                Node::Exp(a) => {
                    let pos = nv
                        .intersect(&Interval::new(f64::MIN_POSITIVE, f64::INFINITY))
                        .ok_or(ExprError::EmptyDomain(idx))?;
                    narrow(&mut vals, *a, ln_range(pos), idx)?;
                }
                Node::Min(a, b) => {
                    let above = Interval::new(nv.lo(), f64::INFINITY);
                    let (va, vb) = (vals[*a], vals[*b]);
                    narrow(&mut vals, *a, above, idx)?;
                    narrow(&mut vals, *b, above, idx)?;
                    // if the other side cannot attain the min, this side must
                    if vb.lo() > nv.hi() {
                        narrow(&mut vals, *a, nv, idx)?;
                    }
                    if va.lo() > nv.hi() {
                        narrow(&mut vals, *b, nv, idx)?;
                    }
                }
                Node::Max(a, b) => {
                    let below = Interval::new(f64::NEG_INFINITY, nv.hi());
                    let (va, vb) = (vals[*a], vals[*b]);
                    narrow(&mut vals, *a, below, idx)?;
                    narrow(&mut vals, *b, below, idx)?;
                    if vb.hi() < nv.lo() {
                        narrow(&mut vals, *a, nv, idx)?;
                    }
                    if va.hi() < nv.lo() {
                        narrow(&mut vals, *b, nv, idx)?;
                    }
                }
            }
        }
        // write back narrowed variable slots
        let mut changed = false;
        for (idx, node) in self.nodes.iter().enumerate() {
            if let Node::Var(i) = node {
                let merged = vars[*i]
                    .intersect(&vals[idx])
                    .ok_or(ExprError::EmptyDomain(idx))?;
                if merged != vars[*i] {
                    vars[*i] = merged;
                    changed = true;
                }
            }
        }
        Ok(changed)
    }
}

fn narrow(
    vals: &mut [Interval],
    child: usize,
    with: Interval,
    at: usize,
) -> Result<(), ExprError> {
    let merged = vals[child].intersect(&with).ok_or(ExprError::EmptyDomain(at))?;
    vals[child] = merged;
    Ok(())
}

/// Principal-branch inversion of sin: contracts only when the argument box
/// lies inside one monotone half-period; otherwise returns None (no-op).
fn invert_sin(arg: Interval, value: Interval) -> Option<Interval> {
    const PI: f64 = std::f64::consts::PI;
    let y = value.intersect(&Interval::new(-1.0, 1.0))?;
    // branch index: sin is increasing on [k pi - pi/2, k pi + pi/2] for even
    // k, decreasing for odd k
    let k = ((arg.mid() + PI / 2.0) / PI).floor();
    let branch_lo = k * PI - PI / 2.0;
    let branch_hi = k * PI + PI / 2.0;
    if arg.lo() < branch_lo - 1e-12 || arg.hi() > branch_hi + 1e-12 {
        return None;
    }
    let (s_lo, s_hi) = (y.lo().asin(), y.hi().asin());
    let pad = 1e-12;
    let inv = if (k as i64).rem_euclid(2) == 0 {
        Interval::new(k * PI + s_lo - pad, k * PI + s_hi + pad)
    } else {
        Interval::new(k * PI - s_hi - pad, k * PI - s_lo + pad)
    };
    Some(inv)
}

fn invert_cos(arg: Interval, value: Interval) -> Option<Interval> {
    const PI: f64 = std::f64::consts::PI;
    let y = value.intersect(&Interval::new(-1.0, 1.0))?;
    // cos is decreasing on [k pi, (k+1) pi] for even k, increasing for odd k
    let k = (arg.mid() / PI).floor();
    let branch_lo = k * PI;
    let branch_hi = (k + 1.0) * PI;
    if arg.lo() < branch_lo - 1e-12 || arg.hi() > branch_hi + 1e-12 {
        return None;
    }
    let (c_lo, c_hi) = (y.hi().acos(), y.lo().acos());
    let pad = 1e-12;
    let inv = if (k as i64).rem_euclid(2) == 0 {
        Interval::new(k * PI + c_lo - pad, k * PI + c_hi + pad)
    } else {
        Interval::new((k + 1.0) * PI - c_hi - pad, (k + 1.0) * PI - c_lo + pad)
    };
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn forward_polynomial() {
        // x^2 + 2y over x in [-1, 2], y in [0, 1]
        let e = Expr::var(0).pow(2).add(Expr::constant(2.0).mul(Expr::var(1)));
        let c = e.compile();
        let r = c.eval(&[iv(-1.0, 2.0), iv(0.0, 1.0)]).unwrap();
        assert_eq!(r, iv(0.0, 6.0));
        assert_eq!(e.eval_point(&[2.0, 1.0]), 6.0);
    }

    #[test]
    fn forward_sin_covers_extremum() {
        let e = Expr::var(0).sin();
        let c = e.compile();
        let r = c.eval(&[iv(0.0, 2.0)]).unwrap();
        // max of sin on [0,2] is 1 (at pi/2), min is 0
        assert_eq!(r.hi(), 1.0);
        assert!(r.lo() <= 0.0 && r.lo() > -1e-10);
        // sample containment
        for i in 0..100 {
            let x = 2.0 * i as f64 / 99.0;
            assert!(r.contains(x.sin()));
        }
    }

    #[test]
    fn hc4_direct_clip() {
        // constraint: x >= 0 with x in [-1, 2]
        let c = Expr::var(0).compile();
        let mut vars = [iv(-1.0, 2.0)];
        c.hc4_revise(&mut vars, Interval::new(0.0, f64::INFINITY))
            .unwrap();
        assert_eq!(vars[0], iv(0.0, 2.0));
    }

    #[test]
    fn hc4_coulomb_friction_cone() {
        // F1 - sqrt(F2^2 * mu1 + F3^2 * mu2) >= 0
        let e = Expr::var(0).sub(
            Expr::var(1)
                .pow(2)
                .mul(Expr::constant(1.0))
                .add(Expr::var(2).pow(2).mul(Expr::constant(1.0)))
                .sqrt(),
        );
        let c = e.compile();
        let mut vars = [iv(0.0, 1.0), iv(0.0, 2.0), iv(0.0, 0.0)];
        c.hc4_revise(&mut vars, Interval::new(0.0, f64::INFINITY))
            .unwrap();
        assert_eq!(vars[0], iv(0.0, 1.0));
        // tangential force bounded by the normal force
        assert!(vars[1].hi() <= 1.0 + 1e-9 && vars[1].hi() >= 1.0 - 1e-9);
        assert_eq!(vars[1].lo(), 0.0);
    }

    #[test]
    fn hc4_vacuous_constraint_is_noop() {
        // 0 >= -1 touches no variable and narrows nothing
        let e = Expr::constant(0.0).sub(Expr::constant(-1.0));
        let c = e.compile();
        let mut vars = [iv(-3.0, 3.0)];
        let changed = c
            .hc4_revise(&mut vars, Interval::new(0.0, f64::INFINITY))
            .unwrap();
        assert!(!changed);
        assert_eq!(vars[0], iv(-3.0, 3.0));
    }

    #[test]
    fn hc4_infeasible_reports_empty() {
        // x = 5 with x in [0, 1]
        let c = Expr::var(0).compile();
        let mut vars = [iv(0.0, 1.0)];
        let err = c.hc4_revise(&mut vars, Interval::point(5.0));
        assert!(matches!(err, Err(ExprError::EmptyDomain(_))));
    }

    #[test]
    fn hc4_equality_through_product() {
        // 2x = 6 -> x = 3
        let c = Expr::constant(2.0).mul(Expr::var(0)).compile();
        let mut vars = [iv(-10.0, 10.0)];
        c.hc4_revise(&mut vars, Interval::point(6.0)).unwrap();
        assert!(vars[0].contains(3.0));
        assert!(vars[0].width() < 1e-12);
    }

    #[test]
    fn hc4_never_widens_and_stays_sound() {
        // randomized: constraint x*y - z >= 0; check no feasible point lost
        let e = Expr::var(0).mul(Expr::var(1)).sub(Expr::var(2));
        let c = e.compile();
        let mut seed = 0x9e3779b9u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..500 {
            let mk = |a: f64, b: f64| iv(a.min(b), a.max(b));
            let boxes = [mk(rnd(), rnd()), mk(rnd(), rnd()), mk(rnd(), rnd())];
            let mut vars = boxes;
            let res = c.hc4_revise(&mut vars, Interval::new(0.0, f64::INFINITY));
            // never widen
            if res.is_ok() {
                for i in 0..3 {
                    assert!(vars[i].subset_of(&boxes[i]));
                }
            }
            // no feasible sample point lost
            for s in 0..8 {
                let p = [
                    boxes[0].lo() + (boxes[0].width()) * ((s & 1) as f64),
                    boxes[1].lo() + (boxes[1].width()) * (((s >> 1) & 1) as f64),
                    boxes[2].lo() + (boxes[2].width()) * (((s >> 2) & 1) as f64),
                ];
                if p[0] * p[1] - p[2] >= 0.0 {
                    assert!(res.is_ok());
                    if let Ok(_) = res {
                        assert!(vars[0].contains(p[0]));
                        assert!(vars[1].contains(p[1]));
                        assert!(vars[2].contains(p[2]));
                    }
                }
            }
        }
    }

    #[test]
    fn sin_inversion_principal_branch() {
        // sin(x) = 0.5 with x in [0, 1.5] -> x near asin(0.5)
        let c = Expr::var(0).sin().compile();
        let mut vars = [iv(0.0, 1.5)];
        c.hc4_revise(&mut vars, Interval::point(0.5)).unwrap();
        let target = 0.5f64.asin();
        assert!(vars[0].contains(target));
        assert!(vars[0].width() < 1e-9);
    }
}
