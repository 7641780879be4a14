//! Interval arithmetic over f64 scalars, vectors and matrices.
//!
//! Every operation rounds outward, so a computed interval always encloses the
//! exact real-arithmetic result set. Rounding is done portably: each primitive
//! op is computed in round-to-nearest, the rounding error is recovered with an
//! error-free transform (two-sum, or an FMA residual for products, quotients
//! and square roots), and the affected endpoint is nudged one unit in the last
//! place outward when the result was inexact. Exact results stay exact, which
//! keeps point intervals (and zero-width norm terms) degenerate.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("invalid interval endpoints [{0}, {1}]")]
    InvalidEndpoints(f64, f64),
    #[error("division by an interval containing zero")]
    DivisionByZeroInterval,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Directed-rounding primitives.
///
/// The `*_lo` variants return a value `<=` the exact result, the `*_hi`
/// variants a value `>=` it, each within one ULP of the round-to-nearest
/// value. Inputs are assumed finite; overflow saturates soundly.
mod round {
    #[inline]
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        (s, err)
    }

    #[inline]
    pub fn add_lo(a: f64, b: f64) -> f64 {
        let (s, e) = two_sum(a, b);
        if s.is_infinite() {
            return if s < 0.0 { s } else { f64::MAX };
        }
        if e < 0.0 {
            s.next_down()
        } else {
            s
        }
    }

    #[inline]
    pub fn add_hi(a: f64, b: f64) -> f64 {
        let (s, e) = two_sum(a, b);
        if s.is_infinite() {
            return if s > 0.0 { s } else { f64::MIN };
        }
        if e > 0.0 {
            s.next_up()
        } else {
            s
        }
    }

    #[inline]
    pub fn sub_lo(a: f64, b: f64) -> f64 {
        add_lo(a, -b)
    }

    #[inline]
    pub fn sub_hi(a: f64, b: f64) -> f64 {
        add_hi(a, -b)
    }

    /// Product with its exact FMA residual; returns (lower, upper) bounds.
    #[inline]
    pub fn mul_bounds(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        if p.is_infinite() {
            return if p < 0.0 { (p, f64::MIN) } else { (f64::MAX, p) };
        }
        let e = a.mul_add(b, -p);
        if e > 0.0 {
            (p, p.next_up())
        } else if e < 0.0 {
            (p.next_down(), p)
        } else {
            (p, p)
        }
    }

    /// Quotient bounds; `b` must be nonzero.
    #[inline]
    pub fn div_bounds(a: f64, b: f64) -> (f64, f64) {
        let q = a / b;
        if q.is_infinite() {
            return if q < 0.0 { (q, f64::MIN) } else { (f64::MAX, q) };
        }
        // residual r = a - q*b, true quotient = q + r/b
        let r = q.mul_add(-b, a);
        let excess = if b > 0.0 { r } else { -r };
        if excess > 0.0 {
            (q, q.next_up())
        } else if excess < 0.0 {
            (q.next_down(), q)
        } else {
            (q, q)
        }
    }

    /// Square-root bounds; `x` must be >= 0.
    #[inline]
    pub fn sqrt_bounds(x: f64) -> (f64, f64) {
        let r = x.sqrt();
        let e = r.mul_add(r, -x);
        if e > 0.0 {
            ((r.next_down()).max(0.0), r)
        } else if e < 0.0 {
            (r, r.next_up())
        } else {
            (r, r)
        }
    }
}

/// A closed real interval `[lo, hi]` with `lo <= hi`. NaN endpoints are
/// rejected on construction; infinite endpoints are permitted (they only
/// appear as variable bounds in the LP layer, never in enclosure arithmetic).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Builds `[lo, hi]`, panicking when the endpoints do not form a valid
    /// interval. Use [`Interval::try_new`] for fallible construction.
    pub fn new(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi).expect("invalid interval endpoints")
    }

    pub fn try_new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(IntervalError::InvalidEndpoints(lo, hi));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN interval endpoint");
        Self { lo: x, hi: x }
    }

    pub fn zero() -> Self {
        Self { lo: 0.0, hi: 0.0 }
    }

    pub fn one() -> Self {
        Self { lo: 1.0, hi: 1.0 }
    }

    /// The symmetric interval `[-r, r]`.
    pub fn symmetric(r: f64) -> Self {
        assert!(r >= 0.0, "symmetric radius must be nonnegative");
        Self { lo: -r, hi: r }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        let m = 0.5 * (self.lo + self.hi);
        if m.is_finite() {
            m.clamp(self.lo, self.hi)
        } else {
            0.5 * self.lo + 0.5 * self.hi
        }
    }

    pub fn width(&self) -> f64 {
        // hi - lo rounded up, so widths stay sound over-estimates
        round::sub_hi(self.hi, self.lo)
    }

    /// Largest absolute value of any member.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// True when `self` is a subset of `other`.
    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// The overlap of two intervals, `None` when they are disjoint. An empty
    /// intersection is a first-class outcome: contraction pipelines use it to
    /// detect inconsistent data or side information.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    /// Tightest interval enclosing both arguments.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Division, erroring when the divisor contains zero.
    pub fn checked_div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.contains(0.0) {
            return Err(IntervalError::DivisionByZeroInterval);
        }
        let (l1, h1) = round::div_bounds(self.lo, rhs.lo);
        let (l2, h2) = round::div_bounds(self.lo, rhs.hi);
        let (l3, h3) = round::div_bounds(self.hi, rhs.lo);
        let (l4, h4) = round::div_bounds(self.hi, rhs.hi);
        Ok(Interval {
            lo: l1.min(l2).min(l3).min(l4),
            hi: h1.max(h2).max(h3).max(h4),
        })
    }

    /// Division by a nonzero point value.
    pub fn div_scalar(self, s: f64) -> Result<Interval, IntervalError> {
        if s == 0.0 || s.is_nan() {
            return Err(IntervalError::DivisionByZeroInterval);
        }
        let (l1, h1) = round::div_bounds(self.lo, s);
        let (l2, h2) = round::div_bounds(self.hi, s);
        Ok(Interval {
            lo: l1.min(l2),
            hi: h1.max(h2),
        })
    }

    /// Multiplication by a point value.
    pub fn scale(self, s: f64) -> Interval {
        debug_assert!(!s.is_nan());
        let (l1, h1) = round::mul_bounds(self.lo, s);
        let (l2, h2) = round::mul_bounds(self.hi, s);
        Interval {
            lo: l1.min(l2),
            hi: h1.max(h2),
        }
    }

    /// Translation by a point value.
    pub fn shift(self, s: f64) -> Interval {
        Interval {
            lo: round::add_lo(self.lo, s),
            hi: round::add_hi(self.hi, s),
        }
    }

    /// Enclosure of `{x^2 : x in self}`. Uses the dedicated square rule so
    /// symmetric intervals do not lose a factor to the naive product.
    pub fn sq(self) -> Interval {
        let (a, b) = (self.lo, self.hi);
        let (l_a, h_a) = round::mul_bounds(a, a);
        let (l_b, h_b) = round::mul_bounds(b, b);
        if self.contains(0.0) {
            Interval {
                lo: 0.0,
                hi: h_a.max(h_b),
            }
        } else {
            Interval {
                lo: l_a.min(l_b).max(0.0),
                hi: h_a.max(h_b),
            }
        }
    }

    /// Square root; requires `lo >= 0`.
    pub fn sqrt(self) -> Interval {
        assert!(self.lo >= 0.0, "sqrt of an interval with negative values");
        let (l, _) = round::sqrt_bounds(self.lo);
        let (_, h) = round::sqrt_bounds(self.hi);
        Interval {
            lo: l.max(0.0),
            hi: h,
        }
    }

    /// Integer power with the even-power rule (tight on sign-mixed intervals).
    pub fn powi(self, n: u32) -> Interval {
        match n {
            0 => Interval::one(),
            1 => self,
            _ => {
                if n % 2 == 0 {
                    let lo_abs = if self.contains(0.0) {
                        0.0
                    } else {
                        self.lo.abs().min(self.hi.abs())
                    };
                    let hi_abs = self.mag();
                    Interval {
                        lo: powi_dir(lo_abs, n, false).max(0.0),
                        hi: powi_dir(hi_abs, n, true),
                    }
                } else {
                    // odd powers are monotone
                    Interval {
                        lo: powi_signed_dir(self.lo, n, false),
                        hi: powi_signed_dir(self.hi, n, true),
                    }
                }
            }
        }
    }

    /// Widens by `rel * width + abs` on both sides (epsilon-inflation).
    pub fn inflate(self, rel: f64, abs: f64) -> Interval {
        let pad = rel * self.width() + abs;
        Interval {
            lo: round::sub_lo(self.lo, pad),
            hi: round::add_hi(self.hi, pad),
        }
    }
}

/// `x^n` for x >= 0 with directed rounding via repeated multiplication.
fn powi_dir(x: f64, n: u32, upper: bool) -> f64 {
    let mut acc = 1.0f64;
    for _ in 0..n {
        let (l, h) = round::mul_bounds(acc, x);
        acc = if upper { h } else { l };
    }
    acc
}

/// Signed odd power with directed rounding.
fn powi_signed_dir(x: f64, n: u32, upper: bool) -> f64 {
    debug_assert!(n % 2 == 1);
    let mag = powi_dir(x.abs(), n, upper != (x < 0.0));
    if x < 0.0 {
        -mag
    } else {
        mag
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: round::add_lo(self.lo, rhs.lo),
            hi: round::add_hi(self.hi, rhs.hi),
        }
    }
}

impl std::ops::Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: round::sub_lo(self.lo, rhs.hi),
            hi: round::sub_hi(self.hi, rhs.lo),
        }
    }
}

impl std::ops::Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let (l1, h1) = round::mul_bounds(self.lo, rhs.lo);
        let (l2, h2) = round::mul_bounds(self.lo, rhs.hi);
        let (l3, h3) = round::mul_bounds(self.hi, rhs.lo);
        let (l4, h4) = round::mul_bounds(self.hi, rhs.hi);
        Interval {
            lo: l1.min(l2).min(l3).min(l4),
            hi: h1.max(h2).max(h3).max(h4),
        }
    }
}

impl std::ops::Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.lo, self.hi).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (lo, hi) = <(f64, f64)>::deserialize(deserializer)?;
        Interval::try_new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// A fixed-dimension vector of intervals (a box).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalVector(Vec<Interval>);

impl IntervalVector {
    pub fn new(elems: Vec<Interval>) -> Self {
        Self(elems)
    }

    /// Degenerate box at a point.
    pub fn point(x: &[f64]) -> Self {
        Self(x.iter().map(|&v| Interval::point(v)).collect())
    }

    /// `n` copies of the same interval.
    pub fn splat(iv: Interval, n: usize) -> Self {
        Self(vec![iv; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.0
    }

    pub fn widths(&self) -> Vec<f64> {
        self.0.iter().map(|iv| iv.width()).collect()
    }

    pub fn mid(&self) -> Vec<f64> {
        self.0.iter().map(|iv| iv.mid()).collect()
    }

    pub fn lo(&self) -> Vec<f64> {
        self.0.iter().map(|iv| iv.lo()).collect()
    }

    pub fn hi(&self) -> Vec<f64> {
        self.0.iter().map(|iv| iv.hi()).collect()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.dim() == x.len() && self.0.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    pub fn subset_of(&self, other: &IntervalVector) -> bool {
        self.dim() == other.dim()
            && self.0.iter().zip(other.iter()).all(|(a, b)| a.subset_of(b))
    }

    pub fn intersect(&self, other: &IntervalVector) -> Option<IntervalVector> {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.iter())
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()
            .map(IntervalVector)
    }

    pub fn hull(&self, other: &IntervalVector) -> IntervalVector {
        assert_eq!(self.dim(), other.dim());
        IntervalVector(
            self.0
                .iter()
                .zip(other.iter())
                .map(|(a, b)| a.hull(b))
                .collect(),
        )
    }

    /// Componentwise translation by `-x`.
    pub fn sub_point(&self, x: &[f64]) -> IntervalVector {
        assert_eq!(self.dim(), x.len());
        IntervalVector(self.0.iter().zip(x).map(|(iv, &v)| iv.shift(-v)).collect())
    }

    pub fn scale(&self, s: f64) -> IntervalVector {
        IntervalVector(self.0.iter().map(|iv| iv.scale(s)).collect())
    }

    pub fn scale_interval(&self, s: Interval) -> IntervalVector {
        IntervalVector(self.0.iter().map(|&iv| iv * s).collect())
    }

    pub fn inflate(&self, rel: f64, abs: f64) -> IntervalVector {
        IntervalVector(self.0.iter().map(|iv| iv.inflate(rel, abs)).collect())
    }
}

impl std::ops::Index<usize> for IntervalVector {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for IntervalVector {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.0[i]
    }
}

impl std::ops::Add for &IntervalVector {
    type Output = IntervalVector;
    fn add(self, rhs: &IntervalVector) -> IntervalVector {
        assert_eq!(self.dim(), rhs.dim());
        IntervalVector(
            self.0
                .iter()
                .zip(rhs.iter())
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }
}

impl std::ops::Sub for &IntervalVector {
    type Output = IntervalVector;
    fn sub(self, rhs: &IntervalVector) -> IntervalVector {
        assert_eq!(self.dim(), rhs.dim());
        IntervalVector(
            self.0
                .iter()
                .zip(rhs.iter())
                .map(|(&a, &b)| a - b)
                .collect(),
        )
    }
}

impl FromIterator<Interval> for IntervalVector {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalVector(iter.into_iter().collect())
    }
}

/// A dense row-major matrix of intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Interval>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, iv: Interval) -> Self {
        Self {
            rows,
            cols,
            data: vec![iv; rows * cols],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, Interval::zero())
    }

    /// Point identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.get_mut(i, i) = Interval::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Interval) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Interval {
        self.data[r * self.cols + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut Interval {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Interval] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn subset_of(&self, other: &IntervalMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(a, b)| a.subset_of(b))
    }

    pub fn intersect(&self, other: &IntervalMatrix) -> Option<IntervalMatrix> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()?;
        Some(IntervalMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn matvec(&self, v: &IntervalVector) -> IntervalVector {
        assert_eq!(self.cols, v.dim());
        (0..self.rows)
            .map(|r| {
                let mut acc = Interval::zero();
                for c in 0..self.cols {
                    acc = acc + self.get(r, c) * v[c];
                }
                acc
            })
            .collect()
    }

    pub fn scale_interval(&self, s: Interval) -> IntervalMatrix {
        IntervalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&iv| iv * s).collect(),
        }
    }

    pub fn add(&self, other: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntervalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn widths(&self) -> Vec<f64> {
        self.data.iter().map(|iv| iv.width()).collect()
    }
}

/// Interval extension of the weighted norm `||x||_w = sqrt(sum (w_i x_i)^2)`.
///
/// The lower endpoint is never negative; on a degenerate zero box the result
/// is exactly `[0, 0]`.
pub fn weighted_norm_ext(a: &IntervalVector, w: &[f64]) -> Result<Interval, IntervalError> {
    if a.dim() != w.len() {
        return Err(IntervalError::DimensionMismatch(a.dim(), w.len()));
    }
    debug_assert!(w.iter().all(|&wi| wi > 0.0), "weights must be positive");
    let mut acc = Interval::zero();
    for (iv, &wi) in a.iter().zip(w) {
        acc = acc + iv.scale(wi).sq();
    }
    Ok(acc.sqrt())
}

/// Interval extension of the control monomial `u[alpha] = prod u_i^{alpha_i}`.
/// Even powers use the square rule rather than repeated multiplication.
pub fn monomial_ext(u: &IntervalVector, alpha: &[u32]) -> Result<Interval, IntervalError> {
    if u.dim() != alpha.len() {
        return Err(IntervalError::DimensionMismatch(u.dim(), alpha.len()));
    }
    let mut acc = Interval::one();
    for (iv, &a) in u.iter().zip(alpha) {
        if a > 0 {
            acc = acc * iv.powi(a);
        }
    }
    Ok(acc)
}

/// Point evaluation of the control monomial.
pub fn monomial_point(u: &[f64], alpha: &[u32]) -> f64 {
    debug_assert_eq!(u.len(), alpha.len());
    u.iter()
        .zip(alpha)
        .map(|(&ui, &a)| ui.powi(a as i32))
        .product()
}

/// Gradient of the control monomial at a point.
pub fn monomial_grad(u: &[f64], alpha: &[u32]) -> Vec<f64> {
    let m = u.len();
    let mut grad = vec![0.0; m];
    for l in 0..m {
        if alpha[l] == 0 {
            continue;
        }
        let mut g = alpha[l] as f64 * u[l].powi(alpha[l] as i32 - 1);
        for i in 0..m {
            if i != l {
                g *= u[i].powi(alpha[i] as i32);
            }
        }
        grad[l] = g;
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ulp_near(x: f64, target: f64, ulps: u32) -> bool {
        let mut lo = target;
        let mut hi = target;
        for _ in 0..ulps {
            lo = lo.next_down();
            hi = hi.next_up();
        }
        lo <= x && x <= hi
    }

    /// Asserts `result` encloses `[lo, hi]` with at most `ulps` of slack.
    fn assert_tight(result: Interval, lo: f64, hi: f64, ulps: u32) {
        assert!(
            result.lo() <= lo && result.hi() >= hi,
            "{result} does not enclose [{lo}, {hi}]"
        );
        assert!(
            ulp_near(result.lo(), lo, ulps) && ulp_near(result.hi(), hi, ulps),
            "{result} looser than {ulps} ulps around [{lo}, {hi}]"
        );
    }

    #[test]
    fn add_endpoint_sums() {
        let r = Interval::new(1.0, 2.0) + Interval::new(3.0, 4.0);
        assert_eq!(r, Interval::new(4.0, 6.0));
    }

    #[test]
    fn mul_endpoint_products() {
        let r = Interval::new(-1.0, 2.0) * Interval::new(3.0, 4.0);
        assert_eq!(r, Interval::new(-4.0, 8.0));
    }

    #[test]
    fn div_by_zero_interval_errors() {
        let err = Interval::new(1.0, 2.0)
            .checked_div(Interval::new(0.0, 1.0))
            .unwrap_err();
        assert_eq!(err, IntervalError::DivisionByZeroInterval);
    }

    #[test]
    fn intersections_and_hull() {
        let a = Interval::new(0.0, 2.0);
        let b = Interval::new(1.0, 3.0);
        assert_eq!(a.intersect(&b), Some(Interval::new(1.0, 2.0)));
        assert_eq!(
            Interval::new(0.0, 1.0).intersect(&Interval::new(2.0, 3.0)),
            None
        );
        assert_eq!(
            Interval::new(0.0, 1.0).hull(&Interval::new(2.0, 3.0)),
            Interval::new(0.0, 3.0)
        );
    }

    #[test]
    fn widths() {
        assert_eq!(Interval::new(1.0, 3.0).width(), 2.0);
        assert_eq!(Interval::point(0.7).width(), 0.0);
        let v = IntervalVector::new(vec![Interval::new(0.0, 1.0), Interval::new(-2.0, 2.0)]);
        assert_eq!(v.widths(), vec![1.0, 4.0]);
    }

    #[test]
    fn weighted_norm_zero_vector() {
        let v = IntervalVector::splat(Interval::zero(), 3);
        let n = weighted_norm_ext(&v, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(n, Interval::zero());
    }

    #[test]
    fn weighted_norm_mixed_signs() {
        // sq([-1,2]) = [0,4], sq([0,1]) = [0,1] -> sqrt([0,5])
        let v = IntervalVector::new(vec![Interval::new(-1.0, 2.0), Interval::new(0.0, 1.0)]);
        let n = weighted_norm_ext(&v, &[1.0, 1.0]).unwrap();
        assert_eq!(n.lo(), 0.0);
        assert_tight(n, 0.0, 5.0_f64.sqrt(), 2);
    }

    #[test]
    fn weighted_norm_point_argument() {
        let v = IntervalVector::point(&[1.0]);
        let n = weighted_norm_ext(&v, &[2.0]).unwrap();
        assert_tight(n, 2.0, 2.0, 1);
    }

    #[test]
    fn weighted_norm_dimension_mismatch() {
        let v = IntervalVector::point(&[1.0, 2.0]);
        assert!(matches!(
            weighted_norm_ext(&v, &[1.0]),
            Err(IntervalError::DimensionMismatch(2, 1))
        ));
    }

    #[test]
    fn monomial_even_power_rule() {
        let u = IntervalVector::new(vec![Interval::new(-1.0, 1.0)]);
        // even-power rule: [0,1], not the naive [-1,1]*[-1,1] = [-1,1]
        assert_eq!(monomial_ext(&u, &[2]).unwrap(), Interval::new(0.0, 1.0));
    }

    #[test]
    fn monomial_point_and_empty() {
        let u = IntervalVector::point(&[2.0, 3.0]);
        assert_eq!(monomial_ext(&u, &[1, 1]).unwrap(), Interval::new(6.0, 6.0));
        assert_eq!(monomial_ext(&u, &[0, 0]).unwrap(), Interval::one());
    }

    #[test]
    fn monomial_grads() {
        // d(u^2)/du at 3 = 6
        assert_eq!(monomial_grad(&[3.0], &[2]), vec![6.0]);
        // d(u1 * u2^2)/d(u1, u2) at (2, 3) = (9, 12)
        assert_eq!(monomial_grad(&[2.0, 3.0], &[1, 2]), vec![9.0, 12.0]);
        assert_eq!(monomial_point(&[2.0, 3.0], &[1, 2]), 18.0);
    }

    #[test]
    fn powi_odd_negative() {
        let r = Interval::new(-2.0, 1.0).powi(3);
        assert_tight(r, -8.0, 1.0, 3);
    }

    #[test]
    fn outward_rounding_encloses_exact_third() {
        // 1/3 is not representable; the quotient interval must straddle it
        let r = Interval::point(1.0)
            .checked_div(Interval::point(3.0))
            .unwrap();
        assert!(r.lo() <= 1.0 / 3.0 && r.hi() >= 1.0 / 3.0);
        assert!(r.width() <= f64::EPSILON);
    }

    #[test]
    fn matrix_vector_product() {
        let m = IntervalMatrix::from_fn(2, 2, |r, c| {
            if r == c {
                Interval::new(1.0, 2.0)
            } else {
                Interval::zero()
            }
        });
        let v = IntervalVector::new(vec![Interval::new(1.0, 1.0), Interval::new(-1.0, 1.0)]);
        let out = m.matvec(&v);
        assert_eq!(out[0], Interval::new(1.0, 2.0));
        assert_eq!(out[1], Interval::new(-2.0, 2.0));
    }

    #[test]
    fn serde_round_trip() {
        let iv = Interval::new(-1.5, 2.25);
        let s = serde_json::to_string(&iv).unwrap();
        assert_eq!(s, "[-1.5,2.25]");
        let back: Interval = serde_json::from_str(&s).unwrap();
        assert_eq!(back, iv);
        assert!(serde_json::from_str::<Interval>("[2.0,1.0]").is_err());
    }
}
