//! Side information: Lipschitz bounds, partial dynamics knowledge and
//! algebraic constraints.

use super::InclusionError;
use crate::expr::{CompiledExpr, Expr};
use crate::interval::{Interval, IntervalMatrix, IntervalVector};
use serde::{Deserialize, Serialize};

/// A known vector-valued function of the state together with its Jacobian,
/// both given as expressions so that sound interval extensions come for free.
#[derive(Clone, Debug)]
pub struct KnownFn {
    comps: Vec<Expr>,
    compiled: Vec<CompiledExpr>,
    compiled_jac: Vec<Vec<CompiledExpr>>,
}

impl KnownFn {
    /// `comps[k]` is component k as an expression in state slots; `jac[k][l]`
    /// is its partial derivative with respect to state l.
    pub fn new(comps: Vec<Expr>, jac: Vec<Vec<Expr>>) -> Self {
        assert_eq!(comps.len(), jac.len());
        let compiled = comps.iter().map(Expr::compile).collect();
        let compiled_jac = jac
            .iter()
            .map(|row| row.iter().map(Expr::compile).collect())
            .collect();
        Self {
            comps,
            compiled,
            compiled_jac,
        }
    }

    /// Constant vector function (zero Jacobian).
    pub fn constant(values: &[f64]) -> Self {
        let n = values.len();
        let comps = values.iter().map(|&v| Expr::constant(v)).collect();
        let jac = (0..n)
            .map(|_| (0..n).map(|_| Expr::constant(0.0)).collect())
            .collect();
        Self::new(comps, jac)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn eval_point(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|e| e.eval_point(x)).collect()
    }

    pub fn eval_box(&self, x: &IntervalVector) -> Result<IntervalVector, InclusionError> {
        self.compiled
            .iter()
            .map(|c| {
                c.eval(x.as_slice())
                    .map_err(|e| InclusionError::Data(format!("known-term extension: {e}")))
            })
            .collect()
    }

    pub fn jac_box(&self, x: &IntervalVector) -> Result<IntervalMatrix, InclusionError> {
        let n = self.dim();
        let mut data = Vec::with_capacity(n * x.dim());
        for row in &self.compiled_jac {
            assert_eq!(row.len(), x.dim());
            for c in row {
                data.push(
                    c.eval(x.as_slice())
                        .map_err(|e| InclusionError::Data(format!("known-term jacobian: {e}")))?,
                );
            }
        }
        Ok(IntervalMatrix::new(n, x.dim(), data))
    }
}

/// Factored dynamics knowledge: the vector field splits into elementwise
/// products of known functions and unknown Lipschitz cofactors.
#[derive(Clone, Debug)]
pub struct KnownTerms {
    /// Known factors multiplying the autonomous unknowns, one per factor pair.
    pub f_factors: Vec<KnownFn>,
    /// Known factors per control monomial: `g_factors[p][s]`.
    pub g_factors: Vec<Vec<KnownFn>>,
    /// Lipschitz bounds of the unknown autonomous cofactors, `lip_f[s][k]`.
    pub lip_f: Vec<Vec<f64>>,
    /// Lipschitz bounds of the unknown control cofactors, `lip_g[p][s][k]`.
    pub lip_g: Vec<Vec<Vec<f64>>>,
}

impl KnownTerms {
    pub fn factor_count(&self) -> usize {
        self.f_factors.len()
    }
}

/// Which enclosure cell or context value a constraint slot is bound to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellRef {
    /// Enclosure of the autonomous field component `k`.
    FVal(usize),
    /// Enclosure of control-field component (monomial `p`, component `k`).
    GVal(usize, usize),
    /// Entry (k, l) of the autonomous Jacobian enclosure.
    JacF(usize, usize),
    /// Entry (k, l) of the Jacobian enclosure for monomial `p`.
    JacG(usize, usize, usize),
    /// State component (context, not contracted).
    State(usize),
    /// Control component (context, only available at data samples).
    Control(usize),
    /// Observed state derivative (context, only available at data samples).
    Deriv(usize),
}

/// Direction of an algebraic constraint on its expression value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// expression >= 0
    NonNeg,
    /// expression = 0
    Zero,
}

/// An algebraic side constraint: a forward-evaluable expression over
/// enclosure cells and context values, contracted with HC4-revise.
#[derive(Clone, Debug)]
pub struct ConstraintSpec {
    pub expr: Expr,
    pub bindings: Vec<CellRef>,
    pub relation: Relation,
    compiled: CompiledExpr,
}

impl ConstraintSpec {
    pub fn new(expr: Expr, bindings: Vec<CellRef>, relation: Relation) -> Self {
        assert!(
            expr.arity() <= bindings.len(),
            "constraint references unbound slots"
        );
        let compiled = expr.compile();
        Self {
            expr,
            bindings,
            relation,
            compiled,
        }
    }

    pub(crate) fn compiled(&self) -> &CompiledExpr {
        &self.compiled
    }

    pub fn target(&self) -> Interval {
        match self.relation {
            Relation::NonNeg => Interval::new(0.0, f64::INFINITY),
            Relation::Zero => Interval::zero(),
        }
    }

    /// True when the constraint only references cells and context available
    /// in the given scope.
    pub fn applicable(&self, have_u: bool, have_xdot: bool, have_jac: bool) -> bool {
        self.bindings.iter().all(|b| match b {
            CellRef::FVal(_) | CellRef::GVal(_, _) | CellRef::State(_) => true,
            CellRef::Control(_) => have_u,
            CellRef::Deriv(_) => have_xdot,
            CellRef::JacF(_, _) | CellRef::JacG(_, _, _) => have_jac,
        })
    }

    /// True when the constraint touches any Jacobian cell.
    pub fn touches_jacobian(&self) -> bool {
        self.bindings
            .iter()
            .any(|b| matches!(b, CellRef::JacF(_, _) | CellRef::JacG(_, _, _)))
    }
}

/// How entrywise Jacobian bounds derive from the weighted-norm Lipschitz
/// constants. The entry for row k, column l is `[-1,1] * lip_k * w`, where
/// `w` is the column weight by default (the natural reading of the weighted
/// norm); the row-weight alternative is kept behind this switch. With
/// uniform weights the two coincide.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum JacWeightMode {
    #[default]
    ColumnWeight,
    RowWeight,
}

/// Declared side information for one control problem.
#[derive(Clone, Debug)]
pub struct SideInfo {
    /// Weighted-norm weights, one per state dimension, all positive.
    pub weights: Vec<f64>,
    /// Control monomial multi-indices, one per control term (d of them).
    pub exponents: Vec<Vec<u32>>,
    /// Global magnitude bound M on every unknown component over the domain.
    pub bound: f64,
    /// Lipschitz bounds of the autonomous components, one per state dim.
    pub lip_f: Vec<f64>,
    /// Lipschitz bounds of the control components, `lip_g[p][k]`.
    pub lip_g: Vec<Vec<f64>>,
    pub known_terms: Option<KnownTerms>,
    pub constraints: Vec<ConstraintSpec>,
    pub jac_weight_mode: JacWeightMode,
    /// Half-width of the observation slab: a derivative sample `y` is
    /// treated as `[y - e, y + e]` with `e = pad * (1 + |y|)`. Zero by
    /// default (samples taken as exact); harness environments set a tiny
    /// pad to absorb the floating-point rounding of the sample itself.
    pub observation_pad: f64,
}

impl SideInfo {
    /// Lipschitz-only side information.
    pub fn lipschitz(
        weights: Vec<f64>,
        exponents: Vec<Vec<u32>>,
        bound: f64,
        lip_f: Vec<f64>,
        lip_g: Vec<Vec<f64>>,
    ) -> Self {
        Self {
            weights,
            exponents,
            bound,
            lip_f,
            lip_g,
            known_terms: None,
            constraints: Vec::new(),
            jac_weight_mode: JacWeightMode::default(),
            observation_pad: 0.0,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn control_dim(&self) -> usize {
        self.exponents.first().map_or(0, Vec::len)
    }

    pub fn term_count(&self) -> usize {
        self.exponents.len()
    }

    pub fn validate(&self) -> Result<(), InclusionError> {
        let n = self.state_dim();
        let d = self.term_count();
        let bad = |msg: &str| Err(InclusionError::Data(msg.to_string()));
        if n == 0 {
            return bad("empty state dimension");
        }
        if !(self.bound.is_finite() && self.bound > 0.0) {
            return bad("global bound must be finite and positive");
        }
        if self.weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return bad("weights must be finite and positive");
        }
        if !(self.observation_pad.is_finite() && self.observation_pad >= 0.0) {
            return bad("observation pad must be finite and nonnegative");
        }
        if self.lip_f.len() != n || self.lip_f.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return bad("autonomous Lipschitz bounds must be finite and positive");
        }
        if self.lip_g.len() != d {
            return bad("one Lipschitz bound row per control term required");
        }
        for row in &self.lip_g {
            if row.len() != n || row.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
                return bad("control Lipschitz bounds must be finite and positive");
            }
        }
        let m = self.control_dim();
        for e in &self.exponents {
            if e.len() != m {
                return bad("all exponent multi-indices must share the control dimension");
            }
        }
        for i in 0..d {
            for j in (i + 1)..d {
                if self.exponents[i] == self.exponents[j] {
                    return bad("exponent multi-indices must be distinct");
                }
            }
        }
        if let Some(kt) = &self.known_terms {
            let s_count = kt.factor_count();
            if s_count == 0 {
                return bad("known terms require at least one factor pair");
            }
            if kt.f_factors.iter().any(|f| f.dim() != n) {
                return bad("known autonomous factors must have state dimension");
            }
            if kt.g_factors.len() != d {
                return bad("one known factor list per control term required");
            }
            if kt
                .g_factors
                .iter()
                .any(|fs| fs.len() != s_count || fs.iter().any(|f| f.dim() != n))
            {
                return bad("known control factors must be S x n");
            }
            if kt.lip_f.len() != s_count || kt.lip_f.iter().any(|r| r.len() != n) {
                return bad("cofactor Lipschitz bounds must be S x n");
            }
            if kt.lip_g.len() != d
                || kt
                    .lip_g
                    .iter()
                    .any(|ps| ps.len() != s_count || ps.iter().any(|r| r.len() != n))
            {
                return bad("control cofactor Lipschitz bounds must be d x S x n");
            }
            let pos = |v: &f64| v.is_finite() && *v > 0.0;
            if kt.lip_f.iter().flatten().any(|l| !pos(l))
                || kt.lip_g.iter().flatten().flatten().any(|l| !pos(l))
            {
                return bad("cofactor Lipschitz bounds must be finite and positive");
            }
        }
        Ok(())
    }
}
