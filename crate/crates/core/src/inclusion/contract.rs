//! Contraction of enclosures against observed data and algebraic constraints.

use super::side::{CellRef, ConstraintSpec};
use super::InclusionError;
use crate::interval::{Interval, IntervalMatrix, IntervalVector};

/// Forward-backward contraction of a linear observation
/// `y = sum_t coeff_t * z_t` with known scalar coefficients.
///
/// Term 0 is contracted first against the sum of the remaining terms, then a
/// running residual is swept through the tail, mirroring the scheme used for
/// the dynamics constraint at a data sample. Terms with zero coefficient are
/// left unchanged. Every output is intersected with its input, so the result
/// is a subset even under outward rounding.
///
/// For a single-occurrence linear form this yields the per-term optimal
/// hulls: the output intervals are the smallest ones consistent with the
/// observation and the input enclosures.
pub(crate) fn contract_linear_observation(
    yv: Interval,
    terms: &mut [(f64, Interval)],
) -> Result<(), InclusionError> {
    if terms.is_empty() {
        return Ok(());
    }
    let empty = || InclusionError::inconsistent(None, "observation contradicts enclosures");
    let tail_sum = |terms: &[(f64, Interval)], from: usize| -> Interval {
        terms[from..]
            .iter()
            .fold(Interval::zero(), |acc, &(c, z)| acc + z.scale(c))
    };

    // head term: z_0 constrained by y minus the rest
    let (c0, z0) = terms[0];
    let c_head = if c0 != 0.0 {
        let rest = tail_sum(terms, 1);
        let implied = (yv - rest).div_scalar(c0).expect("nonzero coefficient");
        implied.intersect(&z0).ok_or_else(empty)?
    } else {
        z0
    };
    terms[0].1 = c_head;

    if terms.len() == 1 {
        return Ok(());
    }

    // residual available to the tail
    let mut residual = (yv - c_head.scale(c0))
        .intersect(&tail_sum(terms, 1))
        .ok_or_else(empty)?;

    for t in 1..terms.len() {
        let (ct, zt) = terms[t];
        let rest = tail_sum(terms, t + 1);
        if ct != 0.0 {
            let scaled = (residual - rest)
                .intersect(&zt.scale(ct))
                .ok_or_else(empty)?;
            let contracted = scaled
                .div_scalar(ct)
                .expect("nonzero coefficient")
                .intersect(&zt)
                .ok_or_else(empty)?;
            terms[t].1 = contracted;
        }
        let used = terms[t].1.scale(ct);
        residual = (residual - used).intersect(&rest).ok_or_else(empty)?;
    }
    Ok(())
}

/// Mutable views of the enclosure cells a constraint may contract.
pub struct ConstraintCells<'a> {
    pub f: Option<&'a mut IntervalVector>,
    pub g: Option<&'a mut IntervalMatrix>,
    pub jf: Option<&'a mut IntervalMatrix>,
    pub jg: Option<&'a mut Vec<IntervalMatrix>>,
}

/// Evaluation context for a constraint application: the state box plus,
/// when contracting at a data sample, the applied control and the observed
/// derivative.
pub struct ConstraintContext<'a> {
    pub x: &'a IntervalVector,
    pub u: Option<&'a [f64]>,
    pub xdot: Option<&'a [f64]>,
}

fn read_cell(
    cell: &CellRef,
    cells: &ConstraintCells<'_>,
    ctx: &ConstraintContext<'_>,
) -> Option<Interval> {
    match *cell {
        CellRef::FVal(k) => cells.f.as_ref().map(|f| f[k]),
        CellRef::GVal(p, k) => cells.g.as_ref().map(|g| g.get(p, k)),
        CellRef::JacF(k, l) => cells.jf.as_ref().map(|j| j.get(k, l)),
        CellRef::JacG(p, k, l) => cells.jg.as_ref().map(|j| j[p].get(k, l)),
        CellRef::State(i) => Some(ctx.x[i]),
        CellRef::Control(i) => ctx.u.map(|u| Interval::point(u[i])),
        CellRef::Deriv(i) => ctx.xdot.map(|d| Interval::point(d[i])),
    }
}

fn write_cell(cell: &CellRef, value: Interval, cells: &mut ConstraintCells<'_>) {
    match *cell {
        CellRef::FVal(k) => {
            if let Some(f) = cells.f.as_mut() {
                f[k] = value;
            }
        }
        CellRef::GVal(p, k) => {
            if let Some(g) = cells.g.as_mut() {
                *g.get_mut(p, k) = value;
            }
        }
        CellRef::JacF(k, l) => {
            if let Some(j) = cells.jf.as_mut() {
                *j.get_mut(k, l) = value;
            }
        }
        CellRef::JacG(p, k, l) => {
            if let Some(j) = cells.jg.as_mut() {
                *j[p].get_mut(k, l) = value;
            }
        }
        CellRef::State(_) | CellRef::Control(_) | CellRef::Deriv(_) => {}
    }
}

/// Applies every applicable constraint with HC4-revise, round-robin until a
/// fixpoint or a sweep cap. Cells only ever narrow; context slots are read
/// back untouched. Returns whether anything changed.
pub fn apply_constraints(
    cells: &mut ConstraintCells<'_>,
    constraints: &[ConstraintSpec],
    ctx: &ConstraintContext<'_>,
) -> Result<bool, InclusionError> {
    const MAX_SWEEPS: usize = 10;
    let have_jac = cells.jf.is_some() || cells.jg.is_some();
    let mut any_change = false;
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for (ci, spec) in constraints.iter().enumerate() {
            if !spec.applicable(ctx.u.is_some(), ctx.xdot.is_some(), have_jac) {
                continue;
            }
            if spec.touches_jacobian() && !have_jac {
                continue;
            }
            let mut slots: Vec<Interval> = Vec::with_capacity(spec.bindings.len());
            let mut ok = true;
            for b in &spec.bindings {
                match read_cell(b, cells, ctx) {
                    Some(v) => slots.push(v),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let before = slots.clone();
            match spec.compiled().hc4_revise(&mut slots, spec.target()) {
                Ok(_) => {
                    for (b, (new, old)) in spec.bindings.iter().zip(slots.iter().zip(&before)) {
                        if new != old {
                            write_cell(b, *new, cells);
                            changed = true;
                        }
                    }
                }
                Err(crate::expr::ExprError::EmptyDomain(_)) => {
                    return Err(InclusionError::EmptyAfterContraction { constraint: ci });
                }
                Err(e) => {
                    return Err(InclusionError::Data(format!("constraint {ci}: {e}")));
                }
            }
        }
        if !changed {
            break;
        }
        any_change = true;
    }
    Ok(any_change)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::inclusion::side::Relation;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn single_control_term() {
        // xdot = 3, u-monomial = 1, F = [0,2], G = [0,4]
        let mut terms = [(1.0, iv(0.0, 2.0)), (1.0, iv(0.0, 4.0))];
        contract_linear_observation(Interval::point(3.0), &mut terms).unwrap();
        assert_eq!(terms[0].1, iv(0.0, 2.0));
        assert_eq!(terms[1].1, iv(1.0, 3.0));
    }

    #[test]
    fn two_control_terms() {
        // xdot = 2, both monomials equal 1, F = [0,1], G1 = G2 = [0,3]
        let mut terms = [
            (1.0, iv(0.0, 1.0)),
            (1.0, iv(0.0, 3.0)),
            (1.0, iv(0.0, 3.0)),
        ];
        contract_linear_observation(Interval::point(2.0), &mut terms).unwrap();
        assert_eq!(terms[0].1, iv(0.0, 1.0));
        assert_eq!(terms[1].1, iv(0.0, 2.0));
        assert_eq!(terms[2].1, iv(0.0, 2.0));
    }

    #[test]
    fn vanishing_controls_pin_autonomous_part() {
        // all monomials zero: F must meet the observed derivative exactly
        let mut terms = [(1.0, iv(-1.0, 2.0)), (0.0, iv(-5.0, 5.0))];
        contract_linear_observation(Interval::point(1.5), &mut terms).unwrap();
        assert_eq!(terms[0].1, iv(1.5, 1.5));
        assert_eq!(terms[1].1, iv(-5.0, 5.0));
    }

    #[test]
    fn inconsistent_observation_detected() {
        let mut terms = [(1.0, iv(0.0, 1.0)), (1.0, iv(0.0, 1.0))];
        let err = contract_linear_observation(Interval::point(5.0), &mut terms);
        assert!(err.is_err());
    }

    #[test]
    fn outputs_always_subsets() {
        let mut state = 0xdeadbeefu64;
        let mut rnd = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 6.0 - 3.0
        };
        for _ in 0..2000 {
            let mk = |a: f64, b: f64| iv(a.min(b), a.max(b));
            let f = mk(rnd(), rnd());
            let g1 = mk(rnd(), rnd());
            let g2 = mk(rnd(), rnd());
            let (c1, c2) = (rnd(), rnd());
            // consistent observation from a point inside the boxes
            let pick = |z: Interval| z.lo() + 0.3 * z.width();
            let y = pick(f) + c1 * pick(g1) + c2 * pick(g2);
            let mut terms = [(1.0, f), (c1, g1), (c2, g2)];
            contract_linear_observation(Interval::point(y), &mut terms).unwrap();
            assert!(terms[0].1.subset_of(&f));
            assert!(terms[1].1.subset_of(&g1));
            assert!(terms[2].1.subset_of(&g2));
            // the generating point must survive
            assert!(terms[0].1.contains(pick(f)));
            assert!(terms[1].1.contains(pick(g1)));
            assert!(terms[2].1.contains(pick(g2)));
        }
    }

    #[test]
    fn constraint_clips_f_component() {
        // f_1 >= 0 applied to CF_1 = [-1, 2]
        let spec = ConstraintSpec::new(Expr::var(0), vec![CellRef::FVal(0)], Relation::NonNeg);
        let mut f = IntervalVector::new(vec![iv(-1.0, 2.0)]);
        let x = IntervalVector::point(&[0.0]);
        let mut cells = ConstraintCells {
            f: Some(&mut f),
            g: None,
            jf: None,
            jg: None,
        };
        let ctx = ConstraintContext {
            x: &x,
            u: None,
            xdot: None,
        };
        let changed = apply_constraints(&mut cells, &[spec], &ctx).unwrap();
        assert!(changed);
        assert_eq!(f[0], iv(0.0, 2.0));
    }

    #[test]
    fn constraint_needing_control_skipped_without_context() {
        let spec = ConstraintSpec::new(
            Expr::var(0).mul(Expr::var(1)),
            vec![CellRef::FVal(0), CellRef::Control(0)],
            Relation::NonNeg,
        );
        let mut f = IntervalVector::new(vec![iv(-1.0, 2.0)]);
        let x = IntervalVector::point(&[0.0]);
        let mut cells = ConstraintCells {
            f: Some(&mut f),
            g: None,
            jf: None,
            jg: None,
        };
        let ctx = ConstraintContext {
            x: &x,
            u: None,
            xdot: None,
        };
        let changed = apply_constraints(&mut cells, &[spec], &ctx).unwrap();
        assert!(!changed);
        assert_eq!(f[0], iv(-1.0, 2.0));
    }
}
