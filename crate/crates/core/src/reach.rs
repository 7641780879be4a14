//! Validated one-step reachability for the data-driven differential
//! inclusion: a Picard-certified rough enclosure of the flow over one
//! sampling interval, an order-2 interval Taylor step for the reachable box
//! at the next sample time, tubes under the full control set, and the
//! width-based suboptimality certificate.

use crate::inclusion::{
    apply_constraints, ConstraintCells, ConstraintContext, DiffInclusion, InclusionError,
};
use crate::interval::{monomial_ext, Interval, IntervalMatrix, IntervalVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReachError {
    #[error("rough enclosure failed to validate within {iterations} iterations (time step too large for the current enclosure widths)")]
    EnclosureFailure { iterations: usize },
    #[error("initial set is not inside the state domain")]
    StateOutsideDomain,
    #[error("reachable set left the state domain entirely")]
    LeftDomain,
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<ReachError>,
    },
    #[error(transparent)]
    Inclusion(#[from] InclusionError),
}

impl From<crate::interval::IntervalError> for ReachError {
    fn from(e: crate::interval::IntervalError) -> Self {
        ReachError::Inclusion(InclusionError::Interval(e))
    }
}

/// One validated reachability step.
#[derive(Clone, Debug)]
pub struct ReachStep {
    /// Box containing every reachable state at the next sample time.
    pub next: IntervalVector,
    /// Rough enclosure of the whole flow over the step.
    pub rough: IntervalVector,
    pub jac_f: IntervalMatrix,
    pub jac_g: Vec<IntervalMatrix>,
    pub dt: f64,
    /// Set when `next` had to be clipped to the state domain.
    pub clipped: bool,
    /// Set when the Taylor correction pushed `next` beyond the rough box.
    pub beyond_rough: bool,
}

fn jac_weight(di: &DiffInclusion, k: usize, l: usize) -> f64 {
    match di.side.jac_weight_mode {
        crate::inclusion::JacWeightMode::ColumnWeight => di.side.weights[l],
        crate::inclusion::JacWeightMode::RowWeight => di.side.weights[k],
    }
}

/// Entrywise enclosures of the Jacobians of the unknown fields over the box
/// `p`. Without partial knowledge these are the constant Lipschitz boxes;
/// with known terms the factored product rule is used and intersected with
/// the Lipschitz boxes. Declared Jacobian constraints contract the result.
pub fn jacobian_enclosures(
    di: &DiffInclusion,
    p: &IntervalVector,
    u: &IntervalVector,
) -> Result<(IntervalMatrix, Vec<IntervalMatrix>), ReachError> {
    let n = di.state_dim();
    let d = di.side.term_count();
    let mut jf = IntervalMatrix::from_fn(n, n, |k, l| {
        Interval::symmetric(di.side.lip_f[k] * jac_weight(di, k, l))
    });
    let mut jg: Vec<IntervalMatrix> = (0..d)
        .map(|pi| {
            IntervalMatrix::from_fn(n, n, |k, l| {
                Interval::symmetric(di.side.lip_g[pi][k] * jac_weight(di, k, l))
            })
        })
        .collect();

    if let Some(kt) = &di.side.known_terms {
        let fac = di
            .factor_enclosures(p)?
            .expect("factor enclosures present when known terms declared");
        let mut jf_fac = IntervalMatrix::zeros(n, n);
        for (s, factor) in kt.f_factors.iter().enumerate() {
            let known_val = factor.eval_box(p)?;
            let known_jac = factor.jac_box(p)?;
            for k in 0..n {
                for l in 0..n {
                    let cof_jac = Interval::symmetric(kt.lip_f[s][k] * jac_weight(di, k, l));
                    let term =
                        known_jac.get(k, l) * fac.f[s][k] + cof_jac * known_val[k];
                    *jf_fac.get_mut(k, l) = jf_fac.get(k, l) + term;
                }
            }
        }
        jf = jf.intersect(&jf_fac).ok_or_else(|| {
            InclusionError::inconsistent(None, "factored Jacobian disagrees with Lipschitz box")
        })?;
        for pi in 0..d {
            let mut jg_fac = IntervalMatrix::zeros(n, n);
            for (s, factor) in kt.g_factors[pi].iter().enumerate() {
                let known_val = factor.eval_box(p)?;
                let known_jac = factor.jac_box(p)?;
                for k in 0..n {
                    for l in 0..n {
                        let cof_jac =
                            Interval::symmetric(kt.lip_g[pi][s][k] * jac_weight(di, k, l));
                        let term =
                            known_jac.get(k, l) * fac.g[pi][s][k] + cof_jac * known_val[k];
                        *jg_fac.get_mut(k, l) = jg_fac.get(k, l) + term;
                    }
                }
            }
            jg[pi] = jg[pi].intersect(&jg_fac).ok_or_else(|| {
                InclusionError::inconsistent(None, "factored Jacobian disagrees with Lipschitz box")
            })?;
        }
    }

    let has_jac_constraints = di.side.constraints.iter().any(|c| c.touches_jacobian());
    if has_jac_constraints {
        let (mut f, mut g) = di.value_enclosures(p)?;
        let u_point: Option<Vec<f64>> = if u.iter().all(Interval::is_point) {
            Some(u.mid())
        } else {
            None
        };
        let mut cells = ConstraintCells {
            f: Some(&mut f),
            g: Some(&mut g),
            jf: Some(&mut jf),
            jg: Some(&mut jg),
        };
        let ctx = ConstraintContext {
            x: p,
            u: u_point.as_deref(),
            xdot: None,
        };
        apply_constraints(&mut cells, &di.side.constraints, &ctx)
            .map_err(ReachError::Inclusion)?;
    }
    Ok((jf, jg))
}

const PICARD_MAX_ITERS: usize = 30;
const PICARD_INFLATE_REL: f64 = 0.05;
const PICARD_INFLATE_ABS: f64 = 1e-9;
const POLISH_MAX_ITERS: usize = 30;
const POLISH_REL_TOL: f64 = 1e-12;

/// A rough enclosure of the flow over `[0, dt]`: a box `P` inside the state
/// domain with `R + [0, dt] h(P, u)` contained in `P`, found by Picard
/// iteration with epsilon-inflation and polished towards the fixpoint so the
/// result does not depend on the inflation path.
pub fn rough_enclosure(
    di: &DiffInclusion,
    r: &IntervalVector,
    u: &IntervalVector,
    dt: f64,
) -> Result<IntervalVector, ReachError> {
    if !r.subset_of(&di.x_dom) {
        return Err(ReachError::StateOutsideDomain);
    }
    let span = Interval::new(0.0, dt);
    let step = |p: &IntervalVector| -> Result<IntervalVector, ReachError> {
        let h = di.eval(p, u)?;
        Ok(r + &h.scale_interval(span))
    };
    let clip = |v: IntervalVector| -> IntervalVector {
        // nonempty: the candidate always contains R, which is inside the domain
        v.intersect(&di.x_dom).expect("candidate lost the initial set")
    };

    let mut p = clip(step(r)?);
    for _ in 0..PICARD_MAX_ITERS {
        let q = step(&p)?;
        if q.subset_of(&p) {
            // contract towards the fixpoint; each iterate stays validated
            let mut cur = q;
            for _ in 0..POLISH_MAX_ITERS {
                let nxt = step(&cur)?;
                debug_assert!(nxt.subset_of(&cur));
                let max_rel = cur
                    .widths()
                    .iter()
                    .zip(nxt.widths())
                    .map(|(&o, nw)| if o > 0.0 { (o - nw) / o } else { 0.0 })
                    .fold(0.0, f64::max);
                cur = nxt;
                if max_rel < POLISH_REL_TOL {
                    break;
                }
            }
            return Ok(cur);
        }
        p = clip(q.inflate(PICARD_INFLATE_REL, PICARD_INFLATE_ABS));
    }
    Err(ReachError::EnclosureFailure {
        iterations: PICARD_MAX_ITERS,
    })
}

/// One validated step: order-2 interval Taylor advance of the reachable box.
pub fn reach_step(
    di: &DiffInclusion,
    r: &IntervalVector,
    u: &IntervalVector,
    dt: f64,
) -> Result<ReachStep, ReachError> {
    let rough = rough_enclosure(di, r, u, dt)?;
    let (jac_f, jac_g) = jacobian_enclosures(di, &rough, u)?;

    let h_r = di.eval(r, u)?;
    let h_p = di.eval(&rough, u)?;

    let mut jmix = jac_f.clone();
    for (p_idx, alpha) in di.side.exponents.iter().enumerate() {
        let mono = monomial_ext(u, alpha)?;
        jmix = jmix.add(&jac_g[p_idx].scale_interval(mono));
    }
    let dt_iv = Interval::point(dt);
    let half_dt2 = (dt_iv * dt_iv).scale(0.5);
    let second = jmix.matvec(&h_p).scale_interval(half_dt2);
    let raw = &(r + &h_r.scale(dt)) + &second;

    let beyond_rough = !raw.subset_of(&rough);
    let next = raw.intersect(&di.x_dom).ok_or(ReachError::LeftDomain)?;
    let clipped = next != raw;
    Ok(ReachStep {
        next,
        rough,
        jac_f,
        jac_g,
        dt,
        clipped,
        beyond_rough,
    })
}

/// Reachable boxes over `steps + 1` sample times under every admissible
/// control in `u_set` at every stage (the tube feeding the suboptimality
/// certificate). Errors report the step index at which validation failed.
pub fn reach_over_controls(
    di: &DiffInclusion,
    r: &IntervalVector,
    u_set: &IntervalVector,
    dt: f64,
    steps: usize,
) -> Result<Vec<IntervalVector>, ReachError> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut cur = r.clone();
    for k in 0..=steps {
        let step = reach_step(di, &cur, u_set, dt).map_err(|e| ReachError::AtStep {
            step: k,
            source: Box::new(e),
        })?;
        cur = step.next.clone();
        out.push(step.next);
    }
    Ok(out)
}

/// Suboptimality certificate: with `widths[q]` the width vector of the
/// reachable box at sample `q+1` (the last entry being the horizon end), the
/// cost gap against the known-dynamics optimum is at most
/// `lc * (||wd(last)||_2 + sum over earlier boxes of 2 ||wd(.)||_2)`.
pub fn suboptimality_bound(widths: &[Vec<f64>], lc: f64) -> f64 {
    assert!(lc >= 0.0, "cost Lipschitz constant must be nonnegative");
    let norm2 = |w: &Vec<f64>| w.iter().map(|v| v * v).sum::<f64>().sqrt();
    match widths.split_last() {
        None => 0.0,
        Some((last, mids)) => {
            let mid_sum: f64 = mids.iter().map(|w| 2.0 * norm2(w)).sum();
            lc * (norm2(last) + mid_sum)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusion::{EnvelopeRecord, EnvelopeSet, SideInfo};

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    /// Scalar autonomous inclusion with h pinned to `value` everywhere
    /// (tiny Lipschitz bounds), domain [-5, 5].
    fn constant_field(value: Interval) -> DiffInclusion {
        let side = SideInfo::lipschitz(vec![1.0], vec![], 1e6, vec![1e-12], vec![]);
        let records = vec![EnvelopeRecord {
            x: vec![0.0],
            cf: IntervalVector::new(vec![value]),
            cg: IntervalMatrix::new(0, 1, vec![]),
        }];
        DiffInclusion {
            envelopes: EnvelopeSet::from_records(1, 0, records),
            side,
            x_dom: IntervalVector::new(vec![iv(-5.0, 5.0)]),
            u_dom: IntervalVector::new(vec![]),
        }
    }

    fn no_controls() -> IntervalVector {
        IntervalVector::new(vec![])
    }

    #[test]
    fn rough_enclosure_state_independent_band() {
        let di = constant_field(iv(-1.0, 1.0));
        let r = IntervalVector::point(&[0.0]);
        let p = rough_enclosure(&di, &r, &no_controls(), 0.1).unwrap();
        // fixpoint condition: R + [0, 0.1] * [-1,1] = [-0.1, 0.1] within P
        assert!(p[0].lo() <= -0.1 + 1e-9 && p[0].hi() >= 0.1 - 1e-9);
        assert!(p[0].lo() >= -0.13 && p[0].hi() <= 0.13);
    }

    #[test]
    fn rough_enclosure_zero_step_is_identity() {
        let di = constant_field(iv(-1.0, 1.0));
        let r = IntervalVector::new(vec![iv(-0.25, 0.5)]);
        let p = rough_enclosure(&di, &r, &no_controls(), 0.0).unwrap();
        assert_eq!(p, r);
    }

    #[test]
    fn rough_enclosure_fails_when_inflation_exits_domain() {
        // huge field bound and a step long enough that the flow enclosure
        // cannot be certified inside the domain
        let di = constant_field(iv(-100.0, 100.0));
        let r = IntervalVector::point(&[0.0]);
        let err = rough_enclosure(&di, &r, &no_controls(), 1.0);
        assert!(matches!(err, Err(ReachError::EnclosureFailure { .. })));
    }

    #[test]
    fn reach_step_point_advance() {
        // h = [1,1], negligible Lipschitz: pure Euler advance of a point
        let di = constant_field(iv(1.0, 1.0));
        let r = IntervalVector::point(&[0.0]);
        let step = reach_step(&di, &r, &no_controls(), 0.1).unwrap();
        assert!((step.next[0].lo() - 0.1).abs() < 1e-9);
        assert!((step.next[0].hi() - 0.1).abs() < 1e-9);
        assert!(step.next[0].width() < 1e-10);
        assert!(!step.clipped);
    }

    #[test]
    fn reach_step_symmetric_band() {
        let di = constant_field(iv(-1.0, 1.0));
        let r = IntervalVector::point(&[0.0]);
        let step = reach_step(&di, &r, &no_controls(), 0.1).unwrap();
        // first-order term [-0.1, 0.1]; second-order vanishes with tiny lip
        assert!((step.next[0].lo() + 0.1).abs() < 1e-9);
        assert!((step.next[0].hi() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn control_point_consistency() {
        // d = 1 affine control, g pinned to [1,1]: interval u equal to a
        // point must reproduce the point-control step
        let side = SideInfo::lipschitz(
            vec![1.0],
            vec![vec![1]],
            1e6,
            vec![1e-12],
            vec![vec![1e-12]],
        );
        let records = vec![EnvelopeRecord {
            x: vec![0.0],
            cf: IntervalVector::new(vec![iv(0.0, 0.0)]),
            cg: IntervalMatrix::new(1, 1, vec![iv(1.0, 1.0)]),
        }];
        let di = DiffInclusion {
            envelopes: EnvelopeSet::from_records(1, 1, records),
            side,
            x_dom: IntervalVector::new(vec![iv(-5.0, 5.0)]),
            u_dom: IntervalVector::new(vec![iv(-2.0, 2.0)]),
        };
        let r = IntervalVector::point(&[0.1]);
        let u = IntervalVector::point(&[0.5]);
        let a = reach_step(&di, &r, &u, 0.05).unwrap();
        let tube = reach_over_controls(&di, &r, &u, 0.05, 0).unwrap();
        assert_eq!(tube.len(), 1);
        assert_eq!(tube[0], a.next);
    }

    #[test]
    fn expansive_system_widths_grow() {
        // truth xdot = x over [-5,5]: data-built inclusion, widths of the
        // control-set tube must be non-decreasing step over step
        let side = SideInfo::lipschitz(vec![1.0], vec![], 20.0, vec![1.1], vec![]);
        let mut data = crate::inclusion::Dataset::new();
        for (i, &x) in [-1.0, -0.5, 0.0, 0.5, 1.0].iter().enumerate() {
            data.push(
                i as f64 * 0.1,
                crate::inclusion::DataPoint::new(vec![x], vec![x], vec![]),
            )
            .unwrap();
        }
        let di = DiffInclusion::from_dataset(
            &data,
            side,
            IntervalVector::new(vec![iv(-5.0, 5.0)]),
            IntervalVector::new(vec![]),
        )
        .unwrap();
        let r = IntervalVector::new(vec![iv(0.4, 0.6)]);
        let tube = reach_over_controls(&di, &r, &no_controls(), 0.02, 4).unwrap();
        let mut prev = 0.0;
        for boxk in &tube {
            let w = boxk[0].width();
            assert!(w >= prev - 1e-12, "tube width decreased");
            prev = w;
        }
    }

    #[test]
    fn jacobian_plain_lipschitz_box() {
        let side = SideInfo::lipschitz(vec![1.0], vec![], 1e6, vec![2.0], vec![]);
        let records = vec![EnvelopeRecord {
            x: vec![0.0],
            cf: IntervalVector::new(vec![iv(0.0, 0.0)]),
            cg: IntervalMatrix::new(0, 1, vec![]),
        }];
        let di = DiffInclusion {
            envelopes: EnvelopeSet::from_records(1, 0, records),
            side,
            x_dom: IntervalVector::new(vec![iv(-5.0, 5.0)]),
            u_dom: IntervalVector::new(vec![]),
        };
        let p = IntervalVector::point(&[0.0]);
        let (jf, _) = jacobian_enclosures(&di, &p, &no_controls()).unwrap();
        assert_eq!(jf.get(0, 0), iv(-2.0, 2.0));
    }

    #[test]
    fn jacobian_weight_placement() {
        // weights (2, 3), lip (1, 1): row k entries are [-w_l, w_l] with the
        // default column-weight mode
        let mut side = SideInfo::lipschitz(
            vec![2.0, 3.0],
            vec![],
            1e6,
            vec![1.0, 1.0],
            vec![],
        );
        let records = vec![EnvelopeRecord {
            x: vec![0.0, 0.0],
            cf: IntervalVector::splat(Interval::zero(), 2),
            cg: IntervalMatrix::new(0, 2, vec![]),
        }];
        let mk = |side: &SideInfo| DiffInclusion {
            envelopes: EnvelopeSet::from_records(2, 0, records.clone()),
            side: side.clone(),
            x_dom: IntervalVector::splat(iv(-1.0, 1.0), 2),
            u_dom: IntervalVector::new(vec![]),
        };
        let p = IntervalVector::point(&[0.0, 0.0]);
        let (jf, _) = jacobian_enclosures(&mk(&side), &p, &no_controls()).unwrap();
        assert_eq!(jf.get(0, 0), iv(-2.0, 2.0));
        assert_eq!(jf.get(0, 1), iv(-3.0, 3.0));
        assert_eq!(jf.get(1, 0), iv(-2.0, 2.0));

        side.jac_weight_mode = crate::inclusion::JacWeightMode::RowWeight;
        let (jf, _) = jacobian_enclosures(&mk(&side), &p, &no_controls()).unwrap();
        assert_eq!(jf.get(0, 1), iv(-2.0, 2.0));
        assert_eq!(jf.get(1, 0), iv(-3.0, 3.0));
    }

    #[test]
    fn bound_zero_widths() {
        assert_eq!(suboptimality_bound(&[], 2.0), 0.0);
        assert_eq!(
            suboptimality_bound(&[vec![0.0, 0.0], vec![0.0, 0.0]], 2.0),
            0.0
        );
    }

    #[test]
    fn bound_formula_and_linearity() {
        // two-step tube: middle width (3,4), final width (1,0):
        // bound = lc * (1 + 2*5)
        let widths = vec![vec![3.0, 4.0], vec![1.0, 0.0]];
        let b1 = suboptimality_bound(&widths, 1.0);
        assert!((b1 - 11.0).abs() < 1e-12);
        let b2 = suboptimality_bound(&widths, 2.0);
        assert!((b2 - 2.0 * b1).abs() < 1e-12);
    }
}
