//! Envelope sets: per-sample contracted enclosures of the unknown vector
//! field, evaluated anywhere in the domain through Lipschitz coupling.

use super::contract::{
    apply_constraints, contract_linear_observation, ConstraintCells, ConstraintContext,
};
use super::data::{DataPoint, Dataset};
use super::side::{KnownTerms, SideInfo};
use super::InclusionError;
use crate::interval::{weighted_norm_ext, Interval, IntervalMatrix, IntervalVector};
use crate::interval::monomial_point;
use serde::Serialize;

/// One stored triple: a sample state with contracted enclosures of the
/// autonomous field and of each control-field row at that state.
#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeRecord {
    pub x: Vec<f64>,
    /// Enclosure of `f(x)`, one interval per state component.
    pub cf: IntervalVector,
    /// Enclosure of `g_p(x)`: row p, column k.
    pub cg: IntervalMatrix,
}

/// Companion record for the factored (partial-knowledge) form: enclosures of
/// the unknown cofactors, indexed `[s][k]` and `[p][s][k]`.
#[derive(Clone, Debug, Serialize)]
pub struct FactorRecord {
    pub cf: Vec<IntervalVector>,
    pub cg: Vec<Vec<IntervalVector>>,
}

/// Enclosures of the unknown cofactors over a query box.
#[derive(Clone, Debug)]
pub struct FactorEnclosure {
    pub f: Vec<IntervalVector>,
    pub g: Vec<Vec<IntervalVector>>,
}

/// Fixpoint sweep control: stop when the largest relative width decrease in
/// one full sweep falls below the threshold, or at the cap. Floating-point
/// contraction can keep shaving ULPs, so a pure invariance test would spin.
const SWEEP_CAP: usize = 20;
const SWEEP_REL_TOL: f64 = 1e-6;

/// The set of contracted enclosures backing the differential inclusion.
/// Record 0 is the data-free seed `(x0, [-M,M]^n, [-M,M]^{d x n})`.
#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeSet {
    state_dim: usize,
    term_count: usize,
    records: Vec<EnvelopeRecord>,
    factor_records: Vec<FactorRecord>,
    /// Number of refinements that stopped at the sweep cap rather than at
    /// the relative-decrease threshold.
    pub capped_refines: usize,
}

impl EnvelopeSet {
    /// Builds an envelope set from explicit records (fixtures and tests).
    pub fn from_records(state_dim: usize, term_count: usize, records: Vec<EnvelopeRecord>) -> Self {
        assert!(!records.is_empty(), "envelope set must not be empty");
        for r in &records {
            assert_eq!(r.cf.dim(), state_dim);
            assert_eq!((r.cg.rows(), r.cg.cols()), (term_count, state_dim));
        }
        Self {
            state_dim,
            term_count,
            records,
            factor_records: Vec::new(),
            capped_refines: 0,
        }
    }

    /// Seeds the envelope set and folds every sample of `data` through one
    /// refinement each, in order.
    pub fn construct(
        data: &Dataset,
        side: &SideInfo,
        x_dom: &IntervalVector,
    ) -> Result<Self, InclusionError> {
        side.validate()?;
        let n = side.state_dim();
        let d = side.term_count();
        let m_box = Interval::symmetric(side.bound);
        let seed = EnvelopeRecord {
            x: x_dom.mid(),
            cf: IntervalVector::splat(m_box, n),
            cg: IntervalMatrix::filled(d, n, m_box),
        };
        let factor_records = match &side.known_terms {
            Some(kt) => {
                let s_count = kt.factor_count();
                vec![FactorRecord {
                    cf: vec![IntervalVector::splat(m_box, n); s_count],
                    cg: vec![vec![IntervalVector::splat(m_box, n); s_count]; d],
                }]
            }
            None => Vec::new(),
        };
        let mut env = Self {
            state_dim: n,
            term_count: d,
            records: vec![seed],
            factor_records,
            capped_refines: 0,
        };
        for i in 0..data.len() {
            env.refine_upto(data, i + 1, side)?;
        }
        Ok(env)
    }

    /// Absorbs the newest sample of `data` (which must already contain it)
    /// and sweeps past records until the contraction fixpoint.
    pub fn refine(&mut self, data: &Dataset, side: &SideInfo) -> Result<(), InclusionError> {
        assert_eq!(
            self.sample_count() + 1,
            data.len(),
            "refine expects exactly one new sample appended to the dataset"
        );
        self.refine_upto(data, data.len(), side)
    }

    pub fn sample_count(&self) -> usize {
        self.records.len() - 1
    }

    pub fn records(&self) -> &[EnvelopeRecord] {
        &self.records
    }

    /// Sum of all enclosure widths (diagnostic).
    pub fn total_width(&self) -> f64 {
        self.records
            .iter()
            .map(|r| {
                r.cf.widths().iter().sum::<f64>() + r.cg.widths().iter().sum::<f64>()
            })
            .sum()
    }

    fn refine_upto(
        &mut self,
        data: &Dataset,
        upto: usize,
        side: &SideInfo,
    ) -> Result<(), InclusionError> {
        let new_idx = upto - 1;
        let dp = &data.points()[new_idx];
        assert_eq!(dp.x.len(), self.state_dim);

        // enclose at the new sample, contract against its observation
        let a = IntervalVector::point(&dp.x);
        let (f, g) = self.enclose(side, &a)?;
        let (cf, cg) =
            contract_sample(dp, &f, &g, side).map_err(|e| e.with_sample(new_idx))?;
        self.records.push(EnvelopeRecord {
            x: dp.x.clone(),
            cf,
            cg,
        });
        if let Some(kt) = &side.known_terms {
            let fac = self.enclose_factors(side, kt, &a)?;
            let rec = contract_sample_factored(dp, &fac, side, kt)
                .map_err(|e| e.with_sample(new_idx))?;
            self.factor_records.push(rec);
        }

        // tighten past enclosures until invariant (within tolerance)
        let converged = self.sweep_to_fixpoint(data, upto, side, SWEEP_REL_TOL, SWEEP_CAP)?;
        if !converged {
            self.capped_refines += 1;
        }
        Ok(())
    }

    /// Repeats the tightening sweep over the first `upto` samples until the
    /// largest relative width decrease in a full sweep drops below `rel_tol`
    /// or `cap` sweeps have run. Returns whether the tolerance was reached.
    pub fn sweep_to_fixpoint(
        &mut self,
        data: &Dataset,
        upto: usize,
        side: &SideInfo,
        rel_tol: f64,
        cap: usize,
    ) -> Result<bool, InclusionError> {
        assert!(upto <= data.len() && upto == self.sample_count());
        for _ in 0..cap {
            let mut max_rel_dec: f64 = 0.0;
            for i in 0..upto {
                let dpi = &data.points()[i];
                let a = IntervalVector::point(&dpi.x);
                let (f, g) = self.enclose(side, &a)?;
                let (cf, cg) =
                    contract_sample(dpi, &f, &g, side).map_err(|e| e.with_sample(i))?;
                {
                    let rec = &mut self.records[i + 1];
                    debug_assert!(cf.subset_of(&rec.cf), "envelope widened during sweep");
                    debug_assert!(cg.subset_of(&rec.cg), "envelope widened during sweep");
                    max_rel_dec = max_rel_dec
                        .max(max_relative_decrease_vec(&rec.cf, &cf))
                        .max(max_relative_decrease_mat(&rec.cg, &cg));
                    rec.cf = cf;
                    rec.cg = cg;
                }
                if let Some(kt) = &side.known_terms {
                    let fac = self.enclose_factors(side, kt, &a)?;
                    let newrec = contract_sample_factored(dpi, &fac, side, kt)
                        .map_err(|e| e.with_sample(i))?;
                    let rec = &mut self.factor_records[i + 1];
                    for s in 0..newrec.cf.len() {
                        max_rel_dec =
                            max_rel_dec.max(max_relative_decrease_vec(&rec.cf[s], &newrec.cf[s]));
                    }
                    *rec = newrec;
                }
            }
            if max_rel_dec < rel_tol {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Enclosures of the autonomous and control fields over the box `a`:
    /// the intersection, over every stored record, of the record enclosure
    /// inflated by its Lipschitz ball, clamped to the global bound, with the
    /// factored form and query-scope constraints folded in when declared.
    pub fn enclose(
        &self,
        side: &SideInfo,
        a: &IntervalVector,
    ) -> Result<(IntervalVector, IntervalMatrix), InclusionError> {
        let n = self.state_dim;
        let d = self.term_count;
        let m_box = Interval::symmetric(side.bound);
        let mut f = IntervalVector::splat(m_box, n);
        let mut g = IntervalMatrix::filled(d, n, m_box);

        for (idx, rec) in self.records.iter().enumerate() {
            let eta = weighted_norm_ext(&a.sub_point(&rec.x), &side.weights)?;
            let sym = Interval::symmetric(1.0) * eta;
            for k in 0..n {
                let term = rec.cf[k] + sym.scale(side.lip_f[k]);
                if !(term.lo() <= -side.bound && term.hi() >= side.bound) {
                    f[k] = f[k].intersect(&term).ok_or(InclusionError::EmptyEnvelope {
                        record: idx,
                        component: format!("f[{k}]"),
                    })?;
                }
                for p in 0..d {
                    let term = rec.cg.get(p, k) + sym.scale(side.lip_g[p][k]);
                    if term.lo() <= -side.bound && term.hi() >= side.bound {
                        continue;
                    }
                    *g.get_mut(p, k) =
                        g.get(p, k)
                            .intersect(&term)
                            .ok_or(InclusionError::EmptyEnvelope {
                                record: idx,
                                component: format!("g[{p}][{k}]"),
                            })?;
                }
            }
        }

        if let Some(kt) = &side.known_terms {
            let fac = self.enclose_factors(side, kt, a)?;
            let disagree = || {
                InclusionError::inconsistent(
                    None,
                    "plain and factored enclosures are disjoint; side information is invalid",
                )
            };
            for k in 0..n {
                let mut acc = Interval::zero();
                for (s, factor) in kt.f_factors.iter().enumerate() {
                    let known = factor.eval_box(a)?;
                    acc = acc + known[k] * fac.f[s][k];
                }
                f[k] = f[k].intersect(&acc).ok_or_else(disagree)?;
            }
            for p in 0..d {
                for k in 0..n {
                    let mut acc = Interval::zero();
                    for (s, factor) in kt.g_factors[p].iter().enumerate() {
                        let known = factor.eval_box(a)?;
                        acc = acc + known[k] * fac.g[p][s][k];
                    }
                    *g.get_mut(p, k) = g.get(p, k).intersect(&acc).ok_or_else(disagree)?;
                }
            }
        }

        if !side.constraints.is_empty() {
            let mut cells = ConstraintCells {
                f: Some(&mut f),
                g: Some(&mut g),
                jf: None,
                jg: None,
            };
            let ctx = ConstraintContext {
                x: a,
                u: None,
                xdot: None,
            };
            apply_constraints(&mut cells, &side.constraints, &ctx)?;
        }
        Ok((f, g))
    }

    /// Cofactor enclosures over the box `a` (factored form only).
    pub(crate) fn enclose_factors(
        &self,
        side: &SideInfo,
        kt: &KnownTerms,
        a: &IntervalVector,
    ) -> Result<FactorEnclosure, InclusionError> {
        let n = self.state_dim;
        let d = self.term_count;
        let s_count = kt.factor_count();
        let m_box = Interval::symmetric(side.bound);
        let mut f = vec![IntervalVector::splat(m_box, n); s_count];
        let mut g = vec![vec![IntervalVector::splat(m_box, n); s_count]; d];
        for (idx, (rec, plain)) in self
            .factor_records
            .iter()
            .zip(self.records.iter())
            .enumerate()
        {
            let eta = weighted_norm_ext(&a.sub_point(&plain.x), &side.weights)?;
            let sym = Interval::symmetric(1.0) * eta;
            for s in 0..s_count {
                for k in 0..n {
                    let term = rec.cf[s][k] + sym.scale(kt.lip_f[s][k]);
                    if term.lo() <= -side.bound && term.hi() >= side.bound {
                        continue;
                    }
                    f[s][k] = f[s][k]
                        .intersect(&term)
                        .ok_or(InclusionError::EmptyEnvelope {
                            record: idx,
                            component: format!("f^{s}[{k}]"),
                        })?;
                }
            }
            for p in 0..d {
                for s in 0..s_count {
                    for k in 0..n {
                        let term = rec.cg[p][s][k] + sym.scale(kt.lip_g[p][s][k]);
                        if term.lo() <= -side.bound && term.hi() >= side.bound {
                            continue;
                        }
                        g[p][s][k] =
                            g[p][s][k]
                                .intersect(&term)
                                .ok_or(InclusionError::EmptyEnvelope {
                                    record: idx,
                                    component: format!("g^{s}[{p}][{k}]"),
                                })?;
                    }
                }
            }
        }
        Ok(FactorEnclosure { f, g })
    }
}

/// Contracts enclosures of `f(x)` and `g_p(x)` at one data sample against
/// the dynamics constraint `xdot = f + sum_p g_p * u[alpha_p]`, one state
/// component at a time, then applies sample-scope algebraic constraints.
/// Columns whose control monomial vanishes are returned unchanged.
pub fn contract_sample(
    dp: &DataPoint,
    f_enc: &IntervalVector,
    g_enc: &IntervalMatrix,
    side: &SideInfo,
) -> Result<(IntervalVector, IntervalMatrix), InclusionError> {
    let n = f_enc.dim();
    let d = g_enc.rows();
    let monos: Vec<f64> = side
        .exponents
        .iter()
        .map(|alpha| monomial_point(&dp.u, alpha))
        .collect();
    let mut cf = f_enc.clone();
    let mut cg = g_enc.clone();
    for k in 0..n {
        let mut terms = Vec::with_capacity(1 + d);
        terms.push((1.0, f_enc[k]));
        for p in 0..d {
            terms.push((monos[p], g_enc.get(p, k)));
        }
        contract_linear_observation(observation_slab(dp.xdot[k], side), &mut terms)?;
        cf[k] = terms[0].1;
        for p in 0..d {
            *cg.get_mut(p, k) = terms[p + 1].1;
        }
    }
    if !side.constraints.is_empty() {
        let x = IntervalVector::point(&dp.x);
        let mut cells = ConstraintCells {
            f: Some(&mut cf),
            g: Some(&mut cg),
            jf: None,
            jg: None,
        };
        let ctx = ConstraintContext {
            x: &x,
            u: Some(&dp.u),
            xdot: Some(&dp.xdot),
        };
        apply_constraints(&mut cells, &side.constraints, &ctx)?;
    }
    Ok((cf, cg))
}

/// Factored-form analogue of [`contract_sample`]: the unknowns are the
/// cofactors, with known factor values (times the control monomials) as the
/// linear coefficients.
fn contract_sample_factored(
    dp: &DataPoint,
    fac: &FactorEnclosure,
    side: &SideInfo,
    kt: &KnownTerms,
) -> Result<FactorRecord, InclusionError> {
    let n = dp.x.len();
    let d = side.term_count();
    let s_count = kt.factor_count();
    let monos: Vec<f64> = side
        .exponents
        .iter()
        .map(|alpha| monomial_point(&dp.u, alpha))
        .collect();
    let f_known: Vec<Vec<f64>> = kt.f_factors.iter().map(|f| f.eval_point(&dp.x)).collect();
    let g_known: Vec<Vec<Vec<f64>>> = kt
        .g_factors
        .iter()
        .map(|fs| fs.iter().map(|f| f.eval_point(&dp.x)).collect())
        .collect();

    let mut out = FactorRecord {
        cf: fac.f.clone(),
        cg: fac.g.clone(),
    };
    for k in 0..n {
        let mut terms = Vec::with_capacity(s_count * (1 + d));
        for s in 0..s_count {
            terms.push((f_known[s][k], fac.f[s][k]));
        }
        for p in 0..d {
            for s in 0..s_count {
                terms.push((g_known[p][s][k] * monos[p], fac.g[p][s][k]));
            }
        }
        contract_linear_observation(observation_slab(dp.xdot[k], side), &mut terms)?;
        for s in 0..s_count {
            out.cf[s][k] = terms[s].1;
        }
        for p in 0..d {
            for s in 0..s_count {
                out.cg[p][s][k] = terms[s_count + p * s_count + s].1;
            }
        }
    }
    Ok(out)
}

/// The observation as an interval: exact by default, widened by the
/// declared pad to absorb sample rounding.
fn observation_slab(y: f64, side: &SideInfo) -> Interval {
    if side.observation_pad > 0.0 {
        let e = side.observation_pad * (1.0 + y.abs());
        Interval::new(y - e, y + e)
    } else {
        Interval::point(y)
    }
}

fn rel_decrease(old: f64, new: f64) -> f64 {
    if old > 0.0 {
        (old - new) / old
    } else {
        0.0
    }
}

fn max_relative_decrease_vec(old: &IntervalVector, new: &IntervalVector) -> f64 {
    old.widths()
        .iter()
        .zip(new.widths())
        .map(|(&o, n)| rel_decrease(o, n))
        .fold(0.0, f64::max)
}

fn max_relative_decrease_mat(old: &IntervalMatrix, new: &IntervalMatrix) -> f64 {
    old.widths()
        .iter()
        .zip(new.widths())
        .map(|(&o, n)| rel_decrease(o, n))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusion::side::SideInfo;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    fn scalar_side(lip_f: f64, lip_g: f64, bound: f64) -> SideInfo {
        SideInfo::lipschitz(vec![1.0], vec![vec![1]], bound, vec![lip_f], vec![vec![lip_g]])
    }

    fn record(x: f64, cf: Interval, cg: Interval) -> EnvelopeRecord {
        EnvelopeRecord {
            x: vec![x],
            cf: IntervalVector::new(vec![cf]),
            cg: IntervalMatrix::new(1, 1, vec![cg]),
        }
    }

    #[test]
    fn single_record_lipschitz_ball() {
        // record (x=0, CF=[1,1]), lip 2, query A = {0.5}: [1,1] + [-1,1]*2*0.5
        let env = EnvelopeSet::from_records(1, 1, vec![record(0.0, iv(1.0, 1.0), iv(0.0, 1.0))]);
        let side = scalar_side(2.0, 1.0, 1e6);
        let (f, _) = env
            .enclose(&side, &IntervalVector::point(&[0.5]))
            .unwrap();
        assert_eq!(f[0], iv(0.0, 2.0));
    }

    #[test]
    fn two_record_intersection() {
        let env = EnvelopeSet::from_records(
            1,
            1,
            vec![
                record(0.0, iv(1.0, 1.0), iv(0.0, 1.0)),
                record(1.0, iv(2.0, 2.0), iv(0.0, 1.0)),
            ],
        );
        let side = scalar_side(2.0, 1.0, 1e6);
        let (f, _) = env
            .enclose(&side, &IntervalVector::point(&[0.5]))
            .unwrap();
        // [0,2] from the first record, [1,3] from the second
        assert_eq!(f[0], iv(1.0, 2.0));
    }

    #[test]
    fn query_at_stored_sample_returns_record() {
        let env = EnvelopeSet::from_records(1, 1, vec![record(0.7, iv(0.25, 0.5), iv(0.0, 1.0))]);
        let side = scalar_side(5.0, 5.0, 1e6);
        let (f, _) = env
            .enclose(&side, &IntervalVector::point(&[0.7]))
            .unwrap();
        // distance term vanishes exactly at the sample
        assert_eq!(f[0], iv(0.25, 0.5));
    }

    #[test]
    fn disjoint_records_report_empty_envelope() {
        let env = EnvelopeSet::from_records(
            1,
            1,
            vec![
                record(0.0, iv(0.0, 0.0), iv(0.0, 1.0)),
                record(0.0, iv(5.0, 5.0), iv(0.0, 1.0)),
            ],
        );
        let side = scalar_side(1.0, 1.0, 1e6);
        let err = env.enclose(&side, &IntervalVector::point(&[0.0]));
        assert!(matches!(
            err,
            Err(InclusionError::EmptyEnvelope { record: 1, .. })
        ));
    }

    #[test]
    fn construct_empty_dataset_is_seed_only() {
        let side = scalar_side(1.0, 1.0, 10.0);
        let dom = IntervalVector::new(vec![iv(-1.0, 1.0)]);
        let env = EnvelopeSet::construct(&Dataset::new(), &side, &dom).unwrap();
        assert_eq!(env.records().len(), 1);
        assert_eq!(env.records()[0].x, vec![0.0]);
        assert_eq!(env.records()[0].cf[0], iv(-10.0, 10.0));
    }

    #[test]
    fn construct_single_point_matches_manual_composition() {
        let side = scalar_side(1.0, 1.0, 10.0);
        let dom = IntervalVector::new(vec![iv(-1.0, 1.0)]);
        let mut data = Dataset::new();
        let dp = DataPoint::new(vec![0.5], vec![3.0], vec![1.0]);
        data.push(0.0, dp.clone()).unwrap();
        let env = EnvelopeSet::construct(&data, &side, &dom).unwrap();
        assert_eq!(env.records().len(), 2);

        // manual: enclose at x=0.5 with only the seed, then contract
        let seed_env = EnvelopeSet::construct(&Dataset::new(), &side, &dom).unwrap();
        let (f, g) = seed_env
            .enclose(&side, &IntervalVector::point(&[0.5]))
            .unwrap();
        let (cf, cg) = contract_sample(&dp, &f, &g, &side).unwrap();
        assert_eq!(env.records()[1].cf, cf);
        assert_eq!(env.records()[1].cg.get(0, 0), cg.get(0, 0));
    }

    #[test]
    fn nearby_sample_shrinks_older_record() {
        // truth f(x) = 0, g(x) = 2, within lip bounds
        let side = scalar_side(1.0, 1.0, 10.0);
        let dom = IntervalVector::new(vec![iv(-1.0, 1.0)]);
        let mut data = Dataset::new();
        data.push(0.0, DataPoint::new(vec![0.0], vec![2.0], vec![1.0]))
            .unwrap();
        let env1 = EnvelopeSet::construct(&data, &side, &dom).unwrap();
        let w1: f64 = env1.records()[1].cf.widths().iter().sum();
        data.push(0.05, DataPoint::new(vec![0.01], vec![-2.0], vec![-1.0]))
            .unwrap();
        let mut env2 = env1.clone();
        env2.refine(&data, &side).unwrap();
        let w2: f64 = env2.records()[1].cf.widths().iter().sum();
        assert!(w2 < w1, "second sample should shrink the first record");
    }

    #[test]
    fn repeated_sample_reaches_fixpoint_without_change() {
        let side = scalar_side(1.0, 1.0, 10.0);
        let dom = IntervalVector::new(vec![iv(-1.0, 1.0)]);
        let mut data = Dataset::new();
        data.push(0.0, DataPoint::new(vec![0.2], vec![1.0], vec![0.5]))
            .unwrap();
        let env1 = EnvelopeSet::construct(&data, &side, &dom).unwrap();
        data.push(0.05, DataPoint::new(vec![0.2], vec![1.0], vec![0.5]))
            .unwrap();
        let mut env2 = env1.clone();
        env2.refine(&data, &side).unwrap();
        // same sample carries no new information for the old record
        assert_eq!(env1.records()[1].cf[0], env2.records()[1].cf[0]);
        assert_eq!(env2.capped_refines, 0);
    }

    #[test]
    fn lipschitz_violation_is_inconsistent() {
        // declared lip 1 but observed slope 50
        let side = scalar_side(1.0, 1.0, 100.0);
        let dom = IntervalVector::new(vec![iv(-1.0, 1.0)]);
        let mut data = Dataset::new();
        data.push(0.0, DataPoint::new(vec![0.0], vec![0.0], vec![0.0]))
            .unwrap();
        data.push(0.05, DataPoint::new(vec![0.1], vec![5.0], vec![0.0]))
            .unwrap();
        let err = EnvelopeSet::construct(&data, &side, &dom);
        assert!(matches!(
            err,
            Err(InclusionError::InconsistentData { sample: Some(1), .. })
        ));
    }

    #[test]
    fn order_independent_fixpoint_widths() {
        // five samples of truth f(x) = x, g = 1 (lip-valid), permuted order
        let side = scalar_side(1.1, 1.0, 10.0);
        let dom = IntervalVector::new(vec![iv(-1.0, 1.0)]);
        let xs = [0.0, 0.3, -0.2, 0.5, 0.1];
        let us = [1.0, -0.5, 0.25, -1.0, 0.75];
        let build = |order: &[usize]| {
            let mut data = Dataset::new();
            for (j, &i) in order.iter().enumerate() {
                let x = xs[i];
                let u = us[i];
                data.push(j as f64 * 0.05, DataPoint::new(vec![x], vec![x + u], vec![u]))
                    .unwrap();
            }
            let mut env = EnvelopeSet::construct(&data, &side, &dom).unwrap();
            env.sweep_to_fixpoint(&data, data.len(), &side, 1e-13, 200)
                .unwrap();
            env
        };
        let env_a = build(&[0, 1, 2, 3, 4]);
        let env_b = build(&[4, 2, 0, 3, 1]);
        // compare width of the envelope evaluated at fixed probes
        for probe in [-0.8, -0.1, 0.2, 0.9] {
            let a = IntervalVector::point(&[probe]);
            let (fa, ga) = env_a.enclose(&side, &a).unwrap();
            let (fb, gb) = env_b.enclose(&side, &a).unwrap();
            assert!((fa[0].width() - fb[0].width()).abs() < 1e-9);
            assert!((ga.get(0, 0).width() - gb.get(0, 0).width()).abs() < 1e-9);
        }
    }
}
