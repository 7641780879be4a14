//! Data-driven differential inclusion: trial data plus side information
//! become a set-valued map that provably contains the unknown dynamics.

pub mod contract;
pub mod data;
pub mod envelope;
pub mod side;

pub use contract::{apply_constraints, ConstraintCells, ConstraintContext};
pub use data::{DataPoint, Dataset};
pub use envelope::{contract_sample, EnvelopeRecord, EnvelopeSet, FactorEnclosure};
pub use side::{CellRef, ConstraintSpec, JacWeightMode, KnownFn, KnownTerms, Relation, SideInfo};

use crate::interval::{monomial_ext, IntervalError, IntervalMatrix, IntervalVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InclusionError {
    #[error("empty envelope intersection at record {record} ({component}); side information is inconsistent")]
    EmptyEnvelope { record: usize, component: String },
    #[error("inconsistent data{}: {what}", match .sample { Some(i) => format!(" at sample {i}"), None => String::new() })]
    InconsistentData { sample: Option<usize>, what: String },
    #[error("algebraic constraint {constraint} emptied an enclosure")]
    EmptyAfterContraction { constraint: usize },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

impl InclusionError {
    pub(crate) fn inconsistent(sample: Option<usize>, what: &str) -> Self {
        InclusionError::InconsistentData {
            sample,
            what: what.to_string(),
        }
    }

    /// Attaches a sample index to an inconsistency that lacks one.
    pub(crate) fn with_sample(self, idx: usize) -> Self {
        match self {
            InclusionError::InconsistentData { sample: None, what } => {
                InclusionError::InconsistentData {
                    sample: Some(idx),
                    what,
                }
            }
            other => other,
        }
    }

    /// The data sample the error points at, when known.
    pub fn sample_index(&self) -> Option<usize> {
        match self {
            InclusionError::InconsistentData { sample, .. } => *sample,
            _ => None,
        }
    }
}

/// The differential inclusion: for every admissible state box `A` and
/// control box `U`, `eval(A, U)` encloses the state derivative of every
/// dynamics consistent with the data and the declared side information.
#[derive(Clone, Debug)]
pub struct DiffInclusion {
    pub envelopes: EnvelopeSet,
    pub side: SideInfo,
    pub x_dom: IntervalVector,
    pub u_dom: IntervalVector,
}

impl DiffInclusion {
    pub fn from_dataset(
        data: &Dataset,
        side: SideInfo,
        x_dom: IntervalVector,
        u_dom: IntervalVector,
    ) -> Result<Self, InclusionError> {
        let envelopes = EnvelopeSet::construct(data, &side, &x_dom)?;
        Ok(Self {
            envelopes,
            side,
            x_dom,
            u_dom,
        })
    }

    /// Absorbs the newest sample of `data`. On error the inclusion is left
    /// untouched, so an inconsistent sample can be dropped and the episode
    /// can continue.
    pub fn absorb(&mut self, data: &Dataset) -> Result<(), InclusionError> {
        let mut work = self.envelopes.clone();
        work.refine(data, &self.side)?;
        self.envelopes = work;
        Ok(())
    }

    /// Enclosures of the autonomous field and the control-field rows over a
    /// state box.
    pub fn value_enclosures(
        &self,
        a: &IntervalVector,
    ) -> Result<(IntervalVector, IntervalMatrix), InclusionError> {
        self.envelopes.enclose(&self.side, a)
    }

    /// Enclosure of the state derivative over a state box and control box.
    pub fn eval(
        &self,
        a: &IntervalVector,
        u: &IntervalVector,
    ) -> Result<IntervalVector, InclusionError> {
        let (f, g) = self.value_enclosures(a)?;
        let mut h = f;
        for (p, alpha) in self.side.exponents.iter().enumerate() {
            let mono = monomial_ext(u, alpha)?;
            for k in 0..h.dim() {
                h[k] = h[k] + g.get(p, k) * mono;
            }
        }
        Ok(h)
    }

    /// Enclosure of the state derivative for a point control.
    pub fn eval_point_control(
        &self,
        a: &IntervalVector,
        u: &[f64],
    ) -> Result<IntervalVector, InclusionError> {
        self.eval(a, &IntervalVector::point(u))
    }

    pub fn state_dim(&self) -> usize {
        self.side.state_dim()
    }

    pub fn control_dim(&self) -> usize {
        self.side.control_dim()
    }

    pub fn sample_count(&self) -> usize {
        self.envelopes.sample_count()
    }

    pub(crate) fn factor_enclosures(
        &self,
        a: &IntervalVector,
    ) -> Result<Option<FactorEnclosure>, InclusionError> {
        match &self.side.known_terms {
            Some(kt) => Ok(Some(self.envelopes.enclose_factors(&self.side, kt, a)?)),
            None => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    fn scalar_inclusion() -> DiffInclusion {
        // one record pinning f(0) in [1,1] and g(0) in [1,3], lip 2 / 1
        let side = SideInfo::lipschitz(vec![1.0], vec![vec![1]], 1e6, vec![2.0], vec![vec![1.0]]);
        let records = vec![EnvelopeRecord {
            x: vec![0.5],
            cf: IntervalVector::new(vec![iv(0.0, 2.0)]),
            cg: IntervalMatrix::new(1, 1, vec![iv(1.0, 3.0)]),
        }];
        DiffInclusion {
            envelopes: EnvelopeSet::from_records(1, 1, records),
            side,
            x_dom: IntervalVector::new(vec![iv(-2.0, 2.0)]),
            u_dom: IntervalVector::new(vec![iv(-2.0, 2.0)]),
        }
    }

    #[test]
    fn eval_combines_value_enclosures() {
        let di = scalar_inclusion();
        let a = IntervalVector::point(&[0.5]);
        let h = di
            .eval(&a, &IntervalVector::point(&[1.0]))
            .unwrap();
        // f in [0,2], g in [1,3], u = 1 -> [1,5]
        assert_eq!(h[0], iv(1.0, 5.0));
    }

    #[test]
    fn autonomous_only_when_no_control_terms() {
        let side = SideInfo::lipschitz(vec![1.0], vec![], 1e6, vec![2.0], vec![]);
        let records = vec![EnvelopeRecord {
            x: vec![0.0],
            cf: IntervalVector::new(vec![iv(1.0, 1.0)]),
            cg: IntervalMatrix::new(0, 1, vec![]),
        }];
        let di = DiffInclusion {
            envelopes: EnvelopeSet::from_records(1, 0, records),
            side,
            x_dom: IntervalVector::new(vec![iv(-2.0, 2.0)]),
            u_dom: IntervalVector::new(vec![]),
        };
        let h = di
            .eval(&IntervalVector::point(&[0.5]), &IntervalVector::new(vec![]))
            .unwrap();
        assert_eq!(h[0], iv(0.0, 2.0));
    }
}
