//! Trial data: sampled states, state derivatives and applied controls.

use super::InclusionError;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// One observation: state, state derivative and the control that was active.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    pub u: Vec<f64>,
}

impl DataPoint {
    pub fn new(x: Vec<f64>, xdot: Vec<f64>, u: Vec<f64>) -> Self {
        assert_eq!(x.len(), xdot.len(), "state/derivative dimension mismatch");
        Self { x, xdot, u }
    }
}

#[derive(Serialize, Deserialize)]
struct Row {
    t: f64,
    x: Vec<f64>,
    xdot: Vec<f64>,
    u: Vec<f64>,
}

/// The ordered trial history. Append-only during an episode; timestamps are
/// strictly increasing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    points: Vec<DataPoint>,
    times: Vec<f64>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, point: DataPoint) -> Result<(), InclusionError> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(InclusionError::Data(format!(
                    "timestamps must be strictly increasing ({t} after {last})"
                )));
            }
        }
        if let Some(first) = self.points.first() {
            if first.x.len() != point.x.len() || first.u.len() != point.u.len() {
                return Err(InclusionError::Data("dimension change in dataset".into()));
            }
        }
        self.times.push(t);
        self.points.push(point);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn last(&self) -> Option<&DataPoint> {
        self.points.last()
    }

    /// Drops the most recent sample (used when an inconsistent sample is
    /// explicitly discarded).
    pub fn pop(&mut self) -> Option<DataPoint> {
        self.times.pop();
        self.points.pop()
    }

    /// A dataset containing only the first `k` samples.
    pub fn prefix(&self, k: usize) -> Dataset {
        Dataset {
            points: self.points[..k.min(self.len())].to_vec(),
            times: self.times[..k.min(self.len())].to_vec(),
        }
    }

    /// Serializes as JSON lines, one sample per line.
    pub fn to_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (t, p) in self.times.iter().zip(&self.points) {
            let row = Row {
                t: *t,
                x: p.x.clone(),
                xdot: p.xdot.clone(),
                u: p.u.clone(),
            };
            serde_json::to_writer(&mut w, &row)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn from_jsonl<R: BufRead>(r: R) -> Result<Dataset, InclusionError> {
        let mut ds = Dataset::new();
        for line in r.lines() {
            let line = line.map_err(|e| InclusionError::Data(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row =
                serde_json::from_str(&line).map_err(|e| InclusionError::Data(e.to_string()))?;
            ds.push(row.t, DataPoint::new(row.x, row.xdot, row.u))?;
        }
        Ok(ds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_order_enforced() {
        let mut ds = Dataset::new();
        ds.push(0.0, DataPoint::new(vec![0.0], vec![1.0], vec![0.5]))
            .unwrap();
        let err = ds.push(0.0, DataPoint::new(vec![0.1], vec![1.0], vec![0.5]));
        assert!(err.is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let mut ds = Dataset::new();
        ds.push(0.0, DataPoint::new(vec![0.0, 1.0], vec![1.0, -1.0], vec![0.5]))
            .unwrap();
        ds.push(0.05, DataPoint::new(vec![0.1, 0.9], vec![0.9, -1.1], vec![0.25]))
            .unwrap();
        let mut buf = Vec::new();
        ds.to_jsonl(&mut buf).unwrap();
        let back = Dataset::from_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }
}
