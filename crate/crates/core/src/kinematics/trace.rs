use crate::geom::Point2;
use crate::mechanism::TrackedPoint;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub p: Point2,
}

/// World-space path of one tracked point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub point: TrackedPoint,
    pub samples: Vec<TraceSample>,
    /// Set once a revolute input has turned a full cycle since the trace
    /// started.
    pub closed: bool,
}

impl Trace {
    pub fn new(point: TrackedPoint) -> Self {
        Self {
            point,
            samples: Vec::new(),
            closed: false,
        }
    }

    pub fn push(&mut self, t: f64, p: Point2) {
        self.samples.push(TraceSample { t, p });
    }

    pub fn points(&self) -> impl Iterator<Item = Point2> + '_ {
        self.samples.iter().map(|s| s.p)
    }

    /// Distance between the first and last sample.
    pub fn closure_gap(&self) -> Option<f64> {
        Some(self.samples.first()?.p.distance(self.samples.last()?.p))
    }
}
