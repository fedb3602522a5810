use std::collections::{BTreeMap, VecDeque};

use super::{KnowledgeBase, OperatingPoint, TuneError};

/// Observation window per metric.
pub const DEFAULT_WINDOW: usize = 16;

/// Floor of a scale factor, so scaled means stay positive multiples.
pub const MIN_SCALE: f64 = 1e-9;

/// Recent observations of each metric and the means the active point
/// predicted for them. `scale(m)` = window mean / expected mean.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackState {
    capacity: usize,
    buffers: BTreeMap<String, VecDeque<f64>>,
    expected: BTreeMap<String, f64>,
}

impl FeedbackState {
    pub fn new(kb: &KnowledgeBase, capacity: usize) -> Self {
        FeedbackState {
            capacity: capacity.max(1),
            buffers: kb.metrics.iter().map(|m| (m.clone(), VecDeque::new())).collect(),
            expected: BTreeMap::new(),
        }
    }

    /// Makes `point` the one whose predictions observations are compared
    /// against. Buffers are kept.
    pub fn set_active(&mut self, point: &OperatingPoint) {
        self.expected = point.metrics.iter().map(|(m, s)| (m.clone(), s.mean)).collect();
    }

    /// Records an observation and returns the new scale of `metric`.
    pub fn observe(&mut self, metric: &str, value: f64) -> Result<f64, TuneError> {
        let buf = self.buffers.get_mut(metric).ok_or_else(|| TuneError::UnknownMetric(metric.to_string()))?;
        if !value.is_finite() {
            return Err(TuneError::InvalidObservation { metric: metric.to_string(), value });
        }
        if buf.len() == self.capacity {
            buf.pop_front();
        }
        buf.push_back(value);
        Ok(self.scale(metric))
    }

    pub fn window(&self, metric: &str) -> Option<&VecDeque<f64>> {
        self.buffers.get(metric)
    }

    /// 1.0 with no observations or no usable expectation.
    pub fn scale(&self, metric: &str) -> f64 {
        let (Some(buf), Some(&exp)) = (self.buffers.get(metric), self.expected.get(metric)) else {
            return 1.0;
        };
        if buf.is_empty() || exp == 0.0 {
            return 1.0;
        }
        let mean = buf.iter().sum::<f64>() / buf.len() as f64;
        (mean / exp).max(MIN_SCALE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autotune::parse_knowledge;

    #[test]
    fn scale_and_eviction() {
        let kb = parse_knowledge("knob:k,metric:t:mean\n1,10\n").unwrap();
        let mut f = FeedbackState::new(&kb, 3);
        f.set_active(&kb.points[0]);
        assert_eq!(f.scale("t"), 1.0);
        assert_eq!(f.observe("t", 10.0).unwrap(), 1.0);
        let mut f = FeedbackState::new(&kb, 3);
        f.set_active(&kb.points[0]);
        f.observe("t", 20.0).unwrap();
        assert_eq!(f.observe("t", 20.0).unwrap(), 2.0);
        for v in [1.0, 2.0, 3.0, 4.0] {
            f.observe("t", v).unwrap();
        }
        assert_eq!(f.window("t").unwrap().iter().copied().collect::<Vec<_>>(), [2.0, 3.0, 4.0]);
        assert!(matches!(f.observe("x", 1.0), Err(TuneError::UnknownMetric(_))));
        assert!(f.observe("t", f64::NAN).is_err());
    }
}
