//! Deterministic sample points with rejection of unusable candidates.
//!
//! Candidate `i` is drawn from its own ChaCha8 stream (`seed`, stream `i`), so
//! the candidate sequence depends only on the seed and never on which
//! candidates were rejected or on thread scheduling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chart::signature;
use crate::error::{Error, Result};
use crate::geometry::ScalarField;
use crate::ChartMetric;

pub const DET_FLOOR: f64 = 1e-10;

pub fn candidate(seed: u64, index: u64, boxes: &[(f64, f64)]) -> Vec<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    boxes.iter().map(|&(lo, hi)| r.random_range(lo..hi)).collect()
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub rejected: usize,
    /// Rejection count per reason.
    pub reasons: BTreeMap<String, usize>,
}

/// Draws until `count` candidates pass `accept`. Aborts once rejections
/// outnumber the requested count, i.e. the rejection rate would exceed 50%.
pub fn sample_with<F>(seed: u64, count: usize, boxes: &[(f64, f64)], mut accept: F) -> Result<SampleSet>
where
    F: FnMut(&[f64]) -> std::result::Result<(), String>,
{
    let mut set = SampleSet::default();
    let mut index = 0u64;
    while set.points.len() < count {
        let p = candidate(seed, index, boxes);
        index += 1;
        match accept(&p) {
            Ok(()) => set.points.push(p),
            Err(reason) => {
                set.rejected += 1;
                *set.reasons.entry(reason).or_default() += 1;
                if set.rejected > count {
                    return Err(Error::InvalidInput(format!(
                        "more than half of the candidates were rejected ({} rejected, {} accepted): {:?}",
                        set.rejected,
                        set.points.len(),
                        set.reasons
                    )));
                }
            }
        }
    }
    Ok(set)
}

/// Acceptance test for points of a metric chart: finite components,
/// `|det g| > 1e-10`, the signature of the first accepted point, a finite
/// potential jet, and whatever `extra` demands (e.g. positive warping).
pub struct PointFilter<'a> {
    pub metric: &'a ChartMetric,
    pub potential: Option<&'a ScalarField>,
    pub extra: Option<&'a dyn Fn(&[f64]) -> Result<()>>,
    signature: Option<(usize, usize)>,
}

impl<'a> PointFilter<'a> {
    pub fn new(metric: &'a ChartMetric) -> PointFilter<'a> {
        PointFilter {
            metric,
            potential: None,
            extra: None,
            signature: None,
        }
    }

    pub fn check(&mut self, p: &[f64]) -> std::result::Result<(), String> {
        if let Some(extra) = self.extra {
            extra(p).map_err(|e| match e {
                Error::NonPositiveWarping { name, .. } => format!("nonpositive {name}"),
                other => format!("domain: {other}"),
            })?;
        }
        let jet = self.metric.jet(p, false).map_err(|e| format!("domain: {e}"))?;
        if jet.g.iter().chain(&jet.dg).chain(&jet.ddg).any(|v| !v.is_finite()) {
            return Err("non-finite metric jet".into());
        }
        let m = self.metric.matrix_at(p).map_err(|e| format!("domain: {e}"))?;
        if m.determinant().abs() <= DET_FLOOR {
            return Err("degenerate metric".into());
        }
        let sig = signature(&m);
        match self.signature {
            None => self.signature = Some(sig),
            Some(s) if s != sig => return Err("signature change".into()),
            _ => {}
        }
        if let Some(f) = self.potential {
            let j = f.jet(p).map_err(|e| format!("domain: {e}"))?;
            if !j.value.is_finite() || j.gradient.iter().chain(&j.hessian).any(|v| !v.is_finite()) {
                return Err("non-finite potential".into());
            }
        }
        Ok(())
    }
}

pub fn sample_metric_points(seed: u64, count: usize, boxes: &[(f64, f64)], filter: &mut PointFilter) -> Result<SampleSet> {
    sample_with(seed, count, boxes, |p| filter.check(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ParamBinding;

    #[test]
    fn stream_per_candidate_is_stable() {
        let a = candidate(1, 0, &[(0.0, 1.0)]);
        let b = candidate(1, 0, &[(0.0, 1.0)]);
        assert_eq!(a, b);
        assert_ne!(candidate(1, 1, &[(0.0, 1.0)]), a);
        let s = sample_with(1, 3, &[(0.0, 1.0)], |_| Ok(())).unwrap();
        assert_eq!(s.points[0], a);
        assert_eq!(s.points.len(), 3);
    }

    #[test]
    fn rejects_degenerate_points() {
        // det = x², singular at x = 0
        let m = ChartMetric::parse(&["x", "y"], &[&["x^2"], &["0", "1"]], ParamBinding::new()).unwrap();
        let mut f = PointFilter::new(&m);
        let s = sample_metric_points(4, 50, &[(-1e-5, 1.0), (0.0, 1.0)], &mut f).unwrap();
        for p in &s.points {
            assert!(p[0] * p[0] > DET_FLOOR);
        }
    }

    #[test]
    fn aborts_on_mostly_bad_box() {
        let m = ChartMetric::parse(&["x"], &[&["x^2"]], ParamBinding::new()).unwrap();
        let mut f = PointFilter::new(&m);
        let e = sample_metric_points(4, 20, &[(-1e-6, 1e-6)], &mut f).unwrap_err();
        assert!(e.to_string().contains("rejected"));
    }

    #[test]
    fn zero_samples() {
        let s = sample_with(9, 0, &[(0.0, 1.0)], |_| Err("never".into())).unwrap();
        assert!(s.points.is_empty() && s.rejected == 0);
    }
}
