//! Raw longitudinal observations and their censored-interval summaries.
//!
//! An individual is observed at several times, each time reporting whether the
//! (irreversible) event has already happened. The series collapses into an
//! interval `(left, right)` that brackets the event time: `left` is the last
//! event-free observation and `right` the first observation reporting the
//! event. Exact observations are encoded with `left == right`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SiseError};

/// One `(status, time)` measurement of one individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub id: String,
    pub time: f64,
    pub status: u8,
}

impl ObservationRecord {
    pub fn new(id: impl Into<String>, time: f64, status: u8) -> Self {
        Self {
            id: id.into(),
            time,
            status,
        }
    }
}

/// The validated, time-sorted records of a single individual.
#[derive(Debug, Clone, PartialEq)]
pub struct IndividualSeries {
    pub id: String,
    pub records: Vec<ObservationRecord>,
}

impl IndividualSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Interval `(left, right)` bracketing an event time.
///
/// `right` may be `f64::INFINITY` for right-censored individuals. `left == right`
/// marks an exact observation. `multiplicity` counts tied individuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoredInterval {
    pub left: f64,
    pub right: f64,
    pub multiplicity: u32,
}

impl CensoredInterval {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        Self::with_multiplicity(left, right, 1)
    }

    pub fn with_multiplicity(left: f64, right: f64, multiplicity: u32) -> Result<Self> {
        let invalid = |reason| SiseError::InvalidInterval {
            left,
            right,
            reason,
        };
        if !left.is_finite() {
            return Err(invalid("left endpoint must be finite"));
        }
        if left < 0.0 {
            return Err(invalid("left endpoint must be non-negative"));
        }
        if right.is_nan() || right == f64::NEG_INFINITY {
            return Err(invalid("right endpoint must be a number or +inf"));
        }
        if left > right {
            return Err(invalid("left endpoint exceeds right endpoint"));
        }
        if multiplicity == 0 {
            return Err(invalid("multiplicity must be positive"));
        }
        Ok(Self {
            left,
            right,
            multiplicity,
        })
    }

    pub fn exact(time: f64) -> Result<Self> {
        Self::new(time, time)
    }

    pub fn right_censored(left: f64) -> Result<Self> {
        Self::new(left, f64::INFINITY)
    }

    pub fn is_exact(&self) -> bool {
        self.left == self.right
    }

    pub fn is_right_censored(&self) -> bool {
        self.right.is_infinite()
    }

    /// Finite, non-degenerate interval whose left end lies above `support_left`.
    pub fn is_interval_censored(&self, support_left: f64) -> bool {
        self.left > support_left && self.right.is_finite() && self.left < self.right
    }

    /// Replace an infinite right end by the finite upper support `upper`.
    pub fn close_right(self, upper: f64) -> Self {
        if self.right.is_infinite() {
            Self {
                right: upper,
                ..self
            }
        } else {
            self
        }
    }

    /// Inverse of [`close_right`](Self::close_right) for the same `upper`.
    pub fn open_right(self, upper: f64) -> Self {
        if self.right == upper && self.left < upper {
            Self {
                right: f64::INFINITY,
                ..self
            }
        } else {
            self
        }
    }

    /// Total weight of a slice of intervals (sum of multiplicities).
    pub fn total_weight(data: &[CensoredInterval]) -> f64 {
        data.iter().map(|iv| f64::from(iv.multiplicity)).sum()
    }
}

/// Summarized individuals with, when known, the number of raw observations
/// behind each interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSample {
    pub intervals: Vec<CensoredInterval>,
    pub observation_counts: Option<Vec<usize>>,
}

impl CensoredSample {
    pub fn new(intervals: Vec<CensoredInterval>) -> Self {
        Self {
            intervals,
            observation_counts: None,
        }
    }

    pub fn with_counts(intervals: Vec<CensoredInterval>, counts: Vec<usize>) -> Result<Self> {
        if intervals.len() != counts.len() {
            return Err(SiseError::LengthMismatch(intervals.len(), counts.len()));
        }
        Ok(Self {
            intervals,
            observation_counts: Some(counts),
        })
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_observations(&self) -> Option<f64> {
        self.observation_counts
            .as_ref()
            .map(|c| c.iter().map(|&m| m as f64).sum())
    }

    /// One entry per individual (multiplicities expanded).
    pub fn individuals(&self) -> Vec<(CensoredInterval, Option<usize>)> {
        let mut out = Vec::new();
        for (i, iv) in self.intervals.iter().enumerate() {
            let count = self.observation_counts.as_ref().map(|c| c[i]);
            let per = count.map(|c| c / iv.multiplicity.max(1) as usize);
            for _ in 0..iv.multiplicity {
                out.push((CensoredInterval { multiplicity: 1, ..*iv }, per));
            }
        }
        out
    }
}

/// Common truncation frame `(left, right)` and the support `(support_left, support_right)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeFrame {
    pub left: f64,
    pub right: f64,
    pub support_left: f64,
    #[serde(with = "crate::io::inf_float")]
    pub support_right: f64,
}

impl TimeFrame {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        Self::with_support(left, right, 0.0, f64::INFINITY)
    }

    pub fn with_support(left: f64, right: f64, support_left: f64, support_right: f64) -> Result<Self> {
        if !left.is_finite() || !right.is_finite() {
            return Err(SiseError::InvalidFrame("frame bounds must be finite".into()));
        }
        if left >= right {
            return Err(SiseError::EmptyFrame { left, right });
        }
        if left < 0.0 || support_left < 0.0 {
            return Err(SiseError::InvalidFrame("frame must be non-negative".into()));
        }
        if support_left > left || right > support_right {
            return Err(SiseError::InvalidFrame(format!(
                "support ({support_left}, {support_right}) must contain frame ({left}, {right})"
            )));
        }
        Ok(Self {
            left,
            right,
            support_left,
            support_right,
        })
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn clamp(&self, t: f64) -> f64 {
        t.clamp(self.left, self.right)
    }
}

/// Group records by individual, sort each series by time and check that the
/// event status never reverts from 1 to 0.
///
/// Individuals are returned in order of first appearance.
pub fn validate_records(records: &[ObservationRecord]) -> Result<Vec<IndividualSeries>> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut series: Vec<IndividualSeries> = Vec::new();
    for rec in records {
        if !rec.time.is_finite() {
            return Err(SiseError::NonFiniteTime { id: rec.id.clone() });
        }
        if rec.time < 0.0 {
            return Err(SiseError::NegativeTime {
                id: rec.id.clone(),
                time: rec.time,
            });
        }
        if rec.status > 1 {
            return Err(SiseError::InvalidStatus {
                id: rec.id.clone(),
                status: rec.status,
            });
        }
        let slot = *index.entry(rec.id.as_str()).or_insert_with(|| {
            series.push(IndividualSeries {
                id: rec.id.clone(),
                records: Vec::new(),
            });
            series.len() - 1
        });
        series[slot].records.push(rec.clone());
    }

    for s in &mut series {
        // status 0 before status 1 at tied times
        s.records
            .sort_by(|a, b| a.time.total_cmp(&b.time).then(a.status.cmp(&b.status)));
        let mut first_event: Option<f64> = None;
        for r in &s.records {
            match (first_event, r.status) {
                (None, 1) => first_event = Some(r.time),
                (Some(event_time), 0) => {
                    return Err(SiseError::MonotonicityViolation {
                        id: s.id.clone(),
                        event_time,
                        later_time: r.time,
                    })
                }
                _ => {}
            }
        }
    }
    Ok(series)
}

/// Collapse one individual's series into `(left, right)`.
///
/// `left` is the latest event-free time (or `support_left` if the event was
/// already present at the first visit); `right` is the earliest time reporting
/// the event (or `support_right` if it was never reported).
pub fn summarize_observations(
    series: &IndividualSeries,
    support_left: f64,
    support_right: f64,
) -> Result<CensoredInterval> {
    if series.is_empty() {
        return Err(SiseError::EmptyData);
    }
    let left = series
        .records
        .iter()
        .filter(|r| r.status == 0)
        .map(|r| r.time)
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))))
        .unwrap_or(support_left);
    let right = series
        .records
        .iter()
        .filter(|r| r.status == 1)
        .map(|r| r.time)
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))))
        .unwrap_or(support_right);
    CensoredInterval::new(left, right)
}

/// Validate and summarize a full record set with support `(0, +inf)`.
pub fn summarize_all(records: &[ObservationRecord]) -> Result<Vec<(String, CensoredInterval, usize)>> {
    validate_records(records)?
        .into_iter()
        .map(|s| {
            let iv = summarize_observations(&s, 0.0, f64::INFINITY)?;
            Ok((s.id, iv, s.records.len()))
        })
        .collect()
}

/// Observed time frame: earliest and latest observation time.
pub fn estimate_time_frame(records: &[ObservationRecord]) -> Result<TimeFrame> {
    if records.is_empty() {
        return Err(SiseError::EmptyData);
    }
    let (lo, hi) = records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.time), hi.max(r.time))
    });
    TimeFrame::new(lo, hi)
}

/// Frame spanned by the finite endpoints of a set of intervals.
pub fn frame_from_intervals(data: &[CensoredInterval]) -> Result<TimeFrame> {
    let finite = data
        .iter()
        .flat_map(|iv| [iv.left, iv.right])
        .filter(|t| t.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
        (lo.min(t), hi.max(t))
    });
    if lo > hi {
        return Err(SiseError::EmptyData);
    }
    TimeFrame::new(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(id: &str, pairs: &[(u8, f64)]) -> Vec<ObservationRecord> {
        pairs
            .iter()
            .map(|&(z, t)| ObservationRecord::new(id, t, z))
            .collect()
    }

    #[test]
    fn monotone_series_is_valid() {
        let recs = series("1", &[(0, 38.0), (1, 60.0), (1, 70.0)]);
        let out = validate_records(&recs).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].records, recs);
    }

    #[test]
    fn unsorted_input_is_sorted() {
        let recs = series("a", &[(1, 70.0), (0, 38.0), (1, 60.0)]);
        let out = validate_records(&recs).unwrap();
        let times: Vec<f64> = out[0].records.iter().map(|r| r.time).collect();
        assert_eq!(times, vec![38.0, 60.0, 70.0]);
    }

    #[test]
    fn reverting_status_is_rejected() {
        let recs = series("1", &[(1, 60.0), (0, 70.0)]);
        assert!(matches!(
            validate_records(&recs),
            Err(SiseError::MonotonicityViolation { .. })
        ));
    }

    #[test]
    fn negative_time_is_rejected() {
        let recs = series("1", &[(0, -1.0)]);
        assert!(matches!(validate_records(&recs), Err(SiseError::NegativeTime { .. })));
    }

    #[test]
    fn empty_records_are_valid() {
        assert!(validate_records(&[]).unwrap().is_empty());
    }

    #[test]
    fn four_visit_summaries() {
        let cases: [(&[(u8, f64)], (f64, f64)); 4] = [
            (&[(0, 38.0), (1, 60.0), (1, 70.0)], (38.0, 60.0)),
            (&[(0, 41.0), (1, 48.0), (1, 55.0)], (41.0, 48.0)),
            (&[(0, 35.0), (0, 44.0), (0, 62.0)], (62.0, f64::INFINITY)),
            (&[(1, 36.0), (1, 42.0), (1, 48.0)], (0.0, 36.0)),
        ];
        for (pairs, (l, r)) in cases {
            let s = &validate_records(&series("x", pairs)).unwrap()[0];
            let iv = summarize_observations(s, 0.0, f64::INFINITY).unwrap();
            assert_eq!((iv.left, iv.right), (l, r));
        }
    }

    #[test]
    fn four_visit_frame() {
        let times = [38.0, 60.0, 70.0, 41.0, 48.0, 55.0, 35.0, 44.0, 62.0, 36.0, 42.0, 48.0];
        let recs: Vec<_> = times
            .iter()
            .map(|&t| ObservationRecord::new("i", t, 0))
            .collect();
        let f = estimate_time_frame(&recs).unwrap();
        assert_eq!((f.left, f.right), (35.0, 70.0));
        assert_eq!(f.support_left, 0.0);
        assert!(f.support_right.is_infinite());
    }

    #[test]
    fn degenerate_frame_is_rejected() {
        let recs = vec![ObservationRecord::new("i", 50.0, 0)];
        assert!(matches!(
            estimate_time_frame(&recs),
            Err(SiseError::EmptyFrame { .. })
        ));
        assert_eq!(estimate_time_frame(&[]), Err(SiseError::EmptyData));
    }

    #[test]
    fn frame_endpoints_pass_through() {
        let recs = vec![
            ObservationRecord::new("a", 0.0, 0),
            ObservationRecord::new("b", 100.0, 1),
        ];
        let f = estimate_time_frame(&recs).unwrap();
        assert_eq!((f.left, f.right), (0.0, 100.0));
    }

    #[test]
    fn right_censoring_round_trip() {
        let iv = CensoredInterval::right_censored(62.0).unwrap();
        let closed = iv.close_right(100.0);
        assert_eq!(closed.right, 100.0);
        assert_eq!(closed.open_right(100.0), iv);
    }

    #[test]
    fn interval_invariants() {
        assert!(CensoredInterval::new(5.0, 4.0).is_err());
        assert!(CensoredInterval::new(-1.0, 4.0).is_err());
        assert!(CensoredInterval::with_multiplicity(1.0, 4.0, 0).is_err());
        assert!(CensoredInterval::exact(3.0).unwrap().is_exact());
    }
}
