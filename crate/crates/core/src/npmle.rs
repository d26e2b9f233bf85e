//! Raw non-parametric maximum likelihood estimators.
//!
//! [`km_fit`] is the product-limit estimator for exact and right-censored
//! times. [`turnbull_fit`] handles arbitrary censoring through the
//! self-consistency EM over the maximal-intersection ("Turnbull") intervals.
//! Both return a [`StepEstimate`]: probability masses on ordered, disjoint
//! support intervals. [`step_to_grid`] and [`grid_to_survival`] move the
//! estimate onto a uniform time grid.

use std::cmp::Ordering;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::{CensoredInterval, TimeFrame};
use crate::error::{Result, SiseError};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_STEP: f64 = 0.01;

/// Fraction of a bin below which positions are snapped to the bin edge.
const EDGE_EPS: f64 = 1e-9;

/// Support element of a step estimate. Degenerate (`left == right`) elements
/// are point masses; others are open intervals, `right` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportInterval {
    pub left: f64,
    pub right: f64,
}

impl SupportInterval {
    pub fn is_point(&self) -> bool {
        self.left == self.right
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepEstimate {
    pub support: Vec<SupportInterval>,
    pub masses: Vec<f64>,
    pub frame: TimeFrame,
    pub converged: bool,
    pub iterations: usize,
    /// Set by [`km_fit`] when no events were observed (survival is identically 1).
    pub all_censored: bool,
}

impl StepEstimate {
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `P(X > t)`, spreading each interval's mass uniformly over the interval.
    pub fn survival_at(&self, t: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.masses)
            .map(|(s, &m)| {
                if s.is_point() {
                    if s.left > t {
                        m
                    } else {
                        0.0
                    }
                } else if t <= s.left || s.right.is_infinite() {
                    if t < s.right {
                        m
                    } else {
                        0.0
                    }
                } else {
                    m * ((s.right - t) / (s.right - s.left)).clamp(0.0, 1.0)
                }
            })
            .sum()
    }
}

/// Product-limit estimate from `(time, event)` pairs; `event == false` means
/// right-censored at `time`.
///
/// Survival left after the last event time is kept as a terminal mass on
/// `(largest observed time, +inf)`, which gridding clamps to the frame.
pub fn km_fit(observations: &[(f64, bool)], frame: &TimeFrame) -> Result<StepEstimate> {
    if observations.is_empty() {
        return Err(SiseError::EmptyData);
    }
    for &(t, _) in observations {
        if !t.is_finite() || t < 0.0 {
            return Err(SiseError::InvalidInterval {
                left: t,
                right: t,
                reason: "time must be finite and non-negative",
            });
        }
    }
    let mut sorted = observations.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n_total = sorted.len();
    let mut support = Vec::new();
    let mut masses = Vec::new();
    let mut surv = 1.0_f64;
    let mut i = 0;
    while i < n_total {
        let t = sorted[i].0;
        let at_risk = n_total - i;
        let mut deaths = 0usize;
        let mut j = i;
        while j < n_total && sorted[j].0 == t {
            if sorted[j].1 {
                deaths += 1;
            }
            j += 1;
        }
        if deaths > 0 {
            let next = surv * (1.0 - deaths as f64 / at_risk as f64);
            support.push(SupportInterval { left: t, right: t });
            masses.push(surv - next);
            surv = next;
        }
        i = j;
    }

    let all_censored = support.is_empty();
    if all_censored {
        warn!("all observations are right-censored; survival is identically 1");
    }
    if surv > 0.0 {
        let last = sorted[n_total - 1].0;
        support.push(SupportInterval {
            left: last,
            right: f64::INFINITY,
        });
        masses.push(surv);
    }
    Ok(StepEstimate {
        support,
        masses,
        frame: *frame,
        converged: true,
        iterations: 0,
        all_censored,
    })
}

/// Endpoint position with tie-breaking for open and closed ends.
///
/// At a common value `v` the order is: open right end (`< v`), closed left end
/// (`[v`), closed right end (`v]`), open left end (`> v`).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Bound {
    value: f64,
    rank: u8,
}

impl Bound {
    fn lower(iv: &CensoredInterval) -> Self {
        Self {
            value: iv.left,
            rank: if iv.is_exact() { 1 } else { 3 },
        }
    }

    fn upper(iv: &CensoredInterval) -> Self {
        Self {
            value: iv.right,
            rank: if iv.is_exact() { 2 } else { 0 },
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.rank.cmp(&other.rank))
    }
}

#[derive(Debug, Clone, Copy)]
struct TurnbullCell {
    lower: Bound,
    upper: Bound,
}

fn turnbull_cells(data: &[CensoredInterval]) -> Vec<TurnbullCell> {
    let mut ends: Vec<(Bound, bool)> = data
        .iter()
        .flat_map(|iv| [(Bound::lower(iv), true), (Bound::upper(iv), false)])
        .collect();
    ends.sort_by(|a, b| a.0.cmp(&b.0));
    ends.windows(2)
        .filter(|w| w[0].1 && !w[1].1)
        .map(|w| TurnbullCell {
            lower: w[0].0,
            upper: w[1].0,
        })
        .collect()
}

/// Maximal-intersection intervals: a left endpoint immediately followed by a
/// right endpoint in the sorted endpoint sequence.
pub fn turnbull_intervals(data: &[CensoredInterval]) -> Result<Vec<SupportInterval>> {
    if data.is_empty() {
        return Err(SiseError::EmptyData);
    }
    Ok(turnbull_cells(data)
        .into_iter()
        .map(|c| SupportInterval {
            left: c.lower.value,
            right: c.upper.value,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Range `[start, end]` of cells contained in each observation.
fn coverage(data: &[CensoredInterval], cells: &[TurnbullCell]) -> Result<Vec<(usize, usize)>> {
    data.iter()
        .map(|iv| {
            let lo = Bound::lower(iv);
            let hi = Bound::upper(iv);
            let start = cells.partition_point(|c| c.lower.cmp(&lo) == Ordering::Less);
            let end = cells.partition_point(|c| c.upper.cmp(&hi) != Ordering::Greater);
            if start >= end {
                return Err(SiseError::NoFeasibleSupport {
                    left: iv.left,
                    right: iv.right,
                });
            }
            Ok((start, end - 1))
        })
        .collect()
}

/// Self-consistency EM for the Turnbull NPMLE.
///
/// Returns the estimate and the log-likelihood of every iterate, starting with
/// the uniform initial masses.
pub fn turnbull_fit_traced(
    data: &[CensoredInterval],
    frame: &TimeFrame,
    opts: EmOptions,
) -> Result<(StepEstimate, Vec<f64>)> {
    if data.is_empty() {
        return Err(SiseError::EmptyData);
    }
    let cells = turnbull_cells(data);
    let ranges = coverage(data, &cells)?;
    let weights: Vec<f64> = data.iter().map(|iv| f64::from(iv.multiplicity)).collect();
    let total: f64 = weights.iter().sum();
    let k = cells.len();

    let mut masses = vec![1.0 / k as f64; k];
    let mut prefix = vec![0.0; k + 1];
    let mut acc = vec![0.0; k + 1];
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        for (j, m) in masses.iter().enumerate() {
            prefix[j + 1] = prefix[j] + m;
        }
        acc.iter_mut().for_each(|a| *a = 0.0);
        let mut loglik = 0.0;
        for (&(s, e), &w) in ranges.iter().zip(&weights) {
            let denom = prefix[e + 1] - prefix[s];
            loglik += w * denom.ln();
            acc[s] += w / denom;
            acc[e + 1] -= w / denom;
        }
        if let Some(&prev) = trace.last() {
            debug_assert!(
                loglik >= prev - 1e-9 * prev.abs().max(1.0),
                "EM log-likelihood decreased: {prev} -> {loglik}"
            );
        }
        trace.push(loglik);

        let mut running = 0.0;
        let mut delta = 0.0_f64;
        for j in 0..k {
            running += acc[j];
            let updated = masses[j] * running / total;
            delta = delta.max((updated - masses[j]).abs());
            masses[j] = updated;
        }
        iterations += 1;
        if delta < opts.tolerance {
            converged = true;
            break;
        }
    }
    if converged {
        // log-likelihood of the returned masses
        let mut loglik = 0.0;
        for (j, m) in masses.iter().enumerate() {
            prefix[j + 1] = prefix[j] + m;
        }
        for (&(s, e), &w) in ranges.iter().zip(&weights) {
            loglik += w * (prefix[e + 1] - prefix[s]).ln();
        }
        trace.push(loglik);
    } else {
        warn!("Turnbull EM did not converge within {} iterations", opts.max_iter);
    }

    let support = cells
        .iter()
        .map(|c| SupportInterval {
            left: c.lower.value,
            right: c.upper.value,
        })
        .collect();
    Ok((
        StepEstimate {
            support,
            masses,
            frame: *frame,
            converged,
            iterations,
            all_censored: false,
        },
        trace,
    ))
}

/// Turnbull NPMLE. A non-converged fit is returned with `converged == false`.
pub fn turnbull_fit(
    data: &[CensoredInterval],
    frame: &TimeFrame,
    opts: EmOptions,
) -> Result<StepEstimate> {
    turnbull_fit_traced(data, frame, opts).map(|(est, _)| est)
}

/// Density tabulated on the bins `[grid_start + j*step, grid_start + (j+1)*step)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GriddedDensity {
    pub grid_start: f64,
    pub step: f64,
    pub values: Vec<f64>,
    /// Smoothing bandwidth that produced the values; 0 for a raw estimate.
    pub bandwidth: f64,
    pub total_mass: f64,
}

impl GriddedDensity {
    pub fn new(grid_start: f64, step: f64, values: Vec<f64>, bandwidth: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(SiseError::InvalidStep(step));
        }
        if values.is_empty() {
            return Err(SiseError::DegenerateDensity("no bins"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(SiseError::DegenerateDensity("values must be finite and non-negative"));
        }
        let total_mass = step * values.iter().sum::<f64>();
        Ok(Self {
            grid_start,
            step,
            values,
            bandwidth,
            total_mass,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn edge(&self, j: usize) -> f64 {
        self.grid_start + j as f64 * self.step
    }

    pub fn grid_end(&self) -> f64 {
        self.edge(self.values.len())
    }

    /// Index of the bin containing `t`, clamped to the grid.
    pub fn bin_index(&self, t: f64) -> usize {
        let x = ((t - self.grid_start) / self.step + EDGE_EPS).floor();
        if x <= 0.0 {
            0
        } else {
            (x as usize).min(self.values.len() - 1)
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.values[self.bin_index(t)]
    }

    /// Integral of the density over `[a, b]` with linear proration of the end bins.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.grid_start);
        let b = b.min(self.grid_end());
        if b <= a {
            return 0.0;
        }
        let first = self.bin_index(a);
        let last = self.bin_index(b);
        (first..=last)
            .map(|j| {
                let overlap = b.min(self.edge(j + 1)) - a.max(self.edge(j));
                if overlap > 0.0 {
                    self.values[j] * overlap
                } else {
                    0.0
                }
            })
            .sum()
    }

    pub fn bin_mass(&self, j: usize) -> f64 {
        self.values[j] * self.step
    }

    /// Mass of a censoring interval under the density.
    ///
    /// The interval is clamped to the grid; one that collapses to a point at
    /// a grid edge takes the mass of the edge bin, mirroring [`step_to_grid`].
    pub fn interval_mass(&self, left: f64, right: f64) -> f64 {
        let (a, b) = self.clamp_interval(left, right);
        if b - a <= EDGE_EPS * self.step {
            self.bin_mass(self.bin_index(a))
        } else {
            self.mass_between(a, b)
        }
    }

    pub fn clamp_interval(&self, left: f64, right: f64) -> (f64, f64) {
        let end = self.grid_end();
        (left.clamp(self.grid_start, end), right.clamp(self.grid_start, end))
    }

    pub fn cumulative(&self) -> CumulativeMass<'_> {
        let mut cum = Vec::with_capacity(self.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for v in &self.values {
            acc += v * self.step;
            cum.push(acc);
        }
        CumulativeMass { density: self, cum }
    }
}

/// Prefix sums of bin masses for constant-time interval integrals.
pub struct CumulativeMass<'a> {
    density: &'a GriddedDensity,
    cum: Vec<f64>,
}

impl CumulativeMass<'_> {
    /// Same value as [`GriddedDensity::mass_between`].
    pub fn between(&self, a: f64, b: f64) -> f64 {
        let g = self.density;
        let a = a.max(g.grid_start);
        let b = b.min(g.grid_end());
        if b <= a {
            return 0.0;
        }
        let first = g.bin_index(a);
        let last = g.bin_index(b);
        let partial = |j: usize| {
            let overlap = b.min(g.edge(j + 1)) - a.max(g.edge(j));
            if overlap > 0.0 {
                g.values[j] * overlap
            } else {
                0.0
            }
        };
        if first == last {
            return partial(first);
        }
        partial(first) + (self.cum[last] - self.cum[first + 1]) + partial(last)
    }

    pub fn interval_mass(&self, left: f64, right: f64) -> f64 {
        let g = self.density;
        let (a, b) = g.clamp_interval(left, right);
        if b - a <= EDGE_EPS * g.step {
            g.bin_mass(g.bin_index(a))
        } else {
            self.between(a, b)
        }
    }
}

fn bin_count(frame: &TimeFrame, step: f64) -> usize {
    (((frame.right - frame.left) / step) - EDGE_EPS).ceil().max(1.0) as usize
}

/// Spread each support element's mass uniformly over the grid bins it covers.
///
/// Infinite right ends are clamped to the grid end (`frame.right` rounded up
/// to a whole bin); elements that collapse
/// to a point after clamping put all their mass in the containing bin.
pub fn step_to_grid(est: &StepEstimate, frame: &TimeFrame, step: f64) -> Result<GriddedDensity> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(SiseError::InvalidStep(step));
    }
    let n = bin_count(frame, step);
    let mut grid = GriddedDensity {
        grid_start: frame.left,
        step,
        values: vec![0.0; n],
        bandwidth: 0.0,
        total_mass: 0.0,
    };
    let hi = grid.grid_end();
    let mut last_bin: Option<usize> = None;
    let mut merged = 0usize;
    for (s, &m) in est.support.iter().zip(&est.masses) {
        let l = s.left.clamp(frame.left, hi);
        let r = s.right.clamp(frame.left, hi);
        let first = grid.bin_index(l);
        if last_bin == Some(first) {
            merged += 1;
        }
        if r - l <= EDGE_EPS * step {
            grid.values[first] += m / step;
            last_bin = Some(first);
            continue;
        }
        let end = grid.bin_index(r);
        for j in first..=end {
            let overlap = r.min(grid.edge(j + 1)) - l.max(grid.edge(j));
            if overlap > 0.0 {
                grid.values[j] += m * overlap / (r - l) / step;
            }
        }
        last_bin = Some(end);
    }
    if merged > 0 {
        warn!("{merged} support intervals share a grid bin with a neighbour at step {step}");
    }
    grid.total_mass = step * grid.values.iter().sum::<f64>();
    Ok(grid)
}

/// Survival tabulated at the grid edges `grid_start + j*step`, `j = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    pub grid_start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl SurvivalCurve {
    pub fn tau(&self, j: usize) -> f64 {
        self.grid_start + j as f64 * self.step
    }

    /// Right-continuous step lookup; times beyond the grid map to its ends.
    pub fn at(&self, t: f64) -> f64 {
        if t.is_infinite() {
            return if t > 0.0 { self.values[self.values.len() - 1] } else { self.values[0] };
        }
        let x = ((t - self.grid_start) / self.step + EDGE_EPS).floor();
        let j = if x <= 0.0 {
            0
        } else {
            (x as usize).min(self.values.len() - 1)
        };
        self.values[j]
    }
}

/// `S(tau_j) = total_mass - integral of the density up to tau_j`.
pub fn grid_to_survival(g: &GriddedDensity) -> SurvivalCurve {
    let mut values = Vec::with_capacity(g.len() + 1);
    let mut cum = 0.0;
    values.push(g.total_mass);
    for v in &g.values {
        cum += v * g.step;
        values.push((g.total_mass - cum).max(0.0));
    }
    if let Some(last) = values.last_mut() {
        *last = 0.0;
    }
    SurvivalCurve {
        grid_start: g.grid_start,
        step: g.step,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn iv(l: f64, r: f64) -> CensoredInterval {
        CensoredInterval::new(l, r).unwrap()
    }

    fn four_intervals() -> Vec<CensoredInterval> {
        vec![iv(38.0, 60.0), iv(41.0, 48.0), iv(62.0, f64::INFINITY), iv(0.0, 36.0)]
    }

    /// Brute-force maximal intersections: candidate regions between
    /// consecutive distinct endpoint values (plus the points themselves),
    /// keeping those that are an intersection of observations and minimal.
    fn sweep_oracle(data: &[CensoredInterval]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for a in data {
            for b in data {
                let (l, r) = (a.left, b.right);
                if l > r || (l == r && !(a.is_exact() && b.is_exact())) {
                    continue;
                }
                let contains = |o: &CensoredInterval| {
                    if o.is_exact() {
                        l == r && o.left == l
                    } else {
                        o.left <= l && r <= o.right && !(l == r && (o.left == l || o.right == r))
                    }
                };
                // no endpoint strictly inside (l, r)
                let clean = data.iter().all(|o| {
                    let inside = |x: f64| l < x && x < r;
                    !inside(o.left) && !inside(o.right)
                });
                if clean && data.iter().any(contains) && !out.contains(&(l, r)) {
                    out.push((l, r));
                }
            }
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }

    #[test]
    fn four_interval_cells() {
        let got: Vec<_> = turnbull_intervals(&four_intervals())
            .unwrap()
            .iter()
            .map(|s| (s.left, s.right))
            .collect();
        let expected = vec![(0.0, 36.0), (41.0, 48.0), (62.0, f64::INFINITY)];
        assert_eq!(sweep_oracle(&four_intervals()), expected);
        assert_eq!(got, expected);
    }

    #[test]
    fn single_and_exact_intervals() {
        let got = turnbull_intervals(&[iv(2.0, 5.0)]).unwrap();
        assert_eq!(got, vec![SupportInterval { left: 2.0, right: 5.0 }]);
        let pts = [iv(3.0, 3.0), iv(3.0, 3.0), iv(7.0, 7.0)];
        let got: Vec<_> = turnbull_intervals(&pts)
            .unwrap()
            .iter()
            .map(|s| (s.left, s.right))
            .collect();
        assert_eq!(got, vec![(3.0, 3.0), (7.0, 7.0)]);
    }

    #[test]
    fn open_ends_do_not_overlap_points() {
        // exact 5 is not inside (2, 5)
        let got: Vec<_> = turnbull_intervals(&[iv(2.0, 5.0), iv(5.0, 5.0)])
            .unwrap()
            .iter()
            .map(|s| (s.left, s.right))
            .collect();
        assert_eq!(got, vec![(2.0, 5.0), (5.0, 5.0)]);
    }

    #[test]
    fn four_interval_fit() {
        let frame = TimeFrame::new(35.0, 70.0).unwrap();
        let est = turnbull_fit(&four_intervals(), &frame, EmOptions::default()).unwrap();
        assert!(est.converged);
        let expected = [0.25, 0.5, 0.25];
        for (m, e) in est.masses.iter().zip(expected) {
            assert_abs_diff_eq!(*m, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn distinct_exact_data_is_empirical() {
        let data: Vec<_> = [1.0, 2.5, 4.0, 7.0].iter().map(|&t| iv(t, t)).collect();
        let frame = TimeFrame::new(0.0, 10.0).unwrap();
        let est = turnbull_fit(&data, &frame, EmOptions::default()).unwrap();
        for m in &est.masses {
            assert_abs_diff_eq!(*m, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn km_without_censoring() {
        let obs = [(1.0, true), (2.0, true), (3.0, true), (4.0, true)];
        let frame = TimeFrame::new(0.0, 5.0).unwrap();
        let est = km_fit(&obs, &frame).unwrap();
        let s: Vec<f64> = [1.0, 2.0, 3.0, 4.0].iter().map(|&t| est.survival_at(t)).collect();
        for (a, b) in s.iter().zip([0.75, 0.5, 0.25, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn km_with_censoring_by_hand() {
        // n_j = 5, 4, 2 at the three event times
        let obs = [(1.0, true), (2.0, true), (3.0, false), (4.0, true), (5.0, false)];
        let frame = TimeFrame::new(0.0, 6.0).unwrap();
        let est = km_fit(&obs, &frame).unwrap();
        assert_abs_diff_eq!(est.survival_at(1.0), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(est.survival_at(2.0), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(est.survival_at(4.0), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(est.total_mass(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn km_all_censored() {
        let obs: Vec<_> = (1..=5).map(|t| (t as f64, false)).collect();
        let frame = TimeFrame::new(0.0, 6.0).unwrap();
        let est = km_fit(&obs, &frame).unwrap();
        assert!(est.all_censored);
        for t in [0.0, 1.0, 4.9] {
            assert_eq!(est.survival_at(t), 1.0);
        }
        assert_eq!(km_fit(&[], &frame), Err(SiseError::EmptyData));
    }

    #[test]
    fn uniform_spread_on_grid() {
        let frame = TimeFrame::new(0.0, 1.0).unwrap();
        let est = StepEstimate {
            support: vec![SupportInterval { left: 0.0, right: 1.0 }],
            masses: vec![1.0],
            frame,
            converged: true,
            iterations: 0,
            all_censored: false,
        };
        let g = step_to_grid(&est, &frame, 0.01).unwrap();
        assert_eq!(g.len(), 100);
        for v in &g.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-9);
        }
        let s = grid_to_survival(&g);
        assert_abs_diff_eq!(s.at(0.5), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn point_mass_on_grid() {
        let frame = TimeFrame::new(0.0, 10.0).unwrap();
        let est = StepEstimate {
            support: vec![
                SupportInterval { left: 3.0, right: 3.0 },
                SupportInterval { left: 5.0, right: 6.0 },
            ],
            masses: vec![0.5, 0.5],
            frame,
            converged: true,
            iterations: 0,
            all_censored: false,
        };
        let g = step_to_grid(&est, &frame, 0.01).unwrap();
        let j = g.bin_index(3.0);
        assert_abs_diff_eq!(g.edge(j), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.values[j], 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.bin_mass(j), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn four_interval_grid_reintegration() {
        let frame = TimeFrame::new(35.0, 70.0).unwrap();
        let est = turnbull_fit(&four_intervals(), &frame, EmOptions::default()).unwrap();
        let g = step_to_grid(&est, &frame, 0.01).unwrap();
        assert_abs_diff_eq!(g.total_mass, 1.0, epsilon = 1e-9);
        let pieces = [(35.0, 36.0), (41.0, 48.0), (62.0, 70.0)];
        for ((a, b), m) in pieces.iter().zip(&est.masses) {
            assert_abs_diff_eq!(g.mass_between(*a, *b), *m, epsilon = 1e-9);
        }
    }

    #[test]
    fn survival_with_terminal_mass() {
        let frame = TimeFrame::new(0.0, 1.0).unwrap();
        let mut values = vec![0.0; 100];
        values[99] = 100.0;
        let g = GriddedDensity::new(0.0, 0.01, values, 0.0).unwrap();
        let s = grid_to_survival(&g);
        for j in 0..=99 {
            assert_abs_diff_eq!(s.values[j], 1.0, epsilon = 1e-12);
        }
        assert_eq!(s.at(frame.right), 0.0);
    }

    #[test]
    fn invalid_step() {
        let frame = TimeFrame::new(0.0, 1.0).unwrap();
        let est = km_fit(&[(0.5, true)], &frame).unwrap();
        assert!(matches!(step_to_grid(&est, &frame, 0.0), Err(SiseError::InvalidStep(_))));
    }
}
