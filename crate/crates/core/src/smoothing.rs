//! Kernel smoothing of a gridded density and the pieces of the smoothing
//! objective: turning points, equivalent sample size, interval-censored
//! log-likelihood and the penalized criterion that combines them.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::data::CensoredInterval;
use crate::error::{Result, SiseError};
use crate::npmle::{GriddedDensity, SurvivalCurve};

/// Kernel support in units of the bandwidth; weights beyond are below 1e-17.
const KERNEL_CUTOFF: f64 = 9.0;

/// Direct summation is used while `nonzero bins * kernel width` stays below this.
const DIRECT_WORK_LIMIT: usize = 1 << 18;

pub const DEFAULT_TURNING_THRESHOLD: f64 = 0.01;

fn kernel_weights(step: f64, d: f64, n: usize) -> Vec<f64> {
    let half = ((KERNEL_CUTOFF * d / step).ceil() as usize).min(n.saturating_sub(1));
    (0..=half)
        .map(|k| {
            let x = k as f64 * step / d;
            (-0.5 * x * x).exp()
        })
        .collect()
}

/// `sum_k K((tau_j - tau_k)/d)` over the grid, from prefix sums of the weights.
fn denominators(w: &[f64], n: usize) -> Vec<f64> {
    let half = w.len() - 1;
    let mut cum = Vec::with_capacity(w.len());
    let mut acc = 0.0;
    for v in w {
        acc += v;
        cum.push(acc);
    }
    (0..n)
        .map(|j| cum[half.min(j)] + cum[half.min(n - 1 - j)] - w[0])
        .collect()
}

fn finish(g: &GriddedDensity, d: f64, mut out: Vec<f64>) -> GriddedDensity {
    for v in &mut out {
        if !(*v > 0.0) {
            *v = 0.0;
        }
    }
    let mass = g.step * out.iter().sum::<f64>();
    if mass > 0.0 {
        let scale = g.total_mass / mass;
        out.iter_mut().for_each(|v| *v *= scale);
    }
    GriddedDensity {
        grid_start: g.grid_start,
        step: g.step,
        total_mass: g.step * out.iter().sum::<f64>(),
        values: out,
        bandwidth: d,
    }
}

fn smooth_direct(g: &GriddedDensity, w: &[f64]) -> Vec<f64> {
    let n = g.len();
    let half = w.len() - 1;
    let mut num = vec![0.0; n];
    for (k, &v) in g.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let lo = k.saturating_sub(half);
        let hi = (k + half).min(n - 1);
        for (j, slot) in num.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *slot += w[j.abs_diff(k)] * v;
        }
    }
    num
}

/// Nadaraya-Watson smoothing with a standard normal kernel of bandwidth `d`,
/// renormalized to the input's total mass. `d == 0` returns the input.
pub fn nw_smooth(g: &GriddedDensity, d: f64) -> Result<GriddedDensity> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(SiseError::NegativeBandwidth(d));
    }
    if d == 0.0 {
        return Ok(g.clone());
    }
    let w = kernel_weights(g.step, d, g.len());
    let nonzero = g.values.iter().filter(|v| **v != 0.0).count();
    if nonzero * (2 * w.len() - 1) <= DIRECT_WORK_LIMIT {
        let num = smooth_direct(g, &w);
        let den = denominators(&w, g.len());
        let out = num.iter().zip(&den).map(|(a, b)| a / b).collect();
        Ok(finish(g, d, out))
    } else {
        Ok(Smoother::new(g).smooth(d))
    }
}

/// Reusable smoother for one density across many bandwidths; the spectrum
/// of the input is computed once.
pub struct Smoother {
    raw: GriddedDensity,
    spectrum: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Smoother {
    pub fn new(raw: &GriddedDensity) -> Self {
        let n = raw.len();
        let size = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut spectrum: Vec<Complex<f64>> = raw
            .values
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(size)
            .collect();
        forward.process(&mut spectrum);
        Self {
            raw: raw.clone(),
            spectrum,
            forward,
            inverse,
        }
    }

    pub fn raw(&self) -> &GriddedDensity {
        &self.raw
    }

    /// Same contract as [`nw_smooth`] for a non-negative finite `d`.
    pub fn smooth(&self, d: f64) -> GriddedDensity {
        if d == 0.0 {
            return self.raw.clone();
        }
        let n = self.raw.len();
        let size = self.spectrum.len();
        let w = kernel_weights(self.raw.step, d, n);
        let nonzero = self.raw.values.iter().filter(|v| **v != 0.0).count();
        let den = denominators(&w, n);
        let num = if nonzero * (2 * w.len() - 1) <= DIRECT_WORK_LIMIT {
            smooth_direct(&self.raw, &w)
        } else {
            let mut kern = vec![Complex::new(0.0, 0.0); size];
            for (k, &v) in w.iter().enumerate() {
                kern[k].re = v;
                if k > 0 {
                    kern[size - k].re = v;
                }
            }
            self.forward.process(&mut kern);
            for (a, b) in kern.iter_mut().zip(&self.spectrum) {
                *a *= b;
            }
            self.inverse.process(&mut kern);
            let norm = 1.0 / size as f64;
            kern.iter().take(n).map(|c| c.re * norm).collect()
        };
        let out = num.iter().zip(&den).map(|(a, b)| a / b).collect();
        finish(&self.raw, d, out)
    }
}

/// Number of sign changes of the bin-to-bin differences.
///
/// Differences smaller than `threshold` times the mean absolute difference
/// count as flat. A flat run between two non-flat differences counts as one
/// turning point whatever the signs on either side; flat runs at the ends
/// count as none.
pub fn count_turning_points_with(g: &GriddedDensity, threshold: f64) -> Result<usize> {
    let n = g.len();
    if n < 3 {
        return Err(SiseError::TooFewBins(n));
    }
    let diffs: Vec<f64> = g.values.windows(2).map(|w| w[1] - w[0]).collect();
    let mean_abs = diffs.iter().map(|d| d.abs()).sum::<f64>() / diffs.len() as f64;
    let cut = threshold * mean_abs;

    let mut count = 0;
    let mut prev: Option<i8> = None;
    let mut flat_since_prev = false;
    for &d in &diffs {
        let sign = if d.abs() < cut || d == 0.0 {
            0
        } else if d > 0.0 {
            1
        } else {
            -1
        };
        if sign == 0 {
            flat_since_prev = true;
            continue;
        }
        if let Some(p) = prev {
            if flat_since_prev || p != sign {
                count += 1;
            }
        }
        prev = Some(sign);
        flat_since_prev = false;
    }
    Ok(count)
}

pub fn count_turning_points(g: &GriddedDensity) -> Result<usize> {
    count_turning_points_with(g, DEFAULT_TURNING_THRESHOLD)
}

/// `N_e = sum_i [1 - (S(L_i) - S(R_i))]`, endpoints clamped to the grid.
pub fn effective_sample_size(data: &[CensoredInterval], survival: &SurvivalCurve) -> f64 {
    data.iter()
        .map(|iv| {
            let n_i = if iv.is_exact() {
                1.0
            } else {
                1.0 - (survival.at(iv.left) - survival.at(iv.right))
            };
            f64::from(iv.multiplicity) * n_i
        })
        .sum()
}

/// `ln L = sum_i m_i ln f(L_i, R_i)`: the density value for exact observations,
/// the integral over `(L_i, R_i)` otherwise, both divided by `truncation_prob`.
pub fn interval_log_likelihood(
    data: &[CensoredInterval],
    g: &GriddedDensity,
    truncation_prob: f64,
) -> Result<f64> {
    if !(truncation_prob > 0.0 && truncation_prob <= 1.0) {
        return Err(SiseError::InvalidTruncationProbability(truncation_prob));
    }
    if !(g.total_mass > 0.0) {
        return Err(SiseError::DegenerateDensity("zero total mass"));
    }
    let cum = g.cumulative();
    let log_p = truncation_prob.ln();
    let mut total = 0.0;
    for (index, iv) in data.iter().enumerate() {
        let f = if iv.is_exact() {
            g.value_at(iv.left)
        } else {
            cum.interval_mass(iv.left, iv.right)
        };
        if !(f > 0.0) {
            return Err(SiseError::ZeroLikelihoodObservation {
                index,
                left: iv.left,
                right: iv.right,
            });
        }
        total += f64::from(iv.multiplicity) * (f.ln() - log_p);
    }
    Ok(total)
}

/// Choice of `N_s` in the penalty weight `ln N_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum PenaltyKind {
    /// `ln N`
    #[serde(rename = "n")]
    SampleSize,
    /// `ln sum_i m_i`
    #[serde(rename = "nm")]
    ObservationCount,
    /// `ln N_e`
    #[default]
    #[serde(rename = "ne")]
    EquivalentSampleSize,
}

impl PenaltyKind {
    pub fn label(&self) -> &'static str {
        match self {
            PenaltyKind::SampleSize => "n",
            PenaltyKind::ObservationCount => "nm",
            PenaltyKind::EquivalentSampleSize => "ne",
        }
    }
}

impl std::str::FromStr for PenaltyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "n" => Ok(PenaltyKind::SampleSize),
            "nm" => Ok(PenaltyKind::ObservationCount),
            "ne" => Ok(PenaltyKind::EquivalentSampleSize),
            _ => Err(format!("unknown penalty `{s}` (expected n, nm or ne)")),
        }
    }
}

/// Everything needed to resolve `ln N_s` for one data set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyContext {
    pub kind: PenaltyKind,
    /// Number of individuals.
    pub sample_size: f64,
    /// Total number of raw observations, when known.
    pub observation_count: Option<f64>,
    /// Equivalent sample size from the raw fit.
    pub effective_size: Option<f64>,
}

impl PenaltyContext {
    pub fn new(
        kind: PenaltyKind,
        data: &[CensoredInterval],
        observation_count: Option<f64>,
        raw_survival: &SurvivalCurve,
    ) -> Result<Self> {
        if data.is_empty() {
            return Err(SiseError::EmptyData);
        }
        if kind == PenaltyKind::ObservationCount && observation_count.is_none() {
            return Err(SiseError::MissingObservationCounts);
        }
        Ok(Self {
            kind,
            sample_size: CensoredInterval::total_weight(data),
            observation_count,
            effective_size: Some(effective_sample_size(data, raw_survival)),
        })
    }

    /// `N_s` before taking the logarithm.
    pub fn base(&self) -> Result<f64> {
        match self.kind {
            PenaltyKind::SampleSize => Ok(self.sample_size),
            PenaltyKind::ObservationCount => {
                self.observation_count.ok_or(SiseError::MissingObservationCounts)
            }
            PenaltyKind::EquivalentSampleSize => self
                .effective_size
                .ok_or(SiseError::DegenerateDensity("equivalent sample size not computed")),
        }
    }
}

/// Components of the smoothing criterion at one bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub bandwidth: f64,
    pub log_likelihood: f64,
    pub turning_points: usize,
    pub penalty_weight: f64,
    pub bic_s: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_e: Option<f64>,
    /// `ln N_s` was non-positive and floored at 0.
    #[serde(default)]
    pub penalty_floored: bool,
}

/// `BIC_s = -2 ln L + k_T ln N_s`.
pub fn bic_s(
    bandwidth: f64,
    log_likelihood: f64,
    turning_points: usize,
    penalty: &PenaltyContext,
) -> Result<FitReport> {
    let base = penalty.base()?;
    let raw_weight = base.ln();
    let penalty_floored = !(raw_weight > 0.0);
    if penalty_floored {
        log::warn!("penalty base N_s = {base} gives ln N_s <= 0; using 0");
    }
    let penalty_weight = if penalty_floored { 0.0 } else { raw_weight };
    Ok(FitReport {
        bandwidth,
        log_likelihood,
        turning_points,
        penalty_weight,
        bic_s: -2.0 * log_likelihood + turning_points as f64 * penalty_weight,
        n_e: penalty.effective_size,
        penalty_floored,
    })
}

/// Smooth, then score: the objective evaluated at one bandwidth.
pub fn evaluate_bandwidth(
    data: &[CensoredInterval],
    smoothed: &GriddedDensity,
    penalty: &PenaltyContext,
) -> Result<FitReport> {
    let k_t = count_turning_points(smoothed)?;
    let loglik = interval_log_likelihood(data, smoothed, 1.0)?;
    bic_s(smoothed.bandwidth, loglik, k_t, penalty)
}
