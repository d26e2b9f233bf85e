//! Repeated 50-50 split-sample evaluation on a real data set: fit on one half,
//! score imputation on both halves, and compare the fitted survival curve with
//! a reference curve from the whole sample.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluation_grid, median, relative_change, rise_values, rmse_imputation};
use super::scenario::MethodMetrics;
use crate::data::{CensoredInterval, TimeFrame};
use crate::error::{Result, SiseError};
use crate::inference::impute_event_time;
use crate::npmle::{km_fit, turnbull_fit, GriddedDensity, StepEstimate};
use crate::par::{derive_seed, map_range, Execution};
use crate::pipeline::FitPipeline;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitInput {
    pub intervals: Vec<CensoredInterval>,
    pub observation_counts: Option<Vec<usize>>,
    /// Earliest and latest observation time of each individual.
    pub spans: Vec<(f64, f64)>,
    /// Independently reported event time, `None` for individuals without one.
    pub reference_onsets: Option<Vec<Option<f64>>>,
}

impl SplitInput {
    /// Spans derived from the intervals alone when the raw visits are unknown.
    pub fn from_intervals(intervals: Vec<CensoredInterval>) -> Self {
        let spans = intervals
            .iter()
            .map(|iv| {
                let lo = if iv.left > 0.0 || !iv.right.is_finite() { iv.left } else { iv.right };
                let hi = if iv.right.is_finite() { iv.right } else { iv.left };
                (lo, hi)
            })
            .collect();
        Self {
            intervals,
            observation_counts: None,
            spans,
            reference_onsets: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub split: usize,
    pub raw: MethodMetrics,
    pub smoothed: MethodMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    /// `kaplan_meier_reference_onsets` or `turnbull_full_sample`.
    pub reference: String,
    pub splits: Vec<SplitMetrics>,
    pub median_change_rise: Option<f64>,
    pub median_change_rmse_w: Option<f64>,
    pub median_change_rmse_o: Option<f64>,
}

fn reference_curve(input: &SplitInput, pipeline: &FitPipeline) -> Result<(StepEstimate, &'static str)> {
    let all = span_frame(input, &(0..input.intervals.len()).collect::<Vec<_>>())?;
    match &input.reference_onsets {
        Some(onsets) => {
            let obs: Vec<(f64, bool)> = input
                .intervals
                .iter()
                .zip(onsets)
                .map(|(iv, x)| match x {
                    Some(x) => (*x, true),
                    None => (iv.left, false),
                })
                .collect();
            Ok((km_fit(&obs, &all)?, "kaplan_meier_reference_onsets"))
        }
        None => Ok((turnbull_fit(&input.intervals, &all, pipeline.em_options())?, "turnbull_full_sample")),
    }
}

fn span_frame(input: &SplitInput, idx: &[usize]) -> Result<TimeFrame> {
    let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
        let (a, b) = input.spans[i];
        (lo.min(a), hi.max(b))
    });
    if lo > hi {
        return Err(SiseError::EmptyData);
    }
    TimeFrame::new(lo, hi)
}

fn rmse(input: &SplitInput, g: &GriddedDensity, idx: &[usize]) -> Result<Option<f64>> {
    let Some(onsets) = &input.reference_onsets else {
        return Ok(None);
    };
    let (mut imputed, mut truth) = (Vec::new(), Vec::new());
    for &i in idx {
        let iv = input.intervals[i];
        if let (true, Some(x)) = (iv.is_interval_censored(0.0), onsets[i]) {
            imputed.push(impute_event_time(&iv, g, None).unwrap_or(0.5 * (iv.left + iv.right)));
            truth.push(x);
        }
    }
    if imputed.is_empty() {
        return Ok(None);
    }
    rmse_imputation(&imputed, &truth).map(Some)
}

/// Run `splits` random halvings of `input`.
pub fn run_split(input: &SplitInput, pipeline: &FitPipeline, splits: usize, seed: u64, execution: Execution) -> Result<SplitReport> {
    let n = input.intervals.len();
    if n < 4 {
        return Err(SiseError::EmptyData);
    }
    if input.spans.len() != n {
        return Err(SiseError::LengthMismatch(n, input.spans.len()));
    }
    let (reference, label) = reference_curve(input, pipeline)?;
    let inner = FitPipeline {
        execution: Execution::Sequential,
        ..*pipeline
    };
    let results = map_range(splits, execution, |s| -> Result<SplitMetrics> {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[s as u64])));
        let (fit_idx, held_idx) = order.split_at(n / 2);
        let frame = span_frame(input, fit_idx)?;
        let data: Vec<_> = fit_idx.iter().map(|&i| input.intervals[i]).collect();
        let obs = input
            .observation_counts
            .as_ref()
            .map(|c| fit_idx.iter().map(|&i| c[i] as f64).sum());
        let fit = FitPipeline {
            seed: derive_seed(seed, &[s as u64, 1]),
            ..inner
        }
        .fit(&data, &frame, obs)?;
        let grid = evaluation_grid(&fit.raw_survival);
        let truth: Vec<f64> = grid.iter().map(|&t| reference.survival_at(t)).collect();
        let score = |g: &GriddedDensity, values: &[f64], bandwidth| -> Result<MethodMetrics> {
            Ok(MethodMetrics {
                rise: rise_values(&values[..grid.len()], &truth, 1.0)?,
                rmse_w: rmse(input, g, fit_idx)?,
                rmse_o: rmse(input, g, held_idx)?,
                bandwidth,
            })
        };
        Ok(SplitMetrics {
            split: s,
            raw: score(&fit.raw_grid, &fit.raw_survival.values, 0.0)?,
            smoothed: score(&fit.choice.smoothed, &fit.smoothed_survival.values, fit.choice.bandwidth)?,
        })
    });
    let splits = results
        .into_iter()
        .enumerate()
        .map(|(s, r)| r.map_err(|e| SiseError::Replicate { replicate: s, source: Box::new(e) }))
        .collect::<Result<Vec<_>>>()?;
    let change = |f: fn(&MethodMetrics) -> Option<f64>| {
        let rel: Vec<f64> = splits
            .iter()
            .filter_map(|s| Some(relative_change(f(&s.raw)?, f(&s.smoothed)?)))
            .collect();
        median(&rel)
    };
    Ok(SplitReport {
        reference: label.to_string(),
        median_change_rise: change(|m| Some(m.rise)),
        median_change_rmse_w: change(|m| m.rmse_w),
        median_change_rmse_o: change(|m| m.rmse_o),
        splits,
    })
}
