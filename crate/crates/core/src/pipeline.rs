//! Raw fit followed by bandwidth selection, as one reusable procedure.

use serde::{Deserialize, Serialize};

use crate::bandwidth::{optimize_bandwidth, BandwidthChoice, OptimizerConfig};
use crate::data::{CensoredInterval, TimeFrame};
use crate::error::Result;
use crate::npmle::{
    grid_to_survival, step_to_grid, turnbull_fit, EmOptions, GriddedDensity, StepEstimate,
    SurvivalCurve, DEFAULT_STEP,
};
use crate::par::Execution;
use crate::smoothing::{PenaltyContext, PenaltyKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPipeline {
    pub step: f64,
    pub penalty: PenaltyKind,
    pub em_tolerance: f64,
    pub em_max_iter: usize,
    /// Bandwidth upper bound; `None` means `frame.right * step`.
    pub max_bandwidth: Option<f64>,
    pub global_budget: usize,
    pub global_population: usize,
    pub local_tol: f64,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for FitPipeline {
    fn default() -> Self {
        let opt = OptimizerConfig::default();
        let em = EmOptions::default();
        Self {
            step: DEFAULT_STEP,
            penalty: PenaltyKind::EquivalentSampleSize,
            em_tolerance: em.tolerance,
            em_max_iter: em.max_iter,
            max_bandwidth: None,
            global_budget: opt.global_budget,
            global_population: opt.global_population,
            local_tol: opt.local_tol,
            seed: 0,
            execution: Execution::Parallel,
        }
    }
}

/// Raw and smoothed estimates of one data set.
#[derive(Debug, Clone)]
pub struct SmoothedFit {
    pub raw: StepEstimate,
    pub raw_grid: GriddedDensity,
    pub raw_survival: SurvivalCurve,
    pub choice: BandwidthChoice,
    pub smoothed_survival: SurvivalCurve,
    pub penalty: PenaltyContext,
}

impl FitPipeline {
    pub fn em_options(&self) -> EmOptions {
        EmOptions {
            tolerance: self.em_tolerance,
            max_iter: self.em_max_iter,
        }
    }

    pub fn optimizer(&self, frame: &TimeFrame) -> OptimizerConfig {
        OptimizerConfig {
            upper: self.max_bandwidth.unwrap_or(frame.right * self.step),
            global_budget: self.global_budget,
            global_population: self.global_population,
            local_tol: self.local_tol,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }

    /// Turnbull fit, gridding, and bandwidth selection.
    pub fn fit(
        &self,
        data: &[CensoredInterval],
        frame: &TimeFrame,
        observation_count: Option<f64>,
    ) -> Result<SmoothedFit> {
        let raw = turnbull_fit(data, frame, self.em_options())?;
        self.smooth_estimate(data, raw, frame, observation_count, self.penalty)
    }

    /// Smooth an existing raw estimate; `data` defines the likelihood.
    pub fn smooth_estimate(
        &self,
        data: &[CensoredInterval],
        raw: StepEstimate,
        frame: &TimeFrame,
        observation_count: Option<f64>,
        penalty: PenaltyKind,
    ) -> Result<SmoothedFit> {
        let raw_grid = step_to_grid(&raw, frame, self.step)?;
        let raw_survival = grid_to_survival(&raw_grid);
        let penalty = PenaltyContext::new(penalty, data, observation_count, &raw_survival)?;
        self.smooth_grid(data, raw, raw_grid, raw_survival, penalty, frame)
    }

    /// Smooth with a fixed bandwidth instead of optimizing it.
    pub fn fit_fixed(
        &self,
        data: &[CensoredInterval],
        frame: &TimeFrame,
        observation_count: Option<f64>,
        bandwidth: f64,
    ) -> Result<SmoothedFit> {
        let raw = turnbull_fit(data, frame, self.em_options())?;
        let fixed = FitPipeline {
            max_bandwidth: Some(0.0),
            ..*self
        };
        let mut fit = fixed.smooth_estimate(data, raw, frame, observation_count, self.penalty)?;
        if bandwidth > 0.0 {
            let smoothed = crate::smoothing::nw_smooth(&fit.raw_grid, bandwidth)?;
            fit.choice.report =
                crate::smoothing::evaluate_bandwidth(data, &smoothed, &fit.penalty)
                    .unwrap_or(fit.choice.report);
            fit.choice.bandwidth = bandwidth;
            fit.smoothed_survival = grid_to_survival(&smoothed);
            fit.choice.smoothed = smoothed;
        }
        Ok(fit)
    }

    fn smooth_grid(
        &self,
        data: &[CensoredInterval],
        raw: StepEstimate,
        raw_grid: GriddedDensity,
        raw_survival: SurvivalCurve,
        penalty: PenaltyContext,
        frame: &TimeFrame,
    ) -> Result<SmoothedFit> {
        let choice = optimize_bandwidth(data, &raw_grid, &penalty, &self.optimizer(frame), self.execution)?;
        let smoothed_survival = grid_to_survival(&choice.smoothed);
        Ok(SmoothedFit {
            raw,
            raw_grid,
            raw_survival,
            choice,
            smoothed_survival,
            penalty,
        })
    }
}
