use std::io::Write;

use serde::{Deserialize, Serialize};

use super::cohort::{simulate_cohort, true_survival, SimulatedCohort};
use super::config::ScenarioConfig;
use super::metrics::{evaluation_grid, identified_range, mean, median, relative_change, rise, rmse_imputation};
use crate::data::{estimate_time_frame, CensoredInterval, TimeFrame};
use crate::error::{Result, SiseError};
use crate::inference::{bootstrap_bands, impute_event_time, BootstrapOptions, ConfidenceBands};
use crate::npmle::{km_fit, GriddedDensity};
use crate::par::{derive_seed, map_range, Execution};
use crate::pipeline::FitPipeline;
use crate::smoothing::PenaltyKind;

pub const METHODS: [&str; 4] = ["tb_raw", "tb_smoothed", "km_raw", "km_smoothed"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub rise: f64,
    pub rmse_w: Option<f64>,
    pub rmse_o: Option<f64>,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    /// Share of identified grid points inside the raw band.
    pub raw: f64,
    pub smoothed: f64,
    /// The same over the whole evaluation grid.
    pub raw_full_grid: f64,
    pub smoothed_full_grid: f64,
    /// Share of the evaluation grid that is identified.
    pub identified_fraction: f64,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateMetrics {
    pub replicate: usize,
    pub tb_raw: MethodMetrics,
    pub tb_smoothed: MethodMetrics,
    pub km_raw: MethodMetrics,
    pub km_smoothed: MethodMetrics,
    pub interval_censored: usize,
    pub out_of_sample_interval_censored: usize,
    /// Out-of-sample intervals outside the fitted frame, imputed at their midpoint.
    pub midpoint_fallbacks: usize,
    pub coverage: Option<Coverage>,
}

impl ReplicateMetrics {
    pub fn method(&self, name: &str) -> Option<&MethodMetrics> {
        match name {
            "tb_raw" => Some(&self.tb_raw),
            "tb_smoothed" => Some(&self.tb_smoothed),
            "km_raw" => Some(&self.km_raw),
            "km_smoothed" => Some(&self.km_smoothed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub arise: Option<f64>,
    pub armse_w: Option<f64>,
    pub armse_o: Option<f64>,
    pub mean_bandwidth: Option<f64>,
}

/// Smoothed versus raw for one estimator and one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeSummary {
    pub estimator: String,
    pub metric: String,
    /// Median over replicates of `(smoothed - raw) / raw`.
    pub median_change: Option<f64>,
    pub min_change: Option<f64>,
    pub max_change: Option<f64>,
    /// Relative change of the replicate averages.
    pub change_of_means: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub mean_raw: f64,
    pub sd_raw: f64,
    pub mean_smoothed: f64,
    pub sd_smoothed: f64,
    pub mean_raw_full_grid: f64,
    pub mean_smoothed_full_grid: f64,
    pub excluded_replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub config: ScenarioConfig,
    pub replicates: Vec<ReplicateMetrics>,
    pub methods: Vec<MethodSummary>,
    pub changes: Vec<ChangeSummary>,
    pub coverage: Option<CoverageSummary>,
}

impl ScenarioReport {
    pub fn change(&self, estimator: &str, metric: &str) -> Option<&ChangeSummary> {
        self.changes
            .iter()
            .find(|c| c.estimator == estimator && c.metric == metric)
    }

    pub fn summary(&self, method: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }
}

fn metric_of(m: &MethodMetrics, metric: &str) -> Option<f64> {
    match metric {
        "rise" => Some(m.rise),
        "rmse_w" => m.rmse_w,
        "rmse_o" => m.rmse_o,
        "bandwidth" => Some(m.bandwidth),
        _ => None,
    }
}

/// Impute each interval under `g`; intervals the grid cannot cover fall back
/// to their midpoint. Returns the imputations and the fallback count.
fn impute_all(g: &GriddedDensity, intervals: &[CensoredInterval]) -> (Vec<f64>, usize) {
    let mut fallbacks = 0;
    let values = intervals
        .iter()
        .map(|iv| {
            impute_event_time(iv, g, None).unwrap_or_else(|_| {
                fallbacks += 1;
                0.5 * (iv.left + iv.right)
            })
        })
        .collect();
    (values, fallbacks)
}

fn rmse_for(g: &GriddedDensity, cohort: &SimulatedCohort, idx: &[usize]) -> Result<(Option<f64>, usize)> {
    if idx.is_empty() {
        return Ok((None, 0));
    }
    let intervals: Vec<_> = idx.iter().map(|&i| cohort.intervals[i]).collect();
    let truth: Vec<_> = idx.iter().map(|&i| cohort.true_onsets[i]).collect();
    let (imputed, fallbacks) = impute_all(g, &intervals);
    Ok((Some(rmse_imputation(&imputed, &truth)?), fallbacks))
}

fn coverage_fraction(bands: &ConfidenceBands, truth: &[f64], points: &[usize]) -> f64 {
    if points.is_empty() {
        return f64::NAN;
    }
    let inside = points.iter().filter(|&&j| bands.contains(j, truth[j])).count();
    inside as f64 / points.len() as f64
}

/// Fitting settings shared by every replicate of `cfg`.
pub fn scenario_pipeline(cfg: &ScenarioConfig) -> FitPipeline {
    FitPipeline {
        step: cfg.delta_t,
        penalty: cfg.penalty,
        ..FitPipeline::default()
    }
}

/// Simulate and evaluate replicate `r` of `cfg`.
pub fn run_replicate(cfg: &ScenarioConfig, r: usize, execution: Execution) -> Result<ReplicateMetrics> {
    let base = FitPipeline {
        seed: derive_seed(cfg.seed, &[r as u64, 2]),
        execution,
        ..scenario_pipeline(cfg)
    };
    let est = simulate_cohort(cfg, derive_seed(cfg.seed, &[r as u64, 0]))?;
    let oos = simulate_cohort(cfg, derive_seed(cfg.seed, &[r as u64, 1]))?;
    let frame = estimate_time_frame(&est.records)?;
    let obs = Some(est.observation_counts.iter().sum::<usize>() as f64);

    let tb = base.fit(&est.intervals, &frame, obs)?;
    let km_obs = est.km_observations();
    let km_data = km_obs
        .iter()
        .map(|&(t, event)| {
            if event {
                CensoredInterval::exact(t)
            } else {
                CensoredInterval::right_censored(t)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let km_raw = km_fit(&km_obs, &frame)?;
    let km_penalty = match cfg.penalty {
        PenaltyKind::ObservationCount => PenaltyKind::ObservationCount,
        _ => PenaltyKind::EquivalentSampleSize,
    };
    let km = base.smooth_estimate(&km_data, km_raw, &frame, obs, km_penalty)?;

    let truth = |t: f64| true_survival(cfg, t);
    let p = cfg.prevalence;
    let in_idx = est.interval_censored();
    let out_idx = oos.interval_censored();
    let mut fallbacks = 0;
    let mut evaluate = |g: &GriddedDensity, surv, bandwidth: f64, in_sample: bool| -> Result<MethodMetrics> {
        let rmse_w = if in_sample { rmse_for(g, &est, &in_idx)?.0 } else { None };
        let (rmse_o, fb) = rmse_for(g, &oos, &out_idx)?;
        fallbacks = fallbacks.max(fb);
        Ok(MethodMetrics {
            rise: rise(surv, truth, p)?,
            rmse_w,
            rmse_o,
            bandwidth,
        })
    };
    let tb_raw = evaluate(&tb.raw_grid, &tb.raw_survival, 0.0, true)?;
    let tb_smoothed = evaluate(&tb.choice.smoothed, &tb.smoothed_survival, tb.choice.bandwidth, true)?;
    let km_raw = evaluate(&km.raw_grid, &km.raw_survival, 0.0, false)?;
    let km_smoothed = evaluate(&km.choice.smoothed, &km.smoothed_survival, km.choice.bandwidth, false)?;

    let coverage = match cfg.bootstrap {
        Some(b) => Some(replicate_coverage(cfg, r, &est, &frame, &tb, b.replicates, b.reuse_bandwidth, execution)?),
        None => None,
    };

    Ok(ReplicateMetrics {
        replicate: r,
        tb_raw,
        tb_smoothed,
        km_raw,
        km_smoothed,
        interval_censored: in_idx.len(),
        out_of_sample_interval_censored: out_idx.len(),
        midpoint_fallbacks: fallbacks,
        coverage,
    })
}

#[allow(clippy::too_many_arguments)]
fn replicate_coverage(
    cfg: &ScenarioConfig,
    r: usize,
    est: &SimulatedCohort,
    frame: &TimeFrame,
    tb: &crate::pipeline::SmoothedFit,
    replicates: usize,
    reuse: bool,
    execution: Execution,
) -> Result<Coverage> {
    let opts = BootstrapOptions {
        replicates,
        seed: derive_seed(cfg.seed, &[r as u64, 3]),
        fixed_bandwidth: reuse.then_some(tb.choice.bandwidth),
        execution,
    };
    let bands = bootstrap_bands(&est.sample(), frame, &scenario_pipeline(cfg), &opts)?;
    let truth: Vec<f64> = evaluation_grid(&tb.raw_survival)
        .iter()
        .map(|&t| true_survival(cfg, t))
        .collect();
    let all: Vec<usize> = (0..truth.len()).collect();
    let identified = identified_range(&tb.raw_survival);
    Ok(Coverage {
        raw: coverage_fraction(&bands.raw, &truth, &identified),
        smoothed: coverage_fraction(&bands.smoothed, &truth, &identified),
        raw_full_grid: coverage_fraction(&bands.raw, &truth, &all),
        smoothed_full_grid: coverage_fraction(&bands.smoothed, &truth, &all),
        identified_fraction: identified.len() as f64 / all.len() as f64,
        excluded: bands.excluded,
    })
}

fn sd(values: &[f64]) -> f64 {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Aggregate per-replicate metrics into averages and smoothed-vs-raw changes.
pub fn summarize(config: ScenarioConfig, replicates: Vec<ReplicateMetrics>) -> ScenarioReport {
    let collect = |method: &str, metric: &str| -> Vec<f64> {
        replicates
            .iter()
            .filter_map(|r| r.method(method).and_then(|m| metric_of(m, metric)))
            .collect()
    };
    let methods = METHODS
        .iter()
        .map(|&m| MethodSummary {
            method: m.to_string(),
            arise: mean(&collect(m, "rise")),
            armse_w: mean(&collect(m, "rmse_w")),
            armse_o: mean(&collect(m, "rmse_o")),
            mean_bandwidth: mean(&collect(m, "bandwidth")),
        })
        .collect();

    let mut changes = Vec::new();
    for estimator in ["tb", "km"] {
        let (raw, smooth) = (format!("{estimator}_raw"), format!("{estimator}_smoothed"));
        for metric in ["rise", "rmse_w", "rmse_o"] {
            let pairs: Vec<(f64, f64)> = replicates
                .iter()
                .filter_map(|r| {
                    let a = metric_of(r.method(&raw)?, metric)?;
                    let b = metric_of(r.method(&smooth)?, metric)?;
                    Some((a, b))
                })
                .collect();
            if pairs.is_empty() {
                continue;
            }
            let rel: Vec<f64> = pairs.iter().map(|&(a, b)| relative_change(a, b)).collect();
            let finite: Vec<f64> = rel.iter().copied().filter(|x| x.is_finite()).collect();
            let raw_mean = pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len() as f64;
            let smooth_mean = pairs.iter().map(|p| p.1).sum::<f64>() / pairs.len() as f64;
            changes.push(ChangeSummary {
                estimator: estimator.to_string(),
                metric: metric.to_string(),
                median_change: median(&finite),
                min_change: finite.iter().copied().reduce(f64::min),
                max_change: finite.iter().copied().reduce(f64::max),
                change_of_means: Some(relative_change(raw_mean, smooth_mean)).filter(|x| x.is_finite()),
            });
        }
    }

    let cov: Vec<Coverage> = replicates.iter().filter_map(|r| r.coverage).collect();
    let coverage = (!cov.is_empty()).then(|| {
        let pick = |f: fn(&Coverage) -> f64| -> Vec<f64> { cov.iter().map(f).filter(|x| x.is_finite()).collect() };
        let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (raw, smooth) = (pick(|c| c.raw), pick(|c| c.smoothed));
        CoverageSummary {
            mean_raw: avg(&raw),
            sd_raw: sd(&raw),
            mean_smoothed: avg(&smooth),
            sd_smoothed: sd(&smooth),
            mean_raw_full_grid: avg(&pick(|c| c.raw_full_grid)),
            mean_smoothed_full_grid: avg(&pick(|c| c.smoothed_full_grid)),
            excluded_replicates: cov.iter().map(|c| c.excluded).sum(),
        }
    });

    ScenarioReport {
        config,
        replicates,
        methods,
        changes,
        coverage,
    }
}

/// Run every replicate of `cfg`. Replicates run concurrently under
/// `Execution::Parallel`; results do not depend on the schedule.
pub fn run_scenario(cfg: &ScenarioConfig, execution: Execution) -> Result<ScenarioReport> {
    cfg.validate()?;
    let inner = if cfg.replicates > 1 { Execution::Sequential } else { execution };
    let results = map_range(cfg.replicates, execution, |r| {
        run_replicate(cfg, r, inner).map_err(|e| SiseError::Replicate {
            replicate: r,
            source: Box::new(e),
        })
    });
    let replicates = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(summarize(*cfg, replicates))
}

/// Long-format table `replicate,method,metric,value`.
pub fn write_long_csv<W: Write>(w: W, report: &ScenarioReport) -> std::result::Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["replicate", "method", "metric", "value"])?;
    for r in &report.replicates {
        let rep = r.replicate.to_string();
        for method in METHODS {
            let m = r.method(method).expect("known method");
            for metric in ["rise", "rmse_w", "rmse_o", "bandwidth"] {
                if let Some(v) = metric_of(m, metric) {
                    out.write_record([rep.as_str(), method, metric, &v.to_string()])?;
                }
            }
        }
        if let Some(c) = r.coverage {
            out.write_record([rep.as_str(), "tb_raw", "coverage", &c.raw.to_string()])?;
            out.write_record([rep.as_str(), "tb_smoothed", "coverage", &c.smoothed.to_string()])?;
            out.write_record([rep.as_str(), "tb_raw", "coverage_full_grid", &c.raw_full_grid.to_string()])?;
            out.write_record([rep.as_str(), "tb_smoothed", "coverage_full_grid", &c.smoothed_full_grid.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}
