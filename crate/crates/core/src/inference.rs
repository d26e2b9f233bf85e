//! Uses of a fitted density: imputing censored event times, bootstrap
//! confidence bands for the survival curve, and prevalence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{CensoredInterval, CensoredSample, TimeFrame};
use crate::error::{Result, SiseError};
use crate::npmle::GriddedDensity;
use crate::par::{derive_seed, map_range, Execution};
use crate::pipeline::FitPipeline;

/// Default zero-inflation level relative to the mean density `total_mass / step`.
pub const DEFAULT_INFLATION: f64 = 1e-12;

/// Conditional mean of the event time inside `iv` under `g`.
///
/// Bins below `eps` (default `1e-12 * total_mass / step`) are raised to `eps`
/// so that intervals over zero-density regions still get an estimate. Each
/// bin contributes at the midpoint of its overlap with the interval, which
/// keeps the result strictly inside `(left, right)`.
pub fn impute_event_time(iv: &CensoredInterval, g: &GriddedDensity, eps: Option<f64>) -> Result<f64> {
    if iv.is_exact() {
        return Ok(iv.left);
    }
    let eps = eps.unwrap_or(DEFAULT_INFLATION * g.total_mass / g.step);
    let (a, b) = g.clamp_interval(iv.left, iv.right);
    if !(b - a > 1e-9 * g.step) {
        return Err(SiseError::EmptyInterval {
            left: iv.left,
            right: iv.right,
        });
    }
    let (first, last) = (g.bin_index(a), g.bin_index(b));
    let mut weight = 0.0;
    let mut moment = 0.0;
    for j in first..=last {
        let lo = a.max(g.edge(j));
        let hi = b.min(g.edge(j + 1));
        if hi <= lo {
            continue;
        }
        let w = g.values[j].max(eps) * (hi - lo);
        weight += w;
        moment += w * 0.5 * (lo + hi);
    }
    if !(weight > 0.0) {
        return Err(SiseError::EmptyInterval {
            left: iv.left,
            right: iv.right,
        });
    }
    Ok(moment / weight)
}

/// Pointwise bootstrap percentile band for a survival curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBands {
    pub tau: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Number of replicates the band is built from.
    pub replicates: usize,
}

impl ConfidenceBands {
    pub fn contains(&self, j: usize, value: f64) -> bool {
        self.lower[j] <= value && value <= self.upper[j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapBands {
    pub raw: ConfidenceBands,
    pub smoothed: ConfidenceBands,
    pub requested: usize,
    pub excluded: usize,
    pub bandwidths: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub seed: u64,
    /// Reuse this bandwidth for every resample instead of re-optimizing.
    pub fixed_bandwidth: Option<f64>,
    pub execution: Execution,
}

/// Sample quantile with linear interpolation between order statistics
/// (the common "type 7" definition). `sorted` must be ascending.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn bands(curves: &[Vec<f64>], tau: &[f64]) -> ConfidenceBands {
    let m = tau.len();
    let mut lower = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m);
    let mut column = Vec::with_capacity(curves.len());
    for j in 0..m {
        column.clear();
        column.extend(curves.iter().map(|c| c[j]));
        column.sort_by(f64::total_cmp);
        lower.push(quantile_sorted(&column, 0.025).clamp(0.0, 1.0));
        upper.push(quantile_sorted(&column, 0.975).clamp(0.0, 1.0));
    }
    ConfidenceBands {
        tau: tau.to_vec(),
        lower,
        upper,
        replicates: curves.len(),
    }
}

/// Resample individuals with replacement, refit raw and smoothed estimates on
/// the common `frame`, and take pointwise 2.5% and 97.5% quantiles of the
/// survival curves. Replicate `r` draws from seed `(seed, r)`, so the result
/// does not depend on scheduling. Replicates whose fit fails or does not
/// converge are dropped and counted.
pub fn bootstrap_bands(
    sample: &CensoredSample,
    frame: &TimeFrame,
    pipeline: &FitPipeline,
    opts: &BootstrapOptions,
) -> Result<BootstrapBands> {
    if opts.replicates < 2 {
        return Err(SiseError::TooFewReplicates(opts.replicates));
    }
    if sample.is_empty() {
        return Err(SiseError::EmptyData);
    }
    let people = sample.individuals();
    let n = people.len();
    let inner = FitPipeline {
        execution: Execution::Sequential,
        ..*pipeline
    };

    let fits = map_range(opts.replicates, opts.execution, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, &[r as u64]));
        let mut data = Vec::with_capacity(n);
        let mut count = 0usize;
        let mut counts_known = true;
        for _ in 0..n {
            let (iv, c) = people[rng.gen_range(0..n)];
            data.push(iv);
            match c {
                Some(c) => count += c,
                None => counts_known = false,
            }
        }
        let obs = counts_known.then_some(count as f64);
        let replicate = FitPipeline {
            seed: derive_seed(opts.seed, &[r as u64, 1]),
            ..inner
        };
        let fit = match opts.fixed_bandwidth {
            Some(d) => replicate.fit_fixed(&data, frame, obs, d),
            None => replicate.fit(&data, frame, obs),
        };
        match fit {
            Ok(f) if f.raw.converged => Some((
                f.raw_survival.values,
                f.smoothed_survival.values,
                f.choice.bandwidth,
            )),
            Ok(_) => None,
            Err(e) => {
                log::warn!("bootstrap replicate {r} failed: {e}");
                None
            }
        }
    });

    let ok: Vec<_> = fits.into_iter().flatten().collect();
    if ok.is_empty() {
        return Err(SiseError::BootstrapFailed);
    }
    let excluded = opts.replicates - ok.len();
    let len = ok[0].0.len();
    let tau: Vec<f64> = (0..len).map(|j| frame.left + j as f64 * pipeline.step).collect();
    let raw: Vec<Vec<f64>> = ok.iter().map(|f| f.0.clone()).collect();
    let smooth: Vec<Vec<f64>> = ok.iter().map(|f| f.1.clone()).collect();
    Ok(BootstrapBands {
        raw: bands(&raw, &tau),
        smoothed: bands(&smooth, &tau),
        requested: opts.replicates,
        excluded,
        bandwidths: ok.iter().map(|f| f.2).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceEstimate {
    /// Mass of the fitted density over the frame.
    pub truncated_mass: f64,
    /// Lifetime prevalence, when supplied or identified.
    pub prevalence: Option<f64>,
    /// Unconditional survival at the right end of the frame, `1 - p`.
    pub survival_at_frame_right: Option<f64>,
    pub unconditional_unidentified: bool,
}

/// Prevalence from a fit on the truncated frame.
///
/// The fit only identifies the distribution conditional on the frame; the
/// unconditional prevalence has to come from outside (`p_hint`).
pub fn prevalence_from_fit(g: &GriddedDensity, frame: &TimeFrame, p_hint: Option<f64>) -> PrevalenceEstimate {
    debug_assert!(g.grid_start <= frame.left + g.step);
    match p_hint {
        Some(p) => PrevalenceEstimate {
            truncated_mass: g.total_mass,
            prevalence: Some(p),
            survival_at_frame_right: Some(1.0 - p),
            unconditional_unidentified: false,
        },
        None => PrevalenceEstimate {
            truncated_mass: g.total_mass,
            prevalence: None,
            survival_at_frame_right: None,
            unconditional_unidentified: true,
        },
    }
}
