//! Bandwidth selection: minimize the smoothing criterion over `[0, upper]`.
//!
//! The search evaluates `d = 0` first, runs a small population-based
//! evolution strategy with stochastic ranking over the box, then polishes the
//! best point with a one-dimensional Nelder-Mead simplex and keeps the first
//! local optimum it reaches. Objective values are memoized on a `1e-10` lattice
//! of bandwidths, and every bandwidth is evaluated at its lattice point, so
//! repeated probes are free and results are reproducible bit for bit.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::CensoredInterval;
use crate::error::{Result, SiseError};
use crate::npmle::GriddedDensity;
use crate::par::{map_range, Execution};
use crate::smoothing::{evaluate_bandwidth, FitReport, PenaltyContext, Smoother};

const LATTICE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Largest admissible bandwidth; the lower bound is always 0.
    pub upper: f64,
    pub global_budget: usize,
    pub global_population: usize,
    pub local_tol: f64,
    pub local_max_iter: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            upper: 1.0,
            global_budget: 100,
            global_population: 20,
            local_tol: 1e-4,
            local_max_iter: 200,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    /// Default upper bound `frame_right * step`.
    pub fn for_frame(frame_right: f64, step: f64, seed: u64) -> Self {
        Self {
            upper: frame_right * step,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.upper >= 0.0) || !self.upper.is_finite() {
            return Err(SiseError::InvalidOptimizerConfig(format!(
                "upper bound must be finite and non-negative, got {}",
                self.upper
            )));
        }
        if self.global_budget == 0 || self.global_population == 0 {
            return Err(SiseError::InvalidOptimizerConfig(
                "budgets must be at least 1".into(),
            ));
        }
        if !(self.local_tol > 0.0) {
            return Err(SiseError::InvalidOptimizerConfig(
                "local tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn quantize(d: f64) -> (i64, f64) {
    let key = (d / LATTICE).round() as i64;
    (key, key as f64 * LATTICE)
}

/// Memoized criterion `d -> FitReport` for one raw density.
pub struct Objective<'a> {
    data: &'a [CensoredInterval],
    smoother: Smoother,
    penalty: PenaltyContext,
    memo: Mutex<HashMap<i64, Option<FitReport>>>,
}

impl<'a> Objective<'a> {
    pub fn new(data: &'a [CensoredInterval], raw: &GriddedDensity, penalty: PenaltyContext) -> Self {
        Self {
            data,
            smoother: Smoother::new(raw),
            penalty,
            memo: Mutex::new(HashMap::new()),
        }
    }

    fn compute(&self, d: f64) -> Option<FitReport> {
        let smoothed = self.smoother.smooth(d);
        evaluate_bandwidth(self.data, &smoothed, &self.penalty).ok()
    }

    /// Report at the lattice point nearest `d`, or `None` if the criterion is
    /// undefined there (an observation of zero likelihood).
    pub fn report(&self, d: f64) -> Option<FitReport> {
        let (key, dq) = quantize(d);
        if let Some(hit) = self.memo.lock().unwrap().get(&key) {
            return *hit;
        }
        let r = self.compute(dq);
        self.memo.lock().unwrap().insert(key, r);
        r
    }

    pub fn value(&self, d: f64) -> f64 {
        self.report(d).map_or(f64::INFINITY, |r| r.bic_s)
    }

    /// Evaluate a batch, computing uncached points concurrently.
    pub fn values(&self, ds: &[f64], exec: Execution) -> Vec<f64> {
        let mut todo: Vec<(i64, f64)> = {
            let memo = self.memo.lock().unwrap();
            ds.iter()
                .map(|&d| quantize(d))
                .filter(|(k, _)| !memo.contains_key(k))
                .collect()
        };
        todo.sort_by_key(|(k, _)| *k);
        todo.dedup_by_key(|(k, _)| *k);
        let fresh = map_range(todo.len(), exec, |i| self.compute(todo[i].1));
        {
            let mut memo = self.memo.lock().unwrap();
            for ((k, _), r) in todo.iter().zip(fresh) {
                memo.insert(*k, r);
            }
        }
        ds.iter().map(|&d| self.value(d)).collect()
    }

    pub fn evaluations(&self) -> usize {
        self.memo.lock().unwrap().len()
    }

    pub fn smoothed(&self, d: f64) -> GriddedDensity {
        self.smoother.smooth(quantize(d).1)
    }
}

/// Stochastic ranking of individuals by objective `f` and constraint
/// violation `phi`: adjacent pairs are compared on `f` when both are feasible
/// or with probability `p_f`, otherwise on `phi`. Returns indices, best first.
pub fn stochastic_rank<R: Rng>(f: &[f64], phi: &[f64], p_f: f64, rng: &mut R) -> Vec<usize> {
    let n = f.len();
    let mut idx: Vec<usize> = (0..n).collect();
    for _ in 0..n {
        let mut swapped = false;
        for j in 0..n.saturating_sub(1) {
            let (a, b) = (idx[j], idx[j + 1]);
            let u: f64 = rng.gen();
            let by_objective = (phi[a] == 0.0 && phi[b] == 0.0) || u < p_f;
            let swap = if by_objective {
                f[a] > f[b]
            } else {
                phi[a] > phi[b]
            };
            if swap {
                idx.swap(j, j + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    idx
}

#[derive(Debug, Clone, Copy)]
struct Individual {
    x: f64,
    sigma: f64,
}

/// Population-based global search over `[0, upper]`. Returns the best point
/// seen and its value.
fn evolution_search(obj: &Objective, cfg: &OptimizerConfig, exec: Execution) -> (f64, f64) {
    let upper = cfg.upper;
    let lambda = cfg.global_population;
    let mu = ((lambda as f64 / 7.0).round() as usize).clamp(1, lambda);
    // one-dimensional learning rates
    let tau = 1.0 / (2.0_f64).sqrt();
    let tau_prime = 1.0 / (2.0_f64).sqrt();
    let (alpha, gamma, p_f) = (0.2, 0.85, 0.45);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // stratified start covering both bounds
    let mut pop: Vec<Individual> = (0..lambda)
        .map(|i| {
            let x = match i {
                0 => 0.0,
                _ if i + 1 == lambda => upper,
                _ => (i as f64 + rng.gen::<f64>()) / lambda as f64 * upper,
            };
            Individual { x, sigma: upper }
        })
        .collect();

    let mut best = (0.0, obj.value(0.0));
    let mut used = 1;
    loop {
        let remaining = cfg.global_budget.saturating_sub(used);
        if remaining == 0 {
            break;
        }
        pop.truncate(remaining.max(1));
        let xs: Vec<f64> = pop.iter().map(|p| p.x).collect();
        let fs = obj.values(&xs, exec);
        used += pop.len();
        for (&x, &f) in xs.iter().zip(&fs) {
            if f < best.1 || (f == best.1 && x < best.0) {
                best = (x, f);
            }
        }
        if used >= cfg.global_budget {
            break;
        }

        let phi = vec![0.0; pop.len()];
        let order = stochastic_rank(&fs, &phi, p_f, &mut rng);
        let parents: Vec<Individual> = order.iter().take(mu).map(|&i| pop[i]).collect();

        let mut next = Vec::with_capacity(lambda);
        for i in 0..lambda {
            let k = i % parents.len();
            let parent = parents[k];
            if k + 1 < parents.len() && i < parents.len() {
                // differential variation towards the best parent
                let x = parent.x + gamma * (parents[0].x - parents[k + 1].x);
                next.push(Individual {
                    x: x.clamp(0.0, upper),
                    sigma: parent.sigma,
                });
                continue;
            }
            let mut child = parent;
            for _ in 0..10 {
                let n0: f64 = rng.sample(StandardNormal);
                let n1: f64 = rng.sample(StandardNormal);
                let sigma = parent.sigma * (tau_prime * n0 + tau * n1).exp();
                let n2: f64 = rng.sample(StandardNormal);
                let x = parent.x + sigma * n2;
                if (0.0..=upper).contains(&x) {
                    child = Individual { x, sigma };
                    break;
                }
            }
            child.sigma = parent.sigma + alpha * (child.sigma - parent.sigma);
            next.push(child);
        }
        pop = next;
    }
    best
}

/// One-dimensional Nelder-Mead on `[0, upper]` from `start`.
fn nelder_mead(obj: &Objective, start: f64, cfg: &OptimizerConfig) -> (f64, f64) {
    let upper = cfg.upper;
    let clamp = |x: f64| x.clamp(0.0, upper);
    let h = 0.05 * upper;
    let second = if start + h <= upper { start + h } else { clamp(start - h) };
    let mut a = (start, obj.value(start));
    let mut b = (second, obj.value(second));
    for _ in 0..cfg.local_max_iter {
        if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
            std::mem::swap(&mut a, &mut b);
        }
        if (b.1 - a.1).abs() < cfg.local_tol || (b.0 - a.0).abs() < LATTICE {
            break;
        }
        let xr = clamp(a.0 + (a.0 - b.0));
        let r = (xr, obj.value(xr));
        if r.1 < a.1 {
            let xe = clamp(a.0 + 2.0 * (a.0 - b.0));
            let e = (xe, obj.value(xe));
            b = if e.1 < r.1 { e } else { r };
        } else if r.1 < b.1 {
            b = r;
        } else {
            // inside contraction; in one dimension it coincides with a shrink
            let xc = a.0 + 0.5 * (b.0 - a.0);
            b = (xc, obj.value(xc));
        }
    }
    if b.1 < a.1 {
        b
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthChoice {
    pub bandwidth: f64,
    pub report: FitReport,
    /// Criterion at `d = 0`, the raw estimate.
    pub baseline: FitReport,
    pub smoothed: GriddedDensity,
    pub evaluations: usize,
}

/// Select the bandwidth minimizing the smoothing criterion.
pub fn optimize_bandwidth(
    data: &[CensoredInterval],
    raw: &GriddedDensity,
    penalty: &PenaltyContext,
    cfg: &OptimizerConfig,
    exec: Execution,
) -> Result<BandwidthChoice> {
    cfg.validate()?;
    if raw.len() < 3 {
        return Err(SiseError::DegenerateDensity("fewer than 3 bins"));
    }
    if !(raw.total_mass > 0.0) {
        return Err(SiseError::DegenerateDensity("zero total mass"));
    }
    let obj = Objective::new(data, raw, *penalty);
    let baseline = match obj.report(0.0) {
        Some(r) => r,
        // surface the underlying error
        None => evaluate_bandwidth(data, raw, penalty)?,
    };
    if cfg.upper == 0.0 {
        return Ok(BandwidthChoice {
            bandwidth: 0.0,
            report: baseline,
            baseline,
            smoothed: raw.clone(),
            evaluations: 1,
        });
    }
    let (global_x, _) = evolution_search(&obj, cfg, exec);
    let (x, _) = nelder_mead(&obj, global_x, cfg);
    let (_, d) = quantize(x);
    let report = obj.report(d).unwrap_or(baseline);
    let (d, report) = if report.bic_s <= baseline.bic_s {
        (d, report)
    } else {
        (0.0, baseline)
    };
    Ok(BandwidthChoice {
        bandwidth: d,
        report,
        baseline,
        smoothed: obj.smoothed(d),
        evaluations: obj.evaluations(),
    })
}
