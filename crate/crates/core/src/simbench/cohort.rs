use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use statrs::distribution::{ContinuousCDF, LogNormal as LogNormalCdf};

use super::config::ScenarioConfig;
use crate::data::{summarize_observations, CensoredInterval, CensoredSample, IndividualSeries, ObservationRecord};
use crate::error::{Result, SiseError};

/// Redraws allowed when a follow-up time would leave the frame; the series
/// ends early once they are used up.
const FOLLOWUP_TRIES: usize = 100;
/// Redraws allowed for the baseline visit before the configuration is rejected.
const BASELINE_TRIES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedCohort {
    pub ids: Vec<String>,
    /// Event time per individual, rounded to two decimals; `point_mass` for
    /// individuals who never develop the event.
    pub true_onsets: Vec<f64>,
    pub records: Vec<ObservationRecord>,
    pub intervals: Vec<CensoredInterval>,
    pub observation_counts: Vec<usize>,
    pub last_times: Vec<f64>,
    pub config: ScenarioConfig,
}

impl SimulatedCohort {
    pub fn sample(&self) -> CensoredSample {
        CensoredSample {
            intervals: self.intervals.clone(),
            observation_counts: Some(self.observation_counts.clone()),
        }
    }

    /// Indices of individuals with a finite interval strictly above zero.
    pub fn interval_censored(&self) -> Vec<usize> {
        (0..self.intervals.len())
            .filter(|&i| self.intervals[i].is_interval_censored(0.0))
            .collect()
    }

    /// Exact onset when it precedes the last visit, else right-censored there.
    pub fn km_observations(&self) -> Vec<(f64, bool)> {
        self.true_onsets
            .iter()
            .zip(&self.last_times)
            .map(|(&x, &last)| if x < last { (x, true) } else { (last, false) })
            .collect()
    }
}

/// Draw from `dist` restricted to `(lo, hi)` by rejection.
pub fn truncated_normal<R: Rng>(rng: &mut R, dist: &Normal<f64>, lo: f64, hi: f64, tries: usize) -> Option<f64> {
    (0..tries).map(|_| dist.sample(rng)).find(|&x| lo < x && x < hi)
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// One synthetic cohort drawn from `seed`.
pub fn simulate_cohort(cfg: &ScenarioConfig, seed: u64) -> Result<SimulatedCohort> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let onsets: Vec<LogNormal<f64>> = cfg
        .components()
        .iter()
        .map(|&(mean, _)| {
            let (mu, sigma) = cfg.lognormal_params(mean);
            LogNormal::new(mu, sigma).expect("validated scale")
        })
        .collect();
    let second_weight = cfg.mixture.map(|m| m.weight).unwrap_or(0.0);
    let baseline = Normal::new(cfg.baseline_mean, cfg.baseline_sd).expect("validated scale");
    let gap = Normal::new(cfg.followup_length / (cfg.n_obs - 1) as f64, cfg.gap_sd).expect("validated scale");

    let n = cfg.n_individuals;
    let mut cohort = SimulatedCohort {
        ids: Vec::with_capacity(n),
        true_onsets: Vec::with_capacity(n),
        records: Vec::with_capacity(n * cfg.n_obs),
        intervals: Vec::with_capacity(n),
        observation_counts: Vec::with_capacity(n),
        last_times: Vec::with_capacity(n),
        config: *cfg,
    };
    for i in 0..n {
        let component = usize::from(onsets.len() > 1 && rng.gen_bool(second_weight));
        let affected = rng.gen_bool(cfg.prevalence);
        let draw = onsets[component].sample(&mut rng);
        let x = if affected { round2(draw).max(0.01) } else { cfg.point_mass };

        let mut t = truncated_normal(&mut rng, &baseline, 0.0, cfg.frame_right, BASELINE_TRIES).ok_or_else(|| {
            SiseError::InvalidConfig {
                field: "baseline_mean",
                reason: "baseline visits almost never fall inside the frame".into(),
            }
        })?;
        let id = format!("i{i}");
        let mut records = Vec::with_capacity(cfg.n_obs);
        records.push(ObservationRecord::new(id.clone(), t, u8::from(t >= x)));
        for _ in 1..cfg.n_obs {
            let next = (0..FOLLOWUP_TRIES)
                .map(|_| t + gap.sample(&mut rng))
                .find(|&next| next > t && next < cfg.frame_right);
            match next {
                Some(next) => {
                    t = next;
                    records.push(ObservationRecord::new(id.clone(), t, u8::from(t >= x)));
                }
                None => break,
            }
        }
        let series = IndividualSeries { id: id.clone(), records };
        let iv = summarize_observations(&series, 0.0, f64::INFINITY)?;
        cohort.last_times.push(t);
        cohort.observation_counts.push(series.records.len());
        cohort.records.extend(series.records);
        cohort.intervals.push(iv);
        cohort.true_onsets.push(x);
        cohort.ids.push(id);
    }
    Ok(cohort)
}

/// Unconditional `P(X > t)`, including the never-affected fraction.
pub fn true_survival(cfg: &ScenarioConfig, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let cdf: f64 = cfg
        .components()
        .iter()
        .map(|&(mean, w)| {
            let (mu, sigma) = cfg.lognormal_params(mean);
            w * LogNormalCdf::new(mu, sigma).expect("validated scale").cdf(t)
        })
        .sum();
    let surv = 1.0 - cfg.prevalence * cdf;
    if t >= cfg.point_mass {
        surv - (1.0 - cfg.prevalence)
    } else {
        surv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: f64) -> ScenarioConfig {
        ScenarioConfig::cell(200, 50.0, p, 6, 1)
    }

    #[test]
    fn intervals_bracket_onsets() {
        let c = simulate_cohort(&cfg(0.7), 3).unwrap();
        for (iv, &x) in c.intervals.iter().zip(&c.true_onsets) {
            assert!(iv.left < x && x <= iv.right, "{iv:?} vs {x}");
        }
        for i in c.interval_censored() {
            let (iv, x) = (c.intervals[i], c.true_onsets[i]);
            assert!(iv.left < x && x < iv.right);
        }
    }

    #[test]
    fn full_prevalence_has_no_point_mass() {
        let c = simulate_cohort(&cfg(1.0), 4).unwrap();
        assert!(c.true_onsets.iter().all(|&x| x < 1000.0));
    }

    #[test]
    fn zero_prevalence_is_all_right_censored() {
        let c = simulate_cohort(&cfg(0.0), 5).unwrap();
        assert!(c.true_onsets.iter().all(|&x| x == 1000.0));
        for (iv, &last) in c.intervals.iter().zip(&c.last_times) {
            assert!(iv.is_right_censored());
            assert_eq!(iv.left, last);
        }
    }

    #[test]
    fn times_stay_in_frame() {
        let c = simulate_cohort(&cfg(1.0), 6).unwrap();
        assert!(c.records.iter().all(|r| r.time > 0.0 && r.time < 100.0));
        assert_eq!(c.records.len(), c.observation_counts.iter().sum::<usize>());
    }

    #[test]
    fn truncated_normal_stays_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = Normal::new(0.0, 1.0).unwrap();
        for _ in 0..1000 {
            let x = truncated_normal(&mut rng, &d, -0.5, 2.0, 1000).unwrap();
            assert!(-0.5 < x && x < 2.0);
        }
    }

    #[test]
    fn truth_is_a_survival_function() {
        let c = cfg(0.5);
        assert_eq!(true_survival(&c, 0.0), 1.0);
        approx::assert_abs_diff_eq!(true_survival(&c, 500.0), 0.5, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(true_survival(&c, 2000.0), 0.0, epsilon = 1e-12);
        let mut prev = 1.0;
        for t in (1..100).map(f64::from) {
            let s = true_survival(&c, t);
            assert!(s <= prev);
            prev = s;
        }
    }

    #[test]
    fn same_seed_same_cohort() {
        assert_eq!(simulate_cohort(&cfg(0.5), 11).unwrap(), simulate_cohort(&cfg(0.5), 11).unwrap());
    }
}
