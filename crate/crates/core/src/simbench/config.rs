use serde::{Deserialize, Serialize};

use crate::error::{Result, SiseError};
use crate::smoothing::PenaltyKind;

/// Second log-normal component of a bimodal onset distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub mean_onset: f64,
    /// Probability of drawing from this component.
    #[serde(default = "half")]
    pub weight: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapSettings {
    pub replicates: usize,
    /// Reuse the bandwidth chosen on the full sample for every resample.
    #[serde(default)]
    pub reuse_bandwidth: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_individuals: usize,
    pub mean_onset: f64,
    #[serde(default = "defaults::onset_sd")]
    pub onset_sd: f64,
    pub prevalence: f64,
    pub n_obs: usize,
    #[serde(default = "defaults::followup_length")]
    pub followup_length: f64,
    #[serde(default = "defaults::baseline_mean")]
    pub baseline_mean: f64,
    #[serde(default = "defaults::baseline_sd")]
    pub baseline_sd: f64,
    #[serde(default = "defaults::gap_sd")]
    pub gap_sd: f64,
    #[serde(default = "defaults::frame_right")]
    pub frame_right: f64,
    #[serde(default = "defaults::point_mass")]
    pub point_mass: f64,
    #[serde(default)]
    pub mixture: Option<MixtureComponent>,
    #[serde(default)]
    pub penalty: PenaltyKind,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::delta_t")]
    pub delta_t: f64,
    #[serde(default)]
    pub bootstrap: Option<BootstrapSettings>,
}

mod defaults {
    pub fn onset_sd() -> f64 {
        10.0
    }
    pub fn followup_length() -> f64 {
        20.0
    }
    pub fn baseline_mean() -> f64 {
        40.0
    }
    pub fn baseline_sd() -> f64 {
        10.0
    }
    pub fn gap_sd() -> f64 {
        0.2
    }
    pub fn frame_right() -> f64 {
        100.0
    }
    pub fn point_mass() -> f64 {
        1000.0
    }
    pub fn delta_t() -> f64 {
        0.01
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> SiseError {
    SiseError::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

impl ScenarioConfig {
    /// A single S1-style cell with every other parameter at its default.
    pub fn cell(n_individuals: usize, mean_onset: f64, prevalence: f64, n_obs: usize, replicates: usize) -> Self {
        Self {
            n_individuals,
            mean_onset,
            onset_sd: defaults::onset_sd(),
            prevalence,
            n_obs,
            followup_length: defaults::followup_length(),
            baseline_mean: defaults::baseline_mean(),
            baseline_sd: defaults::baseline_sd(),
            gap_sd: defaults::gap_sd(),
            frame_right: defaults::frame_right(),
            point_mass: defaults::point_mass(),
            mixture: None,
            penalty: PenaltyKind::EquivalentSampleSize,
            replicates,
            seed: 0,
            delta_t: defaults::delta_t(),
            bootstrap: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_individuals == 0 {
            return Err(invalid("n_individuals", "must be at least 1"));
        }
        positive("mean_onset", self.mean_onset)?;
        positive("onset_sd", self.onset_sd)?;
        if !(0.0..=1.0).contains(&self.prevalence) {
            return Err(invalid("prevalence", format!("must lie in [0, 1], got {}", self.prevalence)));
        }
        if self.n_obs < 2 {
            return Err(invalid("n_obs", format!("must be at least 2, got {}", self.n_obs)));
        }
        positive("followup_length", self.followup_length)?;
        if !self.baseline_mean.is_finite() {
            return Err(invalid("baseline_mean", "must be finite"));
        }
        positive("baseline_sd", self.baseline_sd)?;
        positive("gap_sd", self.gap_sd)?;
        positive("frame_right", self.frame_right)?;
        if !(self.point_mass > 2.0 * self.frame_right) {
            return Err(invalid(
                "point_mass",
                format!("must exceed twice frame_right ({}), got {}", self.frame_right, self.point_mass),
            ));
        }
        if let Some(m) = self.mixture {
            positive("mixture", m.mean_onset)?;
            if !(0.0..=1.0).contains(&m.weight) {
                return Err(invalid("mixture", format!("weight must lie in [0, 1], got {}", m.weight)));
            }
        }
        if self.replicates == 0 {
            return Err(invalid("replicates", "must be at least 1"));
        }
        positive("delta_t", self.delta_t)?;
        if let Some(b) = self.bootstrap {
            if b.replicates < 2 {
                return Err(invalid("bootstrap", format!("needs at least 2 replicates, got {}", b.replicates)));
            }
        }
        Ok(())
    }

    /// Log-normal `(mu, sigma)` with mean `mean` and standard deviation `onset_sd`.
    pub fn lognormal_params(&self, mean: f64) -> (f64, f64) {
        let (u2, s2) = (mean * mean, self.onset_sd * self.onset_sd);
        ((u2 / (u2 + s2).sqrt()).ln(), (1.0 + s2 / u2).ln().sqrt())
    }

    /// `(mean, weight)` of each onset component.
    pub fn components(&self) -> Vec<(f64, f64)> {
        match self.mixture {
            Some(m) => vec![(self.mean_onset, 1.0 - m.weight), (m.mean_onset, m.weight)],
            None => vec![(self.mean_onset, 1.0)],
        }
    }
}

/// Built-in scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// One desk-scale S1 cell: N = 100, u = 50, p = 1, m = 6, 30 replicates.
    S1Desk,
    /// Bimodal onsets at 30 and 60, N = 500, p = 0.75, m = 2, 50 replicates.
    S2,
    /// Bootstrap coverage: N = 100, u = 50, p = 1, m = 6, 20 replicates of B = 100.
    S3,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "s1-desk" => Ok(Preset::S1Desk),
            "s2" => Ok(Preset::S2),
            "s3" => Ok(Preset::S3),
            _ => Err(format!("unknown preset `{s}`")),
        }
    }
}

impl Preset {
    pub fn config(self) -> ScenarioConfig {
        match self {
            Preset::S1Desk => ScenarioConfig::cell(100, 50.0, 1.0, 6, 30),
            Preset::S2 => ScenarioConfig {
                mixture: Some(MixtureComponent {
                    mean_onset: 60.0,
                    weight: 0.5,
                }),
                ..ScenarioConfig::cell(500, 30.0, 0.75, 2, 50)
            },
            Preset::S3 => ScenarioConfig {
                bootstrap: Some(BootstrapSettings {
                    replicates: 100,
                    reuse_bandwidth: false,
                }),
                ..ScenarioConfig::cell(100, 50.0, 1.0, 6, 20)
            },
        }
    }
}

/// The full S1 grid: 4 N x 3 u x 3 p x 3 m = 108 cells.
pub fn s1_sweep(replicates: usize) -> Vec<ScenarioConfig> {
    let mut cells = Vec::with_capacity(108);
    for &n in &[50, 100, 1000, 5000] {
        for &u in &[30.0, 50.0, 70.0] {
            for &p in &[0.1, 0.5, 1.0] {
                for &m in &[2, 4, 6] {
                    cells.push(ScenarioConfig::cell(n, u, p, m, replicates));
                }
            }
        }
    }
    cells
}
