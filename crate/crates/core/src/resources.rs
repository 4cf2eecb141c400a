//! Loss budget of the optical setup, the resulting success probability and
//! event period, and a Monte Carlo cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::ProtocolSpec;

const OLMSCHENK_LIKE_JSON: &str = include_str!("../data/presets/olmschenk-2009-like.json");

/// Names of the bundled loss presets.
pub const PRESETS: [&str; 1] = ["olmschenk-2009-like"];

/// Trials per Monte Carlo batch. Each batch has its own random stream, so
/// results depend only on the seed and the trial count.
const BATCH: u64 = 1 << 16;

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("`{field}` must lie in [0, 1], got {value}")]
    NotAProbability { field: &'static str, value: f64 },
    #[error("source_rate must be positive and finite, got {0}")]
    BadSourceRate(f64),
    #[error("n_photon_paths must be at least 1")]
    NoPhotonPaths,
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("unknown loss preset `{0}`")]
    UnknownPreset(String),
    #[error("malformed loss model: {0}")]
    Json(#[from] serde_json::Error),
}

/// Independent loss and efficiency factors of one photon path, plus the
/// Bell-measurement success probability and the source rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossModel {
    /// Fiber coupling and transmission.
    pub t_fiber: f64,
    /// Transmission through the remaining optics.
    pub t_optics: f64,
    /// Fraction of photons with the right polarization.
    pub p_pol: f64,
    /// Detector quantum efficiency.
    pub eta_det: f64,
    /// Collected fraction of the full solid angle.
    pub solid_angle: f64,
    /// Success probability of the ideal Bell-state measurement without
    /// additional rotations (0.25 in the default preset).
    pub p_bell: f64,
    /// Single-photon source rate in Hz.
    pub source_rate: f64,
    pub n_photon_paths: u32,
}

impl LossModel {
    pub fn validate(&self) -> Result<(), ResourceError> {
        for (field, value) in self.factors() {
            if !(0.0..=1.0).contains(&value) {
                return Err(ResourceError::NotAProbability { field, value });
            }
        }
        if !(self.p_bell >= 0.0 && self.p_bell <= 1.0) {
            return Err(ResourceError::NotAProbability {
                field: "p_bell",
                value: self.p_bell,
            });
        }
        if !(self.source_rate > 0.0 && self.source_rate.is_finite()) {
            return Err(ResourceError::BadSourceRate(self.source_rate));
        }
        if self.n_photon_paths == 0 {
            return Err(ResourceError::NoPhotonPaths);
        }
        Ok(())
    }

    /// The per-path factors, in the order they are applied.
    pub fn factors(&self) -> [(&'static str, f64); 5] {
        [
            ("t_fiber", self.t_fiber),
            ("t_optics", self.t_optics),
            ("p_pol", self.p_pol),
            ("eta_det", self.eta_det),
            ("solid_angle", self.solid_angle),
        ]
    }

    /// Probability that a single photon survives one path.
    pub fn path_transmission(&self) -> f64 {
        self.factors().iter().map(|(_, v)| v).product()
    }

    pub fn from_json_str(src: &str) -> Result<Self, ResourceError> {
        let model: LossModel = serde_json::from_str(src)?;
        model.validate()?;
        Ok(model)
    }

    pub fn preset(name: &str) -> Result<Self, ResourceError> {
        match name {
            "olmschenk-2009-like" => Self::from_json_str(OLMSCHENK_LIKE_JSON),
            other => Err(ResourceError::UnknownPreset(other.to_string())),
        }
    }

    pub fn with_paths(self, n_photon_paths: u32) -> Self {
        Self {
            n_photon_paths,
            ..self
        }
    }
}

/// `p_bell * (t_fiber * t_optics * p_pol * eta_det * solid_angle)^n`.
pub fn success_probability(model: &LossModel) -> f64 {
    model.p_bell * model.path_transmission().powi(model.n_photon_paths as i32)
}

/// Mean time between successful events in seconds; infinite when the
/// success probability is zero.
pub fn expected_event_period(model: &LossModel) -> f64 {
    let p = success_probability(model);
    if p == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (model.source_rate * p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloYield {
    pub trials: u64,
    pub successes: u64,
    pub empirical_rate: f64,
    /// Closed-form success probability for the simulated path count.
    pub expected_rate: f64,
    /// Binomial standard deviation of the empirical rate.
    pub sigma: f64,
    pub photon_paths: u32,
}

impl MonteCarloYield {
    /// Distance from the closed form in standard deviations.
    pub fn z_score(&self) -> f64 {
        if self.sigma == 0.0 {
            if self.empirical_rate == self.expected_rate {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.empirical_rate - self.expected_rate) / self.sigma
        }
    }
}

fn trial<R: Rng>(model: &LossModel, paths: u32, rng: &mut R) -> bool {
    for _ in 0..paths {
        for (_, p) in model.factors() {
            if !rng.gen_bool(p) {
                return false;
            }
        }
    }
    rng.gen_bool(model.p_bell)
}

/// Simulates `trials` attempts of `protocol`. Every photon path loses the
/// photon independently at each factor and the Bell measurement succeeds
/// with `p_bell`; a trial succeeds only when nothing failed. The number of
/// paths comes from the protocol family, not from `model.n_photon_paths`.
pub fn monte_carlo_yield(
    model: &LossModel,
    protocol: &ProtocolSpec,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloYield, ResourceError> {
    model.validate()?;
    if trials == 0 {
        return Err(ResourceError::NoTrials);
    }
    let paths = protocol.family.photon_paths();
    let batches = trials.div_ceil(BATCH);
    let successes: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let n = BATCH.min(trials - b * BATCH);
            (0..n).filter(|_| trial(model, paths, &mut rng)).count() as u64
        })
        .sum();
    let expected = success_probability(&model.with_paths(paths));
    let empirical = successes as f64 / trials as f64;
    Ok(MonteCarloYield {
        trials,
        successes,
        empirical_rate: empirical,
        expected_rate: expected,
        sigma: (expected * (1.0 - expected) / trials as f64).sqrt(),
        photon_paths: paths,
    })
}
