//! Reward environments: Gaussian k-armed bandits (optionally clipped) and
//! stochastic linear bandits with freshly sampled action sets.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bandits::{Action, ActionSet};
use crate::math;
use crate::rng::{streams, RngStream};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("action not valid for this environment")]
    BadAction,
    #[error("invalid environment spec: {0}")]
    BadSpec(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Setup1,
    Setup2,
    Setup3,
    AppG,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Setup1, Preset::Setup2, Preset::Setup3, Preset::AppG];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Setup1 => "setup1",
            Preset::Setup2 => "setup2",
            Preset::Setup3 => "setup3",
            Preset::AppG => "appG",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, EnvError> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| EnvError::UnknownPreset(name.into()))
    }
}

/// Environment recipe. Arm means and `theta*` are drawn from it per seed.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    KArmed {
        k: usize,
        /// Arm means are drawn from `N(mean_center, mean_stddev^2)`.
        mean_center: f64,
        mean_stddev: f64,
        reward_stddev: f64,
        clip: Option<f64>,
    },
    Linear {
        d: usize,
        noise_stddev: f64,
        actions_per_step: usize,
        action_radius: f64,
    },
}

impl EnvSpec {
    pub fn preset(preset: Preset) -> Self {
        let reward_stddev = math::sqrt(0.1);
        match preset {
            Preset::Setup1 => EnvSpec::KArmed {
                k: 100,
                mean_center: 0.0,
                mean_stddev: 10.0,
                reward_stddev,
                clip: None,
            },
            Preset::Setup2 => EnvSpec::KArmed {
                k: 100,
                mean_center: 95.0,
                mean_stddev: 1.0,
                reward_stddev,
                clip: None,
            },
            Preset::Setup3 => EnvSpec::Linear {
                d: 20,
                noise_stddev: reward_stddev,
                actions_per_step: 5,
                action_radius: 0.5,
            },
            Preset::AppG => EnvSpec::KArmed {
                k: 100,
                mean_center: 0.0,
                mean_stddev: 1.0,
                reward_stddev,
                clip: Some(100.0),
            },
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        match *self {
            EnvSpec::KArmed {
                k,
                mean_center,
                mean_stddev,
                reward_stddev,
                clip,
            } => {
                if k == 0 {
                    return Err(EnvError::BadSpec("k must be positive"));
                }
                if !mean_center.is_finite() || !(mean_stddev >= 0.0) || !mean_stddev.is_finite() {
                    return Err(EnvError::BadSpec("bad arm-mean distribution"));
                }
                if !(reward_stddev >= 0.0 && reward_stddev.is_finite()) {
                    return Err(EnvError::BadSpec("reward_stddev must be non-negative"));
                }
                if let Some(l) = clip {
                    if !(l > 0.0 && l.is_finite()) {
                        return Err(EnvError::BadSpec("clip must be positive"));
                    }
                }
            }
            EnvSpec::Linear {
                d,
                noise_stddev,
                actions_per_step,
                action_radius,
            } => {
                if d == 0 || actions_per_step == 0 {
                    return Err(EnvError::BadSpec("d and actions_per_step must be positive"));
                }
                if !(noise_stddev >= 0.0 && noise_stddev.is_finite()) {
                    return Err(EnvError::BadSpec("noise_stddev must be non-negative"));
                }
                if !(action_radius > 0.0 && action_radius.is_finite()) {
                    return Err(EnvError::BadSpec("action_radius must be positive"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KArmedEnv {
    pub means: Vec<f64>,
    pub reward_stddev: f64,
    /// Rewards are clamped to `[-clip, clip]`. Means stay pre-clip.
    pub clip: Option<f64>,
}

impl KArmedEnv {
    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest positive gap `mu* - mu_i`, or `None` if all arms tie.
    pub fn delta_min(&self) -> Option<f64> {
        let best = self.best_mean();
        self.means
            .iter()
            .map(|m| best - m)
            .filter(|&g| g > 0.0)
            .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))))
    }

    pub fn pull(&self, arm: usize, rng: &mut RngStream) -> Result<f64, EnvError> {
        let mean = *self.means.get(arm).ok_or(EnvError::BadAction)?;
        let z: f64 = rng.sample(StandardNormal);
        let r = mean + self.reward_stddev * z;
        Ok(match self.clip {
            Some(l) => r.clamp(-l, l),
            None => r,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearEnv {
    pub theta: Vec<f64>,
    pub noise_stddev: f64,
    pub actions_per_step: usize,
    pub action_radius: f64,
}

impl LinearEnv {
    pub fn d(&self) -> usize {
        self.theta.len()
    }

    pub fn mean(&self, a: &[f64]) -> Result<f64, EnvError> {
        if a.len() != self.theta.len() {
            return Err(EnvError::BadAction);
        }
        Ok(dot(&self.theta, a))
    }

    pub fn sample_actions(&self, rng: &mut RngStream) -> Vec<Vec<f64>> {
        (0..self.actions_per_step)
            .map(|_| sphere(self.d(), self.action_radius, rng))
            .collect()
    }

    pub fn pull(&self, a: &[f64], rng: &mut RngStream) -> Result<f64, EnvError> {
        let mean = self.mean(a)?;
        let z: f64 = rng.sample(StandardNormal);
        Ok(mean + self.noise_stddev * z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Env {
    KArmed(KArmedEnv),
    Linear(LinearEnv),
}

impl Env {
    /// The action set for the next round.
    pub fn offer(&self, rng: &mut RngStream) -> ActionSet {
        match self {
            Env::KArmed(e) => ActionSet::Arms(e.k()),
            Env::Linear(e) => ActionSet::Vectors(e.sample_actions(rng)),
        }
    }

    pub fn mean(&self, action: &Action) -> Result<f64, EnvError> {
        match (self, action) {
            (Env::KArmed(e), Action::Arm(i)) => e.means.get(*i).copied().ok_or(EnvError::BadAction),
            (Env::Linear(e), Action::Vector(a)) => e.mean(a),
            _ => Err(EnvError::BadAction),
        }
    }

    /// `mu*_t`: best arm mean, or the best mean within the offered set.
    pub fn best_mean(&self, offered: &ActionSet) -> Result<f64, EnvError> {
        match (self, offered) {
            (Env::KArmed(e), _) => Ok(e.best_mean()),
            (Env::Linear(e), ActionSet::Vectors(vs)) => vs
                .iter()
                .map(|a| e.mean(a))
                .try_fold(f64::NEG_INFINITY, |m, x| x.map(|x| m.max(x))),
            (Env::Linear(_), ActionSet::Arms(_)) => Err(EnvError::BadAction),
        }
    }

    pub fn pull(&self, action: &Action, rng: &mut RngStream) -> Result<f64, EnvError> {
        match (self, action) {
            (Env::KArmed(e), Action::Arm(i)) => e.pull(*i, rng),
            (Env::Linear(e), Action::Vector(a)) => e.pull(a, rng),
            _ => Err(EnvError::BadAction),
        }
    }
}

/// Draws an environment instance from `spec` using the instance stream of
/// `seed`.
pub fn sample_env(spec: &EnvSpec, seed: u64) -> Result<Env, EnvError> {
    spec.validate()?;
    let mut rng = RngStream::new(seed, streams::ENV_INSTANCE);
    Ok(match *spec {
        EnvSpec::KArmed {
            k,
            mean_center,
            mean_stddev,
            reward_stddev,
            clip,
        } => {
            let means = (0..k)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    mean_center + mean_stddev * z
                })
                .collect();
            Env::KArmed(KArmedEnv {
                means,
                reward_stddev,
                clip,
            })
        }
        EnvSpec::Linear {
            d,
            noise_stddev,
            actions_per_step,
            action_radius,
        } => Env::Linear(LinearEnv {
            theta: sphere(d, 1.0, &mut rng),
            noise_stddev,
            actions_per_step,
            action_radius,
        }),
    })
}

/// Uniform point on the sphere of the given radius (normalised Gaussian).
fn sphere(d: usize, radius: f64, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = math::sqrt(dot(&v, &v));
        if norm > 1e-12 {
            return v.into_iter().map(|x| x * radius / norm).collect();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
