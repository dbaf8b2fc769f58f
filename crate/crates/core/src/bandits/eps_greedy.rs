use rand::Rng;

use super::{argmax, Action, ActionSet, ArmStats, Policy, PolicyError};
use crate::rng::RngStream;

/// Epsilon-greedy with the decaying schedule
/// `eps_t = min(1, C * sigma_q * k / (t * delta_min^2))`.
///
/// Set `sigma_q = 1` to get the schedule without the noise scale.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsGreedy {
    c: f64,
    sigma_q: f64,
    delta_min: f64,
    stats: ArmStats,
}

impl EpsGreedy {
    pub fn new(k: usize, sigma_q: f64, c: f64, delta_min: f64) -> Result<Self, PolicyError> {
        if k == 0 {
            return Err(PolicyError::EmptyActionSet);
        }
        if !(sigma_q.is_finite() && sigma_q > 0.0) {
            return Err(PolicyError::BadParameter("sigma_q must be positive"));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(PolicyError::BadParameter("eps_c must be positive"));
        }
        if !(delta_min.is_finite() && delta_min > 0.0) {
            return Err(PolicyError::BadParameter("delta_min must be positive"));
        }
        Ok(Self {
            c,
            sigma_q,
            delta_min,
            stats: ArmStats::new(k),
        })
    }

    pub fn stats(&self) -> &ArmStats {
        &self.stats
    }

    pub fn epsilon(&self, t: u64) -> f64 {
        let k = self.stats.len() as f64;
        let t = t.max(1) as f64;
        (self.c * self.sigma_q * k / (t * self.delta_min * self.delta_min)).min(1.0)
    }
}

impl Policy for EpsGreedy {
    fn select(&mut self, t: u64, actions: &ActionSet, rng: &mut RngStream) -> Result<usize, PolicyError> {
        let k = self.stats.check(actions)?;
        let eps = self.epsilon(t);
        if eps >= 1.0 || rng.bernoulli(eps) {
            return Ok(rng.random_range(0..k));
        }
        Ok(argmax(self.stats.means.iter().copied()).expect("k > 0"))
    }

    fn update(&mut self, action: &Action, r_hat: f64) -> Result<(), PolicyError> {
        self.stats.record(action, r_hat)
    }
}
