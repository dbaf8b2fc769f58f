//! Learner-side quantization centres `mu_hat(t)`.
//!
//! * `AvgArmPt`: running mean of the decoded rewards of the arm about to be
//!   played, `0` for an arm never played.
//! * `AvgPt`: running mean of every decoded reward so far.
//! * `Contextual`: `<theta_t, A_t>` with `theta_t` taken from the policy.
//!
//! All variants start at `mu_hat(1) = 0`.

use alloc::vec::Vec;

use crate::bandits::Action;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    AvgArmPt,
    AvgPt,
    Contextual,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::AvgArmPt => "avg_arm_pt",
            EstimatorKind::AvgPt => "avg_pt",
            EstimatorKind::Contextual => "contextual",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "avg_arm_pt" => Some(EstimatorKind::AvgArmPt),
            "avg_pt" => Some(EstimatorKind::AvgPt),
            "contextual" => Some(EstimatorKind::Contextual),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeanEstimatorState {
    AvgArmPt { means: Vec<f64>, counts: Vec<u64> },
    AvgPt { mean: f64, count: u64 },
    Contextual,
}

impl MeanEstimatorState {
    pub fn new(kind: EstimatorKind) -> Self {
        match kind {
            EstimatorKind::AvgArmPt => MeanEstimatorState::AvgArmPt {
                means: Vec::new(),
                counts: Vec::new(),
            },
            EstimatorKind::AvgPt => MeanEstimatorState::AvgPt { mean: 0.0, count: 0 },
            EstimatorKind::Contextual => MeanEstimatorState::Contextual,
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        match self {
            MeanEstimatorState::AvgArmPt { .. } => EstimatorKind::AvgArmPt,
            MeanEstimatorState::AvgPt { .. } => EstimatorKind::AvgPt,
            MeanEstimatorState::Contextual => EstimatorKind::Contextual,
        }
    }

    /// Centre for the upcoming step. `theta` is the policy's current
    /// parameter estimate and is only read by the contextual variant; an
    /// absent `theta` or a non-vector action yields `0`.
    pub fn mu_hat(&self, action: &Action, theta: Option<&[f64]>) -> f64 {
        match (self, action) {
            (MeanEstimatorState::AvgArmPt { means, .. }, Action::Arm(i)) => {
                means.get(*i).copied().unwrap_or(0.0)
            }
            (MeanEstimatorState::AvgArmPt { .. }, Action::Vector(_)) => 0.0,
            (MeanEstimatorState::AvgPt { mean, .. }, _) => *mean,
            (MeanEstimatorState::Contextual, Action::Vector(a)) => theta
                .map(|th| th.iter().zip(a).map(|(x, y)| x * y).sum())
                .unwrap_or(0.0),
            (MeanEstimatorState::Contextual, Action::Arm(_)) => 0.0,
        }
    }

    /// Folds in the decoded reward of the step just played. The contextual
    /// variant keeps no state of its own.
    pub fn update(&mut self, action: &Action, r_hat: f64) {
        match self {
            MeanEstimatorState::AvgArmPt { means, counts } => {
                if let Action::Arm(i) = *action {
                    if i >= means.len() {
                        means.resize(i + 1, 0.0);
                        counts.resize(i + 1, 0);
                    }
                    counts[i] += 1;
                    means[i] += (r_hat - means[i]) / counts[i] as f64;
                }
            }
            MeanEstimatorState::AvgPt { mean, count } => {
                *count += 1;
                *mean += (r_hat - *mean) / *count as f64;
            }
            MeanEstimatorState::Contextual => {}
        }
    }
}
