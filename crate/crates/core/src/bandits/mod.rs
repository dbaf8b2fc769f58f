//! Bandit policies that consume decoded rewards: UCB, epsilon-greedy and
//! LinUCB.
//!
//! Policies see only the action they chose and the decoded reward, never the
//! raw reward, so any of them can run on top of a reward quantizer.

use alloc::vec::Vec;

use crate::rng::RngStream;

mod eps_greedy;
mod linalg;
mod linucb;
mod ucb;

pub use eps_greedy::EpsGreedy;
pub use linalg::{cholesky, cholesky_solve, inverse_quadratic_form};
pub use linucb::{ConfidenceRadius, LinUcb};
pub use ucb::Ucb;

/// A chosen action: an arm index, or a feature vector for linear bandits.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Arm(usize),
    Vector(Vec<f64>),
}

/// The actions offered at one step.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionSet {
    /// Arms `0..k`.
    Arms(usize),
    Vectors(Vec<Vec<f64>>),
}

impl ActionSet {
    pub fn len(&self) -> usize {
        match self {
            ActionSet::Arms(k) => *k,
            ActionSet::Vectors(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, index: usize) -> Option<Action> {
        match self {
            ActionSet::Arms(k) => (index < *k).then_some(Action::Arm(index)),
            ActionSet::Vectors(v) => v.get(index).cloned().map(Action::Vector),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("empty action set")]
    EmptyActionSet,
    #[error("policy expects {expected} actions, offered {offered}")]
    ArmCountMismatch { expected: usize, offered: usize },
    #[error("action kind does not match the policy")]
    WrongActionKind,
    #[error("feature dimension {got} does not match {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid policy parameter: {0}")]
    BadParameter(&'static str),
    #[error("design matrix lost positive definiteness")]
    NotPositiveDefinite,
}

pub trait Policy {
    /// Picks an index into `actions` for round `t` (1-based).
    fn select(&mut self, t: u64, actions: &ActionSet, rng: &mut RngStream) -> Result<usize, PolicyError>;

    fn update(&mut self, action: &Action, r_hat: f64) -> Result<(), PolicyError>;

    /// Current parameter estimate, for policies that keep one.
    fn theta(&self) -> Option<&[f64]> {
        None
    }
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax(scores: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

/// Per-arm pull counts and running means of decoded rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    pub counts: Vec<u64>,
    pub means: Vec<f64>,
}

impl ArmStats {
    pub fn new(k: usize) -> Self {
        Self {
            counts: alloc::vec![0; k],
            means: alloc::vec![0.0; k],
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn check(&self, actions: &ActionSet) -> Result<usize, PolicyError> {
        match actions {
            ActionSet::Arms(0) => Err(PolicyError::EmptyActionSet),
            ActionSet::Arms(k) if *k == self.len() => Ok(*k),
            ActionSet::Arms(k) => Err(PolicyError::ArmCountMismatch {
                expected: self.len(),
                offered: *k,
            }),
            ActionSet::Vectors(_) => Err(PolicyError::WrongActionKind),
        }
    }

    fn record(&mut self, action: &Action, r_hat: f64) -> Result<(), PolicyError> {
        match *action {
            Action::Arm(i) if i < self.len() => {
                self.counts[i] += 1;
                self.means[i] += (r_hat - self.means[i]) / self.counts[i] as f64;
                Ok(())
            }
            Action::Arm(i) => Err(PolicyError::ArmCountMismatch {
                expected: self.len(),
                offered: i + 1,
            }),
            Action::Vector(_) => Err(PolicyError::WrongActionKind),
        }
    }
}
