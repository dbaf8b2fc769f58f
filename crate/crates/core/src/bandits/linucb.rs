use alloc::vec;
use alloc::vec::Vec;

use super::linalg::{cholesky, cholesky_solve, inverse_quadratic_form};
use super::{argmax, Action, ActionSet, Policy, PolicyError};
use crate::math;
use crate::rng::RngStream;

/// Confidence radius schedule for [`LinUcb`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConfidenceRadius {
    /// `beta_t = sigma_q * sqrt(d * ln((1 + t L^2) n)) + 1`.
    Standard { sigma_q: f64, horizon: u64, norm_bound: f64 },
    Fixed(f64),
}

/// LinUCB over a ridge estimate: plays
/// `argmax_a <theta_t, a> + beta_t * sqrt(a^T V_t^{-1} a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinUcb {
    d: usize,
    ridge_lambda: f64,
    radius: ConfidenceRadius,
    gram: Vec<f64>,
    response: Vec<f64>,
    factor: Vec<f64>,
    theta: Vec<f64>,
}

impl LinUcb {
    pub fn new(d: usize, ridge_lambda: f64, radius: ConfidenceRadius) -> Result<Self, PolicyError> {
        if d == 0 {
            return Err(PolicyError::BadParameter("dimension must be positive"));
        }
        if !(ridge_lambda.is_finite() && ridge_lambda > 0.0) {
            return Err(PolicyError::BadParameter("ridge_lambda must be positive"));
        }
        match radius {
            ConfidenceRadius::Standard { sigma_q, horizon, norm_bound } => {
                if !(sigma_q.is_finite() && sigma_q >= 0.0) || horizon == 0 || !(norm_bound > 0.0) {
                    return Err(PolicyError::BadParameter("bad confidence radius"));
                }
            }
            ConfidenceRadius::Fixed(b) => {
                if !(b.is_finite() && b >= 0.0) {
                    return Err(PolicyError::BadParameter("bad confidence radius"));
                }
            }
        }
        let mut gram = vec![0.0; d * d];
        for i in 0..d {
            gram[i * d + i] = ridge_lambda;
        }
        let factor = cholesky(&gram, d).ok_or(PolicyError::NotPositiveDefinite)?;
        Ok(Self {
            d,
            ridge_lambda,
            radius,
            gram,
            response: vec![0.0; d],
            factor,
            theta: vec![0.0; d],
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ridge_lambda(&self) -> f64 {
        self.ridge_lambda
    }

    /// Design matrix `V_t`, row-major.
    pub fn gram(&self) -> &[f64] {
        &self.gram
    }

    pub fn beta(&self, t: u64) -> f64 {
        match self.radius {
            ConfidenceRadius::Standard { sigma_q, horizon, norm_bound } => {
                let t = t.max(1) as f64;
                let arg = (1.0 + t * norm_bound * norm_bound) * horizon as f64;
                sigma_q * math::sqrt(self.d as f64 * math::ln(arg)) + 1.0
            }
            ConfidenceRadius::Fixed(b) => b,
        }
    }

    pub fn score(&self, a: &[f64], t: u64) -> f64 {
        let mean: f64 = self.theta.iter().zip(a).map(|(x, y)| x * y).sum();
        let width = math::sqrt(inverse_quadratic_form(&self.factor, self.d, a).max(0.0));
        mean + self.beta(t) * width
    }

    fn check_dim(&self, a: &[f64]) -> Result<(), PolicyError> {
        if a.len() != self.d {
            return Err(PolicyError::DimensionMismatch {
                expected: self.d,
                got: a.len(),
            });
        }
        Ok(())
    }
}

impl Policy for LinUcb {
    fn select(&mut self, t: u64, actions: &ActionSet, _rng: &mut RngStream) -> Result<usize, PolicyError> {
        let ActionSet::Vectors(vs) = actions else {
            return Err(PolicyError::WrongActionKind);
        };
        if vs.is_empty() {
            return Err(PolicyError::EmptyActionSet);
        }
        for a in vs {
            self.check_dim(a)?;
        }
        Ok(argmax(vs.iter().map(|a| self.score(a, t))).expect("nonempty"))
    }

    fn update(&mut self, action: &Action, r_hat: f64) -> Result<(), PolicyError> {
        let Action::Vector(a) = action else {
            return Err(PolicyError::WrongActionKind);
        };
        self.check_dim(a)?;
        let d = self.d;
        for i in 0..d {
            for j in 0..d {
                self.gram[i * d + j] += a[i] * a[j];
            }
            self.response[i] += a[i] * r_hat;
        }
        self.factor = cholesky(&self.gram, d).ok_or(PolicyError::NotPositiveDefinite)?;
        self.theta = cholesky_solve(&self.factor, d, &self.response);
        Ok(())
    }

    fn theta(&self) -> Option<&[f64]> {
        Some(&self.theta)
    }
}
