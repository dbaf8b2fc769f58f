use super::{argmax, Action, ActionSet, ArmStats, Policy, PolicyError};
use crate::math;
use crate::rng::RngStream;

/// UCB with index `mean_i + sigma_q * sqrt(2 ln f(t) / T_i)` and
/// `f(t) = 1 + t ln^2 t`. Arms never pulled are played first, in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Ucb {
    sigma_q: f64,
    stats: ArmStats,
}

impl Ucb {
    pub fn new(k: usize, sigma_q: f64) -> Result<Self, PolicyError> {
        if k == 0 {
            return Err(PolicyError::EmptyActionSet);
        }
        if !(sigma_q.is_finite() && sigma_q >= 0.0) {
            return Err(PolicyError::BadParameter("sigma_q must be non-negative"));
        }
        Ok(Self {
            sigma_q,
            stats: ArmStats::new(k),
        })
    }

    pub fn stats(&self) -> &ArmStats {
        &self.stats
    }

    pub fn sigma_q(&self) -> f64 {
        self.sigma_q
    }

    /// Exploration function `f(t) = 1 + t ln^2 t`.
    pub fn f(t: u64) -> f64 {
        let t = t.max(1) as f64;
        let lt = math::ln(t);
        1.0 + t * lt * lt
    }

    pub fn index(&self, arm: usize, t: u64) -> f64 {
        let n = self.stats.counts[arm];
        if n == 0 {
            return f64::INFINITY;
        }
        self.stats.means[arm] + self.sigma_q * math::sqrt(2.0 * math::ln(Self::f(t)) / n as f64)
    }
}

impl Policy for Ucb {
    fn select(&mut self, t: u64, actions: &ActionSet, _rng: &mut RngStream) -> Result<usize, PolicyError> {
        let k = self.stats.check(actions)?;
        if let Some(i) = self.stats.counts.iter().position(|&n| n == 0) {
            return Ok(i);
        }
        Ok(argmax((0..k).map(|i| self.index(i, t))).expect("k > 0"))
    }

    fn update(&mut self, action: &Action, r_hat: f64) -> Result<(), PolicyError> {
        self.stats.record(action, r_hat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn forced_exploration_order() {
        let mut p = Ucb::new(2, 1.0).unwrap();
        let mut rng = RngStream::new(0, 0);
        let a = p.select(1, &ActionSet::Arms(2), &mut rng).unwrap();
        assert_eq!(a, 0);
        p.update(&Action::Arm(a), 10.0).unwrap();
        let b = p.select(2, &ActionSet::Arms(2), &mut rng).unwrap();
        assert_eq!(b, 1);
    }

    #[test]
    fn update_running_mean() {
        let mut p = Ucb::new(3, 1.0).unwrap();
        p.update(&Action::Arm(1), 1.0).unwrap();
        p.update(&Action::Arm(1), 3.0).unwrap();
        assert_eq!(p.stats().means[1], 2.0);
        assert_eq!(p.stats().counts[1], 2);
        assert_eq!(p.stats().counts[0], 0);
        assert_eq!(p.stats().means[2], 0.0);
    }

    #[test]
    fn errors() {
        let mut p = Ucb::new(2, 1.0).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert_eq!(p.select(1, &ActionSet::Arms(0), &mut rng), Err(PolicyError::EmptyActionSet));
        assert!(matches!(
            p.select(1, &ActionSet::Arms(3), &mut rng),
            Err(PolicyError::ArmCountMismatch { .. })
        ));
        assert_eq!(p.update(&Action::Vector(alloc::vec![1.0]), 0.0), Err(PolicyError::WrongActionKind));
        assert!(Ucb::new(0, 1.0).is_err());
    }

    #[test]
    fn exploration_function() {
        assert_eq!(Ucb::f(1), 1.0);
        let e = core::f64::consts::E;
        assert!((Ucb::f(1) - 1.0).abs() < 1e-15);
        // f(t) at t = 100: 1 + 100 ln^2(100).
        let l = (100.0f64).ln();
        assert!((Ucb::f(100) - (1.0 + 100.0 * l * l)).abs() < 1e-9);
        let _ = e;
    }

    proptest! {
        #[test]
        fn argmax_invariant_to_common_shift(
            rewards in proptest::collection::vec((0usize..5, -10.0f64..10.0), 5..60),
            shift in -100.0f64..100.0,
            t in 10u64..10_000,
        ) {
            let mut a = Ucb::new(5, 0.7).unwrap();
            let mut b = Ucb::new(5, 0.7).unwrap();
            for arm in 0..5 {
                a.update(&Action::Arm(arm), 0.0).unwrap();
                b.update(&Action::Arm(arm), shift).unwrap();
            }
            for &(arm, r) in &rewards {
                a.update(&Action::Arm(arm), r).unwrap();
                b.update(&Action::Arm(arm), r + shift).unwrap();
            }
            let mut rng = RngStream::new(0, 0);
            let ia = a.select(t, &ActionSet::Arms(5), &mut rng).unwrap();
            let ib = b.select(t, &ActionSet::Arms(5), &mut rng).unwrap();
            // Floating rounding may reorder exact ties only.
            if ia != ib {
                let gap = (a.index(ia, t) - a.index(ib, t)).abs();
                prop_assert!(gap < 1e-9 * (1.0 + shift.abs()));
            }
        }
    }
}
