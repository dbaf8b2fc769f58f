//! Per-step run records and cross-run aggregation.

use alloc::string::String;
use alloc::vec::Vec;

use crate::math;

/// One interaction step. Regret and bit columns are cumulative up to `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    /// Index into the offered action set (the arm for k-armed bandits).
    pub action: usize,
    pub reward: f64,
    pub reward_hat: f64,
    pub bits: u32,
    pub cum_bits: u64,
    pub regret_realized: f64,
    pub regret_pseudo: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetrics {
    /// Identifies the run configuration; runs merge only if tags match.
    pub config_tag: String,
    pub records: Vec<StepRecord>,
    pub cum_bits: u64,
    pub realized_regret: f64,
    pub pseudo_regret: f64,
    pub guard_activations: u64,
}

impl RunMetrics {
    pub fn new(config_tag: impl Into<String>) -> Self {
        Self {
            config_tag: config_tag.into(),
            ..Self::default()
        }
    }

    /// Appends step `t = len + 1`. `best_mean` is `mu*_t` and `chosen_mean`
    /// the mean of the action played.
    pub fn push(
        &mut self,
        action: usize,
        reward: f64,
        reward_hat: f64,
        bits: u32,
        best_mean: f64,
        chosen_mean: f64,
    ) -> &StepRecord {
        self.cum_bits += u64::from(bits);
        self.realized_regret += best_mean - reward;
        self.pseudo_regret += best_mean - chosen_mean;
        self.records.push(StepRecord {
            t: self.records.len() as u64 + 1,
            action,
            reward,
            reward_hat,
            bits,
            cum_bits: self.cum_bits,
            regret_realized: self.realized_regret,
            regret_pseudo: self.pseudo_regret,
        });
        self.records.last().expect("just pushed")
    }

    pub fn horizon(&self) -> u64 {
        self.records.len() as u64
    }

    /// `B(n) = cum_bits / n`.
    pub fn avg_bits(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.cum_bits as f64 / self.records.len() as f64
        }
    }

    /// Average bits over the first `t` steps.
    pub fn avg_bits_at(&self, t: u64) -> Option<f64> {
        let rec = self.records.get(usize::try_from(t).ok()?.checked_sub(1)?)?;
        Some(rec.cum_bits as f64 / t as f64)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("cannot aggregate zero runs")]
    Empty,
    #[error("run configurations differ: {0:?} vs {1:?}")]
    ConfigMismatch(String, String),
    #[error("run lengths differ: {0} vs {1}")]
    LengthMismatch(u64, u64),
}

/// One row of the per-step aggregate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub t: u64,
    pub regret_mean: f64,
    pub regret_std: f64,
    pub bits_mean: f64,
    pub avg_bits_mean: f64,
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self::default();
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, std: 0.0 };
        }
        let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        Self {
            mean,
            std: math::sqrt(ss / (n - 1) as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub config_tag: String,
    pub runs: usize,
    pub horizon: u64,
    /// Realized regret, bits and average bits per step across runs.
    pub curve: Vec<AggregateRow>,
    pub final_regret: Stat,
    pub final_pseudo_regret: Stat,
    pub avg_bits: Stat,
    pub guard_activations: Stat,
}

impl Aggregate {
    pub fn from_runs(runs: &[RunMetrics]) -> Result<Self, MetricsError> {
        let first = runs.first().ok_or(MetricsError::Empty)?;
        for r in &runs[1..] {
            if r.config_tag != first.config_tag {
                return Err(MetricsError::ConfigMismatch(first.config_tag.clone(), r.config_tag.clone()));
            }
            if r.horizon() != first.horizon() {
                return Err(MetricsError::LengthMismatch(first.horizon(), r.horizon()));
            }
        }
        let n = first.records.len();
        let mut curve = Vec::with_capacity(n);
        let mut regret = Vec::with_capacity(runs.len());
        let mut bits = Vec::with_capacity(runs.len());
        for i in 0..n {
            regret.clear();
            bits.clear();
            for r in runs {
                regret.push(r.records[i].regret_realized);
                bits.push(r.records[i].cum_bits as f64);
            }
            let t = i as u64 + 1;
            let rs = Stat::of(&regret);
            let bs = Stat::of(&bits);
            curve.push(AggregateRow {
                t,
                regret_mean: rs.mean,
                regret_std: rs.std,
                bits_mean: bs.mean,
                avg_bits_mean: bs.mean / t as f64,
            });
        }
        let collect = |f: fn(&RunMetrics) -> f64| Stat::of(&runs.iter().map(f).collect::<Vec<_>>());
        Ok(Self {
            config_tag: first.config_tag.clone(),
            runs: runs.len(),
            horizon: first.horizon(),
            curve,
            final_regret: collect(|r| r.realized_regret),
            final_pseudo_regret: collect(|r| r.pseudo_regret),
            avg_bits: collect(RunMetrics::avg_bits),
            guard_activations: collect(|r| r.guard_activations as f64),
        })
    }
}

/// Aggregates two runs of the same configuration.
pub fn metrics_merge(a: &RunMetrics, b: &RunMetrics) -> Result<Aggregate, MetricsError> {
    Aggregate::from_runs(&[a.clone(), b.clone()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run(tag: &str, bits: &[u32]) -> RunMetrics {
        let mut m = RunMetrics::new(tag);
        for (i, &b) in bits.iter().enumerate() {
            m.push(i, 1.0, 1.0, b, 2.0, 1.5);
        }
        m
    }

    #[test]
    fn merge_average_bits() {
        let a = run("x", &[3; 100]);
        let mut bits = alloc::vec![3u32; 100];
        for b in bits.iter_mut().take(40) {
            *b = 4;
        }
        let b = run("x", &bits);
        assert_eq!(a.cum_bits, 300);
        assert_eq!(b.cum_bits, 340);
        let agg = metrics_merge(&a, &b).unwrap();
        assert!((agg.avg_bits.mean - 3.2).abs() < 1e-12);
    }

    #[test]
    fn merge_with_copy_has_zero_spread() {
        let a = run("x", &[3, 7, 1]);
        let agg = metrics_merge(&a, &a).unwrap();
        assert_eq!(agg.final_regret.std, 0.0);
        assert_eq!(agg.avg_bits.std, 0.0);
        assert!(agg.curve.iter().all(|r| r.regret_std == 0.0));
    }

    #[test]
    fn sample_stddev_over_ten() {
        let runs: Vec<RunMetrics> = (1..=10).map(|b| run("x", &[b])).collect();
        let agg = Aggregate::from_runs(&runs).unwrap();
        // Bits 1..=10: mean 5.5, sample variance 55/6.
        assert!((agg.avg_bits.mean - 5.5).abs() < 1e-12);
        assert!((agg.avg_bits.std - (55.0f64 / 6.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mismatches() {
        let a = run("x", &[1]);
        assert!(matches!(metrics_merge(&a, &run("y", &[1])), Err(MetricsError::ConfigMismatch(..))));
        assert!(matches!(metrics_merge(&a, &run("x", &[1, 1])), Err(MetricsError::LengthMismatch(..))));
        assert_eq!(Aggregate::from_runs(&[]), Err(MetricsError::Empty));
    }

    #[test]
    fn regret_accumulators() {
        let mut m = RunMetrics::new("x");
        m.push(0, 0.5, 0.5, 2, 2.0, 1.0);
        m.push(1, 3.0, 3.0, 2, 2.0, 2.0);
        assert_eq!(m.realized_regret, 1.5 - 1.0);
        assert_eq!(m.pseudo_regret, 1.0);
        assert_eq!(m.records[1].t, 2);
        assert_eq!(m.avg_bits_at(1), Some(2.0));
        assert_eq!(m.avg_bits_at(0), None);
    }

    proptest! {
        #[test]
        fn cum_bits_is_sum(bits in proptest::collection::vec(1u32..64, 0..300)) {
            let m = run("x", &bits);
            prop_assert_eq!(m.cum_bits, bits.iter().map(|&b| u64::from(b)).sum::<u64>());
            prop_assert_eq!(m.records.len(), bits.len());
            for (i, r) in m.records.iter().enumerate() {
                prop_assert_eq!(r.cum_bits, bits[..=i].iter().map(|&b| u64::from(b)).sum::<u64>());
                prop_assert_eq!(r.t, i as u64 + 1);
            }
        }
    }
}
