//! Named experiment variants for each environment preset.
//!
//! Every variant of a preset shares the environment recipe, so runs with the
//! same seed see the same arm means (or `theta*`) and differ only in the
//! policy and uplink.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::envs::{EnvSpec, Preset};
use crate::estimators::EstimatorKind;
use crate::math;
use crate::sim::{PolicySpec, QuantizerSpec, RunConfig};

pub const DEFAULT_HORIZON: u64 = 10_000;
pub const DEFAULT_RUNS: usize = 10;

/// Exploration constant used with full-precision and variable-length
/// rewards.
pub const SIGMA_Q: f64 = 0.1;
/// Constant of the epsilon-greedy schedule.
pub const EPS_C: f64 = 10.0;

/// Reward noise standard deviation shared by all presets.
pub fn reward_sigma() -> f64 {
    math::sqrt(0.1)
}

fn quban(estimator: EstimatorKind) -> QuantizerSpec {
    QuantizerSpec::Quban {
        epsilon: 1.0,
        sigma: reward_sigma(),
        x_scale: 1.0,
        estimator,
    }
}

/// `r`-bit grid on `[-range, range]` and its exploration constant
/// `2 * range / (2^r - 1)`.
fn sq(bits: u32, range: f64) -> (QuantizerSpec, f64) {
    let spacing = 2.0 * range / ((1u64 << bits) - 1) as f64;
    (
        QuantizerSpec::Sq {
            bits,
            lo: -range,
            hi: range,
        },
        spacing,
    )
}

fn config(name: String, env: EnvSpec, policy: PolicySpec, quantizer: QuantizerSpec, horizon: u64) -> RunConfig {
    RunConfig {
        name,
        env,
        policy,
        quantizer,
        horizon,
        guard: None,
        record_transcript: false,
    }
}

fn karmed_variants(preset: Preset, horizon: u64) -> Vec<RunConfig> {
    let env = EnvSpec::preset(preset);
    let range = 100.0;
    let ucb = |sigma_q| PolicySpec::Ucb { sigma_q };
    let eps = |sigma_q| PolicySpec::EpsGreedy {
        sigma_q,
        c: EPS_C,
        delta_min: None,
    };
    let mut out = Vec::new();
    for (label, policy) in [("ucb", ucb as fn(f64) -> PolicySpec), ("eps_greedy", eps)] {
        out.push(config(
            format!("{label}_unquantized"),
            env.clone(),
            policy(SIGMA_Q),
            QuantizerSpec::None,
            horizon,
        ));
        for est in [EstimatorKind::AvgArmPt, EstimatorKind::AvgPt] {
            out.push(config(
                format!("{label}_quban_{}", est.name()),
                env.clone(),
                policy(SIGMA_Q),
                quban(est),
                horizon,
            ));
        }
        if label == "ucb" {
            for bits in [1, 3, 5] {
                let (q, sigma_q) = sq(bits, range);
                out.push(config(format!("{label}_sq{bits}"), env.clone(), policy(sigma_q), q, horizon));
            }
        }
    }
    out
}

fn linear_variants(horizon: u64) -> Vec<RunConfig> {
    let env = EnvSpec::preset(Preset::Setup3);
    let lin = |sigma_q| PolicySpec::LinUcb {
        sigma_q,
        ridge_lambda: 1.0,
    };
    let mut out = alloc::vec![
        config("linucb_unquantized".into(), env.clone(), lin(SIGMA_Q), QuantizerSpec::None, horizon),
        config(
            "linucb_quban_contextual".into(),
            env.clone(),
            lin(SIGMA_Q),
            quban(EstimatorKind::Contextual),
            horizon,
        ),
    ];
    for bits in [3, 1] {
        let (q, sigma_q) = sq(bits, 10.0);
        out.push(config(format!("linucb_sq{bits}"), env.clone(), lin(sigma_q), q, horizon));
    }
    out
}

fn clipped_variants(horizon: u64) -> Vec<RunConfig> {
    let mut out = Vec::new();
    for (lambda, sigma_q) in [(1.0, 2.0), (100.0, SIGMA_Q)] {
        let mut env = EnvSpec::preset(Preset::AppG);
        if let EnvSpec::KArmed { clip, .. } = &mut env {
            *clip = Some(lambda);
        }
        out.push(config(
            format!("ucb_unquantized_clip{lambda}"),
            env.clone(),
            PolicySpec::Ucb { sigma_q },
            QuantizerSpec::None,
            horizon,
        ));
        let (q, _) = sq(1, lambda);
        out.push(config(
            format!("ucb_sq1_clip{lambda}"),
            env,
            PolicySpec::Ucb { sigma_q: 2.0 * lambda },
            q,
            horizon,
        ));
    }
    out
}

/// All variants of `preset` at horizon `horizon`.
pub fn variants(preset: Preset, horizon: u64) -> Vec<RunConfig> {
    match preset {
        Preset::Setup1 | Preset::Setup2 => karmed_variants(preset, horizon),
        Preset::Setup3 => linear_variants(horizon),
        Preset::AppG => clipped_variants(horizon),
    }
}

/// Looks up one variant by name.
pub fn variant(preset: Preset, name: &str, horizon: u64) -> Option<RunConfig> {
    variants(preset, horizon).into_iter().find(|c| c.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_variant_validates_and_names_are_unique() {
        for p in Preset::ALL {
            let vs = variants(p, 100);
            assert!(!vs.is_empty());
            for (i, v) in vs.iter().enumerate() {
                v.validate().unwrap();
                assert!(vs[i + 1..].iter().all(|w| w.name != v.name), "duplicate {}", v.name);
            }
        }
    }

    #[test]
    fn setup3_legend() {
        let names: Vec<String> = variants(Preset::Setup3, 10).into_iter().map(|c| c.name).collect();
        assert_eq!(
            names,
            ["linucb_unquantized", "linucb_quban_contextual", "linucb_sq3", "linucb_sq1"]
        );
    }

    #[test]
    fn sq_exploration_constants() {
        let v = variant(Preset::Setup1, "ucb_sq3", 10).unwrap();
        assert_eq!(v.policy, PolicySpec::Ucb { sigma_q: 200.0 / 7.0 });
        let v = variant(Preset::Setup3, "linucb_sq1", 10).unwrap();
        assert!(matches!(v.policy, PolicySpec::LinUcb { sigma_q, .. } if sigma_q == 20.0));
        let v = variant(Preset::AppG, "ucb_sq1_clip100", 10).unwrap();
        assert_eq!(v.policy, PolicySpec::Ucb { sigma_q: 200.0 });
        assert_eq!(v.quantizer, QuantizerSpec::Sq { bits: 1, lo: -100.0, hi: 100.0 });
    }
}
