//! JSON experiment files and their resolution into run configurations.
//!
//! ```json
//! {
//!   "preset": "setup1",
//!   "output_dir": "out/setup1",
//!   "overrides": {
//!     "horizon": 10000, "runs": 10, "seed": 42,
//!     "variants": ["ucb_quban_avg_arm_pt", "ucb_unquantized"],
//!     "env": { "k": 50, "reward_stddev": 0.5 },
//!     "policy": { "policy": "ucb", "sigma_q": 0.2 },
//!     "quantizer": { "kind": "quban", "epsilon": 0.5 },
//!     "guard": { "bound": 13 }
//!   }
//! }
//! ```
//!
//! Every key is optional except `preset`. Unknown keys are rejected.
//! `policy.policy` and `quantizer.kind` select the variants of that kind;
//! the remaining fields override the matching parameter of every selected
//! variant.

use std::path::{Path, PathBuf};

use quban_core::envs::{EnvSpec, Preset};
use quban_core::estimators::EstimatorKind;
use quban_core::presets::{self, DEFAULT_HORIZON, DEFAULT_RUNS};
use quban_core::sim::{GuardSpec, PolicySpec, QuantizerSpec, RunConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: String,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub horizon: Option<u64>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    /// Keep only these variant names.
    pub variants: Option<Vec<String>>,
    pub env: Option<EnvOverrides>,
    pub policy: Option<PolicyOverrides>,
    pub quantizer: Option<QuantizerOverrides>,
    /// Enables the per-message bit cap on variable-length variants.
    pub guard: Option<GuardOverrides>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvOverrides {
    pub k: Option<usize>,
    pub mean_center: Option<f64>,
    pub mean_stddev: Option<f64>,
    pub clip: Option<f64>,
    pub d: Option<usize>,
    pub actions_per_step: Option<usize>,
    pub action_radius: Option<f64>,
    /// Reward noise; the linear model's `eta` for setup3.
    pub reward_stddev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyOverrides {
    /// `"ucb" | "eps_greedy" | "linucb"`.
    pub policy: Option<String>,
    pub sigma_q: Option<f64>,
    pub eps_c: Option<f64>,
    pub delta_min: Option<f64>,
    pub ridge_lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizerOverrides {
    /// `"none" | "sq" | "quban"`.
    pub kind: Option<String>,
    pub bits: Option<u32>,
    /// Half-width of the SQ grid `[-range, range]`.
    pub range: Option<f64>,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub x_scale: Option<f64>,
    pub estimator: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuardOverrides {
    /// Bit budget; defaults to the horizon's high-probability bound.
    pub bound: Option<u32>,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub preset: Preset,
    pub variants: Vec<RunConfig>,
    pub runs: usize,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_preset(preset: &str) -> Self {
        Self {
            preset: preset.to_string(),
            ..Self::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn resolve(&self) -> Result<Experiment, CliError> {
        let preset = Preset::from_name(&self.preset).map_err(|e| CliError::Config(e.to_string()))?;
        let o = &self.overrides;
        let horizon = o.horizon.unwrap_or(DEFAULT_HORIZON);
        if horizon == 0 {
            return Err(CliError::Config("horizon must be at least 1".into()));
        }
        let runs = o.runs.unwrap_or(DEFAULT_RUNS);
        if runs == 0 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        let mut variants = presets::variants(preset, horizon);

        if let Some(names) = &o.variants {
            for n in names {
                if !variants.iter().any(|v| &v.name == n) {
                    let known: Vec<&str> = variants.iter().map(|v| v.name.as_str()).collect();
                    return Err(CliError::Config(format!(
                        "unknown variant {n:?} for {}; known: {}",
                        preset.name(),
                        known.join(", ")
                    )));
                }
            }
            variants.retain(|v| names.contains(&v.name));
        }
        if let Some(env) = &o.env {
            for v in &mut variants {
                apply_env(&mut v.env, env)?;
            }
        }
        if let Some(p) = &o.policy {
            if let Some(kind) = &p.policy {
                if !["ucb", "eps_greedy", "linucb"].contains(&kind.as_str()) {
                    return Err(CliError::Config(format!("unknown policy {kind:?}")));
                }
                variants.retain(|v| policy_kind(&v.policy) == kind);
            }
            for v in &mut variants {
                apply_policy(&mut v.policy, p);
            }
        }
        if let Some(q) = &o.quantizer {
            if let Some(kind) = &q.kind {
                if !["none", "sq", "quban"].contains(&kind.as_str()) {
                    return Err(CliError::Config(format!("unknown quantizer {kind:?}")));
                }
                variants.retain(|v| quantizer_kind(&v.quantizer) == kind);
            }
            for v in &mut variants {
                apply_quantizer(&mut v.quantizer, q)?;
            }
        }
        if let Some(g) = &o.guard {
            for v in &mut variants {
                if matches!(v.quantizer, QuantizerSpec::Quban { .. }) {
                    v.guard = Some(GuardSpec { bound: g.bound });
                }
            }
        }
        if variants.is_empty() {
            return Err(CliError::Config("the overrides select no variants".into()));
        }
        for v in &variants {
            v.validate()
                .map_err(|e| CliError::Config(format!("variant {}: {e}", v.name)))?;
        }
        Ok(Experiment {
            preset,
            variants,
            runs,
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            output_dir: self.output_dir.clone(),
        })
    }
}

fn policy_kind(p: &PolicySpec) -> &'static str {
    match p {
        PolicySpec::Ucb { .. } => "ucb",
        PolicySpec::EpsGreedy { .. } => "eps_greedy",
        PolicySpec::LinUcb { .. } => "linucb",
    }
}

fn quantizer_kind(q: &QuantizerSpec) -> &'static str {
    match q {
        QuantizerSpec::None => "none",
        QuantizerSpec::Sq { .. } => "sq",
        QuantizerSpec::Quban { .. } => "quban",
    }
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_env(spec: &mut EnvSpec, o: &EnvOverrides) -> Result<(), CliError> {
    match spec {
        EnvSpec::KArmed {
            k,
            mean_center,
            mean_stddev,
            reward_stddev,
            clip,
        } => {
            if o.d.is_some() || o.actions_per_step.is_some() || o.action_radius.is_some() {
                return Err(CliError::Config(
                    "d, actions_per_step and action_radius apply to setup3 only".into(),
                ));
            }
            set(k, o.k);
            set(mean_center, o.mean_center);
            set(mean_stddev, o.mean_stddev);
            set(reward_stddev, o.reward_stddev);
            if o.clip.is_some() {
                *clip = o.clip;
            }
        }
        EnvSpec::Linear {
            d,
            noise_stddev,
            actions_per_step,
            action_radius,
        } => {
            if o.k.is_some() || o.mean_center.is_some() || o.mean_stddev.is_some() || o.clip.is_some() {
                return Err(CliError::Config(
                    "k, mean_center, mean_stddev and clip apply to k-armed presets only".into(),
                ));
            }
            set(d, o.d);
            set(noise_stddev, o.reward_stddev);
            set(actions_per_step, o.actions_per_step);
            set(action_radius, o.action_radius);
        }
    }
    Ok(())
}

fn apply_policy(spec: &mut PolicySpec, o: &PolicyOverrides) {
    match spec {
        PolicySpec::Ucb { sigma_q } => set(sigma_q, o.sigma_q),
        PolicySpec::EpsGreedy { sigma_q, c, delta_min } => {
            set(sigma_q, o.sigma_q);
            set(c, o.eps_c);
            if o.delta_min.is_some() {
                *delta_min = o.delta_min;
            }
        }
        PolicySpec::LinUcb { sigma_q, ridge_lambda } => {
            set(sigma_q, o.sigma_q);
            set(ridge_lambda, o.ridge_lambda);
        }
    }
}

fn apply_quantizer(spec: &mut QuantizerSpec, o: &QuantizerOverrides) -> Result<(), CliError> {
    match spec {
        QuantizerSpec::None => {}
        QuantizerSpec::Sq { bits, lo, hi } => {
            set(bits, o.bits);
            if let Some(r) = o.range {
                *lo = -r;
                *hi = r;
            }
        }
        QuantizerSpec::Quban {
            epsilon,
            sigma,
            x_scale,
            estimator,
        } => {
            set(epsilon, o.epsilon);
            set(sigma, o.sigma);
            set(x_scale, o.x_scale);
            if let Some(name) = &o.estimator {
                *estimator = EstimatorKind::from_name(name)
                    .ok_or_else(|| CliError::Config(format!("unknown estimator {name:?}")))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_defaults() {
        let e = ExperimentConfig::from_preset("setup3").resolve().unwrap();
        assert_eq!(e.runs, DEFAULT_RUNS);
        assert_eq!(e.seed, DEFAULT_SEED);
        assert_eq!(e.variants.len(), 4);
        assert!(e.variants.iter().all(|v| v.horizon == DEFAULT_HORIZON));
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"preset":"setup1","colour":"red"}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"preset":"setup1","overrides":{"env":{"kk":3}}}"#);
        assert!(err.is_err());
    }

    #[test]
    fn overrides_apply() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"preset":"setup1","overrides":{
                "horizon": 50, "runs": 2, "seed": 7,
                "env": {"k": 5},
                "policy": {"policy": "ucb", "sigma_q": 0.3},
                "quantizer": {"kind": "quban", "epsilon": 0.5, "estimator": "avg_pt"},
                "guard": {}
            }}"#,
        )
        .unwrap();
        let e = cfg.resolve().unwrap();
        assert_eq!((e.runs, e.seed), (2, 7));
        assert_eq!(e.variants.len(), 2);
        for v in &e.variants {
            assert_eq!(v.horizon, 50);
            assert_eq!(v.policy, PolicySpec::Ucb { sigma_q: 0.3 });
            assert!(matches!(v.env, EnvSpec::KArmed { k: 5, .. }));
            assert!(matches!(
                v.quantizer,
                QuantizerSpec::Quban {
                    epsilon,
                    estimator: EstimatorKind::AvgPt,
                    ..
                } if epsilon == 0.5
            ));
            assert_eq!(v.guard, Some(GuardSpec { bound: None }));
        }
    }

    #[test]
    fn config_errors() {
        for json in [
            r#"{"preset":"setup9"}"#,
            r#"{"preset":"setup1","overrides":{"variants":["nope"]}}"#,
            r#"{"preset":"setup1","overrides":{"env":{"d":3}}}"#,
            r#"{"preset":"setup3","overrides":{"env":{"k":3}}}"#,
            r#"{"preset":"setup1","overrides":{"policy":{"policy":"linucb"}}}"#,
            r#"{"preset":"setup1","overrides":{"horizon":0}}"#,
            r#"{"preset":"setup1","overrides":{"quantizer":{"estimator":"median"}}}"#,
            r#"{"preset":"setup1","overrides":{"quantizer":{"bits":0}}}"#,
        ] {
            let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
            assert!(matches!(cfg.resolve(), Err(CliError::Config(_))), "{json}");
        }
    }
}
