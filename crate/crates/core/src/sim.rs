//! The learner/agent interaction loop.
//!
//! Each step the learner picks an action and, for the variable-length code,
//! broadcasts `(mu_hat, M_t)`. A memoryless agent plays the action, encodes
//! its reward onto an uplink [`BitString`], and the learner decodes that
//! message and updates its policy and centre estimate. Only uplink bits are
//! counted.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bandits::{ConfidenceRadius, EpsGreedy, LinUcb, Policy, PolicyError, Ucb};
use crate::bits::{BitString, OutOfBits};
use crate::codec::{self, CodecError, QuantizerConfig, ScaleSampler};
use crate::envs::{sample_env, Env, EnvError, EnvSpec};
use crate::estimators::{EstimatorKind, MeanEstimatorState};
use crate::math;
use crate::metrics::{Aggregate, MetricsError, RunMetrics};
use crate::rng::{run_seed, streams, RngStream};
use crate::sq::{self, LevelGrid, SqError};

/// Bits charged per reward by the unquantized baseline.
pub const UNQUANTIZED_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Ucb {
        sigma_q: f64,
    },
    EpsGreedy {
        sigma_q: f64,
        c: f64,
        /// Oracle gap; `None` takes the sampled environment's true gap.
        delta_min: Option<f64>,
    },
    LinUcb {
        sigma_q: f64,
        ridge_lambda: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantizerSpec {
    /// Full-precision rewards, charged [`UNQUANTIZED_BITS`] each.
    None,
    /// `bits`-bit stochastic quantizer on `2^bits` levels spanning
    /// `[lo, hi]`; rewards are clipped into the range first.
    Sq { bits: u32, lo: f64, hi: f64 },
    /// Variable-length code with `M_t = epsilon * sigma * x_scale`.
    Quban {
        epsilon: f64,
        sigma: f64,
        x_scale: f64,
        estimator: EstimatorKind,
    },
}

/// Caps every uplink message at a bit budget by replacing oversize frames
/// with one random bit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GuardSpec {
    /// Budget in bits; `None` uses `instantaneous_bound(horizon)`.
    pub bound: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub env: EnvSpec,
    pub policy: PolicySpec,
    pub quantizer: QuantizerSpec,
    pub horizon: u64,
    pub guard: Option<GuardSpec>,
    pub record_transcript: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.env.validate()?;
        if self.horizon == 0 {
            return Err(SimError::Config("horizon must be at least 1"));
        }
        match (&self.env, &self.policy) {
            (EnvSpec::KArmed { .. }, PolicySpec::LinUcb { .. }) => {
                return Err(SimError::Config("linucb needs a linear environment"))
            }
            (EnvSpec::Linear { .. }, PolicySpec::Ucb { .. } | PolicySpec::EpsGreedy { .. }) => {
                return Err(SimError::Config("ucb and eps_greedy need a k-armed environment"))
            }
            _ => {}
        }
        match self.quantizer {
            QuantizerSpec::None => {}
            QuantizerSpec::Sq { bits, lo, hi } => {
                LevelGrid::uniform(lo, hi, bits)?;
            }
            QuantizerSpec::Quban {
                epsilon,
                sigma,
                x_scale,
                estimator,
            } => {
                QuantizerConfig::new(epsilon, sigma)?;
                if !(x_scale.is_finite() && x_scale >= 1.0) {
                    return Err(SimError::Config("x_scale must be at least 1"));
                }
                let linear = matches!(self.env, EnvSpec::Linear { .. });
                if linear != (estimator == EstimatorKind::Contextual) {
                    return Err(SimError::Config(
                        "the contextual estimator is for linear bandits, the others for k-armed",
                    ));
                }
            }
        }
        if self.guard.is_some() && !matches!(self.quantizer, QuantizerSpec::Quban { .. }) {
            return Err(SimError::Config("the guard applies to the variable-length code only"));
        }
        Ok(())
    }

    /// Everything that must match for runs to be aggregated together.
    pub fn tag(&self) -> String {
        format!(
            "{}|{:?}|{:?}|{:?}|{}|{:?}",
            self.name, self.env, self.policy, self.quantizer, self.horizon, self.guard
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid run config: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Sq(#[from] SqError),
    #[error(transparent)]
    Wire(#[from] OutOfBits),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// What the learner saw at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptEntry {
    pub t: u64,
    pub action: usize,
    pub reward: f64,
    /// Uplink message; empty for the unquantized baseline.
    pub message: BitString,
    pub reward_hat: f64,
    pub bits: u32,
    pub mu_hat: f64,
    pub m: f64,
    pub guarded: bool,
}

pub type Transcript = Vec<TranscriptEntry>;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub transcript: Option<Transcript>,
}

/// Agent side of the variable-length code. It sees only the reward, the
/// broadcast centre and step, and its own randomness.
pub fn agent_transmit(
    r: f64,
    mu_hat: f64,
    m: f64,
    rng: &mut RngStream,
    uplink: &mut BitString,
) -> Result<(), CodecError> {
    codec::encode(r, mu_hat, m, rng)?.write_to(uplink);
    Ok(())
}

enum Uplink {
    None,
    Sq(LevelGrid),
    Quban {
        config: QuantizerConfig,
        estimator: MeanEstimatorState,
        guard: Option<u32>,
    },
}

fn build_policy(spec: &PolicySpec, env: &Env, horizon: u64) -> Result<Box<dyn Policy>, SimError> {
    Ok(match (spec, env) {
        (PolicySpec::Ucb { sigma_q }, Env::KArmed(e)) => Box::new(Ucb::new(e.k(), *sigma_q)?),
        (PolicySpec::EpsGreedy { sigma_q, c, delta_min }, Env::KArmed(e)) => {
            // With all arms tied any positive gap gives the same regret.
            let delta = delta_min.or_else(|| e.delta_min()).unwrap_or(1.0);
            Box::new(EpsGreedy::new(e.k(), *sigma_q, *c, delta)?)
        }
        (PolicySpec::LinUcb { sigma_q, ridge_lambda }, Env::Linear(e)) => Box::new(LinUcb::new(
            e.d(),
            *ridge_lambda,
            ConfidenceRadius::Standard {
                sigma_q: *sigma_q,
                horizon,
                norm_bound: e.action_radius,
            },
        )?),
        _ => return Err(SimError::Config("policy does not match the environment")),
    })
}

/// Executes one run of `config.horizon` steps.
pub fn run_once(config: &RunConfig, seed: u64) -> Result<RunOutput, SimError> {
    config.validate()?;
    let n = config.horizon;
    let env = sample_env(&config.env, seed)?;
    let mut policy = build_policy(&config.policy, &env, n)?;

    let mut rng_reward = RngStream::new(seed, streams::ENV_REWARD);
    let mut rng_actions = RngStream::new(seed, streams::ENV_ACTIONS);
    let mut rng_policy = RngStream::new(seed, streams::POLICY);
    let mut rng_codec = RngStream::new(seed, streams::CODEC);
    let mut rng_scale = RngStream::new(seed, streams::X_SCALE);
    let mut rng_guard = RngStream::new(seed, streams::GUARD);

    let mut uplink = match config.quantizer {
        QuantizerSpec::None => Uplink::None,
        QuantizerSpec::Sq { bits, lo, hi } => Uplink::Sq(LevelGrid::uniform(lo, hi, bits)?),
        QuantizerSpec::Quban {
            epsilon,
            sigma,
            x_scale,
            estimator,
        } => Uplink::Quban {
            config: QuantizerConfig::new(epsilon, sigma)?.with_scale(ScaleSampler::Constant(x_scale)),
            estimator: MeanEstimatorState::new(estimator),
            guard: config
                .guard
                .map(|g| g.bound.unwrap_or_else(|| codec::instantaneous_bound(n))),
        },
    };

    let mut metrics = RunMetrics::new(config.tag());
    metrics.records.reserve(n as usize);
    let mut transcript = config.record_transcript.then(Vec::new);
    let mut wire = BitString::new();

    for t in 1..=n {
        let offered = env.offer(&mut rng_actions);
        let index = policy.select(t, &offered, &mut rng_policy)?;
        let action = offered.get(index).ok_or(PolicyError::EmptyActionSet)?;
        let reward = env.pull(&action, &mut rng_reward)?;

        wire.clear();
        let mut mu_hat = 0.0;
        let mut m = 0.0;
        let mut guarded = false;
        let (reward_hat, bits) = match &mut uplink {
            Uplink::None => (reward, UNQUANTIZED_BITS),
            Uplink::Sq(grid) => {
                let level = sq::encode(grid.clip(reward), grid, &mut rng_codec)?;
                let width = grid.index_width();
                wire.push_bits(level as u64, width);
                let (received, _) = wire.read(0, width as usize)?;
                (sq::decode(received as usize, grid)?, width)
            }
            Uplink::Quban {
                config: qc,
                estimator,
                guard,
            } => {
                mu_hat = estimator.mu_hat(&action, policy.theta());
                m = qc.step(&mut rng_scale)?;
                agent_transmit(reward, mu_hat, m, &mut rng_codec, &mut wire)?;
                if guard.is_some_and(|b| wire.len() > b as usize) {
                    // Oversize frame: send one random central bit instead.
                    guarded = true;
                    wire.clear();
                    wire.push(rng_guard.bernoulli(0.5));
                }
                let r_hat = receive(&wire, mu_hat, m)?;
                estimator.update(&action, r_hat);
                (r_hat, wire.len() as u32)
            }
        };
        policy.update(&action, reward_hat)?;

        let best = env.best_mean(&offered)?;
        let chosen = env.mean(&action)?;
        metrics.push(index, reward, reward_hat, bits, best, chosen);
        if guarded {
            metrics.guard_activations += 1;
        }
        if let Some(tr) = transcript.as_mut() {
            tr.push(TranscriptEntry {
                t,
                action: index,
                reward,
                message: wire.clone(),
                reward_hat,
                bits,
                mu_hat,
                m,
                guarded,
            });
        }
    }
    Ok(RunOutput { metrics, transcript })
}

/// Learner-side decode of one uplink message. A single-bit message is a
/// guard substitute `b`, decoded as `M * (floor(mu_hat / M) + b)`.
fn receive(wire: &BitString, mu_hat: f64, m: f64) -> Result<f64, SimError> {
    if wire.len() == 1 {
        let b = f64::from(u8::from(wire.get(0).expect("one bit")));
        return Ok(m * (math::floor(mu_hat / m) + b));
    }
    let mut reader = wire.reader();
    let (_, r_hat) = codec::decode_from(&mut reader, mu_hat, m)?;
    if reader.remaining() != 0 {
        return Err(CodecError::MalformedFrame("trailing bits after frame").into());
    }
    Ok(r_hat)
}

/// Runs `runs` independent repetitions with seeds derived from
/// `master_seed` and aggregates them.
pub fn run_experiment(config: &RunConfig, runs: usize, master_seed: u64) -> Result<(Vec<RunMetrics>, Aggregate), SimError> {
    if runs == 0 {
        return Err(SimError::Config("runs must be at least 1"));
    }
    let metrics = (0..runs as u64)
        .map(|i| run_once(config, run_seed(master_seed, i)).map(|o| o.metrics))
        .collect::<Result<Vec<_>, _>>()?;
    let agg = Aggregate::from_runs(&metrics)?;
    Ok((metrics, agg))
}
