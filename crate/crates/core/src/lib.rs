//! Reward quantization for distributed multi-armed bandits.
//!
//! A learner picks an action, a memoryless agent plays it and sends the
//! observed reward back over a constrained uplink. This crate provides the
//! agent-side encoder and learner-side decoder for a variable-length,
//! prefix-free reward code centred on a learner-broadcast estimate, together
//! with the bandit policies, reward environments and simulation loop used to
//! measure regret against uplink bits.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel dispatch live in the `quban` companion crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod bandits;
pub mod bits;
pub mod codec;
pub mod envs;
pub mod estimators;
mod math;
pub mod metrics;
pub mod presets;
pub mod rng;
pub mod sim;
pub mod sq;

pub use bandits::{Action, ActionSet};
pub use bits::{BitReader, BitString, OutOfBits};
pub use codec::{QuantizerConfig, QubanFrame};
pub use metrics::{Aggregate, RunMetrics, StepRecord};
pub use rng::RngStream;
