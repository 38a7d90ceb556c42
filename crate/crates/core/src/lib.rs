//! Covert pilot-scaling attacks on block-fading links.
//!
//! A Trojan transmitter (Tom) hides in a legitimate link between Alice and
//! Willie. During channel estimation Willie's pilot is scaled by (1 + ε),
//! which biases his estimate and opens a blind spot in his radiometer that
//! Tom fills with a covert transmission to Eve.
//!
//! - [`channel`]: parameters and signal synthesis
//! - [`pilot`]: pilot-phase divergence and MMSE estimation
//! - [`detection`]: radiometer thresholds, error probabilities, regimes
//! - [`rates`]: feasibility conditions and covert rates
//! - [`montecarlo`]: simulation oracles for all of the above
//! - [`sweep`], [`config`], [`verify`]: the command-line front end's building blocks

pub mod channel;
pub mod config;
pub mod detection;
pub mod error;
pub mod montecarlo;
pub mod pilot;
pub mod rates;
pub mod rng;
pub mod special;
pub mod sweep;
pub mod verify;

pub use channel::{AttackParams, ChannelParams, SystemConfig};
pub use error::{Error, Result};
