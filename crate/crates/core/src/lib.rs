//! Bilinear co-decomposed soft actor–critic.
//!
//! Policy and value share one low-dimensional multiplicative gating vector
//! `G`. The crate provides the model, a SAC trainer, a point-mass
//! directional-navigation task, zero-shot goal conditioning, online
//! adaptation of `G` by a linear TD rule with frozen bases, and tools to
//! analyse the learned `G`-space.

pub mod envs;
pub mod error;
pub mod models;
pub mod numerics;
pub mod rng;

pub use error::{Error, Result};
pub mod adapt;
pub mod analysis;
pub mod sac;
pub mod cli;
