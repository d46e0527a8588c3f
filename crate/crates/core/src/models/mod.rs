//! Bilinear co-decomposed actor and critic.
//!
//! A K-dimensional gating vector G multiplies K basis policies Y_k(s) to
//! give the action mean, and K basis critics φ_k(s,a) to give the value:
//!
//! ```text
//! μ(s,g)   = Σ_k G_k · Y_k(s)
//! Q(s,a,g) = Σ_k G_k · φ_k(s,a)
//! ```
//!
//! In [`GatingMode::Shared`] the same gating layer feeds the actor and both
//! critics; in [`GatingMode::Independent`] the actor owns its own gate.

mod agent;
mod basis;
mod checkpoint;
mod gating;

pub use agent::{ema_layer, ActorOutput, BilinearAgent, ModelConfig, TargetCritic};
pub use basis::{BasisCritic, BasisPolicies, CriticCache, SigmaHead, CRITIC_INPUT_DIM, SIGMA_FLOOR};
pub use checkpoint::{sha256_hex, Checkpoint};
pub use gating::{GatingMode, GatingNet, GatingVector};

use crate::envs::{clamp_action, Action, ACTION_DIM};

/// A sampled action: pre-clamp draw, the clamped action sent to the
/// environment, and the Gaussian log-density at the pre-clamp draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledAction {
    pub raw: Action,
    pub action: Action,
    pub log_prob: f64,
}

pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Diagonal-Gaussian log-density of `μ + σ⊙ε` given the standardized draw ε.
#[inline]
pub fn gaussian_log_prob(sigma: &[f64; ACTION_DIM], eps: &[f64; ACTION_DIM]) -> f64 {
    sigma
        .iter()
        .zip(eps)
        .map(|(s, e)| -HALF_LN_2PI - s.ln() - 0.5 * e * e)
        .sum()
}

/// `a = clamp(μ + σ⊙ε)`; the log-probability is taken before clamping.
pub fn sample_action(out: &ActorOutput, eps: [f64; ACTION_DIM]) -> SampledAction {
    let raw = [
        out.mu[0] + out.sigma[0] * eps[0],
        out.mu[1] + out.sigma[1] * eps[1],
    ];
    SampledAction {
        raw,
        action: clamp_action(raw),
        log_prob: gaussian_log_prob(&out.sigma, &eps),
    }
}

pub fn standard_normal_pair<R: rand::Rng + ?Sized>(rng: &mut R) -> [f64; ACTION_DIM] {
    use rand_distr::StandardNormal;
    [rng.sample(StandardNormal), rng.sample(StandardNormal)]
}
