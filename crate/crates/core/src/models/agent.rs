use rand::Rng;
use serde::{Deserialize, Serialize};

use super::basis::{combine_responses, BasisCritic, BasisPolicies, SigmaHead};
use super::gating::{GatingMode, GatingNet, GatingVector};
use crate::envs::{Action, Observation};
use crate::error::{Error, Result};
use crate::numerics::DenseLayer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Number of basis components K.
    pub k: usize,
    pub gating_mode: GatingMode,
    /// Gate on the whole observation instead of the goal slice only.
    pub gate_on_full_state: bool,
    /// Exploration noise σ_G added to G while acting.
    pub gate_noise_std: f64,
    pub critic_hidden: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            k: 8,
            gating_mode: GatingMode::Shared,
            gate_on_full_state: false,
            gate_noise_std: 0.1,
            critic_hidden: 32,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=64).contains(&self.k) {
            return Err(Error::Config(format!("model.k must be in 1..=64, got {}", self.k)));
        }
        if !(self.gate_noise_std >= 0.0 && self.gate_noise_std.is_finite()) {
            return Err(Error::Config("model.gate_noise_std must be finite and >= 0".into()));
        }
        if self.critic_hidden == 0 {
            return Err(Error::Config("model.critic_hidden must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorOutput {
    pub mu: Action,
    pub sigma: Action,
    pub gating: GatingVector,
}

/// Slowly tracking copy of one critic: its own gate copy plus basis heads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetCritic {
    pub gating: GatingNet,
    pub basis: BasisCritic,
}

impl TargetCritic {
    pub fn value(&self, s: &Observation, a: &Action) -> f64 {
        let g = self.gating.gate_det(s);
        crate::numerics::dot(&g.0, &self.basis.responses(s, a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearAgent {
    pub config: ModelConfig,
    /// Critic gate; also the actor's gate in shared mode.
    pub gating: GatingNet,
    /// Actor-only gate G^(A), present in independent mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actor_gating: Option<GatingNet>,
    pub basis_policies: BasisPolicies,
    pub sigma_head: SigmaHead,
    pub critics: [BasisCritic; 2],
    pub targets: [TargetCritic; 2],
}

impl BilinearAgent {
    pub fn init<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let k = config.k;
        let gating = GatingNet::init(k, config.gate_on_full_state, config.gate_noise_std, rng);
        let actor_gating = match config.gating_mode {
            GatingMode::Shared => None,
            GatingMode::Independent => Some(GatingNet::init(
                k,
                config.gate_on_full_state,
                config.gate_noise_std,
                rng,
            )),
        };
        let basis_policies = BasisPolicies::init(k, rng);
        let sigma_head = SigmaHead::init(rng);
        let critics = [
            BasisCritic::init(k, config.critic_hidden, rng),
            BasisCritic::init(k, config.critic_hidden, rng),
        ];
        let targets = [
            TargetCritic {
                gating: gating.clone(),
                basis: critics[0].clone(),
            },
            TargetCritic {
                gating: gating.clone(),
                basis: critics[1].clone(),
            },
        ];
        Ok(Self {
            config,
            gating,
            actor_gating,
            basis_policies,
            sigma_head,
            critics,
            targets,
        })
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn mode(&self) -> GatingMode {
        if self.actor_gating.is_some() {
            GatingMode::Independent
        } else {
            GatingMode::Shared
        }
    }

    /// The gate the actor reads: the shared gate, or G^(A).
    pub fn actor_gate(&self) -> &GatingNet {
        self.actor_gating.as_ref().unwrap_or(&self.gating)
    }

    pub fn critic_gate(&self) -> &GatingNet {
        &self.gating
    }

    /// Actor head with an externally supplied gating vector (gate bypassed).
    pub fn actor_with_gating(&self, gating: GatingVector, s: &Observation) -> Result<ActorOutput> {
        let mu = self.basis_policies.mean(&gating.0, s)?;
        let (sigma, _) = self.sigma_head.sigma(s);
        Ok(ActorOutput { mu, sigma, gating })
    }

    /// Actor head through its gate; `noise` enables gate exploration noise.
    pub fn actor<R: Rng + ?Sized>(&self, s: &Observation, noise: Option<&mut R>) -> ActorOutput {
        let gating = self.actor_gate().gate(s, noise);
        let mu = combine_responses(&gating.0, &self.basis_policies.responses(s));
        let (sigma, _) = self.sigma_head.sigma(s);
        ActorOutput { mu, sigma, gating }
    }

    pub fn actor_det(&self, s: &Observation) -> ActorOutput {
        self.actor::<rand_chacha::ChaCha8Rng>(s, None)
    }

    /// Q_i(s,a,g) through the critic gate.
    pub fn critic_value(&self, i: usize, s: &Observation, a: &Action) -> f64 {
        let g = self.gating.gate_det(s);
        crate::numerics::dot(&g.0, &self.critics[i].responses(s, a))
    }

    /// Soft target update `target ← τ·online + (1−τ)·target` for both critics.
    pub fn ema_update(&mut self, tau: f64) -> Result<()> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Config(format!("tau must be in (0, 1], got {tau}")));
        }
        for i in 0..2 {
            let t = &mut self.targets[i];
            ema_layer(&mut t.gating.layer, &self.gating.layer, tau);
            for (tl, ol) in t.basis.layers_mut().into_iter().zip(self.critics[i].layers()) {
                ema_layer(tl, ol, tau);
            }
        }
        Ok(())
    }

    /// Named parameter groups in a fixed order.
    pub fn param_groups(&self) -> Vec<(&'static str, Vec<&DenseLayer>)> {
        let mut groups = vec![("gating", vec![&self.gating.layer])];
        if let Some(ag) = &self.actor_gating {
            groups.push(("actor_gating", vec![&ag.layer]));
        }
        groups.push(("basis_policies", self.basis_policies.layers.iter().collect()));
        groups.push(("sigma_head", vec![&self.sigma_head.layer]));
        groups.push(("critic1", self.critics[0].layers().collect()));
        groups.push(("critic2", self.critics[1].layers().collect()));
        for (name, t) in [("target1", &self.targets[0]), ("target2", &self.targets[1])] {
            let mut v = vec![&t.gating.layer];
            v.extend(t.basis.layers());
            groups.push((name, v));
        }
        groups
    }

    pub fn is_finite(&self) -> bool {
        self.param_groups()
            .iter()
            .all(|(_, ls)| ls.iter().all(|l| l.is_finite()))
    }

    /// SHA-256 over every parameter.
    pub fn checksum(&self) -> String {
        super::checkpoint::sha256_hex(&serde_json::to_vec(self).expect("agent serializes"))
    }

    /// SHA-256 over the frozen bases: Y_k and both critics' φ_k.
    pub fn bases_checksum(&self) -> String {
        let bytes = serde_json::to_vec(&(&self.basis_policies, &self.critics)).expect("bases serialize");
        super::checkpoint::sha256_hex(&bytes)
    }
}

pub fn ema_layer(target: &mut DenseLayer, online: &DenseLayer, tau: f64) {
    for (t, o) in target.slices_mut().into_iter().zip(online.slices()) {
        for (tv, ov) in t.iter_mut().zip(o) {
            *tv = tau * ov + (1.0 - tau) * *tv;
        }
    }
}
