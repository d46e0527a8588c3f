//! Critic and actor objectives with hand-derived gradients.

use crate::envs::{Observation, Transition, ACTION_DIM, OBS_DIM};
use crate::models::{gaussian_log_prob, sample_action, BilinearAgent, CriticCache, GatingMode, SampledAction};
use crate::numerics::{GradTape, LayerGrad};

/// Gradient buffers for every trainable group of a [`BilinearAgent`].
#[derive(Debug, Clone)]
pub struct AgentGrads {
    pub gating: GradTape,
    pub actor_gating: Option<GradTape>,
    pub basis_policies: GradTape,
    pub sigma_head: GradTape,
    pub critics: [GradTape; 2],
}

impl AgentGrads {
    pub fn zeros(agent: &BilinearAgent) -> Self {
        Self {
            gating: GradTape::zeros_like([&agent.gating.layer]),
            actor_gating: agent.actor_gating.as_ref().map(|g| GradTape::zeros_like([&g.layer])),
            basis_policies: GradTape::zeros_like(&agent.basis_policies.layers),
            sigma_head: GradTape::zeros_like([&agent.sigma_head.layer]),
            critics: [agent.critics[0].tape(), agent.critics[1].tape()],
        }
    }

    pub fn zero(&mut self) {
        self.gating.zero();
        if let Some(t) = &mut self.actor_gating {
            t.zero();
        }
        self.basis_policies.zero();
        self.sigma_head.zero();
        self.critics.iter_mut().for_each(GradTape::zero);
    }

    /// Gradient of the gate the actor reads.
    pub fn actor_gate_grad(&mut self) -> &mut LayerGrad {
        match &mut self.actor_gating {
            Some(t) => &mut t.layers[0],
            None => &mut self.gating.layers[0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetOptions {
    pub gamma: f64,
    pub alpha: f64,
    pub entropy_in_target: bool,
    pub bootstrap_on_timeout: bool,
}

/// y = r + (1−done)·γ·[min_j Q̄_j(s',a') − α·log π(a'|s')], with
/// a' = clamp(μ(s') + σ(s')⊙ε) from the current actor and Q̄_j the target
/// critics (their own gate copies). The entropy term is dropped when
/// `entropy_in_target` is off; `done` is ignored when bootstrapping
/// through time limits.
pub fn td_target(agent: &BilinearAgent, t: &Transition, eps: [f64; ACTION_DIM], opts: &TargetOptions) -> f64 {
    let terminal = t.done && !opts.bootstrap_on_timeout;
    if terminal {
        return t.r;
    }
    let out = agent.actor_det(&t.s_next);
    let SampledAction { action, log_prob, .. } = sample_action(&out, eps);
    let q1 = agent.targets[0].value(&t.s_next, &action);
    let q2 = agent.targets[1].value(&t.s_next, &action);
    let entropy = if opts.entropy_in_target { opts.alpha * log_prob } else { 0.0 };
    t.r + opts.gamma * (q1.min(q2) - entropy)
}

pub fn td_targets(agent: &BilinearAgent, batch: &[Transition], eps: &[[f64; ACTION_DIM]], opts: &TargetOptions) -> Vec<f64> {
    batch.iter().zip(eps).map(|(t, e)| td_target(agent, t, *e, opts)).collect()
}

/// Mean of (Q_i(s,a,g) − y)². Accumulates into `grads.critics[i]` and the
/// critic gate `grads.gating`.
pub fn critic_loss(agent: &BilinearAgent, i: usize, batch: &[Transition], targets: &[f64], grads: &mut AgentGrads) -> f64 {
    let critic = &agent.critics[i];
    let k = agent.k();
    let n = batch.len() as f64;
    let mut cache = CriticCache::new(k, critic.width());
    let mut gate = vec![0.0; k];
    let mut upstream = vec![0.0; k];
    let mut d_gate = vec![0.0; k];
    let mut scratch = vec![0.0; critic.width()];
    let mut loss = 0.0;
    for (t, &y) in batch.iter().zip(targets) {
        agent.gating.gate_into(&t.s, &mut gate);
        critic.forward_cached(&t.s, &t.a, &mut cache);
        let q = crate::numerics::dot(&gate, &cache.psi);
        let res = q - y;
        loss += res * res / n;
        let dq = 2.0 * res / n;
        for j in 0..k {
            upstream[j] = dq * gate[j];
            d_gate[j] = dq * cache.psi[j];
        }
        critic.backward(&cache, &upstream, Some(&mut grads.critics[i]), None, &mut scratch);
        accumulate_gate(&mut grads.gating.layers[0], &d_gate, agent.gating.input(&t.s));
    }
    loss
}

/// Mean of α·log π(a|s) − min_j Q_j(s,a,g) with a = clamp(μ + σ⊙ε).
/// Critic heads are treated as constants. In shared mode the gate receives
/// gradient through both μ and Q; in independent mode only G^(A) is
/// updated, through μ.
pub fn actor_loss(
    agent: &BilinearAgent,
    states: &[Observation],
    eps: &[[f64; ACTION_DIM]],
    alpha: f64,
    grads: &mut AgentGrads,
) -> f64 {
    let k = agent.k();
    let n = states.len() as f64;
    let shared = agent.mode() == GatingMode::Shared;
    let actor_gate = agent.actor_gate();
    let width = agent.critics[0].width();
    let mut caches = [CriticCache::new(k, width), CriticCache::new(k, width)];
    let mut g_actor = vec![0.0; k];
    let mut g_critic = vec![0.0; k];
    let mut upstream = vec![0.0; k];
    let mut d_gate = vec![0.0; k];
    let mut scratch = vec![0.0; width];
    let mut loss = 0.0;

    for (s, e) in states.iter().zip(eps) {
        actor_gate.gate_into(s, &mut g_actor);
        let ys = agent.basis_policies.responses(s);
        let mut mu = [0.0; ACTION_DIM];
        for (g, y) in g_actor.iter().zip(&ys) {
            mu[0] += g * y[0];
            mu[1] += g * y[1];
        }
        let (sigma, sigma_pre) = agent.sigma_head.sigma(s);
        let raw = [mu[0] + sigma[0] * e[0], mu[1] + sigma[1] * e[1]];
        let a = crate::envs::clamp_action(raw);
        let log_prob = gaussian_log_prob(&sigma, e);

        if shared {
            g_critic.copy_from_slice(&g_actor);
        } else {
            agent.gating.gate_into(s, &mut g_critic);
        }
        let mut q = [0.0; 2];
        for j in 0..2 {
            agent.critics[j].forward_cached(s, &a, &mut caches[j]);
            q[j] = crate::numerics::dot(&g_critic, &caches[j].psi);
        }
        let jmin = if q[0] <= q[1] { 0 } else { 1 };
        loss += (alpha * log_prob - q[jmin]) / n;

        // ∂L/∂Q_min = −1/n
        let dq = -1.0 / n;
        for j in 0..k {
            upstream[j] = dq * g_critic[j];
        }
        let mut input_grad = [0.0; OBS_DIM + ACTION_DIM];
        agent.critics[jmin].backward(&caches[jmin], &upstream, None, Some(&mut input_grad), &mut scratch);

        let mut d_raw = [0.0; ACTION_DIM];
        for d in 0..ACTION_DIM {
            if raw[d].abs() < 1.0 {
                d_raw[d] = input_grad[OBS_DIM + d];
            }
        }
        // σ: through the sample and through −log σ in log π
        let mut d_sigma_pre = [0.0; ACTION_DIM];
        for d in 0..ACTION_DIM {
            let d_sigma = d_raw[d] * e[d] - alpha / (n * sigma[d]);
            d_sigma_pre[d] = d_sigma * crate::numerics::sigmoid(sigma_pre[d]);
        }
        let sg = &mut grads.sigma_head.layers[0];
        sg.weights.add_outer(&d_sigma_pre, s.as_slice(), 1.0);
        sg.bias[0] += d_sigma_pre[0];
        sg.bias[1] += d_sigma_pre[1];

        for j in 0..k {
            let dy = [g_actor[j] * d_raw[0], g_actor[j] * d_raw[1]];
            let pg = &mut grads.basis_policies.layers[j];
            pg.weights.add_outer(&dy, s.as_slice(), 1.0);
            pg.bias[0] += dy[0];
            pg.bias[1] += dy[1];
            d_gate[j] = d_raw[0] * ys[j][0] + d_raw[1] * ys[j][1];
            if shared {
                d_gate[j] += dq * caches[jmin].psi[j];
            }
        }
        accumulate_gate(grads.actor_gate_grad(), &d_gate, actor_gate.input(s));
    }
    loss
}

#[inline]
fn accumulate_gate(grad: &mut LayerGrad, d_gate: &[f64], input: &[f64]) {
    grad.weights.add_outer(d_gate, input, 1.0);
    for (b, d) in grad.bias.iter_mut().zip(d_gate) {
        *b += d;
    }
}
