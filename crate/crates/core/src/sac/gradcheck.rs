//! Finite-difference audit of the actor and critic loss gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::losses::{actor_loss, critic_loss, td_targets, AgentGrads, TargetOptions};
use crate::envs::{self, Observation, TaskDescriptor, Transition, ACTION_DIM};
use crate::error::Result;
use crate::models::{standard_normal_pair, BilinearAgent, GatingMode, ModelConfig};
use crate::numerics::{check_gradient, DenseLayer};

pub const GRADCHECK_STEP: f64 = 1e-5;
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Group {
    Gate,
    ActorGate,
    Policies,
    Sigma,
    Critic(usize),
}

fn layers_mut(agent: &mut BilinearAgent, g: Group) -> Vec<&mut DenseLayer> {
    match g {
        Group::Gate => vec![&mut agent.gating.layer],
        Group::ActorGate => vec![&mut agent.actor_gating.as_mut().expect("independent mode").layer],
        Group::Policies => agent.basis_policies.layers.iter_mut().collect(),
        Group::Sigma => vec![&mut agent.sigma_head.layer],
        Group::Critic(i) => agent.critics[i].layers_mut(),
    }
}

fn flatten(agent: &mut BilinearAgent, g: Group) -> Vec<f64> {
    layers_mut(agent, g)
        .into_iter()
        .flat_map(|l| l.slices().into_iter().flatten().copied().collect::<Vec<_>>())
        .collect()
}

fn assign(agent: &mut BilinearAgent, g: Group, p: &[f64]) {
    let mut it = p.iter();
    for l in layers_mut(agent, g) {
        for s in l.slices_mut() {
            for v in s.iter_mut() {
                *v = *it.next().expect("parameter count");
            }
        }
    }
}

fn grad_flat(grads: &AgentGrads, g: Group) -> Vec<f64> {
    let tape = match g {
        Group::Gate => &grads.gating,
        Group::ActorGate => grads.actor_gating.as_ref().expect("independent mode"),
        Group::Policies => &grads.basis_policies,
        Group::Sigma => &grads.sigma_head,
        Group::Critic(i) => &grads.critics[i],
    };
    tape.slices().into_iter().flatten().copied().collect()
}

/// Max relative error of one loss/parameter-group pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupCheck {
    pub loss: String,
    pub group: String,
    pub params: usize,
    pub max_rel_error: f64,
}

impl GroupCheck {
    pub fn passed(&self) -> bool {
        self.max_rel_error < GRADCHECK_TOLERANCE
    }
}

/// States from a short random-action rollout over several headings.
pub fn probe_batch(n: usize, seed: u64) -> Vec<Transition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let (mut state, _) = envs::reset();
    let mut t = 0u64;
    while out.len() < n {
        let task = TaskDescriptor::new(rng.gen_range(-3.0..3.0));
        let s = envs::observe(&state, &task);
        let a = [rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)];
        let step = envs::step(&state, a, &task).expect("episode not finished");
        if t % 7 == 6 {
            out.push(Transition {
                s,
                a,
                r: step.reward,
                s_next: envs::observe(&step.state, &task),
                done: false,
                g: task,
            });
        }
        state = step.state;
        t += 1;
    }
    out
}

/// Checks every parameter group of both critic losses and the actor loss
/// against central differences for a freshly initialized agent.
pub fn check_losses(config: ModelConfig, seed: u64, batch: usize) -> Result<Vec<GroupCheck>> {
    let mut agent = BilinearAgent::init(config, &mut ChaCha8Rng::seed_from_u64(seed))?;
    // exploration noise would make the losses stochastic
    agent.gating.noise_std = 0.0;
    if let Some(g) = agent.actor_gating.as_mut() {
        g.noise_std = 0.0;
    }
    let transitions = probe_batch(batch, seed ^ 0x5eed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let eps: Vec<[f64; ACTION_DIM]> = (0..batch).map(|_| standard_normal_pair(&mut rng)).collect();
    let eps: Vec<[f64; ACTION_DIM]> = eps.iter().map(|e| [e[0].clamp(-2.0, 2.0), e[1].clamp(-2.0, 2.0)]).collect();
    let opts = TargetOptions {
        gamma: 0.99,
        alpha: 0.05,
        entropy_in_target: true,
        bootstrap_on_timeout: true,
    };
    let targets = td_targets(&agent, &transitions, &eps, &opts);
    let states: Vec<Observation> = transitions.iter().map(|t| t.s).collect();
    let alpha = opts.alpha;

    let mut results = Vec::new();
    let mut grads = AgentGrads::zeros(&agent);

    for i in 0..2 {
        grads.zero();
        critic_loss(&agent, i, &transitions, &targets, &mut grads);
        for (name, g) in [("gating", Group::Gate), ("basis_critic", Group::Critic(i))] {
            let analytic = grad_flat(&grads, g);
            let p0 = flatten(&mut agent, g);
            let mut scratch = AgentGrads::zeros(&agent);
            let mut probe = agent.clone();
            let err = check_gradient(
                &mut |p: &[f64]| {
                    assign(&mut probe, g, p);
                    critic_loss(&probe, i, &transitions, &targets, &mut scratch)
                },
                &p0,
                &analytic,
                GRADCHECK_STEP,
            )?;
            results.push(GroupCheck {
                loss: format!("critic{}", i + 1),
                group: name.into(),
                params: p0.len(),
                max_rel_error: err,
            });
        }
    }

    grads.zero();
    actor_loss(&agent, &states, &eps, alpha, &mut grads);
    let gate = match agent.mode() {
        GatingMode::Shared => ("gating", Group::Gate),
        GatingMode::Independent => ("actor_gating", Group::ActorGate),
    };
    for (name, g) in [gate, ("basis_policies", Group::Policies), ("sigma_head", Group::Sigma)] {
        let analytic = grad_flat(&grads, g);
        let p0 = flatten(&mut agent, g);
        let mut scratch = AgentGrads::zeros(&agent);
        let mut probe = agent.clone();
        let err = check_gradient(
            &mut |p: &[f64]| {
                assign(&mut probe, g, p);
                actor_loss(&probe, &states, &eps, alpha, &mut scratch)
            },
            &p0,
            &analytic,
            GRADCHECK_STEP,
        )?;
        results.push(GroupCheck {
            loss: "actor".into(),
            group: name.into(),
            params: p0.len(),
            max_rel_error: err,
        });
    }
    Ok(results)
}

/// The standard audit: shared and independent gating, goal-only and
/// full-state gate inputs.
pub fn check_all(seed: u64) -> Result<Vec<(String, GroupCheck)>> {
    let mut out = Vec::new();
    for (label, mode, full) in [
        ("shared", GatingMode::Shared, false),
        ("independent", GatingMode::Independent, false),
        ("shared-full-state", GatingMode::Shared, true),
    ] {
        let cfg = ModelConfig {
            gating_mode: mode,
            gate_on_full_state: full,
            ..ModelConfig::default()
        };
        for c in check_losses(cfg, seed, 16)? {
            out.push((label.to_string(), c));
        }
    }
    Ok(out)
}
