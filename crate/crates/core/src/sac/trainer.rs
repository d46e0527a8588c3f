use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::curve::{CurvePoint, DecodePoint, LearningCurve};
use super::eval::{evaluate_training_directions, EvalSummary};
use super::losses::{actor_loss, critic_loss, td_targets, AgentGrads, TargetOptions};
use super::replay::ReplayBuffer;
use super::TrainConfig;
use crate::analysis::{direction_decoding, GDataset};
use crate::envs::{self, Observation, Transition, ACTION_DIM};
use crate::error::{Error, Result};
use crate::models::{sample_action, standard_normal_pair, ActorOutput, BilinearAgent, Checkpoint, GatingVector, ModelConfig};
use crate::numerics::AdamState;
use crate::rng::{substream, Stream};

/// Training state: agent, optimizers (critic 1, critic 2, actor), replay and
/// the named random streams.
pub struct Trainer {
    pub agent: BilinearAgent,
    pub config: TrainConfig,
    pub adam: [AdamState; 3],
    pub buffer: ReplayBuffer,
    pub updates: u64,
    seed: u64,
    env_rng: ChaCha8Rng,
    actor_rng: ChaCha8Rng,
    buffer_rng: ChaCha8Rng,
    gate_rng: ChaCha8Rng,
    grads: AgentGrads,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: [f64; 2],
    pub actor_loss: f64,
}

fn critic_params(agent: &mut BilinearAgent, i: usize) -> Vec<&mut [f64]> {
    let mut v: Vec<&mut [f64]> = agent.gating.layer.slices_mut().into_iter().collect();
    for l in agent.critics[i].layers_mut() {
        v.extend(l.slices_mut());
    }
    v
}

fn actor_params(agent: &mut BilinearAgent) -> Vec<&mut [f64]> {
    let gate = match agent.actor_gating.as_mut() {
        Some(g) => g,
        None => &mut agent.gating,
    };
    let mut v: Vec<&mut [f64]> = gate.layer.slices_mut().into_iter().collect();
    for l in agent.basis_policies.layers.iter_mut() {
        v.extend(l.slices_mut());
    }
    v.extend(agent.sigma_head.layer.slices_mut());
    v
}

fn param_shapes(params: &[&mut [f64]]) -> Vec<usize> {
    params.iter().map(|p| p.len()).collect()
}

impl Trainer {
    pub fn new(model: ModelConfig, config: TrainConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut agent = BilinearAgent::init(model, &mut substream(seed, Stream::Init))?;
        let adam = [
            AdamState::new(&param_shapes(&critic_params(&mut agent, 0)), config.lr),
            AdamState::new(&param_shapes(&critic_params(&mut agent, 1)), config.lr),
            AdamState::new(&param_shapes(&actor_params(&mut agent)), config.lr),
        ];
        let grads = AgentGrads::zeros(&agent);
        Ok(Self {
            buffer: ReplayBuffer::new(config.buffer_capacity),
            agent,
            config,
            adam,
            updates: 0,
            seed,
            env_rng: substream(seed, Stream::Env),
            actor_rng: substream(seed, Stream::ActorNoise),
            buffer_rng: substream(seed, Stream::BufferSampling),
            gate_rng: substream(seed, Stream::GateNoise),
            grads,
        })
    }

    pub fn target_options(&self) -> TargetOptions {
        TargetOptions {
            gamma: self.config.gamma,
            alpha: self.config.alpha,
            entropy_in_target: self.config.entropy_in_target,
            bootstrap_on_timeout: self.config.bootstrap_on_timeout,
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            agent: self.agent.clone(),
            adam_states: self.adam.to_vec(),
        }
    }

    /// Exploration action: gate noise on G, Gaussian noise on the action.
    /// Returns the actor output (with the noisy G) and the noise added to G.
    pub fn explore(&mut self, obs: &Observation) -> (ActorOutput, Vec<f64>) {
        let gate = self.agent.actor_gate();
        let noise = gate.sample_noise(&mut self.gate_rng);
        let mut g = gate.gate_det(obs).0;
        for (v, n) in g.iter_mut().zip(&noise) {
            *v += n;
        }
        let out = self
            .agent
            .actor_with_gating(GatingVector(g), obs)
            .expect("gate width equals K");
        (out, noise)
    }

    /// One gradient step on critic `i` towards fixed targets; returns the
    /// pre-step loss.
    pub fn critic_update(&mut self, i: usize, batch: &[Transition], targets: &[f64]) -> Result<f64> {
        self.grads.zero();
        let loss = critic_loss(&self.agent, i, batch, targets, &mut self.grads);
        if !loss.is_finite() {
            return Err(Error::numeric(format!("critic{}.loss", i + 1), format!("{loss}")));
        }
        let grads = &self.grads;
        let mut g: Vec<&[f64]> = grads.gating.slices();
        g.extend(grads.critics[i].slices());
        let mut params = critic_params(&mut self.agent, i);
        let name = if i == 0 { "critic1" } else { "critic2" };
        self.adam[i].apply(&mut params, &g, name)?;
        Ok(loss)
    }

    /// One gradient step on the actor with reparameterized draws `eps`.
    pub fn actor_update(&mut self, states: &[Observation], eps: &[[f64; ACTION_DIM]]) -> Result<f64> {
        self.grads.zero();
        let loss = actor_loss(&self.agent, states, eps, self.config.alpha, &mut self.grads);
        if !loss.is_finite() {
            return Err(Error::numeric("actor.loss", format!("{loss}")));
        }
        let grads = &self.grads;
        let mut g: Vec<&[f64]> = match &grads.actor_gating {
            Some(t) => t.slices(),
            None => grads.gating.slices(),
        };
        g.extend(grads.basis_policies.slices());
        g.extend(grads.sigma_head.slices());
        let mut params = actor_params(&mut self.agent);
        self.adam[2].apply(&mut params, &g, "actor")?;
        Ok(loss)
    }

    /// Critic 1, critic 2, actor, EMA on one sampled batch.
    pub fn update(&mut self) -> Result<UpdateStats> {
        let batch = self.buffer.sample(self.config.batch, &mut self.buffer_rng)?;
        let next_eps: Vec<[f64; 2]> = (0..batch.len()).map(|_| standard_normal_pair(&mut self.actor_rng)).collect();
        let y = td_targets(&self.agent, &batch, &next_eps, &self.target_options());
        let l1 = self.critic_update(0, &batch, &y)?;
        let l2 = self.critic_update(1, &batch, &y)?;
        let states: Vec<Observation> = batch.iter().map(|t| t.s).collect();
        let eps: Vec<[f64; 2]> = (0..batch.len()).map(|_| standard_normal_pair(&mut self.actor_rng)).collect();
        let la = self.actor_update(&states, &eps)?;
        self.agent.ema_update(self.config.tau)?;
        self.updates += 1;
        if !self.agent.is_finite() {
            return Err(Error::numeric("parameters", "non-finite after update"));
        }
        Ok(UpdateStats {
            critic_loss: [l1, l2],
            actor_loss: la,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub checkpoint: Checkpoint,
    pub curve: LearningCurve,
    /// Decoding error of training-time G per evaluation window.
    pub decoding: Vec<DecodePoint>,
    pub final_eval: EvalSummary,
    /// Training-time (actor, critic) G of the last evaluation window.
    pub last_window: (GDataset, GDataset),
    pub updates: u64,
}

/// Aborted run: the error and the checkpoint of the last evaluation point.
#[derive(Debug)]
pub struct TrainFailure {
    pub error: Error,
    pub last_good: Checkpoint,
}

impl From<TrainFailure> for Error {
    fn from(f: TrainFailure) -> Self {
        f.error
    }
}

/// Full training run: act, store, update after warmup, evaluate every
/// `eval_every` env steps on the eight headings with the deterministic
/// policy. Headings switch every 100 steps during training.
pub fn train(model: ModelConfig, config: TrainConfig, seed: u64) -> std::result::Result<TrainOutput, TrainFailure> {
    let mut tr = match Trainer::new(model, config, seed) {
        Ok(t) => t,
        Err(error) => {
            let fallback = BilinearAgent::init(ModelConfig::default(), &mut substream(seed, Stream::Init))
                .expect("default model config is valid");
            return Err(TrainFailure {
                error,
                last_good: Checkpoint {
                    agent: fallback,
                    adam_states: Vec::new(),
                },
            });
        }
    };
    let mut last_good = tr.checkpoint();
    let fail = |error: Error, last_good: &Checkpoint| TrainFailure {
        error,
        last_good: last_good.clone(),
    };

    let mut curve = LearningCurve::default();
    let mut decoding = Vec::new();
    let mut window = (GDataset::default(), GDataset::default());
    let mut last_window = (GDataset::default(), GDataset::default());
    let mut final_eval = None;
    let (mut state, _) = envs::reset();
    let mut episode = 0u32;

    for global_step in 0..tr.config.total_steps {
        let task = envs::schedule_direction(global_step);
        let obs = envs::observe(&state, &task);
        let (out, noise) = tr.explore(&obs);
        let critic_g: Vec<f64> = tr
            .agent
            .critic_gate()
            .gate_det(&obs)
            .0
            .iter()
            .zip(&noise)
            .map(|(g, n)| g + n)
            .collect();
        window.0.push(out.gating.0.clone(), task.theta, episode, global_step);
        window.1.push(critic_g, task.theta, episode, global_step);

        let action = if global_step < tr.config.warmup_steps {
            [tr.env_rng.gen_range(-1.0..1.0), tr.env_rng.gen_range(-1.0..1.0)]
        } else {
            let e = standard_normal_pair(&mut tr.actor_rng);
            sample_action(&out, e).action
        };
        let step = envs::step(&state, action, &task).map_err(|e| fail(e, &last_good))?;
        let next_task = envs::schedule_direction(global_step + 1);
        tr.buffer.push(Transition {
            s: obs,
            a: action,
            r: step.reward,
            s_next: envs::observe(&step.state, &next_task),
            done: step.done,
            g: task,
        });
        state = step.state;
        if step.done {
            state = envs::reset().0;
            episode += 1;
        }

        if global_step >= tr.config.warmup_steps && tr.buffer.len() >= tr.config.batch {
            for _ in 0..tr.config.updates_per_step {
                tr.update().map_err(|e| fail(e, &last_good))?;
            }
        }

        let env_step = global_step + 1;
        if env_step % tr.config.eval_every == 0 || env_step == tr.config.total_steps {
            let eval = evaluate_training_directions(&tr.agent).map_err(|e| fail(e, &last_good))?;
            if !eval.mean.is_finite() {
                return Err(fail(Error::numeric("eval.mean_return", "non-finite"), &last_good));
            }
            let seed = tr.seed();
            let actor_error = direction_decoding(&window.0, seed).unwrap_or(f64::NAN);
            let critic_error = direction_decoding(&window.1, seed).unwrap_or(f64::NAN);
            decoding.push(DecodePoint {
                env_step,
                actor_error,
                critic_error,
            });
            curve.points.push(CurvePoint {
                env_step,
                mean_return: eval.mean,
                per_direction: eval.per_direction,
                g_corr: eval.g_corr,
            });
            log::info!(
                "seed {seed} step {env_step}: mean reward {:.4}, decode err {:.4}",
                eval.mean,
                actor_error
            );
            last_window = std::mem::take(&mut window);
            last_good = tr.checkpoint();
            final_eval = Some(eval);
        }
    }

    let final_eval = match final_eval {
        Some(e) => e,
        None => evaluate_training_directions(&tr.agent).map_err(|e| fail(e, &last_good))?,
    };
    Ok(TrainOutput {
        checkpoint: tr.checkpoint(),
        curve,
        decoding,
        final_eval,
        last_window,
        updates: tr.updates,
    })
}
