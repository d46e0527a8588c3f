//! Zero-shot goal conditioning and online adaptation of G with frozen bases.
//!
//! During adaptation the gating network is bypassed: the actor uses
//! μ = Σ w_k Y_k(s) and the coefficient vector `w` is adapted from reward
//! alone with a linear TD/SARSA rule on the basis-critic responses ψ(s,a)
//! of critic 1.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::envs::{self, fmt_f64, Action, EpisodeLog, LogRow, Observation, TaskDescriptor, EPISODE_LEN};
use crate::error::{Error, Result};
use crate::models::{sample_action, standard_normal_pair, BilinearAgent, GatingVector};
use crate::numerics::dot;
use crate::rng::{substream, Stream};
use crate::sac::{evaluate_direction, EpisodeResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    #[default]
    TdSarsa,
    Simplified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitW {
    /// Gate output for the previous goal.
    #[default]
    Gate,
    Zeros,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptConfig {
    pub alpha_g: f64,
    pub gamma: f64,
    pub rule: Rule,
    pub init_w: InitW,
    /// Act with the mean action instead of sampling with the pretrained σ.
    pub adapt_deterministic: bool,
    /// Adapt on −r (reference condition); the logged reward stays r.
    pub negate_reward: bool,
    pub steps: u64,
    /// Heading before the switch, degrees.
    pub from_deg: f64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            alpha_g: 1.0,
            gamma: 0.99,
            rule: Rule::TdSarsa,
            init_w: InitW::Gate,
            adapt_deterministic: false,
            negate_reward: false,
            steps: 2000,
            from_deg: 0.0,
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_g >= 0.0 && self.alpha_g.is_finite()) {
            return Err(Error::Config("adapt.alpha_g must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config("adapt.gamma must be in [0, 1]".into()));
        }
        if !self.from_deg.is_finite() {
            return Err(Error::Config("adapt.from_deg must be finite".into()));
        }
        Ok(())
    }
}

/// δ = r + γ ψ'ᵀw − ψᵀw
pub fn td_delta(r: f64, psi_now: &[f64], psi_next: &[f64], w: &[f64], gamma: f64) -> f64 {
    r + gamma * dot(psi_next, w) - dot(psi_now, w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptState {
    pub w: Vec<f64>,
    pub alpha_g: f64,
    pub gamma: f64,
    pub rule: Rule,
}

impl AdaptState {
    pub fn new(w: Vec<f64>, alpha_g: f64, gamma: f64, rule: Rule) -> Self {
        Self { w, alpha_g, gamma, rule }
    }

    fn check(&self, what: &str) -> Result<()> {
        match self.w.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::numeric(format!("w[{i}]"), format!("non-finite after {what}"))),
            None => Ok(()),
        }
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.w.len() {
            return Err(Error::Shape(format!("basis response length {} != K {}", v.len(), self.w.len())));
        }
        Ok(())
    }

    /// Semi-gradient TD step `w ← w + α_G δ ψ_now`; returns δ.
    pub fn g_update(&mut self, r: f64, psi_now: &[f64], psi_next: &[f64]) -> Result<f64> {
        self.check_len(psi_now)?;
        self.check_len(psi_next)?;
        let delta = td_delta(r, psi_now, psi_next, &self.w, self.gamma);
        for (w, p) in self.w.iter_mut().zip(psi_now) {
            *w += self.alpha_g * delta * p;
        }
        self.check("td update")?;
        Ok(delta)
    }

    /// `w ← w + α_G r φ_now`
    pub fn g_update_simplified(&mut self, r: f64, phi_now: &[f64]) -> Result<()> {
        self.check_len(phi_now)?;
        for (w, p) in self.w.iter_mut().zip(phi_now) {
            *w += self.alpha_g * r * p;
        }
        self.check("simplified update")
    }

    /// Update by the configured rule; returns δ (r for the simplified rule).
    pub fn update(&mut self, r: f64, psi_now: &[f64], psi_next: &[f64]) -> Result<f64> {
        match self.rule {
            Rule::TdSarsa => self.g_update(r, psi_now, psi_next),
            Rule::Simplified => self.g_update_simplified(r, psi_now).map(|_| r),
        }
    }
}

fn goal_obs(task: &TaskDescriptor) -> Observation {
    envs::observe(&envs::reset().0, task)
}

/// G for goal `task` from a single gate forward pass.
pub fn gate_for(agent: &BilinearAgent, task: &TaskDescriptor) -> GatingVector {
    agent.actor_gate().gate_det(&goal_obs(task))
}

/// Deterministic action for goal `g_star`: gate forward pass, frozen bases.
pub fn zero_shot_policy(agent: &BilinearAgent, g_star: &TaskDescriptor, s: &Observation) -> Action {
    agent.actor_det(&s.with_goal(g_star.g)).mu
}

/// One deterministic 800-step episode conditioned on `g_star`; fails with a
/// contract error if any parameter changed.
pub fn zero_shot_eval(agent: &BilinearAgent, g_star: &TaskDescriptor) -> Result<EpisodeResult> {
    let before = agent.checksum();
    let r = evaluate_direction(agent, g_star)?;
    let after = agent.checksum();
    if before != after {
        return Err(Error::Contract(format!("parameters changed during zero-shot evaluation ({before} -> {after})")));
    }
    Ok(r)
}

/// Mean per-step reward of zero-shot episodes at each heading (degrees).
pub fn zero_shot_sweep(agent: &BilinearAgent, thetas_deg: &[f64]) -> Result<Vec<(f64, EpisodeResult)>> {
    thetas_deg
        .iter()
        .map(|&d| zero_shot_eval(agent, &TaskDescriptor::from_degrees(d)).map(|r| (d, r)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub theta: f64,
    pub r: f64,
    pub delta: f64,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AdaptRun {
    pub log: EpisodeLog,
    pub trace: Vec<TraceRow>,
    /// Environment reward per step (never negated).
    pub rewards: Vec<f64>,
    pub w_final: Vec<f64>,
    /// The update saw −r.
    pub negated: bool,
}

impl AdaptRun {
    /// Mean reward over steps `[from, to)`.
    pub fn window_mean(&self, from: usize, to: usize) -> f64 {
        let to = to.min(self.rewards.len());
        let from = from.min(to);
        if from == to {
            return f64::NAN;
        }
        self.rewards[from..to].iter().sum::<f64>() / (to - from) as f64
    }

    /// Mean over `[from, to)` of the reward the adaptation rule received.
    pub fn received_window_mean(&self, from: usize, to: usize) -> f64 {
        let m = self.window_mean(from, to);
        if self.negated {
            -m
        } else {
            m
        }
    }

    /// `step,theta,r,delta,w_0..w_{K-1}`
    pub fn write_trace_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let k = self.w_final.len();
        let mut header = vec!["step".to_string(), "theta".into(), "r".into(), "delta".into()];
        header.extend((0..k).map(|i| format!("w_{i}")));
        out.write_record(&header)?;
        for row in &self.trace {
            let mut rec = vec![row.step.to_string(), fmt_f64(row.theta), fmt_f64(row.r), fmt_f64(row.delta)];
            rec.extend(row.w.iter().map(|v| fmt_f64(*v)));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    /// `step,reward`
    pub fn write_rewards_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "reward"])?;
        for (i, r) in self.rewards.iter().enumerate() {
            out.write_record([i.to_string(), fmt_f64(*r)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Online adaptation after a switch from `from` to `to` at step 0. The
/// environment resets every 800 steps; `w` carries over.
pub fn adapt_online(
    agent: &BilinearAgent,
    from: &TaskDescriptor,
    to: &TaskDescriptor,
    cfg: &AdaptConfig,
    seed: u64,
) -> Result<AdaptRun> {
    cfg.validate()?;
    let before = agent.bases_checksum();
    let w0 = match cfg.init_w {
        InitW::Gate => gate_for(agent, from).0,
        InitW::Zeros => vec![0.0; agent.k()],
    };
    let mut st = AdaptState::new(w0, cfg.alpha_g, cfg.gamma, cfg.rule);
    let mut rng = substream(seed, Stream::ActorNoise);
    let psi = |o: &Observation, a: &Action| agent.critics[0].responses(o, a);

    let act = |w: &[f64], o: &Observation, rng: &mut rand_chacha::ChaCha8Rng| -> Result<Action> {
        let out = agent.actor_with_gating(GatingVector(w.to_vec()), o)?;
        if cfg.adapt_deterministic {
            Ok(envs::clamp_action(out.mu))
        } else {
            Ok(sample_action(&out, standard_normal_pair(rng)).action)
        }
    };

    let mut run = AdaptRun {
        log: EpisodeLog::default(),
        trace: Vec::with_capacity(cfg.steps as usize),
        rewards: Vec::with_capacity(cfg.steps as usize),
        w_final: Vec::new(),
        negated: cfg.negate_reward,
    };
    let (mut state, _) = envs::reset();
    let mut obs = envs::observe(&state, to);
    let mut a = act(&st.w, &obs, &mut rng)?;
    for t in 0..cfg.steps {
        let out = envs::step(&state, a, to)?;
        let next_obs = envs::observe(&out.state, to);
        let a_next = act(&st.w, &next_obs, &mut rng)?;
        let signal = if cfg.negate_reward { -out.reward } else { out.reward };
        let delta = st
            .update(signal, &psi(&obs, &a), &psi(&next_obs, &a_next))
            .map_err(|e| match e {
                Error::Numeric { path, detail } => Error::numeric(path, format!("{detail} at step {t}")),
                other => other,
            })?;
        run.log.push(LogRow {
            step: t,
            theta: to.theta,
            position: out.state.position,
            velocity: out.state.velocity,
            action: a,
            reward: out.reward,
            gating: st.w.clone(),
        });
        run.rewards.push(out.reward);
        run.trace.push(TraceRow {
            step: t,
            theta: to.theta,
            r: out.reward,
            delta,
            w: st.w.clone(),
        });
        if out.done {
            state = envs::reset().0;
            obs = envs::observe(&state, to);
            a = act(&st.w, &obs, &mut rng)?;
        } else {
            state = out.state;
            obs = next_obs;
            a = a_next;
        }
    }
    debug_assert_eq!(EPISODE_LEN, 800);
    let after = agent.bases_checksum();
    if before != after {
        return Err(Error::Contract(format!("frozen bases changed during adaptation ({before} -> {after})")));
    }
    run.w_final = st.w;
    Ok(run)
}
