use rand::Rng;

use crate::analysis::{g_correlation, GDataset};
use crate::envs::{self, Action, EpisodeLog, LogRow, Observation, TaskDescriptor, EPISODE_LEN, N_DIRECTIONS};
use crate::error::Result;
use crate::models::BilinearAgent;

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub log: EpisodeLog,
    /// Critic-gate G per step (equals the logged actor G in shared mode).
    pub critic_gating: Vec<Vec<f64>>,
    pub mean_reward: f64,
}

/// Runs `steps` environment steps from reset with the heading fixed.
/// `policy` returns the action and the G vector to log.
pub fn rollout<F>(task: &TaskDescriptor, steps: u32, mut policy: F) -> Result<EpisodeLog>
where
    F: FnMut(&Observation) -> Result<(Action, Vec<f64>)>,
{
    let (mut state, _) = envs::reset();
    let mut log = EpisodeLog::default();
    for t in 0..steps.min(EPISODE_LEN) {
        let obs = envs::observe(&state, task);
        let (a, g) = policy(&obs)?;
        let out = envs::step(&state, a, task)?;
        log.push(LogRow {
            step: t as u64,
            theta: task.theta,
            position: out.state.position,
            velocity: out.state.velocity,
            action: envs::clamp_action(a),
            reward: out.reward,
            gating: g,
        });
        state = out.state;
    }
    Ok(log)
}

/// Deterministic episode on one heading: a = clamp(μ), no gate noise.
pub fn evaluate_direction(agent: &BilinearAgent, task: &TaskDescriptor) -> Result<EpisodeResult> {
    let mut critic_gating = Vec::with_capacity(EPISODE_LEN as usize);
    let log = rollout(task, EPISODE_LEN, |obs| {
        let out = agent.actor_det(obs);
        critic_gating.push(agent.critic_gate().gate_det(obs).0);
        Ok((out.mu, out.gating.0))
    })?;
    Ok(EpisodeResult {
        mean_reward: log.mean_reward(),
        log,
        critic_gating,
    })
}

#[derive(Debug, Clone)]
pub struct EvalSummary {
    pub per_direction: [f64; N_DIRECTIONS],
    pub mean: f64,
    pub g_corr: f64,
    pub episodes: Vec<EpisodeResult>,
}

impl EvalSummary {
    pub fn actor_dataset(&self) -> GDataset {
        let mut ds = GDataset::default();
        for (ep, r) in self.episodes.iter().enumerate() {
            for row in &r.log.rows {
                ds.push(row.gating.clone(), row.theta, ep as u32, row.step);
            }
        }
        ds
    }

    pub fn critic_dataset(&self) -> GDataset {
        let mut ds = GDataset::default();
        for (ep, r) in self.episodes.iter().enumerate() {
            for (row, g) in r.log.rows.iter().zip(&r.critic_gating) {
                ds.push(g.clone(), row.theta, ep as u32, row.step);
            }
        }
        ds
    }

    /// All eight episodes concatenated into one log.
    pub fn combined_log(&self) -> EpisodeLog {
        EpisodeLog {
            rows: self.episodes.iter().flat_map(|e| e.log.rows.iter().cloned()).collect(),
        }
    }

    pub fn combined_critic_log(&self) -> EpisodeLog {
        let mut log = self.combined_log();
        let gs = self.episodes.iter().flat_map(|e| e.critic_gating.iter());
        for (row, g) in log.rows.iter_mut().zip(gs) {
            row.gating = g.clone();
        }
        log
    }
}

pub fn evaluate_training_directions(agent: &BilinearAgent) -> Result<EvalSummary> {
    let mut per_direction = [0.0; N_DIRECTIONS];
    let mut episodes = Vec::with_capacity(N_DIRECTIONS);
    for (i, slot) in per_direction.iter_mut().enumerate() {
        let r = evaluate_direction(agent, &TaskDescriptor::training(i))?;
        *slot = r.mean_reward;
        episodes.push(r);
    }
    let mean = per_direction.iter().sum::<f64>() / N_DIRECTIONS as f64;
    let mut summary = EvalSummary {
        per_direction,
        mean,
        g_corr: 0.0,
        episodes,
    };
    summary.g_corr = g_correlation(&summary.actor_dataset(), &summary.critic_dataset())
        .map(|c| c.value)
        .unwrap_or(f64::NAN);
    Ok(summary)
}

/// Mean per-step reward of uniform random actions over the eight headings.
pub fn random_policy_baseline<R: Rng + ?Sized>(rng: &mut R) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..N_DIRECTIONS {
        let log = rollout(&TaskDescriptor::training(i), EPISODE_LEN, |_| {
            Ok(([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], Vec::new()))
        })?;
        total += log.mean_reward();
    }
    Ok(total / N_DIRECTIONS as f64)
}
