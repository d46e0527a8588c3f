//! Planar point-mass directional-navigation task.
//!
//! A point mass with linear drag is pushed by a 2-D acceleration command.
//! The reward is progress along the target heading minus a penalty on
//! orthogonal motion. Targets cycle through eight headings.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DRAG: f64 = 0.9;
pub const ACCEL_GAIN: f64 = 0.1;
pub const V_MAX: f64 = 1.0;
pub const EPISODE_LEN: u32 = 800;
pub const SCHEDULE_PERIOD: u64 = 100;
pub const N_DIRECTIONS: usize = 8;
pub const ORTHOGONAL_PENALTY: f64 = 0.1;

pub const PROPRIO_DIM: usize = 8;
pub const GOAL_DIM: usize = 2;
pub const OBS_DIM: usize = PROPRIO_DIM + GOAL_DIM;
pub const ACTION_DIM: usize = 2;

/// Positions enter the observation divided by the farthest reachable
/// distance in one episode, keeping that slice in [−1, 1].
pub const POSITION_OBS_SCALE: f64 = 1.0 / (EPISODE_LEN as f64 * V_MAX);

const PHASE_PERIODS: [f64; 2] = [SCHEDULE_PERIOD as f64, EPISODE_LEN as f64];

pub type Action = [f64; ACTION_DIM];

/// Target heading θ with its unit vector g = (cos θ, sin θ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskDescriptor {
    pub theta: f64,
    pub g: [f64; 2],
}

impl TaskDescriptor {
    pub fn new(theta: f64) -> Self {
        let theta = theta.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU
        let theta = if theta >= TAU { 0.0 } else { theta };
        Self {
            theta,
            g: [theta.cos(), theta.sin()],
        }
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self::new(deg.to_radians())
    }

    /// The `i`-th of the eight training headings, i·π/4.
    pub fn training(i: usize) -> Self {
        Self::new((i % N_DIRECTIONS) as f64 * FRAC_PI_4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub step_index: u32,
}

impl EnvState {
    pub fn done(&self) -> bool {
        self.step_index >= EPISODE_LEN
    }
}

/// Proprioception (scaled position, velocity, four phase features) with the
/// goal vector appended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn goal(&self) -> &[f64] {
        &self.0[PROPRIO_DIM..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Same proprioception with a different goal slice.
    pub fn with_goal(mut self, goal: [f64; 2]) -> Self {
        self.0[PROPRIO_DIM..].copy_from_slice(&goal);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub s: Observation,
    pub a: Action,
    pub r: f64,
    pub s_next: Observation,
    pub done: bool,
    pub g: TaskDescriptor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: EnvState,
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
}

/// r = Δx cosθ + Δy sinθ − 0.1·|Δx sinθ − Δy cosθ|
pub fn reward(delta: [f64; 2], theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    delta[0] * c + delta[1] * s - ORTHOGONAL_PENALTY * (delta[0] * s - delta[1] * c).abs()
}

/// Heading active at `global_step` during training: cycles through the
/// eight headings, switching every 100 steps.
pub fn schedule_direction(global_step: u64) -> TaskDescriptor {
    TaskDescriptor::training(((global_step / SCHEDULE_PERIOD) % N_DIRECTIONS as u64) as usize)
}

pub fn reset() -> (EnvState, Observation) {
    let state = EnvState {
        position: [0.0, 0.0],
        velocity: [0.0, 0.0],
        step_index: 0,
    };
    let obs = observe(&state, &TaskDescriptor::new(0.0));
    (state, obs)
}

pub fn observe(state: &EnvState, task: &TaskDescriptor) -> Observation {
    let t = state.step_index as f64;
    let mut o = [0.0; OBS_DIM];
    o[0] = state.position[0] * POSITION_OBS_SCALE;
    o[1] = state.position[1] * POSITION_OBS_SCALE;
    o[2] = state.velocity[0];
    o[3] = state.velocity[1];
    for (i, period) in PHASE_PERIODS.iter().enumerate() {
        let (s, c) = (TAU * t / period).sin_cos();
        o[4 + 2 * i] = s;
        o[5 + 2 * i] = c;
    }
    o[PROPRIO_DIM] = task.g[0];
    o[PROPRIO_DIM + 1] = task.g[1];
    Observation(o)
}

pub fn clamp_action(a: Action) -> Action {
    [a[0].clamp(-1.0, 1.0), a[1].clamp(-1.0, 1.0)]
}

pub fn step(state: &EnvState, action: Action, task: &TaskDescriptor) -> Result<StepOutcome> {
    if state.done() {
        return Err(Error::Protocol(format!(
            "step called on finished episode (step {})",
            state.step_index
        )));
    }
    if !action.iter().all(|a| a.is_finite()) {
        return Err(Error::numeric("env.action", format!("{action:?}")));
    }
    let a = clamp_action(action);
    let mut v = [
        DRAG * state.velocity[0] + ACCEL_GAIN * a[0],
        DRAG * state.velocity[1] + ACCEL_GAIN * a[1],
    ];
    let speed = v[0].hypot(v[1]);
    if speed > V_MAX {
        v = [v[0] * V_MAX / speed, v[1] * V_MAX / speed];
    }
    let next = EnvState {
        position: [state.position[0] + v[0], state.position[1] + v[1]],
        velocity: v,
        step_index: state.step_index + 1,
    };
    Ok(StepOutcome {
        observation: observe(&next, task),
        reward: reward(v, task.theta),
        done: next.done(),
        state: next,
    })
}

/// One logged environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub step: u64,
    pub theta: f64,
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub action: Action,
    pub reward: f64,
    pub gating: Vec<f64>,
}

/// Per-step record of an episode; serializes to CSV with a header
/// `step,theta,pos_x,pos_y,vel_x,vel_y,a0,a1,r,G_0..G_{K-1}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeLog {
    pub rows: Vec<LogRow>,
}

/// Nine significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.8e}")
}

impl EpisodeLog {
    pub fn push(&mut self, row: LogRow) {
        self.rows.push(row);
    }

    pub fn k(&self) -> usize {
        self.rows.first().map_or(0, |r| r.gating.len())
    }

    pub fn mean_reward(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.reward).sum::<f64>() / self.rows.len() as f64
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let k = self.k();
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = ["step", "theta", "pos_x", "pos_y", "vel_x", "vel_y", "a0", "a1", "r"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((0..k).map(|i| format!("G_{i}")));
        wtr.write_record(&header)?;
        for row in &self.rows {
            if row.gating.len() != k {
                return Err(Error::Shape("episode log rows have differing K".into()));
            }
            let mut rec = vec![row.step.to_string()];
            rec.extend(
                [
                    row.theta,
                    row.position[0],
                    row.position[1],
                    row.velocity[0],
                    row.velocity[1],
                    row.action[0],
                    row.action[1],
                    row.reward,
                ]
                .iter()
                .chain(&row.gating)
                .map(|&v| fmt_f64(v)),
            );
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.len() < 9 || &headers[0] != "step" || &headers[8] != "r" {
            return Err(Error::Protocol("not an episode log header".into()));
        }
        let k = headers.len() - 9;
        let mut log = EpisodeLog::default();
        for rec in rdr.records() {
            let rec = rec?;
            let f = |i: usize| -> Result<f64> {
                rec[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Protocol(format!("bad float in column {i}: {e}")))
            };
            let step = rec[0]
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::Protocol(format!("bad step: {e}")))?;
            log.push(LogRow {
                step,
                theta: f(1)?,
                position: [f(2)?, f(3)?],
                velocity: [f(4)?, f(5)?],
                action: [f(6)?, f(7)?],
                reward: f(8)?,
                gating: (0..k).map(|i| f(9 + i)).collect::<Result<_>>()?,
            });
        }
        Ok(log)
    }
}

/// Wraps an angle difference into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}
