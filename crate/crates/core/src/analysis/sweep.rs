use std::io::Write;

use super::{pca, GDataset};
use crate::envs::{fmt_f64, EpisodeLog, TaskDescriptor};
use crate::error::{Error, Result};
use crate::models::BilinearAgent;
use crate::sac::{evaluate_training_directions, rollout};

/// Amplitudes as multiples of the RMS spread of training-time G.
pub const DEFAULT_AMPLITUDES: [f64; 3] = [0.5, 1.0, 2.0];

/// Top-2 principal plane of training-time G.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPlane {
    pub mean: Vec<f64>,
    pub axes: [Vec<f64>; 2],
    /// sqrt(mean ‖G − mean‖²) over the training-time data.
    pub rms: f64,
}

impl LatentPlane {
    pub fn from_dataset(ds: &GDataset) -> Result<Self> {
        let p = pca(ds, 2)?;
        if p.components.len() < 2 {
            return Err(Error::Protocol("training-time G spans fewer than two dimensions".into()));
        }
        let n = ds.len() as f64;
        let rms = (ds
            .rows
            .iter()
            .map(|r| r.iter().zip(&p.mean).map(|(v, m)| (v - m) * (v - m)).sum::<f64>())
            .sum::<f64>()
            / n)
            .sqrt();
        Ok(Self {
            mean: p.mean,
            axes: [p.components[0].clone(), p.components[1].clone()],
            rms,
        })
    }

    /// mean + amplitude·rms·(cos u · axis₀ + sin u · axis₁)
    pub fn point(&self, latent_direction: f64, amplitude: f64) -> Vec<f64> {
        let (s, c) = latent_direction.sin_cos();
        let scale = amplitude * self.rms;
        self.mean
            .iter()
            .zip(&self.axes[0])
            .zip(&self.axes[1])
            .map(|((m, a), b)| m + scale * (c * a + s * b))
            .collect()
    }

    /// Angle of G's projection in the plane.
    pub fn angle_of(&self, g: &[f64]) -> f64 {
        let centred: Vec<f64> = g.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        let x: f64 = centred.iter().zip(&self.axes[0]).map(|(a, b)| a * b).sum();
        let y: f64 = centred.iter().zip(&self.axes[1]).map(|(a, b)| a * b).sum();
        y.atan2(x)
    }
}

/// Plane fitted to the G the agent produces on the eight training headings.
pub fn latent_plane(agent: &BilinearAgent) -> Result<LatentPlane> {
    LatentPlane::from_dataset(&evaluate_training_directions(agent)?.actor_dataset())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub latent_direction: f64,
    pub amplitude: f64,
    /// Heading of the net displacement.
    pub movement_direction: f64,
    pub mean_speed: f64,
    pub speed_p10: f64,
    pub speed_p50: f64,
    pub speed_p90: f64,
    pub log: EpisodeLog,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub plane: LatentPlane,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "latent_direction",
            "amplitude",
            "movement_direction",
            "mean_speed",
            "speed_p10",
            "speed_p50",
            "speed_p90",
        ])?;
        for c in &self.cells {
            wtr.write_record(
                [
                    c.latent_direction,
                    c.amplitude,
                    c.movement_direction,
                    c.mean_speed,
                    c.speed_p10,
                    c.speed_p50,
                    c.speed_p90,
                ]
                .map(fmt_f64),
            )?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// One frozen-bases episode with the gate bypassed: G is fixed to a point
/// of the plane and the goal slice of the observation is zeroed, matching
/// the plane centre (the mean over evenly spaced headings).
pub fn sweep_cell(
    agent: &BilinearAgent,
    plane: &LatentPlane,
    latent_direction: f64,
    amplitude: f64,
    episode_len: u32,
) -> Result<SweepCell> {
    let w = plane.point(latent_direction, amplitude);
    let task = TaskDescriptor::new(0.0);
    let log = rollout(&task, episode_len, |obs| {
        let obs = obs.with_goal([0.0, 0.0]);
        let mu = agent.basis_policies.mean(&w, &obs)?;
        Ok((mu, w.clone()))
    })?;
    let last = log.rows.last().map_or([0.0, 0.0], |r| r.position);
    let mut speeds: Vec<f64> = log.rows.iter().map(|r| r.velocity[0].hypot(r.velocity[1])).collect();
    let mean_speed = speeds.iter().sum::<f64>() / speeds.len().max(1) as f64;
    speeds.sort_by(f64::total_cmp);
    Ok(SweepCell {
        latent_direction,
        amplitude,
        movement_direction: last[1].atan2(last[0]),
        mean_speed,
        speed_p10: quantile(&speeds, 0.1),
        speed_p50: quantile(&speeds, 0.5),
        speed_p90: quantile(&speeds, 0.9),
        log,
    })
}

/// Full grid: `n_directions` evenly spaced latent directions × `amplitudes`.
pub fn g_sweep(agent: &BilinearAgent, amplitudes: &[f64], n_directions: usize, episode_len: u32) -> Result<SweepResult> {
    let before = agent.checksum();
    let plane = latent_plane(agent)?;
    let mut cells = Vec::with_capacity(amplitudes.len() * n_directions);
    for &amp in amplitudes {
        for d in 0..n_directions {
            let u = d as f64 * std::f64::consts::TAU / n_directions as f64;
            cells.push(sweep_cell(agent, &plane, u, amp, episode_len)?);
        }
    }
    if agent.checksum() != before {
        return Err(Error::Contract("g_sweep mutated model parameters".into()));
    }
    Ok(SweepResult { plane, cells })
}
