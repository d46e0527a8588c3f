//! Analysis of recorded gating vectors: PCA, linear direction decoding,
//! actor–critic correlation, and behaviour sweeps over the G plane.

mod decoding;
mod pca;
mod sweep;

pub use decoding::{direction_decoding, direction_decoding_with, DECODER_FOLDS, DECODER_RIDGE};
pub use pca::{pca, PcaResult};
pub use sweep::{g_sweep, latent_plane, sweep_cell, LatentPlane, SweepCell, SweepResult, DEFAULT_AMPLITUDES};

use std::io::Write;

use crate::envs::{fmt_f64, EpisodeLog};
use crate::error::{Error, Result};

/// Recorded G vectors (N×K) with per-row labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GDataset {
    pub rows: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub episode: Vec<u32>,
    pub step: Vec<u64>,
}

impl GDataset {
    pub fn push(&mut self, g: Vec<f64>, theta: f64, episode: u32, step: u64) {
        self.rows.push(g);
        self.theta.push(theta);
        self.episode.push(episode);
        self.step.push(step);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn k(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Rows of a log; a new episode starts wherever `step` goes back to 0.
    pub fn from_log(log: &EpisodeLog) -> Self {
        let mut ds = GDataset::default();
        let mut episode = 0u32;
        for (i, row) in log.rows.iter().enumerate() {
            if i > 0 && row.step == 0 {
                episode += 1;
            }
            ds.push(row.gating.clone(), row.theta, episode, row.step);
        }
        ds
    }

    pub(crate) fn check_rectangular(&self) -> Result<()> {
        let k = self.k();
        if self.rows.iter().any(|r| r.len() != k) {
            return Err(Error::Shape("G dataset rows have differing lengths".into()));
        }
        if self.theta.len() != self.rows.len() {
            return Err(Error::Shape("labels not aligned with rows".into()));
        }
        Ok(())
    }
}

/// Mean per-coordinate Pearson correlation and the number of coordinates
/// skipped for zero variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub skipped: usize,
}

/// Mean over k of the Pearson correlation between column k of each
/// dataset. Identical inputs give exactly 1.
pub fn g_correlation(actor: &GDataset, critic: &GDataset) -> Result<Correlation> {
    if actor.len() != critic.len() || actor.k() != critic.k() {
        return Err(Error::Shape(format!(
            "correlation needs aligned datasets: {}x{} vs {}x{}",
            actor.len(),
            actor.k(),
            critic.len(),
            critic.k()
        )));
    }
    if actor.len() < 2 {
        return Err(Error::Protocol("correlation needs at least two rows".into()));
    }
    let n = actor.len() as f64;
    let mut total = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for k in 0..actor.k() {
        let col = |ds: &GDataset| -> (Vec<f64>, f64) {
            let c: Vec<f64> = ds.rows.iter().map(|r| r[k]).collect();
            let m = c.iter().sum::<f64>() / n;
            (c.into_iter().map(|v| v - m).collect(), m)
        };
        let (x, _) = col(actor);
        let (y, _) = col(critic);
        let vx: f64 = x.iter().map(|v| v * v).sum();
        let vy: f64 = y.iter().map(|v| v * v).sum();
        let cov: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let scale = (vx * vy).sqrt();
        if vx <= 1e-300 || vy <= 1e-300 || scale == 0.0 {
            skipped += 1;
            continue;
        }
        total += cov / scale;
        used += 1;
    }
    if skipped > 0 {
        log::warn!("g_correlation: skipped {skipped} zero-variance coordinate(s)");
    }
    if used == 0 {
        return Err(Error::Protocol("every G coordinate has zero variance".into()));
    }
    Ok(Correlation {
        value: total / used as f64,
        skipped,
    })
}

pub fn write_pca_csv<W: Write>(p: &PcaResult, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["component".to_string(), "explained_variance".to_string()];
    header.extend((0..p.mean.len()).map(|i| format!("v_{i}")));
    wtr.write_record(&header)?;
    let mut mean = vec!["mean".to_string(), fmt_f64(0.0)];
    mean.extend(p.mean.iter().map(|&v| fmt_f64(v)));
    wtr.write_record(&mean)?;
    for (i, (c, ev)) in p.components.iter().zip(&p.explained_variance).enumerate() {
        let mut rec = vec![i.to_string(), fmt_f64(*ev)];
        rec.extend(c.iter().map(|&v| fmt_f64(v)));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
