use std::io::Write;

use crate::envs::{fmt_f64, N_DIRECTIONS};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub env_step: u64,
    /// Mean per-step reward over the eight training headings.
    pub mean_return: f64,
    pub per_direction: [f64; N_DIRECTIONS],
    /// Mean per-coordinate Pearson correlation between actor and critic G.
    pub g_corr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn last(&self) -> Option<&CurvePoint> {
        self.points.last()
    }

    /// Trapezoidal area under mean_return over env steps.
    pub fn area_under_curve(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[0].mean_return + w[1].mean_return) * (w[1].env_step - w[0].env_step) as f64)
            .sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["env_step".to_string(), "mean_return".to_string()];
        header.extend((0..N_DIRECTIONS).map(|i| format!("ret_dir_{i}")));
        header.push("g_corr".into());
        wtr.write_record(&header)?;
        for p in &self.points {
            let mut rec = vec![p.env_step.to_string(), fmt_f64(p.mean_return)];
            rec.extend(p.per_direction.iter().map(|&v| fmt_f64(v)));
            rec.push(fmt_f64(p.g_corr));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Direction-decoding error of training-time G at one evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodePoint {
    pub env_step: u64,
    pub actor_error: f64,
    pub critic_error: f64,
}

pub fn write_decoding_csv<W: Write>(points: &[DecodePoint], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["env_step", "actor_decode_err", "critic_decode_err"])?;
    for p in points {
        wtr.write_record([p.env_step.to_string(), fmt_f64(p.actor_error), fmt_f64(p.critic_error)])?;
    }
    wtr.flush()?;
    Ok(())
}
