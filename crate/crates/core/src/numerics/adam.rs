use serde::{Deserialize, Serialize};

use super::layer::{DenseLayer, GradTape};
use crate::error::{Error, Result};

/// Bias-corrected Adam moments for a fixed list of parameter slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Zeroed moments shaped after `shapes` (one length per parameter slice).
    pub fn new(shapes: &[usize], lr: f64) -> Self {
        Self {
            first_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn for_layers<'a>(layers: impl IntoIterator<Item = &'a DenseLayer>, lr: f64) -> Self {
        let shapes: Vec<usize> = layers
            .into_iter()
            .flat_map(|l| [l.weights.data().len(), l.bias.len()])
            .collect();
        Self::new(&shapes, lr)
    }

    /// One Adam update in place. Gradients are validated before anything
    /// is written, so a failing call leaves params and state untouched.
    pub fn apply(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]], group: &str) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.first_moment.len() {
            return Err(Error::Shape(format!(
                "adam[{group}]: {} param slices, {} grad slices, {} moment slices",
                params.len(),
                grads.len(),
                self.first_moment.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != g.len() || p.len() != self.first_moment[i].len() {
                return Err(Error::Shape(format!("adam[{group}]: slice {i} length mismatch")));
            }
            if let Some(j) = g.iter().position(|v| !v.is_finite()) {
                return Err(Error::numeric(format!("{group}[{i}][{j}]"), format!("gradient {}", g[j])));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut self.first_moment[i];
            let v = &mut self.second_moment[i];
            for j in 0..p.len() {
                let gj = g[j];
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * gj;
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * gj * gj;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                p[j] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

/// Adam over a list of layers with a matching [`GradTape`].
pub fn adam_step(layers: &mut [&mut DenseLayer], tape: &GradTape, state: &mut AdamState, group: &str) -> Result<()> {
    let mut params: Vec<&mut [f64]> = layers.iter_mut().flat_map(|l| l.slices_mut()).collect();
    let grads = tape.slices();
    state.apply(&mut params, &grads, group)
}
