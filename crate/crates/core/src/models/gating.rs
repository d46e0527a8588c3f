use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::envs::{Observation, GOAL_DIM, OBS_DIM};
use crate::numerics::{Activation, DenseLayer, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GatingMode {
    #[default]
    Shared,
    Independent,
}

/// The K gating coefficients. Unconstrained: no softmax, no simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct GatingVector(pub Vec<f64>);

impl GatingVector {
    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn one_hot(k: usize, j: usize) -> Self {
        let mut v = vec![0.0; k];
        v[j] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: f64, other: &GatingVector, b: f64) -> GatingVector {
        GatingVector(self.0.iter().zip(&other.0).map(|(x, y)| a * x + b * y).collect())
    }
}

/// Linear gate `G = W·x + b` on the goal slice (or the full observation),
/// with optional Gaussian exploration noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatingNet {
    pub layer: DenseLayer,
    pub noise_std: f64,
    pub full_state: bool,
}

impl GatingNet {
    pub fn init<R: Rng + ?Sized>(k: usize, full_state: bool, noise_std: f64, rng: &mut R) -> Self {
        let in_dim = if full_state { OBS_DIM } else { GOAL_DIM };
        let mut layer = DenseLayer::init_uniform(in_dim, k, Activation::Identity, rng);
        layer.bias.fill(1.0 / k as f64);
        Self {
            layer,
            noise_std: noise_std.max(0.0),
            full_state,
        }
    }

    pub fn from_parts(weights: Matrix, bias: Vec<f64>, noise_std: f64) -> crate::Result<Self> {
        let full_state = weights.cols() == OBS_DIM;
        Ok(Self {
            layer: DenseLayer::new(weights, bias, Activation::Identity)?,
            noise_std,
            full_state,
        })
    }

    pub fn k(&self) -> usize {
        self.layer.out_dim()
    }

    #[inline]
    pub fn input<'a>(&self, s: &'a Observation) -> &'a [f64] {
        if self.full_state {
            s.as_slice()
        } else {
            s.goal()
        }
    }

    /// Deterministic gate into a caller buffer.
    #[inline]
    pub fn gate_into(&self, s: &Observation, out: &mut [f64]) {
        self.layer.weights.matvec_into(self.input(s), out);
        for (o, b) in out.iter_mut().zip(&self.layer.bias) {
            *o += b;
        }
    }

    /// `W·x + b`, plus N(0, σ_G²) per component iff `noise` is given and σ_G > 0.
    pub fn gate<R: Rng + ?Sized>(&self, s: &Observation, noise: Option<&mut R>) -> GatingVector {
        let mut out = vec![0.0; self.k()];
        self.gate_into(s, &mut out);
        if let Some(rng) = noise {
            if self.noise_std > 0.0 {
                for o in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *o += self.noise_std * z;
                }
            }
        }
        GatingVector(out)
    }

    pub fn gate_det(&self, s: &Observation) -> GatingVector {
        self.gate::<rand_chacha::ChaCha8Rng>(s, None)
    }

    /// Draws a noise vector of the gate's scale (zeros when σ_G = 0).
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        if self.noise_std > 0.0 {
            (0..self.k())
                .map(|_| self.noise_std * rng.sample::<f64, _>(StandardNormal))
                .collect()
        } else {
            vec![0.0; self.k()]
        }
    }
}
