use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::{Action, Observation, ACTION_DIM, OBS_DIM};
use crate::error::{Error, Result};
use crate::numerics::{Activation, DenseLayer, GradTape};

pub const CRITIC_INPUT_DIM: usize = OBS_DIM + ACTION_DIM;
pub const SIGMA_FLOOR: f64 = 1e-3;

/// K linear action generators Y_k(s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisPolicies {
    pub layers: Vec<DenseLayer>,
}

impl BasisPolicies {
    pub fn init<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        Self {
            layers: (0..k)
                .map(|_| DenseLayer::init_uniform(OBS_DIM, ACTION_DIM, Activation::Identity, rng))
                .collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.layers.len()
    }

    /// Y_k(s) for every k.
    pub fn responses(&self, s: &Observation) -> Vec<[f64; ACTION_DIM]> {
        self.layers
            .iter()
            .map(|l| {
                let mut y = [0.0; ACTION_DIM];
                l.weights.matvec_into(s.as_slice(), &mut y);
                y[0] += l.bias[0];
                y[1] += l.bias[1];
                y
            })
            .collect()
    }

    /// Σ_k G_k · Y_k(s)
    pub fn mean(&self, gating: &[f64], s: &Observation) -> Result<Action> {
        if gating.len() != self.k() {
            return Err(Error::Shape(format!("gating length {} != K {}", gating.len(), self.k())));
        }
        Ok(combine_responses(gating, &self.responses(s)))
    }
}

#[inline]
pub(crate) fn combine_responses(gating: &[f64], ys: &[[f64; ACTION_DIM]]) -> Action {
    let mut mu = [0.0; ACTION_DIM];
    for (g, y) in gating.iter().zip(ys) {
        mu[0] += g * y[0];
        mu[1] += g * y[1];
    }
    mu
}

/// State-dependent standard deviation: softplus(W·s + b) + 1e-3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaHead {
    pub layer: DenseLayer,
}

impl SigmaHead {
    pub fn init<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            layer: DenseLayer::init_uniform(OBS_DIM, ACTION_DIM, Activation::Softplus, rng),
        }
    }

    /// (σ, pre-activation)
    pub fn sigma(&self, s: &Observation) -> ([f64; ACTION_DIM], [f64; ACTION_DIM]) {
        let mut pre = [0.0; ACTION_DIM];
        let mut out = [0.0; ACTION_DIM];
        self.layer.forward_into(s.as_slice(), &mut pre, &mut out);
        (out.map(|v| v + SIGMA_FLOOR), pre)
    }
}

/// K scalar basis critics φ_k(s,a), each one tanh hidden layer and a
/// linear head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisCritic {
    pub hidden: Vec<DenseLayer>,
    pub heads: Vec<DenseLayer>,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct CriticCache {
    pub input: [f64; CRITIC_INPUT_DIM],
    /// K×H hidden activations, row per basis.
    pub hidden: Vec<f64>,
    /// φ_1..φ_K
    pub psi: Vec<f64>,
}

impl CriticCache {
    pub fn new(k: usize, width: usize) -> Self {
        Self {
            input: [0.0; CRITIC_INPUT_DIM],
            hidden: vec![0.0; k * width],
            psi: vec![0.0; k],
        }
    }
}

impl BasisCritic {
    pub fn init<R: Rng + ?Sized>(k: usize, width: usize, rng: &mut R) -> Self {
        let mut hidden = Vec::with_capacity(k);
        let mut heads = Vec::with_capacity(k);
        for _ in 0..k {
            hidden.push(DenseLayer::init_uniform(CRITIC_INPUT_DIM, width, Activation::Tanh, rng));
            heads.push(DenseLayer::init_uniform(width, 1, Activation::Identity, rng));
        }
        Self { hidden, heads }
    }

    pub fn k(&self) -> usize {
        self.hidden.len()
    }

    pub fn width(&self) -> usize {
        self.hidden.first().map_or(0, DenseLayer::out_dim)
    }

    /// Layers in tape order: hidden_0, head_0, hidden_1, head_1, …
    pub fn layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.hidden.iter().zip(&self.heads).flat_map(|(h, o)| [h, o])
    }

    pub fn layers_mut(&mut self) -> Vec<&mut DenseLayer> {
        self.hidden.iter_mut().zip(self.heads.iter_mut()).flat_map(|(h, o)| [h, o]).collect()
    }

    pub fn tape(&self) -> GradTape {
        GradTape::zeros_like(self.layers())
    }

    pub fn forward_cached(&self, s: &Observation, a: &Action, cache: &mut CriticCache) {
        let width = self.width();
        cache.input[..OBS_DIM].copy_from_slice(s.as_slice());
        cache.input[OBS_DIM..].copy_from_slice(a);
        for k in 0..self.k() {
            let hl = &self.hidden[k];
            let h = &mut cache.hidden[k * width..(k + 1) * width];
            hl.weights.matvec_into(&cache.input, h);
            for (v, b) in h.iter_mut().zip(&hl.bias) {
                *v = crate::numerics::tanh(*v + b);
            }
            let head = &self.heads[k];
            cache.psi[k] = crate::numerics::dot(head.weights.row(0), h) + head.bias[0];
        }
    }

    /// Basis response vector ψ(s,a) = (φ_1, …, φ_K).
    pub fn responses(&self, s: &Observation, a: &Action) -> Vec<f64> {
        let mut cache = CriticCache::new(self.k(), self.width());
        self.forward_cached(s, a, &mut cache);
        cache.psi
    }

    /// Σ_k G_k · φ_k(s,a)
    pub fn value(&self, gating: &[f64], s: &Observation, a: &Action) -> Result<f64> {
        if gating.len() != self.k() {
            return Err(Error::Shape(format!("gating length {} != K {}", gating.len(), self.k())));
        }
        Ok(crate::numerics::dot(gating, &self.responses(s, a)))
    }

    /// Backward from `upstream[k] = ∂L/∂φ_k`. Parameter gradients go to
    /// `tape` (hidden_k at 2k, head_k at 2k+1); ∂L/∂(s,a) is added to
    /// `input_grad`. `scratch` must hold `width` floats.
    pub fn backward(
        &self,
        cache: &CriticCache,
        upstream: &[f64],
        mut tape: Option<&mut GradTape>,
        mut input_grad: Option<&mut [f64; CRITIC_INPUT_DIM]>,
        scratch: &mut [f64],
    ) {
        let width = self.width();
        for k in 0..self.k() {
            let u = upstream[k];
            if u == 0.0 {
                continue;
            }
            let h = &cache.hidden[k * width..(k + 1) * width];
            let w_out = self.heads[k].weights.row(0);
            for ((d, &hv), &w) in scratch.iter_mut().zip(h).zip(w_out) {
                *d = u * w * (1.0 - hv * hv);
            }
            if let Some(t) = tape.as_deref_mut() {
                let head_grad = &mut t.layers[2 * k + 1];
                for (g, &hv) in head_grad.weights.data_mut().iter_mut().zip(h) {
                    *g += u * hv;
                }
                head_grad.bias[0] += u;
                let hid_grad = &mut t.layers[2 * k];
                hid_grad.weights.add_outer(scratch, &cache.input, 1.0);
                for (g, d) in hid_grad.bias.iter_mut().zip(scratch.iter()) {
                    *g += d;
                }
            }
            if let Some(ig) = input_grad.as_deref_mut() {
                self.hidden[k].weights.add_tmatvec_into(scratch, ig);
            }
        }
    }
}
