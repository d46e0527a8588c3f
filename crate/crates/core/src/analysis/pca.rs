use nalgebra::{DMatrix, SymmetricEigen};

use super::GDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    pub mean: Vec<f64>,
    /// Orthonormal rows, ordered by explained variance.
    pub components: Vec<Vec<f64>>,
    /// Sample-covariance eigenvalues, non-increasing.
    pub explained_variance: Vec<f64>,
}

impl PcaResult {
    pub fn project(&self, g: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(g).zip(&self.mean).map(|((c, x), m)| c * (x - m)).sum())
            .collect()
    }

    pub fn reconstruct(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, zi) in self.components.iter().zip(z) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o += zi * ci;
            }
        }
        out
    }
}

/// Eigenvalues below this fraction of the largest count as rank deficiency.
const RANK_TOL: f64 = 1e-12;

/// Eigendecomposition of the mean-centred sample covariance (N−1
/// denominator). Returns fewer than `n_components` when the data are rank
/// deficient.
pub fn pca(ds: &GDataset, n_components: usize) -> Result<PcaResult> {
    ds.check_rectangular()?;
    let n = ds.len();
    let k = ds.k();
    if n < 2 || n < n_components {
        return Err(Error::Protocol(format!("PCA needs N >= max(2, n_components); N = {n}")));
    }
    let mut mean = vec![0.0; k];
    for r in &ds.rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = DMatrix::<f64>::zeros(k, k);
    for r in &ds.rows {
        for i in 0..k {
            let di = r[i] - mean[i];
            for j in i..k {
                cov[(i, j)] += di * (r[j] - mean[j]);
            }
        }
    }
    for i in 0..k {
        for j in i..k {
            let v = cov[(i, j)] / (n as f64 - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = order.first().map_or(0.0, |&i| eig.eigenvalues[i].max(0.0));
    let wanted = n_components.min(k);
    let mut components = Vec::with_capacity(wanted);
    let mut explained_variance = Vec::with_capacity(wanted);
    for &i in order.iter().take(wanted) {
        let ev = eig.eigenvalues[i];
        if top == 0.0 || ev <= RANK_TOL * top {
            break;
        }
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        // sign convention: largest-magnitude entry positive
        let pivot = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        explained_variance.push(ev);
    }
    if components.len() < wanted {
        log::warn!("pca: data rank {} is below the {wanted} requested components", components.len());
    }
    Ok(PcaResult {
        mean,
        components,
        explained_variance,
    })
}
