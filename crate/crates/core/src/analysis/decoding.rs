use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GDataset;
use crate::envs::wrap_angle;
use crate::error::{Error, Result};

pub const DECODER_RIDGE: f64 = 1e-3;
pub const DECODER_FOLDS: usize = 5;

/// Cross-validated ridge regression from G to (cos θ, sin θ); returns the
/// mean held-out angle between predicted and true heading, in radians.
pub fn direction_decoding(ds: &GDataset, fold_seed: u64) -> Result<f64> {
    direction_decoding_with(ds, DECODER_RIDGE, DECODER_FOLDS, fold_seed)
}

pub fn direction_decoding_with(ds: &GDataset, lambda: f64, folds: usize, fold_seed: u64) -> Result<f64> {
    ds.check_rectangular()?;
    let n = ds.len();
    if folds < 2 || n < folds {
        return Err(Error::Protocol(format!("{folds}-fold decoding needs at least {folds} rows, got {n}")));
    }
    let first = ds.theta[0];
    if ds.theta.iter().all(|t| wrap_angle(t - first).abs() < 1e-9) {
        return Err(Error::Protocol("direction decoding needs at least two distinct headings".into()));
    }
    let k = ds.k();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(fold_seed));
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % folds;
    }

    let mut total_err = 0.0;
    for f in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
        let m = train.len() as f64;
        let mut x_mean = vec![0.0; k];
        let mut y_mean = [0.0; 2];
        for &i in &train {
            for (xm, v) in x_mean.iter_mut().zip(&ds.rows[i]) {
                *xm += v / m;
            }
            y_mean[0] += ds.theta[i].cos() / m;
            y_mean[1] += ds.theta[i].sin() / m;
        }
        let mut xtx = DMatrix::<f64>::identity(k, k) * lambda;
        let mut xty = DMatrix::<f64>::zeros(k, 2);
        for &i in &train {
            let xc: Vec<f64> = ds.rows[i].iter().zip(&x_mean).map(|(v, m)| v - m).collect();
            let yc = [ds.theta[i].cos() - y_mean[0], ds.theta[i].sin() - y_mean[1]];
            for a in 0..k {
                for b in 0..k {
                    xtx[(a, b)] += xc[a] * xc[b];
                }
                xty[(a, 0)] += xc[a] * yc[0];
                xty[(a, 1)] += xc[a] * yc[1];
            }
        }
        let coef = xtx
            .cholesky()
            .ok_or_else(|| Error::numeric("direction_decoding", "ridge system not positive definite"))?
            .solve(&xty);
        for &i in &test {
            let mut pred = y_mean;
            for a in 0..k {
                let xc = ds.rows[i][a] - x_mean[a];
                pred[0] += xc * coef[(a, 0)];
                pred[1] += xc * coef[(a, 1)];
            }
            let err = wrap_angle(pred[1].atan2(pred[0]) - ds.theta[i]).abs();
            total_err += err;
        }
    }
    Ok(total_err / n as f64)
}
