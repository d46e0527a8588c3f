//! PCA, direction decoding and actor-critic correlation of the gating
//! vectors recorded on the eight training headings.
//!
//! `cargo run --example analyze_g -- [checkpoint.json]`

mod common;

use bilinear_ac::analysis::{direction_decoding, g_correlation, pca};
use bilinear_ac::sac::evaluate_training_directions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1);
    let ckpt = common::checkpoint_or_train(path.as_deref())?;
    let eval = evaluate_training_directions(&ckpt.agent)?;
    let actor = eval.actor_dataset();
    let critic = eval.critic_dataset();

    let p = pca(&actor, actor.k())?;
    let total: f64 = p.explained_variance.iter().sum();
    for (i, v) in p.explained_variance.iter().enumerate() {
        println!("PC{i}: {:5.1}% of variance", 100.0 * v / total);
    }
    println!("direction decoding error: {:.4} rad", direction_decoding(&actor, 0)?);
    println!("actor-critic G correlation: {:.6}", g_correlation(&actor, &critic)?.value);

    // mean position of each heading in the PC plane
    for d in 0..8 {
        let rows: Vec<Vec<f64>> = (0..actor.len())
            .filter(|&i| i / 800 == d)
            .map(|i| p.project(&actor.rows[i]))
            .collect();
        let m0 = rows.iter().map(|z| z[0]).sum::<f64>() / rows.len() as f64;
        let m1 = rows.iter().map(|z| z.get(1).copied().unwrap_or(0.0)).sum::<f64>() / rows.len() as f64;
        println!("heading {:>5.1}°: PC plane ({m0:+.3}, {m1:+.3})", 45.0 * d as f64);
    }
    Ok(())
}
