//! Zero-shot conditioning on headings never trained on.
//!
//! `cargo run --example zero_shot -- [checkpoint.json]`

mod common;

use bilinear_ac::adapt::{gate_for, zero_shot_sweep};
use bilinear_ac::sac::evaluate_training_directions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1);
    let ckpt = common::checkpoint_or_train(path.as_deref())?;
    let agent = &ckpt.agent;

    let trained = evaluate_training_directions(agent)?;
    println!("trained headings: mean reward/step {:+.4}", trained.mean);

    let thetas: Vec<f64> = (0..8).map(|i| 22.5 + 45.0 * i as f64).collect();
    let before = agent.checksum();
    let mut total = 0.0;
    for (deg, r) in zero_shot_sweep(agent, &thetas)? {
        let g = gate_for(agent, &bilinear_ac::envs::TaskDescriptor::from_degrees(deg));
        let norm = g.0.iter().map(|v| v * v).sum::<f64>().sqrt();
        println!("θ = {deg:>6.1}°  reward/step {:+.4}  |G| = {norm:.2}", r.mean_reward);
        total += r.mean_reward;
    }
    let mean = total / thetas.len() as f64;
    println!("zero-shot mean {mean:+.4} = {:.0}% of trained", 100.0 * mean / trained.mean);
    assert_eq!(before, agent.checksum());
    Ok(())
}
