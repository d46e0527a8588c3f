//! Drive the frozen bases with G taken from the top-two principal plane of
//! the learned gating vectors, and report the resulting movement.
//!
//! `cargo run --example sweep_g -- [checkpoint.json]`

mod common;

use bilinear_ac::analysis::{g_sweep, DEFAULT_AMPLITUDES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1);
    let ckpt = common::checkpoint_or_train(path.as_deref())?;
    let sweep = g_sweep(&ckpt.agent, &DEFAULT_AMPLITUDES, 8, 400)?;
    println!("plane RMS radius {:.3}", sweep.plane.rms);
    println!("{:>8} {:>6} {:>10} {:>8} {:>8}", "latent°", "amp", "movement°", "speed", "p90");
    for c in &sweep.cells {
        println!(
            "{:>8.1} {:>6.2} {:>10.1} {:>8.3} {:>8.3}",
            c.latent_direction.to_degrees(),
            c.amplitude,
            c.movement_direction.to_degrees(),
            c.mean_speed,
            c.speed_p90
        );
    }
    Ok(())
}
