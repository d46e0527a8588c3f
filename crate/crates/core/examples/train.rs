//! Train one agent and write its learning curve and checkpoint.
//!
//! `cargo run --release --example train -- [seed] [steps] [out_dir]`

use bilinear_ac::models::ModelConfig;
use bilinear_ac::sac::{train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let steps: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20_000);
    let out = std::path::PathBuf::from(args.next().unwrap_or_else(|| "runs/example-train".into()));

    let config = TrainConfig {
        total_steps: steps,
        eval_every: (steps / 10).max(1),
        ..TrainConfig::default()
    };
    let t0 = std::time::Instant::now();
    let result = train(ModelConfig::default(), config, seed).map_err(|f| f.error)?;
    println!("trained {steps} steps in {:.1}s ({} updates)", t0.elapsed().as_secs_f64(), result.updates);

    std::fs::create_dir_all(&out)?;
    result.curve.write_csv(std::fs::File::create(out.join("learning_curve.csv"))?)?;
    result.checkpoint.save(&out.join("checkpoint.json"))?;
    for p in &result.curve.points {
        println!("step {:>6}  mean reward/step {:+.4}  g_corr {:.3}", p.env_step, p.mean_return, p.g_corr);
    }
    for d in &result.decoding {
        println!("step {:>6}  decode error actor {:.3} critic {:.3}", d.env_step, d.actor_error, d.critic_error);
    }
    Ok(())
}
