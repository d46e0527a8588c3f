//! Shared versus independent actor gating with matched seeds.
//!
//! `cargo run --example ablate_gating -- [steps] [seeds...]`

use bilinear_ac::models::{GatingMode, ModelConfig};
use bilinear_ac::sac::{train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<u64> = std::env::args().skip(1).map(|s| s.parse()).collect::<Result<_, _>>()?;
    let steps = args.first().copied().unwrap_or(10_000);
    let seeds = if args.len() > 1 { args[1..].to_vec() } else { vec![0] };
    let cfg = TrainConfig {
        total_steps: steps,
        eval_every: (steps / 5).max(1),
        ..TrainConfig::default()
    };
    println!("{:>5} {:>12} {:>12} {:>12} {:>8}", "seed", "mode", "final", "AUC", "g_corr");
    for &seed in &seeds {
        for mode in [GatingMode::Shared, GatingMode::Independent] {
            let model = ModelConfig {
                gating_mode: mode,
                ..ModelConfig::default()
            };
            let out = train(model, cfg.clone(), seed).map_err(|f| f.error)?;
            println!(
                "{seed:>5} {:>12} {:>+12.4} {:>12.1} {:>8.4}",
                format!("{mode:?}").to_lowercase(),
                out.final_eval.mean,
                out.curve.area_under_curve(),
                out.final_eval.g_corr
            );
        }
    }
    Ok(())
}
