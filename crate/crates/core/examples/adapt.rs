//! Online adaptation of G after a heading switch, bases frozen.
//!
//! `cargo run --example adapt -- [checkpoint.json] [to_deg] [from_deg] [alpha_g]`

mod common;

use bilinear_ac::adapt::{adapt_online, AdaptConfig};
use bilinear_ac::envs::TaskDescriptor;
use bilinear_ac::sac::evaluate_direction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ckpt = common::checkpoint_or_train(args.first().map(String::as_str).filter(|p| *p != "-"))?;
    let num = |i: usize, d: f64| args.get(i).map(|s| s.parse::<f64>()).transpose().map(|v| v.unwrap_or(d));
    let to_deg = num(1, 90.0)?;
    let cfg = AdaptConfig {
        from_deg: num(2, 0.0)?,
        alpha_g: num(3, AdaptConfig::default().alpha_g)?,
        ..AdaptConfig::default()
    };
    let agent = &ckpt.agent;
    let from = TaskDescriptor::from_degrees(cfg.from_deg);
    let to = TaskDescriptor::from_degrees(to_deg);

    let reference = evaluate_direction(agent, &to)?.mean_reward;
    let run = adapt_online(agent, &from, &to, &cfg, 0)?;
    let negated = adapt_online(
        agent,
        &from,
        &to,
        &AdaptConfig {
            negate_reward: true,
            ..cfg.clone()
        },
        0,
    )?;
    println!("switch {:.1}° -> {:.1}°, α_G = {}", cfg.from_deg, to_deg, cfg.alpha_g);
    println!("pretrained reward on the target heading: {reference:+.4}");
    println!("{:>11}  {:>10}  {:>17}", "steps", "TD reward", "negated task (rx)");
    for start in (0..cfg.steps as usize).step_by(250) {
        println!(
            "{:>5}-{:<5}  {:>+10.4}  {:>+17.4}",
            start,
            start + 250,
            run.window_mean(start, start + 250),
            negated.received_window_mean(start, start + 250)
        );
    }
    let w: Vec<String> = run.w_final.iter().map(|v| format!("{v:.2}")).collect();
    println!("final w = [{}]", w.join(", "));
    Ok(())
}
