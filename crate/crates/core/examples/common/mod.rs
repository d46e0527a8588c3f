use std::path::Path;

use bilinear_ac::models::{Checkpoint, ModelConfig};
use bilinear_ac::sac::{train, TrainConfig};

/// Loads `path`, or trains a 10k-step agent when no path is given.
pub fn checkpoint_or_train(path: Option<&str>) -> Result<Checkpoint, Box<dyn std::error::Error>> {
    match path {
        Some(p) => Ok(Checkpoint::load(Path::new(p))?),
        None => {
            eprintln!("no checkpoint given: training a 10k-step agent first");
            let cfg = TrainConfig {
                total_steps: 10_000,
                eval_every: 10_000,
                ..TrainConfig::default()
            };
            Ok(train(ModelConfig::default(), cfg, 0).map_err(|f| f.error)?.checkpoint)
        }
    }
}
