//! Off-policy soft actor–critic for the co-decomposed model.
//!
//! Per environment step after warmup: critic 1, critic 2, actor, then the
//! EMA target update. Each loss that touches the shared gate updates it.

mod config;
mod curve;
mod eval;
pub mod gradcheck;
mod losses;
mod replay;
mod trainer;

pub use config::TrainConfig;
pub use curve::{write_decoding_csv, CurvePoint, DecodePoint, LearningCurve};
pub use eval::{evaluate_direction, rollout, evaluate_training_directions, random_policy_baseline, EpisodeResult, EvalSummary};
pub use losses::{actor_loss, critic_loss, td_target, td_targets, AgentGrads, TargetOptions};
pub use replay::ReplayBuffer;
pub use trainer::{train, TrainFailure, TrainOutput, Trainer};
