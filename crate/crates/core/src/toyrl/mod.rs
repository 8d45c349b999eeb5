//! Toy pixel-control environment and a small actor-critic trainer.

pub mod env;
pub mod gradcheck;
pub mod nn;
pub mod policy;
pub mod replay;
pub mod train;

pub use env::{DotReacherEnv, EnvConfig, StepResult};
pub use gradcheck::{grad_check, CheckBatch, Coverage, GradCheckReport};
pub use policy::{pool_features, TinyPolicy};
pub use replay::{Episode, ReplayBuffer};
pub use train::{evaluate, train, CurvePoint, TrainConfig, TrainRun, Trained};
