//! Deterministic image augmentation for visual reinforcement learning.
//!
//! The crate is organized around [`tensor::ImageBatch`] (a dense
//! `(n, c, h, w)` pixel batch) and [`rng::RngState`] (a seed plus a stream
//! id for a counter-based generator). On top of those sit the individual
//! operators in [`transforms`], the multi-operator schedules in [`fusion`],
//! the hardness and diversity measurements in [`metrics`], and a small
//! pixel-control environment with an actor-critic trainer in [`toyrl`].

pub mod cli;
pub mod error;
pub mod fusion;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod tensor;
pub mod toyrl;
pub mod transforms;

pub use error::{Error, Result};
pub use rng::{Rng, RngState};
pub use tensor::{new_batch, Dtype, ImageBatch};
