//! Pooled-pixel actor-critic and its losses.

use std::path::Path;

use ndarray::{concatenate, s, Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::env::ACTION_DIM;
use super::nn::{Activation, Adam, Grads, Mlp, Scalar};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::{ImageBatch, Pixels};

pub const POOL: usize = 4;
pub const HIDDEN: usize = 128;
const ACTOR_OUT_SCALE: f64 = 3e-3;

/// Average-pools each `POOL×POOL` block and flattens to one row per image,
/// on the unit scale.
pub fn pool_features(batch: &ImageBatch) -> Result<Array2<f32>> {
    let (n, c, h, w) = batch.shape();
    if h % POOL != 0 || w % POOL != 0 {
        return Err(Error::InvalidShape(format!("{h}x{w} frames are not divisible by the pool size {POOL}")));
    }
    let mut out = Array2::<f32>::zeros((n, c * (h / POOL) * (w / POOL)));
    let area = (POOL * POOL) as f32;
    match batch.pixels() {
        Pixels::U8(px) => pool_u8(px, &mut out, w, 1.0 / (255.0 * area)),
        Pixels::F32(px) => pool_into(px, &mut out, w, |v| v, 1.0 / area),
    }
    Ok(out)
}

/// Integer block sums; equal to the f32 sums, which are exact below 2^24.
fn pool_u8(px: &[u8], out: &mut Array2<f32>, w: usize, scale: f32) {
    let pw = w / POOL;
    let mut acc = vec![0u32; pw];
    for (image, mut row) in px.chunks_exact(out.ncols() * POOL * POOL).zip(out.rows_mut()) {
        let row = row.as_slice_mut().expect("contiguous rows");
        for (block_row, dst) in image.chunks_exact(POOL * w).zip(row.chunks_exact_mut(pw)) {
            acc.fill(0);
            for line in block_row.chunks_exact(w) {
                for (a, cells) in acc.iter_mut().zip(line.chunks_exact(POOL)) {
                    *a += cells.iter().map(|&v| u32::from(v)).sum::<u32>();
                }
            }
            for (d, &a) in dst.iter_mut().zip(&acc) {
                *d = a as f32 * scale;
            }
        }
    }
}

fn pool_into<T: Copy>(px: &[T], out: &mut Array2<f32>, w: usize, to_f32: impl Fn(T) -> f32, scale: f32) {
    let pw = w / POOL;
    let mut acc = vec![0f32; pw];
    for (image, mut row) in px.chunks_exact(out.ncols() * POOL * POOL).zip(out.rows_mut()) {
        let row = row.as_slice_mut().expect("contiguous rows");
        for (block_row, dst) in image.chunks_exact(POOL * w).zip(row.chunks_exact_mut(pw)) {
            acc.fill(0.0);
            for line in block_row.chunks_exact(w) {
                for (a, cells) in acc.iter_mut().zip(line.chunks_exact(POOL)) {
                    *a += cells.iter().map(|&v| to_f32(v)).sum::<f32>();
                }
            }
            for (d, a) in dst.iter_mut().zip(&acc) {
                *d = a * scale;
            }
        }
    }
}

pub fn feature_dim(c: usize, h: usize, w: usize) -> usize {
    c * (h / POOL) * (w / POOL)
}

/// Critic input: encoded observations with the action appended.
pub fn critic_input<F: Scalar>(latent: &Array2<F>, actions: &Array2<F>) -> Array2<F> {
    concatenate(Axis(1), &[latent.view(), actions.view()]).expect("matching batch sizes")
}

fn batch_len<F: Scalar>(x: &Array2<F>) -> F {
    F::from_usize(x.nrows()).expect("cast")
}

/// Mean squared TD error against fixed targets, through encoder and critic.
pub fn critic_loss<F: Scalar>(
    encoder: &Mlp<F>,
    critic: &Mlp<F>,
    features: &Array2<F>,
    actions: &Array2<F>,
    targets: &Array1<F>,
) -> F {
    let q = critic.predict(&critic_input(&encoder.predict(features), actions));
    let err = &q.column(0) - targets;
    err.fold(F::zero(), |acc, &e| acc + e * e) / batch_len(features)
}

/// Critic loss, its encoder and critic gradients, and the encoded batch.
pub fn critic_loss_and_grads<F: Scalar>(
    encoder: &Mlp<F>,
    critic: &Mlp<F>,
    features: &Array2<F>,
    actions: &Array2<F>,
    targets: &Array1<F>,
) -> (F, Grads<F>, Grads<F>, Array2<F>) {
    let enc_acts = encoder.forward(features);
    let latent = enc_acts.last().expect("non-empty").clone();
    let acts = critic.forward(&critic_input(&latent, actions));
    let err = &acts.last().expect("non-empty").column(0) - targets;
    let n = batch_len(features);
    let loss = err.fold(F::zero(), |acc, &e| acc + e * e) / n;
    let two = F::one() + F::one();
    let grad_out = err.mapv(|e| two * e / n).insert_axis(Axis(1));
    let (critic_grads, grad_latent) = critic.backward(&acts, grad_out, Some(0..latent.ncols()));
    let (encoder_grads, _) = encoder.backward(&enc_acts, grad_latent.expect("requested"), None);
    (loss, encoder_grads, critic_grads, latent)
}

/// Negative mean Q of the actor's own actions on a fixed encoding.
pub fn actor_loss<F: Scalar>(actor: &Mlp<F>, critic: &Mlp<F>, latent: &Array2<F>) -> F {
    let q = critic.predict(&critic_input(latent, &actor.predict(latent)));
    -q.sum() / batch_len(latent)
}

pub fn actor_loss_and_grads<F: Scalar>(actor: &Mlp<F>, critic: &Mlp<F>, latent: &Array2<F>) -> (F, Grads<F>) {
    let actor_acts = actor.forward(latent);
    let actions = actor_acts.last().expect("non-empty");
    let critic_acts = critic.forward(&critic_input(latent, actions));
    let q = critic_acts.last().expect("non-empty");
    let n = batch_len(latent);
    let loss = -q.sum() / n;
    let grad_q = Array2::from_elem(q.raw_dim(), -F::one() / n);
    let d = latent.ncols();
    let grad_actions = critic.input_grad(&critic_acts, grad_q, d..d + actions.ncols());
    (loss, actor.backward(&actor_acts, grad_actions, None).0)
}

/// Pooled pixels feed a shared two-layer encoder; the actor and critic
/// heads read its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TinyPolicy {
    pub encoder: Mlp<f32>,
    pub actor: Mlp<f32>,
    pub critic: Mlp<f32>,
    #[serde(default)]
    pub encoder_opt: Adam,
    #[serde(default)]
    pub actor_opt: Adam,
    #[serde(default)]
    pub critic_opt: Adam,
}

impl TinyPolicy {
    pub fn new(feature_dim: usize, actor_lr: f64, critic_lr: f64, g: &mut Rng) -> Self {
        use Activation::{Identity, Tanh};
        let encoder = Mlp::init(&[feature_dim, HIDDEN, HIDDEN], Tanh, Tanh, None, g);
        let actor = Mlp::init(&[HIDDEN, HIDDEN, ACTION_DIM], Tanh, Tanh, Some(ACTOR_OUT_SCALE), g);
        let critic = Mlp::init(&[HIDDEN + ACTION_DIM, HIDDEN, 1], Tanh, Identity, None, g);
        Self {
            encoder,
            actor,
            critic,
            encoder_opt: Adam::new(critic_lr),
            actor_opt: Adam::new(actor_lr),
            critic_opt: Adam::new(critic_lr),
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn encode(&self, features: &Array2<f32>) -> Array2<f32> {
        self.encoder.predict(features)
    }

    /// Deterministic actions in `[-1, 1]`, one row per feature row.
    pub fn act(&self, features: &Array2<f32>) -> Array2<f32> {
        self.actor.predict(&self.encode(features))
    }

    pub fn act_frames(&self, frames: &ImageBatch) -> Result<Array2<f32>> {
        let features = pool_features(frames)?;
        if features.ncols() != self.feature_dim() {
            return Err(Error::InvalidShape(format!(
                "policy expects {} features, frames give {}",
                self.feature_dim(),
                features.ncols()
            )));
        }
        Ok(self.act(&features))
    }

    pub fn q_values(&self, features: &Array2<f32>, actions: &Array2<f32>) -> Array1<f32> {
        let latent = self.encode(features);
        self.critic.predict(&critic_input(&latent, actions)).slice(s![.., 0]).to_owned()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_vec(self).map_err(|e| Error::Format(format!("policy encoding failed: {e}")))?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let policy: Self = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Format(format!("{} is not a policy file: {e}", path.display())))?;
        let latent = policy.encoder.output_dim();
        if policy.actor.input_dim() != latent
            || policy.critic.input_dim() != latent + ACTION_DIM
            || policy.actor.output_dim() != ACTION_DIM
        {
            return Err(Error::Format(format!("{} has inconsistent network shapes", path.display())));
        }
        Ok(policy)
    }
}
