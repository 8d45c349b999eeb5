//! Finite-difference verification of the actor and critic gradients.

use ndarray::{Array1, Array2};

use super::nn::{Grads, Mlp};
use super::policy::{actor_loss, actor_loss_and_grads, critic_loss, critic_loss_and_grads, TinyPolicy};
use crate::rng::Rng;

pub const FD_EPSILON: f64 = 1e-3;

/// Inputs of one check: features, stored actions and fixed TD targets.
#[derive(Debug, Clone)]
pub struct CheckBatch {
    pub features: Array2<f64>,
    pub actions: Array2<f64>,
    pub targets: Array1<f64>,
}

/// Which parameters to perturb.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    All,
    /// This many random entries of every weight and bias tensor.
    PerTensor(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Encoder parameters under the critic loss.
    pub encoder_max_rel: f64,
    pub critic_max_rel: f64,
    pub actor_max_rel: f64,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.encoder_max_rel.max(self.critic_max_rel).max(self.actor_max_rel)
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    if analytic == numeric {
        return 0.0;
    }
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs())
}

fn pick(len: usize, coverage: Coverage, g: &mut Rng) -> Vec<usize> {
    match coverage {
        Coverage::PerTensor(k) if k < len => (0..k).map(|_| g.below(len as u64) as usize).collect(),
        _ => (0..len).collect(),
    }
}

fn param_mut(net: &mut Mlp<f64>, (layer, is_bias, k): (usize, bool, usize)) -> &mut f64 {
    if is_bias {
        &mut net.biases[layer][k]
    } else {
        let cols = net.weights[layer].ncols();
        &mut net.weights[layer][[k / cols, k % cols]]
    }
}

fn grad_at(grads: &Grads<f64>, (layer, is_bias, k): (usize, bool, usize)) -> f64 {
    if is_bias {
        grads.biases[layer][k]
    } else {
        let cols = grads.weights[layer].ncols();
        grads.weights[layer][[k / cols, k % cols]]
    }
}

fn perturbed(net: &mut Mlp<f64>, slot: (usize, bool, usize), loss: &dyn Fn(&Mlp<f64>) -> f64) -> f64 {
    let original = *param_mut(net, slot);
    *param_mut(net, slot) = original + FD_EPSILON;
    let plus = loss(net);
    *param_mut(net, slot) = original - FD_EPSILON;
    let minus = loss(net);
    *param_mut(net, slot) = original;
    (plus - minus) / (2.0 * FD_EPSILON)
}

/// Largest relative error between `analytic` and central differences of
/// `loss`, plus the number of parameters compared.
pub fn check_network(
    net: &Mlp<f64>,
    analytic: &Grads<f64>,
    loss: &dyn Fn(&Mlp<f64>) -> f64,
    coverage: Coverage,
    g: &mut Rng,
) -> (f64, usize) {
    let mut net = net.clone();
    let mut worst = 0.0f64;
    let mut count = 0;
    for layer in 0..net.weights.len() {
        for is_bias in [false, true] {
            let len = if is_bias {
                analytic.biases[layer].len()
            } else {
                analytic.weights[layer].len()
            };
            for k in pick(len, coverage, g) {
                let slot = (layer, is_bias, k);
                let numeric = perturbed(&mut net, slot, loss);
                worst = worst.max(relative_error(grad_at(analytic, slot), numeric));
                count += 1;
            }
        }
    }
    (worst, count)
}

/// Compares analytic gradients of both losses against central finite
/// differences on `f64` copies of the policy parameters.
pub fn grad_check(policy: &TinyPolicy, batch: &CheckBatch, coverage: Coverage, g: &mut Rng) -> GradCheckReport {
    let encoder = policy.encoder.cast::<f64>();
    let critic = policy.critic.cast::<f64>();
    let actor = policy.actor.cast::<f64>();
    let (x, a, y) = (&batch.features, &batch.actions, &batch.targets);
    let (_, encoder_grads, critic_grads, latent) = critic_loss_and_grads(&encoder, &critic, x, a, y);
    let (encoder_max_rel, n_encoder) =
        check_network(&encoder, &encoder_grads, &|e| critic_loss(e, &critic, x, a, y), coverage, g);
    let (critic_max_rel, n_critic) =
        check_network(&critic, &critic_grads, &|c| critic_loss(&encoder, c, x, a, y), coverage, g);
    let (_, actor_grads) = actor_loss_and_grads(&actor, &critic, &latent);
    let (actor_max_rel, n_actor) =
        check_network(&actor, &actor_grads, &|p| actor_loss(p, &critic, &latent), coverage, g);
    GradCheckReport {
        encoder_max_rel,
        critic_max_rel,
        actor_max_rel,
        checked: n_encoder + n_critic + n_actor,
    }
}
