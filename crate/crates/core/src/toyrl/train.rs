//! Off-policy actor-critic training with replay-time augmentation.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::env::{DotReacherEnv, EnvConfig, ACTION_DIM, FRAME_CHANNELS, FRAME_LEN, FRAME_SIZE};
use super::nn::Mlp;
use super::policy::{actor_loss_and_grads, critic_input, critic_loss_and_grads, feature_dim, pool_features, TinyPolicy};
use super::replay::{Episode, ReplayBuffer, Transition};
use crate::error::{Error, Result};
use crate::fusion::Augmentation;
use crate::metrics::{iqm, ReturnContext, ReturnSample};
use crate::rng::{Rng, RngState};
use crate::tensor::ImageBatch;

const INIT_STREAM: u64 = 1;
const ENV_STREAM: u64 = 2;
const EXPLORE_STREAM: u64 = 3;
const UPDATE_STREAM: u64 = 4;
const EVAL_ENV_STREAM: u64 = 5;
const EVAL_AUG_STREAM: u64 = 6;

pub const DEFAULT_EVAL_EPISODES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub seed: u64,
    pub total_env_steps: u64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub augmentation: Augmentation,
    /// Augment next observations with the same parameters as observations.
    pub augment_next_obs: bool,
    pub eval_every: u64,
    pub eval_episodes: usize,
    /// Uniformly random actions before learning starts.
    pub seed_steps: u64,
    /// Environment steps per gradient update.
    pub update_every: u64,
    pub actor_learning_rate: f64,
    /// Shared by the critic head and the encoder.
    pub critic_learning_rate: f64,
    pub n_step: usize,
    pub tau: f64,
    pub explore_std_start: f64,
    pub explore_std_end: f64,
    /// Fraction of training over which exploration noise decays.
    pub explore_decay_fraction: f64,
    pub target_noise_clip: f64,
    pub env: EnvConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            total_env_steps: 30_000,
            batch_size: 32,
            replay_capacity: 30_000,
            augmentation: Augmentation::None,
            augment_next_obs: true,
            eval_every: 5_000,
            eval_episodes: DEFAULT_EVAL_EPISODES,
            seed_steps: 1_000,
            update_every: 4,
            actor_learning_rate: 1e-4,
            critic_learning_rate: 1e-3,
            n_step: 3,
            tau: 0.01,
            explore_std_start: 1.0,
            explore_std_end: 0.1,
            explore_decay_fraction: 1.0 / 3.0,
            target_noise_clip: 0.3,
            env: EnvConfig::shaped(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| {
            Err(Error::Config {
                key: key.into(),
                message: message.into(),
            })
        };
        if self.batch_size == 0 {
            return bad("batch_size", "must be positive");
        }
        if self.replay_capacity == 0 {
            return bad("replay_capacity", "must be positive");
        }
        if self.eval_every == 0 {
            return bad("eval_every", "must be positive");
        }
        if self.eval_episodes == 0 {
            return bad("eval_episodes", "must be positive");
        }
        if self.update_every == 0 {
            return bad("update_every", "must be positive");
        }
        if self.n_step == 0 {
            return bad("n_step", "must be positive");
        }
        if !(self.actor_learning_rate > 0.0 && self.actor_learning_rate.is_finite()) {
            return bad("actor_learning_rate", "must be positive");
        }
        if !(self.critic_learning_rate > 0.0 && self.critic_learning_rate.is_finite()) {
            return bad("critic_learning_rate", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau", "must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.explore_decay_fraction) {
            return bad("explore_decay_fraction", "must lie in [0, 1]");
        }
        if self.explore_std_start < 0.0 || self.explore_std_end < 0.0 || self.target_noise_clip < 0.0 {
            return bad("explore_std_start", "noise scales must be non-negative");
        }
        self.env.validate()?;
        self.augmentation.validate().map_err(|e| Error::Config {
            key: "augmentation".into(),
            message: e.to_string(),
        })
    }

    pub fn explore_std(&self, step: u64) -> f64 {
        let horizon = self.explore_decay_fraction * self.total_env_steps as f64;
        let progress = if horizon > 0.0 { (step as f64 / horizon).min(1.0) } else { 1.0 };
        self.explore_std_start + (self.explore_std_end - self.explore_std_start) * progress
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: u64,
    pub returns: ReturnSample,
}

/// A training configuration and its learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRun {
    pub config: TrainConfig,
    pub curve: Vec<CurvePoint>,
    pub gradient_updates: u64,
    /// Scheduler ticks issued; equals `gradient_updates`.
    pub schedule_ticks: u64,
    pub clipped_actions: u64,
}

impl TrainRun {
    pub fn final_return(&self) -> Option<f64> {
        self.curve.last().map(|p| p.returns.mean())
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub run: TrainRun,
    pub policy: TinyPolicy,
}

/// Losses of one gradient update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f32,
    pub actor_loss: f32,
}

/// Mutable training state: online networks, target critic, hyperparameters.
#[derive(Debug, Clone)]
pub struct Learner {
    pub policy: TinyPolicy,
    pub target_critic: Mlp<f32>,
    pub tau: f32,
    pub target_noise_clip: f32,
}

/// A replay batch ready for the networks.
#[derive(Debug, Clone)]
pub struct FeatureBatch {
    pub obs: Array2<f32>,
    pub actions: Array2<f32>,
    pub rewards: Array1<f32>,
    pub discounts: Array1<f32>,
    pub next_obs: Array2<f32>,
}

impl Learner {
    pub fn new(policy: TinyPolicy, tau: f64, target_noise_clip: f64) -> Self {
        Self {
            target_critic: policy.critic.clone(),
            policy,
            tau: tau as f32,
            target_noise_clip: target_noise_clip as f32,
        }
    }

    /// TD targets from the target critic at noisy current-actor actions.
    pub fn td_targets(&self, batch: &FeatureBatch, noise_std: f64, g: &mut Rng) -> Array1<f32> {
        let latent = self.policy.encode(&batch.next_obs);
        let mut next_actions = self.policy.actor.predict(&latent);
        let clip = self.target_noise_clip;
        next_actions.mapv_inplace(|a| (a + ((noise_std * g.normal()) as f32).clamp(-clip, clip)).clamp(-1.0, 1.0));
        let next_q = self.target_critic.predict(&critic_input(&latent, &next_actions));
        &batch.rewards + &(&batch.discounts * &next_q.column(0))
    }

    /// One critic step (through the encoder), one actor step on the detached
    /// encoding, then a soft target update.
    pub fn update(&mut self, batch: &FeatureBatch, noise_std: f64, g: &mut Rng, step: u64) -> Result<UpdateStats> {
        let targets = self.td_targets(batch, noise_std, g);
        let p = &mut self.policy;
        let (critic_loss, encoder_grads, critic_grads, latent) =
            critic_loss_and_grads(&p.encoder, &p.critic, &batch.obs, &batch.actions, &targets);
        if !critic_loss.is_finite() || !encoder_grads.all_finite() || !critic_grads.all_finite() {
            return Err(Error::DivergedAtStep(step));
        }
        p.encoder_opt.step(&mut p.encoder, &encoder_grads);
        p.critic_opt.step(&mut p.critic, &critic_grads);
        let (actor_loss, actor_grads) = actor_loss_and_grads(&p.actor, &p.critic, &latent);
        if !actor_loss.is_finite() || !actor_grads.all_finite() {
            return Err(Error::DivergedAtStep(step));
        }
        p.actor_opt.step(&mut p.actor, &actor_grads);
        self.target_critic.soft_update(&p.critic, self.tau);
        Ok(UpdateStats {
            critic_loss,
            actor_loss,
        })
    }
}

fn frames_batch(frames: &[&[u8]]) -> ImageBatch {
    let mut data = Vec::with_capacity(frames.len() * FRAME_LEN);
    for f in frames {
        data.extend_from_slice(f);
    }
    ImageBatch::from_u8(frames.len(), FRAME_CHANNELS, FRAME_SIZE, FRAME_SIZE, data).expect("frame shape")
}

/// Stacks sampled transitions and applies `augmentation` to observation and
/// next-observation batches (sharing parameters per sample when `shared`).
pub fn prepare_batch(
    transitions: &[Transition<'_>],
    augmentation: &Augmentation,
    shared: bool,
    rng: &RngState,
) -> Result<FeatureBatch> {
    let obs = frames_batch(&transitions.iter().map(|t| t.obs).collect::<Vec<_>>());
    let next = frames_batch(&transitions.iter().map(|t| t.next_obs).collect::<Vec<_>>());
    let next_rng = if shared { *rng } else { rng.fork(1) };
    let (obs, next) = if augmentation.is_none() {
        (obs, next)
    } else {
        (augmentation.apply(&obs, rng)?, augmentation.apply(&next, &next_rng)?)
    };
    let n = transitions.len();
    Ok(FeatureBatch {
        obs: pool_features(&obs)?,
        actions: Array2::from_shape_fn((n, ACTION_DIM), |(i, j)| transitions[i].action[j]),
        rewards: transitions.iter().map(|t| t.reward).collect(),
        discounts: transitions.iter().map(|t| t.discount).collect(),
        next_obs: pool_features(&next)?,
    })
}

/// Greedy episodes run in lockstep. With a transform, the policy sees
/// augmented observations while the dynamics stay clean.
pub fn evaluate(
    policy: &TinyPolicy,
    env_config: &EnvConfig,
    n_episodes: usize,
    transform: Option<&Augmentation>,
    seed: u64,
) -> Result<ReturnSample> {
    if n_episodes == 0 {
        return Err(Error::InvalidValue("n_episodes must be positive".into()));
    }
    let episodes = RngState::new(seed, EVAL_ENV_STREAM);
    let mut envs: Vec<DotReacherEnv> = (0..n_episodes)
        .map(|k| DotReacherEnv::new(*env_config, episodes.fork(k as u64)))
        .collect();
    let mut frames: Vec<ImageBatch> = envs.iter_mut().map(DotReacherEnv::reset).collect();
    let mut returns = vec![0.0; n_episodes];
    let aug_stream = RngState::new(seed, EVAL_AUG_STREAM);
    let mut t = 0u64;
    while envs.iter().any(|e| !e.is_done()) {
        let stacked = ImageBatch::stack(&frames)?;
        let observed = match transform {
            Some(aug) if !aug.is_none() => aug.apply(&stacked, &aug_stream.fork(t))?,
            _ => stacked,
        };
        let actions = policy.act_frames(&observed)?;
        for (k, env) in envs.iter_mut().enumerate() {
            if env.is_done() {
                continue;
            }
            let step = env.step([f64::from(actions[[k, 0]]), f64::from(actions[[k, 1]])]);
            returns[k] += step.reward;
            frames[k] = step.frame;
        }
        t += 1;
    }
    ReturnSample::new(
        returns,
        ReturnContext {
            policy_id: String::new(),
            env_id: "dot_reacher".into(),
            transform: transform.map(Augmentation::label),
            seed,
        },
    )
}

/// Trains a fresh policy. Evaluations happen at step 0, every `eval_every`
/// environment steps, and at the end.
pub fn train(config: &TrainConfig) -> Result<Trained> {
    config.validate()?;
    let seed = config.seed;
    let mut init = RngState::new(seed, INIT_STREAM).generator();
    let policy = TinyPolicy::new(
        feature_dim(FRAME_CHANNELS, FRAME_SIZE, FRAME_SIZE),
        config.actor_learning_rate,
        config.critic_learning_rate,
        &mut init,
    );
    let mut learner = Learner::new(policy, config.tau, config.target_noise_clip);
    let mut augmentation = config.augmentation.clone();
    let mut env = DotReacherEnv::new(config.env, RngState::new(seed, ENV_STREAM));
    let mut explore = RngState::new(seed, EXPLORE_STREAM).generator();
    let updates_stream = RngState::new(seed, UPDATE_STREAM);
    let mut replay = ReplayBuffer::new(config.replay_capacity);

    let eval = |policy: &TinyPolicy, step: u64| -> Result<CurvePoint> {
        let mut returns = evaluate(policy, &config.env, config.eval_episodes, None, seed)?;
        returns.context.policy_id = format!("seed{seed}-step{step}");
        Ok(CurvePoint { step, returns })
    };

    let mut curve = Vec::new();
    let mut updates = 0u64;
    let mut ticks = 0u64;
    let mut frame = env.reset();
    let mut episode = Episode::new(frame.as_u8().expect("u8 frame"));
    for step in 0..config.total_env_steps {
        if step % config.eval_every == 0 {
            curve.push(eval(&learner.policy, step)?);
        }
        let action = if step < config.seed_steps {
            [explore.uniform_range(-1.0, 1.0), explore.uniform_range(-1.0, 1.0)]
        } else {
            let mean = learner.policy.act_frames(&frame)?;
            let std = config.explore_std(step);
            [0, 1].map(|j| (f64::from(mean[[0, j]]) + std * explore.normal()).clamp(-1.0, 1.0))
        };
        let result = env.step(action);
        frame = result.frame;
        episode.push(
            action.map(|a| a as f32),
            result.reward as f32,
            frame.as_u8().expect("u8 frame"),
            result.done && env.distance() <= super::env::TARGET_RADIUS && config.env.terminate_at_target,
        );
        if result.done {
            replay.push(std::mem::take(&mut episode));
            frame = env.reset();
            episode = Episode::new(frame.as_u8().expect("u8 frame"));
        }
        if step + 1 > config.seed_steps && (step + 1) % config.update_every == 0 && !replay.is_empty() {
            let rng = updates_stream.fork(updates);
            let mut g = rng.fork(0).generator();
            let transitions = replay.sample(config.batch_size, config.n_step, config.env.discount, &mut g);
            let batch = prepare_batch(&transitions, &augmentation, config.augment_next_obs, &rng.fork(1))?;
            let mut noise = rng.fork(2).generator();
            learner.update(&batch, config.explore_std(step), &mut noise, updates)?;
            updates += 1;
            augmentation.tick(1)?;
            ticks += 1;
        }
    }
    if curve.last().is_none_or(|p| p.step != config.total_env_steps) {
        curve.push(eval(&learner.policy, config.total_env_steps)?);
    }
    Ok(Trained {
        run: TrainRun {
            config: config.clone(),
            curve,
            gradient_updates: updates,
            schedule_ticks: ticks,
            clipped_actions: env.clipped_actions(),
        },
        policy: learner.policy,
    })
}

pub const CURVE_CSV_HEADER: &str = "step,seed,return_mean,return_iqm";

pub fn write_curve_csv<W: std::io::Write>(mut out: W, runs: &[&TrainRun]) -> std::io::Result<()> {
    writeln!(out, "{CURVE_CSV_HEADER}")?;
    for run in runs {
        for p in &run.curve {
            let r = &p.returns.episode_returns;
            writeln!(
                out,
                "{},{},{},{}",
                p.step,
                run.config.seed,
                p.returns.mean(),
                iqm(r).expect("non-empty")
            )?;
        }
    }
    Ok(())
}
