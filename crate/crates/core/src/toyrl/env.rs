//! DotReacher: move a red dot onto a green dot from 84×84 pixels.

use serde::{Deserialize, Serialize};

use crate::rng::RngState;
use crate::tensor::ImageBatch;

pub const FRAME_SIZE: usize = 84;
pub const FRAME_CHANNELS: usize = 3;
pub const FRAME_LEN: usize = FRAME_CHANNELS * FRAME_SIZE * FRAME_SIZE;
/// Position change per unit action.
pub const STEP_SIZE: f64 = 0.05;
/// Distance within which the agent counts as on target.
pub const TARGET_RADIUS: f64 = 0.05;
pub const ACTION_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub max_steps: u32,
    pub discount: f64,
    /// Constant added to every per-step reward.
    pub reward_offset: f64,
    /// End the episode (with the bonus) when the agent reaches the target.
    /// When false, the bonus is paid on every step spent on target.
    pub terminate_at_target: bool,
    /// Disk radius in pixels.
    pub dot_radius: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            max_steps: 50,
            discount: 0.9,
            reward_offset: 0.0,
            terminate_at_target: true,
            dot_radius: 12.0,
        }
    }
}

impl EnvConfig {
    /// Non-negative rewards and no early termination, so that return ratios
    /// are meaningful.
    pub fn shaped() -> Self {
        Self {
            reward_offset: std::f64::consts::SQRT_2,
            terminate_at_target: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |key: &str, message: &str| {
            Err(crate::Error::Config {
                key: format!("env.{key}"),
                message: message.into(),
            })
        };
        if self.max_steps == 0 {
            return bad("max_steps", "must be positive");
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad("discount", "must lie in (0, 1]");
        }
        if !self.reward_offset.is_finite() {
            return bad("reward_offset", "must be finite");
        }
        if !(self.dot_radius >= 1.0 && self.dot_radius < FRAME_SIZE as f64 / 4.0) {
            return bad("dot_radius", "must lie in [1, 21)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub frame: ImageBatch,
    pub reward: f64,
    pub done: bool,
    /// The action had a component outside `[-1, 1]` and was clipped.
    pub clipped: bool,
}

#[derive(Debug, Clone)]
pub struct DotReacherEnv {
    config: EnvConfig,
    episodes: RngState,
    episode: u64,
    agent: [f64; 2],
    target: [f64; 2],
    t: u32,
    done: bool,
    clipped_actions: u64,
}

impl DotReacherEnv {
    /// Episode `k` starts from positions drawn from `seed.fork(k)`.
    pub fn new(config: EnvConfig, seed: RngState) -> Self {
        Self {
            config,
            episodes: seed,
            episode: 0,
            agent: [0.5; 2],
            target: [0.5; 2],
            t: 0,
            done: true,
            clipped_actions: 0,
        }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn agent(&self) -> [f64; 2] {
        self.agent
    }

    pub fn target(&self) -> [f64; 2] {
        self.target
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Total number of clipped actions seen so far.
    pub fn clipped_actions(&self) -> u64 {
        self.clipped_actions
    }

    pub fn distance(&self) -> f64 {
        (self.agent[0] - self.target[0]).hypot(self.agent[1] - self.target[1])
    }

    pub fn reset(&mut self) -> ImageBatch {
        let mut g = self.episodes.fork(self.episode).generator();
        self.episode += 1;
        let agent = [g.uniform(), g.uniform()];
        let target = [g.uniform(), g.uniform()];
        self.reset_to(agent, target)
    }

    /// Starts an episode from explicit positions (clamped to the unit square).
    pub fn reset_to(&mut self, agent: [f64; 2], target: [f64; 2]) -> ImageBatch {
        self.agent = agent.map(|v| v.clamp(0.0, 1.0));
        self.target = target.map(|v| v.clamp(0.0, 1.0));
        self.t = 0;
        self.done = false;
        self.render()
    }

    pub fn step(&mut self, action: [f64; 2]) -> StepResult {
        assert!(!self.done, "step called on a finished episode");
        let clipped = action.iter().any(|a| !(-1.0..=1.0).contains(a));
        if clipped {
            self.clipped_actions += 1;
        }
        for (p, a) in self.agent.iter_mut().zip(action) {
            let a = if a.is_nan() { 0.0 } else { a.clamp(-1.0, 1.0) };
            *p = (*p + a * STEP_SIZE).clamp(0.0, 1.0);
        }
        self.t += 1;
        let d = self.distance();
        let on_target = d <= TARGET_RADIUS;
        let mut reward = self.config.reward_offset - d;
        if on_target {
            reward += 1.0;
        }
        self.done = (on_target && self.config.terminate_at_target) || self.t >= self.config.max_steps;
        StepResult {
            frame: self.render(),
            reward,
            done: self.done,
            clipped,
        }
    }

    pub fn render(&self) -> ImageBatch {
        let mut data = vec![0u8; FRAME_LEN];
        let plane = FRAME_SIZE * FRAME_SIZE;
        self.draw_disk(&mut data[..plane], self.agent);
        self.draw_disk(&mut data[plane..2 * plane], self.target);
        ImageBatch::from_u8(1, FRAME_CHANNELS, FRAME_SIZE, FRAME_SIZE, data).expect("frame shape")
    }

    fn draw_disk(&self, plane: &mut [u8], pos: [f64; 2]) {
        let r = self.config.dot_radius;
        let span = FRAME_SIZE as f64 - 2.0 * r;
        let (cx, cy) = (r + pos[0] * span, r + pos[1] * span);
        for y in 0..FRAME_SIZE {
            let dy = y as f64 + 0.5 - cy;
            for x in 0..FRAME_SIZE {
                let dx = x as f64 + 0.5 - cx;
                if dx * dx + dy * dy <= r * r {
                    plane[y * FRAME_SIZE + x] = 255;
                }
            }
        }
    }
}
