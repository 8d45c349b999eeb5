//! Episode-structured replay of raw frames with n-step returns.

use std::collections::VecDeque;

use super::env::{ACTION_DIM, FRAME_LEN};
use crate::rng::Rng;

/// One finished (or truncated) episode: `len + 1` frames, `len` transitions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Episode {
    frames: Vec<u8>,
    actions: Vec<[f32; ACTION_DIM]>,
    rewards: Vec<f32>,
    terminal: bool,
}

impl Episode {
    pub fn new(first_frame: &[u8]) -> Self {
        assert_eq!(first_frame.len(), FRAME_LEN, "frame size");
        Self {
            frames: first_frame.to_vec(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, action: [f32; ACTION_DIM], reward: f32, next_frame: &[u8], terminal: bool) {
        assert_eq!(next_frame.len(), FRAME_LEN, "frame size");
        self.frames.extend_from_slice(next_frame);
        self.actions.push(action);
        self.rewards.push(reward);
        self.terminal = terminal;
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn frame(&self, t: usize) -> &[u8] {
        &self.frames[t * FRAME_LEN..(t + 1) * FRAME_LEN]
    }
}

/// A sampled transition with its n-step return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition<'a> {
    pub obs: &'a [u8],
    pub action: [f32; ACTION_DIM],
    /// Discounted reward sum over the steps actually taken.
    pub reward: f32,
    /// Bootstrap weight: `γ^k` after `k` steps, zero past a terminal state.
    pub discount: f32,
    pub next_obs: &'a [u8],
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    episodes: VecDeque<Episode>,
    /// Transition count before each stored episode.
    starts: Vec<usize>,
    total: usize,
}

impl ReplayBuffer {
    /// Keeps at least `capacity` of the most recent transitions, dropping
    /// whole episodes from the front.
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            episodes: VecDeque::new(),
            starts: Vec::new(),
            total: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn episodes(&self) -> impl Iterator<Item = &Episode> {
        self.episodes.iter()
    }

    pub fn push(&mut self, episode: Episode) {
        if episode.is_empty() {
            return;
        }
        self.total += episode.len();
        self.episodes.push_back(episode);
        while self.total - self.episodes[0].len() >= self.capacity {
            let old = self.episodes.pop_front().expect("non-empty");
            self.total -= old.len();
        }
        self.starts.clear();
        let mut acc = 0;
        for e in &self.episodes {
            self.starts.push(acc);
            acc += e.len();
        }
    }

    pub fn transition(&self, index: usize, n_step: usize, gamma: f64) -> Transition<'_> {
        let e = self.starts.partition_point(|&s| s <= index) - 1;
        let ep = &self.episodes[e];
        let t = index - self.starts[e];
        let steps = n_step.min(ep.len() - t);
        let mut reward = 0.0;
        let mut weight = 1.0;
        for k in 0..steps {
            reward += weight * f64::from(ep.rewards[t + k]);
            weight *= gamma;
        }
        let ends = ep.terminal && t + steps == ep.len();
        Transition {
            obs: ep.frame(t),
            action: ep.actions[t],
            reward: reward as f32,
            discount: if ends { 0.0 } else { weight as f32 },
            next_obs: ep.frame(t + steps),
        }
    }

    /// Uniform over stored transitions, with replacement.
    pub fn sample(&self, batch_size: usize, n_step: usize, gamma: f64, g: &mut Rng) -> Vec<Transition<'_>> {
        assert!(!self.is_empty(), "sampling from an empty replay buffer");
        (0..batch_size)
            .map(|_| self.transition(g.below(self.total as u64) as usize, n_step, gamma))
            .collect()
    }
}
