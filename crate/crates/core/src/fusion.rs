//! Multi-operator schedules: composing, sampling, mixing, and cycling.

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Rng, RngState};
use crate::tensor::{u8_to_unit, unit_to_u8, Dtype, ImageBatch};
use crate::transforms::{Frame, Granularity, TransformSpec};

/// Default cycling interval, in scheduler steps.
pub const DEFAULT_CYCLE_INTERVAL: u64 = 100_000;

const ORDER_KEY: u64 = 0x4F52_4445_5200_0001;
const SELECT_KEY: u64 = 0x5345_4C45_4354_0002;
const WEIGHT_KEY: u64 = 0x5745_4947_4854_0003;
const COUNTER_LIMIT: u64 = i64::MAX as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Compose,
    Sample,
    Mix,
    Cycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderMode {
    #[default]
    Fixed,
    Shuffled,
}

fn default_mix_width() -> u32 {
    2
}
fn default_alpha() -> f64 {
    1.0
}
fn default_interval() -> u64 {
    DEFAULT_CYCLE_INTERVAL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionSchedule {
    pub scheme: Scheme,
    pub ops: Vec<TransformSpec>,
    #[serde(default)]
    pub order_mode: OrderMode,
    #[serde(default = "default_mix_width")]
    pub mix_width: u32,
    #[serde(default = "default_alpha")]
    pub dirichlet_alpha: f64,
    #[serde(default = "default_interval")]
    pub interval: u64,
    #[serde(default)]
    pub step_counter: u64,
}

impl FusionSchedule {
    pub fn new(scheme: Scheme, ops: Vec<TransformSpec>) -> Self {
        Self {
            scheme,
            ops,
            order_mode: OrderMode::Fixed,
            mix_width: default_mix_width(),
            dirichlet_alpha: default_alpha(),
            interval: DEFAULT_CYCLE_INTERVAL,
            step_counter: 0,
        }
    }

    pub fn compose(ops: Vec<TransformSpec>, order_mode: OrderMode) -> Self {
        Self {
            order_mode,
            ..Self::new(Scheme::Compose, ops)
        }
    }

    pub fn sample(ops: Vec<TransformSpec>) -> Self {
        Self::new(Scheme::Sample, ops)
    }

    pub fn mix(ops: Vec<TransformSpec>, mix_width: u32, dirichlet_alpha: f64) -> Self {
        Self {
            mix_width,
            dirichlet_alpha,
            ..Self::new(Scheme::Mix, ops)
        }
    }

    pub fn cycle(ops: Vec<TransformSpec>, interval: u64) -> Self {
        Self {
            interval,
            ..Self::new(Scheme::Cycle, ops)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ops.is_empty() {
            return Err(Error::InvalidSchedule("schedule has no operators".into()));
        }
        if self.interval == 0 {
            return Err(Error::InvalidSchedule("cycling interval must be positive".into()));
        }
        if self.mix_width == 0 {
            return Err(Error::InvalidSchedule("mix width must be at least 1".into()));
        }
        if !(self.dirichlet_alpha > 0.0 && self.dirichlet_alpha.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "dirichlet alpha must be positive, got {}",
                self.dirichlet_alpha
            )));
        }
        if self.step_counter > COUNTER_LIMIT {
            return Err(Error::CounterOverflow);
        }
        self.ops.iter().try_for_each(TransformSpec::validate)
    }

    /// Index of the operator a cycle schedule applies at `step`.
    pub fn active_index_at(&self, step: u64) -> usize {
        ((step / self.interval) % self.ops.len() as u64) as usize
    }

    pub fn active_index(&self) -> usize {
        self.active_index_at(self.step_counter)
    }

    /// Number of distinct operator kinds the schedule can emit.
    pub fn type_diversity(&self) -> usize {
        self.ops.len()
    }

    /// Advances the step counter. Only cycle schedules read it.
    pub fn tick(&mut self, n_steps: u64) -> Result<()> {
        if n_steps == 0 {
            return Err(Error::InvalidSchedule("tick needs at least one step".into()));
        }
        let next = self
            .step_counter
            .checked_add(n_steps)
            .filter(|&s| s <= COUNTER_LIMIT)
            .ok_or(Error::CounterOverflow)?;
        self.step_counter = next;
        Ok(())
    }

    pub fn apply(&self, batch: &ImageBatch, rng: &RngState) -> Result<ImageBatch> {
        self.validate()?;
        match self.scheme {
            Scheme::Cycle => self.ops[self.active_index()].apply(batch, rng),
            Scheme::Compose => {
                let mut order: Vec<usize> = (0..self.ops.len()).collect();
                if self.order_mode == OrderMode::Shuffled {
                    rng.fork(ORDER_KEY).generator().shuffle(&mut order);
                }
                let mut current = batch.clone();
                for (j, &idx) in order.iter().enumerate() {
                    current = self.ops[idx].apply(&current, &rng.offset(j as u64))?;
                }
                Ok(current)
            }
            Scheme::Sample => {
                self.prepare(batch)?;
                let select = rng.fork(SELECT_KEY);
                let images = (0..batch.n())
                    .map(|i| {
                        let op = &self.ops[pick(&mut select.fork(i as u64).generator(), self.ops.len())];
                        let frame = Frame::from_batch(batch, i);
                        Ok(op.apply_frame(&frame, batch.dtype(), &mut image_stream(op, rng, i))?.data)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ImageBatch::from_unit_images(batch.c(), batch.h(), batch.w(), batch.dtype(), images))
            }
            Scheme::Mix => {
                self.prepare(batch)?;
                let dtype = batch.dtype();
                let k = self.mix_width as usize;
                let images = (0..batch.n())
                    .map(|i| {
                        let frame = Frame::from_batch(batch, i);
                        let mut select = rng.fork(SELECT_KEY).fork(i as u64).generator();
                        let weights = rng
                            .fork(WEIGHT_KEY)
                            .fork(i as u64)
                            .generator()
                            .dirichlet(k, self.dirichlet_alpha);
                        let copies = (0..k)
                            .map(|j| {
                                let op = &self.ops[pick(&mut select, self.ops.len())];
                                let mut g = image_stream(op, &rng.offset(j as u64), i);
                                let mut out = op.apply_frame(&frame, dtype, &mut g)?.data;
                                out.iter_mut().for_each(|v| *v = settle(dtype, *v));
                                Ok(out)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok(convex_combination(&copies, &weights))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ImageBatch::from_unit_images(batch.c(), batch.h(), batch.w(), dtype, images))
            }
        }
    }

    fn prepare(&self, batch: &ImageBatch) -> Result<()> {
        for op in &self.ops {
            op.check_size(batch.h(), batch.w())?;
            if matches!(op.diversity, crate::transforms::Diversity::Finite(_)) && !op.is_presampled() {
                return Err(Error::NotPresampled);
            }
        }
        Ok(())
    }
}

fn pick(g: &mut Rng, len: usize) -> usize {
    g.below(len as u64) as usize
}

/// The stream an operator would use for image `i` when applied on its own.
fn image_stream(op: &TransformSpec, rng: &RngState, i: usize) -> Rng {
    let key = match op.granularity {
        Granularity::PerImage => i as u64,
        Granularity::PerBatch => 0,
    };
    rng.fork(key).generator()
}

/// Value as it would be stored in a batch of `dtype`.
fn settle(dtype: Dtype, v: f32) -> f32 {
    match dtype {
        Dtype::U8 => u8_to_unit(unit_to_u8(v)),
        Dtype::F32 => v.clamp(0.0, 1.0),
    }
}

/// Per-pixel weighted sum, clamped to the copies' pixelwise range.
fn convex_combination(copies: &[Vec<f32>], weights: &[f64]) -> Vec<f32> {
    let len = copies[0].len();
    (0..len)
        .map(|p| {
            let mut acc = 0.0f64;
            let mut lo = f32::INFINITY;
            let mut hi = f32::NEG_INFINITY;
            for (copy, &w) in copies.iter().zip(weights) {
                let v = copy[p];
                acc += w * f64::from(v);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (acc as f32).clamp(lo, hi)
        })
        .collect()
}

/// Cycle over `[pad_crop(4), rand_pad_resize(0, 16)]`.
pub fn default_cycaug(interval: u64) -> FusionSchedule {
    FusionSchedule::cycle(
        vec![TransformSpec::pad_crop(4), TransformSpec::rand_pad_resize(0, 16)],
        interval,
    )
}

/// What a training loop or CLI command applies to observation batches.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Augmentation {
    #[default]
    None,
    Op(TransformSpec),
    Schedule(FusionSchedule),
}

impl Augmentation {
    pub fn apply(&self, batch: &ImageBatch, rng: &RngState) -> Result<ImageBatch> {
        match self {
            Augmentation::None => Ok(batch.clone()),
            Augmentation::Op(spec) => spec.apply(batch, rng),
            Augmentation::Schedule(s) => s.apply(batch, rng),
        }
    }

    /// Advances schedules; no-op otherwise.
    pub fn tick(&mut self, n_steps: u64) -> Result<()> {
        match self {
            Augmentation::Schedule(s) => s.tick(n_steps),
            _ => Ok(()),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Augmentation::None)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Augmentation::None => Ok(()),
            Augmentation::Op(spec) => spec.validate(),
            Augmentation::Schedule(s) => s.validate(),
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            Augmentation::None => "none".into(),
            Augmentation::Op(spec) => spec.op.name().into(),
            Augmentation::Schedule(s) => {
                let names: Vec<&str> = s.ops.iter().map(|o| o.op.name()).collect();
                format!("{:?}({})", s.scheme, names.join("+")).to_lowercase()
            }
        }
    }
}

impl Serialize for Augmentation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Augmentation::None => s.serialize_str("none"),
            Augmentation::Op(spec) => spec.serialize(s),
            Augmentation::Schedule(sched) => sched.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Augmentation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        match &value {
            serde_json::Value::String(s) if s == "none" => Ok(Augmentation::None),
            serde_json::Value::Object(map) if map.contains_key("scheme") => serde_json::from_value(value)
                .map(Augmentation::Schedule)
                .map_err(de::Error::custom),
            serde_json::Value::Object(map) if map.contains_key("op") => serde_json::from_value(value)
                .map(Augmentation::Op)
                .map_err(de::Error::custom),
            _ => Err(de::Error::custom(
                "augmentation must be \"none\", an operator table with `op`, or a schedule table with `scheme`",
            )),
        }
    }
}
