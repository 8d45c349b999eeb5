//! Individual augmentation operators.
//!
//! Every operator maps `(n, c, h, w) → (n, c, h, w)`, works on the
//! normalized f32 scale internally, and returns the input dtype (u8 via
//! round-half-up). Parameters are drawn per image from `rng.fork(i)`, so a
//! batch result equals restacking the per-image results.

mod ops;
mod resample;

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Rng, RngState};
use crate::tensor::{u8_to_unit, unit_to_u8, Dtype, ImageBatch};

pub use ops::{
    all_compositions, all_crop_shifts, composition_count, crop_shift_count, crop_shift_with, cutout_with,
    pad_crop_with, pad_resize_with, pad_with, rotate_with, sample_composition, sample_crop_shift,
    translate_with, CropShiftParams, Direction, PadQuadruple,
};
pub use resample::{bilinear_resize, resize_frame};

/// One image on the normalized `[0, 1]` scale, `(c, h, w)` planar.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub data: Vec<f32>,
}

impl Frame {
    pub fn plane(&self, ch: usize) -> &[f32] {
        &self.data[ch * self.h * self.w..(ch + 1) * self.h * self.w]
    }

    pub fn from_batch(batch: &ImageBatch, i: usize) -> Frame {
        Frame {
            c: batch.c(),
            h: batch.h(),
            w: batch.w(),
            data: batch.image_unit(i),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    PadCrop,
    RandPadResize,
    PadResizeHd,
    CropShiftHd,
    TranslateHd,
    Rotate,
    Cutout,
}

impl TransformKind {
    pub const ALL: [TransformKind; 7] = [
        TransformKind::PadCrop,
        TransformKind::RandPadResize,
        TransformKind::PadResizeHd,
        TransformKind::CropShiftHd,
        TransformKind::TranslateHd,
        TransformKind::Rotate,
        TransformKind::Cutout,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::PadCrop => "pad_crop",
            TransformKind::RandPadResize => "rand_pad_resize",
            TransformKind::PadResizeHd => "pad_resize_hd",
            TransformKind::CropShiftHd => "crop_shift_hd",
            TransformKind::TranslateHd => "translate_hd",
            TransformKind::Rotate => "rotate",
            TransformKind::Cutout => "cutout",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Operators whose spatial diversity can be capped by pre-sampling.
    pub fn supports_presampling(self) -> bool {
        matches!(
            self,
            TransformKind::PadResizeHd | TransformKind::CropShiftHd | TransformKind::TranslateHd
        )
    }

    pub fn default_padding(self) -> PaddingMode {
        match self {
            TransformKind::PadCrop => PaddingMode::Replicate,
            _ => PaddingMode::Zero,
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaddingMode {
    Replicate,
    Zero,
}

/// Whether parameters are drawn once per image or once per batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    #[default]
    PerImage,
    PerBatch,
}

/// Spatial diversity: a finite number of pre-sampled parameter sets, or
/// fresh parameters on every application.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Diversity {
    Finite(u32),
    #[default]
    Unlimited,
}

impl Serialize for Diversity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Diversity::Finite(d) => s.serialize_u32(*d),
            Diversity::Unlimited => s.serialize_str("unlimited"),
        }
    }
}

impl<'de> Deserialize<'de> for Diversity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u32),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(0) => Err(de::Error::custom("spatial diversity must be positive")),
            Raw::Count(n) => Ok(Diversity::Finite(n)),
            Raw::Word(w) if w == "unlimited" => Ok(Diversity::Unlimited),
            Raw::Word(w) => Err(de::Error::custom(format!(
                "expected a positive integer or \"unlimited\", got {w:?}"
            ))),
        }
    }
}

impl fmt::Display for Diversity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diversity::Finite(d) => write!(f, "{d}"),
            Diversity::Unlimited => f.write_str("unlimited"),
        }
    }
}

/// One pre-sampled parameter tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamSet {
    Pad(PadQuadruple),
    CropShift(CropShiftParams),
    Translate(Direction),
}

/// An operator with its strength range and diversity controls.
///
/// Strength is in pixels (padded, removed, shifted, or cutout side length)
/// except for `Rotate`, where it is the maximum angle in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct TransformSpec {
    pub op: TransformKind,
    pub strength_min: u32,
    pub strength_max: u32,
    pub diversity: Diversity,
    pub padding_mode: PaddingMode,
    pub granularity: Granularity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param_sets: Option<Vec<ParamSet>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    op: TransformKind,
    strength: Option<u32>,
    strength_min: Option<u32>,
    strength_max: Option<u32>,
    #[serde(default)]
    diversity: Diversity,
    padding_mode: Option<PaddingMode>,
    #[serde(default)]
    granularity: Granularity,
    param_sets: Option<Vec<ParamSet>>,
}

impl TryFrom<RawSpec> for TransformSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let (lo, hi) = match (raw.strength, raw.strength_min, raw.strength_max) {
            (Some(s), None, None) => (s, s),
            (None, Some(lo), Some(hi)) => (lo, hi),
            (None, None, Some(hi)) => (0, hi),
            (None, None, None) => (0, 0),
            _ => {
                return Err(Error::Config {
                    key: "strength".into(),
                    message: "give either `strength` or `strength_min`/`strength_max`".into(),
                })
            }
        };
        let spec = TransformSpec {
            op: raw.op,
            strength_min: lo,
            strength_max: hi,
            diversity: raw.diversity,
            padding_mode: raw.padding_mode.unwrap_or(raw.op.default_padding()),
            granularity: raw.granularity,
            param_sets: raw.param_sets,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl TransformSpec {
    pub fn new(op: TransformKind, strength_min: u32, strength_max: u32) -> Self {
        Self {
            op,
            strength_min,
            strength_max,
            diversity: Diversity::Unlimited,
            padding_mode: op.default_padding(),
            granularity: Granularity::PerImage,
            param_sets: None,
        }
    }

    pub fn pad_crop(pad: u32) -> Self {
        Self::new(TransformKind::PadCrop, pad, pad)
    }

    pub fn rand_pad_resize(strength_min: u32, strength_max: u32) -> Self {
        Self::new(TransformKind::RandPadResize, strength_min, strength_max)
    }

    pub fn pad_resize_hd(strength: u32, diversity: Diversity) -> Self {
        Self::new(TransformKind::PadResizeHd, strength, strength).with_diversity(diversity)
    }

    pub fn crop_shift_hd(strength: u32, diversity: Diversity) -> Self {
        Self::new(TransformKind::CropShiftHd, strength, strength).with_diversity(diversity)
    }

    pub fn translate_hd(strength: u32, diversity: Diversity) -> Self {
        Self::new(TransformKind::TranslateHd, strength, strength).with_diversity(diversity)
    }

    pub fn rotate(max_degrees: u32) -> Self {
        Self::new(TransformKind::Rotate, 0, max_degrees)
    }

    pub fn cutout(size: u32) -> Self {
        Self::new(TransformKind::Cutout, size, size)
    }

    pub fn with_diversity(mut self, diversity: Diversity) -> Self {
        self.diversity = diversity;
        self
    }

    pub fn with_padding(mut self, mode: PaddingMode) -> Self {
        self.padding_mode = mode;
        self
    }

    pub fn with_granularity(mut self, granularity: Granularity) -> Self {
        self.granularity = granularity;
        self
    }

    /// Checks the size-independent invariants.
    pub fn validate(&self) -> Result<()> {
        if self.strength_min > self.strength_max {
            return Err(Error::InvalidStrength(format!(
                "strength_min {} > strength_max {}",
                self.strength_min, self.strength_max
            )));
        }
        if self.op == TransformKind::Rotate && self.strength_max > 180 {
            return Err(Error::InvalidStrength(format!(
                "rotation limit {} exceeds 180 degrees",
                self.strength_max
            )));
        }
        if let Diversity::Finite(d) = self.diversity {
            if d == 0 {
                return Err(Error::InvalidValue("spatial diversity must be positive".into()));
            }
            if !self.op.supports_presampling() {
                return Err(Error::NotApplicable(format!("{} has no finite spatial diversity mode", self.op)));
            }
            if self.op == TransformKind::TranslateHd && d > 8 {
                return Err(Error::DiversityTooLarge {
                    requested: d.into(),
                    available: 8,
                });
            }
            if let Some(sets) = &self.param_sets {
                if sets.len() != d as usize {
                    return Err(Error::InvalidValue(format!(
                        "{} parameter sets stored for diversity {d}",
                        sets.len()
                    )));
                }
                for p in sets {
                    self.check_param_set(p)?;
                }
            }
        } else if self.param_sets.is_some() {
            return Err(Error::InvalidValue("parameter sets given with unlimited diversity".into()));
        }
        Ok(())
    }

    fn check_param_set(&self, p: &ParamSet) -> Result<()> {
        let s = self.strength_max;
        let ok = match (self.op, p) {
            (TransformKind::PadResizeHd, ParamSet::Pad(q)) => q.total() == s,
            (TransformKind::CropShiftHd, ParamSet::CropShift(c)) => {
                c.crop.total() == s && c.dy <= c.crop.vertical() && c.dx <= c.crop.horizontal()
            }
            (TransformKind::TranslateHd, ParamSet::Translate(_)) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidValue(format!("parameter set {p:?} is not valid for {} at strength {s}", self.op)))
        }
    }

    /// Distinct parameter tuples available at this spec's (fixed) strength.
    pub fn distinct_param_sets(&self) -> Option<u64> {
        let s = self.strength_max;
        match self.op {
            TransformKind::PadResizeHd => Some(composition_count(s)),
            TransformKind::CropShiftHd => Some(crop_shift_count(s)),
            TransformKind::TranslateHd => Some(8),
            _ => None,
        }
    }

    pub fn is_presampled(&self) -> bool {
        self.param_sets.is_some()
    }

    /// Checks that the spec can be applied to `h × w` images.
    pub fn check_size(&self, h: usize, w: usize) -> Result<()> {
        let s = self.strength_max as usize;
        let side = h.min(w);
        let bad = |msg: String| Err(Error::InvalidStrength(msg));
        match self.op {
            TransformKind::PadCrop if s >= side => bad(format!("pad {s} must be below min(h,w) = {side}")),
            TransformKind::TranslateHd if s >= side => bad(format!("shift {s} must be below min(h,w) = {side}")),
            TransformKind::Cutout if s > side => bad(format!("cutout side {s} exceeds min(h,w) = {side}")),
            TransformKind::CropShiftHd if s + 2 > h + w => {
                bad(format!("crop strength {s} leaves no region in a {h}x{w} image"))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, batch: &ImageBatch, rng: &RngState) -> Result<ImageBatch> {
        self.validate()?;
        self.check_size(batch.h(), batch.w())?;
        if matches!(self.diversity, Diversity::Finite(_)) && self.param_sets.is_none() {
            return Err(Error::NotPresampled);
        }
        if let (
            Some(src),
            TransformKind::PadCrop | TransformKind::RandPadResize | TransformKind::PadResizeHd | TransformKind::TranslateHd,
        ) =
            (batch.as_u8(), self.op)
        {
            return self.apply_u8(batch, src, rng);
        }
        let dtype = batch.dtype();
        map_images(batch, rng, self.granularity, |frame, g| self.apply_frame(frame, dtype, g))
    }

    fn apply_u8(&self, batch: &ImageBatch, src: &[u8], rng: &RngState) -> Result<ImageBatch> {
        let (n, c, h, w) = batch.shape();
        let len = c * h * w;
        let mut data = Vec::with_capacity(n * len);
        for (i, image) in src.chunks_exact(len).enumerate() {
            let key = match self.granularity {
                Granularity::PerImage => i as u64,
                Granularity::PerBatch => 0,
            };
            let mut g = rng.fork(key).generator();
            let drawn = self.draw(h, w, &mut g)?;
            match render_u8(image, c, h, w, drawn, self.padding_mode) {
                Some(out) => data.extend_from_slice(&out),
                None => {
                    let frame = Frame::from_batch(batch, i);
                    let out = render(&frame, Dtype::U8, drawn, self.padding_mode)?;
                    data.extend(out.data.iter().map(|&v| unit_to_u8(v)));
                }
            }
        }
        ImageBatch::from_u8(n, c, h, w, data)
    }

    /// Applies the operator to one image, drawing parameters from `g`.
    pub fn apply_frame(&self, frame: &Frame, dtype: Dtype, g: &mut Rng) -> Result<Frame> {
        let drawn = self.draw(frame.h, frame.w, g)?;
        render(frame, dtype, drawn, self.padding_mode)
    }

    /// Draws the parameters of one application to an `h × w` image.
    fn draw(&self, h: usize, w: usize, g: &mut Rng) -> Result<Drawn> {
        let (lo, hi) = (self.strength_min, self.strength_max);
        let draw_strength = |g: &mut Rng| g.range_inclusive(lo, hi);
        Ok(match self.op {
            TransformKind::PadCrop => {
                let pad = draw_strength(g);
                let oy = g.range_inclusive(0, 2 * pad);
                let ox = g.range_inclusive(0, 2 * pad);
                Drawn::PadCrop { pad, oy, ox }
            }
            TransformKind::RandPadResize => {
                let s = draw_strength(g);
                Drawn::PadResize(sample_composition(g, s))
            }
            TransformKind::PadResizeHd => Drawn::PadResize(match self.pick_param_set(g)? {
                Some(ParamSet::Pad(q)) => q,
                Some(other) => return Err(Error::InvalidValue(format!("{other:?} in pad_resize_hd"))),
                None => {
                    let s = draw_strength(g);
                    sample_composition(g, s)
                }
            }),
            TransformKind::CropShiftHd => Drawn::CropShift(match self.pick_param_set(g)? {
                Some(ParamSet::CropShift(p)) => p,
                Some(other) => return Err(Error::InvalidValue(format!("{other:?} in crop_shift_hd"))),
                None => {
                    let s = draw_strength(g);
                    let v_lo = s.saturating_sub(w as u32 - 1);
                    let v_hi = s.min(h as u32 - 1);
                    if v_lo > v_hi {
                        return Err(Error::InvalidStrength(format!(
                            "crop strength {s} leaves no region in a {h}x{w} image"
                        )));
                    }
                    sample_crop_shift(g, s, v_lo, v_hi)
                }
            }),
            TransformKind::TranslateHd => match self.pick_param_set(g)? {
                Some(ParamSet::Translate(d)) => Drawn::Translate(d, hi),
                Some(other) => return Err(Error::InvalidValue(format!("{other:?} in translate_hd"))),
                None => {
                    let s = draw_strength(g);
                    Drawn::Translate(Direction::ALL[g.below(8) as usize], s)
                }
            },
            TransformKind::Rotate => {
                let magnitude = f64::from(lo) + g.uniform() * f64::from(hi - lo);
                Drawn::Rotate(if g.coin() { magnitude } else { -magnitude })
            }
            TransformKind::Cutout => {
                let size = draw_strength(g);
                let y = g.range_inclusive(0, h as u32 - size);
                let x = g.range_inclusive(0, w as u32 - size);
                Drawn::Cutout { size, y, x }
            }
        })
    }

    fn pick_param_set(&self, g: &mut Rng) -> Result<Option<ParamSet>> {
        match (&self.diversity, &self.param_sets) {
            (Diversity::Unlimited, _) => Ok(None),
            (Diversity::Finite(_), None) => Err(Error::NotPresampled),
            (Diversity::Finite(_), Some(sets)) => Ok(Some(sets[g.below(sets.len() as u64) as usize])),
        }
    }
}

/// Parameters of one application, drawn before any pixel is read.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Drawn {
    PadCrop { pad: u32, oy: u32, ox: u32 },
    PadResize(PadQuadruple),
    CropShift(CropShiftParams),
    Translate(Direction, u32),
    Rotate(f64),
    Cutout { size: u32, y: u32, x: u32 },
}

fn render(frame: &Frame, dtype: Dtype, drawn: Drawn, mode: PaddingMode) -> Result<Frame> {
    Ok(match drawn {
        Drawn::PadCrop { pad, oy, ox } => pad_crop_with(frame, pad, oy, ox, mode),
        Drawn::PadResize(quad) => pad_resize_with(frame, quad, mode),
        Drawn::CropShift(p) => crop_shift_with(frame, p)?,
        Drawn::Translate(dir, s) => translate_with(frame, dir, s),
        Drawn::Rotate(angle) => rotate_with(frame, angle),
        Drawn::Cutout { size, y, x } => cutout_with(frame, size, y, x, dtype.midpoint()),
    })
}

/// Byte-level kernels for `u8` images, equal to the unit-scale path followed
/// by quantization. `None` when the parameters need the general path.
fn render_u8(src: &[u8], c: usize, h: usize, w: usize, drawn: Drawn, mode: PaddingMode) -> Option<Vec<u8>> {
    let plane = h * w;
    match drawn {
        Drawn::PadCrop { pad, oy, ox } => {
            let mut out = vec![0u8; c * plane];
            for (s, d) in src.chunks_exact(plane).zip(out.chunks_exact_mut(plane)) {
                ops::pad_crop_plane(s, d, h, w, pad, oy, ox, mode);
            }
            Some(out)
        }
        Drawn::PadResize(quad) => {
            if quad.total() == 0 {
                return Some(src.to_vec());
            }
            let lut: [f64; 256] = std::array::from_fn(|v| f64::from(u8_to_unit(v as u8)));
            let mut plan = ops::PadResizePlan::new(h, w, quad, mode);
            let mut out = vec![0u8; c * plane];
            for (s, d) in src.chunks_exact(plane).zip(out.chunks_exact_mut(plane)) {
                plan.run(s, |v| lut[usize::from(v)], d, |v| unit_to_u8(v as f32));
            }
            Some(out)
        }
        Drawn::Translate(dir, s) => {
            let mut out = vec![0u8; c * plane];
            for (s_plane, d) in src.chunks_exact(plane).zip(out.chunks_exact_mut(plane)) {
                ops::translate_plane(s_plane, d, h, w, dir.offsets(s));
            }
            Some(out)
        }
        _ => None,
    }
}

/// Runs `f` on every image with its own stream (`rng.fork(i)`, or
/// `rng.fork(0)` for every image under [`Granularity::PerBatch`]).
pub(crate) fn map_images<F>(batch: &ImageBatch, rng: &RngState, granularity: Granularity, f: F) -> Result<ImageBatch>
where
    F: Fn(&Frame, &mut Rng) -> Result<Frame>,
{
    let (n, c, h, w) = batch.shape();
    let mut images = Vec::with_capacity(n);
    for i in 0..n {
        let key = match granularity {
            Granularity::PerImage => i as u64,
            Granularity::PerBatch => 0,
        };
        let mut g = rng.fork(key).generator();
        let out = f(&Frame::from_batch(batch, i), &mut g)?;
        debug_assert_eq!((out.c, out.h, out.w), (c, h, w));
        images.push(out.data);
    }
    Ok(ImageBatch::from_unit_images(c, h, w, batch.dtype(), images))
}

fn sample_distinct<T: Copy + Eq + Hash>(
    requested: u32,
    available: u64,
    g: &mut Rng,
    mut draw: impl FnMut(&mut Rng) -> T,
    enumerate: impl FnOnce() -> Vec<T>,
) -> Result<Vec<T>> {
    let d = u64::from(requested);
    if d > available {
        return Err(Error::DiversityTooLarge { requested: d, available });
    }
    if 2 * d > available {
        let mut all = enumerate();
        for i in 0..requested as usize {
            let j = i + g.below((all.len() - i) as u64) as usize;
            all.swap(i, j);
        }
        all.truncate(requested as usize);
        return Ok(all);
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(requested as usize);
    while out.len() < requested as usize {
        let t = draw(g);
        if seen.insert(t) {
            out.push(t);
        }
    }
    Ok(out)
}

/// Draws the `D` parameter tuples of an HD operator once; later
/// applications pick uniformly among them.
pub fn presample_param_sets(spec: &TransformSpec, rng: &RngState) -> Result<TransformSpec> {
    let Diversity::Finite(d) = spec.diversity else {
        return Err(Error::NotApplicable("cannot pre-sample unlimited spatial diversity".into()));
    };
    if !spec.op.supports_presampling() {
        return Err(Error::NotApplicable(format!("{} has no parameter sets", spec.op)));
    }
    if spec.strength_min != spec.strength_max {
        return Err(Error::InvalidStrength(format!(
            "pre-sampling needs a fixed strength, got [{}, {}]",
            spec.strength_min, spec.strength_max
        )));
    }
    let s = spec.strength_max;
    let available = spec.distinct_param_sets().unwrap_or(0);
    let mut g = rng.generator();
    let sets: Vec<ParamSet> = match spec.op {
        TransformKind::PadResizeHd => {
            sample_distinct(d, available, &mut g, |g| sample_composition(g, s), || all_compositions(s))?
                .into_iter()
                .map(ParamSet::Pad)
                .collect()
        }
        TransformKind::CropShiftHd => {
            sample_distinct(d, available, &mut g, |g| sample_crop_shift(g, s, 0, s), || all_crop_shifts(s))?
                .into_iter()
                .map(ParamSet::CropShift)
                .collect()
        }
        TransformKind::TranslateHd => {
            if u64::from(d) > available {
                return Err(Error::DiversityTooLarge {
                    requested: d.into(),
                    available,
                });
            }
            let mut dirs = Direction::ALL;
            g.shuffle(&mut dirs);
            dirs[..d as usize].iter().copied().map(ParamSet::Translate).collect()
        }
        _ => unreachable!("checked by supports_presampling"),
    };
    let mut out = spec.clone();
    out.param_sets = Some(sets);
    Ok(out)
}

pub fn pad_crop(batch: &ImageBatch, pad: u32, rng: &RngState) -> Result<ImageBatch> {
    TransformSpec::pad_crop(pad).apply(batch, rng)
}

pub fn rand_pad_resize(
    batch: &ImageBatch,
    strength_min: u32,
    strength_max: u32,
    padding_mode: PaddingMode,
    rng: &RngState,
) -> Result<ImageBatch> {
    TransformSpec::rand_pad_resize(strength_min, strength_max)
        .with_padding(padding_mode)
        .apply(batch, rng)
}

fn expect_kind(spec: &TransformSpec, kind: TransformKind) -> Result<()> {
    if spec.op == kind {
        Ok(())
    } else {
        Err(Error::InvalidValue(format!("expected a {kind} spec, got {}", spec.op)))
    }
}

pub fn pad_resize_hd(batch: &ImageBatch, spec: &TransformSpec, rng: &RngState) -> Result<ImageBatch> {
    expect_kind(spec, TransformKind::PadResizeHd)?;
    spec.apply(batch, rng)
}

pub fn crop_shift_hd(batch: &ImageBatch, spec: &TransformSpec, rng: &RngState) -> Result<ImageBatch> {
    expect_kind(spec, TransformKind::CropShiftHd)?;
    spec.apply(batch, rng)
}

pub fn translate_hd(batch: &ImageBatch, spec: &TransformSpec, rng: &RngState) -> Result<ImageBatch> {
    expect_kind(spec, TransformKind::TranslateHd)?;
    spec.apply(batch, rng)
}

pub fn rotate(batch: &ImageBatch, max_degrees: u32, rng: &RngState) -> Result<ImageBatch> {
    TransformSpec::rotate(max_degrees).apply(batch, rng)
}

pub fn cutout(batch: &ImageBatch, size: u32, rng: &RngState) -> Result<ImageBatch> {
    TransformSpec::cutout(size).apply(batch, rng)
}
