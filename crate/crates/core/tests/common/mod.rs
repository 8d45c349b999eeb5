//! Test doubles shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

pub mod checks;

use proptest::prelude::*;
use rlaug::transforms::{
    composition_count, crop_shift_count, presample_param_sets, Diversity, Frame, Granularity, PaddingMode,
    TransformKind, TransformSpec,
};
use rlaug::tensor::{u8_to_unit, unit_to_u8};
use rlaug::{Dtype, ImageBatch, RngState};

/// Brute-force half-pixel bilinear resize of one `h × w` plane, evaluated
/// per output pixel: source coordinate `(i + 0.5)·(in/out) − 0.5` clamped to
/// `[0, in − 1]`, then the pinned f64 order (two row lerps, one column lerp).
pub fn oracle_resize(src: &[f64], h: usize, w: usize, oh: usize, ow: usize) -> Vec<f64> {
    let coord = |i: usize, input: usize, output: usize| {
        let s = ((i as f64 + 0.5) * (input as f64 / output as f64) - 0.5).clamp(0.0, (input - 1) as f64);
        let lo = s.floor() as usize;
        (lo, (lo + 1).min(input - 1), s - lo as f64)
    };
    let mut out = Vec::with_capacity(oh * ow);
    for oy in 0..oh {
        let (y0, y1, fy) = coord(oy, h, oh);
        for ox in 0..ow {
            let (x0, x1, fx) = coord(ox, w, ow);
            let at = |y: usize, x: usize| src[y * w + x];
            let top = at(y0, x0) + (at(y0, x1) - at(y0, x0)) * fx;
            let bottom = at(y1, x0) + (at(y1, x1) - at(y1, x0)) * fx;
            out.push(top + (bottom - top) * fy);
        }
    }
    out
}

/// The same resize as an explicit weight sum; agrees with [`oracle_resize`]
/// up to rounding order.
pub fn weighted_resize(src: &[f64], h: usize, w: usize, oh: usize, ow: usize) -> Vec<f64> {
    let weights = |input: usize, output: usize| -> Vec<Vec<f64>> {
        (0..output)
            .map(|i| {
                let s = ((i as f64 + 0.5) * input as f64 / output as f64 - 0.5).clamp(0.0, (input - 1) as f64);
                (0..input).map(|k| (1.0 - (s - k as f64).abs()).max(0.0)).collect()
            })
            .collect()
    };
    let (wy, wx) = (weights(h, oh), weights(w, ow));
    let mut out = Vec::with_capacity(oh * ow);
    for row in &wy {
        for col in &wx {
            let mut acc = 0.0;
            for y in 0..h {
                for x in 0..w {
                    acc += row[y] * col[x] * src[y * w + x];
                }
            }
            out.push(acc);
        }
    }
    out
}

/// Pads one plane by enumerating padded coordinates and mapping each back to
/// the source (clamped for replicate, `fill` outside for zero).
pub fn oracle_pad(
    src: &[f64],
    h: usize,
    w: usize,
    [top, bottom, left, right]: [usize; 4],
    mode: PaddingMode,
    fill: f64,
) -> Vec<f64> {
    let (ph, pw) = (h + top + bottom, w + left + right);
    let mut out = Vec::with_capacity(ph * pw);
    for py in 0..ph {
        for px in 0..pw {
            let (y, x) = (py as i64 - top as i64, px as i64 - left as i64);
            let inside = (0..h as i64).contains(&y) && (0..w as i64).contains(&x);
            out.push(match (inside, mode) {
                (true, _) => src[y as usize * w + x as usize],
                (false, PaddingMode::Zero) => fill,
                (false, PaddingMode::Replicate) => {
                    src[y.clamp(0, h as i64 - 1) as usize * w + x.clamp(0, w as i64 - 1) as usize]
                }
            });
        }
    }
    out
}

/// `v / 255` as stored internally (f32), widened.
pub fn unit(v: u8) -> f64 {
    f64::from(v as f32 / 255.0)
}

/// Round-half-up of a unit value after the f32 store.
pub fn quantize(x: f64) -> u8 {
    (f64::from(x as f32) * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

pub fn random_u8(n: usize, c: usize, h: usize, w: usize, seed: u64) -> ImageBatch {
    let mut g = RngState::new(seed, 0xDA7A).generator();
    let data = (0..n * c * h * w).map(|_| g.below(256) as u8).collect();
    ImageBatch::from_u8(n, c, h, w, data).unwrap()
}

pub fn random_f32(n: usize, c: usize, h: usize, w: usize, seed: u64) -> ImageBatch {
    let mut g = RngState::new(seed, 0xF32).generator();
    let data = (0..n * c * h * w).map(|_| g.uniform() as f32).collect();
    ImageBatch::from_f32(n, c, h, w, data).unwrap()
}

/// One randomized property-suite case.
#[derive(Debug, Clone)]
pub struct Case {
    pub batch: ImageBatch,
    pub spec: TransformSpec,
    pub rng: RngState,
}

/// Raw draws turned into a valid case for `kind` by [`Case::build`].
pub fn raw_case() -> impl Strategy<Value = [u64; 10]> {
    any::<[u64; 10]>()
}

impl Case {
    pub fn build(kind: TransformKind, raw: [u64; 10]) -> Case {
        let pick = |i: usize, lo: u64, hi: u64| lo + raw[i] % (hi - lo + 1);
        let n = pick(0, 1, 3) as usize;
        let c = if raw[1].is_multiple_of(2) { 1 } else { 3 };
        let h = pick(2, 3, 20) as usize;
        let w = pick(3, 3, 20) as usize;
        let batch = if raw[4].is_multiple_of(2) {
            random_u8(n, c, h, w, raw[5])
        } else {
            random_f32(n, c, h, w, raw[5])
        };
        let min_side = h.min(w) as u64;
        let (lo, hi) = match kind {
            TransformKind::PadCrop => {
                let s = pick(6, 0, min_side - 1);
                (s, s)
            }
            TransformKind::RandPadResize => {
                let a = pick(6, 0, 24);
                (a, pick(7, a, 24))
            }
            TransformKind::PadResizeHd => {
                let s = pick(6, 0, 16);
                (s, s)
            }
            TransformKind::CropShiftHd if raw[8] % 2 == 1 => {
                // Stored tuples are drawn without the image size, so keep
                // every split of the strength inside the frame.
                let s = pick(6, 0, min_side - 1);
                (s, s)
            }
            TransformKind::CropShiftHd => {
                let s = pick(6, 0, (h + w - 2) as u64);
                (s, s)
            }
            TransformKind::TranslateHd => {
                let s = pick(6, 0, min_side - 1);
                (s, s)
            }
            TransformKind::Rotate => (0, pick(6, 0, 180)),
            TransformKind::Cutout => {
                let s = pick(6, 0, min_side);
                (s, s)
            }
        };
        let mut spec = TransformSpec::new(kind, lo as u32, hi as u32);
        if raw[8].is_multiple_of(3) {
            spec = spec.with_padding(if raw[8].is_multiple_of(2) { PaddingMode::Zero } else { PaddingMode::Replicate });
        }
        if raw[8].is_multiple_of(5) {
            spec = spec.with_granularity(Granularity::PerBatch);
        }
        let rng = RngState::new(raw[9], raw[7] % 16);
        if kind.supports_presampling() && raw[8] % 2 == 1 {
            let available = match kind {
                TransformKind::PadResizeHd => composition_count(lo as u32),
                TransformKind::CropShiftHd => crop_shift_count(lo as u32),
                _ => 8,
            };
            let d = 1 + raw[7] % available.min(6);
            spec = presample_param_sets(&spec.with_diversity(Diversity::Finite(d as u32)), &rng.offset(99))
                .expect("diversity within the available tuples");
        }
        Case { batch, spec, rng }
    }

    /// The same case with strength zero everywhere.
    pub fn zero_strength(&self) -> TransformSpec {
        TransformSpec::new(self.spec.op, 0, 0)
            .with_padding(self.spec.padding_mode)
            .with_granularity(self.spec.granularity)
    }
}

/// Checks shape preservation, zero-strength identity, determinism, range
/// discipline, and per-image independence on one case.
pub fn check_case(case: &Case) -> Result<(), String> {
    let Case { batch, spec, rng } = case;
    let out = spec.apply(batch, rng).map_err(|e| format!("apply failed: {e}"))?;
    if out.shape() != batch.shape() || out.dtype() != batch.dtype() {
        return Err(format!("shape {:?} -> {:?}", batch.shape(), out.shape()));
    }
    if spec.apply(batch, rng).unwrap() != out {
        return Err("not deterministic".into());
    }
    let zero = case.zero_strength();
    if zero.apply(batch, rng).map_err(|e| e.to_string())? != *batch {
        return Err("zero strength is not the identity".into());
    }
    match batch.dtype() {
        Dtype::F32 => {
            if !out.as_f32().unwrap().iter().all(|v| (0.0..=1.0).contains(v)) {
                return Err("f32 output leaves [0, 1]".into());
            }
        }
        Dtype::U8 => {
            let via_f32 = spec.apply(&batch.to_f32(), rng).unwrap().to_u8();
            if via_f32 != out {
                return Err("u8 path differs from the f32 path plus rounding".into());
            }
        }
    }
    for i in 0..batch.n() {
        let key = match spec.granularity {
            Granularity::PerImage => i as u64,
            Granularity::PerBatch => 0,
        };
        let alone = spec
            .apply_frame(&Frame::from_batch(batch, i), batch.dtype(), &mut rng.fork(key).generator())
            .unwrap();
        let expected: Vec<f32> = match batch.dtype() {
            Dtype::U8 => alone.data.iter().map(|&x| u8_to_unit(unit_to_u8(x))).collect(),
            Dtype::F32 => alone.data.iter().map(|&x| x.clamp(0.0, 1.0)).collect(),
        };
        if expected != out.image_unit(i) {
            return Err(format!("image {i} differs when augmented alone"));
        }
    }
    Ok(())
}

/// Compares `bilinear_resize` with [`oracle_resize`] on `count` random
/// images (sides 1..=16 in and out), bytewise for u8 and within `1e-6` for
/// f32.
pub fn check_resampler(count: usize, seed: u64) -> Result<(), String> {
    let mut g = RngState::new(seed, 0x0EAC).generator();
    let mut side = || 1 + g.below(16) as usize;
    for case in 0..count {
        let (c, h, w, oh, ow) = (1 + 2 * (case % 2), side(), side(), side(), side());
        let bytes = random_u8(1, c, h, w, seed ^ case as u64);
        let floats = random_f32(1, c, h, w, seed ^ case as u64);
        let got_u8 = rlaug::transforms::bilinear_resize(&bytes, oh, ow).map_err(|e| e.to_string())?;
        let got_f32 = rlaug::transforms::bilinear_resize(&floats, oh, ow).map_err(|e| e.to_string())?;
        let (got_u8, got_f32) = (got_u8.as_u8().unwrap(), got_f32.as_f32().unwrap());
        for ch in 0..c {
            let plane = |len: usize| ch * len..(ch + 1) * len;
            let src_u8: Vec<f64> = bytes.as_u8().unwrap()[plane(h * w)].iter().map(|&v| unit(v)).collect();
            let src_f32: Vec<f64> = floats.as_f32().unwrap()[plane(h * w)].iter().map(|&v| f64::from(v)).collect();
            let want_u8: Vec<u8> = oracle_resize(&src_u8, h, w, oh, ow).into_iter().map(quantize).collect();
            if got_u8[plane(oh * ow)] != want_u8[..] {
                let (k, (a, b)) = got_u8[plane(oh * ow)]
                    .iter()
                    .zip(&want_u8)
                    .enumerate()
                    .find(|(_, (a, b))| a != b)
                    .unwrap();
                return Err(format!("u8 case {case}: {h}x{w} -> {oh}x{ow} pixel {k}: {a} vs {b}"));
            }
            let want_f32 = oracle_resize(&src_f32, h, w, oh, ow);
            for (k, (&a, b)) in got_f32[plane(oh * ow)].iter().zip(want_f32).enumerate() {
                if (f64::from(a) - b).abs() > 1e-6 {
                    return Err(format!("f32 case {case}: pixel {k} {a} vs {b}"));
                }
            }
        }
    }
    Ok(())
}
