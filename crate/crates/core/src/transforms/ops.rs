//! Per-image operator kernels with explicit parameters, plus the parameter
//! samplers used by the batch-level entry points.

use serde::{Deserialize, Serialize};

use super::resample::{axis_taps, sample_zero_border, AxisTaps};
use super::{Frame, PaddingMode};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Pixels added (Pad/Resize) or removed (CropShift) on each border.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadQuadruple {
    pub top: u32,
    pub bottom: u32,
    pub left: u32,
    pub right: u32,
}

impl PadQuadruple {
    pub fn new(top: u32, bottom: u32, left: u32, right: u32) -> Self {
        Self {
            top,
            bottom,
            left,
            right,
        }
    }

    pub fn total(&self) -> u32 {
        self.top + self.bottom + self.left + self.right
    }

    pub fn vertical(&self) -> u32 {
        self.top + self.bottom
    }

    pub fn horizontal(&self) -> u32 {
        self.left + self.right
    }
}

/// Crop borders plus the position of the kept region on the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CropShiftParams {
    pub crop: PadQuadruple,
    pub dy: u32,
    pub dx: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
    UpLeft,
    UpRight,
    DownLeft,
    DownRight,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
        Direction::UpLeft,
        Direction::UpRight,
        Direction::DownLeft,
        Direction::DownRight,
    ];

    /// Content displacement `(dy, dx)` for total strength `h`. Diagonals put
    /// `ceil(h/2)` on the horizontal axis and `floor(h/2)` on the vertical.
    pub fn offsets(self, h: u32) -> (i64, i64) {
        let h = i64::from(h);
        let (horiz, vert) = ((h + 1) / 2, h / 2);
        match self {
            Direction::Up => (-h, 0),
            Direction::Down => (h, 0),
            Direction::Left => (0, -h),
            Direction::Right => (0, h),
            Direction::UpLeft => (-vert, -horiz),
            Direction::UpRight => (-vert, horiz),
            Direction::DownLeft => (vert, -horiz),
            Direction::DownRight => (vert, horiz),
        }
    }
}

/// Uniform draw over all compositions of `total` into four ordered
/// non-negative parts, via a uniform 3-subset of `total + 3` slots
/// (stars and bars, Floyd's subset sampler).
pub fn sample_composition(g: &mut Rng, total: u32) -> PadQuadruple {
    let m = u64::from(total) + 3;
    let mut picks: [u64; 3] = [u64::MAX; 3];
    for (k, j) in (m - 3..m).enumerate() {
        let t = g.below(j + 1);
        picks[k] = if picks[..k].contains(&t) { j } else { t };
    }
    picks.sort_unstable();
    let [a, b, c] = picks.map(|p| p as u32);
    PadQuadruple::new(a, b - a - 1, c - b - 1, total + 2 - c)
}

/// Number of compositions of `total` into four parts, `C(total + 3, 3)`.
pub fn composition_count(total: u32) -> u64 {
    let s = u64::from(total);
    (s + 3) * (s + 2) * (s + 1) / 6
}

pub fn all_compositions(total: u32) -> Vec<PadQuadruple> {
    let mut out = Vec::with_capacity(composition_count(total) as usize);
    for top in 0..=total {
        for bottom in 0..=total - top {
            for left in 0..=total - top - bottom {
                out.push(PadQuadruple::new(top, bottom, left, total - top - bottom - left));
            }
        }
    }
    out
}

/// Row/column split for CropShift: `v` removed rows uniform over
/// `[v_lo, v_hi]`, then each axis split and placement uniform.
pub fn sample_crop_shift(g: &mut Rng, total: u32, v_lo: u32, v_hi: u32) -> CropShiftParams {
    let v = g.range_inclusive(v_lo, v_hi);
    let u = total - v;
    let top = g.range_inclusive(0, v);
    let left = g.range_inclusive(0, u);
    let dy = g.range_inclusive(0, v);
    let dx = g.range_inclusive(0, u);
    CropShiftParams {
        crop: PadQuadruple::new(top, v - top, left, u - left),
        dy,
        dx,
    }
}

/// Number of distinct CropShift tuples at strength `total`, ignoring image size.
pub fn crop_shift_count(total: u32) -> u64 {
    (0..=u64::from(total))
        .map(|v| {
            let u = u64::from(total) - v;
            let k = (v + 1) * (u + 1);
            k * k
        })
        .sum()
}

pub fn all_crop_shifts(total: u32) -> Vec<CropShiftParams> {
    let mut out = Vec::new();
    for v in 0..=total {
        let u = total - v;
        for top in 0..=v {
            for left in 0..=u {
                for dy in 0..=v {
                    for dx in 0..=u {
                        out.push(CropShiftParams {
                            crop: PadQuadruple::new(top, v - top, left, u - left),
                            dy,
                            dx,
                        });
                    }
                }
            }
        }
    }
    out
}

#[inline]
fn padded_index(i: i64, len: usize, mode: PaddingMode) -> Option<usize> {
    if i >= 0 && (i as usize) < len {
        Some(i as usize)
    } else {
        match mode {
            PaddingMode::Zero => None,
            PaddingMode::Replicate => Some(i.clamp(0, len as i64 - 1) as usize),
        }
    }
}

/// Pads by `pad` on all sides, then takes the `h × w` window whose top-left
/// corner sits at `(oy, ox)` of the padded frame; `oy, ox ∈ [0, 2·pad]`.
pub fn pad_crop_with(frame: &Frame, pad: u32, oy: u32, ox: u32, mode: PaddingMode) -> Frame {
    let (c, h, w) = (frame.c, frame.h, frame.w);
    let mut data = vec![0f32; c * h * w];
    for (ch, dst) in data.chunks_exact_mut(h * w).enumerate() {
        pad_crop_plane(frame.plane(ch), dst, h, w, pad, oy, ox, mode);
    }
    Frame { c, h, w, data }
}

/// One plane of [`pad_crop_with`]; `dst` must start zeroed.
#[allow(clippy::too_many_arguments)]
pub(crate) fn pad_crop_plane<T: Copy>(src: &[T], dst: &mut [T], h: usize, w: usize, pad: u32, oy: u32, ox: u32, mode: PaddingMode) {
    let (sy, sx) = (i64::from(oy) - i64::from(pad), i64::from(ox) - i64::from(pad));
    // Output columns whose source column lies inside the frame.
    let x_lo = (-sx).clamp(0, w as i64) as usize;
    let x_hi = (w as i64 - sx).clamp(0, w as i64) as usize;
    for (y, dst) in dst.chunks_exact_mut(w).enumerate() {
        let Some(src_y) = padded_index(y as i64 + sy, h, mode) else {
            continue;
        };
        let src = &src[src_y * w..(src_y + 1) * w];
        if x_lo < x_hi {
            let start = (x_lo as i64 + sx) as usize;
            dst[x_lo..x_hi].copy_from_slice(&src[start..start + (x_hi - x_lo)]);
        }
        if mode == PaddingMode::Replicate {
            dst[..x_lo].fill(src[0]);
            dst[x_hi..].fill(src[w - 1]);
        }
    }
}

/// Pads each border by the quadruple, keeping the original frame whole.
pub fn pad_with(frame: &Frame, quad: PadQuadruple, mode: PaddingMode) -> Frame {
    let (c, h, w) = (frame.c, frame.h, frame.w);
    let ph = h + quad.vertical() as usize;
    let pw = w + quad.horizontal() as usize;
    let left = quad.left as usize;
    let mut data = vec![0f32; c * ph * pw];
    for ch in 0..c {
        let plane = frame.plane(ch);
        for y in 0..ph {
            let Some(src_y) = padded_index(y as i64 - i64::from(quad.top), h, mode) else {
                continue;
            };
            let src = &plane[src_y * w..(src_y + 1) * w];
            let dst = &mut data[(ch * ph + y) * pw..(ch * ph + y + 1) * pw];
            dst[left..left + w].copy_from_slice(src);
            if mode == PaddingMode::Replicate {
                dst[..left].fill(src[0]);
                dst[left + w..].fill(src[w - 1]);
            }
        }
    }
    Frame { c, h: ph, w: pw, data }
}

/// Pad by the quadruple, then resize back to the original size.
pub fn pad_resize_with(frame: &Frame, quad: PadQuadruple, mode: PaddingMode) -> Frame {
    if quad.total() == 0 {
        return frame.clone();
    }
    let (c, h, w) = (frame.c, frame.h, frame.w);
    let mut plan = PadResizePlan::new(h, w, quad, mode);
    let mut data = vec![0f32; c * h * w];
    for (ch, dst) in data.chunks_exact_mut(h * w).enumerate() {
        plan.run(frame.plane(ch), f64::from, dst, |v| v as f32);
    }
    Frame { c, h, w, data }
}

/// Taps and scratch space of [`pad_resize_with`] for one frame size and
/// quadruple, reusable across planes.
pub(crate) struct PadResizePlan {
    h: usize,
    w: usize,
    left: usize,
    mode: PaddingMode,
    ys: AxisTaps,
    /// `(lo, frac)` per output column; the right neighbour is `lo + 1`.
    xs: Vec<(usize, f64)>,
    src_rows: Vec<Option<usize>>,
    /// One padded row plus a copy of its last entry, so that the clamped
    /// right neighbour of the last column is `lo + 1` as well.
    line: Vec<f64>,
    rows: Vec<f64>,
}

impl PadResizePlan {
    pub(crate) fn new(h: usize, w: usize, quad: PadQuadruple, mode: PaddingMode) -> Self {
        let ph = h + quad.vertical() as usize;
        let pw = w + quad.horizontal() as usize;
        let xs = axis_taps(pw, w);
        PadResizePlan {
            h,
            w,
            left: quad.left as usize,
            mode,
            ys: axis_taps(ph, h),
            xs: xs.lo.iter().copied().zip(xs.frac.iter().copied()).collect(),
            src_rows: (0..ph).map(|y| padded_index(y as i64 - i64::from(quad.top), h, mode)).collect(),
            line: vec![0.0; pw + 1],
            rows: vec![0.0; ph * w],
        }
    }

    /// Resamples one plane into `dst`. `value` maps a stored pixel to the
    /// unit scale and `store` maps the result back. The horizontal pass runs
    /// once per padded row; the arithmetic matches `lerp2` term for term.
    pub(crate) fn run<T: Copy, O>(&mut self, src: &[T], value: impl Fn(T) -> f64, dst: &mut [O], store: impl Fn(f64) -> O) {
        let (w, left) = (self.w, self.left);
        for (py, src_row) in self.src_rows.iter().enumerate() {
            let out = &mut self.rows[py * w..(py + 1) * w];
            let Some(y) = *src_row else {
                out.fill(0.0);
                continue;
            };
            let (head, rest) = self.line.split_at_mut(left);
            let (body, tail) = rest.split_at_mut(w);
            for (v, &p) in body.iter_mut().zip(&src[y * w..(y + 1) * w]) {
                *v = value(p);
            }
            let (first, last) = match self.mode {
                PaddingMode::Zero => (0.0, 0.0),
                PaddingMode::Replicate => (body[0], body[w - 1]),
            };
            head.fill(first);
            // Without right padding the tail is only the copy of the last body entry.
            tail.fill(if tail.len() > 1 { last } else { body[w - 1] });
            for (o, &(lo, frac)) in out.iter_mut().zip(&self.xs) {
                let pair = &self.line[lo..lo + 2];
                *o = pair[0] + (pair[1] - pair[0]) * frac;
            }
        }
        for (oy, dst_row) in dst[..self.h * w].chunks_exact_mut(w).enumerate() {
            let top = &self.rows[self.ys.lo[oy] * w..(self.ys.lo[oy] + 1) * w];
            let bottom = &self.rows[self.ys.hi[oy] * w..(self.ys.hi[oy] + 1) * w];
            let fy = self.ys.frac[oy];
            for ((d, &t), &b) in dst_row.iter_mut().zip(top).zip(bottom) {
                *d = store(t + (b - t) * fy);
            }
        }
    }
}

/// Keeps rows `[top, h - bottom)` and columns `[left, w - right)` and pastes
/// them with their top-left corner at `(dy, dx)` on a zero canvas.
pub fn crop_shift_with(frame: &Frame, params: CropShiftParams) -> Result<Frame> {
    let (c, h, w) = (frame.c, frame.h, frame.w);
    let q = params.crop;
    let (v, u) = (q.vertical() as usize, q.horizontal() as usize);
    if v >= h || u >= w {
        return Err(Error::InvalidStrength(format!(
            "crop removes {v} rows / {u} columns from a {h}x{w} image"
        )));
    }
    if params.dy as usize > v || params.dx as usize > u {
        return Err(Error::InvalidValue(format!(
            "placement ({}, {}) leaves the canvas for a {}x{} region",
            params.dy,
            params.dx,
            h - v,
            w - u
        )));
    }
    let (rh, rw) = (h - v, w - u);
    let mut data = vec![0f32; c * h * w];
    for ch in 0..c {
        let plane = frame.plane(ch);
        for y in 0..rh {
            let src = (y + q.top as usize) * w + q.left as usize;
            let dst = (ch * h + y + params.dy as usize) * w + params.dx as usize;
            data[dst..dst + rw].copy_from_slice(&plane[src..src + rw]);
        }
    }
    Ok(Frame { c, h, w, data })
}

/// Shifts content by `strength` pixels along `dir`; vacated pixels are zero.
pub fn translate_with(frame: &Frame, dir: Direction, strength: u32) -> Frame {
    let (c, h, w) = (frame.c, frame.h, frame.w);
    let mut data = vec![0f32; c * h * w];
    for (ch, dst) in data.chunks_exact_mut(h * w).enumerate() {
        translate_plane(frame.plane(ch), dst, h, w, dir.offsets(strength));
    }
    Frame { c, h, w, data }
}

/// Copies `src` shifted by `(dy, dx)` into the zero-filled `dst`.
pub(crate) fn translate_plane<T: Copy>(src: &[T], dst: &mut [T], h: usize, w: usize, (dy, dx): (i64, i64)) {
    let (h, w) = (h as i64, w as i64);
    let (x0, x1) = (dx.max(0), (w + dx).min(w));
    if x0 >= x1 {
        return;
    }
    for y in dy.max(0)..(h + dy).min(h) {
        let (sy, sx0) = (y - dy, x0 - dx);
        let len = (x1 - x0) as usize;
        let s = (sy * w + sx0) as usize;
        let d = (y * w + x0) as usize;
        dst[d..d + len].copy_from_slice(&src[s..s + len]);
    }
}

/// Rotates content counter-clockwise (as displayed, rows growing downward)
/// by `degrees` about the image center; samples falling outside read zero.
pub fn rotate_with(frame: &Frame, degrees: f64) -> Frame {
    if degrees == 0.0 {
        return frame.clone();
    }
    let (c, h, w) = (frame.c, frame.h, frame.w);
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let mut data = Vec::with_capacity(c * h * w);
    for ch in 0..c {
        let plane = frame.plane(ch);
        for y in 0..h {
            let ry = y as f64 - cy;
            for x in 0..w {
                let rx = x as f64 - cx;
                let sx = rx * cos - ry * sin + cx;
                let sy = rx * sin + ry * cos + cy;
                data.push(sample_zero_border(plane, h, w, sy, sx) as f32);
            }
        }
    }
    Frame { c, h, w, data }
}

/// Sets the `size × size` square at `(y, x)` to `fill` in every channel.
pub fn cutout_with(frame: &Frame, size: u32, y: u32, x: u32, fill: f32) -> Frame {
    let mut out = frame.clone();
    let (h, w) = (frame.h, frame.w);
    let size = size as usize;
    for ch in 0..frame.c {
        for row in y as usize..(y as usize + size).min(h) {
            let start = (ch * h + row) * w + x as usize;
            let end = (start + size).min((ch * h + row) * w + w);
            out.data[start..end].fill(fill);
        }
    }
    out
}
