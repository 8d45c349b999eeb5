//! Bilinear resampling shared by every resize- and rotation-based operator.
//!
//! Convention: half-pixel centers. Output index `i` of an axis of length
//! `out` reads source coordinate `(i + 0.5) * (in / out) - 0.5`, clamped to
//! `[0, in - 1]`. Interpolation runs in f64 as two horizontal lerps
//! `a + (b - a) * fx` followed by one vertical lerp, then narrows to f32.

use crate::error::{Error, Result};
use crate::tensor::ImageBatch;

use super::Frame;

/// Pinned interpolation formula.
#[inline]
pub(crate) fn lerp2(v00: f64, v01: f64, v10: f64, v11: f64, fy: f64, fx: f64) -> f64 {
    let top = v00 + (v01 - v00) * fx;
    let bottom = v10 + (v11 - v10) * fx;
    top + (bottom - top) * fy
}

pub(crate) struct AxisTaps {
    pub(crate) lo: Vec<usize>,
    pub(crate) hi: Vec<usize>,
    pub(crate) frac: Vec<f64>,
}

pub(crate) fn axis_taps(input: usize, output: usize) -> AxisTaps {
    let scale = input as f64 / output as f64;
    let last = (input - 1) as f64;
    let mut taps = AxisTaps {
        lo: Vec::with_capacity(output),
        hi: Vec::with_capacity(output),
        frac: Vec::with_capacity(output),
    };
    for i in 0..output {
        let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
        let lo = s.floor() as usize;
        taps.lo.push(lo);
        taps.hi.push((lo + 1).min(input - 1));
        taps.frac.push(s - lo as f64);
    }
    taps
}

/// Resizes every channel of `frame` to `out_h × out_w`.
pub fn resize_frame(frame: &Frame, out_h: usize, out_w: usize) -> Frame {
    let (c, h, w) = (frame.c, frame.h, frame.w);
    if (h, w) == (out_h, out_w) {
        return frame.clone();
    }
    let ys = axis_taps(h, out_h);
    let xs = axis_taps(w, out_w);
    let mut data = Vec::with_capacity(c * out_h * out_w);
    for ch in 0..c {
        let plane = &frame.data[ch * h * w..(ch + 1) * h * w];
        for oy in 0..out_h {
            let r0 = &plane[ys.lo[oy] * w..ys.lo[oy] * w + w];
            let r1 = &plane[ys.hi[oy] * w..ys.hi[oy] * w + w];
            let fy = ys.frac[oy];
            for ox in 0..out_w {
                let (x0, x1) = (xs.lo[ox], xs.hi[ox]);
                let v = lerp2(
                    r0[x0] as f64,
                    r0[x1] as f64,
                    r1[x0] as f64,
                    r1[x1] as f64,
                    fy,
                    xs.frac[ox],
                );
                data.push(v as f32);
            }
        }
    }
    Frame {
        c,
        h: out_h,
        w: out_w,
        data,
    }
}

/// Bilinear sample of one plane at `(sy, sx)` with taps outside the grid
/// reading zero.
#[inline]
pub(crate) fn sample_zero_border(plane: &[f32], h: usize, w: usize, sy: f64, sx: f64) -> f64 {
    let y0 = sy.floor();
    let x0 = sx.floor();
    let (fy, fx) = (sy - y0, sx - x0);
    let (y0, x0) = (y0 as i64, x0 as i64);
    let tap = |y: i64, x: i64| -> f64 {
        if y >= 0 && x >= 0 && (y as usize) < h && (x as usize) < w {
            plane[y as usize * w + x as usize] as f64
        } else {
            0.0
        }
    };
    lerp2(tap(y0, x0), tap(y0, x0 + 1), tap(y0 + 1, x0), tap(y0 + 1, x0 + 1), fy, fx)
}

/// Resizes every image in `batch` to `out_h × out_w`.
pub fn bilinear_resize(batch: &ImageBatch, out_h: usize, out_w: usize) -> Result<ImageBatch> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::InvalidShape(format!("output size {out_h}x{out_w} must be positive")));
    }
    let (n, c, h, w) = batch.shape();
    let images = (0..n)
        .map(|i| {
            let frame = Frame {
                c,
                h,
                w,
                data: batch.image_unit(i),
            };
            resize_frame(&frame, out_h, out_w).data
        })
        .collect();
    Ok(ImageBatch::from_unit_images(c, out_h, out_w, batch.dtype(), images))
}
