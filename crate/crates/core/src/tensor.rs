//! Dense `(n, c, h, w)` pixel batches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    U8,
    F32,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::U8 => 0,
            Dtype::F32 => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Dtype::U8),
            1 => Some(Dtype::F32),
            _ => None,
        }
    }

    pub fn size(self) -> usize {
        match self {
            Dtype::U8 => 1,
            Dtype::F32 => 4,
        }
    }

    /// Midpoint of the dtype's range, expressed on the normalized `[0, 1]` scale.
    pub fn midpoint(self) -> f32 {
        match self {
            Dtype::U8 => u8_to_unit(128),
            Dtype::F32 => 0.5,
        }
    }
}

/// `v / 255` in f32.
#[inline]
pub fn u8_to_unit(v: u8) -> f32 {
    v as f32 / 255.0
}

/// Round-half-up quantization of a `[0, 1]` value to `[0, 255]`.
#[inline]
pub fn unit_to_u8(x: f32) -> u8 {
    // Exact in f64. Truncation equals floor on the non-negative range; the
    // cast saturates above 255 and maps NaN to 0.
    (f64::from(x) * 255.0 + 0.5).max(0.0) as u8
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pixels {
    U8(Vec<u8>),
    F32(Vec<f32>),
}

impl Pixels {
    pub fn len(&self) -> usize {
        match self {
            Pixels::U8(v) => v.len(),
            Pixels::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            Pixels::U8(_) => Dtype::U8,
            Pixels::F32(_) => Dtype::F32,
        }
    }
}

/// Batch of images in batch-major, channel, row, column order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBatch {
    n: usize,
    c: usize,
    h: usize,
    w: usize,
    pixels: Pixels,
}

fn check_dims(n: usize, c: usize, h: usize, w: usize) -> Result<()> {
    if n == 0 || h == 0 || w == 0 {
        return Err(Error::InvalidShape(format!(
            "dimensions must be positive, got ({n},{c},{h},{w})"
        )));
    }
    if c != 1 && c != 3 {
        return Err(Error::InvalidShape(format!("channels must be 1 or 3, got {c}")));
    }
    Ok(())
}

impl ImageBatch {
    /// A batch with every pixel equal to `fill`, given on the dtype's own
    /// scale (`0..=255` for u8, `[0, 1]` for f32).
    pub fn filled(n: usize, c: usize, h: usize, w: usize, dtype: Dtype, fill: f64) -> Result<Self> {
        check_dims(n, c, h, w)?;
        let len = n * c * h * w;
        let pixels = match dtype {
            Dtype::U8 => {
                if !(0.0..=255.0).contains(&fill) || fill.fract() != 0.0 {
                    return Err(Error::InvalidValue(format!("u8 fill {fill} not an integer in [0,255]")));
                }
                Pixels::U8(vec![fill as u8; len])
            }
            Dtype::F32 => {
                if !(0.0..=1.0).contains(&fill) {
                    return Err(Error::InvalidValue(format!("f32 fill {fill} outside [0,1]")));
                }
                Pixels::F32(vec![fill as f32; len])
            }
        };
        Ok(Self { n, c, h, w, pixels })
    }

    pub fn from_u8(n: usize, c: usize, h: usize, w: usize, data: Vec<u8>) -> Result<Self> {
        Self::from_pixels(n, c, h, w, Pixels::U8(data))
    }

    pub fn from_f32(n: usize, c: usize, h: usize, w: usize, data: Vec<f32>) -> Result<Self> {
        Self::from_pixels(n, c, h, w, Pixels::F32(data))
    }

    pub fn from_pixels(n: usize, c: usize, h: usize, w: usize, pixels: Pixels) -> Result<Self> {
        check_dims(n, c, h, w)?;
        if pixels.len() != n * c * h * w {
            return Err(Error::InvalidShape(format!(
                "data length {} != {n}*{c}*{h}*{w}",
                pixels.len()
            )));
        }
        if let Pixels::F32(v) = &pixels {
            if let Some(bad) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::InvalidValue(format!("f32 pixel {bad} outside [0,1]")));
            }
        }
        Ok(Self { n, c, h, w, pixels })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn c(&self) -> usize {
        self.c
    }
    pub fn h(&self) -> usize {
        self.h
    }
    pub fn w(&self) -> usize {
        self.w
    }
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.n, self.c, self.h, self.w)
    }
    pub fn dtype(&self) -> Dtype {
        self.pixels.dtype()
    }
    pub fn pixels(&self) -> &Pixels {
        &self.pixels
    }
    pub fn into_pixels(self) -> Pixels {
        self.pixels
    }
    pub fn image_len(&self) -> usize {
        self.c * self.h * self.w
    }

    pub fn as_u8(&self) -> Option<&[u8]> {
        match &self.pixels {
            Pixels::U8(v) => Some(v),
            Pixels::F32(_) => None,
        }
    }

    pub fn as_f32(&self) -> Option<&[f32]> {
        match &self.pixels {
            Pixels::F32(v) => Some(v),
            Pixels::U8(_) => None,
        }
    }

    /// Payload as little-endian bytes.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        match &self.pixels {
            Pixels::U8(v) => v.clone(),
            Pixels::F32(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        }
    }

    /// Image `i` on the normalized `[0, 1]` scale.
    pub fn image_unit(&self, i: usize) -> Vec<f32> {
        let len = self.image_len();
        let range = i * len..(i + 1) * len;
        match &self.pixels {
            Pixels::U8(v) => v[range].iter().map(|&x| u8_to_unit(x)).collect(),
            Pixels::F32(v) => v[range].to_vec(),
        }
    }

    /// Single-image batch holding image `i`.
    pub fn image(&self, i: usize) -> ImageBatch {
        let len = self.image_len();
        let range = i * len..(i + 1) * len;
        let pixels = match &self.pixels {
            Pixels::U8(v) => Pixels::U8(v[range].to_vec()),
            Pixels::F32(v) => Pixels::F32(v[range].to_vec()),
        };
        ImageBatch { n: 1, ..self.clone_shape(pixels) }
    }

    fn clone_shape(&self, pixels: Pixels) -> ImageBatch {
        ImageBatch {
            n: self.n,
            c: self.c,
            h: self.h,
            w: self.w,
            pixels,
        }
    }

    pub fn to_f32(&self) -> ImageBatch {
        match &self.pixels {
            Pixels::F32(_) => self.clone(),
            Pixels::U8(v) => self.clone_shape(Pixels::F32(v.iter().map(|&x| u8_to_unit(x)).collect())),
        }
    }

    /// Round-half-up conversion to u8.
    pub fn to_u8(&self) -> ImageBatch {
        match &self.pixels {
            Pixels::U8(_) => self.clone(),
            Pixels::F32(v) => self.clone_shape(Pixels::U8(v.iter().map(|&x| unit_to_u8(x)).collect())),
        }
    }

    /// Concatenates batches along the batch axis.
    pub fn stack(parts: &[ImageBatch]) -> Result<ImageBatch> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidShape("cannot stack zero batches".into()))?;
        let (_, c, h, w) = first.shape();
        let dtype = first.dtype();
        let mut n = 0;
        for p in parts {
            if (p.c, p.h, p.w) != (c, h, w) || p.dtype() != dtype {
                return Err(Error::InvalidShape("stacked batches differ in shape or dtype".into()));
            }
            n += p.n;
        }
        let pixels = match dtype {
            Dtype::U8 => Pixels::U8(parts.iter().flat_map(|p| p.as_u8().unwrap().iter().copied()).collect()),
            Dtype::F32 => Pixels::F32(parts.iter().flat_map(|p| p.as_f32().unwrap().iter().copied()).collect()),
        };
        Ok(ImageBatch { n, c, h, w, pixels })
    }

    /// Builds a batch from per-image unit-scale buffers, converting to `dtype`.
    pub(crate) fn from_unit_images(
        c: usize,
        h: usize,
        w: usize,
        dtype: Dtype,
        images: Vec<Vec<f32>>,
    ) -> ImageBatch {
        let n = images.len();
        let pixels = match dtype {
            Dtype::U8 => Pixels::U8(images.iter().flatten().map(|&x| unit_to_u8(x)).collect()),
            Dtype::F32 => Pixels::F32(images.into_iter().flatten().map(|x| x.clamp(0.0, 1.0)).collect()),
        };
        ImageBatch { n, c, h, w, pixels }
    }

    /// Cuts every `h × (k·h)` image into `k` square tiles, left to right.
    pub fn split_panorama(&self) -> Result<ImageBatch> {
        if !self.w.is_multiple_of(self.h) {
            return Err(Error::InvalidShape(format!(
                "width {} is not a multiple of height {}",
                self.w, self.h
            )));
        }
        let k = self.w / self.h;
        let side = self.h;
        let (n, c, h, w) = self.shape();
        let gather = |out: &mut dyn FnMut(usize)| {
            for img in 0..n {
                for tile in 0..k {
                    for ch in 0..c {
                        for y in 0..h {
                            let row = ((img * c + ch) * h + y) * w + tile * side;
                            for x in 0..side {
                                out(row + x);
                            }
                        }
                    }
                }
            }
        };
        let pixels = match &self.pixels {
            Pixels::U8(v) => {
                let mut out = Vec::with_capacity(v.len());
                gather(&mut |i| out.push(v[i]));
                Pixels::U8(out)
            }
            Pixels::F32(v) => {
                let mut out = Vec::with_capacity(v.len());
                gather(&mut |i| out.push(v[i]));
                Pixels::F32(out)
            }
        };
        Ok(ImageBatch {
            n: n * k,
            c,
            h,
            w: side,
            pixels,
        })
    }

    /// Inverse of [`split_panorama`](Self::split_panorama): joins groups of
    /// `k` consecutive images side by side.
    pub fn join_panorama(&self, k: usize) -> Result<ImageBatch> {
        if k == 0 || !self.n.is_multiple_of(k) {
            return Err(Error::InvalidShape(format!("batch of {} is not divisible into groups of {k}", self.n)));
        }
        let (n, c, h, w) = self.shape();
        let out_n = n / k;
        let out_w = w * k;
        let mut order = Vec::with_capacity(self.pixels.len());
        for img in 0..out_n {
            for ch in 0..c {
                for y in 0..h {
                    for tile in 0..k {
                        let base = (((img * k + tile) * c + ch) * h + y) * w;
                        order.extend(base..base + w);
                    }
                }
            }
        }
        let pixels = match &self.pixels {
            Pixels::U8(v) => Pixels::U8(order.iter().map(|&i| v[i]).collect()),
            Pixels::F32(v) => Pixels::F32(order.iter().map(|&i| v[i]).collect()),
        };
        Ok(ImageBatch {
            n: out_n,
            c,
            h,
            w: out_w,
            pixels,
        })
    }
}

/// Shorthand for [`ImageBatch::filled`].
pub fn new_batch(n: usize, c: usize, h: usize, w: usize, dtype: Dtype, fill: f64) -> Result<ImageBatch> {
    ImageBatch::filled(n, c, h, w, dtype, fill)
}
