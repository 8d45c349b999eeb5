//! ARLT raw tensor files and PNG images.
//!
//! ARLT layout (little-endian):
//!
//! | bytes  | field                          |
//! |--------|--------------------------------|
//! | 0..4   | magic `ARLT`                   |
//! | 4..8   | u32 version (= 1)              |
//! | 8..24  | u32 n, c, h, w                 |
//! | 24     | u8 dtype code (0 = u8, 1 = f32)|
//! | 25..32 | reserved, zero                 |
//! | 32..   | payload, row-major             |

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{Dtype, ImageBatch, Pixels};

pub const ARLT_MAGIC: &[u8; 4] = b"ARLT";
pub const ARLT_VERSION: u32 = 1;
pub const ARLT_HEADER_LEN: usize = 32;

pub fn encode_arlt(batch: &ImageBatch) -> Vec<u8> {
    let (n, c, h, w) = batch.shape();
    let payload = batch.to_le_bytes();
    let mut out = Vec::with_capacity(ARLT_HEADER_LEN + payload.len());
    out.extend_from_slice(ARLT_MAGIC);
    out.extend_from_slice(&ARLT_VERSION.to_le_bytes());
    for d in [n, c, h, w] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.push(batch.dtype().code());
    out.extend_from_slice(&[0u8; 7]);
    out.extend_from_slice(&payload);
    out
}

pub fn decode_arlt(bytes: &[u8]) -> Result<ImageBatch> {
    if bytes.len() < ARLT_HEADER_LEN {
        return Err(Error::Format(format!("file is {} bytes, shorter than the header", bytes.len())));
    }
    if &bytes[0..4] != ARLT_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != ARLT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let (n, c, h, w) = (word(8) as usize, word(12) as usize, word(16) as usize, word(20) as usize);
    let dtype = Dtype::from_code(bytes[24]).ok_or_else(|| Error::Format(format!("unknown dtype code {}", bytes[24])))?;
    if bytes[25..32].iter().any(|&b| b != 0) {
        return Err(Error::Format("reserved header bytes are not zero".into()));
    }
    let expected = n
        .checked_mul(c)
        .and_then(|x| x.checked_mul(h))
        .and_then(|x| x.checked_mul(w))
        .and_then(|x| x.checked_mul(dtype.size()))
        .ok_or_else(|| Error::Format("header dimensions overflow".into()))?;
    let payload = &bytes[ARLT_HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload is {} bytes, header requires {expected}",
            payload.len()
        )));
    }
    let pixels = match dtype {
        Dtype::U8 => Pixels::U8(payload.to_vec()),
        Dtype::F32 => Pixels::F32(
            payload
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect(),
        ),
    };
    ImageBatch::from_pixels(n, c, h, w, pixels).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_raw(batch: &ImageBatch, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_arlt(batch)).map_err(|e| Error::io(path, e))
}

pub fn load_raw(path: impl AsRef<Path>) -> Result<ImageBatch> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_arlt(&bytes)
}

/// Loads an 8-bit grayscale or RGB PNG as a `(1, c, h, w)` u8 batch.
pub fn load_png(path: impl AsRef<Path>) -> Result<ImageBatch> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let decoder = png::Decoder::new(std::io::BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| Error::Format(e.to_string()))?;
    let info = reader.info();
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Format(format!("unsupported bit depth {:?}", info.bit_depth)));
    }
    let c = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => return Err(Error::Format(format!("unsupported color type {other:?}"))),
    };
    let (w, h) = (info.width as usize, info.height as usize);
    let mut buf = vec![0u8; reader.output_buffer_size().ok_or_else(|| Error::Format("image too large".into()))?];
    let frame = reader.next_frame(&mut buf).map_err(|e| Error::Format(e.to_string()))?;
    let interleaved = &buf[..frame.buffer_size()];
    let stride = frame.line_size;
    let mut planar = vec![0u8; c * h * w];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                planar[(ch * h + y) * w + x] = interleaved[y * stride + x * c + ch];
            }
        }
    }
    ImageBatch::from_u8(1, c, h, w, planar)
}

/// Writes a single-image batch as an 8-bit PNG; f32 batches are quantized.
pub fn save_png(batch: &ImageBatch, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if batch.n() != 1 {
        return Err(Error::InvalidShape(format!("PNG holds one image, batch has {}", batch.n())));
    }
    let batch = batch.to_u8();
    let (_, c, h, w) = batch.shape();
    let planar = batch.as_u8().unwrap();
    let mut interleaved = vec![0u8; c * h * w];
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                interleaved[(y * w + x) * c + ch] = planar[(ch * h + y) * w + x];
            }
        }
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), w as u32, h as u32);
    encoder.set_color(if c == 1 { png::ColorType::Grayscale } else { png::ColorType::Rgb });
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(|e| Error::Format(e.to_string()))?;
    writer
        .write_image_data(&interleaved)
        .map_err(|e| Error::Format(e.to_string()))?;
    writer.finish().map_err(|e| Error::Format(e.to_string()))
}

/// Loads ARLT, or PNG when the extension says so.
pub fn load_any(path: impl AsRef<Path>) -> Result<ImageBatch> {
    let path = path.as_ref();
    if is_png(path) {
        load_png(path)
    } else {
        load_raw(path)
    }
}

pub fn save_any(batch: &ImageBatch, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if is_png(path) {
        save_png(batch, path)
    } else {
        save_raw(batch, path)
    }
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;

    fn random_u8(n: usize, c: usize, h: usize, w: usize, seed: u64) -> ImageBatch {
        let mut g = RngState::new(seed, 0).generator();
        let data = (0..n * c * h * w).map(|_| g.below(256) as u8).collect();
        ImageBatch::from_u8(n, c, h, w, data).unwrap()
    }

    #[test]
    fn arlt_header_layout() {
        let b = ImageBatch::filled(1, 3, 84, 84, Dtype::U8, 0.0).unwrap();
        let bytes = encode_arlt(&b);
        assert_eq!(&bytes[0..4], b"ARLT");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        let dims: Vec<u32> = (0..4)
            .map(|i| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap()))
            .collect();
        assert_eq!(dims, vec![1, 3, 84, 84]);
        assert_eq!(bytes[24], 0);
        assert_eq!(&bytes[25..32], &[0; 7]);
        assert_eq!(bytes.len(), 32 + 3 * 84 * 84);
    }

    #[test]
    fn arlt_roundtrip_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.arlt");
        let b = random_u8(4, 3, 84, 84, 1);
        save_raw(&b, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        let back = load_raw(&path).unwrap();
        assert_eq!(back, b);
        save_raw(&back, &path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), bytes);
    }

    #[test]
    fn arlt_f32_roundtrip() {
        let b = ImageBatch::from_f32(1, 1, 2, 2, vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        assert_eq!(decode_arlt(&encode_arlt(&b)).unwrap(), b);
    }

    #[test]
    fn arlt_errors() {
        let b = random_u8(1, 1, 4, 4, 2);
        let bytes = encode_arlt(&b);
        assert!(matches!(decode_arlt(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
        assert!(matches!(decode_arlt(&bytes[..10]), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_arlt(&bad), Err(Error::Format(_))));
        let mut bad = bytes;
        bad[24] = 9;
        assert!(matches!(decode_arlt(&bad), Err(Error::Format(_))));
    }

    #[test]
    fn png_white_pixel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("white.png");
        let file = fs::File::create(&path).unwrap();
        let mut enc = png::Encoder::new(BufWriter::new(file), 1, 1);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        enc.write_header().unwrap().write_image_data(&[255, 255, 255]).unwrap();
        let b = load_png(&path).unwrap();
        assert_eq!(b.shape(), (1, 3, 1, 1));
        assert_eq!(b.as_u8().unwrap(), &[255, 255, 255]);
    }

    #[test]
    fn png_roundtrip_rgb_and_gray() {
        let dir = tempfile::tempdir().unwrap();
        for c in [1, 3] {
            let path = dir.path().join(format!("r{c}.png"));
            let b = random_u8(1, c, 8, 8, 3);
            save_png(&b, &path).unwrap();
            assert_eq!(load_png(&path).unwrap(), b);
        }
    }

    #[test]
    fn png_sixteen_bit_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        let file = fs::File::create(&path).unwrap();
        let mut enc = png::Encoder::new(BufWriter::new(file), 1, 1);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Sixteen);
        enc.write_header().unwrap().write_image_data(&[1, 2]).unwrap();
        assert!(matches!(load_png(&path), Err(Error::Format(_))));
    }
}
