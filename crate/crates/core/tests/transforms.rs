mod common;

use common::*;
use proptest::prelude::*;
use rlaug::transforms::{
    all_compositions, all_crop_shifts, bilinear_resize, crop_shift_with, cutout_with, pad_crop_with,
    pad_resize_with, presample_param_sets, rotate_with, translate_with, Diversity, Direction, Frame, PadQuadruple,
    PaddingMode, ParamSet, TransformKind, TransformSpec,
};
use rlaug::{ImageBatch, RngState};

fn frame(h: usize, w: usize, data: Vec<f32>) -> Frame {
    Frame { c: 1, h, w, data }
}

macro_rules! property_suite {
    ($($name:ident => $kind:expr),* $(,)?) => {$(
        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn $name(raw in raw_case()) {
                let case = Case::build($kind, raw);
                if let Err(msg) = check_case(&case) {
                    prop_assert!(false, "{msg}: {:?}", case.spec);
                }
            }
        }
    )*};
}

property_suite! {
    pad_crop_properties => TransformKind::PadCrop,
    rand_pad_resize_properties => TransformKind::RandPadResize,
    pad_resize_hd_properties => TransformKind::PadResizeHd,
    crop_shift_hd_properties => TransformKind::CropShiftHd,
    translate_hd_properties => TransformKind::TranslateHd,
    rotate_properties => TransformKind::Rotate,
    cutout_properties => TransformKind::Cutout,
}

#[test]
fn resampler_matches_brute_force_oracle() {
    check_resampler(100, 2024).unwrap();
}

#[test]
fn resize_two_rows_up_matches_oracle() {
    let b = ImageBatch::from_u8(1, 1, 2, 2, vec![0, 0, 255, 255]).unwrap();
    let out = bilinear_resize(&b, 4, 4).unwrap();
    let want: Vec<u8> = oracle_resize(&[0.0, 0.0, 1.0, 1.0], 2, 2, 4, 4).into_iter().map(quantize).collect();
    assert_eq!(out.as_u8().unwrap(), &want[..]);
    assert_eq!(&want[..4], &[0; 4]);
    assert_eq!(&want[4..8], &[64; 4]);
}

#[test]
fn resize_single_pixel_is_constant() {
    let b = ImageBatch::from_u8(1, 3, 1, 1, vec![17, 200, 5]).unwrap();
    let out = bilinear_resize(&b, 5, 3).unwrap();
    let px = out.as_u8().unwrap();
    for (ch, v) in [17, 200, 5].into_iter().enumerate() {
        assert!(px[ch * 15..(ch + 1) * 15].iter().all(|&p| p == v));
    }
}

#[test]
fn pad_resize_small_example_matches_oracle() {
    let src = [10u8, 20, 30, 40];
    let f = frame(2, 2, src.iter().map(|&v| v as f32 / 255.0).collect());
    let quad = PadQuadruple::new(1, 1, 1, 1);
    let got: Vec<u8> = pad_resize_with(&f, quad, PaddingMode::Zero).data.into_iter().map(|v| quantize(v.into())).collect();
    let unit_src: Vec<f64> = src.iter().map(|&v| unit(v)).collect();
    let padded = oracle_pad(&unit_src, 2, 2, [1, 1, 1, 1], PaddingMode::Zero, 0.0);
    let want: Vec<u8> = oracle_resize(&padded, 4, 4, 2, 2).into_iter().map(quantize).collect();
    assert_eq!(got, want);
    assert_eq!(got, [3, 5, 8, 10]);
}

#[test]
fn pad_resize_agrees_with_oracle_for_every_composition() {
    let (h, w) = (5, 7);
    let src: Vec<f64> = random_f32(1, 1, h, w, 3).as_f32().unwrap().iter().map(|&v| v.into()).collect();
    let f = frame(h, w, src.iter().map(|&v| v as f32).collect());
    for mode in [PaddingMode::Zero, PaddingMode::Replicate] {
        for quad in all_compositions(6) {
            let got = pad_resize_with(&f, quad, mode).data;
            let pads = [quad.top, quad.bottom, quad.left, quad.right].map(|p| p as usize);
            let padded = oracle_pad(&src, h, w, pads, mode, 0.0);
            let want = oracle_resize(&padded, h + pads[0] + pads[1], w + pads[2] + pads[3], h, w);
            for (a, b) in got.iter().zip(want) {
                assert!((f64::from(*a) - b).abs() <= 1e-6, "{quad:?} {mode:?}");
            }
        }
    }
}

/// Column `p` of the returned matrix holds the output produced by a one-hot
/// source at pixel `p`.
fn weight_matrix(h: usize, w: usize, quad: PadQuadruple) -> Vec<Vec<f32>> {
    (0..h * w)
        .map(|p| {
            let mut data = vec![0f32; h * w];
            data[p] = 1.0;
            pad_resize_with(&frame(h, w, data), quad, PaddingMode::Zero).data
        })
        .collect()
}

fn assert_all_pixels_used(h: usize, w: usize, quad: PadQuadruple) {
    let cols = weight_matrix(h, w, quad);
    for (p, col) in cols.iter().enumerate() {
        assert!(col.iter().any(|&v| v > 0.0), "pixel {p} unused for {quad:?} on {h}x{w}");
    }
}

/// Coverage needs the padded side below twice the original on each axis,
/// which holds for every draw of the default range on 84×84 frames.
#[test]
fn rand_pad_resize_keeps_every_source_pixel() {
    for total in 0..=16 {
        for left in 0..=total {
            assert_all_pixels_used(1, 84, PadQuadruple::new(0, 0, left, total - left));
            assert_all_pixels_used(84, 1, PadQuadruple::new(left, total - left, 0, 0));
        }
    }
    for (h, w) in [(3, 3), (4, 6), (6, 5)] {
        for total in [1, 4, 9] {
            for quad in all_compositions(total) {
                if quad.vertical() as usize >= h || quad.horizontal() as usize >= w {
                    continue;
                }
                let cols = weight_matrix(h, w, quad);
                for (p, col) in cols.iter().enumerate() {
                    assert!(col.iter().any(|&v| v > 0.0), "pixel {p} unused for {quad:?} on {h}x{w}");
                }
                // Rows sum to the fraction of the pre-image inside the source;
                // the padded frame covers every tap, so no row exceeds one.
                for o in 0..h * w {
                    let s: f32 = cols.iter().map(|c| c[o]).sum();
                    assert!(s <= 1.0 + 1e-5);
                }
            }
        }
    }
}

#[test]
fn rand_pad_resize_interior_preimage_stays_inside_padded_frame() {
    // A sentinel image with a zero border injected by padding: every output
    // pixel is a convex combination of sentinel and zero, never outside it.
    let (h, w) = (8, 8);
    let sentinel = 0.75f32;
    let f = frame(h, w, vec![sentinel; h * w]);
    for quad in all_compositions(5) {
        let out = pad_resize_with(&f, quad, PaddingMode::Zero).data;
        assert!(out.iter().all(|&v| (0.0..=sentinel + 1e-6).contains(&v)), "{quad:?}");
        let cols = weight_matrix(h, w, quad);
        for o in 0..h * w {
            let s: f32 = cols.iter().map(|c| c[o]).sum();
            assert!((out[o] - sentinel * s).abs() < 1e-5);
        }
    }
}

#[test]
fn pad_crop_ramp_example_matches_index_oracle() {
    let src: Vec<f64> = (0..16).map(f64::from).collect();
    let f = frame(4, 4, src.iter().map(|&v| v as f32).collect());
    let got = pad_crop_with(&f, 1, 0, 2, PaddingMode::Replicate).data;
    let padded = oracle_pad(&src, 4, 4, [1, 1, 1, 1], PaddingMode::Replicate, 0.0);
    let want: Vec<f32> = (0..4).flat_map(|y| (0..4).map(move |x| (y, x))).map(|(y, x)| padded[y * 6 + x + 2] as f32).collect();
    assert_eq!(got, want);
    assert_eq!(&got[..4], &[1.0, 2.0, 3.0, 3.0]);
}

#[test]
fn pad_crop_information_loss_is_bounded() {
    let (h, w, pad) = (9usize, 7usize, 3u32);
    let src: Vec<f32> = (0..h * w).map(|i| 1.0 + i as f32).collect();
    let f = frame(h, w, src.clone());
    for oy in 0..=2 * pad {
        for ox in 0..=2 * pad {
            let out = pad_crop_with(&f, pad, oy, ox, PaddingMode::Zero).data;
            let (dy, dx) = (oy as i64 - pad as i64, ox as i64 - pad as i64);
            let mut zero_rows = 0;
            for y in 0..h {
                let row = &out[y * w..(y + 1) * w];
                if row.iter().all(|&v| v == 0.0) {
                    zero_rows += 1;
                }
                for x in 0..w {
                    let (sy, sx) = (y as i64 + dy, x as i64 + dx);
                    let inside = (0..h as i64).contains(&sy) && (0..w as i64).contains(&sx);
                    let want = if inside { src[sy as usize * w + sx as usize] } else { 0.0 };
                    assert_eq!(row[x], want);
                }
            }
            assert!(zero_rows <= pad as usize);
            if (oy, ox) == (pad, pad) {
                assert_eq!(out, src);
            }
        }
    }
}

#[test]
fn crop_shift_background_matches_region_area() {
    let (h, w) = (20usize, 20usize);
    let f = frame(h, w, vec![0.5; h * w]);
    for params in all_crop_shifts(8) {
        let out = crop_shift_with(&f, params).unwrap().data;
        let (v, u) = (params.crop.vertical() as usize, params.crop.horizontal() as usize);
        let background = out.iter().filter(|&&x| x == 0.0).count();
        assert_eq!(background, h * w - (h - v) * (w - u), "{params:?}");
    }
}

#[test]
fn crop_shift_full_size_example_counts_background() {
    let b = random_u8(1, 3, 84, 84, 8);
    let spec = TransformSpec::crop_shift_hd(8, Diversity::Unlimited);
    let sentinel = ImageBatch::filled(4, 1, 84, 84, rlaug::Dtype::U8, 1.0).unwrap();
    let out = spec.apply(&sentinel, &RngState::new(1, 0)).unwrap();
    for i in 0..4 {
        let zeros = out.image(i).as_u8().unwrap().iter().filter(|&&v| v == 0).count();
        // 84² − (84 − v)(84 − u) with u + v = 8
        assert!((0..=8).any(|v| zeros == 84 * 84 - (84 - v) * (84 - (8 - v))), "{zeros}");
    }
    assert_eq!(spec.apply(&b, &RngState::new(1, 0)).unwrap().shape(), b.shape());
}

#[test]
fn translate_right_by_one() {
    let f = frame(3, 3, (1..=9).map(|v| v as f32).collect());
    let out = translate_with(&f, Direction::Right, 1).data;
    assert_eq!(out, [0.0, 1.0, 2.0, 0.0, 4.0, 5.0, 0.0, 7.0, 8.0]);
}

#[test]
fn rotate_quarter_turn_matches_permutation() {
    let n = 7;
    let src = random_f32(1, 1, n, n, 90).as_f32().unwrap().to_vec();
    let out = rotate_with(&frame(n, n, src.clone()), 90.0).data;
    // Counter-clockwise as displayed: output (y, x) reads source (x, n-1-y).
    for y in 0..n {
        for x in 0..n {
            assert!((out[y * n + x] - src[x * n + (n - 1 - y)]).abs() <= 1e-5);
        }
    }
}

#[test]
fn rotate_half_turn_twice_restores() {
    let n = 12;
    let src = random_f32(1, 1, n, n, 180).as_f32().unwrap().to_vec();
    let twice = rotate_with(&rotate_with(&frame(n, n, src.clone()), 180.0), 180.0).data;
    let mae: f32 = twice.iter().zip(&src).map(|(a, b)| (a - b).abs()).sum::<f32>() / src.len() as f32;
    assert!(mae <= 2e-2, "{mae}");
}

#[test]
fn cutout_changes_exactly_one_square() {
    let c = 3;
    let data: Vec<u8> = random_u8(1, c, 84, 84, 4).as_u8().unwrap().iter().map(|&v| if v == 128 { 129 } else { v }).collect();
    let b = ImageBatch::from_u8(1, c, 84, 84, data).unwrap();
    let out = TransformSpec::cutout(4).apply(&b, &RngState::new(5, 0)).unwrap();
    let changed = out.as_u8().unwrap().iter().zip(b.as_u8().unwrap()).filter(|(a, b)| a != b).count();
    assert_eq!(changed, 16 * c);
    let f = frame(2, 2, vec![0.1; 4]);
    assert_eq!(cutout_with(&f, 2, 0, 0, 0.5).data, [0.5; 4]);
}

#[test]
fn presampled_pad_resize_sets_are_valid_compositions() {
    let spec = TransformSpec::pad_resize_hd(8, Diversity::Finite(3));
    let filled = presample_param_sets(&spec, &RngState::new(3, 1)).unwrap();
    let sets = filled.param_sets.unwrap();
    let all = all_compositions(8);
    assert_eq!(all.len(), 165);
    assert_eq!(sets.len(), 3);
    for (i, s) in sets.iter().enumerate() {
        let ParamSet::Pad(q) = s else { panic!("{s:?}") };
        assert_eq!(q.total(), 8);
        assert!(all.contains(q));
        assert!(!sets[..i].contains(s));
    }
}

#[test]
fn presampled_translate_covers_all_directions() {
    let spec = TransformSpec::translate_hd(4, Diversity::Finite(8));
    let sets = presample_param_sets(&spec, &RngState::new(0, 0)).unwrap().param_sets.unwrap();
    for d in Direction::ALL {
        assert!(sets.contains(&ParamSet::Translate(d)));
    }
}

#[test]
fn presampled_selection_is_uniform() {
    let (h, w) = (6, 6);
    let spec = presample_param_sets(&TransformSpec::pad_resize_hd(8, Diversity::Finite(4)), &RngState::new(11, 2)).unwrap();
    let sets: Vec<PadQuadruple> = spec
        .param_sets
        .clone()
        .unwrap()
        .into_iter()
        .map(|s| match s {
            ParamSet::Pad(q) => q,
            other => panic!("{other:?}"),
        })
        .collect();
    let one = random_f32(1, 1, h, w, 77);
    let f = frame(h, w, one.as_f32().unwrap().to_vec());
    let candidates: Vec<Vec<f32>> = sets.iter().map(|&q| pad_resize_with(&f, q, spec.padding_mode).data).collect();
    let draws = 10_000;
    let batch = ImageBatch::stack(&vec![one; draws]).unwrap();
    let out = spec.apply(&batch, &RngState::new(12, 0)).unwrap();
    let mut counts = [0f64; 4];
    for i in 0..draws {
        let img = out.image_unit(i);
        let k = candidates.iter().position(|c| *c == img).expect("output matches a stored tuple");
        counts[k] += 1.0;
    }
    let expected = draws as f64 / 4.0;
    let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    // 99th percentile of chi-square with 3 degrees of freedom
    assert!(chi2 < 11.345, "{counts:?} chi2 {chi2}");
}

#[test]
fn oracle_forms_agree() {
    for (h, w, oh, ow) in [(5, 7, 3, 11), (16, 2, 9, 9), (1, 4, 6, 2)] {
        let src: Vec<f64> = random_f32(1, 1, h, w, 5).as_f32().unwrap().iter().map(|&v| v.into()).collect();
        for (a, b) in oracle_resize(&src, h, w, oh, ow).iter().zip(weighted_resize(&src, h, w, oh, ow)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
