mod common;

use common::checks;
use proptest::prelude::*;
use rlaug::metrics::{hardness, iqm, pearson, ReturnSample};

fn returns() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..500.0, 1..40)
}

#[test]
fn hardness_identity_scale_and_iqm_example() {
    checks::hardness_basics().unwrap();
}

proptest! {
    #[test]
    fn hardness_is_scale_covariant(clean in returns(), aug in returns(), lambda in 1e-3f64..1e3) {
        let s = |v: &[f64], k: f64| ReturnSample::from_returns(v.iter().map(|x| x * k).collect()).unwrap();
        let a = hardness(&s(&clean, 1.0), &s(&aug, 1.0)).unwrap().ratio;
        let b = hardness(&s(&clean, lambda), &s(&aug, lambda)).unwrap().ratio;
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn iqm_is_permutation_invariant_and_bounded(xs in prop::collection::vec(-1e3f64..1e3, 1..60), seed in any::<u64>()) {
        let mut shuffled = xs.clone();
        rlaug::RngState::new(seed, 0).generator().shuffle(&mut shuffled);
        let v = iqm(&xs).unwrap();
        prop_assert_eq!(v, iqm(&shuffled).unwrap());
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo && v <= hi);
    }

    #[test]
    fn iqm_ignores_values_outside_middle_half(mut xs in prop::collection::vec(0.0f64..100.0, 8..40), bump in 1.0f64..1e6) {
        xs.sort_by(f64::total_cmp);
        // With eight or more values the 75th percentile never reads the top
        // rank, so a separated maximum lies outside the middle half.
        let last = xs.len() - 1;
        xs[last] = 200.0;
        let base = iqm(&xs).unwrap();
        xs[last] += bump;
        prop_assert_eq!(base, iqm(&xs).unwrap());
    }

    #[test]
    fn pearson_is_affine_invariant(
        pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..30),
        a in 0.01f64..100.0, b in -50.0f64..50.0, c in 0.01f64..100.0, d in -50.0f64..50.0,
    ) {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let Ok(r) = pearson(&xs, &ys) {
            prop_assert!((-1.0..=1.0).contains(&r));
            let xs2: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let ys2: Vec<f64> = ys.iter().map(|y| c * y + d).collect();
            prop_assert!((pearson(&xs2, &ys2).unwrap() - r).abs() < 1e-9);
        }
    }
}

#[test]
fn pearson_of_increasing_line_is_one() {
    let xs = [0.0, 2.0, 4.0, 8.0, 12.0];
    let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 0.05 * x).collect();
    assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
}
