mod common;

use common::checks;
use rlaug::fusion::{default_cycaug, FusionSchedule};
use rlaug::transforms::TransformSpec;
use rlaug::RngState;

#[test]
fn cycle_follows_index_formula() {
    checks::scheduler_contract(10_000, 1_000).unwrap();
}

#[test]
fn cycle_small_interval_trace() {
    let mut s = FusionSchedule::cycle(vec![TransformSpec::pad_crop(1), TransformSpec::cutout(1)], 3);
    let mut trace = vec![s.active_index()];
    for _ in 0..8 {
        s.tick(1).unwrap();
        trace.push(s.active_index());
    }
    assert_eq!(trace, [0, 0, 0, 1, 1, 1, 0, 0, 0]);
}

#[test]
fn apply_leaves_counter_untouched() {
    let mut s = default_cycaug(5);
    s.tick(7).unwrap();
    let batch = common::random_u8(2, 3, 16, 16, 1);
    let before = s.clone();
    s.apply(&batch, &RngState::new(0, 0)).unwrap();
    assert_eq!(s, before);
}

#[test]
fn sample_mix_and_single_op_contracts() {
    checks::fusion_distribution().unwrap();
}
