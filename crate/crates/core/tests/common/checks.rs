//! Criterion checks shared by the focused integration tests and the
//! acceptance runner. Each returns a one-line summary on success.

use ndarray::{Array1, Array2};
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rlaug::fusion::{FusionSchedule, OrderMode};
use rlaug::metrics::{hardness, iqm, ReturnSample};
use rlaug::toyrl::{grad_check, pool_features, CheckBatch, Coverage, DotReacherEnv, EnvConfig, TinyPolicy};
use rlaug::transforms::{Diversity, TransformKind, TransformSpec};
use rlaug::{ImageBatch, RngState};

use super::{check_case, random_f32, random_u8, raw_case, Case};

pub type Outcome = Result<String, String>;

/// Runs `cases` randomized property cases for every operator.
pub fn property_suite(cases: u32) -> Outcome {
    let mut counts = Vec::new();
    for kind in TransformKind::ALL {
        let mut config = Config::with_cases(cases);
        config.failure_persistence = None;
        let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
        let ran = std::cell::Cell::new(0u32);
        runner
            .run(&raw_case(), |raw| {
                ran.set(ran.get() + 1);
                check_case(&Case::build(kind, raw)).map_err(TestCaseError::fail)
            })
            .map_err(|e| format!("{kind}: {e}"))?;
        if ran.get() < cases {
            return Err(format!("{kind}: only {} of {cases} cases ran", ran.get()));
        }
        counts.push(format!("{kind} {}", ran.get()));
    }
    Ok(format!("cases run: {}", counts.join(", ")))
}

/// Cycle over two ops ticked one step at a time.
pub fn scheduler_contract(total: u64, interval: u64) -> Outcome {
    let mut schedule = FusionSchedule::cycle(vec![TransformSpec::pad_crop(4), TransformSpec::rand_pad_resize(0, 16)], interval);
    let mut previous = schedule.active_index();
    let mut switches = 0;
    for step in 1..=total {
        schedule.tick(1).map_err(|e| e.to_string())?;
        let active = schedule.active_index();
        let want = ((step / interval) % 2) as usize;
        if active != want {
            return Err(format!("step {step}: active {active}, formula {want}"));
        }
        switches += usize::from(active != previous);
        previous = active;
    }
    let expected = (total / interval) as usize;
    if switches != expected {
        return Err(format!("{switches} switches, expected {expected}"));
    }
    Ok(format!("{total} ticks, {switches} switches"))
}

/// Sample frequencies, the Mix hull, and single-op equivalences.
pub fn fusion_distribution() -> Outcome {
    let ops = vec![TransformSpec::pad_crop(4), TransformSpec::rand_pad_resize(0, 16)];

    // Sample: each image equals one op applied alone on its own stream.
    let n = 10_000;
    let batch = random_u8(n, 1, 12, 12, 40);
    let rng = RngState::new(41, 0);
    let sampled = FusionSchedule::sample(ops.clone()).apply(&batch, &rng).map_err(|e| e.to_string())?;
    let alone: Vec<ImageBatch> = ops.iter().map(|op| op.apply(&batch, &rng).unwrap()).collect();
    let mut counts = [0.0f64; 2];
    for i in 0..n {
        let got = sampled.image(i);
        let hits: Vec<usize> = (0..2).filter(|&k| alone[k].image(i) == got).collect();
        match hits.len() {
            0 => return Err(format!("sampled image {i} matches no operator")),
            len => hits.iter().for_each(|&k| counts[k] += 1.0 / len as f64),
        }
    }
    let sigma = (n as f64 * 0.25).sqrt();
    for (k, &c) in counts.iter().enumerate() {
        let freq = c / n as f64;
        if (c - n as f64 / 2.0).abs() > 3.0 * sigma || !(0.47..=0.53).contains(&freq) {
            return Err(format!("op {k} chosen with frequency {freq:.4}"));
        }
    }

    // Mix: every pixel within the range of the copies that could be mixed.
    let mixed_ops = [TransformSpec::pad_crop(2),
        TransformSpec::rotate(30),
        TransformSpec::cutout(3),
        TransformSpec::translate_hd(2, Diversity::Unlimited)];
    let width = 3;
    for b in 0..100u64 {
        let batch = if b % 2 == 0 { random_u8(4, 3, 10, 10, b) } else { random_f32(4, 3, 10, 10, b) };
        let rng = RngState::new(b, 5);
        for ops in [&mixed_ops[..], &mixed_ops[1..2]] {
            let mixed = FusionSchedule::mix(ops.to_vec(), width, 0.5).apply(&batch, &rng).map_err(|e| e.to_string())?;
            let copies: Vec<ImageBatch> = ops
                .iter()
                .flat_map(|op| (0..width).map(|j| op.apply(&batch, &rng.offset(j as u64)).unwrap()))
                .collect();
            for i in 0..batch.n() {
                let out = mixed.image_unit(i);
                let imgs: Vec<Vec<f32>> = copies.iter().map(|c| c.image_unit(i)).collect();
                for (p, &v) in out.iter().enumerate() {
                    let lo = imgs.iter().map(|c| c[p]).fold(f32::INFINITY, f32::min);
                    let hi = imgs.iter().map(|c| c[p]).fold(f32::NEG_INFINITY, f32::max);
                    if v < lo || v > hi {
                        return Err(format!("mix pixel {p} of batch {b} image {i}: {v} outside [{lo}, {hi}]"));
                    }
                }
            }
        }
    }

    // Single-op schedules equal the op.
    let batch = random_u8(6, 3, 16, 16, 9);
    let rng = RngState::new(9, 1);
    for op in [TransformSpec::pad_crop(4), TransformSpec::rand_pad_resize(0, 16), TransformSpec::rotate(20)] {
        let direct = op.apply(&batch, &rng).unwrap();
        let schedules = [
            FusionSchedule::compose(vec![op.clone()], OrderMode::Fixed),
            FusionSchedule::compose(vec![op.clone()], OrderMode::Shuffled),
            FusionSchedule::sample(vec![op.clone()]),
            FusionSchedule::mix(vec![op.clone()], 1, 1.0),
            FusionSchedule::cycle(vec![op.clone()], 7),
        ];
        for s in schedules {
            if s.apply(&batch, &rng).map_err(|e| e.to_string())? != direct {
                return Err(format!("{:?} over {} differs from the op", s.scheme, op.op));
            }
        }
    }
    Ok(format!(
        "sample frequencies {:.4}/{:.4}; mix hull on 100 batches; single-op schedules exact",
        counts[0] / n as f64,
        counts[1] / n as f64
    ))
}

/// Identity, scale covariance, and the IQM worked example.
pub fn hardness_basics() -> Outcome {
    let mut g = RngState::new(77, 0).generator();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let clean: Vec<f64> = (0..20).map(|_| g.uniform_range(1.0, 100.0)).collect();
        let aug: Vec<f64> = (0..20).map(|_| g.uniform_range(1.0, 100.0)).collect();
        let sample = |v: &[f64]| ReturnSample::from_returns(v.to_vec()).unwrap();
        let same = hardness(&sample(&clean), &sample(&clean)).unwrap().ratio;
        if same != 1.0 {
            return Err(format!("hardness(x, x) = {same}"));
        }
        let base = hardness(&sample(&clean), &sample(&aug)).unwrap().ratio;
        let lambda = g.uniform_range(0.01, 100.0);
        let scale = |v: &[f64]| v.iter().map(|x| x * lambda).collect::<Vec<_>>();
        let scaled = hardness(&sample(&scale(&clean)), &sample(&scale(&aug))).unwrap().ratio;
        worst = worst.max((scaled - base).abs());
    }
    if worst > 1e-12 {
        return Err(format!("scale covariance error {worst:e}"));
    }
    let v = iqm(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
    if v != 4.5 {
        return Err(format!("iqm([1..8]) = {v}"));
    }
    Ok(format!("hardness(x,x)=1; scale error {worst:.1e}; iqm([1..8])={v}"))
}

/// Analytic vs central-difference gradients of the full network on
/// `batches` random batches of up to four rendered frames.
pub fn gradient_check(batches: u64) -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for b in 0..batches {
        let mut g = RngState::new(b, 0x6AD).generator();
        let n = 1 + g.below(4) as usize;
        let frames: Vec<ImageBatch> = (0..n)
            .map(|k| DotReacherEnv::new(EnvConfig::shaped(), RngState::new(b, k as u64)).reset())
            .collect();
        let features = pool_features(&ImageBatch::stack(&frames).unwrap()).unwrap().mapv(f64::from);
        let policy = TinyPolicy::new(features.ncols(), 1e-4, 1e-3, &mut g);
        let batch = CheckBatch {
            features,
            actions: Array2::from_shape_fn((n, 2), |_| g.uniform_range(-1.0, 1.0)),
            targets: Array1::from_shape_fn(n, |_| g.uniform_range(0.0, 3.0)),
        };
        let report = grad_check(&policy, &batch, Coverage::PerTensor(24), &mut g);
        worst = worst.max(report.max_rel_error());
        checked += report.checked;
    }
    if worst >= 1e-4 {
        return Err(format!("max relative error {worst:.3e}"));
    }
    Ok(format!("max relative error {worst:.2e} over {checked} parameters"))
}
