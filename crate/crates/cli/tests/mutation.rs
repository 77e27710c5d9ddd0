//! Negative controls for the acceptance machinery: a deliberately wrong
//! constant must trip the ECDF criterion, and the cheap criteria must be
//! stable across seeds.

use brwlab::driver::{build_pool, mix_seed, replicate_rng};
use brwlab::verify::{self, VerifyContext};
use brwlab_core::sim::{simulate_replicate, SimCaps};
use brwlab_core::{Interval, OffspringDistribution, StepDistribution};
use rayon::prelude::*;

/// An ECDF check against a reference with the wrong cluster constant (r = 3
/// instead of 2) must fail at the acceptance tolerance.
#[test]
fn wrong_r_constant_breaks_the_maxima_criterion() {
    let offspring = OffspringDistribution::d_regular(2).unwrap();
    let step = StepDistribution::pareto(1.0, 1.0, 0.0, 1.0).unwrap();
    let pool = build_pool(0).unwrap();
    let seed = mix_seed(4242, 3);
    let reps: Vec<_> = pool.install(|| {
        (0..2_000u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = replicate_rng(seed, i);
                simulate_replicate(&offspring, &step, 12, 0.05, false, &SimCaps::default(), &mut rng)
                    .unwrap()
            })
            .collect()
    });
    let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
    let mut gap_right = 0.0f64;
    let mut gap_wrong = 0.0f64;
    for &x in &grid {
        let set = Interval::above(x).unwrap();
        let void = reps
            .iter()
            .filter(|r| r.positions.count(&set).unwrap() == 0)
            .count() as f64
            / reps.len() as f64;
        gap_right = gap_right.max((void - (-2.0 / x).exp()).abs());
        gap_wrong = gap_wrong.max((void - (-3.0 / x).exp()).abs());
    }
    assert!(gap_right <= 0.03, "true reference rejected: {gap_right}");
    assert!(gap_wrong > 0.03, "mutated reference not detected: {gap_wrong}");
}

/// The fast criteria must pass for every seed, not just the default one.
#[test]
fn fast_criteria_are_seed_stable() {
    for seed in [1u64, 7, 99, 20260810, u64::MAX / 3] {
        let ctx = VerifyContext {
            master_seed: seed,
            threads: 0,
            out_dir: None,
            config_hash: None,
        };
        for criterion in [
            verify::criterion_2,
            verify::criterion_4,
            verify::criterion_7,
            verify::criterion_9,
        ] {
            let outcome = criterion(&ctx).unwrap();
            assert!(outcome.passed, "seed {seed}: {outcome}");
        }
    }
}
