use proptest::prelude::*;

use sise::data::{estimate_time_frame, CensoredInterval, CensoredSample};
use sise::inference::{bootstrap_bands, impute_event_time, BootstrapOptions};
use sise::npmle::GriddedDensity;
use sise::par::Execution;
use sise::pipeline::FitPipeline;
use sise::simbench::{simulate_cohort, ScenarioConfig};

fn density() -> impl Strategy<Value = GriddedDensity> {
    prop::collection::vec(0.0f64..2.0, 10..200)
        .prop_map(|mut v| {
            v[0] += 0.5;
            GriddedDensity::new(5.0, 0.1, v, 0.0).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn imputed_times_lie_inside_the_interval(g in density(), a in 0.0f64..1.0, w in 0.01f64..1.0) {
        let lo = g.grid_start + a * (g.grid_end() - g.grid_start);
        let hi = lo + w * (g.grid_end() - lo);
        prop_assume!(hi > lo);
        let x = impute_event_time(&CensoredInterval::new(lo, hi).unwrap(), &g, None).unwrap();
        prop_assert!(lo < x && x < hi);
    }

    #[test]
    fn imputation_follows_a_shift(g in density(), a in 0.0f64..0.8, w in 0.05f64..1.0, shift in 0.0f64..30.0) {
        let lo = g.grid_start + a * (g.grid_end() - g.grid_start);
        let hi = lo + w * (g.grid_end() - lo);
        let x = impute_event_time(&CensoredInterval::new(lo, hi).unwrap(), &g, None).unwrap();
        let moved = GriddedDensity::new(g.grid_start + shift, g.step, g.values.clone(), 0.0).unwrap();
        let y = impute_event_time(&CensoredInterval::new(lo + shift, hi + shift).unwrap(), &moved, None).unwrap();
        prop_assert!((y - x - shift).abs() < 1e-9);
    }
}

#[test]
fn bands_are_ordered_and_reproducible() {
    let cfg = ScenarioConfig::cell(60, 50.0, 1.0, 4, 1);
    let cohort = simulate_cohort(&cfg, 3).unwrap();
    let frame = estimate_time_frame(&cohort.records).unwrap();
    let pipeline = FitPipeline { step: 0.05, ..FitPipeline::default() };
    let opts = BootstrapOptions {
        replicates: 8,
        seed: 11,
        fixed_bandwidth: None,
        execution: Execution::Parallel,
    };
    let bands = bootstrap_bands(&cohort.sample(), &frame, &pipeline, &opts).unwrap();
    for b in [&bands.raw, &bands.smoothed] {
        assert!(b.lower.iter().zip(&b.upper).all(|(l, u)| l <= u));
        assert!(b.lower.iter().chain(&b.upper).all(|v| (0.0..=1.0).contains(v)));
    }
    let again = bootstrap_bands(&cohort.sample(), &frame, &pipeline, &BootstrapOptions { execution: Execution::Sequential, ..opts }).unwrap();
    assert_eq!(bands, again);
}

#[test]
fn fixed_bandwidth_is_used_for_every_resample() {
    let data: Vec<_> = [(1.0, 4.0), (2.0, 6.0), (3.0, 8.0), (5.0, 9.0), (0.0, 3.0)]
        .iter()
        .map(|&(l, r)| CensoredInterval::new(l, r).unwrap())
        .collect();
    let frame = sise::data::frame_from_intervals(&data).unwrap();
    let opts = BootstrapOptions {
        replicates: 5,
        seed: 1,
        fixed_bandwidth: Some(0.2),
        execution: Execution::Sequential,
    };
    let bands = bootstrap_bands(&CensoredSample::new(data), &frame, &FitPipeline::default(), &opts).unwrap();
    assert!(bands.bandwidths.iter().all(|&d| d == 0.2));
}
