//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 1 4 10`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sise::bandwidth::optimize_bandwidth;
use sise::data::{estimate_time_frame, CensoredInterval, TimeFrame};
use sise::inference::{bootstrap_bands, impute_event_time, BootstrapOptions};
use sise::npmle::{
    grid_to_survival, km_fit, step_to_grid, turnbull_fit, turnbull_fit_traced, EmOptions, GriddedDensity,
};
use sise::par::{derive_seed, Execution};
use sise::pipeline::FitPipeline;
use sise::simbench::{rise, rise_values, run_scenario, simulate_cohort, Preset, ScenarioConfig};
use sise::smoothing::{count_turning_points, evaluate_bandwidth, nw_smooth, PenaltyContext, PenaltyKind};

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn four_intervals() -> Vec<CensoredInterval> {
    [(38.0, 60.0), (41.0, 48.0), (62.0, f64::INFINITY), (0.0, 36.0)]
        .iter()
        .map(|&(l, r)| CensoredInterval::new(l, r).unwrap())
        .collect()
}

/// One plain self-consistency update, written out independently of the library.
fn em_residual(data: &[CensoredInterval], support: &[(f64, f64)], masses: &[f64]) -> f64 {
    let inside = |iv: &CensoredInterval, s: &(f64, f64)| iv.left <= s.0 && s.1 <= iv.right;
    let n = data.len() as f64;
    let mut updated = vec![0.0; masses.len()];
    for iv in data {
        let denom: f64 = support
            .iter()
            .zip(masses)
            .filter(|(s, _)| inside(iv, s))
            .map(|(_, m)| m)
            .sum();
        for (k, s) in support.iter().enumerate() {
            if inside(iv, s) {
                updated[k] += masses[k] / denom / n;
            }
        }
    }
    updated
        .iter()
        .zip(masses)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let data = four_intervals();
    let frame = TimeFrame::new(35.0, 70.0).unwrap();
    let t = Instant::now();
    let est = turnbull_fit(&data, &frame, EmOptions::default()).unwrap();
    let elapsed = t.elapsed();
    let expected = [((0.0, 36.0), 0.25), ((41.0, 48.0), 0.5), ((62.0, f64::INFINITY), 0.25)];
    let support: Vec<(f64, f64)> = est.support.iter().map(|s| (s.left, s.right)).collect();
    let shape_ok = support.len() == 3 && expected.iter().zip(&support).all(|((s, _), got)| s == got);
    let max_err = expected
        .iter()
        .zip(&est.masses)
        .map(|((_, m), got)| (m - got).abs())
        .fold(0.0, f64::max);
    let residual = em_residual(&data, &support, &est.masses);
    Outcome::new(
        shape_ok && max_err < 1e-8 && residual < 1e-8 && elapsed < Duration::from_millis(100),
        format!("max mass error {max_err:.1e}, residual {residual:.1e}, {elapsed:?}"),
    )
}

fn random_exact_censored(rng: &mut ChaCha8Rng) -> Vec<(f64, bool)> {
    let n = rng.gen_range(5..=200);
    (0..n)
        .map(|_| {
            // integer times force ties between events and censorings
            let t = rng.gen_range(1..60) as f64;
            (t, rng.gen_bool(0.6))
        })
        .collect()
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = EmOptions {
        tolerance: 1e-15,
        max_iter: 1_000_000,
    };
    let mut worst = 0.0_f64;
    let mut datasets = 0;
    while datasets < 50 {
        let obs = random_exact_censored(&mut rng);
        if !obs.iter().any(|o| o.1) {
            continue;
        }
        datasets += 1;
        let frame = TimeFrame::new(0.0, 60.0).unwrap();
        let km = km_fit(&obs, &frame).unwrap();
        let data: Vec<CensoredInterval> = obs
            .iter()
            .map(|&(t, e)| {
                if e {
                    CensoredInterval::exact(t).unwrap()
                } else {
                    CensoredInterval::right_censored(t).unwrap()
                }
            })
            .collect();
        let tb = turnbull_fit(&data, &frame, opts).unwrap();
        for &(t, e) in &obs {
            if e {
                worst = worst.max((km.survival_at(t) - tb.survival_at(t)).abs());
            }
        }
    }
    Outcome::new(worst < 1e-10, format!("max survival gap {worst:.1e} over 50 datasets"))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0_f64;
    let mut iterations = 0;
    for k in 0..50u64 {
        let cfg = ScenarioConfig::cell(20 + 4 * k as usize, 40.0 + (k % 3) as f64 * 10.0, 0.5 + 0.01 * k as f64, 2 + (k % 5) as usize, 1);
        let cohort = simulate_cohort(&cfg, 1000 + k).unwrap();
        let frame = estimate_time_frame(&cohort.records).unwrap();
        let (_, trace) = turnbull_fit_traced(&cohort.intervals, &frame, EmOptions::default()).unwrap();
        iterations += trace.len();
        for w in trace.windows(2) {
            worst = worst.max(w[0] - w[1]);
        }
    }
    Outcome::new(
        worst <= 1e-12,
        format!("largest decrease {worst:.1e} across {iterations} iterations"),
    )
}

fn s1_dataset(seed: u64) -> (Vec<CensoredInterval>, TimeFrame, f64) {
    let cfg = ScenarioConfig::cell(100, 50.0, 1.0, 6, 1);
    let c = simulate_cohort(&cfg, seed).unwrap();
    let frame = estimate_time_frame(&c.records).unwrap();
    let obs = c.observation_counts.iter().sum::<usize>() as f64;
    (c.intervals, frame, obs)
}

fn raw_and_penalty(data: &[CensoredInterval], frame: &TimeFrame, obs: f64) -> (GriddedDensity, PenaltyContext) {
    let est = turnbull_fit(data, frame, EmOptions::default()).unwrap();
    let raw = step_to_grid(&est, frame, 0.01).unwrap();
    let penalty = PenaltyContext::new(PenaltyKind::EquivalentSampleSize, data, Some(obs), &grid_to_survival(&raw)).unwrap();
    (raw, penalty)
}

fn criterion_4() -> Outcome {
    let (data, frame, obs) = s1_dataset(4);
    let (raw, penalty) = raw_and_penalty(&data, &frame, obs);
    let upper = frame.right * 0.01;
    let reports: Vec<_> = (0..20)
        .map(|i| {
            let d = upper * i as f64 / 19.0;
            evaluate_bandwidth(&data, &nw_smooth(&raw, d).unwrap(), &penalty).unwrap()
        })
        .collect();
    let pairs = reports.len() - 1;
    let lnl_ok = reports
        .windows(2)
        .filter(|w| -2.0 * w[1].log_likelihood >= -2.0 * w[0].log_likelihood)
        .count();
    let kt_ok = reports.windows(2).filter(|w| w[1].turning_points <= w[0].turning_points).count();
    let need = (0.9 * pairs as f64).ceil() as usize;
    Outcome::new(
        lnl_ok >= need && kt_ok >= need,
        format!("-2lnL non-decreasing {lnl_ok}/{pairs}, k_T non-increasing {kt_ok}/{pairs}"),
    )
}

fn criterion_5() -> Outcome {
    let mut worst_gap = f64::NEG_INFINITY;
    let mut never_worse = true;
    for seed in 0..10 {
        let (data, frame, obs) = s1_dataset(500 + seed);
        let (raw, penalty) = raw_and_penalty(&data, &frame, obs);
        let pipeline = FitPipeline {
            seed,
            ..FitPipeline::default()
        };
        let cfg = pipeline.optimizer(&frame);
        let choice = optimize_bandwidth(&data, &raw, &penalty, &cfg, Execution::Parallel).unwrap();
        let grid_min = (0..200)
            .filter_map(|i| {
                let d = cfg.upper * i as f64 / 199.0;
                evaluate_bandwidth(&data, &nw_smooth(&raw, d).unwrap(), &penalty).ok()
            })
            .map(|r| r.bic_s)
            .fold(f64::INFINITY, f64::min);
        let at_zero = evaluate_bandwidth(&data, &raw, &penalty).unwrap().bic_s;
        worst_gap = worst_gap.max(choice.report.bic_s - grid_min);
        never_worse &= choice.report.bic_s <= at_zero;
    }
    Outcome::new(
        worst_gap <= 1e-2 && never_worse,
        format!("worst BIC_s(d*) - grid minimum {worst_gap:+.2e}, never above BIC_s(0): {never_worse}"),
    )
}

fn pct(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |v| format!("{:+.1}%", 100.0 * v))
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let report = run_scenario(&Preset::S1Desk.config(), Execution::Parallel).unwrap();
    let elapsed = t.elapsed();
    let med = |m: &str| report.change("tb", m).and_then(|c| c.median_change);
    let (rise, w, o) = (med("rise"), med("rmse_w"), med("rmse_o"));
    let pass = rise.is_some_and(|v| v < -0.05)
        && w.is_some_and(|v| v < 0.0)
        && o.is_some_and(|v| v < 0.0)
        && elapsed < Duration::from_secs(600);
    Outcome::new(
        pass,
        format!("median change ARISE {}, ARMSE_w {}, ARMSE_o {} in {elapsed:.1?}", pct(rise), pct(w), pct(o)),
    )
}

fn criterion_7() -> Outcome {
    let report = run_scenario(&ScenarioConfig::cell(50, 30.0, 0.1, 2, 30), Execution::Parallel).unwrap();
    let rise = report.change("tb", "rise").and_then(|c| c.median_change);
    Outcome::new(
        rise.is_some_and(|v| v <= 0.05),
        format!("median ARISE change {}", pct(rise)),
    )
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let report = run_scenario(&Preset::S3.config(), Execution::Parallel).unwrap();
    let elapsed = t.elapsed();
    let c = report.coverage.expect("bootstrap configured");
    let inside = |v: f64| (0.90..=1.0).contains(&v);
    Outcome::new(
        inside(c.mean_raw) && inside(c.mean_smoothed) && elapsed < Duration::from_secs(900),
        format!(
            "coverage raw {:.3} (sd {:.3}), smoothed {:.3} (sd {:.3}); whole grid {:.3} / {:.3}; {} resamples excluded; {elapsed:.1?}",
            c.mean_raw, c.sd_raw, c.mean_smoothed, c.sd_smoothed, c.mean_raw_full_grid, c.mean_smoothed_full_grid, c.excluded_replicates
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = ScenarioConfig::cell(100_000, 50.0, 1.0, 6, 1);
    let c = simulate_cohort(&cfg, 9).unwrap();
    let n = c.true_onsets.len() as f64;
    let mean = c.true_onsets.iter().sum::<f64>() / n;
    let sd = (c.true_onsets.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let bracketed = c
        .intervals
        .iter()
        .zip(&c.true_onsets)
        .all(|(iv, &x)| iv.left < x && x <= iv.right && (!iv.is_interval_censored(0.0) || x < iv.right));
    Outcome::new(
        (mean - 50.0).abs() <= 0.2 && (sd - 10.0).abs() <= 0.3 && bracketed,
        format!("mean {mean:.3}, sd {sd:.3}, all intervals bracket onsets: {bracketed}"),
    )
}

fn random_density(rng: &mut ChaCha8Rng) -> GriddedDensity {
    let n = rng.gen_range(3..400);
    let step = [0.01, 0.05, 0.1, 1.0][rng.gen_range(0..4)];
    let values: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..5.0) })
        .collect();
    let mut values = values;
    values[rng.gen_range(0..n)] += 1.0;
    GriddedDensity::new(rng.gen_range(0.0..50.0), step, values, 0.0).unwrap()
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = Vec::new();

    let mut worst_mass = 0.0_f64;
    let mut negative = false;
    let mut kt_scale = true;
    for _ in 0..1000 {
        let g = random_density(&mut rng);
        let d = rng.gen_range(0.0..20.0) * g.step;
        let s = nw_smooth(&g, d).unwrap();
        negative |= s.values.iter().any(|v| *v < 0.0);
        let mass = s.step * s.values.iter().sum::<f64>();
        let input = g.step * g.values.iter().sum::<f64>();
        worst_mass = worst_mass.max((mass - input).abs() / input);
        let c = rng.gen_range(1e-3..1e3);
        let scaled = GriddedDensity::new(g.grid_start, g.step, g.values.iter().map(|v| v * c).collect(), 0.0).unwrap();
        kt_scale &= count_turning_points(&g).unwrap() == count_turning_points(&scaled).unwrap();
    }
    if negative || worst_mass > 1e-12 {
        failures.push(format!("NW: negative {negative}, mass error {worst_mass:.1e}"));
    }
    if !kt_scale {
        failures.push("k_T not scale invariant".into());
    }

    let mut interior = true;
    let mut worst_shift = 0.0_f64;
    for _ in 0..500 {
        let g = random_density(&mut rng);
        let a = g.grid_start + rng.gen_range(0.0..0.9) * (g.grid_end() - g.grid_start);
        let b = a + rng.gen_range(0.01..1.0) * (g.grid_end() - a);
        let iv = CensoredInterval::new(a, b).unwrap();
        let x = impute_event_time(&iv, &g, None).unwrap();
        interior &= a < x && x < b;
        let shift = rng.gen_range(-10.0..10.0_f64).max(-g.grid_start);
        let moved = GriddedDensity::new(g.grid_start + shift, g.step, g.values.clone(), 0.0).unwrap();
        let iv2 = CensoredInterval::new(a + shift, b + shift).unwrap();
        let x2 = impute_event_time(&iv2, &moved, None).unwrap();
        worst_shift = worst_shift.max((x2 - x - shift).abs());
    }
    if !interior || worst_shift > 1e-9 {
        failures.push(format!("imputation: interior {interior}, shift error {worst_shift:.1e}"));
    }

    let truth: Vec<f64> = (0..50).map(|j| 1.0 - j as f64 / 50.0).collect();
    let offset: Vec<f64> = truth.iter().map(|s| s + 0.1).collect();
    let rise_ok = rise_values(&truth, &truth, 1.0).unwrap() == 0.0
        && (rise_values(&offset, &truth, 1.0).unwrap() - 0.1).abs() < 1e-12
        && (rise_values(&offset, &truth, 0.5).unwrap() - 0.2).abs() < 1e-12;
    if !rise_ok {
        failures.push("RISE identities".into());
    }

    let determinism = deterministic_pipelines();
    if let Err(e) = &determinism {
        failures.push(e.clone());
    }
    Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!("NW mass error {worst_mass:.1e}, shift error {worst_shift:.1e}, reruns byte-identical")
        } else {
            failures.join("; ")
        },
    )
}

fn deterministic_pipelines() -> Result<(), String> {
    let cfg = ScenarioConfig {
        delta_t: 0.05,
        ..ScenarioConfig::cell(60, 50.0, 0.8, 4, 3)
    };
    let a = serde_json::to_vec(&run_scenario(&cfg, Execution::Parallel).unwrap()).unwrap();
    let b = serde_json::to_vec(&run_scenario(&cfg, Execution::Sequential).unwrap()).unwrap();
    if a != b {
        return Err("scenario reruns differ".into());
    }
    let cohort = simulate_cohort(&cfg, 77).unwrap();
    if cohort != simulate_cohort(&cfg, 77).unwrap() {
        return Err("cohort reruns differ".into());
    }
    let frame = estimate_time_frame(&cohort.records).unwrap();
    let pipeline = FitPipeline {
        step: 0.05,
        seed: 3,
        ..FitPipeline::default()
    };
    let fit = |exec| {
        let p = FitPipeline { execution: exec, ..pipeline };
        let f = p.fit(&cohort.intervals, &frame, None).unwrap();
        serde_json::to_vec(&(f.choice.smoothed, f.choice.report)).unwrap()
    };
    if fit(Execution::Parallel) != fit(Execution::Sequential) {
        return Err("bandwidth optimization reruns differ".into());
    }
    let opts = BootstrapOptions {
        replicates: 4,
        seed: derive_seed(5, &[1]),
        fixed_bandwidth: None,
        execution: Execution::Parallel,
    };
    let b1 = bootstrap_bands(&cohort.sample(), &frame, &pipeline, &opts).unwrap();
    let b2 = bootstrap_bands(&cohort.sample(), &frame, &pipeline, &BootstrapOptions { execution: Execution::Sequential, ..opts }).unwrap();
    if serde_json::to_vec(&b1).unwrap() != serde_json::to_vec(&b2).unwrap() {
        return Err("bootstrap reruns differ".into());
    }
    let truth = |t: f64| 1.0 - t / 100.0;
    let s = grid_to_survival(&pipeline.fit(&cohort.intervals, &frame, None).unwrap().raw_grid);
    if rise(&s, truth, 1.0).unwrap() != rise(&s, truth, 1.0).unwrap() {
        return Err("RISE reruns differ".into());
    }
    Ok(())
}

fn main() {
    let criteria: [(u32, &str, Check); 10] = [
        (1, "Turnbull oracle on four reference intervals", criterion_1),
        (2, "Kaplan-Meier equivalence", criterion_2),
        (3, "EM monotonicity", criterion_3),
        (4, "likelihood and turning points along the bandwidth", criterion_4),
        (5, "optimizer against a 200-point grid", criterion_5),
        (6, "desk-scale S1 improvement", criterion_6),
        (7, "out-of-range design sanity", criterion_7),
        (8, "bootstrap coverage", criterion_8),
        (9, "simulation moments", criterion_9),
        (10, "property suites and determinism", criterion_10),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let outcome = check();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status}: {name}: {}", outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
