//! Acceptance gate: one test per shipped guarantee, each printing a
//! single pass/fail line with its measured margin before asserting.
//!
//! Tolerances and budgets are pinned here, in code, so a regression in
//! either the numerics or the performance envelope fails loudly.

use std::process::Command;
use std::time::{Duration, Instant};

use subsetflow::flow::{integrate_to_collision, retract_once, FlowParams};
use subsetflow::space::{hausdorff_distance, separation, Config, Point};
use subsetflow::verify::sample::{self, substream};
use subsetflow::verify::{
    check_case2_certificate, check_collision_oracles, check_contraction, check_counterexample,
    check_gradient, check_stability_h, check_upper_gradient, lipschitz_scan, SampleSpec,
};

fn report(idx: usize, label: &str, ok: bool, detail: &str) {
    println!(
        "criterion {idx:02} {label}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn spec(n: usize, d: usize, trials: usize, seed: u64) -> SampleSpec {
    SampleSpec {
        n,
        d,
        trials,
        seed,
        scale: 1.0,
    }
}

#[test]
fn criterion_01_gradient_matches_finite_differences() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let n = 2 + (trial % 5) as usize;
        let d = 1 + (trial % 8) as usize;
        let r = check_gradient(&spec(n, d, 1, 4101 + trial)).unwrap();
        worst = worst.max(r.observed);
    }
    let elapsed = started.elapsed();
    let ok = worst < 1e-6 && elapsed < Duration::from_secs(5);
    report(
        1,
        "gradient_finite_difference",
        ok,
        &format!("max rel err {worst:.3e}, {elapsed:.2?}"),
    );
    assert!(ok, "worst {worst:.3e}, elapsed {elapsed:?}");
}

#[test]
fn criterion_02_gradient_norm_cap() {
    let started = Instant::now();
    let mut worst_margin = 0.0f64;
    let mut ok = true;
    for n in 2..=6usize {
        for d in 1..=8usize {
            let r = check_upper_gradient(&spec(n, d, 250, 4202)).unwrap();
            let cap = (n - 1) as f64 * (n as f64).sqrt();
            ok &= r.observed <= cap * (1.0 + 1e-12);
            worst_margin = worst_margin.max(r.observed / cap);
        }
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(5);
    report(
        2,
        "gradient_norm_cap",
        ok,
        &format!("10000 configs, worst norm/cap {worst_margin:.6}, {elapsed:.2?}"),
    );
    assert!(ok, "worst norm/cap {worst_margin}, elapsed {elapsed:?}");
}

#[test]
fn criterion_03_collision_time_closed_forms() {
    let started = Instant::now();
    let r = check_collision_oracles(&FlowParams::default()).unwrap();
    let elapsed = started.elapsed();
    let ok = r.observed < 1e-4 && r.trials_run == 3 && elapsed < Duration::from_secs(1);
    report(
        3,
        "collision_time_closed_forms",
        ok,
        &format!("max rel err {:.3e}, {elapsed:.2?}", r.observed),
    );
    assert!(ok, "observed {}, elapsed {elapsed:?}", r.observed);
}

#[test]
fn criterion_04_collision_time_bracket() {
    let started = Instant::now();
    let params = FlowParams::default();
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..200u64 {
        let n = 2 + (trial % 4) as usize;
        let d = 1 + (trial % 3) as usize;
        let mut rng = substream(4304, 2004, trial);
        let config = sample::sample_config(&mut rng, n, d, 1.0, 0.0);
        let delta = separation(&config).unwrap();
        let trace = integrate_to_collision(&config, &params).unwrap();
        let (lo, hi) = trace.t_bracket;
        // Normalized deficit of intersecting [delta / (2(n-1)), delta / 2];
        // nonpositive means the intervals overlap. For n = 2 the window is
        // the single point delta / 2 and the bracket ends within ulps of
        // it, so exact comparison is meaningless; 1e-9 relative slack.
        let lower = delta / (2.0 * (n as f64 - 1.0));
        let upper = delta / 2.0;
        let gap = ((lower - hi) / upper).max((lo - upper) / upper);
        worst = worst.max(gap);
    }
    let elapsed = started.elapsed();
    let ok = worst <= 1e-9 && elapsed < Duration::from_secs(30);
    report(
        4,
        "collision_time_bracket",
        ok,
        &format!("200 configs, worst deficit {worst:.3e}, {elapsed:.2?}"),
    );
    assert!(ok, "worst deficit {worst:.3e}, elapsed {elapsed:?}");
}

#[test]
fn criterion_05_displacement_bound() {
    let started = Instant::now();
    let params = FlowParams::default();
    let mut worst = 0.0f64;
    for trial in 0..200u64 {
        let n = 2 + (trial % 5) as usize;
        let d = 1 + (trial % 3) as usize;
        let mut rng = substream(4405, 2005, trial);
        let a = sample::sample_subset(&mut rng, n, d, 1.0, 0.0);
        let delta = separation(&a.to_config()).unwrap();
        let r = retract_once(&a, n, &params).unwrap();
        let moved = hausdorff_distance(&r.output, &a).unwrap();
        worst = worst.max(moved / ((n as f64 - 1.0) / 2.0 * delta));
    }
    let elapsed = started.elapsed();
    let ok = worst <= 1.0 + 1e-6 && elapsed < Duration::from_secs(30);
    report(
        5,
        "displacement_bound",
        ok,
        &format!("200 configs, worst moved/bound {worst:.6}, {elapsed:.2?}"),
    );
    assert!(ok, "worst {worst}, elapsed {elapsed:?}");
}

/// The shared pair sampler for the two synchronized-flow criteria: exact
/// translates, small matched perturbations, and independent draws.
fn coupled_pair(seed: u64, trial: u64) -> (Config, Config) {
    let n = 2 + (trial % 4) as usize;
    let d = 1 + (trial % 3) as usize;
    let mut rng = substream(seed, 2006, trial);
    let x = sample::sample_config(&mut rng, n, d, 1.0, 1e-3);
    let y = match trial % 3 {
        0 => {
            let offset = sample::sample_point(&mut rng, d, 0.5);
            Config::new(
                x.points()
                    .iter()
                    .map(|p| {
                        Point::new(
                            p.coords()
                                .iter()
                                .zip(offset.coords())
                                .map(|(c, o)| c + o)
                                .collect(),
                        )
                        .unwrap()
                    })
                    .collect(),
            )
            .unwrap()
        }
        1 => {
            let radius = 0.1 * separation(&x).unwrap();
            Config::new(
                x.points()
                    .iter()
                    .map(|p| {
                        let jitter = sample::sample_point(&mut rng, d, radius);
                        Point::new(
                            p.coords()
                                .iter()
                                .zip(jitter.coords())
                                .map(|(c, j)| c + j)
                                .collect(),
                        )
                        .unwrap()
                    })
                    .collect(),
            )
            .unwrap()
        }
        _ => sample::sample_config(&mut rng, n, d, 1.0, 1e-3),
    };
    (x, y)
}

#[test]
fn criterion_06_coupled_flow_contraction() {
    let started = Instant::now();
    let params = FlowParams::default();
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..100u64 {
        let (x, y) = coupled_pair(4606, trial);
        let r = check_contraction(&x, &y, &params).unwrap();
        worst = worst.max(r.observed);
    }
    let elapsed = started.elapsed();
    let ok = worst <= 1e-9 && elapsed < Duration::from_secs(60);
    report(
        6,
        "coupled_flow_contraction",
        ok,
        &format!("100 pairs, worst step increase {worst:.3e}, {elapsed:.2?}"),
    );
    assert!(ok, "worst {worst:.3e}, elapsed {elapsed:?}");
}

#[test]
fn criterion_07_hausdorff_stability() {
    let started = Instant::now();
    let params = FlowParams::default();
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let (x, y) = coupled_pair(4606, trial);
        let r = check_stability_h(&x, &y, &params).unwrap();
        worst = worst.max(r.observed);
    }
    let elapsed = started.elapsed();
    let ok = worst <= 1.0 + 1e-9 && elapsed < Duration::from_secs(60);
    report(
        7,
        "hausdorff_stability",
        ok,
        &format!("100 pairs, worst ratio {worst:.9}, {elapsed:.2?}"),
    );
    assert!(ok, "worst {worst}, elapsed {elapsed:?}");
}

#[test]
fn criterion_08_lipschitz_ratio_cap() {
    let started = Instant::now();
    let params = FlowParams::default();
    let mut ok = true;
    let mut detail = String::new();
    for n in 2..=5usize {
        let cap = (n as f64).powf(1.5).max(2.0 * n as f64 - 1.0);
        let mut max_ratio = 0.0f64;
        let (mut case1, mut case2, mut counted) = (0u64, 0u64, 0u64);
        for d in 1..=3usize {
            let scan = lipschitz_scan(&spec(n, d, 3334, 4808), &params).unwrap();
            max_ratio = max_ratio.max(scan.max_ratio);
            case1 += scan.case1_trials;
            case2 += scan.case2_trials;
            counted += scan.counted_trials;
        }
        ok &= max_ratio <= cap * 1.01;
        // Stratification: both separation regimes must carry real weight.
        ok &= case1 * 10 >= counted && case2 * 10 >= counted;
        detail.push_str(&format!("n={n} max {max_ratio:.4} cap {cap:.4}; "));
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(600);
    report(
        8,
        "lipschitz_ratio_cap",
        ok,
        &format!("{detail}{elapsed:.2?}"),
    );
    assert!(ok, "{detail}elapsed {elapsed:?}");
}

#[test]
fn criterion_09_matched_pair_certificate() {
    let started = Instant::now();
    let params = FlowParams::default();
    let mut worst = 0.0f64;
    let mut genuine = 0usize;
    for trial in 0..200u64 {
        let n = 2 + (trial % 4) as usize;
        let d = 1 + (trial % 3) as usize;
        let mut rng = substream(4909, 2009, trial);
        let (x, y) = sample::sample_perturbation_pair(&mut rng, n, d, 1.0, 0.2);
        let r = check_case2_certificate(&x.to_config(), &y.to_config(), &params).unwrap();
        if r.witness.starts_with("slacks=") {
            genuine += 1;
        }
        worst = worst.max(r.observed);
    }
    let elapsed = started.elapsed();
    let ok = worst <= 1.0 + 1e-2 && genuine == 200 && elapsed < Duration::from_secs(60);
    report(
        9,
        "matched_pair_certificate",
        ok,
        &format!("200 pairs ({genuine} certified), worst slack {worst:.6}, {elapsed:.2?}"),
    );
    assert!(ok, "worst {worst}, genuine {genuine}, elapsed {elapsed:?}");
}

#[test]
fn criterion_10_forced_image_counterexample() {
    let started = Instant::now();
    let r = check_counterexample(0.01).unwrap();
    let elapsed = started.elapsed();
    let ok = r.passed && r.observed <= 1.0 && elapsed < Duration::from_secs(60);
    report(
        10,
        "forced_image_counterexample",
        ok,
        &format!(
            "grid 0.01, worst normalized slack {:.6}, {elapsed:.2?}",
            r.observed
        ),
    );
    assert!(ok, "observed {}, elapsed {elapsed:?}", r.observed);
}

#[test]
fn criterion_11_identity_below_ambient_cardinality() {
    let started = Instant::now();
    let params = FlowParams::default();
    let mut exact = 0usize;
    for trial in 0..100u64 {
        let n = 3 + (trial % 4) as usize;
        let d = 1 + (trial % 3) as usize;
        let card = 1 + (trial as usize) % (n - 1);
        let mut rng = substream(5011, 2011, trial);
        let a = sample::sample_subset(&mut rng, card, d, 1.0, 0.0);
        let r = retract_once(&a, n, &params).unwrap();
        let bitwise = r.output.len() == a.len()
            && r.output
                .points()
                .iter()
                .zip(a.points())
                .all(|(p, q)| {
                    p.coords()
                        .iter()
                        .zip(q.coords())
                        .all(|(x, y)| x.to_bits() == y.to_bits())
                });
        if bitwise && r.t_estimate == 0.0 && r.displacement_bound == 0.0 && r.steps == 0 {
            exact += 1;
        }
    }
    let elapsed = started.elapsed();
    let ok = exact == 100;
    report(
        11,
        "identity_below_ambient_cardinality",
        ok,
        &format!("{exact}/100 bit-identical, {elapsed:.2?}"),
    );
    assert!(ok, "{exact}/100");
}

#[test]
fn criterion_12_verify_report_determinism() {
    let started = Instant::now();
    let exe = env!("CARGO_BIN_EXE_subsetflow");
    let run = || {
        Command::new(exe)
            .args([
                "verify", "--n", "3", "--dim", "2", "--trials", "1000", "--seed", "42",
            ])
            .output()
            .expect("binary runs")
    };
    let first = run();
    let second = run();
    let elapsed = started.elapsed();
    let ok = first.status.code() == Some(0)
        && second.status.code() == Some(0)
        && !first.stdout.is_empty()
        && first.stdout == second.stdout;
    report(
        12,
        "verify_report_determinism",
        ok,
        &format!("{} bytes, two runs identical, {elapsed:.2?}", first.stdout.len()),
    );
    assert!(ok, "statuses {:?}/{:?}", first.status, second.status);
}

#[test]
fn criterion_13_retraction_speed() {
    let mut rng = substream(5113, 2013, 0);
    let a = sample::sample_subset(&mut rng, 10, 100, 1.0, 1e-3);
    let params = FlowParams::default();
    let started = Instant::now();
    let r = retract_once(&a, 10, &params).unwrap();
    let elapsed = started.elapsed();
    let ok = elapsed < Duration::from_secs(1) && r.output.len() < 10;
    report(
        13,
        "retraction_speed",
        ok,
        &format!("n=10 d=100, {} steps, {elapsed:.2?}", r.steps),
    );
    assert!(ok, "elapsed {elapsed:?}");
}
