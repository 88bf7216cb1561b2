//! The individual verification checks.
//!
//! Conventions shared by every check: all randomness comes from
//! [`sample::substream`] keyed by a per-check id and the trial index, the
//! reported `observed` value is the worst case over all trials, and ratios
//! are normalized so that the certified inequality reads
//! `observed <= bound`. Checks that fold several inequalities into one
//! report use the normalized maximum with bound 1.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::flow::{self, FlowParams};
use crate::numfmt::fmt_f64;
use crate::space::{
    hausdorff_distance, hausdorff_points, lipschitz_bound, match_labels, separation,
    canonicalize, Config, FiniteSubset, Point,
};
use crate::verify::sample::{self, substream, SampleSpec};
use crate::verify::{fmt_config, fmt_points, fmt_subset, CheckReport, Extremum};
use crate::{Error, Result};

const ID_GRADIENT: u16 = 0;
const ID_MONOTONE: u16 = 1;
const ID_UPPER_GRADIENT: u16 = 2;
const ID_VELOCITY_SPEED: u16 = 3;
const ID_METRIC: u16 = 4;
const ID_SEPARATION: u16 = 5;
const ID_MATCHING: u16 = 6;
const ID_CANONICALIZE: u16 = 7;
const ID_CONVEXITY: u16 = 8;
const ID_BRACKET: u16 = 10;
const ID_DESCENT: u16 = 11;
const ID_DISPLACEMENT: u16 = 12;
const ID_IDENTITY: u16 = 13;
const ID_SPAN: u16 = 14;
const ID_ENUMERATION: u16 = 15;
const ID_EQUIVARIANCE: u16 = 16;
const ID_CONTRACTION: u16 = 17;
const ID_STABILITY: u16 = 18;
const ID_CASE2: u16 = 19;
const ID_LIPSCHITZ: u16 = 20;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn fmt_vec(v: &[f64]) -> String {
    let cs: Vec<String> = v.iter().map(|&c| fmt_f64(c)).collect();
    format!("({})", cs.join(", "))
}

/// Separation with the single-point convention: a singleton has no pair to
/// collide, so its separation is infinite.
fn subset_separation(s: &FiniteSubset) -> Result<f64> {
    if s.len() < 2 {
        Ok(f64::INFINITY)
    } else {
        separation(&s.to_config())
    }
}

/// Analytic gradient of the pair energy against central finite differences
/// with step 1e-6 times the separation. Sampled configurations keep a
/// separation of at least a tenth of the scale so the difference quotient
/// stays clear of both curvature and cancellation noise.
pub fn check_gradient(spec: &SampleSpec) -> Result<CheckReport> {
    spec.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_GRADIENT, trial as u64);
        let config =
            sample::sample_config(&mut rng, spec.n, spec.d, spec.scale, 0.1 * spec.scale);
        let rel = gradient_fd_relative_error(&config)?;
        worst.update(rel, || fmt_config(&config));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "gradient",
        observed,
        1e-6,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

fn gradient_fd_relative_error(config: &Config) -> Result<f64> {
    let grad = flow::pair_energy_gradient(config)?;
    let h = 1e-6 * separation(config)?;
    let mut coords: Vec<Vec<f64>> = config
        .points()
        .iter()
        .map(|p| p.coords().to_vec())
        .collect();
    let mut err2 = 0.0;
    let mut norm2 = 0.0;
    for i in 0..config.len() {
        for k in 0..config.dim() {
            let orig = coords[i][k];
            coords[i][k] = orig + h;
            let fp = flow::pair_energy(&Config::from_coords(coords.clone())?);
            coords[i][k] = orig - h;
            let fm = flow::pair_energy(&Config::from_coords(coords.clone())?);
            coords[i][k] = orig;
            let g = grad[i].coords()[k];
            let fd = (fp - fm) / (2.0 * h);
            err2 += (g - fd) * (g - fd);
            norm2 += g * g;
        }
    }
    // The gradient norm is at least sqrt(n(n-1)) off the diagonal, so the
    // denominator never degenerates.
    Ok((err2 / norm2).sqrt())
}

fn monotone_inner(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x / na - y / nb) * (x - y))
        .sum()
}

/// The unit-vector map is monotone, and the paired difference of unit
/// vectors contracts a separation vector at exactly rate 2: for w != 0,
/// <w/|w| - (-w)/|w|, -w> = -2|w|.
pub fn check_monotone_map(spec: &SampleSpec) -> Result<CheckReport> {
    spec.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_MONOTONE, trial as u64);
        let a = nonzero_vec(&mut rng, spec.d, spec.scale);
        let b = nonzero_vec(&mut rng, spec.d, spec.scale);
        let gap = -monotone_inner(&a, &b);
        worst.update(gap, || format!("a={} b={}", fmt_vec(&a), fmt_vec(&b)));
        // Exact pair identity with w = u1 - u2: the two antisymmetric unit
        // terms add up to -2|w| against w.
        let w = &a;
        let nw = norm(w);
        let ip: f64 = w.iter().map(|&x| (-2.0 * x / nw) * x).sum();
        let rel = (ip + 2.0 * nw).abs() / (2.0 * nw);
        worst.update(rel, || format!("w={}", fmt_vec(w)));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "monotone_map",
        observed,
        1e-12,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

fn nonzero_vec(rng: &mut impl Rng, d: usize, scale: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-scale..=scale)).collect();
        if norm(&v) > 1e-6 * scale {
            return v;
        }
    }
}

/// Total gradient norm never exceeds (n-1) sqrt(n).
pub fn check_upper_gradient(spec: &SampleSpec) -> Result<CheckReport> {
    spec.validate()?;
    let cap = (spec.n - 1) as f64 * (spec.n as f64).sqrt();
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_UPPER_GRADIENT, trial as u64);
        let config = sample::sample_config(&mut rng, spec.n, spec.d, spec.scale, 0.0);
        let grad = flow::pair_energy_gradient(&config)?;
        let total: f64 = grad
            .iter()
            .map(|p| p.coords().iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        worst.update(total / cap, || fmt_config(&config));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "upper_gradient",
        observed,
        1.0,
        1e-12,
        witness,
        spec.trials as u64,
    ))
}

/// Every point of the velocity field has norm at most n-1 (a sum of n-1
/// unit vectors).
pub fn check_velocity_speed(spec: &SampleSpec) -> Result<CheckReport> {
    spec.validate()?;
    let cap = (spec.n - 1) as f64;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_VELOCITY_SPEED, trial as u64);
        let config = sample::sample_config(&mut rng, spec.n, spec.d, spec.scale, 0.0);
        let vel = flow::flow_velocity(&config)?;
        let top = vel
            .iter()
            .map(|p| norm(p.coords()))
            .fold(0.0f64, f64::max);
        worst.update(top / cap, || fmt_config(&config));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "velocity_speed",
        observed,
        1.0,
        1e-12,
        witness,
        spec.trials as u64,
    ))
}

/// Metric axioms of the Hausdorff distance on random sets of mixed
/// cardinalities: exact symmetry and self-distance zero, nonnegativity,
/// and the triangle inequality within 1e-12 relative slack (normalized so
/// the observation is the triangle excess in units of that slack; hard
/// axiom violations report as 2).
pub fn check_metric_axioms(spec: &SampleSpec) -> Result<CheckReport> {
    spec.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_METRIC, trial as u64);
        let ca = rng.gen_range(1..=spec.n);
        let cb = rng.gen_range(1..=spec.n);
        let cc = rng.gen_range(1..=spec.n);
        let a = sample::sample_subset(&mut rng, ca, spec.d, spec.scale, 0.0);
        let b = sample::sample_subset(&mut rng, cb, spec.d, spec.scale, 0.0);
        let c = sample::sample_subset(&mut rng, cc, spec.d, spec.scale, 0.0);
        let dab = hausdorff_distance(&a, &b)?;
        let dba = hausdorff_distance(&b, &a)?;
        let dbc = hausdorff_distance(&b, &c)?;
        let dac = hausdorff_distance(&a, &c)?;
        let mut bad = 0.0f64;
        if dab.to_bits() != dba.to_bits() {
            bad = 2.0;
        }
        if !(dab >= 0.0) {
            bad = 2.0;
        }
        if hausdorff_distance(&a, &a)? != 0.0 {
            bad = 2.0;
        }
        if dab == 0.0 && a != b {
            bad = 2.0;
        }
        let excess = dac - (dab + dbc);
        let tri = excess / dac.max(f64::MIN_POSITIVE) / 1e-12;
        let v = bad.max(tri);
        worst.update(v, || {
            format!("a={} b={} c={}", fmt_subset(&a), fmt_subset(&b), fmt_subset(&c))
        });
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "metric_axioms",
        observed,
        1.0,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

/// Separation changes by at most twice the Hausdorff distance on
/// equal-cardinality pairs (alternating independent draws and matched
/// perturbations).
pub fn check_separation_lipschitz(spec: &SampleSpec) -> Result<CheckReport> {
    spec.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_SEPARATION, trial as u64);
        let card = rng.gen_range(2..=spec.n);
        let (a, b) = if trial % 2 == 0 {
            (
                sample::sample_subset(&mut rng, card, spec.d, spec.scale, 0.0),
                sample::sample_subset(&mut rng, card, spec.d, spec.scale, 0.0),
            )
        } else {
            sample::sample_perturbation_pair(&mut rng, card, spec.d, spec.scale, 0.2)
        };
        let rho = hausdorff_distance(&a, &b)?;
        if rho <= 1e-15 {
            continue;
        }
        let da = separation(&a.to_config())?;
        let db = separation(&b.to_config())?;
        let ratio = (da - db).abs() / (2.0 * rho);
        worst.update(ratio, || format!("a={} b={}", fmt_subset(&a), fmt_subset(&b)));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "separation_lipschitz",
        observed,
        1.0,
        1e-12,
        witness,
        spec.trials as u64,
    ))
}

/// Nearest-point label matching reproduces the brute-force minimax
/// assignment exactly on certifiable pairs (cardinality capped at 6 so the
/// factorial oracle stays cheap).
pub fn check_matching_minimax(spec: &SampleSpec) -> Result<CheckReport> {
    spec.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_MATCHING, trial as u64);
        let card = rng.gen_range(2..=spec.n.min(6));
        let (x, y) = sample::sample_perturbation_pair(&mut rng, card, spec.d, spec.scale, 0.2);
        let mut bad = 0.0f64;
        match match_labels(&x, &y) {
            Err(_) => bad = 2.0,
            Ok(m) => {
                let mut used = vec![false; card];
                let mut top = 0.0f64;
                for (i, &j) in m.permutation().iter().enumerate() {
                    if used[j] {
                        bad = 2.0;
                    }
                    used[j] = true;
                    top = top.max(dist_points(x.point(i), y.point(j)));
                }
                let rho = hausdorff_distance(&x, &y)?;
                if top.to_bits() != m.bound().to_bits()
                    || !(m.bound() <= rho)
                    || brute_minimax(&x, &y).to_bits() != m.bound().to_bits()
                {
                    bad = 2.0;
                }
            }
        }
        worst.update(bad, || format!("x={} y={}", fmt_subset(&x), fmt_subset(&y)));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "matching_minimax",
        observed,
        0.0,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

fn dist_points(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Minimum over all bijections of the maximal matched distance, by
/// exhaustive permutation enumeration.
fn brute_minimax(x: &FiniteSubset, y: &FiniteSubset) -> f64 {
    let n = x.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; n];
    let eval = |perm: &[usize], best: &mut f64| {
        let mut top = 0.0f64;
        for (i, &j) in perm.iter().enumerate() {
            top = top.max(dist_points(x.point(i), y.point(j)));
        }
        if top < *best {
            *best = top;
        }
    };
    eval(&perm, &mut best);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            eval(&perm, &mut best);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Merging by threshold is idempotent, and merged sets are separated
/// beyond the threshold.
pub fn check_canonicalize_idempotent(spec: &SampleSpec) -> Result<CheckReport> {
    spec.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_CANONICALIZE, trial as u64);
        let mut pts: Vec<Point> = (0..spec.n)
            .map(|_| sample::sample_point(&mut rng, spec.d, spec.scale))
            .collect();
        if trial % 4 == 0 {
            // Exact duplicate exercises the zero-tolerance path.
            pts.push(pts[0].clone());
        }
        let tol = match trial % 3 {
            0 => 0.0,
            1 => 0.1 * spec.scale,
            _ => 1.5 * spec.scale,
        };
        let c1 = canonicalize(&pts, tol)?;
        let c2 = canonicalize(c1.points(), tol)?;
        let mut bad = 0.0f64;
        if !bitwise_equal(&c1, &c2) {
            bad = 2.0;
        }
        if c1.len() >= 2 && !(separation(&c1.to_config())? > tol) {
            bad = 2.0;
        }
        worst.update(bad, || format!("points={} tol={}", fmt_points(&pts), fmt_f64(tol)));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "canonicalize_idempotent",
        observed,
        0.0,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

fn bitwise_equal(a: &FiniteSubset, b: &FiniteSubset) -> bool {
    a.len() == b.len()
        && a.points().iter().zip(b.points()).all(|(p, q)| {
            p.coords()
                .iter()
                .zip(q.coords())
                .all(|(x, y)| x.to_bits() == y.to_bits())
        })
}

/// Midpoint convexity of the pair energy: the energy of the coordinatewise
/// midpoint never exceeds the average energy by more than 1e-12.
pub fn check_convexity_midpoint(spec: &SampleSpec) -> Result<CheckReport> {
    spec.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_CONVEXITY, trial as u64);
        let x = sample::sample_config(&mut rng, spec.n, spec.d, spec.scale, 0.0);
        let y = sample::sample_config(&mut rng, spec.n, spec.d, spec.scale, 0.0);
        let mid: Vec<Vec<f64>> = x
            .points()
            .iter()
            .zip(y.points())
            .map(|(p, q)| {
                p.coords()
                    .iter()
                    .zip(q.coords())
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect()
            })
            .collect();
        let fmid = flow::pair_energy(&Config::from_coords(mid)?);
        let avg = 0.5 * (flow::pair_energy(&x) + flow::pair_energy(&y));
        worst.update(fmid - avg, || format!("x={} y={}", fmt_config(&x), fmt_config(&y)));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "convexity_midpoint",
        observed,
        1e-12,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

/// Closed-form collision times: two points meet at half their distance, a
/// symmetric collinear triple at half its gap, and an equilateral triangle
/// at a third of its side.
pub fn check_collision_oracles(params: &FlowParams) -> Result<CheckReport> {
    params.validate()?;
    let cases: [(Config, f64, &str); 3] = [
        (
            Config::from_coords(vec![vec![0.0, 0.0], vec![1.0, 0.0]])?,
            0.5,
            "two points at distance 1",
        ),
        (
            Config::from_coords(vec![vec![0.0], vec![1.0], vec![2.0]])?,
            0.5,
            "collinear triple 0,1,2",
        ),
        (
            Config::from_coords(vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.5, 3f64.sqrt() / 2.0],
            ])?,
            1.0 / 3.0,
            "unit equilateral triangle",
        ),
    ];
    let mut worst = Extremum::new();
    for (config, truth, label) in &cases {
        let trace = flow::integrate_to_collision(config, params)?;
        let rel = (trace.t_bracket.1 - truth).abs() / truth;
        worst.update(rel, || label.to_string());
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "collision_oracles",
        observed,
        1e-4,
        0.0,
        witness,
        3,
    ))
}

/// The measured collision-time bracket intersects the certified window
/// [sep/(2(n-1)), sep/2]; the observation is the worst normalized gap.
pub fn check_collision_bracket(spec: &SampleSpec, params: &FlowParams) -> Result<CheckReport> {
    spec.validate()?;
    params.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_BRACKET, trial as u64);
        let config = sample::sample_config(&mut rng, spec.n, spec.d, spec.scale, 0.0);
        let sep = separation(&config)?;
        let trace = flow::integrate_to_collision(&config, params)?;
        let lower = sep / (2.0 * (spec.n - 1) as f64);
        let upper = sep / 2.0;
        let gap = ((lower - trace.t_bracket.1) / upper).max((trace.t_bracket.0 - upper) / upper);
        worst.update(gap, || fmt_config(&config));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "collision_bracket",
        observed,
        1e-9,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

/// The initially-closest pair approaches at discrete slope at most
/// -2 + 1e-6 between consecutive recorded states, after deducting an
/// explicit machine-precision allowance. Storing a position update rounds
/// each coordinate to about an ulp, which perturbs a one-step secant by
/// roughly eps |u| / h; near the stopping threshold h shrinks to where
/// that floor towers over any honest slope tolerance. The deduction
/// 64 eps (1 + |u|) sqrt(d) / h is about ten times the constant measured
/// across n, d, scale, and step-safety regimes, and it stays below 1e-6
/// until the separation has decayed by about six orders of magnitude, so
/// the envelope is enforced wherever the secant is resolvable at all.
pub fn check_closest_pair_descent(spec: &SampleSpec, params: &FlowParams) -> Result<CheckReport> {
    spec.validate()?;
    params.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_DESCENT, trial as u64);
        let config = sample::sample_config(&mut rng, spec.n, spec.d, spec.scale, 0.0);
        let trace = flow::integrate_to_collision(&config, params)?;
        let first = &trace.states[0].config;
        let (mut bi, mut bj, mut bd) = (0usize, 1usize, f64::INFINITY);
        for i in 0..first.len() {
            for j in (i + 1)..first.len() {
                let d = dist_points(first.point(i), first.point(j));
                if d < bd {
                    (bi, bj, bd) = (i, j, d);
                }
            }
        }
        let dim_root = (config.dim() as f64).sqrt();
        for w in trace.states.windows(2) {
            let d0 = dist_points(w[0].config.point(bi), w[0].config.point(bj));
            let d1 = dist_points(w[1].config.point(bi), w[1].config.point(bj));
            let h = w[1].t - w[0].t;
            let slope = (d1 - d0) / h;
            let coord_scale = w[0]
                .config
                .point(bi)
                .iter()
                .chain(w[0].config.point(bj))
                .fold(0.0f64, |m, &c| m.max(c.abs()));
            let noise = 64.0 * f64::EPSILON * (1.0 + coord_scale) * dim_root / h;
            worst.update(slope + 2.0 - noise, || {
                format!("{} at t={}", fmt_config(&config), fmt_f64(w[0].t))
            });
        }
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "closest_pair_descent",
        observed,
        1e-6,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

/// One retraction step moves a set by at most (n-1)/2 times its
/// separation.
pub fn check_displacement_bound(spec: &SampleSpec, params: &FlowParams) -> Result<CheckReport> {
    spec.validate()?;
    params.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_DISPLACEMENT, trial as u64);
        let a = sample::sample_subset(&mut rng, spec.n, spec.d, spec.scale, 0.0);
        let sep = separation(&a.to_config())?;
        let r = flow::retract_once(&a, spec.n, params)?;
        let moved = hausdorff_distance(&r.output, &a)?;
        let cap = (spec.n - 1) as f64 / 2.0 * sep;
        worst.update(moved / cap, || fmt_subset(&a));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "displacement_bound",
        observed,
        1.0,
        1e-6,
        witness,
        spec.trials as u64,
    ))
}

/// Sets already below the ambient cardinality pass through the retraction
/// bit for bit, with zero time and zero displacement bound.
pub fn check_identity_below_ambient(
    spec: &SampleSpec,
    params: &FlowParams,
) -> Result<CheckReport> {
    spec.validate()?;
    params.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_IDENTITY, trial as u64);
        let card = 1 + trial % (spec.n - 1).max(1);
        let a = sample::sample_subset(&mut rng, card, spec.d, spec.scale, 0.0);
        let r = flow::retract_once(&a, spec.n, params)?;
        let ok = bitwise_equal(&r.output, &a)
            && r.t_estimate == 0.0
            && r.displacement_bound == 0.0
            && r.steps == 0;
        worst.update(if ok { 0.0 } else { 2.0 }, || fmt_subset(&a));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "identity_below_ambient",
        observed,
        0.0,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

/// Trajectories started in a plane stay in it: initial points are drawn in
/// a random 2-dimensional subspace of R^5 and the recorded states are
/// projected back; the observation is the largest orthogonal residual.
pub fn check_span_invariance(spec: &SampleSpec, params: &FlowParams) -> Result<CheckReport> {
    spec.validate()?;
    params.validate()?;
    let ambient = 5usize;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_SPAN, trial as u64);
        let basis = sample::sample_orthonormal(&mut rng, ambient, 2);
        let plane = sample::sample_config(&mut rng, spec.n, 2, spec.scale, 0.01 * spec.scale);
        let coords: Vec<Vec<f64>> = plane
            .points()
            .iter()
            .map(|p| {
                let (a, c) = (p.coords()[0], p.coords()[1]);
                (0..ambient)
                    .map(|k| a * basis[0][k] + c * basis[1][k])
                    .collect()
            })
            .collect();
        let config = Config::from_coords(coords)?;
        let trace = flow::integrate_to_collision(&config, params)?;
        for state in &trace.states {
            for p in state.config.points() {
                let u = p.coords();
                let p0: f64 = u.iter().zip(&basis[0]).map(|(x, e)| x * e).sum();
                let p1: f64 = u.iter().zip(&basis[1]).map(|(x, e)| x * e).sum();
                let residual = (0..ambient)
                    .map(|k| {
                        let r = u[k] - p0 * basis[0][k] - p1 * basis[1][k];
                        r * r
                    })
                    .sum::<f64>()
                    .sqrt();
                worst.update(residual, || {
                    format!("plane={} at t={}", fmt_config(&plane), fmt_f64(state.t))
                });
            }
        }
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "span_invariance",
        observed,
        1e-9,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

/// Retraction output does not depend on the order points are supplied in.
/// The set representation sorts its points, so the outputs must agree bit
/// for bit; the observation is the largest coordinate deviation.
pub fn check_enumeration_invariance(
    spec: &SampleSpec,
    params: &FlowParams,
) -> Result<CheckReport> {
    spec.validate()?;
    params.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_ENUMERATION, trial as u64);
        let a = sample::sample_subset(&mut rng, spec.n, spec.d, spec.scale, 0.01 * spec.scale);
        let mut shuffled = a.points().to_vec();
        shuffled.shuffle(&mut rng);
        let b = FiniteSubset::new(shuffled)?;
        let ra = flow::retract_once(&a, spec.n, params)?;
        let rb = flow::retract_once(&b, spec.n, params)?;
        let dev = if ra.output.len() == rb.output.len() {
            ra.output
                .points()
                .iter()
                .zip(rb.output.points())
                .flat_map(|(p, q)| {
                    p.coords()
                        .iter()
                        .zip(q.coords())
                        .map(|(x, y)| (x - y).abs())
                })
                .fold(0.0f64, f64::max)
        } else {
            2.0
        };
        worst.update(dev, || fmt_subset(&a));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "enumeration_invariance",
        observed,
        1e-12,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

/// The retraction commutes with rigid motions: retracting a rotated and
/// translated copy lands within 1e-9 Hausdorff distance of the rotated and
/// translated retraction.
pub fn check_rigid_motion_equivariance(
    spec: &SampleSpec,
    params: &FlowParams,
) -> Result<CheckReport> {
    spec.validate()?;
    params.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_EQUIVARIANCE, trial as u64);
        let a = sample::sample_subset(&mut rng, spec.n, spec.d, spec.scale, 0.01 * spec.scale);
        let q = sample::sample_orthonormal(&mut rng, spec.d, spec.d);
        let shift: Vec<f64> = (0..spec.d)
            .map(|_| rng.gen_range(-spec.scale..=spec.scale))
            .collect();
        let moved = FiniteSubset::new(apply_rigid(a.points(), &q, &shift))?;
        let r_moved = flow::retract_once(&moved, spec.n, params)?;
        let r_plain = flow::retract_once(&a, spec.n, params)?;
        let moved_r = FiniteSubset::new(apply_rigid(r_plain.output.points(), &q, &shift))?;
        let gap = hausdorff_distance(&r_moved.output, &moved_r)?;
        worst.update(gap, || fmt_subset(&a));
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "rigid_motion_equivariance",
        observed,
        1e-9,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

fn apply_rigid(points: &[Point], q: &[Vec<f64>], shift: &[f64]) -> Vec<Point> {
    points
        .iter()
        .map(|p| {
            let u = p.coords();
            let coords: Vec<f64> = q
                .iter()
                .zip(shift)
                .map(|(row, s)| row.iter().zip(u).map(|(a, x)| a * x).sum::<f64>() + s)
                .collect();
            Point::new(coords).expect("finite")
        })
        .collect()
}

/// Synchronized coupled flows never let the summed squared point gap grow:
/// the observation is the worst per-step relative increase of
/// sum_i |u_i - v_i|^2 along the shared time grid.
pub fn check_contraction(x: &Config, y: &Config, params: &FlowParams) -> Result<CheckReport> {
    let mut prev: Option<f64> = None;
    let mut worst = f64::NEG_INFINITY;
    flow::integrate_pair_observed(x, y, params, |_t, u, v| {
        let s: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        if let Some(p) = prev {
            let inc = if p > 0.0 {
                (s - p) / p
            } else if s > 0.0 {
                // A coupled gap appearing from identical states is a hard
                // violation; report it well above any tolerance.
                1.0
            } else {
                0.0
            };
            if inc > worst {
                worst = inc;
            }
        }
        prev = Some(s);
    })?;
    let observed = if worst == f64::NEG_INFINITY { 0.0 } else { worst };
    Ok(CheckReport::evaluate(
        "contraction",
        observed,
        1e-9,
        0.0,
        format!("x={} y={}", fmt_config(x), fmt_config(y)),
        1,
    ))
}

/// At every synchronized recorded time the Hausdorff distance of the two
/// evolving sets stays within sqrt(n) times the largest initial pointwise
/// gap.
pub fn check_stability_h(x: &Config, y: &Config, params: &FlowParams) -> Result<CheckReport> {
    let max0 = x
        .points()
        .iter()
        .zip(y.points())
        .map(|(p, q)| dist_points(p.coords(), q.coords()))
        .fold(0.0f64, f64::max);
    let denom = (x.len() as f64).sqrt() * max0;
    let (n, d) = (x.len(), x.dim());
    let mut worst = 0.0f64;
    flow::integrate_pair_observed(x, y, params, |_t, u, v| {
        let pu = unflatten_points(u, n, d);
        let pv = unflatten_points(v, n, d);
        let dh = hausdorff_points(&pu, &pv).expect("nonempty");
        let ratio = if denom > 0.0 { dh / denom } else { 0.0 };
        if ratio > worst {
            worst = ratio;
        }
    })?;
    Ok(CheckReport::evaluate(
        "hausdorff_stability",
        worst,
        1.0,
        1e-9,
        format!("x={} y={}", fmt_config(x), fmt_config(y)),
        1,
    ))
}

fn unflatten_points(flat: &[f64], n: usize, d: usize) -> Vec<Point> {
    (0..n)
        .map(|i| Point::new(flat[i * d..(i + 1) * d].to_vec()).expect("finite"))
        .collect()
}

/// Certificate for pairs whose labels match: with rho the Hausdorff
/// distance and z the later flow stopped at the earlier flow's stop time,
/// the retraction of the earlier set is within sqrt(n) rho of z, z has
/// separation at most 2 sqrt(n) rho, retracting z moves it at most
/// (n-1) sqrt(n) rho, and the two retractions end within n^(3/2) rho of
/// each other. Pairs without a certified matching report as trivially
/// passing Case 1 instances.
pub fn check_case2_certificate(
    x: &Config,
    y: &Config,
    params: &FlowParams,
) -> Result<CheckReport> {
    params.validate()?;
    let sx = FiniteSubset::new(x.points().to_vec())?;
    let sy = FiniteSubset::new(y.points().to_vec())?;
    let rho = hausdorff_distance(&sx, &sy)?;
    let name = "case2_certificate";
    if rho == 0.0 {
        return Ok(CheckReport::evaluate(
            name,
            0.0,
            1.0,
            1e-2,
            "identical sets".to_string(),
            1,
        ));
    }
    let matching = match match_labels(&sx, &sy) {
        Ok(m) => m,
        Err(Error::NoCertifiedMatching { .. }) | Err(Error::InvalidInput(_)) => {
            return Ok(CheckReport::evaluate(
                name,
                0.0,
                1.0,
                1e-2,
                "case 1 instance (no certified matching)".to_string(),
                1,
            ));
        }
        Err(e) => return Err(e),
    };
    let n = sx.len();
    let rx = flow::retract_once(&sx, n, params)?;
    let ry = flow::retract_once(&sy, n, params)?;
    // Run the flow that lives longer to the other one's stop time; the
    // matching orders its points against the earlier set's labels.
    let (a, b, r_a, r_b, perm) = if rx.t_estimate <= ry.t_estimate {
        (&sx, &sy, &rx, &ry, matching.permutation().to_vec())
    } else {
        let mut inv = vec![0usize; n];
        for (i, &j) in matching.permutation().iter().enumerate() {
            inv[j] = i;
        }
        (&sy, &sx, &ry, &rx, inv)
    };
    let matched_b: Vec<Point> = perm.iter().map(|&j| b.points()[j].clone()).collect();
    let z_config = flow::integrate_to_time(&Config::new(matched_b)?, r_a.t_stop, params)?;
    let z = FiniteSubset::new(z_config.points().to_vec())?;
    let _ = a;
    let nf = n as f64;
    let sqn = nf.sqrt();
    let r1 = hausdorff_distance(&r_a.output, &z)? / (sqn * rho);
    let r2 = if z.len() >= 2 {
        separation(&z.to_config())? / (2.0 * sqn * rho)
    } else {
        0.0
    };
    let rz = flow::retract_once(&z, n, params)?;
    let r3 = hausdorff_distance(&rz.output, &z)? / ((nf - 1.0) * sqn * rho);
    let r4 = hausdorff_distance(&r_a.output, &r_b.output)? / (nf * sqn * rho);
    let observed = r1.max(r2).max(r3).max(r4);
    let witness = format!(
        "slacks=({}, {}, {}, {}) x={} y={}",
        fmt_f64(r1),
        fmt_f64(r2),
        fmt_f64(r3),
        fmt_f64(r4),
        fmt_config(x),
        fmt_config(y)
    );
    Ok(CheckReport::evaluate(name, observed, 1.0, 1e-2, witness, 1))
}

/// Aggregated contraction check over sampled coupled pairs: exact
/// translates, matched perturbations, and independent draws.
pub(crate) fn suite_contraction(spec: &SampleSpec, params: &FlowParams) -> Result<CheckReport> {
    spec.validate()?;
    params.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_CONTRACTION, trial as u64);
        let (x, y) = sample_coupled_pair(&mut rng, spec, trial);
        let report = check_contraction(&x, &y, params)?;
        worst.update(report.observed, || report.witness.clone());
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "contraction",
        observed,
        1e-9,
        0.0,
        witness,
        spec.trials as u64,
    ))
}

/// Aggregated stability check over the same kinds of coupled pairs.
pub(crate) fn suite_stability(spec: &SampleSpec, params: &FlowParams) -> Result<CheckReport> {
    spec.validate()?;
    params.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_STABILITY, trial as u64);
        let (x, y) = sample_coupled_pair(&mut rng, spec, trial);
        let report = check_stability_h(&x, &y, params)?;
        worst.update(report.observed, || report.witness.clone());
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "hausdorff_stability",
        observed,
        1.0,
        1e-9,
        witness,
        spec.trials as u64,
    ))
}

/// Coupled pairs for the contraction and stability checks, cycling through
/// an exact translate, a matched perturbation, and an independent draw.
fn sample_coupled_pair(rng: &mut impl Rng, spec: &SampleSpec, trial: usize) -> (Config, Config) {
    let (n, d, scale) = (spec.n, spec.d, spec.scale);
    let x = sample::sample_config(rng, n, d, scale, 0.01 * scale);
    match trial % 3 {
        0 => {
            let shift: Vec<f64> = loop {
                let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-scale..=scale)).collect();
                if norm(&v) >= 0.01 * scale {
                    break v;
                }
            };
            let y: Vec<Vec<f64>> = x
                .points()
                .iter()
                .map(|p| p.coords().iter().zip(&shift).map(|(a, s)| a + s).collect())
                .collect();
            (x, Config::from_coords(y).expect("finite"))
        }
        1 => {
            let sep = separation(&x).expect("n >= 2");
            let sub = FiniteSubset::new(x.points().to_vec()).expect("distinct");
            let pts = sample::perturb_points(rng, &sub, 0.2 * sep);
            // Keep the original enumeration: perturb the sorted points and
            // pair them index by index.
            (sub.to_config(), Config::new(pts).expect("valid"))
        }
        _ => {
            let y = sample::sample_config(rng, n, d, scale, 0.01 * scale);
            (x, y)
        }
    }
}

/// Aggregated certificate check over matched perturbation pairs, which are
/// certifiable by construction.
pub(crate) fn suite_case2(spec: &SampleSpec, params: &FlowParams) -> Result<CheckReport> {
    spec.validate()?;
    params.validate()?;
    let mut worst = Extremum::new();
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_CASE2, trial as u64);
        let (x, y) =
            sample::sample_perturbation_pair(&mut rng, spec.n, spec.d, spec.scale, 0.2);
        let report = check_case2_certificate(&x.to_config(), &y.to_config(), params)?;
        worst.update(report.observed, || report.witness.clone());
    }
    let (observed, witness) = worst.finish();
    Ok(CheckReport::evaluate(
        "case2_certificate",
        observed,
        1.0,
        1e-2,
        witness,
        spec.trials as u64,
    ))
}

/// Raw output of the Lipschitz ratio scan.
#[derive(Clone, Debug)]
pub struct LipschitzScan {
    /// Largest d_H(r(x), r(y)) / d_H(x, y) among counted trials.
    pub max_ratio: f64,
    /// Trials whose separations satisfy sep(x) + sep(y) <= 4 d_H(x, y).
    pub case1_trials: u64,
    /// Counted trials in the complementary regime.
    pub case2_trials: u64,
    /// Trials with d_H(x, y) > 1e-9 (the rest are skipped as 0/0).
    pub counted_trials: u64,
    pub trials: u64,
    pub witness: String,
}

/// Samples pairs of sets in three regimes (independent draws with an
/// occasional reduced cardinality, matched perturbations, and near-merged
/// sets with a deliberately tiny separation), retracts both, and records
/// the worst ratio of output to input Hausdorff distance.
pub fn lipschitz_scan(spec: &SampleSpec, params: &FlowParams) -> Result<LipschitzScan> {
    spec.validate()?;
    params.validate()?;
    let (n, d, scale) = (spec.n, spec.d, spec.scale);
    let mut worst = Extremum::new();
    let (mut case1, mut case2, mut counted) = (0u64, 0u64, 0u64);
    for trial in 0..spec.trials {
        let mut rng = substream(spec.seed, ID_LIPSCHITZ, trial as u64);
        let (x, y) = match trial % 3 {
            0 => {
                let cy = if trial % 12 == 0 && n > 2 { n - 1 } else { n };
                (
                    sample::sample_subset(&mut rng, n, d, scale, 0.01 * scale),
                    sample::sample_subset(&mut rng, cy, d, scale, 0.01 * scale),
                )
            }
            1 => sample::sample_perturbation_pair(&mut rng, n, d, scale, 0.2),
            _ => (
                sample::sample_clustered(&mut rng, n, d, scale, 1e-3),
                sample::sample_clustered(&mut rng, n, d, scale, 1e-3),
            ),
        };
        let rho = hausdorff_distance(&x, &y)?;
        if rho <= 1e-9 {
            continue;
        }
        counted += 1;
        if subset_separation(&x)? + subset_separation(&y)? <= 4.0 * rho {
            case1 += 1;
        } else {
            case2 += 1;
        }
        let rx = flow::retract_once(&x, n, params)?;
        let ry = flow::retract_once(&y, n, params)?;
        let ratio = hausdorff_distance(&rx.output, &ry.output)? / rho;
        worst.update(ratio, || format!("x={} y={}", fmt_subset(&x), fmt_subset(&y)));
    }
    let (max_ratio, witness) = worst.finish();
    Ok(LipschitzScan {
        max_ratio,
        case1_trials: case1,
        case2_trials: case2,
        counted_trials: counted,
        trials: spec.trials as u64,
        witness,
    })
}

pub(crate) fn lipschitz_bound_report(scan: &LipschitzScan, spec: &SampleSpec) -> Result<CheckReport> {
    let bound = lipschitz_bound(spec.n)?;
    let witness = format!(
        "case1={} case2={} counted={} worst pair: {}",
        scan.case1_trials, scan.case2_trials, scan.counted_trials, scan.witness
    );
    Ok(CheckReport::evaluate(
        "lipschitz_bound",
        scan.max_ratio,
        bound,
        1e-2,
        witness,
        scan.trials,
    ))
}

/// The sampling regimes must exercise both separation regimes: at least a
/// tenth of the counted trials on each side of sep(x) + sep(y) = 4 rho.
pub(crate) fn lipschitz_coverage_report(scan: &LipschitzScan, spec: &SampleSpec) -> CheckReport {
    let counted = scan.counted_trials.max(1) as f64;
    let f1 = scan.case1_trials as f64 / counted;
    let f2 = scan.case2_trials as f64 / counted;
    let deficit = (0.1 - f1).max(0.1 - f2).max(0.0);
    let witness = format!(
        "case1={} case2={} counted={} of {}",
        scan.case1_trials, scan.case2_trials, scan.counted_trials, scan.trials
    );
    CheckReport::evaluate(
        "lipschitz_coverage",
        deficit,
        0.0,
        0.0,
        witness,
        spec.trials as u64,
    )
}

/// Worst retraction Lipschitz ratio against the certified constant
/// max(n^(3/2), 2n - 1).
pub fn check_lipschitz(spec: &SampleSpec, params: &FlowParams) -> Result<CheckReport> {
    let scan = lipschitz_scan(spec, params)?;
    lipschitz_bound_report(&scan, spec)
}
