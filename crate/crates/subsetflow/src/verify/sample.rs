//! Seeded sampling with per-trial substreams.
//!
//! Every random draw in the harness comes from a ChaCha stream addressed by
//! (master seed, check id, trial index): the check id sits in the high bits
//! of the stream counter, the trial in the low bits. Trials are therefore
//! independent of execution order and the whole harness is reproducible from
//! the master seed alone.

use crate::space::{separation, Config, FiniteSubset, Point};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sampling plan for one verification check.
#[derive(Clone, Debug)]
pub struct SampleSpec {
    /// Cardinality of sampled configurations (n >= 2).
    pub n: usize,
    /// Ambient dimension (d >= 1).
    pub d: usize,
    /// Number of trials.
    pub trials: usize,
    /// Master seed; all randomness flows from it.
    pub seed: u64,
    /// Coordinates are uniform in [-scale, scale].
    pub scale: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            n: 3,
            d: 2,
            trials: 1000,
            seed: 42,
            scale: 1.0,
        }
    }
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput(format!("need n >= 2, got {}", self.n)));
        }
        if self.d == 0 {
            return Err(Error::InvalidInput("need d >= 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("need at least one trial".into()));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::InvalidInput(format!(
                "scale must be positive and finite, got {}",
                self.scale
            )));
        }
        Ok(())
    }
}

/// Independent generator for (check, trial).
pub fn substream(seed: u64, check: u16, trial: u64) -> ChaCha8Rng {
    debug_assert!(trial < 1 << 48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((check as u64) << 48) | trial);
    rng
}

pub fn sample_point(rng: &mut impl Rng, d: usize, scale: f64) -> Point {
    Point::new((0..d).map(|_| rng.gen_range(-scale..=scale)).collect()).expect("finite")
}

/// A configuration of n points with separation at least `min_sep`
/// (draws are rejected and redrawn; an exactly diagonal draw never
/// survives even with min_sep = 0).
pub fn sample_config(rng: &mut impl Rng, n: usize, d: usize, scale: f64, min_sep: f64) -> Config {
    for _ in 0..100_000 {
        let c = Config::new((0..n).map(|_| sample_point(rng, d, scale)).collect())
            .expect("valid points");
        let sep = if n >= 2 {
            separation(&c).expect("n >= 2")
        } else {
            f64::INFINITY
        };
        if sep > min_sep.max(0.0) {
            return c;
        }
    }
    panic!("rejection sampling failed: min_sep {min_sep} too demanding for n={n} d={d} scale={scale}");
}

/// A set of exactly n points with separation at least `min_sep`.
pub fn sample_subset(rng: &mut impl Rng, n: usize, d: usize, scale: f64, min_sep: f64) -> FiniteSubset {
    let c = sample_config(rng, n, d, scale, min_sep);
    let s = FiniteSubset::new(c.points().to_vec()).expect("nonempty");
    debug_assert_eq!(s.len(), n);
    s
}

/// A unit vector, drawn from the uniform cube and normalized.
fn sample_direction(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Moves every point of `x` by an independent vector of norm at most `radius`.
pub fn perturb_points(rng: &mut impl Rng, x: &FiniteSubset, radius: f64) -> Vec<Point> {
    x.points()
        .iter()
        .map(|p| {
            let dir = sample_direction(rng, x.dim());
            let r = radius * rng.gen_range(0.0..=1.0);
            Point::new(
                p.coords()
                    .iter()
                    .zip(&dir)
                    .map(|(c, e)| c + r * e)
                    .collect(),
            )
            .expect("finite")
        })
        .collect()
}

/// A matched pair (x, y) where y moves each point of x by strictly less
/// than `rel * separation(x)`; with rel <= 1/2 the label matching between
/// them is certified.
pub fn sample_perturbation_pair(
    rng: &mut impl Rng,
    n: usize,
    d: usize,
    scale: f64,
    rel: f64,
) -> (FiniteSubset, FiniteSubset) {
    loop {
        let x = sample_subset(rng, n, d, scale, 0.05 * scale);
        let sep = separation(&x.to_config()).expect("n >= 2");
        let radius = rel * sep * rng.gen_range(0.1..=1.0);
        let y_pts = perturb_points(rng, &x, radius);
        if let Ok(y) = FiniteSubset::new(y_pts) {
            if y.len() == n {
                return (x, y);
            }
        }
    }
}

/// A set with one deliberately tiny gap: n - 1 spread points with the first
/// split into a close pair at distance about `tiny * scale`.
pub fn sample_clustered(rng: &mut impl Rng, n: usize, d: usize, scale: f64, tiny: f64) -> FiniteSubset {
    debug_assert!(n >= 2);
    loop {
        let base = sample_config(rng, n - 1, d, scale, 0.05 * scale);
        let mut pts = base.points().to_vec();
        let dir = sample_direction(rng, d);
        let gap = tiny * scale * rng.gen_range(0.5..=1.0);
        let split = Point::new(
            pts[0]
                .coords()
                .iter()
                .zip(&dir)
                .map(|(c, e)| c + gap * e)
                .collect(),
        )
        .expect("finite");
        pts.push(split);
        if let Ok(s) = FiniteSubset::new(pts) {
            if s.len() == n {
                return s;
            }
        }
    }
}

/// An orthonormal set of `count` vectors in R^d by Gram-Schmidt on uniform
/// draws, redrawing near-degenerate directions.
pub fn sample_orthonormal(rng: &mut impl Rng, d: usize, count: usize) -> Vec<Vec<f64>> {
    debug_assert!(count <= d);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        for b in &basis {
            let proj: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (x, c) in v.iter_mut().zip(b) {
                *x -= proj * c;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}
