//! The collapsing flow on point configurations.
//!
//! Every point attracts every other with unit strength:
//! du_i/dt = sum_{j != i} (u_j - u_i) / |u_j - u_i|.
//! This is steepest descent for the sum of pairwise distances. Along the
//! flow each pairwise distance shrinks at a rate between 2 and 2(n - 1), so
//! a first collision happens at a finite time T between sep/(2(n-1)) and
//! sep/2. Integrating to just before T and merging the collided cluster
//! yields a map from n-point sets onto sets of at most n - 1 points.

use crate::space::{canonicalize, lipschitz_bound, separation, Config, FiniteSubset, Point};
use crate::{Error, Result};

/// Parameters of the collision-seeking integrator.
///
/// The scheme is fixed: a classical fourth-order Runge-Kutta step with the
/// adaptive step size h = step_safety * sep(u) / (2(n - 1)). Pair distances
/// move at most 2(n - 1) * h per step, so no pair can cross zero mid-step
/// while step_safety < 1.
#[derive(Clone, Debug)]
pub struct FlowParams {
    /// Step-size safety factor in (0, 1).
    pub step_safety: f64,
    /// Relative stopping threshold: stop once sep(u) <= collision_tol * sep(start).
    pub collision_tol: f64,
    /// Step budget before the integration is declared divergent.
    pub max_steps: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            step_safety: 0.1,
            collision_tol: 1e-9,
            max_steps: 1_000_000,
        }
    }
}

impl FlowParams {
    /// Rejects parameter sets the integrator cannot run with.
    pub fn validate(&self) -> Result<()> {
        if !(self.step_safety > 0.0 && self.step_safety < 1.0) {
            return Err(Error::InvalidInput(format!(
                "step_safety must lie in (0, 1), got {}",
                self.step_safety
            )));
        }
        if !(self.collision_tol > 0.0 && self.collision_tol < 1.0) {
            return Err(Error::InvalidInput(format!(
                "collision_tol must lie in (0, 1), got {}",
                self.collision_tol
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// One recorded instant of an integration.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    pub config: Config,
    /// Separation of `config`, cached by the integrator.
    pub sep: f64,
}

/// A completed integration down to the collision threshold.
#[derive(Clone, Debug)]
pub struct FlowTrace {
    /// Every accepted step, initial state included.
    pub states: Vec<FlowState>,
    pub t_stop: f64,
    pub sep_stop: f64,
    /// Interval certified to contain the first collision time: the stop
    /// time plus at most sep_stop / 2 of remaining travel.
    pub t_bracket: (f64, f64),
}

/// Output of one retraction step.
#[derive(Clone, Debug)]
pub struct RetractionResult {
    /// At most ambient - 1 points.
    pub output: FiniteSubset,
    /// Integration stop time (lower end of the collision-time bracket).
    pub t_stop: f64,
    /// Estimated first collision time (upper end of the bracket).
    pub t_estimate: f64,
    /// Bound on the distance between `output` and the ideal collision-time
    /// set: remaining travel is at most (n - 1) * sep_stop / 2 per point.
    pub displacement_bound: f64,
    pub steps: usize,
}

/// Output of a chained retraction down to a target cardinality.
#[derive(Clone, Debug)]
pub struct ChainResult {
    pub output: FiniteSubset,
    /// Total flow time across stages.
    pub t_estimate: f64,
    /// Composed error bound: each later stage amplifies the carried error by
    /// at most its Lipschitz constant before adding its own.
    pub displacement_bound: f64,
    pub steps: usize,
}

/// Sum of all pairwise distances of the configuration.
pub fn pair_energy(config: &Config) -> f64 {
    let n = config.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += crate::space::dist(config.point(i), config.point(j));
        }
    }
    sum
}

fn flatten(config: &Config) -> Vec<f64> {
    let mut u = Vec::with_capacity(config.len() * config.dim());
    for p in config.points() {
        u.extend_from_slice(p.coords());
    }
    u
}

fn unflatten(u: &[f64], n: usize, d: usize) -> Config {
    let points = (0..n)
        .map(|i| Point::new(u[i * d..(i + 1) * d].to_vec()).expect("finite coordinates"))
        .collect();
    Config::new(points).expect("nonempty")
}

/// Attraction field on the flat row-major buffer. Antisymmetric pairwise
/// accumulation: each pair contributes w to one side and -w to the other.
fn velocity_flat(u: &[f64], n: usize, d: usize, out: &mut [f64]) -> Result<()> {
    out.fill(0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let (pi, pj) = (i * d, j * d);
            let mut sq = 0.0;
            for k in 0..d {
                let w = u[pj + k] - u[pi + k];
                sq += w * w;
            }
            let len = sq.sqrt();
            if len == 0.0 {
                return Err(Error::Diagonal(i, j));
            }
            for k in 0..d {
                let w = (u[pj + k] - u[pi + k]) / len;
                out[pi + k] += w;
                out[pj + k] -= w;
            }
        }
    }
    Ok(())
}

/// Minimum pairwise distance and its argmin pair.
fn sep_flat(u: &[f64], n: usize, d: usize) -> (f64, usize, usize) {
    let mut min = f64::INFINITY;
    let (mut ai, mut aj) = (0, 1);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sq = 0.0;
            for k in 0..d {
                let w = u[j * d + k] - u[i * d + k];
                sq += w * w;
            }
            let len = sq.sqrt();
            if len < min {
                min = len;
                ai = i;
                aj = j;
            }
        }
    }
    (min, ai, aj)
}

/// Velocity of every point under the mutual attraction field.
///
/// Component norms never exceed n - 1 (a sum of n - 1 unit vectors).
/// Errors if two points coincide.
pub fn flow_velocity(config: &Config) -> Result<Vec<Point>> {
    let (n, d) = (config.len(), config.dim());
    let u = flatten(config);
    let mut out = vec![0.0; n * d];
    velocity_flat(&u, n, d, &mut out)?;
    Ok((0..n)
        .map(|i| Point::new(out[i * d..(i + 1) * d].to_vec()).expect("finite"))
        .collect())
}

/// Gradient of [`pair_energy`]: the negation of the attraction field.
pub fn pair_energy_gradient(config: &Config) -> Result<Vec<Point>> {
    Ok(flow_velocity(config)?
        .into_iter()
        .map(|p| Point::new(p.coords().iter().map(|c| -c).collect()).expect("finite"))
        .collect())
}

struct StageBufs {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl StageBufs {
    fn new(len: usize) -> Self {
        Self {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            stage: vec![0.0; len],
        }
    }
}

/// Classical fourth-order Runge-Kutta step in place.
fn rk4_step(u: &mut [f64], h: f64, n: usize, d: usize, b: &mut StageBufs) -> Result<()> {
    velocity_flat(u, n, d, &mut b.k1)?;
    for (s, (x, k)) in b.stage.iter_mut().zip(u.iter().zip(&b.k1)) {
        *s = x + 0.5 * h * k;
    }
    velocity_flat(&b.stage, n, d, &mut b.k2)?;
    for (s, (x, k)) in b.stage.iter_mut().zip(u.iter().zip(&b.k2)) {
        *s = x + 0.5 * h * k;
    }
    velocity_flat(&b.stage, n, d, &mut b.k3)?;
    for (s, (x, k)) in b.stage.iter_mut().zip(u.iter().zip(&b.k3)) {
        *s = x + h * k;
    }
    velocity_flat(&b.stage, n, d, &mut b.k4)?;
    for (i, x) in u.iter_mut().enumerate() {
        *x += h / 6.0 * (b.k1[i] + 2.0 * b.k2[i] + 2.0 * b.k3[i] + b.k4[i]);
    }
    Ok(())
}

struct CoreOutcome {
    u: Vec<f64>,
    t_stop: f64,
    sep_stop: f64,
    steps: usize,
    states: Vec<FlowState>,
}

fn integrate_core(x: &Config, params: &FlowParams, record: bool) -> Result<CoreOutcome> {
    params.validate()?;
    let (n, d) = (x.len(), x.dim());
    if n < 2 {
        return Err(Error::InvalidInput("flow needs at least two points".into()));
    }
    let mut u = flatten(x);
    let (sep0, i0, j0) = sep_flat(&u, n, d);
    if sep0 == 0.0 {
        return Err(Error::Diagonal(i0, j0));
    }
    let threshold = params.collision_tol * sep0;
    let two_nm1 = 2.0 * (n - 1) as f64;
    let mut bufs = StageBufs::new(n * d);
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut sep = sep0;
    let mut states = Vec::new();
    if record {
        states.push(FlowState {
            t,
            config: unflatten(&u, n, d),
            sep,
        });
    }
    while sep > threshold {
        if steps == params.max_steps {
            return Err(Error::Divergence(steps));
        }
        let h = params.step_safety * sep / two_nm1;
        rk4_step(&mut u, h, n, d, &mut bufs)?;
        t += h;
        steps += 1;
        sep = sep_flat(&u, n, d).0;
        if record {
            states.push(FlowState {
                t,
                config: unflatten(&u, n, d),
                sep,
            });
        }
    }
    Ok(CoreOutcome {
        u,
        t_stop: t,
        sep_stop: sep,
        steps,
        states,
    })
}

/// Integrates the flow until the separation falls below
/// `collision_tol * sep(start)`, recording every accepted step.
///
/// The returned bracket `[t_stop, t_stop + sep_stop / 2]` contains the true
/// first collision time up to integration error: from the stopped state the
/// closest pair still shrinks at rate >= 2, so at most sep_stop / 2 of flow
/// time remains.
pub fn integrate_to_collision(x: &Config, params: &FlowParams) -> Result<FlowTrace> {
    let out = integrate_core(x, params, true)?;
    Ok(FlowTrace {
        t_stop: out.t_stop,
        sep_stop: out.sep_stop,
        t_bracket: (out.t_stop, out.t_stop + out.sep_stop / 2.0),
        states: out.states,
    })
}

/// Synchronized integration of two same-shape configurations with a shared
/// step size, until either flow reaches its own stopping threshold.
///
/// The observer receives every recorded instant (the initial one included)
/// as flat row-major n*d buffers. Returns the shared stop time.
pub fn integrate_pair_observed<F>(
    x: &Config,
    y: &Config,
    params: &FlowParams,
    mut observe: F,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &[f64]),
{
    params.validate()?;
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "paired flows need equal cardinalities, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (n, d) = (x.len(), x.dim());
    if n < 2 {
        return Err(Error::InvalidInput("flow needs at least two points".into()));
    }
    let mut u = flatten(x);
    let mut v = flatten(y);
    let (sep_u0, ui, uj) = sep_flat(&u, n, d);
    if sep_u0 == 0.0 {
        return Err(Error::Diagonal(ui, uj));
    }
    let (sep_v0, vi, vj) = sep_flat(&v, n, d);
    if sep_v0 == 0.0 {
        return Err(Error::Diagonal(vi, vj));
    }
    let (th_u, th_v) = (
        params.collision_tol * sep_u0,
        params.collision_tol * sep_v0,
    );
    let two_nm1 = 2.0 * (n - 1) as f64;
    let mut bufs = StageBufs::new(n * d);
    let mut t = 0.0;
    let mut steps = 0usize;
    observe(t, &u, &v);
    loop {
        let su = sep_flat(&u, n, d).0;
        let sv = sep_flat(&v, n, d).0;
        if su <= th_u || sv <= th_v {
            return Ok(t);
        }
        if steps == params.max_steps {
            return Err(Error::Divergence(steps));
        }
        let h = params.step_safety * su.min(sv) / two_nm1;
        rk4_step(&mut u, h, n, d, &mut bufs)?;
        rk4_step(&mut v, h, n, d, &mut bufs)?;
        t += h;
        steps += 1;
        observe(t, &u, &v);
    }
}

/// Integrates the flow up to a fixed time, clipping the last step onto the
/// target exactly.
///
/// If the configuration reaches its collision threshold first, integration
/// stops there: the remaining drift is at most (n - 1) * sep / 2, already
/// below anything the stopped state is used for.
pub fn integrate_to_time(x: &Config, t_target: f64, params: &FlowParams) -> Result<Config> {
    params.validate()?;
    if !(t_target >= 0.0) || !t_target.is_finite() {
        return Err(Error::InvalidInput(format!(
            "target time must be finite and nonnegative, got {t_target}"
        )));
    }
    let (n, d) = (x.len(), x.dim());
    if n < 2 {
        return Err(Error::InvalidInput("flow needs at least two points".into()));
    }
    let mut u = flatten(x);
    let (sep0, i0, j0) = sep_flat(&u, n, d);
    if sep0 == 0.0 {
        return Err(Error::Diagonal(i0, j0));
    }
    let threshold = params.collision_tol * sep0;
    let two_nm1 = 2.0 * (n - 1) as f64;
    let mut bufs = StageBufs::new(n * d);
    let mut t = 0.0;
    let mut steps = 0usize;
    while t < t_target {
        let sep = sep_flat(&u, n, d).0;
        if sep <= threshold {
            break;
        }
        if steps == params.max_steps {
            return Err(Error::Divergence(steps));
        }
        let h_rule = params.step_safety * sep / two_nm1;
        let rem = t_target - t;
        if h_rule >= rem {
            rk4_step(&mut u, rem, n, d, &mut bufs)?;
            t = t_target;
        } else {
            rk4_step(&mut u, h_rule, n, d, &mut bufs)?;
            t += h_rule;
        }
        steps += 1;
    }
    Ok(unflatten(&u, n, d))
}

/// One retraction step: maps a set of at most `ambient` points to a set of
/// at most `ambient - 1` points.
///
/// Sets already below the ambient cardinality are returned unchanged, bit
/// for bit. A full set is integrated to its collision threshold and the
/// collided cluster is merged by [`canonicalize`] with tolerance
/// 3 * collision_tol * sep(A), which always joins the stopped closest pair.
pub fn retract_once(
    a: &FiniteSubset,
    ambient: usize,
    params: &FlowParams,
) -> Result<RetractionResult> {
    if ambient < 2 {
        return Err(Error::InvalidInput(format!(
            "ambient cardinality must be at least 2, got {ambient}"
        )));
    }
    if a.len() > ambient {
        return Err(Error::InvalidInput(format!(
            "set of {} points exceeds ambient cardinality {ambient}",
            a.len()
        )));
    }
    if a.len() < ambient {
        return Ok(RetractionResult {
            output: a.clone(),
            t_stop: 0.0,
            t_estimate: 0.0,
            displacement_bound: 0.0,
            steps: 0,
        });
    }
    let config = a.to_config();
    let sep_a = separation(&config)?;
    let out = integrate_core(&config, params, false)?;
    let points: Vec<Point> = unflatten(&out.u, config.len(), config.dim())
        .points()
        .to_vec();
    let merge_tol = 3.0 * params.collision_tol * sep_a;
    let output = canonicalize(&points, merge_tol)?;
    debug_assert!(output.len() < ambient, "stopped cluster must merge");
    let nm1 = (ambient - 1) as f64;
    Ok(RetractionResult {
        output,
        t_stop: out.t_stop,
        t_estimate: out.t_stop + out.sep_stop / 2.0,
        displacement_bound: nm1 * out.sep_stop / 2.0,
        steps: out.steps,
    })
}

/// Chained retraction: applies [`retract_once`] with the ambient
/// cardinality stepping down from |A| until at most `k` points remain.
/// A single step can collapse several points at once (simultaneous
/// collisions), in which case the chain simply skips the vacated levels.
pub fn retract_chain(a: &FiniteSubset, k: usize, params: &FlowParams) -> Result<ChainResult> {
    if k < 1 {
        return Err(Error::InvalidInput(format!(
            "target cardinality must be at least 1, got {k}"
        )));
    }
    let mut current = a.clone();
    let mut t_estimate = 0.0;
    let mut displacement_bound = 0.0;
    let mut steps = 0usize;
    while current.len() > k {
        let ambient = current.len();
        let stage = retract_once(&current, ambient, params)?;
        displacement_bound =
            lipschitz_bound(ambient)? * displacement_bound + stage.displacement_bound;
        t_estimate += stage.t_estimate;
        steps += stage.steps;
        current = stage.output;
    }
    Ok(ChainResult {
        output: current,
        t_estimate,
        displacement_bound,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::hausdorff_distance;
    use proptest::prelude::*;

    fn config(coords: &[&[f64]]) -> Config {
        Config::from_coords(coords.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    fn subset(coords: &[&[f64]]) -> FiniteSubset {
        FiniteSubset::from_coords(coords.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    fn unit_equilateral() -> Config {
        config(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, 3.0f64.sqrt() / 2.0]])
    }

    #[test]
    fn energy_examples() {
        assert_eq!(pair_energy(&config(&[&[0.0], &[1.0]])), 1.0);
        assert_eq!(pair_energy(&config(&[&[0.0], &[1.0], &[2.0]])), 4.0);
        assert!((pair_energy(&unit_equilateral()) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let g = pair_energy_gradient(&config(&[&[0.0], &[1.0]])).unwrap();
        assert_eq!(g[0].coords(), &[-1.0]);
        assert_eq!(g[1].coords(), &[1.0]);

        let g = pair_energy_gradient(&config(&[&[0.0], &[1.0], &[2.0]])).unwrap();
        assert_eq!(g[0].coords(), &[-2.0]);
        assert_eq!(g[1].coords(), &[0.0]);
        assert_eq!(g[2].coords(), &[2.0]);
    }

    #[test]
    fn gradient_rejects_diagonal() {
        let c = config(&[&[0.0], &[0.0], &[1.0]]);
        assert!(matches!(
            pair_energy_gradient(&c),
            Err(Error::Diagonal(0, 1))
        ));
    }

    #[test]
    fn velocity_is_negated_gradient() {
        let c = config(&[&[0.3, -0.7], &[1.1, 0.2], &[-0.4, 0.9], &[0.0, 2.0]]);
        let v = flow_velocity(&c).unwrap();
        let g = pair_energy_gradient(&c).unwrap();
        for (vi, gi) in v.iter().zip(&g) {
            for (a, b) in vi.coords().iter().zip(gi.coords()) {
                assert_eq!(*a, -b);
            }
        }
    }

    #[test]
    fn velocity_components_sum_to_near_zero() {
        let c = config(&[&[0.3, -0.7], &[1.1, 0.2], &[-0.4, 0.9], &[0.0, 2.0]]);
        let v = flow_velocity(&c).unwrap();
        for k in 0..2 {
            let s: f64 = v.iter().map(|p| p.coords()[k]).sum();
            assert!(s.abs() < 1e-12, "residual {s}");
        }
    }

    #[test]
    fn equilateral_vertices_move_at_sqrt3_toward_centroid() {
        let c = unit_equilateral();
        let v = flow_velocity(&c).unwrap();
        let centroid = [0.5, 3.0f64.sqrt() / 6.0];
        for (p, vi) in c.points().iter().zip(&v) {
            let speed = crate::space::dist(vi.coords(), &[0.0, 0.0]);
            assert!((speed - 3.0f64.sqrt()).abs() < 1e-12);
            // Velocity is parallel to (centroid - p): zero 2-d cross product.
            let to_c = [centroid[0] - p.coords()[0], centroid[1] - p.coords()[1]];
            let cross = vi.coords()[0] * to_c[1] - vi.coords()[1] * to_c[0];
            assert!(cross.abs() < 1e-12, "cross {cross}");
            let dot = vi.coords()[0] * to_c[0] + vi.coords()[1] * to_c[1];
            assert!(dot > 0.0);
        }
    }

    #[test]
    fn two_body_collides_at_half_distance() {
        let c = config(&[&[0.25, 1.0], &[0.75, 1.0]]);
        let trace = integrate_to_collision(&c, &FlowParams::default()).unwrap();
        let t_est = trace.t_stop + trace.sep_stop / 2.0;
        assert!((t_est - 0.25).abs() < 1e-12 * 0.25);
        // The bracket is ordered and tight.
        assert!(trace.t_bracket.0 <= trace.t_bracket.1);
        assert!(trace.sep_stop <= 1e-9 * 0.5);
    }

    #[test]
    fn recorded_states_cache_their_exact_separation() {
        let c = config(&[&[0.1, -0.3], &[0.9, 0.4], &[-0.2, 1.1]]);
        let trace = integrate_to_collision(&c, &FlowParams::default()).unwrap();
        assert!(trace.states.len() >= 2);
        for s in &trace.states {
            let fresh = crate::space::separation(&s.config).unwrap();
            assert_eq!(s.sep.to_bits(), fresh.to_bits());
        }
        assert!(trace.t_bracket.0 <= trace.t_bracket.1);
        assert_eq!(trace.t_bracket.0, trace.t_stop);
        assert_eq!(trace.t_bracket.1, trace.t_stop + trace.sep_stop / 2.0);
    }

    #[test]
    fn collinear_triple_collides_at_one_half() {
        let c = config(&[&[0.0], &[1.0], &[2.0]]);
        let trace = integrate_to_collision(&c, &FlowParams::default()).unwrap();
        let t_est = trace.t_stop + trace.sep_stop / 2.0;
        assert!((t_est - 0.5).abs() < 1e-4 * 0.5, "t_est {t_est}");
    }

    #[test]
    fn equilateral_collides_at_side_over_three() {
        let trace = integrate_to_collision(&unit_equilateral(), &FlowParams::default()).unwrap();
        let t_est = trace.t_stop + trace.sep_stop / 2.0;
        assert!((t_est - 1.0 / 3.0).abs() < 1e-4 / 3.0, "t_est {t_est}");
    }

    #[test]
    fn step_budget_exhaustion_is_divergence() {
        let params = FlowParams {
            max_steps: 3,
            ..FlowParams::default()
        };
        let c = config(&[&[0.0], &[1.0]]);
        assert!(matches!(
            integrate_to_collision(&c, &params),
            Err(Error::Divergence(3))
        ));
    }

    #[test]
    fn params_are_validated() {
        let c = config(&[&[0.0], &[1.0]]);
        for bad in [
            FlowParams { step_safety: 0.0, ..FlowParams::default() },
            FlowParams { step_safety: 1.0, ..FlowParams::default() },
            FlowParams { collision_tol: 0.0, ..FlowParams::default() },
            FlowParams { max_steps: 0, ..FlowParams::default() },
        ] {
            assert!(integrate_to_collision(&c, &bad).is_err());
        }
    }

    #[test]
    fn retract_two_points_to_midpoint() {
        let a = subset(&[&[0.0], &[1.0]]);
        let r = retract_once(&a, 2, &FlowParams::default()).unwrap();
        assert_eq!(r.output.len(), 1);
        assert!((r.output.point(0)[0] - 0.5).abs() < 1e-12);
        assert!((r.t_estimate - 0.5).abs() < 1e-12);
        assert!(r.displacement_bound <= 0.5 * 1e-9 * (1.0 + 1e-9));
    }

    #[test]
    fn retract_collinear_triple_to_middle() {
        let a = subset(&[&[0.0], &[1.0], &[2.0]]);
        let r = retract_once(&a, 3, &FlowParams::default()).unwrap();
        assert_eq!(r.output.len(), 1);
        assert!((r.output.point(0)[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn retract_equilateral_to_centroid() {
        let a = FiniteSubset::from_coords(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 3.0f64.sqrt() / 2.0],
        ])
        .unwrap();
        let r = retract_once(&a, 3, &FlowParams::default()).unwrap();
        assert_eq!(r.output.len(), 1);
        let expected = [0.5, 3.0f64.sqrt() / 6.0];
        assert!(crate::space::dist(r.output.point(0), &expected) < 1e-9);
    }

    #[test]
    fn retract_below_ambient_is_bitwise_identity() {
        let a = subset(&[&[0.1, 0.2], &[0.9, -0.3]]);
        let r = retract_once(&a, 3, &FlowParams::default()).unwrap();
        assert_eq!(r.output, a);
        assert_eq!(r.t_estimate, 0.0);
        assert_eq!(r.displacement_bound, 0.0);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn retract_rejects_overfull_and_tiny_ambient() {
        let a = subset(&[&[0.0], &[1.0], &[2.0]]);
        assert!(retract_once(&a, 2, &FlowParams::default()).is_err());
        assert!(retract_once(&a, 1, &FlowParams::default()).is_err());
    }

    #[test]
    fn chain_examples() {
        let params = FlowParams::default();

        let a = subset(&[&[0.0], &[1.0], &[2.0]]);
        let r = retract_chain(&a, 1, &params).unwrap();
        assert_eq!(r.output.len(), 1);
        assert!((r.output.point(0)[0] - 1.0).abs() < 1e-9);

        // The middle point of {0, 1, 10} is stationary (pulls cancel); the
        // left point reaches it at t = 1/2 while the right point arrives at 9.
        let a = subset(&[&[0.0], &[1.0], &[10.0]]);
        let r = retract_chain(&a, 2, &params).unwrap();
        let expected = subset(&[&[1.0], &[9.0]]);
        assert!(hausdorff_distance(&r.output, &expected).unwrap() < 1e-8);

        // k >= |A| is the identity.
        let r = retract_chain(&a, 3, &params).unwrap();
        assert_eq!(r.output, a);
        assert_eq!(r.steps, 0);

        assert!(retract_chain(&a, 0, &params).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

        #[test]
        fn speed_bound_holds(
            (n, d) in (2usize..=6, 1usize..=4),
            raw in proptest::collection::vec(-1.0f64..1.0, 24),
        ) {
            let coords: Vec<Vec<f64>> = (0..n).map(|i| raw[i * d..i * d + d].to_vec()).collect();
            let c = Config::from_coords(coords).unwrap();
            prop_assume!(c.is_off_diagonal());
            let v = flow_velocity(&c).unwrap();
            for p in &v {
                let speed = crate::space::dist(p.coords(), &vec![0.0; d]);
                prop_assert!(speed <= (n as f64 - 1.0) * (1.0 + 1e-12));
            }
        }

        #[test]
        fn upper_gradient_bound_holds(
            (n, d) in (2usize..=6, 1usize..=4),
            raw in proptest::collection::vec(-1.0f64..1.0, 24),
        ) {
            let coords: Vec<Vec<f64>> = (0..n).map(|i| raw[i * d..i * d + d].to_vec()).collect();
            let c = Config::from_coords(coords).unwrap();
            prop_assume!(c.is_off_diagonal());
            let g = pair_energy_gradient(&c).unwrap();
            let total: f64 = g
                .iter()
                .flat_map(|p| p.coords().iter().map(|c| c * c))
                .sum::<f64>()
                .sqrt();
            let nf = n as f64;
            prop_assert!(total <= (nf - 1.0) * nf.sqrt() * (1.0 + 1e-12));
        }
    }
}
