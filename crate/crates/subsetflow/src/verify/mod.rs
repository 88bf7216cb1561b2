//! Numerical certification harness.
//!
//! Every analytic claim the library relies on is turned into a seeded,
//! reproducible check: gradients against finite differences, the certified
//! bounds against sampled extrema, the coupled-flow estimates against
//! synchronized integrations, and the planar impossibility argument against
//! an exhaustive grid search. Each check reduces to a single extremal
//! `observed` value compared against a pinned `bound` and `tolerance`; a
//! report never contains a pass flag that cannot be recomputed from those
//! three numbers.

mod checks;
mod counterexample;
pub mod sample;

pub use checks::{
    check_case2_certificate, check_collision_bracket, check_collision_oracles,
    check_contraction, check_gradient, check_lipschitz, check_monotone_map,
    check_stability_h, check_upper_gradient, check_velocity_speed, lipschitz_scan,
    LipschitzScan,
};
pub use counterexample::check_counterexample;
pub use sample::SampleSpec;

use crate::flow::FlowParams;
use crate::numfmt::fmt_f64;
use crate::space::{Config, FiniteSubset, Point};
use crate::Result;

/// Outcome of one verification check.
///
/// `passed` is derived, never stored independently: it holds exactly when
/// `observed <= bound * (1 + tolerance)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Extremal measured quantity (worst case over all trials).
    pub observed: f64,
    /// Certified threshold the observation is held against.
    pub bound: f64,
    /// Relative slack on the bound.
    pub tolerance: f64,
    /// Serialized worst-case inputs.
    pub witness: String,
    pub trials_run: u64,
}

impl CheckReport {
    /// Sole constructor; derives the pass flag from the three numbers.
    pub fn evaluate(
        name: &str,
        observed: f64,
        bound: f64,
        tolerance: f64,
        witness: String,
        trials_run: u64,
    ) -> Self {
        let passed = observed <= bound * (1.0 + tolerance);
        Self {
            name: name.to_string(),
            passed,
            observed,
            bound,
            tolerance,
            witness,
            trials_run,
        }
    }
}

/// Running maximum with a lazily built witness for the current worst case.
pub(crate) struct Extremum {
    best: Option<(f64, String)>,
}

impl Extremum {
    pub(crate) fn new() -> Self {
        Self { best: None }
    }

    pub(crate) fn update<F: FnOnce() -> String>(&mut self, value: f64, witness: F) {
        let better = match &self.best {
            None => true,
            Some((b, _)) => value > *b,
        };
        if better {
            self.best = Some((value, witness()));
        }
    }

    pub(crate) fn finish(self) -> (f64, String) {
        self.best
            .unwrap_or_else(|| (0.0, "no trials counted".to_string()))
    }
}

pub(crate) fn fmt_points(points: &[Point]) -> String {
    let rows: Vec<String> = points
        .iter()
        .map(|p| {
            let cs: Vec<String> = p.coords().iter().map(|&c| fmt_f64(c)).collect();
            format!("({})", cs.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

pub(crate) fn fmt_config(c: &Config) -> String {
    fmt_points(c.points())
}

pub(crate) fn fmt_subset(s: &FiniteSubset) -> String {
    fmt_points(s.points())
}

/// Runs the full battery of checks in a fixed order.
///
/// Deterministic given the spec: the same seed produces identical reports,
/// witnesses included. Pointwise identities and certified bounds run first,
/// then the single-flow invariants, then the coupled-flow estimates, and
/// finally the retraction Lipschitz scan and the planar impossibility grid
/// search (grid step 0.01).
pub fn run_suite(spec: &SampleSpec, params: &FlowParams) -> Result<Vec<CheckReport>> {
    spec.validate()?;
    params.validate()?;
    let mut reports = vec![
        checks::check_gradient(spec)?,
        checks::check_monotone_map(spec)?,
        checks::check_upper_gradient(spec)?,
        checks::check_velocity_speed(spec)?,
        checks::check_metric_axioms(spec)?,
        checks::check_separation_lipschitz(spec)?,
        checks::check_matching_minimax(spec)?,
        checks::check_canonicalize_idempotent(spec)?,
        checks::check_convexity_midpoint(spec)?,
        checks::check_collision_oracles(params)?,
        checks::check_collision_bracket(spec, params)?,
        checks::check_closest_pair_descent(spec, params)?,
        checks::check_displacement_bound(spec, params)?,
        checks::check_identity_below_ambient(spec, params)?,
        checks::check_span_invariance(spec, params)?,
        checks::check_enumeration_invariance(spec, params)?,
        checks::check_rigid_motion_equivariance(spec, params)?,
        checks::suite_contraction(spec, params)?,
        checks::suite_stability(spec, params)?,
        checks::suite_case2(spec, params)?,
    ];
    let scan = checks::lipschitz_scan(spec, params)?;
    reports.push(checks::lipschitz_bound_report(&scan, spec)?);
    reports.push(checks::lipschitz_coverage_report(&scan, spec));
    reports.push(counterexample::check_counterexample(0.01)?);
    Ok(reports)
}
