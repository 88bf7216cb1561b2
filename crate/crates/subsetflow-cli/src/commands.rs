//! The subcommand bodies, separated from argument parsing so they can
//! be driven directly from tests.

use std::time::Instant;

use subsetflow::flow::{integrate_to_collision, retract_chain, retract_once, FlowParams};
use subsetflow::space::{hausdorff_distance, separation, FiniteSubset};
use subsetflow::verify::sample::{self, substream};
use subsetflow::verify::{run_suite, SampleSpec};

use crate::format::{self, BenchRow};
use crate::svg::render_trace;
use crate::CliError;

/// Retracts the input down to at most `k` points and reports the result
/// together with the accumulated time estimate and error bound.
pub fn cmd_retract(input: &str, k: usize, params: &FlowParams) -> Result<String, CliError> {
    let a = format::parse_points(input)?;
    let r = retract_chain(&a, k, params)?;
    Ok(format::retract_doc(
        &r.output,
        r.t_estimate,
        r.displacement_bound,
        r.steps,
    ))
}

/// Integrates the input to its first collision and returns the sampled
/// trajectory as CSV, plus an SVG rendering when requested.
///
/// The dimension gate for SVG runs before any integration so an
/// unrenderable request fails immediately.
pub fn cmd_trace(
    input: &str,
    params: &FlowParams,
    want_svg: bool,
) -> Result<(String, Option<String>), CliError> {
    let a = format::parse_points(input)?;
    if a.len() < 2 {
        return Err(CliError::Usage(
            "trace needs at least 2 distinct points".into(),
        ));
    }
    if want_svg && a.dim() > 2 {
        return Err(CliError::Render(format!(
            "svg output needs dimension 1 or 2, got {}",
            a.dim()
        )));
    }
    let trace = integrate_to_collision(&a.to_config(), params)?;
    let csv = format::trace_csv(&trace);
    let svg = if want_svg {
        Some(render_trace(&trace)?)
    } else {
        None
    };
    Ok((csv, svg))
}

pub struct VerifyArgs {
    pub n: usize,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub params: FlowParams,
}

/// Runs the full check suite and returns the report document plus the
/// overall verdict.
pub fn cmd_verify(args: &VerifyArgs) -> Result<(String, bool), CliError> {
    let spec = SampleSpec {
        n: args.n,
        d: args.dim,
        trials: args.trials,
        seed: args.seed,
        scale: 1.0,
    };
    let reports = run_suite(&spec, &args.params)?;
    let all_passed = reports.iter().all(|r| r.passed);
    Ok((format::verify_doc(&reports), all_passed))
}

pub struct BenchArgs {
    pub n: Vec<usize>,
    pub dim: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub params: FlowParams,
}

/// Times the one-step retraction over seeded input pairs and records the
/// worst observed expansion ratio per (n, d) cell.
///
/// Even trials draw two independent sets of the same cardinality; odd
/// trials perturb one draw by a fifth of its separation, exercising the
/// regime where the matched expansion bound is active.
pub fn cmd_bench(args: &BenchArgs) -> Result<String, CliError> {
    if args.n.is_empty() || args.dim.is_empty() || args.trials == 0 {
        return Err(CliError::Usage(
            "bench needs nonempty n and dim lists and at least one trial".into(),
        ));
    }
    let mut rows = Vec::new();
    for (combo, (&n, &d)) in args
        .n
        .iter()
        .flat_map(|n| args.dim.iter().map(move |d| (n, d)))
        .enumerate()
    {
        if n < 2 {
            return Err(CliError::Usage(format!(
                "bench needs n >= 2, got {n}"
            )));
        }
        // Substream ids below 1000 belong to the verification suite.
        let stream_id = 1000 + u16::try_from(combo)
            .map_err(|_| CliError::Usage("too many (n, dim) combinations".into()))?;
        let mut total_steps = 0usize;
        let mut retractions = 0usize;
        let mut max_ratio: f64 = 0.0;
        let mut wall = 0.0f64;
        for trial in 0..args.trials {
            let mut rng = substream(args.seed, stream_id, trial as u64);
            let x = sample::sample_subset(&mut rng, n, d, 1.0, 1e-3);
            let y = if trial % 2 == 0 {
                sample::sample_subset(&mut rng, n, d, 1.0, 1e-3)
            } else {
                let sep = separation(&x.to_config())?;
                FiniteSubset::new(sample::perturb_points(&mut rng, &x, 0.2 * sep))?
            };
            let rho = hausdorff_distance(&x, &y)?;
            // The clock covers only the retraction calls; sampling and
            // distance evaluation stay outside the measured window.
            let t0 = Instant::now();
            let rx = retract_once(&x, n, &args.params)?;
            let ry = retract_once(&y, n, &args.params)?;
            wall += t0.elapsed().as_secs_f64();
            total_steps += rx.steps + ry.steps;
            retractions += 2;
            if rho > 1e-9 {
                let image = hausdorff_distance(&rx.output, &ry.output)?;
                max_ratio = max_ratio.max(image / rho);
            }
        }
        rows.push(BenchRow {
            n,
            d,
            trials: args.trials,
            mean_steps: total_steps as f64 / retractions as f64,
            mean_wall_time: wall / retractions as f64,
            max_ratio_observed: max_ratio,
        });
    }
    Ok(format::bench_table(&rows))
}
