//! Input parsing and the text formats the commands emit.
//!
//! Output numbers are printed with 17 significant digits so every
//! document is reproducible bit for bit; input accepts anything that
//! parses as {"points": [[real, ...], ...]} with equal row lengths.

use serde::Deserialize;
use subsetflow::flow::FlowTrace;
use subsetflow::numfmt::fmt_f64;
use subsetflow::space::FiniteSubset;
use subsetflow::verify::CheckReport;

use crate::CliError;

#[derive(Deserialize)]
struct InputDoc {
    points: Vec<Vec<f64>>,
}

/// Parses an input document into a point set. Exact duplicate rows
/// collapse (the input denotes a set); ragged or non-finite rows are
/// usage errors.
pub fn parse_points(text: &str) -> Result<FiniteSubset, CliError> {
    let doc: InputDoc = serde_json::from_str(text)
        .map_err(|e| CliError::Usage(format!("input does not parse: {e}")))?;
    FiniteSubset::from_coords(doc.points).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn escape_json(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn points_array(points: &FiniteSubset) -> String {
    let rows: Vec<String> = points
        .points()
        .iter()
        .map(|p| {
            let cs: Vec<String> = p.coords().iter().map(|&c| fmt_f64(c)).collect();
            format!("[{}]", cs.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// The retraction result document. Its "points" field re-parses as input.
pub fn retract_doc(
    output: &FiniteSubset,
    t_estimate: f64,
    displacement_bound: f64,
    steps: usize,
) -> String {
    format!(
        "{{\"points\": {}, \"t_estimate\": {}, \"displacement_bound\": {}, \"steps\": {}}}\n",
        points_array(output),
        fmt_f64(t_estimate),
        fmt_f64(displacement_bound),
        steps
    )
}

/// One row per recorded state and point: t, the point's index, then its
/// coordinates.
pub fn trace_csv(trace: &FlowTrace) -> String {
    let d = trace.states[0].config.dim();
    let mut out = String::from("t,point_index");
    for k in 0..d {
        out.push_str(&format!(",c{k}"));
    }
    out.push('\n');
    for state in &trace.states {
        for (i, p) in state.config.points().iter().enumerate() {
            out.push_str(&fmt_f64(state.t));
            out.push_str(&format!(",{i}"));
            for &c in p.coords() {
                out.push(',');
                out.push_str(&fmt_f64(c));
            }
            out.push('\n');
        }
    }
    out
}

pub fn report_entry(r: &CheckReport) -> String {
    format!(
        "{{\"name\": \"{}\", \"passed\": {}, \"observed\": {}, \"bound\": {}, \"tolerance\": {}, \"trials_run\": {}, \"witness\": \"{}\"}}",
        escape_json(&r.name),
        r.passed,
        fmt_f64(r.observed),
        fmt_f64(r.bound),
        fmt_f64(r.tolerance),
        r.trials_run,
        escape_json(&r.witness)
    )
}

/// The verification report document.
pub fn verify_doc(reports: &[CheckReport]) -> String {
    let all_passed = reports.iter().all(|r| r.passed);
    let entries: Vec<String> = reports.iter().map(report_entry).collect();
    format!(
        "{{\"suite\": [\n  {}\n], \"all_passed\": {}}}\n",
        entries.join(",\n  "),
        all_passed
    )
}

pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub mean_steps: f64,
    pub mean_wall_time: f64,
    pub max_ratio_observed: f64,
}

pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut out = String::from("n,d,trials,mean_steps,mean_wall_time,max_ratio_observed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            r.d,
            r.trials,
            fmt_f64(r.mean_steps),
            fmt_f64(r.mean_wall_time),
            fmt_f64(r.max_ratio_observed)
        ));
    }
    out
}
