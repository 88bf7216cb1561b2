//! Trajectory rendering for 1- and 2-dimensional traces.
//!
//! One polyline per tracked point, a dot at each starting position.
//! In dimension 1 the horizontal axis is flow time; in dimension 2 the
//! axes are the two coordinates. Higher dimensions have no faithful
//! planar picture, so the renderer refuses them.

use subsetflow::flow::FlowTrace;

use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 20.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub fn render_trace(trace: &FlowTrace) -> Result<String, CliError> {
    let d = trace.states[0].config.dim();
    if d > 2 {
        return Err(CliError::Render(format!(
            "svg output needs dimension 1 or 2, got {d}"
        )));
    }
    let n = trace.states[0].config.len();
    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(trace.states.len()); n];
    for state in &trace.states {
        for (i, p) in state.config.points().iter().enumerate() {
            let c = p.coords();
            let xy = if d == 1 { (state.t, c[0]) } else { (c[0], c[1]) };
            series[i].push(xy);
        }
    }

    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for s in &series {
        for &(x, y) in s {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
    }
    // Pad the data box so degenerate extents (a single point, or motion
    // along one axis) still map to a visible region.
    let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-12);
    let pad = 0.05 * span;
    let (x0, y0) = (lo.0 - pad, lo.1 - pad);
    let (x1, y1) = (hi.0 + pad, hi.1 + pad);
    let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0);
    let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0);
    let scale = sx.min(sy);
    // SVG y grows downward; flip so larger coordinates render higher.
    let map = |x: f64, y: f64| {
        (
            MARGIN + (x - x0) * scale,
            HEIGHT - MARGIN - (y - y0) * scale,
        )
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .iter()
            .map(|&(x, y)| {
                let (px, py) = map(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            color,
            pts.join(" ")
        ));
        let (px, py) = map(s[0].0, s[0].1);
        out.push_str(&format!(
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"{color}\"/>\n"
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
