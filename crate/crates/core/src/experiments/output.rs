//! CSV and SVG emission for sweep results.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{RowStatus, SweepRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "param,j_star,j_agnostic,inverse_poi,gap,bound,iterations";

/// 17 significant digits, enough to round-trip any `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text: header plus one line per row. Rows that were skipped or failed carry
/// the marker `skipped`/`failed` in every measured column; a missing bound is an
/// empty field.
pub fn render_csv(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Config("no rows to emit".into()));
    }
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let marker = match &r.status {
            RowStatus::Ok => None,
            RowStatus::Skipped(_) => Some("skipped"),
            RowStatus::Failed(_) => Some("failed"),
        };
        let _ = match marker {
            Some(m) => writeln!(out, "{},{m},{m},{m},{m},{m},{}", num(r.param), r.iterations),
            None => writeln!(
                out,
                "{},{},{},{},{},{},{}",
                num(r.param),
                num(r.j_star),
                num(r.j_agnostic),
                num(r.inverse_poi),
                num(r.gap),
                r.bound.map(num).unwrap_or_default(),
                r.iterations
            ),
        };
    }
    Ok(out)
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    fs::write(path, render_csv(rows)?)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// `inverse_poi` against the mixing weight.
    InversePoi,
    /// Measured gap and its lower bound against ḡ.
    GapVsBound,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, v: f64) -> f64 {
        MARGIN + (v - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn polyline(frame: &Frame, pts: &[(f64, f64)], color: &str, dashed: bool) -> String {
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"{dash} points=\"{}\"/>\n",
        coords.join(" ")
    )
}

/// Label, stroke color, dashed, points.
type Series<'a> = (&'a str, &'a str, bool, Vec<(f64, f64)>);

/// Static SVG line plot of the successful rows. The x-range always covers `[0, 1]`.
pub fn render_plot(rows: &[SweepRow], kind: PlotKind) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Config("no rows to plot".into()));
    }
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let series: Vec<Series> = match kind {
        PlotKind::InversePoi => vec![(
            "J(x0)/J(x*)",
            "#1f77b4",
            false,
            ok.iter().map(|r| (r.param, r.inverse_poi)).collect(),
        )],
        PlotKind::GapVsBound => vec![
            ("gap", "#1f77b4", false, ok.iter().map(|r| (r.param, r.gap)).collect()),
            (
                "lower bound",
                "#d62728",
                true,
                ok.iter().filter_map(|r| r.bound.map(|b| (r.param, b))).collect(),
            ),
        ],
    };
    let xs = rows.iter().map(|r| r.param);
    let x = (xs.clone().fold(0.0, f64::min), xs.fold(1.0, f64::max));
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.3.iter().map(|p| p.1))
        .filter(|v| v.is_finite())
        .collect();
    let (mut ylo, mut yhi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if !ylo.is_finite() {
        (ylo, yhi) = (0.0, 1.0);
    }
    if yhi - ylo < 1e-12 {
        let pad = yhi.abs().max(1.0) * 1e-3;
        (ylo, yhi) = (ylo - pad, yhi + pad);
    }
    let pad = 0.05 * (yhi - ylo);
    let frame = Frame {
        x,
        y: (ylo - pad, yhi + pad),
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let (x0, x1) = (frame.px(frame.x.0), frame.px(frame.x.1));
    let (y0, y1) = (frame.py(frame.y.0), frame.py(frame.y.1));
    let _ = writeln!(
        svg,
        "<path d=\"M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}\" fill=\"none\" stroke=\"black\"/>"
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = frame.x.0 + t * (frame.x.1 - frame.x.0);
        let yv = frame.y.0 + t * (frame.y.1 - frame.y.0);
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{xv:.2}</text>",
            frame.px(xv),
            y0 + 18.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{yv:.4}</text>",
            x0 - 6.0,
            frame.py(yv) + 4.0
        );
    }
    let xlabel = match kind {
        PlotKind::InversePoi => "mixing weight",
        PlotKind::GapVsBound => "ring weight",
    };
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{xlabel}</text>",
        0.5 * (x0 + x1),
        HEIGHT - 12.0
    );
    for (i, (label, color, dashed, pts)) in series.iter().enumerate() {
        if pts.len() > 1 {
            svg.push_str(&polyline(&frame, pts, color, *dashed));
        }
        let ly = MARGIN - 30.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{:.2}\" y=\"{:.2}\">{label}</text>",
            x1 - 140.0,
            x1 - 110.0,
            x1 - 104.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(rows: &[SweepRow], kind: PlotKind, path: &Path) -> Result<()> {
    fs::write(path, render_plot(rows, kind)?)?;
    Ok(())
}
