//! Plot data in direct or reciprocal space, as CSV or standalone SVG.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fit::{HyperbolicFit, HyperbolicLine};
use crate::segment::SegmentedFit;
use crate::series::TimeSeries;
use crate::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    #[default]
    Direct,
    Reciprocal,
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Space::Direct),
            "reciprocal" => Ok(Space::Reciprocal),
            other => Err(Error::Argument(format!(
                "unknown space '{other}' (expected direct or reciprocal)"
            ))),
        }
    }
}

/// A model to draw: one reciprocal line over a window, or a segmentation.
#[derive(Debug, Clone, Copy)]
pub enum PlotModel<'a> {
    Line {
        line: HyperbolicLine,
        window: (f64, f64),
    },
    Segmented(&'a SegmentedFit),
}

impl<'a> From<&'a HyperbolicFit> for PlotModel<'a> {
    fn from(fit: &'a HyperbolicFit) -> Self {
        PlotModel::Line {
            line: fit.line,
            window: fit.window,
        }
    }
}

impl<'a> From<&'a SegmentedFit> for PlotModel<'a> {
    fn from(seg: &'a SegmentedFit) -> Self {
        PlotModel::Segmented(seg)
    }
}

impl PlotModel<'_> {
    fn window(&self) -> (f64, f64) {
        match self {
            PlotModel::Line { window, .. } => *window,
            PlotModel::Segmented(seg) => (
                seg.segments[0].window.0,
                seg.segments[seg.segments.len() - 1].window.1,
            ),
        }
    }

    fn line_at(&self, t: f64) -> HyperbolicLine {
        match self {
            PlotModel::Line { line, .. } => *line,
            PlotModel::Segmented(seg) => seg.segment_for(t).line,
        }
    }

    fn singularity(&self) -> Option<f64> {
        match self {
            PlotModel::Line { line, .. } => line.singularity_time(),
            PlotModel::Segmented(seg) => seg.segments[seg.segments.len() - 1].singularity_time(),
        }
    }

    fn value_at(&self, t: f64, space: Space) -> Option<f64> {
        let line = self.line_at(t);
        match space {
            Space::Direct => line.evaluate(t).ok(),
            Space::Reciprocal => Some(line.reciprocal_at(t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub t: f64,
    pub observed: Option<f64>,
    pub model: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub space: Space,
    /// Sorted by `t`; grid rows and observation rows share a row when their years coincide.
    pub rows: Vec<PlotRow>,
    pub singularity: Option<f64>,
    /// Unit of the plotted values (the reciprocal unit in reciprocal space).
    pub unit: String,
}

impl PlotData {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,observed,model\n");
        let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.t, cell(r.observed), cell(r.model));
        }
        out
    }
}

/// Samples `model` on a dense grid over its window plus every observed year.
pub fn emit_plot_data<'a>(
    series: &TimeSeries,
    model: impl Into<PlotModel<'a>>,
    space: Space,
) -> Result<PlotData> {
    emit_plot_data_with_grid(series, model, space, DEFAULT_GRID_POINTS)
}

pub fn emit_plot_data_with_grid<'a>(
    series: &TimeSeries,
    model: impl Into<PlotModel<'a>>,
    space: Space,
    grid_points: usize,
) -> Result<PlotData> {
    let model = model.into();
    let (lo, hi) = model.window();
    let Some((first, last)) = series.span() else {
        return Err(Error::Argument("cannot plot an empty series".into()));
    };
    if hi < first || lo > last {
        return Err(Error::Argument(format!(
            "model window [{lo}, {hi}] does not overlap the data [{first}, {last}]"
        )));
    }
    if grid_points < 2 {
        return Err(Error::Argument("grid needs at least 2 points".into()));
    }

    let mut rows: Vec<PlotRow> = series
        .points()
        .iter()
        .map(|p| PlotRow {
            t: p.t,
            observed: Some(match space {
                Space::Direct => p.value,
                Space::Reciprocal => 1.0 / p.value,
            }),
            model: model.value_at(p.t, space),
        })
        .collect();
    let step = (hi - lo) / (grid_points - 1) as f64;
    for i in 0..grid_points {
        let t = if i + 1 == grid_points {
            hi
        } else {
            lo + step * i as f64
        };
        if series.value_at(t).is_none() {
            rows.push(PlotRow {
                t,
                observed: None,
                model: model.value_at(t, space),
            });
        }
    }
    rows.sort_by(|a, b| a.t.total_cmp(&b.t));
    rows.dedup_by(|b, a| a.t == b.t && a.observed.is_none() && b.observed.is_none());

    let unit = match space {
        Space::Direct => series.unit().to_string(),
        Space::Reciprocal => series.reciprocal().unit().to_string(),
    };
    Ok(PlotData {
        space,
        rows,
        singularity: model.singularity(),
        unit,
    })
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;
const MARGIN: f64 = 0.05;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    if span > 0.0 {
        (lo - MARGIN * span, hi + MARGIN * span)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * MARGIN };
        (lo - pad, hi + pad)
    }
}

fn ticks(lo: f64, hi: f64) -> (Vec<f64>, f64) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut out = Vec::new();
    let mut k = (lo / step).ceil();
    while k * step <= hi {
        out.push(k * step);
        k += 1.0;
    }
    (out, step)
}

fn tick_label(v: f64, step: f64) -> String {
    let v = if v.abs() < step * 1e-9 { 0.0 } else { v };
    if v != 0.0 && (v.abs() >= 1e6 || v.abs() < 1e-3) {
        format!("{v:.2e}")
    } else {
        let decimals = (-step.log10().floor()).max(0.0) as usize;
        format!("{v:.decimals$}")
    }
}

/// Renders plot data as an SVG 1.1 document with linear, auto-scaled axes.
pub fn emit_svg(data: &PlotData, x_label: &str, y_label: &str) -> Result<String> {
    let finite = |v: &Option<f64>| v.filter(|v| v.is_finite());
    let ys: Vec<f64> = data
        .rows
        .iter()
        .flat_map(|r| [finite(&r.observed), finite(&r.model)])
        .flatten()
        .collect();
    if data.rows.is_empty() || ys.is_empty() {
        return Err(Error::Argument("plot data is empty".into()));
    }
    let (x0, x1) = padded(data.rows[0].t, data.rows[data.rows.len() - 1].t);
    let (y0, y1) = padded(
        ys.iter().copied().fold(f64::INFINITY, f64::min),
        ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + (t - x0) / (x1 - x0) * pw;
    let sy = |v: f64| TOP + (y1 - v) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<rect class="frame" x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    let (xt, xstep) = ticks(x0, x1);
    for t in xt {
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            tick_label(t, xstep)
        );
    }
    let (yt, ystep) = ticks(y0, y1);
    for v in yt {
        let y = sy(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(v, ystep)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );

    // The model polyline breaks wherever the model is undefined.
    let mut run: Vec<String> = Vec::new();
    let flush = |run: &mut Vec<String>, s: &mut String| {
        if run.len() > 1 {
            let _ = writeln!(
                s,
                r#"<polyline class="model" fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
                run.join(" ")
            );
        }
        run.clear();
    };
    for r in &data.rows {
        match finite(&r.model) {
            Some(v) => run.push(format!("{:.2},{:.2}", sx(r.t), sy(v))),
            None => flush(&mut run, &mut s),
        }
    }
    flush(&mut run, &mut s);

    for r in &data.rows {
        if let Some(v) = finite(&r.observed) {
            let _ = writeln!(
                s,
                r#"<circle class="observed" cx="{:.2}" cy="{:.2}" r="3" fill="none" stroke="black"/>"#,
                sx(r.t),
                sy(v)
            );
        }
    }

    if let Some(ts) = data.singularity.filter(|ts| (x0..=x1).contains(ts)) {
        let x = sx(ts);
        let _ = writeln!(
            s,
            r#"<line class="singularity" x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="firebrick" stroke-dasharray="6,4"/>"#,
            TOP + ph
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
