//! Piecewise first-order hyperbolic fits.
//!
//! Breakpoints sit between consecutive observed samples. For every segment
//! count up to `max_segments` the placement with the smallest total
//! reciprocal-space objective is found by dynamic programming, and the count
//! is then chosen by BIC with `3m - 1` parameters for `m` segments (two line
//! constants per segment plus one location per breakpoint).

use serde::{Deserialize, Serialize};

use crate::fit::{fit_first_order, FitOptions, HyperbolicFit};
use crate::ic;
use crate::series::TimeSeries;
use crate::{Error, Result};

pub const DEFAULT_MAX_SEGMENTS: usize = 2;
pub const DEFAULT_MIN_PTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedFit {
    /// Midpoints between the last year of one segment and the first of the next.
    pub breakpoints: Vec<f64>,
    pub segments: Vec<HyperbolicFit>,
    /// Index of the first sample of each segment.
    pub starts: Vec<usize>,
    pub sse_recip: f64,
    pub bic: f64,
    pub n: usize,
    /// Best objective using at most `k` segments, for `k = 1..=max_segments`.
    pub sse_profile: Vec<f64>,
    /// BIC of the best `k`-segment placement, for `k = 1..=max_segments`.
    pub bic_by_count: Vec<f64>,
}

impl SegmentedFit {
    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// Segment whose span (extended halfway into the neighbouring gaps)
    /// contains `t`; years outside the data go to the first or last segment.
    pub fn segment_for(&self, t: f64) -> &HyperbolicFit {
        let idx = self.breakpoints.iter().take_while(|&&b| t >= b).count();
        &self.segments[idx]
    }
}

/// Parameter count charged to an `m`-segment model.
pub fn parameter_count(segments: usize) -> usize {
    3 * segments - 1
}

/// SSE floor used when scoring segmentations of `series`.
pub fn sse_floor(series: &TimeSeries, options: FitOptions) -> f64 {
    let y: Vec<f64> = series.values().map(|v| 1.0 / v).collect();
    let w: Vec<f64> = series
        .values()
        .map(|v| options.weighting.weight(v))
        .collect();
    ic::sse_floor(&y, Some(&w))
}

pub fn segmentation_bic(sse: f64, floor: f64, n: usize, segments: usize) -> f64 {
    ic::bic(sse, floor, n, parameter_count(segments))
}

fn sub_series(series: &TimeSeries, start: usize, end: usize) -> Result<TimeSeries> {
    TimeSeries::new(
        series.points()[start..end].to_vec(),
        series.unit(),
        series.label(),
    )
}

/// Best segmentation with at most `max_segments` pieces of at least
/// `min_pts` samples each.
pub fn fit_segmented(
    series: &TimeSeries,
    max_segments: usize,
    min_pts: usize,
    options: FitOptions,
) -> Result<SegmentedFit> {
    if max_segments == 0 {
        return Err(Error::Argument("max_segments must be at least 1".into()));
    }
    if min_pts < 3 {
        return Err(Error::Argument("min_pts must be at least 3".into()));
    }
    let n = series.len();
    let needed = max_segments * min_pts;
    if n < needed {
        return Err(Error::InsufficientData { needed, got: n });
    }

    // cost[i][j]: objective of one segment over samples i..j (exclusive).
    let mut cost = vec![vec![f64::INFINITY; n + 1]; n + 1];
    for (i, row) in cost.iter_mut().enumerate().take(n) {
        for (j, cell) in row.iter_mut().enumerate().skip(i + min_pts) {
            *cell = fit_first_order(&sub_series(series, i, j)?, options)?.sse;
        }
    }

    // best[m][j]: smallest objective covering samples 0..j with m + 1 segments.
    let mut best = vec![vec![f64::INFINITY; n + 1]; max_segments];
    let mut from = vec![vec![0usize; n + 1]; max_segments];
    best[0][..=n].copy_from_slice(&cost[0][..=n]);
    for m in 1..max_segments {
        for j in ((m + 1) * min_pts)..=n {
            for i in (m * min_pts)..=(j - min_pts) {
                let candidate = best[m - 1][i] + cost[i][j];
                if candidate < best[m][j] {
                    best[m][j] = candidate;
                    from[m][j] = i;
                }
            }
        }
    }

    let floor = sse_floor(series, options);
    let bic_by_count: Vec<f64> = (0..max_segments)
        .map(|m| segmentation_bic(best[m][n], floor, n, m + 1))
        .collect();
    let candidates: Vec<(f64, usize)> = bic_by_count
        .iter()
        .enumerate()
        .map(|(m, &b)| (b, parameter_count(m + 1)))
        .collect();
    let chosen = ic::select(&candidates).ok_or(Error::InsufficientData { needed, got: n })?;

    let mut sse_profile = Vec::with_capacity(max_segments);
    let mut running = f64::INFINITY;
    for row in &best {
        running = running.min(row[n]);
        sse_profile.push(running);
    }

    let mut starts = vec![0usize; chosen + 1];
    let mut end = n;
    for m in (1..=chosen).rev() {
        let start = from[m][end];
        starts[m] = start;
        end = start;
    }

    let mut segments = Vec::with_capacity(chosen + 1);
    for (k, &start) in starts.iter().enumerate() {
        let end = starts.get(k + 1).copied().unwrap_or(n);
        segments.push(fit_first_order(&sub_series(series, start, end)?, options)?);
    }
    let pts = series.points();
    let breakpoints = starts[1..]
        .iter()
        .map(|&s| 0.5 * (pts[s - 1].t + pts[s].t))
        .collect();

    Ok(SegmentedFit {
        breakpoints,
        segments,
        starts,
        sse_recip: best[chosen][n],
        bic: bic_by_count[chosen],
        n,
        sse_profile,
        bic_by_count,
    })
}

/// `|a1(i+1)| / |a1(i)|`: how much faster the reciprocal line falls after
/// breakpoint `i`.
pub fn acceleration_ratio(seg: &SegmentedFit, i: usize) -> Result<f64> {
    if i + 1 >= seg.segments.len() {
        return Err(Error::Argument(format!(
            "breakpoint index {i} out of range for {} segment(s)",
            seg.segments.len()
        )));
    }
    let before = seg.segments[i].a1();
    if before == 0.0 {
        return Err(Error::UndefinedRatio(format!("segment {i} has zero slope")));
    }
    Ok(seg.segments[i + 1].a1().abs() / before.abs())
}
