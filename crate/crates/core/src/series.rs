//! Time-series data model, CSV ingestion and elementary transforms.
//!
//! Years use astronomical numbering (1 BC = 0, 2 BC = -1) so arithmetic on
//! `t` stays linear across eras. Every value is strictly positive because the
//! reciprocal transform is undefined otherwise.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Unit assigned to parsed series that carry no `# unit:` directive.
pub const UNSPECIFIED_UNIT: &str = "unspecified";

/// A single `(year, value)` sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePoint {
    pub t: f64,
    pub value: f64,
}

impl TimePoint {
    pub fn new(t: f64, value: f64) -> Self {
        Self { t, value }
    }
}

/// Ordered samples with strictly increasing years and positive values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    points: Vec<TimePoint>,
    unit: String,
    label: String,
}

impl TimeSeries {
    /// Builds a series, checking every invariant. Points must already be
    /// sorted by strictly increasing year.
    pub fn new(
        points: Vec<TimePoint>,
        unit: impl Into<String>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let unit = unit.into();
        for (i, p) in points.iter().enumerate() {
            if !p.t.is_finite() {
                return Err(Error::Argument(format!(
                    "point {i}: year {} is not finite",
                    p.t
                )));
            }
            if !(p.value.is_finite() && p.value > 0.0) {
                return Err(Error::Argument(format!(
                    "point {i}: value {} is not a finite positive number",
                    p.value
                )));
            }
            if i > 0 && points[i - 1].t >= p.t {
                return Err(Error::Argument(format!(
                    "point {i}: years must be strictly increasing ({} then {})",
                    points[i - 1].t,
                    p.t
                )));
            }
        }
        if !points.is_empty() && unit.trim().is_empty() {
            return Err(Error::Argument("a non-empty series needs a unit".into()));
        }
        Ok(Self {
            points,
            unit,
            label: label.into(),
        })
    }

    /// Convenience constructor from parallel slices.
    pub fn from_pairs(pairs: &[(f64, f64)], unit: &str, label: &str) -> Result<Self> {
        let points = pairs.iter().map(|&(t, v)| TimePoint::new(t, v)).collect();
        Self::new(points, unit, label)
    }

    pub fn points(&self) -> &[TimePoint] {
        &self.points
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.t)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    /// `(first year, last year)`, or `None` for an empty series.
    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.t, self.points.last()?.t))
    }

    pub fn value_at(&self, year: f64) -> Option<f64> {
        self.points.iter().find(|p| p.t == year).map(|p| p.value)
    }

    /// Same series under a different label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn with_points(&self, points: Vec<TimePoint>) -> Self {
        Self {
            points,
            unit: self.unit.clone(),
            label: self.label.clone(),
        }
    }

    /// Point-wise `(t, 1/value)`. The unit becomes `1/(unit)`; taking the
    /// reciprocal twice restores the original unit string.
    pub fn reciprocal(&self) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| TimePoint::new(p.t, 1.0 / p.value))
            .collect();
        Self {
            points,
            unit: reciprocal_unit(&self.unit),
            label: self.label.clone(),
        }
    }

    /// Points with `t_min <= t <= t_max`.
    pub fn slice(&self, t_min: f64, t_max: f64) -> Result<Self> {
        if t_min.is_nan() || t_max.is_nan() || t_min > t_max {
            return Err(Error::Argument(format!(
                "slice bounds out of order: {t_min} > {t_max}"
            )));
        }
        let points = self
            .points
            .iter()
            .filter(|p| p.t >= t_min && p.t <= t_max)
            .copied()
            .collect();
        Ok(self.with_points(points))
    }

    /// Drops the listed years; years not present are ignored.
    pub fn exclude(&self, years: &[f64]) -> Self {
        let points = self
            .points
            .iter()
            .filter(|p| !years.contains(&p.t))
            .copied()
            .collect();
        self.with_points(points)
    }

    /// Serializes to the CSV dialect read by [`parse_csv`].
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if !self.label.is_empty() {
            let _ = writeln!(out, "# label: {}", self.label);
        }
        if !self.unit.is_empty() {
            let _ = writeln!(out, "# unit: {}", self.unit);
        }
        out.push_str("year,value\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.t, p.value);
        }
        out
    }
}

fn reciprocal_unit(unit: &str) -> String {
    match unit.strip_prefix("1/(").and_then(|u| u.strip_suffix(')')) {
        Some(inner) if balanced(inner) => inner.to_string(),
        _ => format!("1/({unit})"),
    }
}

fn balanced(s: &str) -> bool {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

/// Parses `year,value` rows.
///
/// Lines starting with `#` are comments; `# unit:` and `# label:` set the
/// series unit and label. Blank lines are skipped and a single `year,value`
/// header is accepted before the first data row. Rows may arrive in any
/// order and are sorted by year.
pub fn parse_csv(text: &str) -> Result<TimeSeries> {
    let mut unit: Option<String> = None;
    let mut label = String::new();
    let mut rows: Vec<(usize, TimePoint)> = Vec::new();
    let mut header_allowed = true;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, val)) = comment.split_once(':') {
                match key.trim().to_ascii_lowercase().as_str() {
                    "unit" => unit = Some(val.trim().to_string()),
                    "label" => label = val.trim().to_string(),
                    _ => {}
                }
            }
            continue;
        }
        if header_allowed && is_header(line) {
            header_allowed = false;
            continue;
        }
        header_allowed = false;

        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 fields `year,value`, found {}", fields.len()),
            });
        }
        let t = parse_number(fields[0], line_no, "year")?;
        let value = parse_number(fields[1], line_no, "value")?;
        if value <= 0.0 {
            return Err(Error::Domain {
                line: line_no,
                value,
            });
        }
        rows.push((line_no, TimePoint::new(t, value)));
    }

    rows.sort_by(|a, b| a.1.t.total_cmp(&b.1.t).then(a.0.cmp(&b.0)));
    for pair in rows.windows(2) {
        if pair[0].1.t == pair[1].1.t {
            return Err(Error::DuplicateYear {
                line: pair[1].0,
                year: pair[1].1.t,
            });
        }
    }

    let points: Vec<TimePoint> = rows.into_iter().map(|(_, p)| p).collect();
    let unit = match unit {
        Some(u) if !u.is_empty() => u,
        _ if points.is_empty() => String::new(),
        _ => UNSPECIFIED_UNIT.to_string(),
    };
    TimeSeries::new(points, unit, label)
}

fn is_header(line: &str) -> bool {
    let mut it = line.split(',').map(|f| f.trim().to_ascii_lowercase());
    matches!(
        (it.next().as_deref(), it.next().as_deref(), it.next()),
        (Some("year"), Some("value"), None)
    )
}

fn parse_number(field: &str, line: usize, what: &str) -> Result<f64> {
    let parsed = field.parse::<f64>().ok().filter(|x| x.is_finite());
    parsed.ok_or_else(|| Error::Parse {
        line,
        message: format!("{what} `{field}` is not a finite number"),
    })
}
