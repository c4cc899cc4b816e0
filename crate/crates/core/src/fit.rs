//! First-order hyperbolic fitting by linear regression in reciprocal space.
//!
//! The model is `S(t) = 1 / (a0 + a1 t)`; its reciprocal is the straight line
//! `a0 + a1 t`. Growth means `a1 < 0`, and the line then reaches zero at the
//! singularity time `t_s = -a0 / a1`, where `S` diverges.

use serde::{Deserialize, Serialize};

use crate::ic;
use crate::linalg::weighted_line;
use crate::series::TimeSeries;
use crate::{Error, Result};

/// How reciprocal residuals enter the least-squares objective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Plain least squares on the reciprocal values.
    #[default]
    Uniform,
    /// Each reciprocal residual is multiplied by `value^2` before squaring.
    ///
    /// Since `d(1/S) = -dS / S^2`, the scaled residual is a first-order
    /// approximation of the residual in value space, which removes the
    /// magnification of small values in the reciprocal display.
    ValueSquared,
}

impl Weighting {
    /// Weight on the squared residual of a point with the given value.
    pub fn weight(self, value: f64) -> f64 {
        match self {
            Weighting::Uniform => 1.0,
            Weighting::ValueSquared => value.powi(4),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Weighting::Uniform => "uniform",
            Weighting::ValueSquared => "value_squared",
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Weighting::Uniform),
            "value_squared" => Ok(Weighting::ValueSquared),
            other => Err(Error::Argument(format!(
                "unknown weighting '{other}' (expected uniform or value_squared)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitOptions {
    pub weighting: Weighting,
}

impl FitOptions {
    pub fn weighted(weighting: Weighting) -> Self {
        Self { weighting }
    }
}

/// The reciprocal line `a0 + a1 t` and the hyperbolic model it encodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicLine {
    pub a0: f64,
    pub a1: f64,
}

impl HyperbolicLine {
    pub fn new(a0: f64, a1: f64) -> Self {
        Self { a0, a1 }
    }

    /// The raw reciprocal line, defined for every `t`.
    pub fn reciprocal_at(&self, t: f64) -> f64 {
        self.a0 + self.a1 * t
    }

    /// `S(t) = 1 / (a0 + a1 t)`; fails once the line is no longer positive.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let d = self.reciprocal_at(t);
        if d > 0.0 && d.is_finite() {
            Ok(1.0 / d)
        } else {
            Err(Error::BeyondSingularity {
                model: "hyperbolic model".into(),
                t,
            })
        }
    }

    /// Where the reciprocal line crosses zero, for growing models only.
    pub fn singularity_time(&self) -> Option<f64> {
        (self.a1 < 0.0).then(|| -self.a0 / self.a1)
    }

    /// Relative growth rate `S'/S = -a1 S(t)`, per year.
    pub fn growth_rate(&self, t: f64) -> Result<f64> {
        Ok(-self.a1 * self.evaluate(t)?)
    }

    /// `1/value - (a0 + a1 t)` for each point, in series order.
    ///
    /// A positive residual means the observation lies below the model, i.e.
    /// slower growth than the hyperbolic law predicts.
    pub fn residuals_recip(&self, series: &TimeSeries) -> Result<Vec<(f64, f64)>> {
        if series.is_empty() {
            return Err(Error::Argument("residuals need a non-empty series".into()));
        }
        Ok(series
            .points()
            .iter()
            .map(|p| (p.t, 1.0 / p.value - self.reciprocal_at(p.t)))
            .collect())
    }
}

/// A fitted first-order hyperbolic model with its goodness-of-fit metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicFit {
    pub line: HyperbolicLine,
    /// First and last fitted year.
    pub window: (f64, f64),
    pub n: usize,
    pub weighting: Weighting,
    /// Value of the minimized objective (weighted when weighting is not uniform).
    pub sse: f64,
    pub rmse_recip: f64,
    pub r2_recip: f64,
    /// `None` when some fitted year lies at or beyond the singularity.
    pub rmse_direct: Option<f64>,
}

impl HyperbolicFit {
    pub fn a0(&self) -> f64 {
        self.line.a0
    }

    pub fn a1(&self) -> f64 {
        self.line.a1
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        self.line.evaluate(t)
    }

    pub fn singularity_time(&self) -> Option<f64> {
        self.line.singularity_time()
    }

    pub fn growth_rate(&self, t: f64) -> Result<f64> {
        self.line.growth_rate(t)
    }

    pub fn residuals_recip(&self, series: &TimeSeries) -> Result<Vec<(f64, f64)>> {
        self.line.residuals_recip(series)
    }
}

/// Fits `1/value ~ a0 + a1 t` by (optionally weighted) least squares.
pub fn fit_first_order(series: &TimeSeries, options: FitOptions) -> Result<HyperbolicFit> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let t: Vec<f64> = series.years().collect();
    let v: Vec<f64> = series.values().collect();
    let y: Vec<f64> = v.iter().map(|v| 1.0 / v).collect();
    let w: Option<Vec<f64>> = match options.weighting {
        Weighting::Uniform => None,
        wt => Some(v.iter().map(|&v| wt.weight(v)).collect()),
    };
    let (a0, a1) = weighted_line(&t, &y, w.as_deref())?;
    let line = HyperbolicLine::new(a0, a1);

    let weight = |i: usize| w.as_ref().map_or(1.0, |w| w[i]);
    let resid: Vec<f64> = (0..n).map(|i| y[i] - line.reciprocal_at(t[i])).collect();
    let sse: f64 = (0..n).map(|i| weight(i) * resid[i] * resid[i]).sum();
    let rmse_recip = (resid.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();

    let sw: f64 = (0..n).map(weight).sum();
    let y_bar = (0..n).map(|i| weight(i) * y[i]).sum::<f64>() / sw;
    let sst: f64 = (0..n).map(|i| weight(i) * (y[i] - y_bar).powi(2)).sum();
    let floor = ic::sse_floor(&y, w.as_deref());
    let r2_recip = if sst <= floor {
        if sse <= floor {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - sse / sst).clamp(0.0, 1.0)
    };

    let rmse_direct = (0..n)
        .map(|i| line.evaluate(t[i]).map(|m| (v[i] - m).powi(2)))
        .sum::<Result<f64>>()
        .ok()
        .map(|s| (s / n as f64).sqrt());

    Ok(HyperbolicFit {
        line,
        window: (t[0], t[n - 1]),
        n,
        weighting: options.weighting,
        sse,
        rmse_recip,
        r2_recip,
        rmse_direct,
    })
}
