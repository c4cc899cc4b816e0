//! Detection of a sustained departure from a baseline hyperbolic fit.
//!
//! In reciprocal space effects are reversed: growth slower than the baseline
//! bends the reciprocal trajectory upwards (positive residuals), faster
//! growth bends it downwards.

use serde::{Deserialize, Serialize};

use crate::fit::{fit_first_order, FitOptions, HyperbolicFit};
use crate::ic::EXACT_FIT_RELATIVE;
use crate::series::TimeSeries;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Slower,
    Faster,
    None,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Slower => "slower",
            Direction::Faster => "faster",
            Direction::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceParams {
    pub z_threshold: f64,
    pub min_run: usize,
}

impl Default for DivergenceParams {
    fn default() -> Self {
        Self {
            z_threshold: 2.0,
            min_run: 3,
        }
    }
}

/// A residual of one observation against a fit, with its standardized size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardizedResidual {
    pub t: f64,
    pub residual: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub direction: Direction,
    pub onset: Option<f64>,
    /// Length of the terminal run of same-signed, above-threshold residuals.
    pub run_length: usize,
    /// Largest `|z|` inside that run (0 when there is none).
    pub max_z: f64,
    pub baseline: HyperbolicFit,
    /// Standardized residuals of every sample after the baseline window.
    pub post_window: Vec<StandardizedResidual>,
}

/// Scale used to standardize residuals against `fit`: its reciprocal RMSE,
/// floored so that exact fits do not turn round-off into huge z-scores.
pub fn residual_scale(fit: &HyperbolicFit, fitted: &TimeSeries) -> f64 {
    let rms_recip =
        (fitted.values().map(|v| v.powi(-2)).sum::<f64>() / fitted.len().max(1) as f64).sqrt();
    fit.rmse_recip
        .max(EXACT_FIT_RELATIVE * rms_recip)
        .max(f64::MIN_POSITIVE)
}

/// Residuals of `series` against `fit`, standardized by `scale`.
pub fn standardized_residuals(
    fit: &HyperbolicFit,
    series: &TimeSeries,
    scale: f64,
) -> Result<Vec<StandardizedResidual>> {
    Ok(fit
        .residuals_recip(series)?
        .into_iter()
        .map(|(t, residual)| StandardizedResidual {
            t,
            residual,
            z: residual / scale,
        })
        .collect())
}

/// Direction implied by a same-signed run of reciprocal residuals.
pub fn divergence_sign_of(residual_run: &[f64]) -> Result<Direction> {
    if residual_run.is_empty() {
        return Err(Error::Argument("empty residual run".into()));
    }
    if residual_run.iter().all(|&r| r > 0.0) {
        Ok(Direction::Slower)
    } else if residual_run.iter().all(|&r| r < 0.0) {
        Ok(Direction::Faster)
    } else {
        Err(Error::Argument(
            "residual run has mixed or zero signs".into(),
        ))
    }
}

/// Fits a baseline on `baseline_window` and looks for a terminal run of at
/// least `min_run` post-window residuals sharing one sign with
/// `|z| > z_threshold`. The onset is the first year of that run.
pub fn detect_divergence(
    series: &TimeSeries,
    baseline_window: (f64, f64),
    params: DivergenceParams,
    options: FitOptions,
) -> Result<DivergenceReport> {
    let (lo, hi) = baseline_window;
    let base = series.slice(lo, hi)?;
    if base.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: base.len(),
        });
    }
    let after = TimeSeries::new(
        series
            .points()
            .iter()
            .filter(|p| p.t > hi)
            .copied()
            .collect(),
        series.unit(),
        series.label(),
    )?;
    if after.is_empty() {
        return Err(Error::Argument(format!(
            "series does not extend beyond the baseline window end {hi}"
        )));
    }
    if params.min_run == 0 {
        return Err(Error::Argument("min_run must be at least 1".into()));
    }

    let baseline = fit_first_order(&base, options)?;
    let scale = residual_scale(&baseline, &base);
    let post_window = standardized_residuals(&baseline, &after, scale)?;

    let mut run: Vec<&StandardizedResidual> = Vec::new();
    for r in post_window.iter().rev() {
        let qualifies = r.z.abs() > params.z_threshold;
        let same_sign = run.last().is_none_or(|last| (last.z > 0.0) == (r.z > 0.0));
        if qualifies && same_sign {
            run.push(r);
        } else {
            break;
        }
    }
    let max_z = run.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    let run_length = run.len();

    let (direction, onset) = if run_length >= params.min_run {
        let residuals: Vec<f64> = run.iter().map(|r| r.residual).collect();
        (divergence_sign_of(&residuals)?, run.last().map(|r| r.t))
    } else {
        (Direction::None, None)
    };

    Ok(DivergenceReport {
        direction,
        onset,
        run_length,
        max_z,
        baseline,
        post_window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::HyperbolicLine;

    fn hyperbolic(line: HyperbolicLine, ts: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
        ts.map(|t| (t, line.evaluate(t).unwrap())).collect()
    }

    #[test]
    fn sign_rule() {
        assert_eq!(divergence_sign_of(&[0.1, 0.2]).unwrap(), Direction::Slower);
        assert_eq!(
            divergence_sign_of(&[-0.1, -0.2]).unwrap(),
            Direction::Faster
        );
        assert!(matches!(
            divergence_sign_of(&[0.1, -0.1]),
            Err(Error::Argument(_))
        ));
        assert!(divergence_sign_of(&[]).is_err());
    }

    #[test]
    fn noiseless_extension_has_no_divergence() {
        let line = HyperbolicLine::new(10.0, -0.004);
        let pts = hyperbolic(line, (0..40).map(|i| 1000.0 + 25.0 * i as f64));
        let s = TimeSeries::from_pairs(&pts, "u", "").unwrap();
        let rep = detect_divergence(
            &s,
            (1000.0, 1600.0),
            DivergenceParams::default(),
            FitOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.direction, Direction::None);
        assert_eq!(rep.onset, None);
        assert!(rep.post_window.iter().all(|r| r.z.abs() < 1.0));
    }

    #[test]
    fn window_errors() {
        let line = HyperbolicLine::new(10.0, -0.004);
        let pts = hyperbolic(line, (0..10).map(|i| 1000.0 + 100.0 * i as f64));
        let s = TimeSeries::from_pairs(&pts, "u", "").unwrap();
        let p = DivergenceParams::default();
        let o = FitOptions::default();
        assert!(matches!(
            detect_divergence(&s, (1000.0, 1200.0), p, o),
            Err(Error::InsufficientData { needed: 4, got: 3 })
        ));
        assert!(matches!(
            detect_divergence(&s, (1000.0, 1900.0), p, o),
            Err(Error::Argument(_))
        ));
    }

    fn noisy_with_tail(factor: f64) -> TimeSeries {
        let line = HyperbolicLine::new(10.0, -0.004);
        let pts: Vec<(f64, f64)> = (0..30)
            .map(|i| {
                let t = 1000.0 + 20.0 * i as f64;
                let wiggle = 1.0 + 0.01 * ((i * 7 % 5) as f64 - 2.0);
                let tail = if t > 1450.0 { factor } else { 1.0 };
                (t, line.evaluate(t).unwrap() * wiggle * tail)
            })
            .collect();
        TimeSeries::from_pairs(&pts, "u", "").unwrap()
    }

    #[test]
    fn slowdown_and_speedup_directions() {
        let p = DivergenceParams::default();
        let o = FitOptions::default();
        let slow = detect_divergence(&noisy_with_tail(1.0 / 1.3), (1000.0, 1400.0), p, o).unwrap();
        assert_eq!(slow.direction, Direction::Slower);
        assert_eq!(slow.onset, Some(1460.0));
        assert!(slow.run_length >= 3);
        let fast = detect_divergence(&noisy_with_tail(1.3), (1000.0, 1400.0), p, o).unwrap();
        assert_eq!(fast.direction, Direction::Faster);
        assert_eq!(fast.onset, Some(1460.0));
    }
}
