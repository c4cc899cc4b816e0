//! Competing trajectory families, all fitted and scored in reciprocal space.
//!
//! | family                 | reciprocal `1/S(t)`             | params |
//! |------------------------|---------------------------------|--------|
//! | `Hyperbolic1`          | decreasing line `a0 + a1 t`     | 2      |
//! | `DecreasingHyperbolic` | increasing line `a0 + a1 t`     | 2      |
//! | `HyperbolicOrderK(k)`  | degree-`k` polynomial           | k + 1  |
//! | `Exponential`          | `(1/A) exp(-r t)`               | 2      |
//!
//! Every family minimizes the same unweighted reciprocal-space SSE, so their
//! BIC values are directly comparable.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fit::{fit_first_order, FitOptions, HyperbolicFit, HyperbolicLine};
use crate::ic;
use crate::linalg::{poly_lstsq, shift_poly, weighted_line};
use crate::series::TimeSeries;
use crate::{Error, Result};

pub const DEFAULT_MAX_POLY_DEGREE: usize = 3;
const EXP_MAX_ITER: usize = 100;
const EXP_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelClass {
    Hyperbolic1,
    HyperbolicOrderK(usize),
    Exponential,
    DecreasingHyperbolic,
}

impl ModelClass {
    /// Family name without the polynomial degree.
    pub fn family(&self) -> &'static str {
        match self {
            ModelClass::Hyperbolic1 => "Hyperbolic1",
            ModelClass::HyperbolicOrderK(_) => "HyperbolicOrderK",
            ModelClass::Exponential => "Exponential",
            ModelClass::DecreasingHyperbolic => "DecreasingHyperbolic",
        }
    }

    pub fn same_family(&self, other: &ModelClass) -> bool {
        self.family() == other.family()
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelClass::HyperbolicOrderK(k) => write!(f, "HyperbolicOrderK({k})"),
            other => f.write_str(other.family()),
        }
    }
}

/// Reciprocal-space polynomial `1/S(t) = sum_j c_j t^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyRecipFit {
    /// Coefficients in ascending powers of raw `t`.
    pub coefficients: Vec<f64>,
    /// Coefficients in ascending powers of `(t - center) / scale`, used for
    /// evaluation because the raw basis loses precision at calendar years.
    pub centered_coefficients: Vec<f64>,
    pub center: f64,
    pub scale: f64,
    pub window: (f64, f64),
    pub n: usize,
    pub sse_recip: f64,
    pub bic: f64,
    /// Whether the polynomial stays positive across the fitted window.
    pub positive_on_window: bool,
}

impl PolyRecipFit {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn reciprocal_at(&self, t: f64) -> f64 {
        let s = (t - self.center) / self.scale;
        self.centered_coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * s + c)
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        positive_inverse(self.reciprocal_at(t), t, "polynomial model")
    }
}

/// `S(t) = A exp(r t)`, i.e. `1/S(t) = (1/A) exp(-r t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub amplitude: f64,
    pub rate: f64,
    /// `ln(1/S)` at `center`; evaluation goes through this to avoid
    /// overflowing `A` far from the origin.
    pub log_recip_at_center: f64,
    pub center: f64,
    pub window: (f64, f64),
    pub n: usize,
    pub sse_recip: f64,
    pub bic: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl ExpFit {
    pub fn reciprocal_at(&self, t: f64) -> f64 {
        (self.log_recip_at_center - self.rate * (t - self.center)).exp()
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        1.0 / self.reciprocal_at(t)
    }
}

fn positive_inverse(d: f64, t: f64, model: &str) -> Result<f64> {
    if d > 0.0 && d.is_finite() {
        Ok(1.0 / d)
    } else {
        Err(Error::BeyondSingularity {
            model: model.into(),
            t,
        })
    }
}

fn reciprocals(series: &TimeSeries) -> (Vec<f64>, Vec<f64>) {
    (
        series.years().collect(),
        series.values().map(|v| 1.0 / v).collect(),
    )
}

fn window_of(t: &[f64]) -> (f64, f64) {
    (t[0], t[t.len() - 1])
}

/// Least-squares degree-`k` polynomial on the reciprocal values.
pub fn fit_poly_recip(series: &TimeSeries, k: usize) -> Result<PolyRecipFit> {
    if k < 2 {
        return Err(Error::Argument(format!(
            "polynomial degree must be at least 2 (got {k}); use fit_first_order for lines"
        )));
    }
    let n = series.len();
    if n < k + 2 {
        return Err(Error::InsufficientData {
            needed: k + 2,
            got: n,
        });
    }
    let (t, y) = reciprocals(series);
    let (lo, hi) = window_of(&t);
    let center = 0.5 * (lo + hi);
    let scale = 0.5 * (hi - lo);
    let s: Vec<f64> = t.iter().map(|x| (x - center) / scale).collect();
    let centered = poly_lstsq(&s, &y, k)?;

    let mut fit = PolyRecipFit {
        coefficients: shift_poly(&centered, center, scale),
        centered_coefficients: centered,
        center,
        scale,
        window: (lo, hi),
        n,
        sse_recip: 0.0,
        bic: 0.0,
        positive_on_window: true,
    };
    fit.sse_recip = t
        .iter()
        .zip(&y)
        .map(|(&t, &y)| (y - fit.reciprocal_at(t)).powi(2))
        .sum();
    fit.bic = ic::bic(fit.sse_recip, ic::sse_floor(&y, None), n, k + 1);
    let grid = (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0);
    fit.positive_on_window = t
        .iter()
        .copied()
        .chain(grid)
        .all(|x| fit.reciprocal_at(x) > 0.0);
    Ok(fit)
}

/// Exponential fit minimizing reciprocal-space SSE.
///
/// Starts from a straight-line fit of `ln(1/S)` against `t` and refines with
/// Gauss-Newton (with step halving) until the relative SSE change drops
/// below 1e-12 or 100 iterations have run.
pub fn fit_exponential(series: &TimeSeries) -> Result<ExpFit> {
    let n = series.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let (t, y) = reciprocals(series);
    let (lo, hi) = window_of(&t);
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let u: Vec<f64> = t.iter().map(|x| (x - center) / half).collect();

    // ln y = c0 + c1 u
    let log_y: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mut c0, mut c1) = weighted_line(&u, &log_y, None)?;
    let floor = ic::sse_floor(&y, None);
    let sse_at = |c0: f64, c1: f64| -> f64 {
        u.iter()
            .zip(&y)
            .map(|(&u, &y)| (y - (c0 + c1 * u).exp()).powi(2))
            .sum()
    };
    let mut sse = sse_at(c0, c1);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < EXP_MAX_ITER {
        if sse <= floor * 1e-6 {
            converged = true;
            break;
        }
        iterations += 1;
        let (mut jtj00, mut jtj01, mut jtj11, mut g0, mut g1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&u, &y) in u.iter().zip(&y) {
            let m = (c0 + c1 * u).exp();
            let e = y - m;
            let (j0, j1) = (m, m * u);
            jtj00 += j0 * j0;
            jtj01 += j0 * j1;
            jtj11 += j1 * j1;
            g0 += j0 * e;
            g1 += j1 * e;
        }
        let det = jtj00 * jtj11 - jtj01 * jtj01;
        if !(det.is_finite() && det > 0.0) {
            break;
        }
        let d0 = (jtj11 * g0 - jtj01 * g1) / det;
        let d1 = (jtj00 * g1 - jtj01 * g0) / det;

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let (n0, n1) = (c0 + step * d0, c1 + step * d1);
            let trial = sse_at(n0, n1);
            if trial.is_finite() && trial <= sse {
                accepted = Some((n0, n1, trial));
                break;
            }
            step *= 0.5;
        }
        let Some((n0, n1, trial)) = accepted else {
            // No descent left along the Gauss-Newton direction.
            converged = true;
            break;
        };
        let rel_change = (sse - trial) / sse.max(f64::MIN_POSITIVE);
        c0 = n0;
        c1 = n1;
        sse = trial;
        if rel_change < EXP_REL_TOL {
            converged = true;
            break;
        }
    }

    let rate = -c1 / half;
    Ok(ExpFit {
        // ln(1/S) = c0 - rate (t - center) = (c0 + rate * center) - rate t
        amplitude: (-(c0 + rate * center)).exp(),
        rate,
        log_recip_at_center: c0,
        center,
        window: (lo, hi),
        n,
        sse_recip: sse,
        bic: ic::bic(sse, floor, n, 2),
        converged,
        iterations,
    })
}

/// Fitted parameters of one ranked candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    /// Reciprocal line; `constrained` is set when the slope sign required by
    /// the family forced the fit onto the flat boundary `a1 = 0`.
    Line {
        line: HyperbolicLine,
        constrained: bool,
    },
    Polynomial(PolyRecipFit),
    Exponential(ExpFit),
}

impl FittedModel {
    pub fn reciprocal_at(&self, t: f64) -> f64 {
        match self {
            FittedModel::Line { line, .. } => line.reciprocal_at(t),
            FittedModel::Polynomial(p) => p.reciprocal_at(t),
            FittedModel::Exponential(e) => e.reciprocal_at(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub class: ModelClass,
    pub bic: f64,
    pub sse_recip: f64,
    pub params: usize,
    pub fitted: FittedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    /// Candidates sorted by ascending BIC.
    pub ranking: Vec<Candidate>,
    /// Lowest BIC after the simplicity tie-break (see [`ic::select`]).
    pub winner: ModelClass,
    pub n: usize,
}

impl ClassificationResult {
    pub fn candidate(&self, class: ModelClass) -> Option<&Candidate> {
        self.ranking.iter().find(|c| c.class == class)
    }

    /// Position of `class` in the BIC ranking (0 = best).
    pub fn rank_of(&self, class: ModelClass) -> Option<usize> {
        self.ranking.iter().position(|c| c.class == class)
    }
}

fn line_candidate(
    class: ModelClass,
    line: HyperbolicLine,
    constrained: bool,
    sse: f64,
    floor: f64,
    n: usize,
) -> Candidate {
    Candidate {
        class,
        bic: ic::bic(sse, floor, n, 2),
        sse_recip: sse,
        params: 2,
        fitted: FittedModel::Line { line, constrained },
    }
}

/// Fits every family and ranks them by BIC.
pub fn classify(series: &TimeSeries, max_poly_degree: usize) -> Result<ClassificationResult> {
    let n = series.len();
    if n < 5 {
        return Err(Error::InsufficientData { needed: 5, got: n });
    }
    let (_, y) = reciprocals(series);
    let floor = ic::sse_floor(&y, None);

    let line = fit_first_order(series, FitOptions::default())?;
    let mean = y.iter().sum::<f64>() / n as f64;
    let flat = HyperbolicLine::new(mean, 0.0);
    let flat_sse: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let (grow_fit, decay_fit) = if line.a1() <= 0.0 {
        ((line.line, false, line.sse), (flat, true, flat_sse))
    } else {
        ((flat, true, flat_sse), (line.line, false, line.sse))
    };

    let mut candidates = vec![
        line_candidate(
            ModelClass::Hyperbolic1,
            grow_fit.0,
            grow_fit.1,
            grow_fit.2,
            floor,
            n,
        ),
        line_candidate(
            ModelClass::DecreasingHyperbolic,
            decay_fit.0,
            decay_fit.1,
            decay_fit.2,
            floor,
            n,
        ),
    ];

    let exp = fit_exponential(series)?;
    candidates.push(Candidate {
        class: ModelClass::Exponential,
        bic: exp.bic,
        sse_recip: exp.sse_recip,
        params: 2,
        fitted: FittedModel::Exponential(exp),
    });

    for k in 2..=max_poly_degree {
        if n < k + 2 {
            break;
        }
        let poly = fit_poly_recip(series, k)?;
        candidates.push(Candidate {
            class: ModelClass::HyperbolicOrderK(k),
            bic: poly.bic,
            sse_recip: poly.sse_recip,
            params: k + 1,
            fitted: FittedModel::Polynomial(poly),
        });
    }

    candidates.sort_by(|a, b| a.bic.total_cmp(&b.bic));
    let scored: Vec<(f64, usize)> = candidates.iter().map(|c| (c.bic, c.params)).collect();
    let winner = candidates[ic::select(&scored).unwrap_or(0)].class;
    Ok(ClassificationResult {
        ranking: candidates,
        winner,
        n,
    })
}

/// Ratio of two first-order hyperbolic models, e.g. GDP over population.
///
/// With numerator reciprocal line `A0 + A1 t` and denominator reciprocal
/// line `b0 + b1 t`, the ratio is `(b0 + b1 t) / (A0 + A1 t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioModel {
    pub numerator: HyperbolicLine,
    pub denominator: HyperbolicLine,
}

impl RatioModel {
    pub fn new(numerator: HyperbolicLine, denominator: HyperbolicLine) -> Self {
        Self {
            numerator,
            denominator,
        }
    }

    pub fn from_fits(numerator: &HyperbolicFit, denominator: &HyperbolicFit) -> Self {
        Self::new(numerator.line, denominator.line)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        ratio_value(self, t)
    }
}

pub fn ratio_value(model: &RatioModel, t: f64) -> Result<f64> {
    let num = model.numerator.reciprocal_at(t);
    let den = model.denominator.reciprocal_at(t);
    for (line, which) in [(num, "numerator"), (den, "denominator")] {
        if !(line > 0.0 && line.is_finite()) {
            return Err(Error::BeyondSingularity {
                model: format!("{which} hyperbolic model"),
                t,
            });
        }
    }
    Ok(den / num)
}
