//! Versioned JSON report schema.
//!
//! Every numeric result is a [`Quantity`] carrying its unit. Reports are
//! plain serde types, so parsing an emitted report and writing it back
//! yields the same JSON content.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diverge::{Direction, DivergenceReport, StandardizedResidual};
use crate::fit::{HyperbolicFit, HyperbolicLine, Weighting};
use crate::models::{ClassificationResult, FittedModel};
use crate::segment::{acceleration_ratio, SegmentedFit};

pub const SCHEMA_VERSION: u32 = 1;

pub const YEAR: &str = "year";
pub const DIMENSIONLESS: &str = "dimensionless";
pub const PER_YEAR: &str = "1/year";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: impl Into<String>) -> Self {
        Self {
            value,
            unit: unit.into(),
        }
    }

    pub fn year(value: f64) -> Self {
        Self::new(value, YEAR)
    }

    pub fn dimensionless(value: f64) -> Self {
        Self::new(value, DIMENSIONLESS)
    }
}

/// Units derived from the unit of the analysed series.
#[derive(Debug, Clone)]
pub struct Units {
    pub value: String,
    pub reciprocal: String,
}

impl Units {
    pub fn for_series_unit(unit: &str) -> Self {
        Self {
            value: unit.to_string(),
            reciprocal: format!("1/({unit})"),
        }
    }

    pub fn slope(&self) -> String {
        format!("{} per year", self.reciprocal)
    }

    pub fn squared_reciprocal(&self, weighting: Weighting) -> String {
        match weighting {
            Weighting::Uniform => format!("({})^2", self.reciprocal),
            Weighting::ValueSquared => format!("({})^2", self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Inputs,
    pub steps: Vec<StepReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    /// Bundled dataset name or input file path.
    pub dataset: String,
    pub label: String,
    pub unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_study: Option<String>,
}

/// Echo of the parameters one analysis step ran with.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepInputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighting: Option<Weighting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_segments: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_pts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_run: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum StepReport {
    Fit {
        inputs: StepInputs,
        fit: FitSummary,
    },
    Segment {
        inputs: StepInputs,
        segmented: SegmentSummary,
    },
    Diverge {
        inputs: StepInputs,
        divergence: DivergenceSummary,
    },
    Classify {
        inputs: StepInputs,
        classification: ClassificationSummary,
    },
    Point {
        inputs: StepInputs,
        point: PointSummary,
    },
    Reference {
        reference: ReferenceSummary,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub a0: Quantity,
    pub a1: Quantity,
    pub window: [Quantity; 2],
    pub n: usize,
    pub weighting: Weighting,
    pub rmse_recip: Quantity,
    pub r2_recip: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmse_direct: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singularity: Option<Quantity>,
}

impl FitSummary {
    pub fn new(fit: &HyperbolicFit, units: &Units) -> Self {
        Self {
            a0: Quantity::new(fit.a0(), units.reciprocal.clone()),
            a1: Quantity::new(fit.a1(), units.slope()),
            window: [Quantity::year(fit.window.0), Quantity::year(fit.window.1)],
            n: fit.n,
            weighting: fit.weighting,
            rmse_recip: Quantity::new(fit.rmse_recip, units.reciprocal.clone()),
            r2_recip: Quantity::dimensionless(fit.r2_recip),
            rmse_direct: fit
                .rmse_direct
                .map(|r| Quantity::new(r, units.value.clone())),
            singularity: fit.singularity_time().map(Quantity::year),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub breakpoints: Vec<Quantity>,
    pub segments: Vec<FitSummary>,
    pub acceleration_ratios: Vec<Quantity>,
    pub sse_recip: Quantity,
    pub bic: Quantity,
    pub n: usize,
}

impl SegmentSummary {
    pub fn new(seg: &SegmentedFit, units: &Units) -> Self {
        let weighting = seg.segments[0].weighting;
        Self {
            breakpoints: seg.breakpoints.iter().map(|&b| Quantity::year(b)).collect(),
            segments: seg
                .segments
                .iter()
                .map(|f| FitSummary::new(f, units))
                .collect(),
            acceleration_ratios: (0..seg.breakpoints.len())
                .filter_map(|i| acceleration_ratio(seg, i).ok())
                .map(Quantity::dimensionless)
                .collect(),
            sse_recip: Quantity::new(seg.sse_recip, units.squared_reciprocal(weighting)),
            bic: Quantity::dimensionless(seg.bic),
            n: seg.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub t: Quantity,
    pub residual: Quantity,
    pub z: Quantity,
}

impl ResidualRow {
    pub fn new(r: &StandardizedResidual, units: &Units) -> Self {
        Self {
            t: Quantity::year(r.t),
            residual: Quantity::new(r.residual, units.reciprocal.clone()),
            z: Quantity::dimensionless(r.z),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSummary {
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onset: Option<Quantity>,
    pub run_length: usize,
    pub max_z: Quantity,
    pub baseline: FitSummary,
    pub post_window: Vec<ResidualRow>,
}

impl DivergenceSummary {
    pub fn new(rep: &DivergenceReport, units: &Units) -> Self {
        Self {
            direction: rep.direction,
            onset: rep.onset.map(Quantity::year),
            run_length: rep.run_length,
            max_z: Quantity::dimensionless(rep.max_z),
            baseline: FitSummary::new(&rep.baseline, units),
            post_window: rep
                .post_window
                .iter()
                .map(|r| ResidualRow::new(r, units))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub class: String,
    pub bic: Quantity,
    pub sse_recip: Quantity,
    pub params: usize,
    pub parameters: BTreeMap<String, Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub winner: String,
    pub ranking: Vec<RankEntry>,
}

impl ClassificationSummary {
    pub fn new(res: &ClassificationResult, units: &Units) -> Self {
        let ranking = res
            .ranking
            .iter()
            .map(|c| {
                let mut parameters = BTreeMap::new();
                match &c.fitted {
                    FittedModel::Line { line, .. } => {
                        parameters.insert(
                            "a0".into(),
                            Quantity::new(line.a0, units.reciprocal.clone()),
                        );
                        parameters.insert("a1".into(), Quantity::new(line.a1, units.slope()));
                    }
                    FittedModel::Polynomial(p) => {
                        for (j, &cj) in p.coefficients.iter().enumerate() {
                            let unit = match j {
                                0 => units.reciprocal.clone(),
                                _ => format!("{} per year^{j}", units.reciprocal),
                            };
                            parameters.insert(format!("c{j}"), Quantity::new(cj, unit));
                        }
                    }
                    FittedModel::Exponential(e) => {
                        parameters.insert(
                            "amplitude".into(),
                            Quantity::new(e.amplitude, units.value.clone()),
                        );
                        parameters.insert("rate".into(), Quantity::new(e.rate, PER_YEAR));
                    }
                }
                RankEntry {
                    class: c.class.to_string(),
                    bic: Quantity::dimensionless(c.bic),
                    sse_recip: Quantity::new(
                        c.sse_recip,
                        units.squared_reciprocal(Weighting::Uniform),
                    ),
                    params: c.params,
                    parameters,
                }
            })
            .collect();
        Self {
            winner: res.winner.to_string(),
            ranking,
        }
    }
}

/// One observation checked against a fit made without it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub year: Quantity,
    pub observed: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Quantity>,
    pub residual: Quantity,
    pub z: Quantity,
    pub direction: Direction,
    pub fit: FitSummary,
}

/// Reference constants evaluated as-is, for comparison with fitted ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub a0: Quantity,
    pub a1: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singularity: Option<Quantity>,
}

impl ReferenceSummary {
    pub fn new(line: &HyperbolicLine, units: &Units) -> Self {
        Self {
            a0: Quantity::new(line.a0, units.reciprocal.clone()),
            a1: Quantity::new(line.a1, units.slope()),
            singularity: line.singularity_time().map(Quantity::year),
        }
    }
}

/// A scalar or textual value extracted from a step, addressable by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metric {
    Number(Quantity),
    Text(String),
}

impl Metric {
    pub fn number(&self) -> Option<f64> {
        match self {
            Metric::Number(q) => Some(q.value),
            Metric::Text(_) => None,
        }
    }
}

/// Expected outcome for one metric of a case study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    /// `|actual / target - 1| <= rel_tol`.
    Within { target: f64, rel_tol: f64 },
    /// `min <= actual <= max`.
    Between { min: f64, max: f64 },
    /// `actual > min`.
    Greater { min: f64 },
    /// Textual equality.
    Equals { text: String },
    /// `actual < other metric`.
    Below { other: String },
}

impl Expectation {
    pub fn check(&self, actual: Option<&Metric>, metrics: &BTreeMap<String, Metric>) -> bool {
        let number = actual.and_then(Metric::number);
        match (self, number) {
            (Expectation::Within { target, rel_tol }, Some(a)) => {
                (a / target - 1.0).abs() <= *rel_tol
            }
            (Expectation::Between { min, max }, Some(a)) => *min <= a && a <= *max,
            (Expectation::Greater { min }, Some(a)) => a > *min,
            (Expectation::Equals { text }, _) => {
                matches!(actual, Some(Metric::Text(a)) if a == text)
            }
            (Expectation::Below { other }, Some(a)) => metrics
                .get(other)
                .and_then(Metric::number)
                .is_some_and(|b| a < b),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub metric: String,
    pub expect: Expectation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actual: Option<Metric>,
    pub pass: bool,
}
