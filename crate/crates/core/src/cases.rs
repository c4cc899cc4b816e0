//! Case studies: analysis plans over the bundled datasets, with expected
//! outcomes kept as data in `data/cases.toml`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datasets;
use crate::diverge::{
    detect_divergence, residual_scale, standardized_residuals, Direction, DivergenceParams,
};
use crate::fit::{fit_first_order, FitOptions, HyperbolicLine, Weighting};
use crate::models::classify;
use crate::report::{
    CheckOutcome, ClassificationSummary, DivergenceSummary, Expectation, FitSummary, Inputs,
    Metric, PointSummary, Quantity, ReferenceSummary, Report, SegmentSummary, StepInputs,
    StepReport, Units, DIMENSIONLESS, SCHEMA_VERSION, YEAR,
};
use crate::segment::{acceleration_ratio, fit_segmented, DEFAULT_MAX_SEGMENTS, DEFAULT_MIN_PTS};
use crate::series::TimeSeries;
use crate::{Error, Result};

const CASES_TOML: &str = include_str!("../data/cases.toml");

pub const DEFAULT_MAX_DEGREE: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseTable {
    #[serde(rename = "case")]
    pub cases: Vec<CaseStudy>,
}

impl CaseTable {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Argument(format!("invalid case table: {e}")))
    }

    pub fn get(&self, name: &str) -> Result<&CaseStudy> {
        self.cases
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::NotFound {
                kind: "case study",
                name: name.to_string(),
                valid: self.cases.iter().map(|c| c.name.clone()).collect(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudy {
    pub name: String,
    /// Name of a bundled dataset.
    pub dataset: String,
    #[serde(default)]
    pub description: String,
    #[serde(rename = "step")]
    pub steps: Vec<PlanStep>,
    #[serde(rename = "check", default)]
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub metric: String,
    pub expect: Expectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanStep {
    Fit(FitStep),
    Segment(SegmentStep),
    Diverge(DivergeStep),
    Classify(ClassifyStep),
    Point(PointStep),
    Reference(ReferenceStep),
}

impl PlanStep {
    pub fn kind(&self) -> &'static str {
        match self {
            PlanStep::Fit(_) => "fit",
            PlanStep::Segment(_) => "segment",
            PlanStep::Diverge(_) => "diverge",
            PlanStep::Classify(_) => "classify",
            PlanStep::Point(_) => "point",
            PlanStep::Reference(_) => "reference",
        }
    }

    fn id(&self) -> Option<&str> {
        match self {
            PlanStep::Fit(s) => s.id.as_deref(),
            PlanStep::Segment(s) => s.id.as_deref(),
            PlanStep::Diverge(s) => s.id.as_deref(),
            PlanStep::Classify(s) => s.id.as_deref(),
            PlanStep::Point(s) => s.id.as_deref(),
            PlanStep::Reference(s) => s.id.as_deref(),
        }
    }

    /// Prefix of the metric names this step publishes.
    pub fn metric_prefix(&self) -> &str {
        self.id().unwrap_or(self.kind())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitStep {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub exclude: Vec<f64>,
    #[serde(default)]
    pub weighting: Weighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentStep {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub exclude: Vec<f64>,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default = "default_max_segments")]
    pub max_segments: usize,
    #[serde(default = "default_min_pts")]
    pub min_pts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergeStep {
    #[serde(default)]
    pub id: Option<String>,
    pub baseline: [f64; 2],
    #[serde(default)]
    pub exclude: Vec<f64>,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default = "default_z")]
    pub z_threshold: f64,
    #[serde(default = "default_min_run")]
    pub min_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyStep {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub exclude: Vec<f64>,
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
}

/// Residual of one year against a fit over `window` that leaves it out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStep {
    #[serde(default)]
    pub id: Option<String>,
    pub year: f64,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub exclude: Vec<f64>,
    #[serde(default)]
    pub weighting: Weighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceStep {
    #[serde(default)]
    pub id: Option<String>,
    pub a0: f64,
    pub a1: f64,
}

fn default_max_segments() -> usize {
    DEFAULT_MAX_SEGMENTS
}
fn default_min_pts() -> usize {
    DEFAULT_MIN_PTS
}
fn default_z() -> f64 {
    DivergenceParams::default().z_threshold
}
fn default_min_run() -> usize {
    DivergenceParams::default().min_run
}
fn default_max_degree() -> usize {
    DEFAULT_MAX_DEGREE
}

/// The bundled case table.
pub fn case_table() -> CaseTable {
    CaseTable::parse(CASES_TOML).expect("bundled case table is valid")
}

pub fn case_names() -> Vec<String> {
    case_table().cases.into_iter().map(|c| c.name).collect()
}

pub fn case_study(name: &str) -> Result<CaseStudy> {
    case_table().get(name).cloned()
}

/// Runs a bundled case study and grades it against its expectations.
pub fn run_case_study(name: &str) -> Result<Report> {
    run_plan(&case_study(name)?)
}

/// Runs an arbitrary case study against its bundled dataset.
pub fn run_plan(case: &CaseStudy) -> Result<Report> {
    let series = datasets::load_bundled(&case.dataset)?;
    let units = Units::for_series_unit(series.unit());
    let mut metrics = BTreeMap::new();
    let mut steps = Vec::with_capacity(case.steps.len());
    for step in &case.steps {
        let (report, published) = execute_step(&series, step, &units)?;
        let prefix = step.metric_prefix();
        for (name, value) in published {
            metrics.insert(format!("{prefix}.{name}"), value);
        }
        steps.push(report);
    }
    let checks: Vec<CheckOutcome> = case
        .checks
        .iter()
        .map(|c| {
            let actual = metrics.get(&c.metric).cloned();
            CheckOutcome {
                metric: c.metric.clone(),
                pass: c.expect.check(actual.as_ref(), &metrics),
                expect: c.expect.clone(),
                actual,
            }
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "case".into(),
        inputs: Inputs {
            dataset: case.dataset.clone(),
            label: series.label().to_string(),
            unit: series.unit().to_string(),
            case_study: Some(case.name.clone()),
        },
        steps,
        checks,
        pass: Some(pass),
    })
}

/// Applies exclusions, then restricts to `window` when one is given.
pub fn prepare(
    series: &TimeSeries,
    window: Option<[f64; 2]>,
    exclude: &[f64],
) -> Result<TimeSeries> {
    let kept = series.exclude(exclude);
    let Some([lo, hi]) = window else {
        return Ok(kept);
    };
    let sliced = kept.slice(lo, hi)?;
    if sliced.is_empty() {
        return Err(Error::Argument(format!(
            "window [{lo}, {hi}] does not overlap the data"
        )));
    }
    Ok(sliced)
}

type Published = Vec<(String, Metric)>;

fn num(name: impl Into<String>, v: f64, unit: &str) -> (String, Metric) {
    (name.into(), Metric::Number(Quantity::new(v, unit)))
}

fn text(name: impl Into<String>, v: &str) -> (String, Metric) {
    (name.into(), Metric::Text(v.to_string()))
}

fn publish_line(out: &mut Published, prefix: &str, line: &HyperbolicLine, units: &Units) {
    out.push(num(format!("{prefix}a0"), line.a0, &units.reciprocal));
    out.push(num(format!("{prefix}a1"), line.a1, &units.slope()));
    if let Some(ts) = line.singularity_time() {
        out.push(num(format!("{prefix}singularity"), ts, YEAR));
    }
}

/// Runs one analysis step, returning its report section and the metrics it
/// publishes (names without the step prefix).
pub fn execute_step(
    series: &TimeSeries,
    step: &PlanStep,
    units: &Units,
) -> Result<(StepReport, Published)> {
    let mut out = Published::new();
    let report = match step {
        PlanStep::Fit(s) => {
            let data = prepare(series, s.window, &s.exclude)?;
            let fit = fit_first_order(&data, FitOptions::weighted(s.weighting))?;
            publish_line(&mut out, "", &fit.line, units);
            out.push(num("r2_recip", fit.r2_recip, DIMENSIONLESS));
            out.push(num("rmse_recip", fit.rmse_recip, &units.reciprocal));
            out.push(num("n", fit.n as f64, "count"));
            StepReport::Fit {
                inputs: StepInputs {
                    window: s.window,
                    excluded: s.exclude.clone(),
                    weighting: Some(s.weighting),
                    ..Default::default()
                },
                fit: FitSummary::new(&fit, units),
            }
        }
        PlanStep::Segment(s) => {
            let data = prepare(series, s.window, &s.exclude)?;
            let seg = fit_segmented(
                &data,
                s.max_segments,
                s.min_pts,
                FitOptions::weighted(s.weighting),
            )?;
            out.push(num("count", seg.segment_count() as f64, "count"));
            for (i, b) in seg.breakpoints.iter().enumerate() {
                out.push(num(format!("breakpoint.{i}"), *b, YEAR));
                if let Ok(r) = acceleration_ratio(&seg, i) {
                    out.push(num(format!("acceleration.{i}"), r, DIMENSIONLESS));
                }
            }
            for (i, f) in seg.segments.iter().enumerate() {
                publish_line(&mut out, &format!("{i}."), &f.line, units);
            }
            out.push(num("bic", seg.bic, DIMENSIONLESS));
            StepReport::Segment {
                inputs: StepInputs {
                    window: s.window,
                    excluded: s.exclude.clone(),
                    weighting: Some(s.weighting),
                    max_segments: Some(s.max_segments),
                    min_pts: Some(s.min_pts),
                    ..Default::default()
                },
                segmented: SegmentSummary::new(&seg, units),
            }
        }
        PlanStep::Diverge(s) => {
            let data = prepare(series, None, &s.exclude)?;
            let params = DivergenceParams {
                z_threshold: s.z_threshold,
                min_run: s.min_run,
            };
            let rep = detect_divergence(
                &data,
                (s.baseline[0], s.baseline[1]),
                params,
                FitOptions::weighted(s.weighting),
            )?;
            out.push(text("direction", rep.direction.as_str()));
            if let Some(onset) = rep.onset {
                out.push(num("onset", onset, YEAR));
            }
            out.push(num("run_length", rep.run_length as f64, "count"));
            out.push(num("max_z", rep.max_z, DIMENSIONLESS));
            publish_line(&mut out, "baseline.", &rep.baseline.line, units);
            StepReport::Diverge {
                inputs: StepInputs {
                    excluded: s.exclude.clone(),
                    weighting: Some(s.weighting),
                    baseline: Some(s.baseline),
                    z_threshold: Some(s.z_threshold),
                    min_run: Some(s.min_run),
                    ..Default::default()
                },
                divergence: DivergenceSummary::new(&rep, units),
            }
        }
        PlanStep::Classify(s) => {
            let data = prepare(series, s.window, &s.exclude)?;
            let res = classify(&data, s.max_degree)?;
            out.push(text("winner", &res.winner.to_string()));
            for (rank, c) in res.ranking.iter().enumerate() {
                out.push(num(format!("bic.{}", c.class), c.bic, DIMENSIONLESS));
                out.push(num(format!("rank.{}", c.class), rank as f64, "rank"));
            }
            StepReport::Classify {
                inputs: StepInputs {
                    window: s.window,
                    excluded: s.exclude.clone(),
                    max_degree: Some(s.max_degree),
                    ..Default::default()
                },
                classification: ClassificationSummary::new(&res, units),
            }
        }
        PlanStep::Point(s) => {
            let observed = series
                .value_at(s.year)
                .ok_or_else(|| Error::Argument(format!("no observation at year {}", s.year)))?;
            let mut exclude = s.exclude.clone();
            exclude.push(s.year);
            let data = prepare(series, s.window, &exclude)?;
            let fit = fit_first_order(&data, FitOptions::weighted(s.weighting))?;
            let scale = residual_scale(&fit, &data);
            let single =
                TimeSeries::from_pairs(&[(s.year, observed)], series.unit(), series.label())?;
            let r = standardized_residuals(&fit, &single, scale)?[0];
            let direction = if r.residual > 0.0 {
                Direction::Slower
            } else if r.residual < 0.0 {
                Direction::Faster
            } else {
                Direction::None
            };
            out.push(text("direction", direction.as_str()));
            out.push(num("residual", r.residual, &units.reciprocal));
            out.push(num("z", r.z, DIMENSIONLESS));
            out.push(num("abs_z", r.z.abs(), DIMENSIONLESS));
            StepReport::Point {
                inputs: StepInputs {
                    window: s.window,
                    excluded: s.exclude.clone(),
                    weighting: Some(s.weighting),
                    year: Some(s.year),
                    ..Default::default()
                },
                point: PointSummary {
                    year: Quantity::year(s.year),
                    observed: Quantity::new(observed, units.value.clone()),
                    model: fit
                        .evaluate(s.year)
                        .ok()
                        .map(|m| Quantity::new(m, units.value.clone())),
                    residual: Quantity::new(r.residual, units.reciprocal.clone()),
                    z: Quantity::dimensionless(r.z),
                    direction,
                    fit: FitSummary::new(&fit, units),
                },
            }
        }
        PlanStep::Reference(s) => {
            let line = HyperbolicLine::new(s.a0, s.a1);
            publish_line(&mut out, "", &line, units);
            StepReport::Reference {
                reference: ReferenceSummary::new(&line, units),
            }
        }
    };
    Ok((report, out))
}
