//! The `recip` command-line tool.
//!
//! Exit codes: 0 on success, 1 when a case study misses an expectation,
//! 2 on usage or data errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use crate::cases::{
    self, execute_step, prepare, CaseTable, ClassifyStep, DivergeStep, FitStep, PlanStep,
    SegmentStep, DEFAULT_MAX_DEGREE,
};
use crate::datasets;
use crate::diverge::DivergenceParams;
use crate::fit::{fit_first_order, FitOptions, Weighting};
use crate::plot::{emit_plot_data, emit_svg, Space};
use crate::report::{Inputs, Report, Units, SCHEMA_VERSION};
use crate::segment::{fit_segmented, DEFAULT_MAX_SEGMENTS, DEFAULT_MIN_PTS};
use crate::series::{parse_csv, TimeSeries};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "recip",
    version,
    about = "Reciprocal-space analysis of growth series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Input {
    /// CSV file of `year,value` rows.
    #[arg(required_unless_present = "bundled", conflicts_with = "bundled")]
    file: Option<PathBuf>,
    /// Use a bundled dataset instead of a file.
    #[arg(long, value_name = "NAME")]
    bundled: Option<String>,
    /// Restrict the analysis to years A..=B.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    /// Comma-separated years to leave out.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        value_name = "Y,..."
    )]
    exclude: Vec<f64>,
}

impl Input {
    fn window(&self) -> Option<[f64; 2]> {
        self.window.as_ref().map(|w| [w[0], w[1]])
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a first-order hyperbolic model.
    Fit {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "uniform")]
        weighting: Weighting,
    },
    /// Split the series into straight reciprocal segments.
    Segment {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "uniform")]
        weighting: Weighting,
        #[arg(long, default_value_t = DEFAULT_MAX_SEGMENTS)]
        max_segments: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_PTS)]
        min_pts: usize,
    },
    /// Look for a departure from a baseline fit after its window.
    Diverge {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "uniform")]
        weighting: Weighting,
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true, allow_negative_numbers = true)]
        baseline: Vec<f64>,
        /// Threshold on the standardized residual.
        #[arg(long = "z", default_value_t = DivergenceParams::default().z_threshold)]
        z_threshold: f64,
        #[arg(long, default_value_t = DivergenceParams::default().min_run)]
        min_run: usize,
    },
    /// Rank candidate trajectory families by BIC.
    Classify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
        max_degree: usize,
    },
    /// Run a case study and grade it.
    Case {
        name: String,
        /// Read case studies from this TOML file instead of the bundled table.
        #[arg(long, value_name = "FILE")]
        table: Option<PathBuf>,
    },
    /// Emit plot data as CSV, optionally rendering an SVG.
    Plot {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "uniform")]
        weighting: Weighting,
        #[arg(long, default_value = "direct")]
        space: Space,
        /// Draw a segmentation with up to this many segments instead of one line.
        #[arg(long)]
        segments: Option<usize>,
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// List bundled datasets and case studies.
    List,
}

fn load(input: &Input) -> anyhow::Result<(String, TimeSeries)> {
    match (&input.file, &input.bundled) {
        (_, Some(name)) => Ok((name.clone(), datasets::load_bundled(name)?)),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let series = parse_csv(&text).with_context(|| format!("{}", path.display()))?;
            Ok((path.display().to_string(), series))
        }
        (None, None) => bail!("an input file or --bundled NAME is required"),
    }
}

fn single_step_report(
    command: &str,
    dataset: String,
    series: &TimeSeries,
    step: PlanStep,
) -> anyhow::Result<Report> {
    let units = Units::for_series_unit(series.unit());
    let (report, _) = execute_step(series, &step, &units)?;
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: command.into(),
        inputs: Inputs {
            dataset,
            label: series.label().to_string(),
            unit: series.unit().to_string(),
            case_study: None,
        },
        steps: vec![report],
        checks: vec![],
        pass: None,
    })
}

/// Runs one parsed invocation, writing results to `out`.
fn dispatch(cli: Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let report = match cli.command {
        Command::Fit { input, weighting } => {
            let (name, series) = load(&input)?;
            let step = PlanStep::Fit(FitStep {
                id: None,
                window: input.window(),
                exclude: input.exclude.clone(),
                weighting,
            });
            single_step_report("fit", name, &series, step)?
        }
        Command::Segment {
            input,
            weighting,
            max_segments,
            min_pts,
        } => {
            let (name, series) = load(&input)?;
            let step = PlanStep::Segment(SegmentStep {
                id: None,
                window: input.window(),
                exclude: input.exclude.clone(),
                weighting,
                max_segments,
                min_pts,
            });
            single_step_report("segment", name, &series, step)?
        }
        Command::Diverge {
            input,
            weighting,
            baseline,
            z_threshold,
            min_run,
        } => {
            let (name, series) = load(&input)?;
            let series = prepare(&series, input.window(), &[])?;
            let step = PlanStep::Diverge(DivergeStep {
                id: None,
                baseline: [baseline[0], baseline[1]],
                exclude: input.exclude.clone(),
                weighting,
                z_threshold,
                min_run,
            });
            single_step_report("diverge", name, &series, step)?
        }
        Command::Classify { input, max_degree } => {
            let (name, series) = load(&input)?;
            let step = PlanStep::Classify(ClassifyStep {
                id: None,
                window: input.window(),
                exclude: input.exclude.clone(),
                max_degree,
            });
            single_step_report("classify", name, &series, step)?
        }
        Command::Case { name, table } => {
            let case = match table {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("cannot read {}", path.display()))?;
                    CaseTable::parse(&text)?.get(&name)?.clone()
                }
                None => cases::case_study(&name)?,
            };
            let report = cases::run_plan(&case)?;
            writeln!(out, "{}", report.to_json())?;
            return Ok(if report.pass == Some(true) {
                EXIT_OK
            } else {
                EXIT_FAILED
            });
        }
        Command::Plot {
            input,
            weighting,
            space,
            segments,
            svg,
        } => {
            let (_, series) = load(&input)?;
            let data = prepare(&series, input.window(), &input.exclude)?;
            let options = FitOptions::weighted(weighting);
            let plot = match segments {
                Some(k) => {
                    let seg = fit_segmented(&data, k, DEFAULT_MIN_PTS, options)?;
                    emit_plot_data(&series, &seg, space)?
                }
                None => {
                    let fit = fit_first_order(&data, options)?;
                    emit_plot_data(&series, &fit, space)?
                }
            };
            if let Some(path) = svg {
                let y_label = match space {
                    Space::Direct => series.label().to_string(),
                    Space::Reciprocal => format!("1 / {}", series.label()),
                };
                let y_label = format!("{y_label} [{}]", plot.unit);
                let doc = emit_svg(&plot, "year", y_label.trim())?;
                std::fs::write(&path, doc)
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            write!(out, "{}", plot.to_csv())?;
            return Ok(EXIT_OK);
        }
        Command::List => {
            writeln!(out, "datasets:")?;
            for name in datasets::bundled_names() {
                writeln!(out, "  {name}")?;
            }
            writeln!(out, "case studies:")?;
            for name in cases::case_names() {
                writeln!(out, "  {name}")?;
            }
            return Ok(EXIT_OK);
        }
    };
    writeln!(out, "{}", report.to_json())?;
    Ok(EXIT_OK)
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

/// Entry point used by the `recip` binary.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}
