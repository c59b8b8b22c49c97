//! Scenario files, runs and reports.
//!
//! A scenario names two sets, a start point and a stop rule. Running it
//! writes `<name>.trace.csv` and `<name>.report.json` into an output
//! directory. Both files depend only on the configuration and seed.

mod catalog;
mod trace_csv;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    asymptotic_regularity_tail, classify, displacement_estimate, displacement_series,
    gap_limit_estimate, gap_series, DisplacementEstimate, GapEstimate, GapSeries, TrajectoryClass,
    TrajectoryVerdict, MONOTONE_SLACK,
};
use crate::error::Error;
use crate::iteration::{alternate, dykstra, Algorithm, StopReason, StopRule, Trace};
use crate::sampling::{gaussian_point, rng_from_seed, GENERATOR_NAME};
use crate::sets::{ConvexSet, SetDescriptor};
use crate::space::Point;

pub use catalog::{builtin, catalog, CatalogEntry};
pub use trace_csv::{read_gap_series, read_iterates, write_trace};
pub use verify::{run_suite, verify, Projector, Suite, VerifyOptions, VerifyReport, VerifyRow};

pub const SCHEMA_VERSION: u32 = 1;

/// Default tolerance for the `distance` expectation; widened to the
/// reported gap uncertainty when that is larger.
pub const DISTANCE_TOL: f64 = 1e-5;
pub const DISPLACEMENT_TOL: f64 = 1e-4;
pub const LIMIT_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: {message}")]
    Syntax {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: field `{field}`: {message}")]
    Field {
        origin: String,
        field: String,
        message: String,
    },
    #[error("unknown builtin scenario `{0}`")]
    UnknownBuiltin(String),
    #[error("trace csv, line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error(transparent)]
    Core(#[from] Error),
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Seeded Gaussian start point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStart {
    pub seed: u64,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub random: RandomStart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartPoint {
    Fixed(Point),
    Random(RandomSpec),
}

/// Expectations checked after a run. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attained: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict_class: Option<TrajectoryClass>,
    /// Final iterate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub dimension: usize,
    pub set_a: SetDescriptor,
    pub set_b: SetDescriptor,
    pub x0: StartPoint,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

/// Command-line adjustments applied on top of a configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    /// Replaces the seed of a random start point.
    pub seed: Option<u64>,
    pub max_pairs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RngRecord {
    pub generator: String,
    pub seed: u64,
}

/// A validated configuration with its sets and start point built.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub set_a: ConvexSet,
    pub set_b: ConvexSet,
    pub x0: Point,
    pub rng: Option<RngRecord>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(io_error(path))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    /// Validates the configuration and builds the sets and start point.
    pub fn prepare(&self, overrides: Overrides) -> Result<Scenario, ScenarioError> {
        let field = |field: &str, message: String| ScenarioError::Field {
            origin: self.name.clone(),
            field: field.to_string(),
            message,
        };
        if self.schema_version != SCHEMA_VERSION {
            return Err(field(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        let valid_name = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
        if !valid_name {
            return Err(field(
                "name",
                "use letters, digits, '-', '_' or '.' (it names the output files)".into(),
            ));
        }
        if self.dimension == 0 {
            return Err(field("dimension", "must be at least 1".into()));
        }
        let dim = self.dimension;
        let build = |name: &str, d: &SetDescriptor| -> Result<ConvexSet, ScenarioError> {
            let set = ConvexSet::try_from(d.clone()).map_err(|e| field(name, e.to_string()))?;
            if set.ambient_dim() != dim {
                return Err(field(
                    name,
                    format!(
                        "set lives in dimension {}, scenario in {dim}",
                        set.ambient_dim()
                    ),
                ));
            }
            Ok(set)
        };
        let set_a = build("set_a", &self.set_a)?;
        let set_b = build("set_b", &self.set_b)?;

        let (x0, rng) = match &self.x0 {
            StartPoint::Fixed(p) => (p.clone(), None),
            StartPoint::Random(RandomSpec { random }) => {
                if !(random.scale.is_finite() && random.scale > 0.0) {
                    return Err(field(
                        "x0.random.scale",
                        "must be positive and finite".into(),
                    ));
                }
                let seed = overrides.seed.unwrap_or(random.seed);
                let x0 = gaussian_point(dim, random.scale, &mut rng_from_seed(seed));
                let record = RngRecord {
                    generator: GENERATOR_NAME.to_string(),
                    seed,
                };
                (x0, Some(record))
            }
        };
        if x0.dim() != dim {
            return Err(field(
                "x0",
                format!("has dimension {}, expected {dim}", x0.dim()),
            ));
        }

        let mut config = self.clone();
        if let Some(max_pairs) = overrides.max_pairs {
            config.stop.max_pairs = max_pairs;
        }
        config
            .stop
            .validate()
            .map_err(|e| field("stop", e.to_string()))?;
        if let Some(expected) = &self.expected {
            for (name, p) in [
                ("expected.v", &expected.v),
                ("expected.limit", &expected.limit),
            ] {
                if let Some(p) = p {
                    if p.dim() != dim {
                        return Err(field(
                            name,
                            format!("has dimension {}, expected {dim}", p.dim()),
                        ));
                    }
                }
            }
        }
        Ok(Scenario {
            config,
            set_a,
            set_b,
            x0,
            rng,
        })
    }
}

/// One comparison against the expected block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Check {
    fn numeric(
        name: &str,
        expected: String,
        observed: String,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        Check {
            name: name.to_string(),
            expected,
            observed,
            residual: Some(residual),
            tolerance: Some(tolerance),
            passed: residual <= tolerance,
        }
    }

    fn exact(name: &str, expected: String, observed: String) -> Self {
        Check {
            passed: expected == observed,
            name: name.to_string(),
            expected,
            observed,
            residual: None,
            tolerance: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub name: String,
    pub algorithm: Algorithm,
    pub dimension: usize,
    pub x0: Point,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<RngRecord>,
    pub stop_rule: StopRule,
    pub stop_reason: StopReason,
    /// Projection pairs performed.
    pub pairs: usize,
    pub final_iterate: Point,
    pub gap_limit: GapEstimate,
    /// Both gap series nonincreasing over the whole run.
    pub gaps_monotone: bool,
    pub displacement: DisplacementEstimate,
    pub asymptotic_regularity_tail: f64,
    pub verdict: TrajectoryVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<Check>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

impl ScenarioReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().flatten().find(|c| !c.passed)
    }
}

/// A finished run, before anything is written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub trace: Trace,
    pub gaps: GapSeries,
    pub report: ScenarioReport,
    pub elapsed: Duration,
}

fn expectation_checks(expected: &Expected, report: &ScenarioReport) -> Vec<Check> {
    let mut checks = Vec::new();
    let class = report.verdict.class;
    if let Some(d) = expected.distance {
        let tol = expected
            .distance_tol
            .unwrap_or(DISTANCE_TOL)
            .max(report.gap_limit.uncertainty);
        let got = report.gap_limit.value;
        checks.push(Check::numeric(
            "distance",
            d.to_string(),
            got.to_string(),
            (got - d).abs(),
            tol,
        ));
    }
    if let Some(attained) = expected.attained {
        let converged = matches!(
            class,
            TrajectoryClass::ConvergedIntoIntersection | TrajectoryClass::ConvergedAttainedGap
        );
        checks.push(Check::exact(
            "attained",
            attained.to_string(),
            converged.to_string(),
        ));
    }
    if let Some(v) = &expected.v {
        let got = &report.displacement.value;
        let tol = expected.v_tol.unwrap_or(DISPLACEMENT_TOL);
        checks.push(Check::numeric(
            "v",
            v.to_string(),
            got.to_string(),
            got.distance(v),
            tol,
        ));
    }
    if let Some(want) = expected.verdict_class {
        checks.push(Check::exact(
            "verdict_class",
            class_name(want),
            class_name(class),
        ));
    }
    if let Some(limit) = &expected.limit {
        let got = &report.final_iterate;
        let tol = expected.limit_tol.unwrap_or(LIMIT_TOL);
        checks.push(Check::numeric(
            "limit",
            limit.to_string(),
            got.to_string(),
            got.distance(limit),
            tol,
        ));
    }
    checks
}

pub fn class_name(class: TrajectoryClass) -> String {
    serde_json::to_value(class)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

impl Scenario {
    /// Runs the iteration and diagnostics.
    pub fn execute(&self) -> Result<Outcome, ScenarioError> {
        let start = Instant::now();
        let cfg = &self.config;
        let trace = match cfg.algorithm {
            Algorithm::Alternate => alternate(&self.set_a, &self.set_b, &self.x0, cfg.stop)?,
            Algorithm::Dykstra => dykstra(&self.set_a, &self.set_b, &self.x0, cfg.stop)?,
        };
        let gaps = gap_series(&trace)?;
        let verdict = classify(&trace, &gaps)?;
        let mut report = ScenarioReport {
            schema_version: SCHEMA_VERSION,
            name: cfg.name.clone(),
            algorithm: cfg.algorithm,
            dimension: cfg.dimension,
            x0: self.x0.clone(),
            rng: self.rng.clone(),
            stop_rule: cfg.stop,
            stop_reason: trace.stop_reason(),
            pairs: trace.pairs(),
            final_iterate: trace.last().clone(),
            gap_limit: gap_limit_estimate(&gaps)?,
            gaps_monotone: trace.gap_monitor().is_monotone(MONOTONE_SLACK),
            displacement: displacement_estimate(&displacement_series(&trace)?)?,
            asymptotic_regularity_tail: asymptotic_regularity_tail(&trace)?,
            verdict,
            checks: None,
            passed: None,
        };
        if let Some(expected) = &cfg.expected {
            let checks = expectation_checks(expected, &report);
            report.passed = Some(checks.iter().all(|c| c.passed));
            report.checks = Some(checks);
        }
        Ok(Outcome {
            trace,
            gaps,
            report,
            elapsed: start.elapsed(),
        })
    }
}

impl Outcome {
    pub fn trace_path(&self, out_dir: &Path) -> PathBuf {
        out_dir.join(format!("{}.trace.csv", self.report.name))
    }

    pub fn report_path(&self, out_dir: &Path) -> PathBuf {
        out_dir.join(format!("{}.report.json", self.report.name))
    }

    /// Writes the trace CSV and the report JSON into `out_dir`.
    pub fn write(&self, out_dir: &Path) -> Result<(), ScenarioError> {
        fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;
        let trace_path = self.trace_path(out_dir);
        let file = fs::File::create(&trace_path).map_err(io_error(&trace_path))?;
        write_trace(&self.trace, std::io::BufWriter::new(file))?;
        let report_path = self.report_path(out_dir);
        let mut json = self.report.to_json();
        json.push('\n');
        fs::write(&report_path, json).map_err(io_error(&report_path))
    }

    /// 0 on success, 2 when an expectation failed.
    pub fn exit_code(&self) -> u8 {
        match self.report.passed {
            Some(false) => 2,
            _ => 0,
        }
    }
}

/// Loads `source` (a path, or the name of a builtin when no such file
/// exists), runs it and writes the outputs.
pub fn run(source: &str, out_dir: &Path, overrides: Overrides) -> Result<Outcome, ScenarioError> {
    let path = Path::new(source);
    let config = if path.exists() {
        ScenarioConfig::load(path)?
    } else {
        builtin(source).ok_or_else(|| match path.extension() {
            Some(_) => ScenarioError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::from(std::io::ErrorKind::NotFound),
            },
            None => ScenarioError::UnknownBuiltin(source.to_string()),
        })?
    };
    let outcome = config.prepare(overrides)?.execute()?;
    outcome.write(out_dir)?;
    Ok(outcome)
}
