//! Versioned JSON file formats and SVG rendering.
//!
//! Every document starts with a `format` tag and an integer `version`. Both
//! are checked before the body is decoded, so a file written by a newer
//! release is rejected instead of being half-read.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::harness::{BatchReport, InstanceFamily, RunOutcome};
use crate::layout::{CircleId, CircleSpec, LayoutError, ProblemInstance};
use crate::solver::{PairPolicy, Solution, SolverConfig};

pub const INSTANCE_FORMAT: &str = "rotpack-instance";
pub const SOLUTION_FORMAT: &str = "rotpack-solution";
pub const BATCH_FORMAT: &str = "rotpack-batch";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("expected a {expected} document, found {found:?}")]
    WrongFormat {
        expected: &'static str,
        found: String,
    },
    #[error("unsupported {format} version {found} (this build reads version {FORMAT_VERSION})")]
    UnsupportedVersion { format: &'static str, found: u32 },
    #[error("invalid instance: {0}")]
    Validation(#[from] LayoutError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

fn parse_versioned<T: DeserializeOwned>(text: &str, expected: &'static str) -> Result<T, IoError> {
    let header: Header = serde_json::from_str(text)?;
    if header.format != expected {
        return Err(IoError::WrongFormat {
            expected,
            found: header.format,
        });
    }
    if header.version != FORMAT_VERSION {
        return Err(IoError::UnsupportedVersion {
            format: expected,
            found: header.version,
        });
    }
    Ok(serde_json::from_str(text)?)
}

fn to_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types always serialize");
    s.push('\n');
    s
}

/// How a generated instance was drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorInfo {
    pub distribution: String,
    pub radius_range: [f64; 2],
    pub mass_range: [f64; 2],
    pub seed: u64,
}

impl From<&InstanceFamily> for GeneratorInfo {
    fn from(f: &InstanceFamily) -> Self {
        GeneratorInfo {
            distribution: "uniform".into(),
            radius_range: f.radius_range,
            mass_range: f.mass_range,
            seed: f.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub circles: Vec<CircleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorInfo>,
}

impl InstanceFile {
    pub fn from_instance(instance: &ProblemInstance, generator: Option<GeneratorInfo>) -> Self {
        InstanceFile {
            format: INSTANCE_FORMAT.into(),
            version: FORMAT_VERSION,
            name: instance.name().to_string(),
            circles: instance.circles().to_vec(),
            lambda: Some(instance.lambda()),
            beta: Some(instance.beta()),
            omega: Some(instance.omega()),
            generator,
        }
    }

    pub fn to_instance(&self) -> Result<ProblemInstance, LayoutError> {
        let inst = ProblemInstance::new(self.name.clone(), self.circles.clone())?;
        let inst = match (self.lambda, self.beta) {
            (None, None) => inst,
            (l, b) => inst.with_weights(
                l.unwrap_or(crate::layout::DEFAULT_LAMBDA),
                b.unwrap_or(crate::layout::DEFAULT_BETA),
            )?,
        };
        match self.omega {
            Some(w) => inst.with_omega(w),
            None => Ok(inst),
        }
    }

    pub fn to_text(&self) -> String {
        to_text(self)
    }
}

pub fn parse_instance_file(text: &str) -> Result<InstanceFile, IoError> {
    parse_versioned(text, INSTANCE_FORMAT)
}

pub fn parse_instance(text: &str) -> Result<ProblemInstance, IoError> {
    Ok(parse_instance_file(text)?.to_instance()?)
}

pub fn write_instance(instance: &ProblemInstance, generator: Option<GeneratorInfo>) -> String {
    InstanceFile::from_instance(instance, generator).to_text()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Container {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub id: CircleId,
    pub x: f64,
    pub y: f64,
}

/// Settings that produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: u64,
    /// Block count of the permutation scheme; absent for a single solve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    pub theta: f64,
    pub tolerance: f64,
    pub postopt_delta: f64,
    pub pair_policy: PairPolicy,
    pub postoptimize: bool,
}

impl ConfigEcho {
    pub fn new(config: &SolverConfig, blocks: Option<usize>) -> Self {
        ConfigEcho {
            seed: config.seed,
            blocks,
            theta: config.theta,
            tolerance: config.tolerance,
            postopt_delta: config.postopt_delta,
            pair_policy: config.pair_policy,
            postoptimize: config.postoptimize,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            theta: self.theta,
            tolerance: self.tolerance,
            postopt_delta: self.postopt_delta,
            pair_policy: self.pair_policy,
            seed: self.seed,
            postoptimize: self.postoptimize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsEcho {
    pub placements_external: usize,
    pub placements_internal: usize,
    pub placements_fallback: usize,
    pub postopt_moves: usize,
    pub candidate_evaluations: u64,
}

/// Wall-clock figures. Not covered by any determinism guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_to_best_secs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub format: String,
    pub version: u32,
    pub instance: String,
    pub container: Container,
    pub placements: Vec<Placement>,
    pub f1: f64,
    pub f2: f64,
    pub objective: f64,
    pub permutation: Vec<CircleId>,
    pub border: Vec<CircleId>,
    pub config: ConfigEcho,
    pub stats: StatsEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl SolutionFile {
    pub fn from_solution(solution: &Solution, instance_name: &str, config: ConfigEcho) -> Self {
        let s = &solution.stats;
        SolutionFile {
            format: SOLUTION_FORMAT.into(),
            version: FORMAT_VERSION,
            instance: instance_name.to_string(),
            container: Container {
                x: solution.container_center.x,
                y: solution.container_center.y,
                radius: solution.radius,
            },
            placements: solution
                .positions
                .iter()
                .map(|(&id, p)| Placement { id, x: p.x, y: p.y })
                .collect(),
            f1: solution.f1,
            f2: solution.f2,
            objective: solution.objective,
            permutation: solution.permutation.clone(),
            border: solution.border.clone(),
            config,
            stats: StatsEcho {
                placements_external: s.placements_external,
                placements_internal: s.placements_internal,
                placements_fallback: s.placements_fallback,
                postopt_moves: s.postopt_moves,
                candidate_evaluations: s.candidate_evaluations,
            },
            timing: Some(Timing {
                elapsed_secs: s.elapsed.as_secs_f64(),
                time_to_best_secs: None,
                total_secs: None,
            }),
        }
    }

    pub fn without_timing(mut self) -> Self {
        self.timing = None;
        self
    }

    pub fn center(&self) -> Point {
        Point::new(self.container.x, self.container.y)
    }

    pub fn positions(&self) -> BTreeMap<CircleId, Point> {
        self.placements
            .iter()
            .map(|p| (p.id, Point::new(p.x, p.y)))
            .collect()
    }

    pub fn to_text(&self) -> String {
        to_text(self)
    }
}

pub fn write_solution(solution: &Solution, instance_name: &str, config: ConfigEcho) -> String {
    SolutionFile::from_solution(solution, instance_name, config).to_text()
}

pub fn parse_solution(text: &str) -> Result<SolutionFile, IoError> {
    parse_versioned(text, SOLUTION_FORMAT)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub index: usize,
    pub permutation: Vec<CircleId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_secs: Option<f64>,
}

/// Structured form of a [`BatchReport`]; the best packing itself goes into
/// a separate solution file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchFile {
    pub format: String,
    pub version: u32,
    pub instance: String,
    pub size: usize,
    pub runs: usize,
    pub failures: usize,
    pub best_run: usize,
    pub min_f1: f64,
    pub mean_f1: f64,
    pub best_f2: f64,
    pub config: ConfigEcho,
    pub per_run: Vec<RunEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl BatchFile {
    pub fn from_report(report: &BatchReport, config: ConfigEcho, include_timing: bool) -> Self {
        let per_run = report
            .per_run
            .iter()
            .map(|r| {
                let (f1, f2, error) = match &r.outcome {
                    RunOutcome::Solved { f1, f2 } => (Some(*f1), Some(*f2), None),
                    RunOutcome::Failed(e) => (None, None, Some(e.clone())),
                };
                RunEntry {
                    index: r.index,
                    permutation: r.permutation.clone(),
                    f1,
                    f2,
                    error,
                    elapsed_secs: include_timing.then_some(r.elapsed.as_secs_f64()),
                }
            })
            .collect();
        BatchFile {
            format: BATCH_FORMAT.into(),
            version: FORMAT_VERSION,
            instance: report.instance_name.clone(),
            size: report.size,
            runs: report.runs(),
            failures: report.failures,
            best_run: report.best_run,
            min_f1: report.min_f1,
            mean_f1: report.mean_f1,
            best_f2: report.best.f2,
            config,
            per_run,
            timing: include_timing.then_some(Timing {
                elapsed_secs: report.total_elapsed.as_secs_f64(),
                time_to_best_secs: Some(report.time_to_best.as_secs_f64()),
                total_secs: Some(report.total_elapsed.as_secs_f64()),
            }),
        }
    }

    pub fn to_text(&self) -> String {
        to_text(self)
    }
}

pub fn parse_batch(text: &str) -> Result<BatchFile, IoError> {
    parse_versioned(text, BATCH_FORMAT)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SvgOptions {
    /// Draw the final border ring as line segments between centers.
    pub border_overlay: bool,
    /// Output width and height in pixels.
    pub size: Option<f64>,
}

/// Draws the container, every circle labeled by id and optionally the
/// border ring. The y axis points up as in the packing coordinates.
pub fn render_svg(
    solution: &SolutionFile,
    instance: &ProblemInstance,
    options: SvgOptions,
) -> String {
    let c = solution.container;
    let margin = 0.02 * c.radius;
    let half = c.radius + margin;
    let side = options.size.unwrap_or(800.0);
    let (vx, vy) = (c.x - half, -c.y - half);
    let stroke = c.radius / 400.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="{vx} {vy} {w} {w}">"#,
        w = 2.0 * half
    );
    let _ = writeln!(out, "<title>{}</title>", escape(&solution.instance));
    let _ = writeln!(
        out,
        r##"<circle class="container" cx="{}" cy="{}" r="{}" fill="none" stroke="#222" stroke-width="{}"/>"##,
        c.x,
        -c.y,
        c.radius,
        2.0 * stroke
    );
    let positions = solution.positions();
    for p in &solution.placements {
        let r = instance.circle(p.id).map_or(0.0, |s| s.radius);
        let _ = writeln!(
            out,
            r##"<circle class="item" cx="{}" cy="{}" r="{}" fill="#9cc3e6" fill-opacity="0.6" stroke="#1f4e79" stroke-width="{stroke}"/>"##,
            p.x, -p.y, r
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="{}" text-anchor="middle" dominant-baseline="central">{}</text>"#,
            p.x,
            -p.y,
            (r * 0.6).max(stroke * 4.0),
            p.id
        );
    }
    if options.border_overlay && solution.border.len() >= 2 {
        let t = solution.border.len();
        for i in 0..t {
            let (a, b) = (solution.border[i], solution.border[(i + 1) % t]);
            if let (Some(pa), Some(pb)) = (positions.get(&a), positions.get(&b)) {
                let _ = writeln!(
                    out,
                    r##"<line class="border" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#c0392b" stroke-width="{stroke}"/>"##,
                    pa.x, -pa.y, pb.x, -pb.y
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
