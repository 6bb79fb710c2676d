use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rotpack::harness::{
    generate_instance, reference_family, run_batch, summarize, BatchOptions, HarnessError,
    InstanceFamily,
};
use rotpack::io::{
    self, BatchFile, ConfigEcho, GeneratorInfo, IoError, SolutionFile, SvgOptions, Timing,
};
use rotpack::layout::{verify_placements, CircleId};
use rotpack::permutation::{
    default_block_count, descending_order, PermutationError, PermutationScheme,
};
use rotpack::solver::{solve, PairPolicy, SolverConfig};

#[derive(Parser)]
#[command(
    name = "rotpack",
    version,
    about = "Balanced circle packing in a rotating circular container"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance and write it as an instance file.
    Generate(GenerateArgs),
    /// Solve one placement order.
    Solve(SolveArgs),
    /// Solve many block-shuffled orders and keep the best.
    Batch(BatchArgs),
    /// Re-check a solution file against its instance.
    Verify(VerifyArgs),
    /// Draw a solution as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Start from a built-in reference family (e.g. set1-7, set2-25).
    #[arg(long)]
    family: Option<String>,
    #[arg(long, required_unless_present = "family")]
    size: Option<usize>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], required_unless_present = "family")]
    radius: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], required_unless_present = "family")]
    mass: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    name: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    NearestCm,
    SeededRandom,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Direction of the second seed circle, in radians.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 1e-7)]
    postopt_delta: f64,
    #[arg(long, value_enum, default_value_t = Policy::NearestCm)]
    pair_policy: Policy,
    #[arg(long)]
    no_postopt: bool,
    /// Leave wall-clock fields out so repeated runs give identical files.
    #[arg(long)]
    omit_timing: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            theta: self.theta,
            tolerance: self.tolerance,
            postopt_delta: self.postopt_delta,
            pair_policy: match self.pair_policy {
                Policy::NearestCm => PairPolicy::NearestCm,
                Policy::SeededRandom => PairPolicy::SeededRandom,
            },
            seed: self.seed,
            postoptimize: !self.no_postopt,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Comma-separated placement order; defaults to descending radius.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<CircleId>>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 5040)]
    runs: usize,
    /// Block count; defaults to 5 from ten circles up, else 1.
    #[arg(short, long)]
    blocks: Option<usize>,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Allow repeated orders when runs exceed the number of distinct ones.
    #[arg(long)]
    allow_repeats: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Where to write the best solution.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Where to write the per-run report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    solution: PathBuf,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Args)]
struct RenderArgs {
    solution: PathBuf,
    #[arg(long)]
    instance: PathBuf,
    /// Overlay the final border ring.
    #[arg(long)]
    border: bool,
    #[arg(long)]
    size: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
    fn solver(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

fn io_failure(path: &Path, e: IoError) -> Failure {
    let message = format!("{}: {e}", path.display());
    match e {
        IoError::Validation(_) => Failure::invalid(message),
        _ => Failure::usage(message),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<rotpack::ProblemInstance, Failure> {
    io::parse_instance(&read(path)?).map_err(|e| io_failure(path, e))
}

fn load_solution(path: &Path) -> Result<SolutionFile, Failure> {
    io::parse_solution(&read(path)?).map_err(|e| io_failure(path, e))
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let mut family = match &args.family {
        Some(name) => reference_family(name)
            .ok_or_else(|| Failure::usage(format!("unknown family {name:?}")))?,
        None => InstanceFamily::new("generated", 0, [0.0; 2], [0.0; 2], 0),
    };
    if let Some(n) = args.size {
        family.size = n;
    }
    if let Some(r) = &args.radius {
        family.radius_range = [r[0], r[1]];
    }
    if let Some(m) = &args.mass {
        family.mass_range = [m[0], m[1]];
    }
    if let Some(s) = args.seed {
        family.seed = s;
    }
    if let Some(name) = args.name {
        family.name = name;
    }
    let instance = generate_instance(&family).map_err(|e| Failure::invalid(e.to_string()))?;
    emit(
        args.output.as_deref(),
        &io::write_instance(&instance, Some(GeneratorInfo::from(&family))),
    )
}

fn solve_cmd(args: SolveArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let config = args.solver.config();
    let order = args
        .order
        .unwrap_or_else(|| descending_order(instance.circles()));
    let solution = solve(&instance, &order, &config).map_err(|e| match e {
        rotpack::solver::SolveError::TooFewCircles(_)
        | rotpack::solver::SolveError::InvalidPermutation(_) => Failure::invalid(e.to_string()),
        _ => Failure::solver(e.to_string()),
    })?;
    let mut file =
        SolutionFile::from_solution(&solution, instance.name(), ConfigEcho::new(&config, None));
    if args.solver.omit_timing {
        file = file.without_timing();
    }
    emit(args.output.as_deref(), &file.to_text())
}

fn batch(args: BatchArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let config = args.solver.config();
    let blocks = args
        .blocks
        .unwrap_or_else(|| default_block_count(instance.len()));
    let scheme = PermutationScheme::new(instance.circles(), blocks, config.seed)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let options = BatchOptions {
        runs: args.runs,
        parallelism: args.parallelism,
        allow_repeats: args.allow_repeats,
    };
    let report = run_batch(&instance, &scheme, options, &config).map_err(|e| match e {
        HarnessError::AllRunsFailed { .. } | HarnessError::Pool(_) => {
            Failure::solver(e.to_string())
        }
        HarnessError::Permutation(PermutationError::CountExceedsSpace { .. }) => {
            Failure::usage(format!("{e}; pass --allow-repeats or lower --runs"))
        }
        _ => Failure::usage(e.to_string()),
    })?;

    let echo = ConfigEcho::new(&config, Some(blocks));
    let keep_timing = !args.solver.omit_timing;
    if let Some(path) = &args.report {
        emit(
            Some(path),
            &BatchFile::from_report(&report, echo, keep_timing).to_text(),
        )?;
    }
    let mut file = SolutionFile::from_solution(&report.best, instance.name(), echo);
    file.timing = keep_timing.then_some(Timing {
        elapsed_secs: report.best.stats.elapsed.as_secs_f64(),
        time_to_best_secs: Some(report.time_to_best.as_secs_f64()),
        total_secs: Some(report.total_elapsed.as_secs_f64()),
    });
    match &args.output {
        Some(path) => {
            emit(Some(path), &file.to_text())?;
            print!("{}", summarize(std::slice::from_ref(&report)));
        }
        None => {
            print!("{}", file.to_text());
            eprint!("{}", summarize(std::slice::from_ref(&report)));
        }
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let solution = load_solution(&args.solution)?;
    let report = verify_placements(
        &instance,
        &solution.positions(),
        solution.center(),
        solution.container.radius,
        args.tolerance,
    )
    .map_err(|e| Failure::invalid(format!("{}: {e}", args.solution.display())))?;
    for v in &report.overlaps {
        eprintln!("overlap: circles {} and {} by {:e}", v.a, v.b, v.depth);
    }
    for v in &report.containment {
        eprintln!(
            "containment: circle {} exceeds the container by {:e}",
            v.id, v.excess
        );
    }
    if (report.f1 - solution.f1).abs() > args.tolerance {
        eprintln!(
            "f1 mismatch: file says {}, recomputed {}",
            solution.f1, report.f1
        );
    }
    if (report.f2 - solution.f2).abs() > args.tolerance * instance.total_mass() {
        eprintln!(
            "f2 mismatch: file says {}, recomputed {}",
            solution.f2, report.f2
        );
    }
    let mismatch = (report.f1 - solution.f1).abs() > args.tolerance
        || (report.f2 - solution.f2).abs() > args.tolerance * instance.total_mass();
    if !report.is_feasible() || mismatch {
        return Err(Failure::invalid(format!(
            "{} violation(s) in {}",
            report.violation_count() + mismatch as usize,
            args.solution.display()
        )));
    }
    println!(
        "ok: {} circles, f1 = {}, f2 = {:e}",
        instance.len(),
        report.f1,
        report.f2
    );
    Ok(())
}

fn render(args: RenderArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let solution = load_solution(&args.solution)?;
    if let Some(id) = solution
        .placements
        .iter()
        .map(|p| p.id)
        .find(|&id| !instance.contains(id))
    {
        return Err(Failure::invalid(format!(
            "circle {id} is not in the instance"
        )));
    }
    let svg = io::render_svg(
        &solution,
        &instance,
        SvgOptions {
            border_overlay: args.border,
            size: args.size,
        },
    );
    emit(args.output.as_deref(), &svg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Batch(a) => batch(a),
        Command::Verify(a) => verify(a),
        Command::Render(a) => render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
