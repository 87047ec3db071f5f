use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use floorplan::fa::FaError;
use floorplan::heuristic::HeuristicError;
use floorplan::instances::{
    named_instance, random_instance, NamedInstanceId, RandomParams, TemplateChoice, TemplateId,
};
use floorplan::io::{instance_from_json, instance_to_json, solution_from_json, solution_to_json};
use floorplan::milp::{BranchAndBound, ExternalCommand, MilpBackend, SOLVER_ENV};
use floorplan::model::{FloorDistance, Instance};
use floorplan::pipeline::{default_backend, evaluate, solve, Fraction, Mode, PipelineConfig, PipelineError};
use floorplan::render::render_svg;

const EXIT_FAILURE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(name = "floorplan", version, about = "Room placement with group proximity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a named or random instance file.
    Gen(GenArgs),
    /// Solve an instance and write a solution file.
    Solve(SolveArgs),
    /// Re-check a solution file against its instance.
    Eval { solution: PathBuf, instance: PathBuf },
    /// Draw a solution as SVG.
    Render {
        solution: PathBuf,
        instance: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// One file per floor, named `<out stem>-floor<N>.svg`.
        #[arg(long)]
        per_floor_svg: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceRule {
    Linear,
    Quadratic,
}

#[derive(Args)]
struct DistanceArgs {
    /// Floor-to-floor distance rule.
    #[arg(long, value_enum)]
    distance: Option<DistanceRule>,
    /// Meters per floor for the distance rule.
    #[arg(long, default_value_t = 20.0)]
    floor_step: f64,
    /// Minimum corridor frontage of a corner room's excess, meters.
    #[arg(long)]
    min_front: Option<f64>,
}

impl DistanceArgs {
    fn floor_distance(&self) -> Option<FloorDistance> {
        self.distance.map(|d| match d {
            DistanceRule::Linear => FloorDistance::Linear { step: self.floor_step },
            DistanceRule::Quadratic => FloorDistance::Quadratic { step: self.floor_step },
        })
    }
}

#[derive(Args)]
struct GenArgs {
    /// Named instance such as `sM-3M`.
    #[arg(required_unless_present = "random", conflicts_with = "random")]
    name: Option<String>,
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    floors: usize,
    #[arg(long, default_value_t = 3)]
    groups: usize,
    /// Comma-separated room sizes.
    #[arg(long, value_delimiter = ',', default_value = "6,8,12,15")]
    sizes: Vec<f64>,
    /// Target room area as a share of capacity.
    #[arg(long, default_value_t = 0.7)]
    fill: f64,
    #[arg(long)]
    max_rooms: Option<u32>,
    /// Reference plan (`f_S`, `f_M`, `f_L`, `f_XL`) for every floor instead of random plans.
    #[arg(long)]
    template: Option<String>,
    #[command(flatten)]
    distance: DistanceArgs,
    /// Output file; standard output if omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverChoice {
    /// External binary from the environment, else HiGHS if built in, else the built-in engine.
    Auto,
    Builtin,
    Highs,
    External,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "global")]
    mode: Mode,
    /// Seconds per floor-planning solve.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    /// Seconds for the floor-assignment solve.
    #[arg(long, default_value_t = 60.0)]
    fa_time_limit: f64,
    /// Scaling grid step as `p/q` or a decimal; defaults to one square meter of floor capacity.
    #[arg(long)]
    scale_step: Option<Fraction>,
    #[command(flatten)]
    distance: DistanceArgs,
    #[arg(long, value_enum, default_value_t = SolverChoice::Auto)]
    solver: SolverChoice,
    /// Solve floors one after another.
    #[arg(long)]
    sequential: bool,
    /// Solution file; the summary line is printed either way.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Error with the exit code it maps to.
struct Failure(u8, String);

impl<E: std::fmt::Display> From<(u8, E)> for Failure {
    fn from((code, e): (u8, E)) -> Self {
        Failure(code, e.to_string())
    }
}

fn input_err<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure(EXIT_INPUT, format!("{}: {e}", path.display()))
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path).map_err(input_err(path))?;
    instance_from_json(&text).map_err(input_err(path))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure(EXIT_FAILURE, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let mut instance = if args.random {
        let template = match &args.template {
            Some(name) => TemplateChoice::Named(
                TemplateId::ALL
                    .into_iter()
                    .find(|t| t.name().eq_ignore_ascii_case(name))
                    .ok_or_else(|| Failure(EXIT_INPUT, format!("unknown template `{name}`")))?,
            ),
            None => TemplateChoice::Random { max_edges: 4, max_corners: 2 },
        };
        if !(0.0..=1.0).contains(&args.fill) {
            return Err(Failure(EXIT_INPUT, "fill must lie in [0, 1]".into()));
        }
        if args.sizes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Failure(EXIT_INPUT, "room sizes must be positive".into()));
        }
        let params = RandomParams {
            floors: args.floors,
            template,
            groups: args.groups,
            sizes: args.sizes.clone(),
            fill_ratio: args.fill,
            max_rooms: args.max_rooms,
            ..RandomParams::default()
        };
        random_instance(args.seed, &params)
    } else {
        let name = args.name.as_deref().unwrap_or_default();
        named_instance(name.parse::<NamedInstanceId>().map_err(|e| Failure(EXIT_INPUT, e))?)
    };
    if let Some(d) = args.distance.floor_distance() {
        instance.building.floor_distance = d;
    }
    if let Some(m) = args.distance.min_front {
        instance.params.min_front = m;
    }
    instance.validate().map_err(|e| Failure(EXIT_INPUT, e.to_string()))?;
    write_output(args.out.as_deref(), &instance_to_json(&instance))
}

fn backend(choice: SolverChoice) -> Result<Box<dyn MilpBackend>, Failure> {
    match choice {
        SolverChoice::Auto => Ok(default_backend()),
        SolverChoice::Builtin => Ok(Box::new(BranchAndBound::default())),
        SolverChoice::External => ExternalCommand::from_env()
            .map(|e| Box::new(e) as Box<dyn MilpBackend>)
            .ok_or_else(|| Failure(EXIT_INPUT, format!("set {SOLVER_ENV} to the solver binary"))),
        #[cfg(feature = "highs")]
        SolverChoice::Highs => Ok(Box::new(floorplan::milp::Highs::default())),
        #[cfg(not(feature = "highs"))]
        SolverChoice::Highs => Err(Failure(EXIT_INPUT, "built without the `highs` feature".into())),
    }
}

fn exit_code(e: &PipelineError) -> u8 {
    match e {
        PipelineError::Config(_) | PipelineError::Model(_) => EXIT_INPUT,
        PipelineError::Infeasible
        | PipelineError::Floor { .. }
        | PipelineError::Fa(FaError::Infeasible | FaError::InfeasibleByArea { .. })
        | PipelineError::Heuristic(HeuristicError::InfeasibleByArea { .. } | HeuristicError::Overfill { .. })
        | PipelineError::Fp(floorplan::fp::FpError::InfeasibleByArea { .. }) => EXIT_INFEASIBLE,
        PipelineError::NoIncumbent => EXIT_TIMEOUT,
        _ => EXIT_FAILURE,
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let instance = read_instance(&args.instance)?;
    let config = PipelineConfig {
        mode: args.mode,
        time_limit: args.time_limit,
        fa_time_limit: args.fa_time_limit,
        scale_step: args.scale_step,
        min_front: args.distance.min_front,
        floor_distance: args.distance.floor_distance(),
        parallel: !args.sequential,
        ..PipelineConfig::default()
    };
    config.validate().map_err(|e| Failure(EXIT_INPUT, e.to_string()))?;
    let backend = backend(args.solver)?;
    let instance = config.apply(&instance);
    let solution = match solve(&instance, &config, backend.as_ref()) {
        Ok(s) => s,
        Err(e) => {
            let code = exit_code(&e);
            let status = match code {
                EXIT_INFEASIBLE => "infeasible",
                EXIT_TIMEOUT => "time_limit",
                _ => "error",
            };
            println!("status={status} mode={} instance={}", config.mode, instance.name);
            return Err(Failure(code, e.to_string()));
        }
    };
    if let Some(out) = &args.out {
        write_output(Some(out), &solution_to_json(&solution, &instance))?;
    }
    let factors: Vec<String> = solution.factors().iter().map(ToString::to_string).collect();
    println!(
        "status={} mode={} instance={} cost={} floors={} floors_scaled={} worst_factor={} factors={} backend={} wall_time_s={:.3}",
        solution.status,
        solution.mode,
        instance.name,
        solution.cost,
        solution.floors.len(),
        solution.floors_scaled(),
        solution.worst_factor(),
        factors.join(","),
        solution.backend,
        solution.wall_time.as_secs_f64()
    );
    Ok(())
}

fn read_solution(
    solution: &Path,
    instance: &Path,
) -> Result<(Instance, floorplan::pipeline::MultiFloorSolution), Failure> {
    let inst = read_instance(instance)?;
    let text = std::fs::read_to_string(solution).map_err(input_err(solution))?;
    let sol = solution_from_json(&text, &inst).map_err(input_err(solution))?;
    Ok((inst, sol))
}

fn cmd_eval(solution: &Path, instance: &Path) -> Result<(), Failure> {
    let (inst, sol) = read_solution(solution, instance)?;
    let report = evaluate(&inst, &sol).map_err(|e| Failure(EXIT_INPUT, e.to_string()))?;
    let factors: Vec<String> = report.factors.iter().map(ToString::to_string).collect();
    println!(
        "valid={} violations={} cost={} stored_cost={} cost_match={} floors_scaled={} factors={}",
        report.is_valid(),
        report.violations.len(),
        report.cost,
        report.stored_cost,
        report.cost_matches(),
        report.floors_scaled(),
        factors.join(",")
    );
    for (f, v) in &report.violations {
        eprintln!("floor {}: {v:?}", f + 1);
    }
    if report.is_valid() && report.cost_matches() {
        Ok(())
    } else {
        Err(Failure(EXIT_FAILURE, "solution does not check out".into()))
    }
}

fn cmd_render(solution: &Path, instance: &Path, out: &Path, per_floor: bool) -> Result<(), Failure> {
    let (inst, sol) = read_solution(solution, instance)?;
    let docs = render_svg(&sol, &inst, per_floor).map_err(|e| Failure(EXIT_INPUT, e.to_string()))?;
    if per_floor {
        let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("floor");
        let dir = out.parent().unwrap_or(Path::new(""));
        for (f, doc) in docs.iter().enumerate() {
            write_output(Some(&dir.join(format!("{stem}-floor{}.svg", f + 1))), doc)?;
        }
    } else {
        write_output(Some(out), &docs[0])?;
    }
    println!("files={}", docs.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Eval { solution, instance } => cmd_eval(&solution, &instance),
        Command::Render { solution, instance, out, per_floor_svg } => {
            cmd_render(&solution, &instance, &out, per_floor_svg)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
