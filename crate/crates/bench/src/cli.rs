use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdpt_core::model::instance_to_json;
use pdpt_core::{load_instance, load_solution, save_solution, validate_instance, validate_solution, Instance, Solution};
use pdpt_lbbd::{branch_and_check, build_master};
use pdpt_lns::{run_search, Method, SearchConfig};
use pdpt_milp::{exact_oracle_solve, export_model, Backend, BuiltinBackend, ExternalFileBackend, Limits, ModelFormat};
use serde_json::json;

use crate::bench::{run_benchmark, BenchmarkSuite};
use crate::coords::read_node_file;
use crate::generator::generate_instance;
use crate::params::{GeneratorParams, TwClass};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pdpt", version, about = "Pickup and delivery with transfers: generate, solve, validate, benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an instance.
    Gen(GenArgs),
    /// Solve an instance and write the best solution.
    Solve(SolveArgs),
    /// Check an instance, and optionally a solution against it.
    Validate(ValidateArgs),
    /// Compare the search methods over several instances.
    Bench(BenchArgs),
    /// Write the master MILP of an instance as LP or MPS.
    ExportModel(ExportArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 25)]
    requests: usize,
    #[arg(long, default_value = "L", value_parser = parse_tw)]
    tw: TwClass,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed fleet size instead of the binary search.
    #[arg(long)]
    fleet: Option<usize>,
    /// Transfer points; by default 3 to 6 depending on the request count.
    #[arg(long)]
    transfers: Option<usize>,
    #[arg(long, default_value_t = 5.0)]
    radius_km: f64,
    /// Node file, CSV `id,lat,lon`; a synthetic disc otherwise.
    #[arg(long)]
    nodes: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_tw(s: &str) -> Result<TwClass, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveMethod {
    Rlns,
    Ls,
    Multiop,
    Lbbd,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendChoice {
    Builtin,
    ExternalFile,
}

#[derive(Debug, Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "rlns")]
    method: SolveMethod,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// Seconds; per restart for the searches, overall for lbbd.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Incumbent solution file for lbbd.
    #[arg(long)]
    warm_start: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "builtin")]
    backend: BackendChoice,
    /// Solver command for the external-file backend; the model and
    /// solution paths are appended.
    #[arg(long, num_args = 1.., allow_hyphen_values = true)]
    solver_cmd: Vec<String>,
    /// Search configuration file (TOML or JSON); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Solution output file.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Per-iteration CSV of the searches.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Per-iteration cut log of lbbd.
    #[arg(long)]
    cut_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    instance: PathBuf,
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Instance files; ignored when a suite file is given.
    instances: Vec<PathBuf>,
    /// TOML suite listing instance paths and method configurations.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    instance: PathBuf,
    /// `.lp` or `.mps`.
    #[arg(short, long)]
    output: PathBuf,
}

/// A failure reported on standard error with its exit code.
struct Failure(i32, String);

fn fail(msg: impl ToString) -> Failure {
    Failure(EXIT_FAILURE, msg.to_string())
}

fn usage(msg: impl ToString) -> Failure {
    Failure(EXIT_USAGE, msg.to_string())
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 when solving or validation fails, 2 on usage errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Validate(a) => validate(a, out),
        Command::Bench(a) => bench(a, out),
        Command::ExportModel(a) => export(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| fail(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(fail),
    }
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    load_instance(path).map_err(fail)
}

fn gen(a: GenArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut params = GeneratorParams::new(a.requests, a.tw);
    params.fleet = a.fleet;
    params.transfers = a.transfers;
    params.radius_km = a.radius_km;
    if let Some(path) = &a.nodes {
        params.nodes = Some(read_node_file(path).map_err(|e| fail(format!("{}: {e}", path.display())))?);
    }
    params.validate().map_err(usage)?;
    let inst = generate_instance(&params, a.seed).map_err(fail)?;
    let mut text = instance_to_json(&inst);
    text.push('\n');
    write_or_print(a.output.as_deref(), &text, out)
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let inst = read_instance(&a.instance)?;
    let start = Instant::now();
    let (solution, mut summary) = match a.method {
        SolveMethod::Rlns | SolveMethod::Ls | SolveMethod::Multiop => {
            let method = match a.method {
                SolveMethod::Rlns => Method::Rlns,
                SolveMethod::Ls => Method::Ls,
                _ => Method::Multiop,
            };
            let mut config = match &a.config {
                Some(p) => SearchConfig::load(p).map_err(usage)?,
                None => SearchConfig::default(),
            };
            config.method = method;
            config.seed = a.seed.unwrap_or(config.seed);
            config.restarts = a.restarts.unwrap_or(config.restarts);
            config.patience = a.patience.unwrap_or(config.patience);
            config.time_limit = a.time_limit.or(config.time_limit);
            config.validate().map_err(usage)?;
            let report = run_search(&inst, &config).map_err(fail)?;
            if let Some(path) = &a.trace {
                let file = std::fs::File::create(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
                report.write_trace(file).map_err(fail)?;
            }
            let summary = json!({
                "best": report.best_cost(),
                "avg": report.avg_cost(),
                "avg_time_s": report.avg_time(),
                "restarts": report.restarts.len(),
            });
            (report.best().best.clone(), summary)
        }
        SolveMethod::Lbbd => {
            let backend: Box<dyn Backend> = match a.backend {
                BackendChoice::Builtin => Box::new(BuiltinBackend::new()),
                BackendChoice::ExternalFile => {
                    if a.solver_cmd.is_empty() {
                        return Err(usage("--backend external-file needs --solver-cmd"));
                    }
                    Box::new(ExternalFileBackend::new(a.solver_cmd.clone(), std::env::temp_dir()))
                }
            };
            let warm: Option<Solution> = match &a.warm_start {
                Some(p) => Some(load_solution(&inst, p).map_err(|e| fail(format!("{}: {e}", p.display())))?),
                None => None,
            };
            let limits = Limits { time: a.time_limit.map(Duration::from_secs_f64), gap: 0.0 };
            let res = branch_and_check(&inst, backend.as_ref(), warm.as_ref(), &limits).map_err(fail)?;
            if let Some(path) = &a.cut_log {
                std::fs::write(path, res.cut_log_csv()).map_err(|e| fail(format!("{}: {e}", path.display())))?;
            }
            let summary = res.to_json();
            let sol = res.solution.ok_or_else(|| fail("no feasible solution found within the limits"))?;
            (sol, summary)
        }
        SolveMethod::Oracle => {
            let sol = exact_oracle_solve(&inst).map_err(fail)?;
            (sol.clone(), json!({ "optimum": sol.objective() }))
        }
    };
    summary["objective"] = json!(solution.objective());
    summary["wall_time_s"] = json!(start.elapsed().as_secs_f64());
    if let Some(path) = &a.output {
        save_solution(&solution, path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    }
    writeln!(out, "{summary}").map_err(fail)
}

fn validate(a: ValidateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let inst = read_instance(&a.instance)?;
    let mut problems: Vec<String> = validate_instance(&inst).iter().map(|v| v.to_string()).collect();
    if let Some(path) = &a.solution {
        let sol = load_solution(&inst, path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
        problems.extend(validate_solution(&inst, &sol).iter().map(|v| v.to_string()));
        if !sol.is_complete() {
            problems.push(format!("unserved requests {:?}", sol.unserved()));
        }
    }
    for p in &problems {
        writeln!(out, "{p}").map_err(fail)?;
    }
    if problems.is_empty() {
        writeln!(out, "ok").map_err(fail)
    } else {
        Err(fail(format!("{} violation(s)", problems.len())))
    }
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut suite = match &a.suite {
        Some(p) => BenchmarkSuite::load(p).map_err(fail)?,
        None => {
            if a.instances.is_empty() {
                return Err(usage("bench needs instance files or --suite"));
            }
            let instances = a.instances.iter().map(|p| read_instance(p)).collect::<Result<Vec<_>, _>>()?;
            BenchmarkSuite::new(instances, 10, 0)
        }
    };
    suite.restarts = a.restarts.unwrap_or(suite.restarts);
    suite.seed = a.seed.unwrap_or(suite.seed);
    if suite.restarts == 0 {
        return Err(usage("--restarts must be at least 1"));
    }
    if let Some(p) = a.patience {
        for m in &mut suite.methods {
            m.patience = p;
        }
    }
    let report = run_benchmark(&suite).map_err(fail)?;
    write_or_print(a.output.as_deref(), &report.to_csv(), out)
}

fn export(a: ExportArgs) -> Result<(), Failure> {
    let format = ModelFormat::from_path(&a.output).ok_or_else(|| usage("output must end in .lp or .mps"))?;
    let inst = read_instance(&a.instance)?;
    let master = build_master(&inst);
    export_model(&master.model, format, &a.output).map_err(fail)
}
