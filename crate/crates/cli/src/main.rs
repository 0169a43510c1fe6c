use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use linf_fixpoint::bench::{self, solve_instance};
use linf_fixpoint::centerpoint::{verify_centerpoint, ArrangementOracle};
use linf_fixpoint::geometry::{search_space_cut, SearchSpace};
use linf_fixpoint::instances::{load_instance, random_affine};
use linf_fixpoint::io;
use linf_fixpoint::rat::{self, Rat};
use linf_fixpoint::solver::{ContractionInstance, Method, SolverConfig, TraceLevel};
use linf_fixpoint::volume::{
    build_arrangement, monte_carlo_pyramid, pyramid_bounding_hyperplanes, pyramid_intersection_volume, search_space_volume,
};

#[derive(Parser)]
#[command(name = "linf-fixpoint", version, about = "Approximate fixed points of l-infinity contractions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write the report as JSON.
    Solve(SolveArgs),
    /// Check a point against every halfspace of a search space.
    VerifyCenterpoint(VerifyArgs),
    /// Exact volume of a search space, or of its intersection with a pyramid.
    Volume(VolumeArgs),
    /// Run a benchmark matrix and write one CSV row per instance.
    Benchmark(BenchArgs),
}

#[derive(Args)]
struct SolverFlags {
    /// none, summary or full.
    #[arg(long, default_value = "summary")]
    trace: String,
    /// Disable memoised pyramid volumes.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file, or `random:D:LAMBDA` for a seeded random affine map.
    #[arg(long)]
    instance: String,
    #[arg(long)]
    epsilon: String,
    /// banach, centerpoint or decomposed.
    #[arg(long, default_value = "centerpoint")]
    method: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append a CSV row (the header is written when the file is new or empty).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    json_out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct VerifyArgs {
    /// Search-space JSON file or inline JSON.
    #[arg(long, required_unless_present = "replay")]
    space: Option<String>,
    /// `x1,x2,...` or a JSON array.
    #[arg(long, required_unless_present = "replay")]
    point: Option<String>,
    /// Required quality; defaults to 1/(4d).
    #[arg(long)]
    alpha: Option<String>,
    /// Re-verify every query of a centerpoint report written with `--trace full`.
    #[arg(long, conflicts_with_all = ["space", "point"])]
    replay: Option<PathBuf>,
}

#[derive(Args)]
struct VolumeArgs {
    /// Search-space JSON file or inline JSON.
    #[arg(long)]
    space: String,
    /// Pyramid `{"axis": i, "sign": +-1, "apex": [...]}` (file or inline).
    #[arg(long)]
    pyramid: Option<String>,
    /// Also print a Monte-Carlo estimate with this many samples.
    #[arg(long)]
    mc_samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the cube-clipped arrangement (cells, inequalities, volumes) as JSON.
    #[arg(long)]
    dump_arrangement: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Matrix JSON file or inline JSON.
    #[arg(long)]
    matrix: String,
    /// Overrides the matrix seed.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

/// A failure with its exit code and error kind.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, kind: "usage", message: message.into() }
    }
    fn new(kind: &'static str, message: impl ToString) -> Self {
        Failure { code: 1, kind, message: message.to_string() }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn parse_rational(flag: &str, text: &str) -> Result<Rat, Failure> {
    rat::parse_rat(text).map_err(|e| Failure::usage(format!("--{flag}: {e}")))
}

fn solver_config(flags: &SolverFlags) -> Result<SolverConfig, Failure> {
    let trace = TraceLevel::from_str(&flags.trace).map_err(Failure::usage)?;
    Ok(SolverConfig { trace, caching: !flags.no_cache, ..Default::default() })
}

fn write_json(value: &Value, path: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("json values serialise");
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::new("io", format!("{}: {e}", p.display()))),
        None => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}

fn load(spec: &str, seed: u64) -> Result<(ContractionInstance, String), Failure> {
    if let Some(rest) = spec.strip_prefix("random:") {
        let (d, lambda) = rest.split_once(':').ok_or_else(|| Failure::usage("random instances are random:D:LAMBDA"))?;
        let d: usize = d.parse().map_err(|_| Failure::usage(format!("bad dimension `{d}`")))?;
        let lambda = parse_rational("instance", lambda)?;
        let inst = random_affine(d, &lambda, seed).map_err(|e| Failure::new("instance", e))?.instance();
        return Ok((inst, format!("random:{d}:{}:seed{seed}", rat::format_rat(&lambda))));
    }
    let inst = load_instance(Path::new(spec)).map_err(|e| Failure::new("instance", e))?;
    let label = inst.label().to_string();
    Ok((inst, label))
}

fn cmd_solve(a: &SolveArgs) -> Outcome {
    let method = Method::from_str(&a.method).map_err(Failure::usage)?;
    let eps = parse_rational("epsilon", &a.epsilon)?;
    if !rat::is_positive(&eps) {
        return Err(Failure::usage("--epsilon must be positive"));
    }
    let config = solver_config(&a.solver)?;
    let (inst, label) = load(&a.instance, a.seed)?;
    let start = Instant::now();
    let report = solve_instance(&inst, method, &eps, &config).map_err(|e| Failure::new("solver", e))?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some(path) = &a.csv {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
        bench::write_report_row(&report, wall_ms, fresh, file).map_err(|e| Failure::new("io", e))?;
    }
    write_json(&io::report_json(&report, Some(&label)), a.json_out.as_deref())?;
    Ok(if report.succeeded() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn verification_json(v: &linf_fixpoint::centerpoint::Verification, alpha: &Rat) -> Value {
    json!({
        "certified": v.certified,
        "alpha": io::exact_value(alpha),
        "worst_direction": v.worst,
        "worst_volume": io::exact_value(&v.worst_volume),
        "total_volume": io::exact_value(&v.total),
        "ratio": io::exact_value(&v.ratio),
    })
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    if let Some(path) = &a.replay {
        return replay(path, a.alpha.as_deref());
    }
    let space_arg = a.space.as_deref().expect("clap requires --space");
    let point_arg = a.point.as_deref().expect("clap requires --point");
    let text = io::read_inline_or_file(space_arg).map_err(|e| Failure::new("input", e))?;
    let space = io::parse_search_space(&text).map_err(|e| Failure::new("input", e))?;
    let point = io::parse_point(point_arg).map_err(|e| Failure::new("input", e))?;
    let d = space.dim();
    let alpha = match &a.alpha {
        Some(t) => parse_rational("alpha", t)?,
        None => Rat::from_integers(1.into(), (4 * d as u64).into()),
    };
    let v = verify_centerpoint(&ArrangementOracle::new(&space), &point, &alpha).map_err(|e| Failure::new("verify", e))?;
    write_json(&verification_json(&v, &alpha), None)?;
    Ok(if v.certified { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn replay(path: &Path, alpha: Option<&str>) -> Outcome {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
    let report = io::parse_report(&text).map_err(|e| Failure::new("input", e))?;
    if report.method != Method::Centerpoint {
        return Err(Failure::new("input", "only centerpoint reports can be replayed"));
    }
    let d = report.d;
    let alpha = match alpha {
        Some(t) => parse_rational("alpha", t)?,
        None => Rat::from_integers(1.into(), (4 * d as u64).into()),
    };
    let mut space = SearchSpace::new(d).map_err(|e| Failure::new("input", e))?;
    let mut rows = Vec::new();
    let mut all = true;
    for entry in &report.trace {
        let point = entry
            .point
            .as_ref()
            .ok_or_else(|| Failure::new("input", "trace has no query points; solve with --trace full"))?;
        let v = verify_centerpoint(&ArrangementOracle::new(&space), point, &alpha).map_err(|e| Failure::new("verify", e))?;
        all &= v.certified;
        rows.push(json!({ "query": entry.query, "certified": v.certified, "ratio": io::exact_value(&v.ratio) }));
        if let Some(dir) = &entry.direction {
            space = search_space_cut(&space, dir, point).map_err(|e| Failure::new("input", e))?;
        }
    }
    write_json(&json!({ "certified": all, "alpha": io::exact_value(&alpha), "queries": rows }), None)?;
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_volume(a: &VolumeArgs) -> Outcome {
    let text = io::read_inline_or_file(&a.space).map_err(|e| Failure::new("input", e))?;
    let space = io::parse_search_space(&text).map_err(|e| Failure::new("input", e))?;
    let pyramid = match &a.pyramid {
        Some(p) => {
            let t = io::read_inline_or_file(p).map_err(|e| Failure::new("input", e))?;
            Some(io::parse_pyramid(&t, Some(space.dim())).map_err(|e| Failure::new("input", e))?)
        }
        None => None,
    };
    let exact = match &pyramid {
        Some(p) => pyramid_intersection_volume(&space, p),
        None => search_space_volume(&space),
    };
    println!("exact {}", rat::format_rat(&exact));
    println!("decimal {}", rat::format_decimal(&exact, io::DECIMAL_DIGITS));
    if let Some(n) = a.mc_samples {
        if n == 0 {
            return Err(Failure::usage("--mc-samples must be at least 1"));
        }
        let mc = monte_carlo_pyramid(&space, pyramid.as_ref(), n, a.seed);
        println!("mc {:.6} stderr {:.6} samples {}", mc.estimate, mc.stderr, mc.samples);
    }
    if let Some(path) = &a.dump_arrangement {
        let mut pieces: Vec<_> = space.cuts().iter().flat_map(pyramid_bounding_hyperplanes).collect();
        if let Some(p) = &pyramid {
            pieces.extend(pyramid_bounding_hyperplanes(p));
        }
        let arr = build_arrangement(&pieces, space.dim());
        write_json(&io::arrangement_json(&arr), Some(path))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_benchmark(a: &BenchArgs) -> Outcome {
    let config = solver_config(&a.solver)?;
    let text = io::read_inline_or_file(&a.matrix).map_err(|e| Failure::new("input", e))?;
    let mut matrix = io::parse_bench_matrix(&text).map_err(|e| Failure::new("input", e))?;
    if let Some(seed) = a.seed {
        matrix.seed = seed;
    }
    let outcomes = bench::run_matrix(&matrix, &config);
    let result = match &a.csv {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|e| Failure::new("io", format!("{}: {e}", p.display())))?;
            bench::write_csv(&outcomes, file)
        }
        None => bench::write_csv(&outcomes, std::io::stdout().lock()),
    };
    result.map_err(|e| Failure::new("io", e))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::VerifyCenterpoint(a) => cmd_verify(a),
        Command::Volume(a) => cmd_volume(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(std::io::stdout(), "{}", io::error_json(f.kind, &f.message));
            ExitCode::from(f.code)
        }
    }
}
