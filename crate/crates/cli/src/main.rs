use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quadnet::bounds::{build_report, BoundsError, ReportOptions, SOLVER_TOLERANCE};
use quadnet::bvp::{BvpError, Solve};
use quadnet::mesh::{
    derive_network, generate_grid, parse_quadnet, parse_quadnet_unchecked, to_quadnet, validate, ConductanceSampler,
    DiagonalRule, GridError, GridSpec, Network, NetworkError, ParseError, Triangulation,
};
use quadnet::numeric::{int, parse_rational, Mode, Rational};
use quadnet::paths::{
    enumerate_thick_paths, shortest_thick_path, HorizontalVariant, Orientation, PathError, ThickPath, ThickRules,
    ENUMERATION_GUARD,
};
use quadnet::potential::{dirichlet_energy, gradient_metric, network_constants, PotentialError};
use quadnet::svg::render_svg;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Parser)]
#[command(
    name = "quadnet",
    version,
    about = "Harmonic potentials and thick-path length bounds on triangulated quadrilaterals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural invariants of a triangulation.
    Validate { file: PathBuf },
    /// Solve the mixed boundary value problem.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// Gradient metric of the solution, with m, M and k.
    Metric {
        file: PathBuf,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// Shortest thick path of one orientation.
    Paths {
        file: PathBuf,
        #[arg(long)]
        orientation: Orientation,
        /// Cross-check against exhaustive enumeration (small instances only).
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        numeric: NumericArgs,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Full bounds report for a file, or for every .quadnet file in a directory.
    Verify {
        target: PathBuf,
        /// Include per-term detail for every proof-chain link.
        #[arg(long)]
        chain: bool,
        #[command(flatten)]
        numeric: NumericArgs,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Write a grid triangulation with log-uniform conductances.
    Generate {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        cmin: f64,
        #[arg(long, default_value_t = 10.0)]
        cmax: f64,
        /// bl-tr, br-tl or alternating.
        #[arg(long, default_value = "bl-tr")]
        diagonal: DiagonalRule,
        /// Unit conductances instead of sampled ones.
        #[arg(long, conflicts_with_all = ["cmin", "cmax"])]
        unit: bool,
        /// Draw the four corners from the seed instead of the default split.
        #[arg(long)]
        random_split: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render the triangulation, the metric and both shortest thick paths.
    Svg {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        numeric: NumericArgs,
        #[command(flatten)]
        rules: RuleArgs,
    },
}

#[derive(Args, Clone)]
struct NumericArgs {
    /// exact or float.
    #[arg(long, default_value = "exact")]
    mode: Mode,
    /// Override the Dirichlet value on P4.
    #[arg(long, value_parser = parse_g)]
    g: Option<Rational>,
}

#[derive(Args, Clone, Copy)]
struct RuleArgs {
    /// Set the separation condition keeps horizontal paths away from.
    #[arg(long = "thick-horizontal-variant", value_enum, default_value_t = Separation::Verbatim)]
    separation: Separation,
}

#[derive(ValueEnum, Clone, Copy)]
enum Separation {
    /// P3, P4 and P1.
    Verbatim,
    /// The whole vertex boundary.
    #[value(name = "deltaF")]
    DeltaF,
}

impl RuleArgs {
    fn rules(self) -> ThickRules {
        let horizontal_variant = match self.separation {
            Separation::Verbatim => HorizontalVariant::Verbatim,
            Separation::DeltaF => HorizontalVariant::DeltaF,
        };
        ThickRules { horizontal_variant }
    }
}

fn parse_g(s: &str) -> Result<Rational, String> {
    let g = parse_rational(s).map_err(|e| e.to_string())?;
    if g <= int(0) {
        return Err("g must be positive".into());
    }
    Ok(g)
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Solve(#[from] BvpError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Usage(_) | CliError::Grid(_) => 2,
            CliError::Path(PathError::NoThickPath(_)) => 3,
            _ => 1,
        }
    }
}

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok,
    Failed,
    NoThickPath,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
            Status::NoThickPath => 3,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load(path: &Path, g: Option<&Rational>) -> Result<(Triangulation, Network), CliError> {
    let mut t = parse_quadnet(&read(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })?;
    if let Some(g) = g {
        t.g = g.clone();
    }
    let network = derive_network(&t)?;
    Ok((t, network))
}

fn instance_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn print(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

fn solve_json<S: Solve>(network: &Network) -> Result<Value, CliError> {
    let solution = S::solve(network, SOLVER_TOLERANCE)?;
    let energy = dirichlet_energy(&solution.values, network)?;
    let mut out = solution.to_json(network);
    out["energy"] = energy.value().to_json();
    Ok(out)
}

fn metric_json<S: Solve>(network: &Network) -> Result<Value, CliError> {
    let solution = S::solve(network, SOLVER_TOLERANCE)?;
    let metric = gradient_metric(&solution, network);
    Ok(metric.to_json(network, &network_constants::<S>(network)))
}

fn paths_json<S: Solve>(
    network: &Network,
    orientation: Orientation,
    rules: ThickRules,
    oracle: bool,
) -> Result<(Value, Status), CliError> {
    let solution = S::solve(network, SOLVER_TOLERANCE)?;
    let metric = gradient_metric(&solution, network);
    let found = match shortest_thick_path(&metric, network, orientation, rules) {
        Ok(p) => Some(p),
        Err(PathError::NoThickPath(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut out = match &found {
        Some(p) => p.to_json(network),
        None => json!({ "orientation": orientation, "absent": PathError::NoThickPath(orientation).to_string() }),
    };
    out["mode"] = json!(S::MODE);
    let mut status = if found.is_some() { Status::Ok } else { Status::NoThickPath };

    if oracle {
        let check = if network.vertex_count() > ENUMERATION_GUARD {
            json!({ "checked": false, "reason": format!("{} vertices exceed the enumeration guard of {ENUMERATION_GUARD}", network.vertex_count()) })
        } else {
            let all = enumerate_thick_paths(&metric, network, orientation, rules, usize::MAX, ENUMERATION_GUARD)?;
            let agrees = match (&found, all.first()) {
                (None, None) => true,
                (Some(best), Some(first)) => {
                    (best.length - first.length).abs() <= 1e-12 * (1.0 + best.length)
                        && all.iter().any(|p| p.vertices == best.vertices)
                }
                _ => false,
            };
            if !agrees {
                status = Status::Failed;
            }
            json!({
                "checked": true,
                "agrees": agrees,
                "enumerated": all.len(),
                "shortestEnumerated": all.first().map(|p| p.length),
            })
        };
        out["oracle"] = check;
    }
    Ok((out, status))
}

fn verify_one<S: Solve>(
    path: &Path,
    numeric: &NumericArgs,
    rules: ThickRules,
    chain: bool,
) -> Result<(Value, bool), CliError> {
    let (_, network) = load(path, numeric.g.as_ref())?;
    let options = ReportOptions { rules, ..ReportOptions::default() };
    let report = build_report::<S>(&network, &instance_name(path), options)?;
    Ok((report.to_json(&network, chain), report.all_pass()))
}

fn verify_dispatch(
    path: &Path,
    numeric: &NumericArgs,
    rules: ThickRules,
    chain: bool,
) -> Result<(Value, bool), CliError> {
    match numeric.mode {
        Mode::Exact => verify_one::<Rational>(path, numeric, rules, chain),
        Mode::Float => verify_one::<f64>(path, numeric, rules, chain),
    }
}

fn quadnet_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "quadnet") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no .quadnet files", dir.display())));
    }
    Ok(files)
}

fn svg_paths<S: Solve>(t: &Triangulation, network: &Network, rules: ThickRules) -> Result<String, CliError> {
    let solution = S::solve(network, SOLVER_TOLERANCE)?;
    let metric = gradient_metric(&solution, network);
    let mut paths: Vec<ThickPath<S>> = Vec::new();
    for orientation in Orientation::BOTH {
        match shortest_thick_path(&metric, network, orientation, rules) {
            Ok(p) => paths.push(p),
            Err(PathError::NoThickPath(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let refs: Vec<&ThickPath<S>> = paths.iter().collect();
    Ok(render_svg(t, Some(&metric), &refs))
}

fn run(command: Command) -> Result<Status, CliError> {
    match command {
        Command::Validate { file } => {
            let t = parse_quadnet_unchecked(&read(&file)?).map_err(|source| CliError::Parse { path: file, source })?;
            let report = validate(&t);
            print(&serde_json::to_value(&report).expect("report serializes"));
            Ok(if report.ok { Status::Ok } else { Status::Failed })
        }
        Command::Solve { file, numeric } => {
            let (_, network) = load(&file, numeric.g.as_ref())?;
            let out = match numeric.mode {
                Mode::Exact => solve_json::<Rational>(&network)?,
                Mode::Float => solve_json::<f64>(&network)?,
            };
            print(&out);
            Ok(Status::Ok)
        }
        Command::Metric { file, numeric } => {
            let (_, network) = load(&file, numeric.g.as_ref())?;
            let out = match numeric.mode {
                Mode::Exact => metric_json::<Rational>(&network)?,
                Mode::Float => metric_json::<f64>(&network)?,
            };
            print(&out);
            Ok(Status::Ok)
        }
        Command::Paths { file, orientation, oracle, numeric, rules } => {
            let (_, network) = load(&file, numeric.g.as_ref())?;
            let (out, status) = match numeric.mode {
                Mode::Exact => paths_json::<Rational>(&network, orientation, rules.rules(), oracle)?,
                Mode::Float => paths_json::<f64>(&network, orientation, rules.rules(), oracle)?,
            };
            print(&out);
            if status == Status::NoThickPath {
                eprintln!("quadnet: {}", PathError::NoThickPath(orientation));
            }
            Ok(status)
        }
        Command::Verify { target, chain, numeric, rules } => {
            if target.is_dir() {
                let files = quadnet_files(&target)?;
                let results: Vec<(Value, bool)> = files
                    .par_iter()
                    .map(|f| match verify_dispatch(f, &numeric, rules.rules(), chain) {
                        Ok(r) => r,
                        Err(e) => (json!({ "instance": instance_name(f), "error": e.to_string() }), false),
                    })
                    .collect();
                let ok = results.iter().all(|r| r.1);
                print(&Value::Array(results.into_iter().map(|r| r.0).collect()));
                Ok(if ok { Status::Ok } else { Status::Failed })
            } else {
                let (out, ok) = verify_dispatch(&target, &numeric, rules.rules(), chain)?;
                print(&out);
                Ok(if ok { Status::Ok } else { Status::Failed })
            }
        }
        Command::Generate { rows, cols, seed, cmin, cmax, diagonal, unit, random_split, output } => {
            let sampler = if unit {
                ConductanceSampler::Constant(int(1))
            } else {
                ConductanceSampler::LogUniform { seed, min: cmin, max: cmax }
            };
            let mut spec = GridSpec::new(rows, cols, diagonal).with_conductance(sampler);
            if random_split {
                spec = spec.with_random_arc_split(seed);
            }
            let text = to_quadnet(&generate_grid(&spec)?);
            match output {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(Status::Ok)
        }
        Command::Svg { file, output, numeric, rules } => {
            let (t, network) = load(&file, numeric.g.as_ref())?;
            let svg = match numeric.mode {
                Mode::Exact => svg_paths::<Rational>(&t, &network, rules.rules())?,
                Mode::Float => svg_paths::<f64>(&t, &network, rules.rules())?,
            };
            write(&output, &svg)?;
            Ok(Status::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("quadnet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
