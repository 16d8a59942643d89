//! `bw`: compile, optimize, price and serve topological circuits.
//!
//! Exit codes: 0 success, 1 semantic failure (invalid input, signature
//! mismatch, rejected replay), 2 usage, 3 I/O.

use std::fs;
use std::io::Write;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use braidwork::canonical::{layout_canonical, CanonicalLayoutParams};
use braidwork::geometry::{bounding_volume, validate_geometry, TopoCircuit};
use braidwork::icm::{clifford_t_to_icm, parse_gates, parse_icm};
use braidwork::moves::{replay, MoveLog};
use braidwork::optimizer::{optimize, verify_result, AnnealParams, Objective, SearchConfig, Strategy};
use braidwork::resources::{estimate, estimate_at, Code, ErrorModel};
use braidwork::service::{server, Service};
use braidwork::topology::{linking_matrix, signature, signatures_equal};
use braidwork::tqc::{parse_tqc, to_tqc};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Semantic(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Semantic(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Semantic(_) => "semantic",
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
        }
    }
}

fn semantic(e: impl ToString) -> CliError {
    CliError::Semantic(e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Greedy,
    Anneal,
    Beam,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    BoundingVolume,
    OccupiedCells,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CodeArg {
    Surface,
    Raussendorf,
}

#[derive(Parser)]
#[command(name = "bw", version, about = "Topological quantum circuit compiler and volume optimizer")]
struct Cli {
    /// Output format for reports and diagnostics.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lay out an .icm circuit (or a Clifford+T .gates file) in canonical form.
    Compile {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Treat the input as a Clifford+T gate list and lower it to ICM first.
        #[arg(long)]
        gates: bool,
        /// Free space around the layout in y and z.
        #[arg(long, default_value_t = 2)]
        margin: i64,
    },
    /// Reduce the volume of a .tqc circuit.
    Optimize {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "greedy")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_steps: usize,
        #[arg(long, value_enum, default_value = "bounding-volume")]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = 4)]
        beam_width: usize,
        #[arg(long, default_value_t = 4.0)]
        t0: f64,
        #[arg(long, default_value_t = 0.9)]
        cooling: f64,
        #[arg(long, default_value_t = 10)]
        steps_per_temp: usize,
        #[arg(long, default_value_t = 5000)]
        move_budget: usize,
        #[arg(long)]
        emit_log: Option<PathBuf>,
        #[arg(long)]
        emit_trace: Option<PathBuf>,
        /// Replay the log and check geometry and signature at every step.
        #[arg(long)]
        verify: bool,
    },
    /// Physical qubits and time for a .tqc circuit.
    Estimate {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "surface")]
        code: CodeArg,
        #[arg(long, default_value_t = 1e-3)]
        p: f64,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        p_th: f64,
        #[arg(long, default_value_t = 0.1)]
        prefactor: f64,
        /// Use this distance instead of selecting one.
        #[arg(long)]
        d: Option<u32>,
        /// Also print a CSV sweep over odd distances up to this value.
        #[arg(long)]
        sweep_to: Option<u32>,
    },
    /// Check a .tqc or .icm file; exit 0 iff clean.
    Validate { input: PathBuf },
    /// Compare the signatures of two .tqc files; exit 0 iff equal.
    Verify { base: PathBuf, other: PathBuf },
    /// Print the linking matrix of a .tqc file.
    Lk { input: PathBuf },
    /// Apply a .moves log to its base circuit.
    Replay {
        base: PathBuf,
        moves: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the puzzle session service.
    Serve {
        #[arg(long, env = "BW_PORT", default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "BW_DATA_DIR", default_value = "bw-data")]
        data_dir: PathBuf,
        /// .tqc or .icm files to register as puzzles (id = file stem) if absent.
        #[arg(long = "puzzle")]
        puzzles: Vec<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_tqc(path: &Path) -> Result<TopoCircuit, CliError> {
    parse_tqc(&read(path)?).map_err(|e| semantic(format!("{}: {e}", path.display())))
}

fn compile_file(path: &Path, gates: bool, margin: i64) -> Result<TopoCircuit, CliError> {
    let text = read(path)?;
    let icm = if gates || path.extension().is_some_and(|e| e == "gates") {
        let (n, gs) = parse_gates(&text).map_err(|e| semantic(format!("{}: {e}", path.display())))?;
        clifford_t_to_icm(n, &gs).map_err(semantic)?
    } else {
        parse_icm(&text).map_err(|e| semantic(format!("{}: {e}", path.display())))?
    };
    let params = CanonicalLayoutParams { margin, ..Default::default() };
    layout_canonical(&icm, &params).map_err(semantic)
}

/// Prints a report: `text` as is, or `value` as one JSON line.
fn emit(format: Format, text: &str, value: Value) {
    match format {
        Format::Text => print!("{text}"),
        Format::Json => println!("{value}"),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let fmt = cli.format;
    match cli.command {
        Command::Compile { input, output, gates, margin } => {
            let c = compile_file(&input, gates, margin)?;
            write_out(output.as_deref(), &to_tqc(&c))?;
            if output.is_some() {
                let text = format!("strands: {}\nvolume: {}\n", c.strands.len(), bounding_volume(&c));
                emit(fmt, &text, json!({ "strands": c.strands.len(), "volume": bounding_volume(&c) }));
            }
        }
        Command::Optimize {
            input,
            output,
            strategy,
            seed,
            max_steps,
            objective,
            beam_width,
            t0,
            cooling,
            steps_per_temp,
            move_budget,
            emit_log,
            emit_trace,
            verify,
        } => {
            let c = load_tqc(&input)?;
            let report = validate_geometry(&c);
            if !report.is_valid() {
                return Err(semantic(format!("input is not valid:\n{report}")));
            }
            let cfg = SearchConfig {
                strategy: match strategy {
                    StrategyArg::Greedy => Strategy::Greedy,
                    StrategyArg::Anneal => Strategy::Anneal,
                    StrategyArg::Beam => Strategy::Beam,
                },
                seed,
                max_steps,
                anneal: AnnealParams { t0, cooling, steps_per_temp },
                beam_width,
                objective: match objective {
                    ObjectiveArg::BoundingVolume => Objective::BoundingVolume,
                    ObjectiveArg::OccupiedCells => Objective::OccupiedCells,
                },
                move_budget,
            };
            cfg.validate().map_err(CliError::Usage)?;
            let r = optimize(&c, &cfg);
            if verify {
                verify_result(&c, &r).map_err(semantic)?;
            }
            if let Some(p) = &emit_log {
                write_out(Some(p), &r.log.to_text())?;
            }
            if let Some(p) = &emit_trace {
                write_out(Some(p), &r.trace_csv())?;
            }
            let tqc = to_tqc(&r.final_circuit);
            match &output {
                Some(p) => write_out(Some(p), &tqc)?,
                None if fmt == Format::Text && emit_log.is_none() => print!("{tqc}"),
                None => {}
            }
            let summary = format!(
                "initial_volume: {}\nfinal_volume: {}\nsteps: {}\nmoves: {}\n",
                r.initial_volume,
                r.final_volume,
                r.steps_taken,
                r.log.moves.len()
            );
            let value = json!({
                "initial_volume": r.initial_volume,
                "final_volume": r.final_volume,
                "steps": r.steps_taken,
                "moves": r.log.moves.len(),
                "objective_trace": r.objective_trace,
            });
            if output.is_some() || emit_log.is_some() || fmt == Format::Json {
                emit(fmt, &summary, value);
            } else {
                eprint!("{summary}");
            }
        }
        Command::Estimate { input, code, p, eps, p_th, prefactor, d, sweep_to } => {
            let c = load_tqc(&input)?;
            let code = match code {
                CodeArg::Surface => Code::Surface,
                CodeArg::Raussendorf => Code::Raussendorf,
            };
            let model = ErrorModel { p_phys: p, p_th, prefactor };
            let report = match d {
                Some(d) => estimate_at(&c, code, d, &model, eps),
                None => estimate(&c, code, &model, eps),
            }
            .map_err(semantic)?;
            let mut text = report.to_text();
            let mut sweep = Vec::new();
            if let Some(max) = sweep_to {
                text.push_str("\nd,qubits,time_steps,p_fail_total\n");
                for d in (3..=max).step_by(2) {
                    let r = estimate_at(&c, code, d, &model, eps).map_err(semantic)?;
                    let fail = r.volume_pieces as f64 * model.per_piece_failure(d);
                    text.push_str(&format!("{d},{},{},{fail:e}\n", r.qubits, r.time_steps));
                    sweep.push(json!({ "d": d, "qubits": r.qubits, "time_steps": r.time_steps, "p_fail_total": fail }));
                }
            }
            let mut value = serde_json::to_value(&report).map_err(semantic)?;
            if sweep_to.is_some() {
                value["sweep"] = Value::Array(sweep);
            }
            emit(fmt, &text, value);
        }
        Command::Validate { input } => {
            let text = read(&input)?;
            let is_icm = input.extension().is_some_and(|e| e == "icm");
            if is_icm {
                match parse_icm(&text) {
                    Ok(_) => emit(fmt, "ok\n", json!({ "valid": true, "issues": [] })),
                    Err(e) => {
                        emit(fmt, &format!("{}:{e}\n", input.display()), json!({ "valid": false, "issues": [e] }));
                        return Err(CliError::Semantic(String::new()));
                    }
                }
            } else {
                let c = parse_tqc(&text).map_err(|e| semantic(format!("{}: {e}", input.display())))?;
                let report = validate_geometry(&c);
                let value = json!({ "valid": report.is_valid(), "violations": report.violations });
                if report.is_valid() {
                    emit(fmt, "ok\n", value);
                } else {
                    emit(fmt, &format!("{report}\n"), value);
                    return Err(CliError::Semantic(String::new()));
                }
            }
        }
        Command::Verify { base, other } => {
            let (a, b) = (load_tqc(&base)?, load_tqc(&other)?);
            let sa = signature(&a).map_err(semantic)?;
            let sb = signature(&b).map_err(semantic)?;
            let diff = signatures_equal(&sa, &sb);
            let text = if diff.is_equal() {
                "signatures equal\n".to_string()
            } else {
                diff.differences.iter().map(|d| format!("{d}\n")).collect()
            };
            emit(fmt, &text, json!({ "equal": diff.is_equal(), "differences": diff.differences }));
            if !diff.is_equal() {
                return Err(CliError::Semantic(String::new()));
            }
        }
        Command::Lk { input } => {
            let c = load_tqc(&input)?;
            let m = linking_matrix(&c).map_err(semantic)?;
            let width = m.ids.iter().map(String::len).max().unwrap_or(1).max(3);
            let mut text = format!("{:>width$}", "");
            for id in &m.ids {
                text.push_str(&format!(" {id:>width$}"));
            }
            text.push('\n');
            for a in &m.ids {
                text.push_str(&format!("{a:>width$}"));
                for b in &m.ids {
                    let cell = if a == b { "-".to_string() } else { m.get(a, b).unwrap_or(0).to_string() };
                    text.push_str(&format!(" {cell:>width$}"));
                }
                text.push('\n');
            }
            let nonzero: Vec<Value> = m.nonzero().map(|(a, b, v)| json!([a, b, v])).collect();
            emit(fmt, &text, json!({ "ids": m.ids, "nonzero": nonzero }));
        }
        Command::Replay { base, moves, output } => {
            let c = load_tqc(&base)?;
            let log = MoveLog::parse(&read(&moves)?).map_err(|e| semantic(format!("{}: {e}", moves.display())))?;
            let out = replay(&c, &log).map_err(semantic)?;
            write_out(output.as_deref(), &to_tqc(&out))?;
            if output.is_some() {
                let text = format!("moves: {}\nvolume: {}\n", log.moves.len(), bounding_volume(&out));
                emit(fmt, &text, json!({ "moves": log.moves.len(), "volume": bounding_volume(&out) }));
            }
        }
        Command::Serve { port, host, data_dir, puzzles } => {
            let service = Service::open(&data_dir).map_err(|e| CliError::Io(e.to_string()))?;
            for path in &puzzles {
                let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("puzzle").to_string();
                if service.has_puzzle(&id) {
                    continue;
                }
                let c = if path.extension().is_some_and(|e| e == "icm" || e == "gates") {
                    compile_file(path, false, 2)?
                } else {
                    load_tqc(path)?
                };
                service.add_puzzle(&id, &id, &to_tqc(&c)).map_err(semantic)?;
            }
            let listener = TcpListener::bind((host.as_str(), port)).map_err(|e| CliError::Io(format!("bind: {e}")))?;
            let addr = listener.local_addr().map_err(|e| CliError::Io(e.to_string()))?;
            println!("listening on {addr}");
            std::io::stdout().flush().ok();
            server::run(listener, Arc::new(service)).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fmt = cli.format;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            if !msg.is_empty() {
                match fmt {
                    Format::Text => eprintln!("error: {msg}"),
                    Format::Json => eprintln!("{}", json!({ "error": { "kind": e.kind(), "message": msg } })),
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
