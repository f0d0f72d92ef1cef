mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hhl_core::{
    build_circuit_ir, emit_qasm, parse_qasm, solve, trace_run, AncillaMode, EncodingMode, EncodingPlan, Error,
    Problem, SolveOptions, Stage,
};

#[derive(Parser)]
#[command(name = "hhl", version, about = "HHL linear-system solver on a statevector simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the system and print amplitudes, ratios and fidelity.
    Solve(Common),
    /// Print every intermediate state, or replay a QASM file.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Replay this OpenQASM file instead of tracing the problem.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Write the circuit as OpenQASM 2.0.
    EmitQasm(Common),
    /// Sample (b-register, ancilla) outcomes from the final state.
    Sample(Common),
}

#[derive(Args)]
struct Common {
    /// Problem file (TOML).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Ancilla::Exact)]
    ancilla: Ancilla,
    /// Overrides the mode given in the problem file.
    #[arg(long, value_enum)]
    encoding: Option<Encoding>,
    /// Output path; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ancilla {
    Exact,
    PerQubit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Exact,
    Rounded,
}

enum Failure {
    Input(String),
    Io(String),
    Encoding(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Io(_) => 3,
            Failure::Encoding(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Io(m) | Failure::Encoding(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::EncodingInfeasible { .. } | Error::Collision { .. } => Failure::Encoding(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn load(common: &Common) -> Result<Problem, Failure> {
    let path = common.input.as_ref().ok_or_else(|| Failure::Input("--input is required".into()))?;
    Problem::from_toml_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn options(common: &Common, problem: &Problem) -> SolveOptions {
    let encoding = match common.encoding {
        Some(Encoding::Exact) => EncodingMode::Exact,
        Some(Encoding::Rounded) => EncodingMode::Rounded,
        None => problem.mode.unwrap_or_default(),
    };
    let ancilla = match common.ancilla {
        Ancilla::Exact => AncillaMode::Exact,
        Ancilla::PerQubit => AncillaMode::PerQubit,
    };
    SolveOptions { encoding, ancilla, c: problem.c, ..SolveOptions::default() }
}

fn write_out(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(common: &Common) -> Result<(), Failure> {
    let problem = load(common)?;
    let result = solve(&problem.system()?, problem.n, &options(common, &problem))?;
    let text = match common.format {
        Format::Human => render::solve_human(&result, problem.nb),
        Format::Csv => render::solve_csv(&result, problem.nb),
    };
    write_out(common, &text)
}

fn cmd_trace(common: &Common, replay: Option<&Path>) -> Result<(), Failure> {
    let Some(qasm_path) = replay else {
        let problem = load(common)?;
        let trace = trace_run(&problem.system()?, problem.n, &options(common, &problem))?;
        let text = match common.format {
            Format::Human => render::trace_human(&trace),
            Format::Csv => render::trace_csv(&trace),
        };
        return write_out(common, &text);
    };

    let circuit = parse_qasm(&read(qasm_path)?).map_err(|e| Failure::Input(format!("{}: {e}", qasm_path.display())))?;
    let state = circuit.simulate()?;
    let fidelity = match common.input {
        Some(_) => {
            let problem = load(common)?;
            let trace = trace_run(&problem.system()?, problem.n, &options(common, &problem))?;
            Some(state.fidelity(trace.get(Stage::Psi9).expect("trace has every stage"))?)
        }
        None => None,
    };
    let text = match common.format {
        Format::Human => render::replay_human(&state, fidelity),
        Format::Csv => render::replay_csv(&state),
    };
    write_out(common, &text)
}

fn cmd_emit_qasm(common: &Common) -> Result<(), Failure> {
    let problem = load(common)?;
    let system = problem.system()?;
    let opts = options(common, &problem);
    let plan = EncodingPlan::new(&system, problem.n, opts.encoding, opts.c)?;
    let text = emit_qasm(&build_circuit_ir(&system, &plan)?)?;
    write_out(common, &text)
}

fn cmd_sample(common: &Common) -> Result<(), Failure> {
    let problem = load(common)?;
    let result = solve(&problem.system()?, problem.n, &options(common, &problem))?;
    let layout = hhl_core::RegisterLayout::new(problem.nb, problem.n)?;
    let mut qubits = vec![layout.ancilla()];
    qubits.extend(layout.b_qubits());
    let counts = result.unmeasured_state.sample(&qubits, common.shots, common.seed)?;
    let text = match common.format {
        Format::Human => render::sample_human(&counts, problem.nb, common.shots, common.seed),
        Format::Csv => render::sample_csv(&counts, problem.nb, common.shots),
    };
    write_out(common, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(common) => cmd_solve(common),
        Command::Trace { common, replay } => cmd_trace(common, replay.as_deref()),
        Command::EmitQasm(common) => cmd_emit_qasm(common),
        Command::Sample(common) => cmd_sample(common),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
