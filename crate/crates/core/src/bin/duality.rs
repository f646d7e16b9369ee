// Copyright 2026 The duality-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `duality` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use duality_core::cli::{
    cmd_curve, cmd_decompose, cmd_recycle, cmd_search, cmd_simulate, CommandOutput, DecomposeMode,
    RecoveryChoice, RecycleGate,
};
use duality_core::opalg::DEFAULT_NORMAL_TOL;
use duality_core::Operator;

#[derive(Parser)]
#[command(name = "duality", version, about = "Duality-gate quantum simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a circuit file and print amplitudes or the measurement outcome.
    Simulate {
        #[arg(long, visible_alias = "in")]
        circuit: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo hybrid search; writes trial,repetitions,hit_index.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
        marked: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        j: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Repetition budget per trial.
        #[arg(long, visible_alias = "max-repetitions")]
        max_cycles: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recycling loop from the uniform state; writes a cycles,count histogram.
    Recycle {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = GateArg::Search)]
        gate: GateArg,
        /// Marked items for the search gate.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        marked: Vec<usize>,
        #[arg(long, value_enum, default_value_t = RecoveryArg::Reset)]
        recovery: RecoveryArg,
        /// Matrix file holding V for `--recovery custom`.
        #[arg(long)]
        v: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        max_cycles: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose a matrix file into a weighted sum of unitaries.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        /// Use the two-unitary form; fails unless the matrix is normal.
        #[arg(long)]
        normal: bool,
        #[arg(long, default_value_t = DEFAULT_NORMAL_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected repetitions versus Grover iterations; writes j,success_prob,repetitions.
    Curve {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        marked_count: usize,
        #[arg(long)]
        jmax: usize,
        /// Echoed in the header only; the curve is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GateArg {
    Search,
    Phase,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecoveryArg {
    Reset,
    Exact,
    Custom,
}

struct Failure {
    kind: &'static str,
    message: String,
}

impl From<duality_core::Error> for Failure {
    fn from(e: duality_core::Error) -> Self {
        Failure {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        kind: "io",
        message: format!("{}: {e}", path.display()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

/// Writes through a temporary file in the target directory, so a failed
/// write never leaves a partial file behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_failure(path, e))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| io_failure(path, e))?;
    tmp.persist(path).map_err(|e| io_failure(path, e.error))?;
    Ok(())
}

fn run(cli: Cli, command_line: &str) -> Result<(), Failure> {
    let (output, out): (CommandOutput, Option<PathBuf>) = match cli.command {
        Command::Simulate { circuit, seed, out } => {
            (cmd_simulate(&read(&circuit)?, seed, command_line)?, out)
        }
        Command::Search {
            n,
            marked,
            j,
            trials,
            max_cycles,
            seed,
            out,
        } => (
            cmd_search(n, marked, j, trials, max_cycles, seed, command_line)?,
            out,
        ),
        Command::Recycle {
            n,
            gate,
            marked,
            recovery,
            v,
            trials,
            max_cycles,
            seed,
            out,
        } => {
            let gate = match gate {
                GateArg::Search => RecycleGate::Search { marked },
                GateArg::Phase => RecycleGate::Phase,
            };
            let recovery = match (recovery, v) {
                (RecoveryArg::Reset, _) => RecoveryChoice::Reset,
                (RecoveryArg::Exact, _) => RecoveryChoice::Exact,
                (RecoveryArg::Custom, Some(path)) => {
                    RecoveryChoice::Custom(Operator::from_text(&read(&path)?)?)
                }
                (RecoveryArg::Custom, None) => {
                    return Err(Failure {
                        kind: "invalid_argument",
                        message: "--recovery custom needs --v <matrix file>".into(),
                    })
                }
            };
            (
                cmd_recycle(n, &gate, &recovery, trials, max_cycles, seed, command_line)?,
                out,
            )
        }
        Command::Decompose {
            input,
            normal,
            tol,
            out,
        } => {
            let mode = if normal {
                DecomposeMode::Normal { tol }
            } else {
                DecomposeMode::General
            };
            (cmd_decompose(&read(&input)?, mode, command_line)?, out)
        }
        Command::Curve {
            n,
            marked_count,
            jmax,
            seed,
            out,
        } => (cmd_curve(n, marked_count, jmax, seed, command_line)?, out),
    };
    match out {
        Some(path) => {
            write_atomic(&path, &output.contents)?;
            println!("{}", output.summary);
        }
        None => {
            print!("{}", output.contents);
            eprintln!("{}", output.summary);
        }
    }
    Ok(())
}

fn report(kind: &str, message: &str) {
    let flat = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error: kind={kind} message={:?}", flat);
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let command_line = std::iter::once("duality")
        .chain(args.iter().skip(1).map(String::as_str))
        .collect::<Vec<_>>()
        .join(" ");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let head = text.split("\n\nUsage:").next().unwrap_or(&text);
            report("usage", head.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli, &command_line) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(f.kind, &f.message);
            ExitCode::FAILURE
        }
    }
}
