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

//! Circuit text format, CSV rendering and the command drivers used by the
//! `duality` binary. Everything here returns strings; only the binary touches
//! the filesystem.
//!
//! Circuit grammar (one statement per line, `#` starts a comment):
//!
//! ```text
//! qubits <n>                      first statement
//! init uniform | init basis <k>
//! h|x|y|z|s|t <q>
//! cx <control> <target>
//! oracle <i...>                   +1 on listed indices, −1 elsewhere
//! diffusion                       2|s⟩⟨s| − I on the whole register
//! duality <m>                     opens a block of m slits
//!   weights <p1> ... <pm>         decimals or fractions like 1/3
//!   slit <i>                      following gates belong to slit i
//!   slit <i>: <gate>              inline form
//! endduality
//! cmeasure                        optional, right after endduality
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::duality::{
    apply_duality_gate, build_dilation, conditional_measure, hit_probability, run_dilation,
    DualityGate, MeasurementOutcome, SlitWeights,
};
use crate::error::{Error, Result};
use crate::opalg::{lcu_decompose, normal_decompose, LcuDecomposition};
use crate::random::trial_rng;
use crate::recycling::{
    default_max_cycles, exact_recovery, expected_cycles, run_recycling, RecoveryStrategy,
    RecyclingOutcome,
};
use crate::search::{
    apply_diffusion, repetition_curve, run_search_experiment, search_gate, SearchProblem,
};
use crate::statevec::{apply_operator, format_complex, Operator, StateVector, MAX_QUBITS};

/// A single gate statement.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    T(usize),
    Cx(usize, usize),
    Oracle(Vec<usize>),
    Diffusion,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    Uniform,
    Basis(usize),
}

/// `duality` … `endduality`, optionally followed by `cmeasure`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityBlock {
    pub weights: Vec<f64>,
    /// One gate list per slit; an empty list is the identity.
    pub slits: Vec<Vec<Gate>>,
    pub measure: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Init(Init),
    Gate(Gate),
    Duality(DualityBlock),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSpec {
    pub num_qubits: usize,
    pub instructions: Vec<Instruction>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(line: usize, tok: &str) -> Result<usize> {
    tok.parse().map_err(|_| {
        parse_err(
            line,
            format!("expected a non-negative integer, found `{tok}`"),
        )
    })
}

fn parse_weight(line: usize, tok: &str) -> Result<f64> {
    let value = match tok.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.parse().ok().unwrap_or(f64::NAN);
            let den: f64 = den.parse().ok().unwrap_or(f64::NAN);
            num / den
        }
        None => tok.parse().unwrap_or(f64::NAN),
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(parse_err(line, format!("invalid weight `{tok}`")))
    }
}

fn qubit(line: usize, tok: &str, num_qubits: usize) -> Result<usize> {
    let q = parse_usize(line, tok)?;
    if q >= num_qubits {
        return Err(parse_err(
            line,
            format!("qubit {q} out of range for {num_qubits} qubits"),
        ));
    }
    Ok(q)
}

fn expect_args(line: usize, keyword: &str, args: &[&str], count: usize) -> Result<()> {
    if args.len() != count {
        return Err(parse_err(
            line,
            format!(
                "`{keyword}` takes {count} argument(s), found {}",
                args.len()
            ),
        ));
    }
    Ok(())
}

/// Parses a gate statement, or returns `None` if `keyword` is not a gate.
fn parse_gate(
    line: usize,
    keyword: &str,
    args: &[&str],
    num_qubits: usize,
) -> Result<Option<Gate>> {
    let single = |ctor: fn(usize) -> Gate| -> Result<Option<Gate>> {
        expect_args(line, keyword, args, 1)?;
        Ok(Some(ctor(qubit(line, args[0], num_qubits)?)))
    };
    match keyword {
        "h" => single(Gate::H),
        "x" => single(Gate::X),
        "y" => single(Gate::Y),
        "z" => single(Gate::Z),
        "s" => single(Gate::S),
        "t" => single(Gate::T),
        "cx" => {
            expect_args(line, keyword, args, 2)?;
            let (c, t) = (
                qubit(line, args[0], num_qubits)?,
                qubit(line, args[1], num_qubits)?,
            );
            if c == t {
                return Err(parse_err(line, "cx control and target must differ"));
            }
            Ok(Some(Gate::Cx(c, t)))
        }
        "oracle" => {
            if args.is_empty() {
                return Err(parse_err(line, "`oracle` needs at least one marked index"));
            }
            let size = 1usize << num_qubits;
            let marked = args
                .iter()
                .map(|a| {
                    let i = parse_usize(line, a)?;
                    if i >= size {
                        return Err(parse_err(line, format!("oracle index {i} out of range")));
                    }
                    Ok(i)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Some(Gate::Oracle(marked)))
        }
        "diffusion" => {
            expect_args(line, keyword, args, 0)?;
            Ok(Some(Gate::Diffusion))
        }
        _ => Ok(None),
    }
}

struct OpenBlock {
    start_line: usize,
    weights: Option<Vec<f64>>,
    slits: Vec<Vec<Gate>>,
    current: Option<usize>,
}

/// Parses the line-oriented circuit format.
pub fn parse_circuit(text: &str) -> Result<CircuitSpec> {
    let mut num_qubits: Option<usize> = None;
    let mut instructions = Vec::new();
    let mut block: Option<OpenBlock> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let (keyword, args) = (tokens[0], &tokens[1..]);

        let Some(n) = num_qubits else {
            if keyword != "qubits" {
                return Err(parse_err(
                    line,
                    format!("expected `qubits <n>`, found `{keyword}`"),
                ));
            }
            expect_args(line, keyword, args, 1)?;
            let n = parse_usize(line, args[0])?;
            if n == 0 || n > MAX_QUBITS {
                return Err(parse_err(
                    line,
                    format!("qubit count {n} outside 1..={MAX_QUBITS}"),
                ));
            }
            num_qubits = Some(n);
            continue;
        };

        if let Some(open) = block.as_mut() {
            match keyword {
                "weights" => {
                    if open.weights.is_some() {
                        return Err(parse_err(line, "duplicate `weights`"));
                    }
                    expect_args(line, keyword, args, open.slits.len())?;
                    let w = args
                        .iter()
                        .map(|a| parse_weight(line, a))
                        .collect::<Result<Vec<_>>>()?;
                    SlitWeights::new(w.clone()).map_err(|e| parse_err(line, e.to_string()))?;
                    open.weights = Some(w);
                }
                "slit" | "slit:" => {
                    let Some(first) = args.first() else {
                        return Err(parse_err(line, "`slit` needs an index"));
                    };
                    let (index_tok, inline) = match first.strip_suffix(':') {
                        Some(i) => (i, &args[1..]),
                        None if args.get(1) == Some(&":") => (*first, &args[2..]),
                        None if args.len() == 1 => (*first, &args[1..]),
                        None => {
                            return Err(parse_err(
                                line,
                                "expected `slit <i>` or `slit <i>: <gate>`",
                            ))
                        }
                    };
                    let i = parse_usize(line, index_tok)?;
                    if i >= open.slits.len() {
                        return Err(parse_err(
                            line,
                            format!("slit {i} out of range for {} slits", open.slits.len()),
                        ));
                    }
                    open.current = Some(i);
                    if let Some((kw, rest)) = inline.split_first() {
                        let gate = parse_gate(line, kw, rest, n)?
                            .ok_or_else(|| parse_err(line, format!("unknown gate `{kw}`")))?;
                        open.slits[i].push(gate);
                    }
                }
                "endduality" => {
                    expect_args(line, keyword, args, 0)?;
                    let open = block.take().expect("inside a block");
                    let weights = open
                        .weights
                        .ok_or_else(|| parse_err(line, "duality block without `weights`"))?;
                    instructions.push(Instruction::Duality(DualityBlock {
                        weights,
                        slits: open.slits,
                        measure: false,
                    }));
                }
                _ => {
                    let gate = parse_gate(line, keyword, args, n)?.ok_or_else(|| {
                        parse_err(line, format!("unexpected `{keyword}` inside duality block"))
                    })?;
                    let slit = open.current.ok_or_else(|| {
                        parse_err(line, "gate inside duality block before any `slit`")
                    })?;
                    open.slits[slit].push(gate);
                }
            }
            continue;
        }

        match keyword {
            "qubits" => return Err(parse_err(line, "`qubits` may only appear once")),
            "init" => {
                let init = match args {
                    ["uniform"] => Init::Uniform,
                    ["basis", k] => {
                        let k = parse_usize(line, k)?;
                        if k >= 1 << n {
                            return Err(parse_err(line, format!("basis index {k} out of range")));
                        }
                        Init::Basis(k)
                    }
                    _ => {
                        return Err(parse_err(
                            line,
                            "expected `init uniform` or `init basis <k>`",
                        ))
                    }
                };
                instructions.push(Instruction::Init(init));
            }
            "duality" => {
                expect_args(line, keyword, args, 1)?;
                let m = parse_usize(line, args[0])?;
                if m < 2 {
                    return Err(parse_err(line, "a duality block needs at least 2 slits"));
                }
                if m > 1 << 8 {
                    return Err(parse_err(line, format!("{m} slits is too many")));
                }
                block = Some(OpenBlock {
                    start_line: line,
                    weights: None,
                    slits: vec![Vec::new(); m],
                    current: None,
                });
            }
            "cmeasure" => {
                expect_args(line, keyword, args, 0)?;
                match instructions.last_mut() {
                    Some(Instruction::Duality(b)) if !b.measure => b.measure = true,
                    _ => {
                        return Err(parse_err(
                            line,
                            "`cmeasure` must directly follow `endduality`",
                        ))
                    }
                }
            }
            "weights" | "slit" | "endduality" => {
                return Err(parse_err(
                    line,
                    format!("`{keyword}` outside a duality block"),
                ))
            }
            _ => {
                let gate = parse_gate(line, keyword, args, n)?
                    .ok_or_else(|| parse_err(line, format!("unknown statement `{keyword}`")))?;
                instructions.push(Instruction::Gate(gate));
            }
        }
    }

    if let Some(open) = block {
        return Err(parse_err(
            open.start_line,
            format!("duality block is not closed by line {last_line}"),
        ));
    }
    let num_qubits =
        num_qubits.ok_or_else(|| parse_err(last_line.max(1), "missing `qubits <n>`"))?;
    Ok(CircuitSpec {
        num_qubits,
        instructions,
    })
}

fn write_gate(out: &mut String, gate: &Gate) {
    let _ = match gate {
        Gate::H(q) => writeln!(out, "h {q}"),
        Gate::X(q) => writeln!(out, "x {q}"),
        Gate::Y(q) => writeln!(out, "y {q}"),
        Gate::Z(q) => writeln!(out, "z {q}"),
        Gate::S(q) => writeln!(out, "s {q}"),
        Gate::T(q) => writeln!(out, "t {q}"),
        Gate::Cx(c, t) => writeln!(out, "cx {c} {t}"),
        Gate::Oracle(marked) => {
            let list: Vec<String> = marked.iter().map(|i| i.to_string()).collect();
            writeln!(out, "oracle {}", list.join(" "))
        }
        Gate::Diffusion => writeln!(out, "diffusion"),
    };
}

/// Renders a spec in the circuit format; [`parse_circuit`] inverts it.
pub fn serialize_circuit(spec: &CircuitSpec) -> String {
    let mut out = format!("qubits {}\n", spec.num_qubits);
    for instr in &spec.instructions {
        match instr {
            Instruction::Init(Init::Uniform) => out.push_str("init uniform\n"),
            Instruction::Init(Init::Basis(k)) => {
                let _ = writeln!(out, "init basis {k}");
            }
            Instruction::Gate(g) => write_gate(&mut out, g),
            Instruction::Duality(b) => {
                let _ = writeln!(out, "duality {}", b.slits.len());
                let w: Vec<String> = b.weights.iter().map(|p| format!("{p}")).collect();
                let _ = writeln!(out, "weights {}", w.join(" "));
                for (i, gates) in b.slits.iter().enumerate() {
                    let _ = writeln!(out, "slit {i}");
                    for g in gates {
                        write_gate(&mut out, g);
                    }
                }
                out.push_str("endduality\n");
                if b.measure {
                    out.push_str("cmeasure\n");
                }
            }
        }
    }
    out
}

fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let single = |op: Operator, q: usize| apply_operator(state, &op, &[q]);
    match gate {
        Gate::H(q) => single(Operator::hadamard(), *q),
        Gate::X(q) => single(Operator::pauli_x(), *q),
        Gate::Y(q) => single(Operator::pauli_y(), *q),
        Gate::Z(q) => single(Operator::pauli_z(), *q),
        Gate::S(q) => single(Operator::phase_s(), *q),
        Gate::T(q) => single(Operator::phase_t(), *q),
        Gate::Cx(c, t) => apply_operator(state, &Operator::cnot(), &[*t, *c]),
        Gate::Oracle(marked) => {
            let mut amps: Vec<Complex64> = state.amplitudes().iter().map(|a| -a).collect();
            for &i in marked {
                amps[i] = state.amplitude(i);
            }
            StateVector::from_amplitudes(amps)
        }
        Gate::Diffusion => {
            let mut amps = state.amplitudes().to_vec();
            apply_diffusion(&mut amps);
            StateVector::from_amplitudes(amps)
        }
    }
}

/// Unitary of a gate list on an `n`-qubit register, built column by column.
pub fn gate_list_unitary(gates: &[Gate], num_qubits: usize) -> Result<Operator> {
    let dim = 1usize << num_qubits;
    let mut op = Operator::zeros(dim);
    for col in 0..dim {
        let mut v = StateVector::basis_state(num_qubits, col)?;
        for g in gates {
            v = apply_gate(&v, g)?;
        }
        for (row, a) in v.amplitudes().iter().enumerate() {
            op.set(row, col, *a);
        }
    }
    Ok(op)
}

impl DualityBlock {
    pub fn to_gate(&self, num_qubits: usize) -> Result<DualityGate> {
        let unitaries = self
            .slits
            .iter()
            .map(|gates| gate_list_unitary(gates, num_qubits))
            .collect::<Result<Vec<_>>>()?;
        DualityGate::new(SlitWeights::new(self.weights.clone())?, unitaries)
    }
}

/// A conditional measurement performed during simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    /// Position of the duality block among the spec's instructions.
    pub instruction: usize,
    pub hit_probability: f64,
    pub hit_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationReport {
    pub measurements: Vec<MeasurementRecord>,
    /// Work register at the end, or `None` if a conditional measurement missed.
    pub final_state: Option<StateVector>,
}

/// Executes a circuit. Duality blocks without `cmeasure` apply `Σ pᵢUᵢ`
/// directly (the state may become unnormalized); with `cmeasure` they run the
/// dilation and stop the simulation on a miss.
pub fn simulate(spec: &CircuitSpec, seed: u64) -> Result<SimulationReport> {
    let n = spec.num_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = StateVector::basis_state(n, 0)?;
    let mut measurements = Vec::new();
    for (pos, instr) in spec.instructions.iter().enumerate() {
        match instr {
            Instruction::Init(Init::Uniform) => state = StateVector::uniform_state(n)?,
            Instruction::Init(Init::Basis(k)) => state = StateVector::basis_state(n, *k)?,
            Instruction::Gate(g) => state = apply_gate(&state, g)?,
            Instruction::Duality(block) => {
                let gate = block.to_gate(n)?;
                if !block.measure {
                    state = apply_duality_gate(&state, &gate)?;
                    continue;
                }
                let full = run_dilation(&state, &build_dilation(&gate))?;
                let p0 = hit_probability(&full, n)?;
                match conditional_measure(&full, n, &mut rng)? {
                    MeasurementOutcome::Hit {
                        post_state,
                        sampled_index,
                    } => {
                        measurements.push(MeasurementRecord {
                            instruction: pos,
                            hit_probability: p0,
                            hit_index: Some(sampled_index),
                        });
                        state = post_state;
                    }
                    MeasurementOutcome::Miss { .. } => {
                        measurements.push(MeasurementRecord {
                            instruction: pos,
                            hit_probability: p0,
                            hit_index: None,
                        });
                        return Ok(SimulationReport {
                            measurements,
                            final_state: None,
                        });
                    }
                }
            }
        }
    }
    Ok(SimulationReport {
        measurements,
        final_state: Some(state),
    })
}

/// Comment-prefixed CSV document.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Csv {
    pub comments: Vec<String>,
    pub header: String,
    pub rows: Vec<String>,
}

impl Csv {
    fn new(seed: u64, command: &str, header: &str) -> Self {
        Csv {
            comments: vec![format!("seed={seed}"), format!("command={command}")],
            header: header.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.header);
        for r in &self.rows {
            let _ = writeln!(out, "{r}");
        }
        out
    }

    /// Header and rows without comment lines.
    pub fn body(text: &str) -> String {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| format!("{l}\n"))
            .collect()
    }
}

/// Output of a command: file contents plus a short stdout summary.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub contents: String,
    pub summary: String,
}

/// `curve`: expected repetitions versus Grover iterations.
pub fn cmd_curve(
    n: usize,
    marked_count: usize,
    j_max: usize,
    seed: u64,
    command: &str,
) -> Result<CommandOutput> {
    if n == 0 || n > 62 {
        return Err(Error::InvalidArgument(format!("n = {n} outside 1..=62")));
    }
    let rows = repetition_curve(1usize << n, marked_count, j_max)?;
    let mut csv = Csv::new(seed, command, "j,success_prob,repetitions");
    csv.rows = rows
        .iter()
        .map(|r| format!("{},{},{}", r.j, r.success_prob, r.repetitions))
        .collect();
    let best = rows
        .iter()
        .min_by(|a, b| a.repetitions.total_cmp(&b.repetitions))
        .expect("at least the j = 0 row");
    Ok(CommandOutput {
        contents: csv.render(),
        summary: format!(
            "rows={} min_repetitions={} at_j={}",
            rows.len(),
            best.repetitions,
            best.j
        ),
    })
}

/// `search`: Monte-Carlo hybrid search.
pub fn cmd_search(
    n: usize,
    marked: Vec<usize>,
    j: usize,
    trials: usize,
    max_repetitions: Option<usize>,
    seed: u64,
    command: &str,
) -> Result<CommandOutput> {
    let problem = SearchProblem::new(n, marked)?;
    let stats = run_search_experiment(&problem, j, trials, max_repetitions, seed)?;
    let mut csv = Csv::new(seed, command, "trial,repetitions,hit_index");
    csv.comments.push(format!(
        "analytic_success_prob={}",
        stats.analytic_success_prob
    ));
    csv.rows = stats
        .records
        .iter()
        .map(|r| {
            let hit = r.hit_index.map(|i| i.to_string()).unwrap_or_default();
            format!("{},{},{}", r.trial, r.repetitions, hit)
        })
        .collect();
    Ok(CommandOutput {
        contents: csv.render(),
        summary: format!(
            "trials={} hits={} success_rate={} per_attempt_rate={} analytic_per_attempt={} mean_repetitions={}",
            stats.trials,
            stats.hits,
            stats.empirical_success_rate,
            stats.per_attempt_success_rate(),
            stats.analytic_success_prob,
            stats.mean_repetitions()
        ),
    })
}

/// Duality gate driven by the `recycle` command.
#[derive(Clone, Debug, PartialEq)]
pub enum RecycleGate {
    /// `{½·oracle, ½·I}` for the given marked items.
    Search { marked: Vec<usize> },
    /// `{½·I, ½·iI}`.
    Phase,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RecoveryChoice {
    Reset,
    Exact,
    Custom(Operator),
}

/// `recycle`: histogram of cycles to a hit over independent runs, each
/// starting from the uniform state.
#[allow(clippy::too_many_arguments)]
pub fn cmd_recycle(
    n: usize,
    gate: &RecycleGate,
    recovery: &RecoveryChoice,
    trials: usize,
    max_cycles: Option<usize>,
    seed: u64,
    command: &str,
) -> Result<CommandOutput> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let dim = 1usize << n;
    let duality_gate = match gate {
        RecycleGate::Search { marked } => search_gate(&SearchProblem::new(n, marked.clone())?),
        RecycleGate::Phase => DualityGate::symmetric(
            Operator::identity(dim),
            Operator::identity(dim).scale(Complex64::i()),
        )?,
    };
    let input = StateVector::uniform_state(n)?;
    let strategy = match recovery {
        RecoveryChoice::Reset => RecoveryStrategy::Reset {
            input: input.clone(),
        },
        RecoveryChoice::Exact => RecoveryStrategy::ExactUnitary {
            v: exact_recovery(&duality_gate).ok_or_else(|| {
                Error::InvalidArgument("gate has no exact recovery unitary".into())
            })?,
        },
        RecoveryChoice::Custom(v) => RecoveryStrategy::Custom { v: v.clone() },
    };
    let expected = expected_cycles(&duality_gate, &input).ok();
    let budget =
        max_cycles.unwrap_or_else(|| default_max_cycles(expected.map_or(0.0, |e| 1.0 / e)));
    let runs = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            run_recycling(&input, &duality_gate, &strategy, budget, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut exhausted = 0;
    let mut total_cycles = 0;
    for run in &runs {
        total_cycles += run.cycles_used;
        match run.outcome {
            RecyclingOutcome::Hit { .. } => *histogram.entry(run.cycles_used).or_default() += 1,
            RecyclingOutcome::Exhausted => exhausted += 1,
        }
    }
    let mut csv = Csv::new(seed, command, "cycles,count");
    csv.comments.push(format!("max_cycles={budget}"));
    csv.comments.push(format!("exhausted={exhausted}"));
    if let Some(e) = expected {
        csv.comments.push(format!("expected_cycles={e}"));
    }
    csv.rows = histogram.iter().map(|(c, k)| format!("{c},{k}")).collect();
    let expected_text = expected.map_or("inf".to_string(), |e| e.to_string());
    Ok(CommandOutput {
        contents: csv.render(),
        summary: format!(
            "trials={trials} hits={} exhausted={exhausted} mean_cycles={} expected_cycles={expected_text}",
            trials - exhausted,
            total_cycles as f64 / trials as f64
        ),
    })
}

/// Which decomposition `decompose` computes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecomposeMode {
    /// Four-unitary decomposition of any matrix.
    General,
    /// Two commuting unitaries; the matrix must be normal.
    Normal { tol: f64 },
}

/// Text rendering of a decomposition: `alpha`, `weights`, `residual`, then
/// each unitary in the matrix text format after a `unitary <i>` line.
pub fn render_decomposition(dec: &LcuDecomposition, command: &str) -> String {
    let mut out = format!("# command={command}\n");
    let _ = writeln!(out, "alpha {}", dec.alpha);
    let w: Vec<String> = dec
        .weights
        .as_slice()
        .iter()
        .map(|p| format!("{p}"))
        .collect();
    let _ = writeln!(out, "weights {}", w.join(" "));
    let _ = writeln!(out, "residual {:e}", dec.residual);
    for (i, u) in dec.unitaries.iter().enumerate() {
        let _ = writeln!(out, "unitary {i}");
        out.push_str(&u.to_text());
    }
    out
}

/// `decompose`: operator → `α Σ pᵢUᵢ`.
pub fn cmd_decompose(
    matrix_text: &str,
    mode: DecomposeMode,
    command: &str,
) -> Result<CommandOutput> {
    let a = Operator::from_text(matrix_text)?;
    let dec = match mode {
        DecomposeMode::General => lcu_decompose(&a),
        DecomposeMode::Normal { tol } => normal_decompose(&a, tol)?,
    };
    Ok(CommandOutput {
        contents: render_decomposition(&dec, command),
        summary: format!(
            "alpha={} terms={} residual={:e}",
            dec.alpha,
            dec.unitaries.len(),
            dec.residual
        ),
    })
}

/// `simulate`: run a circuit file and report measurements and amplitudes.
pub fn cmd_simulate(circuit_text: &str, seed: u64, command: &str) -> Result<CommandOutput> {
    let spec = parse_circuit(circuit_text)?;
    let report = simulate(&spec, seed)?;
    let mut out = format!("# seed={seed}\n# command={command}\n");
    for m in &report.measurements {
        let result = m
            .hit_index
            .map_or("miss".to_string(), |i| format!("hit index={i}"));
        let _ = writeln!(
            out,
            "cmeasure instruction={} p0={} result={result}",
            m.instruction, m.hit_probability
        );
    }
    let summary = match &report.final_state {
        Some(state) => {
            let _ = writeln!(out, "norm {}", state.norm());
            let _ = writeln!(out, "index,amplitude");
            for (i, a) in state.amplitudes().iter().enumerate() {
                let _ = writeln!(out, "{i},{}", format_complex(*a));
            }
            format!("completed norm={}", state.norm())
        }
        None => {
            out.push_str("no result\n");
            "missed".to_string()
        }
    };
    Ok(CommandOutput {
        contents: out,
        summary,
    })
}
