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

use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("basis index {index} out of range for {num_qubits} qubits")]
    IndexOutOfRange { index: usize, num_qubits: usize },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} appears more than once in the target/control list")]
    DuplicateQubit(usize),
    #[error("control qubit {0} is also a target")]
    ControlTargetOverlap(usize),
    #[error("register of {0} qubits exceeds the dense simulation limit")]
    TooManyQubits(usize),
    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("operator is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("operator is not normal (commutator {commutator:e})")]
    NotNormal { commutator: f64 },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("invalid slit weights: {0}")]
    InvalidWeights(String),
    #[error("selected measurement branch has norm {norm:e}; cannot normalize")]
    DegenerateBranch { norm: f64 },
    #[error("hit probability {p0:e} is zero; expected cycle count is infinite")]
    InfiniteExpectation { p0: f64 },
    #[error("invalid search problem: {0}")]
    InvalidProblem(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Short stable identifier used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::QubitOutOfRange { .. } => "qubit_out_of_range",
            Error::DuplicateQubit(_) => "duplicate_qubit",
            Error::ControlTargetOverlap(_) => "control_target_overlap",
            Error::TooManyQubits(_) => "too_many_qubits",
            Error::NotSquare { .. } => "not_square",
            Error::NotPowerOfTwo(_) => "not_power_of_two",
            Error::NonFinite => "non_finite",
            Error::NotUnitary { .. } => "not_unitary",
            Error::NotNormal { .. } => "not_normal",
            Error::NotNormalized { .. } => "not_normalized",
            Error::InvalidWeights(_) => "invalid_weights",
            Error::DegenerateBranch { .. } => "degenerate_branch",
            Error::InfiniteExpectation { .. } => "infinite_expectation",
            Error::InvalidProblem(_) => "invalid_problem",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse { .. } => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
