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

//! Duality-mode quantum computing on a dense state-vector simulator.
//!
//! * [`statevec`]: registers, operators, gate application.
//! * [`duality`]: wave divider/combiner, duality gates, the ancilla dilation
//!   circuit and conditional measurement.
//! * [`opalg`]: decompositions of operators into combinations of unitaries.
//! * [`recycling`]: the repeat-until-hit loop with input recovery.
//! * [`search`]: duality-mode database search and its amplitude-amplification hybrid.
//! * [`cli`]: circuit text format, CSV output and the command drivers behind
//!   the `duality` binary.

pub mod cli;
pub mod duality;
pub mod error;
pub mod opalg;
pub mod random;
pub mod recycling;
pub mod search;
pub mod statevec;

pub use error::{Error, Result};
pub use statevec::{Operator, StateVector};
