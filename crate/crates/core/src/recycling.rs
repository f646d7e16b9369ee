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

//! Recycling execution: run the dilation circuit, measure the auxiliary
//! register, and on a miss restore an input state and go again.
//!
//! A miss leaves the work register in the normalized auxiliary ≠ 0 branch.
//! How that state is turned back into an input is a [`RecoveryStrategy`]:
//! an exact inverse of the miss-branch operator (exists only when that
//! operator is proportional to a unitary, see [`exact_recovery`]), a fresh
//! re-preparation of the input, or an arbitrary user unitary.

use rand::Rng;

use crate::duality::{
    apply_duality_gate, build_dilation, conditional_measure, hit_probability, sample_basis_index,
    DualityGate, MeasurementOutcome, DEGENERATE_NORM,
};
use crate::error::{Error, Result};
use crate::statevec::{Operator, StateVector, DEFAULT_UNITARY_TOL, NORMALIZED_TOL};

/// Upper bound for [`default_max_cycles`].
pub const MAX_CYCLES_CAP: usize = 1_000_000;

/// How the work register is restored after a miss.
#[derive(Clone, Debug, PartialEq)]
pub enum RecoveryStrategy {
    /// Inverse of the miss-branch operator, as found by [`exact_recovery`].
    ExactUnitary { v: Operator },
    /// Discard the miss state and re-prepare `input`.
    Reset { input: StateVector },
    /// Apply an arbitrary unitary to the miss state.
    Custom { v: Operator },
}

impl RecoveryStrategy {
    fn validate(&self, work_dim: usize) -> Result<()> {
        match self {
            RecoveryStrategy::ExactUnitary { v } | RecoveryStrategy::Custom { v } => {
                if v.dim() != work_dim {
                    return Err(Error::DimensionMismatch {
                        expected: work_dim,
                        found: v.dim(),
                    });
                }
                let deviation = v.unitarity_deviation();
                if deviation > DEFAULT_UNITARY_TOL {
                    return Err(Error::NotUnitary { deviation });
                }
            }
            RecoveryStrategy::Reset { input } => {
                if input.dim() != work_dim {
                    return Err(Error::DimensionMismatch {
                        expected: work_dim,
                        found: input.dim(),
                    });
                }
                if !input.is_normalized(NORMALIZED_TOL) {
                    return Err(Error::NotNormalized { norm: input.norm() });
                }
            }
        }
        Ok(())
    }
}

/// Terminal state of a recycling run.
#[derive(Clone, Debug, PartialEq)]
pub enum RecyclingOutcome {
    Hit {
        post_state: StateVector,
        sampled_index: usize,
    },
    /// No hit within the cycle budget.
    Exhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecyclingRun {
    pub outcome: RecyclingOutcome,
    pub cycles_used: usize,
    /// Analytic hit probability at the top of each cycle.
    pub per_cycle_hit_prob: Vec<f64>,
}

impl RecyclingRun {
    pub fn is_hit(&self) -> bool {
        matches!(self.outcome, RecyclingOutcome::Hit { .. })
    }
}

/// Recovery unitary for a two-slit gate.
///
/// The miss branch of the dilation applies `M = Σᵢ c₁ᵢUᵢ` to the work
/// register (`(U₀ − U₁)/2` for symmetric weights). If `M†M = cI` with
/// `c > 0`, returns `V = M†/√c`, which maps every miss state back to the
/// cycle input. Returns `None` otherwise, and for `m ≠ 2`.
pub fn exact_recovery(gate: &DualityGate) -> Option<Operator> {
    if gate.num_slits() != 2 {
        return None;
    }
    let miss = build_dilation(gate).block_operator(1);
    let gram = &miss.adjoint() * &miss;
    let c = gram.trace().re / gram.dim() as f64;
    if c <= DEGENERATE_NORM {
        return None;
    }
    if gram.max_abs_diff(&Operator::identity(gram.dim()).scale_real(c)) > DEFAULT_UNITARY_TOL {
        return None;
    }
    Some(miss.adjoint().scale_real(1.0 / c.sqrt()))
}

/// `1/P₀` with `P₀ = ‖(Σ pᵢUᵢ)·input‖²`: the mean cycle count when every
/// cycle starts from `input`.
pub fn expected_cycles(gate: &DualityGate, input: &StateVector) -> Result<f64> {
    let p0 = apply_duality_gate(input, gate)?.norm_sqr();
    if p0 <= DEGENERATE_NORM {
        return Err(Error::InfiniteExpectation { p0 });
    }
    Ok(1.0 / p0)
}

/// Budget of `64/P₀` cycles, capped at [`MAX_CYCLES_CAP`].
pub fn default_max_cycles(hit_probability: f64) -> usize {
    if hit_probability <= DEGENERATE_NORM {
        return MAX_CYCLES_CAP;
    }
    (64.0 / hit_probability).ceil().min(MAX_CYCLES_CAP as f64) as usize
}

/// Turns a miss post-state (full register) into the next cycle's work input.
///
/// With more than one auxiliary qubit the miss state can spread over several
/// auxiliary blocks; the auxiliary register is then read out first and the
/// selected block is used.
pub fn recover<R: Rng + ?Sized>(
    miss_state: &StateVector,
    num_work_qubits: usize,
    strategy: &RecoveryStrategy,
    rng: &mut R,
) -> Result<StateVector> {
    let v = match strategy {
        RecoveryStrategy::Reset { input } => return Ok(input.clone()),
        RecoveryStrategy::ExactUnitary { v } | RecoveryStrategy::Custom { v } => v,
    };
    let num_aux = miss_state.num_qubits() - num_work_qubits;
    let aux_weights: Vec<f64> = (0..1usize << num_aux)
        .map(|a| {
            miss_state
                .high_block(num_work_qubits, a)
                .map(|b| b.norm_sqr())
        })
        .collect::<Result<_>>()?;
    let aux_marginal =
        StateVector::from_real(&aux_weights.iter().map(|w| w.sqrt()).collect::<Vec<_>>())?;
    let aux = if aux_weights.iter().filter(|w| **w > 0.0).count() == 1 {
        aux_weights.iter().position(|w| *w > 0.0).unwrap_or(0)
    } else {
        sample_basis_index(&aux_marginal, rng)?
    };
    let work = miss_state.high_block(num_work_qubits, aux)?.normalized()?;
    v.apply_full(&work)
}

/// Repeats dilation + conditional measurement until a hit or `max_cycles`.
pub fn run_recycling<R: Rng + ?Sized>(
    input: &StateVector,
    gate: &DualityGate,
    strategy: &RecoveryStrategy,
    max_cycles: usize,
    rng: &mut R,
) -> Result<RecyclingRun> {
    if max_cycles == 0 {
        return Err(Error::InvalidArgument(
            "max_cycles must be at least 1".into(),
        ));
    }
    if input.dim() != gate.dim() {
        return Err(Error::DimensionMismatch {
            expected: gate.dim(),
            found: input.dim(),
        });
    }
    if !input.is_normalized(NORMALIZED_TOL) {
        return Err(Error::NotNormalized { norm: input.norm() });
    }
    strategy.validate(gate.dim())?;

    let circuit = build_dilation(gate);
    let n = circuit.num_work_qubits();
    let mut work = input.clone();
    let mut per_cycle_hit_prob = Vec::new();
    for cycle in 1..=max_cycles {
        let full = crate::duality::run_dilation(&work, &circuit)?;
        per_cycle_hit_prob.push(hit_probability(&full, n)?);
        match conditional_measure(&full, n, rng)? {
            MeasurementOutcome::Hit {
                post_state,
                sampled_index,
            } => {
                return Ok(RecyclingRun {
                    outcome: RecyclingOutcome::Hit {
                        post_state,
                        sampled_index,
                    },
                    cycles_used: cycle,
                    per_cycle_hit_prob,
                })
            }
            MeasurementOutcome::Miss { post_state } => {
                if cycle < max_cycles {
                    // Fresh |0⟩ auxiliary next cycle stands in for flipping it back.
                    work = recover(&post_state, n, strategy, rng)?;
                }
            }
        }
    }
    Ok(RecyclingRun {
        outcome: RecyclingOutcome::Exhausted,
        cycles_used: max_cycles,
        per_cycle_hit_prob,
    })
}
