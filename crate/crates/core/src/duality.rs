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

//! Duality-computing primitives.
//!
//! A duality gate `Σ pᵢUᵢ` is a convex combination of unitaries and is in
//! general not unitary. It can be evaluated in two ways:
//!
//! * directly, by dividing a state into weighted copies, applying `Uᵢ` to
//!   copy `i` and summing the weighted results ([`divide`],
//!   [`apply_per_slit`], [`combine`]);
//! * through a dilation circuit on `n` work qubits plus `⌈log₂ m⌉` auxiliary
//!   qubits: a preparation unitary on the auxiliary register, one
//!   auxiliary-controlled unitary per slit, then a combining unitary. The
//!   auxiliary = 0 block of the output holds the duality-gate result.
//!
//! [`conditional_measure`] asks only whether the auxiliary register reads 0.
//! A hit projects onto that block; a miss removes it and leaves the
//! normalized remainder ("collapse-out"). The pre-measurement state is never
//! renormalized.

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{Error, Result};
use crate::statevec::{
    apply_controlled, apply_operator, Operator, StateVector, DEFAULT_UNITARY_TOL, NORMALIZED_TOL,
};

/// Norm below which a measurement branch cannot be normalized.
pub const DEGENERATE_NORM: f64 = 1e-14;
/// Allowed deviation of `Σ pᵢ` from 1.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Slit strengths `p₁..p_m`: non-negative, summing to one, `m ≥ 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlitWeights(Vec<f64>);

impl SlitWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidWeights(format!(
                "need at least two slits, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "weight {w} is not a non-negative number"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(SlitWeights(weights))
    }

    /// `m` equal weights `1/m`.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn is_symmetric_pair(&self) -> bool {
        self.0.len() == 2 && self.0[0] == self.0[1]
    }
}

/// One sub-wave of a divided state.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub sub_wave: StateVector,
}

/// Direct sum `⊕ᵢ pᵢ|ψᵢ⟩`, stored as (weight, normalized sub-wave) pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchState {
    branches: Vec<Branch>,
}

impl BranchState {
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn weights(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.weight).collect()
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }
}

/// The weighted sum of per-slit unitaries `Σ pᵢUᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityGate {
    weights: SlitWeights,
    unitaries: Vec<Operator>,
}

impl DualityGate {
    pub fn new(weights: SlitWeights, unitaries: Vec<Operator>) -> Result<Self> {
        if unitaries.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} slit weights but {} unitaries",
                weights.len(),
                unitaries.len()
            )));
        }
        let dim = unitaries[0].dim();
        if !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        for u in &unitaries {
            if u.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.dim(),
                });
            }
            let deviation = u.unitarity_deviation();
            if deviation > DEFAULT_UNITARY_TOL {
                return Err(Error::NotUnitary { deviation });
            }
        }
        Ok(DualityGate { weights, unitaries })
    }

    /// Symmetric two-slit gate `(U₀ + U₁)/2`.
    pub fn symmetric(u0: Operator, u1: Operator) -> Result<Self> {
        Self::new(SlitWeights::uniform(2)?, vec![u0, u1])
    }

    pub fn weights(&self) -> &SlitWeights {
        &self.weights
    }

    pub fn unitaries(&self) -> &[Operator] {
        &self.unitaries
    }

    pub fn num_slits(&self) -> usize {
        self.unitaries.len()
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].dim()
    }

    pub fn num_work_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// The assembled operator `Σ pᵢUᵢ`.
    pub fn operator(&self) -> Operator {
        self.weights
            .as_slice()
            .iter()
            .zip(&self.unitaries)
            .fold(Operator::zeros(self.dim()), |acc, (p, u)| {
                &acc + &u.scale_real(*p)
            })
    }
}

fn require_normalized(state: &StateVector) -> Result<()> {
    if state.is_normalized(NORMALIZED_TOL) {
        Ok(())
    } else {
        Err(Error::NotNormalized { norm: state.norm() })
    }
}

fn check_work_dim(state: &StateVector, dim: usize) -> Result<()> {
    if state.dim() != dim {
        Err(Error::DimensionMismatch {
            expected: dim,
            found: state.dim(),
        })
    } else {
        Ok(())
    }
}

/// Wave divider: one weighted copy of `state` per slit.
pub fn divide(state: &StateVector, weights: &SlitWeights) -> Result<BranchState> {
    require_normalized(state)?;
    Ok(BranchState {
        branches: weights
            .as_slice()
            .iter()
            .map(|&weight| Branch {
                weight,
                sub_wave: state.clone(),
            })
            .collect(),
    })
}

/// Applies `unitaries[i]` to sub-wave `i`; weights are untouched.
pub fn apply_per_slit(branch: &BranchState, unitaries: &[Operator]) -> Result<BranchState> {
    if unitaries.len() != branch.len() {
        return Err(Error::InvalidArgument(format!(
            "{} branches but {} unitaries",
            branch.len(),
            unitaries.len()
        )));
    }
    let branches = branch
        .branches
        .iter()
        .zip(unitaries)
        .map(|(b, u)| {
            let deviation = u.unitarity_deviation();
            if deviation > DEFAULT_UNITARY_TOL {
                return Err(Error::NotUnitary { deviation });
            }
            Ok(Branch {
                weight: b.weight,
                sub_wave: u.apply_full(&b.sub_wave)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BranchState { branches })
}

/// Wave combiner: `Σᵢ pᵢ|ψᵢ⟩`, not renormalized.
pub fn combine(branch: &BranchState) -> StateVector {
    let mut acc = StateVector::zeros(branch.branches[0].sub_wave.num_qubits())
        .expect("sub-wave register size already validated");
    for b in &branch.branches {
        acc = acc
            .try_add(&b.sub_wave.scaled(Complex64::new(b.weight, 0.0)))
            .expect("sub-waves share a register size");
    }
    acc
}

/// `(Σ pᵢUᵢ)|ψ⟩` evaluated slit by slit. Accepts unnormalized input.
pub fn apply_duality_gate(state: &StateVector, gate: &DualityGate) -> Result<StateVector> {
    check_work_dim(state, gate.dim())?;
    let mut acc = StateVector::zeros(state.num_qubits())?;
    for (p, u) in gate.weights.as_slice().iter().zip(&gate.unitaries) {
        acc = acc.try_add(&u.apply_full(state)?.scaled(Complex64::new(*p, 0.0)))?;
    }
    Ok(acc)
}

/// Real unitary (a Householder reflection) whose first column is `column`.
///
/// `column` must be a real unit vector.
pub fn householder_completion(column: &[f64]) -> Operator {
    let d = column.len();
    let tail: f64 = column[1..].iter().map(|x| x * x).sum();
    if tail == 0.0 {
        return Operator::identity(d);
    }
    // w = e₀ − v; w₀ = 1 − v₀ written without cancellation.
    let w0 = tail / (1.0 + column[0]);
    let w: Vec<f64> = std::iter::once(w0)
        .chain(column[1..].iter().map(|x| -x))
        .collect();
    let w_norm_sqr = w0 * w0 + tail;
    let mut op = Operator::identity(d);
    for r in 0..d {
        for c in 0..d {
            let entry = op.get(r, c).re - 2.0 * w[r] * w[c] / w_norm_sqr;
            op.set(r, c, Complex64::new(entry, 0.0));
        }
    }
    op
}

/// Work register plus auxiliary "slit" register realizing a duality gate.
#[derive(Clone, Debug, PartialEq)]
pub struct DilationCircuit {
    num_work_qubits: usize,
    num_aux_qubits: usize,
    num_slits: usize,
    prepare: Operator,
    combine: Operator,
    slit_unitaries: Vec<Operator>,
}

/// Builds the dilation circuit of `gate`: the preparation unitary has first
/// column `(√p₁, …, √p_m, 0, …)` and the combiner is its adjoint, so the
/// auxiliary = 0 block is exactly `Σ pᵢUᵢ`. Symmetric two-slit gates use the
/// Hadamard gate.
pub fn build_dilation(gate: &DualityGate) -> DilationCircuit {
    let m = gate.num_slits();
    let num_aux_qubits = m.next_power_of_two().trailing_zeros() as usize;
    let aux_dim = 1usize << num_aux_qubits;
    let prepare = if gate.weights.is_symmetric_pair() {
        Operator::hadamard()
    } else {
        let mut column: Vec<f64> = gate.weights.as_slice().iter().map(|p| p.sqrt()).collect();
        column.resize(aux_dim, 0.0);
        householder_completion(&column)
    };
    let combine = prepare.adjoint();
    let mut slit_unitaries = gate.unitaries.clone();
    slit_unitaries.resize(aux_dim, Operator::identity(gate.dim()));
    DilationCircuit {
        num_work_qubits: gate.num_work_qubits(),
        num_aux_qubits,
        num_slits: m,
        prepare,
        combine,
        slit_unitaries,
    }
}

impl DilationCircuit {
    /// Dilation with caller-chosen preparation and combining unitaries on the
    /// auxiliary register ("more complicated slits"). `slit_unitaries` may be
    /// shorter than the auxiliary dimension; missing slits are identities.
    pub fn from_parts(
        num_work_qubits: usize,
        prepare: Operator,
        combine: Operator,
        mut slit_unitaries: Vec<Operator>,
    ) -> Result<Self> {
        let num_aux_qubits = prepare
            .num_qubits()
            .ok_or(Error::NotPowerOfTwo(prepare.dim()))?;
        if combine.dim() != prepare.dim() {
            return Err(Error::DimensionMismatch {
                expected: prepare.dim(),
                found: combine.dim(),
            });
        }
        for w in [&prepare, &combine] {
            let deviation = w.unitarity_deviation();
            if deviation > DEFAULT_UNITARY_TOL {
                return Err(Error::NotUnitary { deviation });
            }
        }
        let aux_dim = prepare.dim();
        if slit_unitaries.is_empty() || slit_unitaries.len() > aux_dim {
            return Err(Error::InvalidArgument(format!(
                "need between 1 and {aux_dim} slit unitaries, got {}",
                slit_unitaries.len()
            )));
        }
        let work_dim = 1usize << num_work_qubits;
        for u in &slit_unitaries {
            if u.dim() != work_dim {
                return Err(Error::DimensionMismatch {
                    expected: work_dim,
                    found: u.dim(),
                });
            }
            let deviation = u.unitarity_deviation();
            if deviation > DEFAULT_UNITARY_TOL {
                return Err(Error::NotUnitary { deviation });
            }
        }
        let num_slits = slit_unitaries.len();
        slit_unitaries.resize(aux_dim, Operator::identity(work_dim));
        Ok(DilationCircuit {
            num_work_qubits,
            num_aux_qubits,
            num_slits,
            prepare,
            combine,
            slit_unitaries,
        })
    }

    /// Standard preparation for `gate` with a caller-chosen combiner.
    pub fn with_combine(gate: &DualityGate, combine: Operator) -> Result<Self> {
        let base = build_dilation(gate);
        Self::from_parts(
            base.num_work_qubits,
            base.prepare,
            combine,
            gate.unitaries.clone(),
        )
    }

    pub fn num_work_qubits(&self) -> usize {
        self.num_work_qubits
    }

    pub fn num_aux_qubits(&self) -> usize {
        self.num_aux_qubits
    }

    pub fn total_qubits(&self) -> usize {
        self.num_work_qubits + self.num_aux_qubits
    }

    /// Number of slits before padding.
    pub fn num_slits(&self) -> usize {
        self.num_slits
    }

    pub fn prepare(&self) -> &Operator {
        &self.prepare
    }

    pub fn combine(&self) -> &Operator {
        &self.combine
    }

    pub fn slit_unitaries(&self) -> &[Operator] {
        &self.slit_unitaries
    }

    /// Coefficients `c_i = combine[aux, i] · prepare[i, 0]` of the operator
    /// the circuit leaves in auxiliary block `aux`.
    pub fn block_coefficients(&self, aux: usize) -> Vec<Complex64> {
        (0..self.prepare.dim())
            .map(|i| self.combine.get(aux, i) * self.prepare.get(i, 0))
            .collect()
    }

    /// Work-register operator `Σᵢ cᵢUᵢ` landing in auxiliary block `aux`.
    pub fn block_operator(&self, aux: usize) -> Operator {
        self.block_coefficients(aux)
            .into_iter()
            .zip(&self.slit_unitaries)
            .fold(Operator::zeros(1 << self.num_work_qubits), |acc, (c, u)| {
                &acc + &u.scale(c)
            })
    }

    /// The effective non-unitary gate realized on a hit.
    pub fn effective_operator(&self) -> Operator {
        self.block_operator(0)
    }
}

/// Runs the dilation on `work_state ⊗ |0…0⟩_aux` and returns the full
/// (work + auxiliary) register. The circuit is unitary, so the output norm
/// equals the input norm.
pub fn run_dilation(work_state: &StateVector, circuit: &DilationCircuit) -> Result<StateVector> {
    require_normalized(work_state)?;
    check_work_dim(work_state, 1 << circuit.num_work_qubits)?;
    let n = circuit.num_work_qubits;
    let aux_zero = StateVector::basis_state(circuit.num_aux_qubits, 0)?;
    let mut full = work_state.tensor_high(&aux_zero)?;
    let aux_qubits: Vec<usize> = (n..n + circuit.num_aux_qubits).collect();
    let work_qubits: Vec<usize> = (0..n).collect();
    full = apply_operator(&full, &circuit.prepare, &aux_qubits)?;
    for (i, u) in circuit.slit_unitaries.iter().enumerate() {
        full = apply_controlled(&full, u, &work_qubits, &aux_qubits, i)?;
    }
    apply_operator(&full, &circuit.combine, &aux_qubits)
}

/// Result of a conditional measurement of the auxiliary register.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasurementOutcome {
    /// Auxiliary read 0; `post_state` is the normalized work register and
    /// `sampled_index` a Born sample from it.
    Hit {
        post_state: StateVector,
        sampled_index: usize,
    },
    /// No result; `post_state` is the full register with the auxiliary = 0
    /// block removed, renormalized.
    Miss { post_state: StateVector },
}

impl MeasurementOutcome {
    pub fn is_hit(&self) -> bool {
        matches!(self, MeasurementOutcome::Hit { .. })
    }

    pub fn sampled_index(&self) -> Option<usize> {
        match self {
            MeasurementOutcome::Hit { sampled_index, .. } => Some(*sampled_index),
            MeasurementOutcome::Miss { .. } => None,
        }
    }

    pub fn post_state(&self) -> &StateVector {
        match self {
            MeasurementOutcome::Hit { post_state, .. }
            | MeasurementOutcome::Miss { post_state } => post_state,
        }
    }
}

/// The auxiliary = 0 block of a full register, as a work-register vector.
pub fn aux_zero_block(full_state: &StateVector, num_work_qubits: usize) -> Result<StateVector> {
    full_state.high_block(num_work_qubits, 0)
}

/// `P₀ = ‖aux = 0 block‖²`.
pub fn hit_probability(full_state: &StateVector, num_work_qubits: usize) -> Result<f64> {
    Ok(aux_zero_block(full_state, num_work_qubits)?.norm_sqr())
}

/// Draws a basis index from the Born distribution of a non-zero vector.
pub fn sample_basis_index<R: Rng + ?Sized>(state: &StateVector, rng: &mut R) -> Result<usize> {
    let dist = WeightedIndex::new(state.probabilities())
        .map_err(|_| Error::DegenerateBranch { norm: state.norm() })?;
    Ok(dist.sample(rng))
}

/// Measures whether the auxiliary register (all qubits above
/// `num_work_qubits`) is zero.
pub fn conditional_measure<R: Rng + ?Sized>(
    full_state: &StateVector,
    num_work_qubits: usize,
    rng: &mut R,
) -> Result<MeasurementOutcome> {
    require_normalized(full_state)?;
    let block = aux_zero_block(full_state, num_work_qubits)?;
    let p0 = block.norm_sqr();
    if rng.gen::<f64>() < p0 {
        let post_state = block.normalized()?;
        let sampled_index = sample_basis_index(&post_state, rng)?;
        Ok(MeasurementOutcome::Hit {
            post_state,
            sampled_index,
        })
    } else {
        let mut amps = full_state.amplitudes().to_vec();
        amps[..block.dim()].fill(Complex64::new(0.0, 0.0));
        let post_state = StateVector::from_amplitudes(amps)?.normalized()?;
        Ok(MeasurementOutcome::Miss { post_state })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_state, random_unitary};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn x() -> Operator {
        Operator::pauli_x()
    }

    fn id2() -> Operator {
        Operator::identity(2)
    }

    #[test]
    fn weight_validation() {
        assert!(SlitWeights::new(vec![0.5, 0.5]).is_ok());
        assert!(SlitWeights::new(vec![1.0, 0.0]).is_ok());
        assert!(SlitWeights::new(vec![0.3, 0.7]).is_ok());
        assert!(SlitWeights::new(vec![1.0]).is_err());
        assert!(SlitWeights::new(vec![0.6, 0.6]).is_err());
        assert!(SlitWeights::new(vec![1.5, -0.5]).is_err());
        assert!(SlitWeights::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn divide_examples() {
        let zero = StateVector::basis_state(1, 0).unwrap();
        let b = divide(&zero, &SlitWeights::uniform(2).unwrap()).unwrap();
        assert_eq!(b.weights(), vec![0.5, 0.5]);
        assert!(b.branches().iter().all(|br| br.sub_wave == zero));

        let psi = StateVector::uniform_state(2).unwrap();
        let b = divide(&psi, &SlitWeights::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(b.weights(), vec![1.0, 0.0]);
        let b = divide(&psi, &SlitWeights::new(vec![0.3, 0.7]).unwrap()).unwrap();
        assert_eq!(b.weights(), vec![0.3, 0.7]);
        assert!(b.branches().iter().all(|br| br.sub_wave == psi));

        let unnormalized = StateVector::from_real(&[1.0, 1.0]).unwrap();
        assert!(matches!(
            divide(&unnormalized, &SlitWeights::uniform(2).unwrap()),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn per_slit_examples() {
        let zero = StateVector::basis_state(1, 0).unwrap();
        let one = StateVector::basis_state(1, 1).unwrap();
        let w = SlitWeights::uniform(2).unwrap();
        let b = apply_per_slit(&divide(&zero, &w).unwrap(), &[x(), id2()]).unwrap();
        assert_eq!(b.branches()[0].sub_wave, one);
        assert_eq!(b.branches()[1].sub_wave, zero);
        assert_eq!(b.weights(), vec![0.5, 0.5]);

        let plus = StateVector::uniform_state(1).unwrap();
        let div = divide(&plus, &w).unwrap();
        assert_eq!(apply_per_slit(&div, &[id2(), id2()]).unwrap(), div);

        let b = apply_per_slit(&div, &[Operator::pauli_z(), id2()]).unwrap();
        let minus = StateVector::from_real(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]).unwrap();
        assert!(b.branches()[0].sub_wave.max_abs_diff(&minus).unwrap() < 1e-15);
        assert_eq!(b.branches()[1].sub_wave, plus);

        assert!(apply_per_slit(&div, &[id2()]).is_err());
        let proj = Operator::diagonal(&[c(1.0), c(0.0)]);
        assert!(matches!(
            apply_per_slit(&div, &[proj, id2()]),
            Err(Error::NotUnitary { .. })
        ));
        assert!(apply_per_slit(&div, &[Operator::identity(4), id2()]).is_err());
    }

    #[test]
    fn combine_examples() {
        let zero = StateVector::basis_state(1, 0).unwrap();
        let one = StateVector::basis_state(1, 1).unwrap();
        let b = BranchState {
            branches: vec![
                Branch {
                    weight: 0.5,
                    sub_wave: one,
                },
                Branch {
                    weight: 0.5,
                    sub_wave: zero.clone(),
                },
            ],
        };
        let out = combine(&b);
        assert_eq!(out.amplitudes(), &[c(0.5), c(0.5)]);
        assert!((out.norm() - FRAC_1_SQRT_2).abs() < 1e-16);

        let plus = StateVector::uniform_state(1).unwrap();
        let b = BranchState {
            branches: vec![
                Branch {
                    weight: 0.5,
                    sub_wave: plus.clone(),
                },
                Branch {
                    weight: 0.5,
                    sub_wave: plus.scaled(c(-1.0)),
                },
            ],
        };
        assert_eq!(combine(&b).norm(), 0.0);
    }

    #[test]
    fn duality_gate_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = random_state(2, &mut rng);
        let id = DualityGate::symmetric(Operator::identity(4), Operator::identity(4)).unwrap();
        assert_eq!(apply_duality_gate(&psi, &id).unwrap(), psi);

        let zero = StateVector::basis_state(1, 0).unwrap();
        let g = DualityGate::symmetric(x(), id2()).unwrap();
        assert_eq!(
            apply_duality_gate(&zero, &g).unwrap().amplitudes(),
            &[c(0.5), c(0.5)]
        );

        let z = Operator::pauli_z();
        let g = DualityGate::symmetric(z.clone(), z.scale_real(-1.0)).unwrap();
        let phi = random_state(1, &mut rng);
        assert_eq!(apply_duality_gate(&phi, &g).unwrap().norm(), 0.0);

        assert!(apply_duality_gate(&psi, &g).is_err());
    }

    #[test]
    fn gate_validation() {
        let proj = Operator::diagonal(&[c(1.0), c(0.0)]);
        assert!(DualityGate::symmetric(proj, id2()).is_err());
        assert!(DualityGate::symmetric(Operator::identity(4), id2()).is_err());
        assert!(DualityGate::symmetric(Operator::identity(3), Operator::identity(3)).is_err());
        let w3 = SlitWeights::uniform(3).unwrap();
        assert!(DualityGate::new(w3, vec![id2(), id2()]).is_err());
    }

    #[test]
    fn dilation_examples() {
        let g = DualityGate::symmetric(x(), id2()).unwrap();
        let circ = build_dilation(&g);
        assert_eq!(circ.prepare(), &Operator::hadamard());
        assert_eq!(circ.num_aux_qubits(), 1);

        let g4 = DualityGate::new(SlitWeights::uniform(4).unwrap(), vec![id2(); 4]).unwrap();
        let circ = build_dilation(&g4);
        assert_eq!(circ.num_aux_qubits(), 2);
        assert!(circ.prepare().is_unitary(1e-14));
        for v in circ.prepare().column(0) {
            assert!((v - c(0.5)).norm() < 1e-15);
        }

        let g = DualityGate::new(
            SlitWeights::new(vec![0.64, 0.36]).unwrap(),
            vec![x(), id2()],
        )
        .unwrap();
        let circ = build_dilation(&g);
        assert!(circ.prepare().is_unitary(1e-14));
        let col = circ.prepare().column(0);
        assert!((col[0] - c(0.8)).norm() < 1e-15);
        assert!((col[1] - c(0.6)).norm() < 1e-15);

        // Three slits pad to four with an identity of zero weight.
        let g3 = DualityGate::new(
            SlitWeights::uniform(3).unwrap(),
            vec![x(), id2(), Operator::pauli_z()],
        )
        .unwrap();
        let circ = build_dilation(&g3);
        assert_eq!(circ.num_aux_qubits(), 2);
        assert_eq!(circ.num_slits(), 3);
        assert_eq!(circ.slit_unitaries()[3], id2());
        assert!(circ.prepare().get(3, 0).norm() == 0.0);
        assert!(circ.effective_operator().max_abs_diff(&g3.operator()) < 1e-15);
    }

    #[test]
    fn householder_edge_cases() {
        assert_eq!(
            householder_completion(&[1.0, 0.0, 0.0, 0.0]),
            Operator::identity(4)
        );
        let p1: f64 = 1.0 - 1e-13;
        let col = [p1.sqrt(), (1.0 - p1).sqrt()];
        let w = householder_completion(&col);
        assert!(w.is_unitary(1e-14));
        assert!((w.get(1, 0).re - col[1]).abs() < 1e-20);
    }

    #[test]
    fn run_dilation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let phi = random_state(2, &mut rng);
        let id = DualityGate::symmetric(Operator::identity(4), Operator::identity(4)).unwrap();
        let out = run_dilation(&phi, &build_dilation(&id)).unwrap();
        let expected = phi
            .tensor_high(&StateVector::basis_state(1, 0).unwrap())
            .unwrap();
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-15);

        // ((|0⟩+|1⟩)/2)|0⟩ + ((|1⟩−|0⟩)/2)|1⟩, index = aux·2 + work.
        let zero = StateVector::basis_state(1, 0).unwrap();
        let g = DualityGate::symmetric(x(), id2()).unwrap();
        let out = run_dilation(&zero, &build_dilation(&g)).unwrap();
        let expected = StateVector::from_real(&[0.5, 0.5, -0.5, 0.5]).unwrap();
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-15);
        assert!((out.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn custom_combiner_reports_effective_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = DualityGate::symmetric(x(), Operator::pauli_z()).unwrap();
        let combine = random_unitary(2, &mut rng);
        let circ = DilationCircuit::with_combine(&g, combine.clone()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected =
            &x().scale(combine.get(0, 0) * h) + &Operator::pauli_z().scale(combine.get(0, 1) * h);
        assert!(circ.effective_operator().max_abs_diff(&expected) < 1e-15);
        let phi = random_state(1, &mut rng);
        let out = run_dilation(&phi, &circ).unwrap();
        let block = aux_zero_block(&out, 1).unwrap();
        let direct = circ.effective_operator().apply_full(&phi).unwrap();
        assert!(block.max_abs_diff(&direct).unwrap() < 1e-14);
        assert!(DilationCircuit::with_combine(&g, Operator::diagonal(&[c(1.0), c(0.0)])).is_err());
    }

    #[test]
    fn measurement_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phi = random_state(2, &mut rng);
        let full = phi
            .tensor_high(&StateVector::basis_state(1, 0).unwrap())
            .unwrap();
        for _ in 0..100 {
            let out = conditional_measure(&full, 2, &mut rng).unwrap();
            assert!(out.is_hit());
            assert!(out.post_state().max_abs_diff(&phi).unwrap() < 1e-15);
        }

        let zero = StateVector::basis_state(1, 0).unwrap();
        let g = DualityGate::symmetric(x(), id2()).unwrap();
        let full = run_dilation(&zero, &build_dilation(&g)).unwrap();
        assert!((hit_probability(&full, 1).unwrap() - 0.5).abs() < 1e-15);
        let miss = (0..64)
            .map(|_| conditional_measure(&full, 1, &mut rng).unwrap())
            .find(|o| !o.is_hit())
            .expect("P(miss) = 1/2");
        let h = FRAC_1_SQRT_2;
        let expected = StateVector::from_real(&[0.0, 0.0, -h, h]).unwrap();
        assert!(miss.post_state().max_abs_diff(&expected).unwrap() < 1e-15);

        let z = Operator::pauli_z();
        let g = DualityGate::symmetric(z.clone(), z.scale_real(-1.0)).unwrap();
        let full = run_dilation(&random_state(1, &mut rng), &build_dilation(&g)).unwrap();
        for _ in 0..100 {
            assert!(!conditional_measure(&full, 1, &mut rng).unwrap().is_hit());
        }
    }

    #[test]
    fn degenerate_and_invalid_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Miss branch is empty, so every draw hits.
        let full = StateVector::basis_state(2, 0).unwrap();
        let out = conditional_measure(&full, 1, &mut rng).unwrap();
        assert!(out.is_hit());
        let not_normalized = StateVector::from_real(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            conditional_measure(&not_normalized, 1, &mut rng),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            StateVector::zeros(1).unwrap().normalized(),
            Err(Error::DegenerateBranch { .. })
        ));
    }

    #[test]
    fn hit_frequency_matches_born_rule() {
        let zero = StateVector::basis_state(1, 0).unwrap();
        let g = DualityGate::new(
            SlitWeights::new(vec![0.3, 0.7]).unwrap(),
            vec![x(), Operator::pauli_y()],
        )
        .unwrap();
        let full = run_dilation(&zero, &build_dilation(&g)).unwrap();
        let p0 = hit_probability(&full, 1).unwrap();
        let trials = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let hits = (0..trials)
            .filter(|_| conditional_measure(&full, 1, &mut rng).unwrap().is_hit())
            .count();
        let sigma = (trials as f64 * p0 * (1.0 - p0)).sqrt();
        assert!((hits as f64 - trials as f64 * p0).abs() <= 4.0 * sigma);
    }

    #[test]
    fn equal_slits_preserve_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let u = random_unitary(4, &mut rng);
            let g = DualityGate::new(
                SlitWeights::new(vec![0.2, 0.5, 0.3]).unwrap(),
                vec![u.clone(); 3],
            )
            .unwrap();
            for _ in 0..5 {
                let psi = random_state(2, &mut rng);
                assert!((apply_duality_gate(&psi, &g).unwrap().norm() - 1.0).abs() < 1e-12);
            }
        }
        // Same operator up to distinct phases is not norm preserving.
        let g = DualityGate::symmetric(id2(), id2().scale(Complex64::i())).unwrap();
        let out = apply_duality_gate(&StateVector::basis_state(1, 0).unwrap(), &g).unwrap();
        assert!((out.norm() - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    fn random_gate(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DualityGate {
        let raw: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let sum: f64 = raw.iter().sum();
        let mut weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        let head: f64 = weights[..m - 1].iter().sum();
        weights[m - 1] = 1.0 - head;
        let unitaries = (0..m).map(|_| random_unitary(1 << n, rng)).collect();
        DualityGate::new(SlitWeights::new(weights).unwrap(), unitaries).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn combine_inverts_divide(seed in any::<u64>(), m in 2usize..6, n in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gate = random_gate(&mut rng, m, n.max(1));
            let psi = random_state(n, &mut rng);
            let out = combine(&divide(&psi, gate.weights()).unwrap());
            prop_assert!(out.max_abs_diff(&psi).unwrap() <= 1e-12);
        }

        #[test]
        fn dilation_block_equals_direct(seed in any::<u64>(), m in 2usize..=4, n in 1usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gate = random_gate(&mut rng, m, n);
            let psi = random_state(n, &mut rng);
            let full = run_dilation(&psi, &build_dilation(&gate)).unwrap();
            let block = aux_zero_block(&full, n).unwrap();
            let direct = apply_duality_gate(&psi, &gate).unwrap();
            let three_step = combine(&apply_per_slit(&divide(&psi, gate.weights()).unwrap(), gate.unitaries()).unwrap());
            prop_assert!(block.max_abs_diff(&direct).unwrap() <= 1e-10);
            prop_assert!(three_step.max_abs_diff(&direct).unwrap() <= 1e-12);
            prop_assert!(direct.norm() <= 1.0 + 1e-12);
            let p0 = hit_probability(&full, n).unwrap();
            let rest = full.norm_sqr() - p0;
            prop_assert!((p0 + rest - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn distinct_slits_contract_some_state(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gate = random_gate(&mut rng, 2, 2);
            let min_norm = (0..4)
                .map(|i| apply_duality_gate(&StateVector::basis_state(2, i).unwrap(), &gate).unwrap().norm())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(min_norm < 1.0 - 1e-6);
        }
    }
}
