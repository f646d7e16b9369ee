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

//! Dense state vectors and operators.
//!
//! Qubit `k` of a register is bit `k` of the basis-state index (qubit 0 is
//! the least-significant bit). Auxiliary (slit) qubits are always placed
//! above the work register, so a full register index is
//! `aux << num_work_qubits | work`.
//!
//! Operators acting on a list of target qubits use the same convention
//! locally: `targets[0]` is the least-significant bit of the operator's
//! row/column index.
//!
//! Nothing in this module renormalizes. Non-unitary operators are valid
//! inputs and the norm of their output is whatever the arithmetic gives.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance for unitarity checks.
pub const DEFAULT_UNITARY_TOL: f64 = 1e-10;
/// Tolerance for `‖ψ‖ = 1`.
pub const NORMALIZED_TOL: f64 = 1e-10;
/// Largest register the dense representation accepts (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense amplitude vector over the 2^n basis states of an n-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps an amplitude vector whose length is a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_qubit_count(num_qubits)?;
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Real-amplitude convenience constructor.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// The all-zero vector (not a physical state; produced by cancelling gates).
    pub fn zeros(num_qubits: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        Ok(StateVector {
            num_qubits,
            amplitudes: vec![ZERO; 1 << num_qubits],
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zeros(num_qubits)?;
        if index >= state.dim() {
            return Err(Error::IndexOutOfRange { index, num_qubits });
        }
        state.amplitudes[index] = ONE;
        Ok(state)
    }

    /// Evenly distributed superposition `Σ|i⟩/√N`.
    pub fn uniform_state(num_qubits: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(StateVector {
            num_qubits,
            amplitudes: vec![amp; dim],
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// Squared Euclidean norm.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        check_same_dim(self, other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Returns the state divided by its norm. Fails for (near) zero vectors.
    pub fn normalized(&self) -> Result<StateVector> {
        let norm = self.norm();
        if norm < crate::duality::DEGENERATE_NORM {
            return Err(Error::DegenerateBranch { norm });
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            num_qubits: self.num_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// `self + other` (same register size).
    pub fn try_add(&self, other: &StateVector) -> Result<StateVector> {
        check_same_dim(self, other)?;
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Largest amplitude-wise deviation from `other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        check_same_dim(self, other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Born probabilities `|a_i|²` (not renormalized).
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `self ⊗ high`: `self` occupies the low qubits and `high` the qubits above it.
    pub fn tensor_high(&self, high: &StateVector) -> Result<StateVector> {
        let num_qubits = self.num_qubits + high.num_qubits;
        check_qubit_count(num_qubits)?;
        let mut amplitudes = Vec::with_capacity(1 << num_qubits);
        for h in &high.amplitudes {
            amplitudes.extend(self.amplitudes.iter().map(|l| l * h));
        }
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// The slice of amplitudes where the qubits above `num_low` equal `high`,
    /// returned as a `num_low`-qubit vector.
    pub fn high_block(&self, num_low: usize, high: usize) -> Result<StateVector> {
        if num_low > self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: num_low,
                num_qubits: self.num_qubits,
            });
        }
        let block = 1usize << num_low;
        let start = high * block;
        if start >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: high,
                num_qubits: self.num_qubits - num_low,
            });
        }
        Ok(StateVector {
            num_qubits: num_low,
            amplitudes: self.amplitudes[start..start + block].to_vec(),
        })
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "{:0width$b} {}",
                i,
                format_complex(*a),
                width = self.num_qubits.max(1)
            )?;
        }
        Ok(())
    }
}

/// Euclidean norm of a state.
pub fn norm(state: &StateVector) -> f64 {
    state.norm()
}

/// `⟨a|b⟩`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    a.inner_product(b)
}

fn check_qubit_count(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_QUBITS {
        Err(Error::TooManyQubits(num_qubits))
    } else {
        Ok(())
    }
}

fn check_same_dim(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.dim() != b.dim() {
        Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        })
    } else {
        Ok(())
    }
}

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<Complex64>,
}

impl Operator {
    /// Builds a `dim × dim` operator from row-major entries.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "operator dimension must be positive".into(),
            ));
        }
        if entries.len() != dim * dim {
            return Err(Error::NotSquare {
                rows: dim,
                cols: entries.len() / dim,
            });
        }
        if entries
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Operator { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        for row in &rows {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![ONE; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let dim = diag.len();
        let mut op = Self::zeros(dim);
        for (i, d) in diag.iter().enumerate() {
            op.entries[i * dim + i] = *d;
        }
        op
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        Self::new(2, vec![ZERO, -i, i, ZERO]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[ONE, -ONE])
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real_rows(&[&[h, h], &[h, -h]]).unwrap()
    }

    pub fn phase_s() -> Self {
        Self::diagonal(&[ONE, Complex64::i()])
    }

    pub fn phase_t() -> Self {
        Self::diagonal(&[ONE, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)])
    }

    /// CNOT with control on local bit 1 and target on local bit 0.
    pub fn cnot() -> Self {
        Self::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits the operator acts on, if its dimension is a power of two.
    pub fn num_qubits(&self) -> Option<usize> {
        self.dim
            .is_power_of_two()
            .then(|| self.dim.trailing_zeros() as usize)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Operator {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.entries[c * n + r] = self.entries[r * n + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Operator {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Operator {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise deviation. Panics on dimension mismatch.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim, "operator dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Matrix-vector product on a full register (dim must equal the state dim).
    pub fn apply_full(&self, state: &StateVector) -> Result<StateVector> {
        if self.dim != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                found: self.dim,
            });
        }
        let amplitudes = (0..self.dim)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(state.amplitudes())
                    .map(|(m, a)| m * a)
                    .sum()
            })
            .collect();
        Ok(StateVector {
            num_qubits: state.num_qubits,
            amplitudes,
        })
    }

    /// `self ⊗ other` where `other` acts on the low qubits.
    pub fn kron(&self, low: &Operator) -> Operator {
        let (a, b) = (self.dim, low.dim);
        let n = a * b;
        let mut out = Self::zeros(n);
        for ar in 0..a {
            for ac in 0..a {
                let x = self.get(ar, ac);
                for br in 0..b {
                    for bc in 0..b {
                        out.entries[(ar * b + br) * n + ac * b + bc] = x * low.get(br, bc);
                    }
                }
            }
        }
        out
    }

    /// Max-entry magnitude of `self† self − I`.
    pub fn unitarity_deviation(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Operator::identity(self.dim))
    }

    /// True iff `max |(U†U − I)_ij| ≤ tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Parses the matrix text format: the first non-blank line holds the
    /// dimension `d`, followed by `d` rows of `d` complex literals.
    pub fn from_text(text: &str) -> Result<Operator> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line_no, first) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty matrix file".into(),
        })?;
        let dim: usize = first.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("expected dimension, found `{first}`"),
        })?;
        if dim == 0 {
            return Err(Error::Parse {
                line: line_no,
                message: "dimension must be positive".into(),
            });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for _ in 0..dim {
            let (line_no, line) = lines.next().ok_or(Error::Parse {
                line: line_no,
                message: format!("expected {dim} rows"),
            })?;
            let row: Vec<&str> = line.split_whitespace().collect();
            if row.len() != dim {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {dim} entries, found {}", row.len()),
                });
            }
            for tok in row {
                entries.push(parse_complex(tok).ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("invalid complex literal `{tok}`"),
                })?);
            }
        }
        if let Some((line_no, extra)) = lines.next() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unexpected trailing content `{extra}`"),
            });
        }
        Operator::new(dim, entries)
    }

    /// Inverse of [`Operator::from_text`]; entries use shortest round-trip decimals.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.dim);
        for r in 0..self.dim {
            let row: Vec<String> = self.row(r).iter().map(|a| format_complex(*a)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let n = self.dim;
        let mut out = Operator::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.entries[r * n + c] += a * rhs.entries[k * n + c];
                }
            }
        }
        out
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Unitarity predicate, see [`Operator::is_unitary`].
pub fn is_unitary(op: &Operator, tol: f64) -> bool {
    op.is_unitary(tol)
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i` (decimal with optional exponent).
pub fn parse_complex(token: &str) -> Option<Complex64> {
    let s = token.trim();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return parse_real(s).map(|re| Complex64::new(re, 0.0));
    };
    // Split at the last sign that is not the leading sign or part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k])?, parse_imag(&body[k..])?),
        None => (0.0, parse_imag(body)?),
    };
    Some(Complex64::new(re, im))
}

fn parse_imag(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => parse_real(s),
    }
}

fn parse_real(s: &str) -> Option<f64> {
    // Reject spellings like "inf"/"nan" that f64::from_str would accept.
    if s.is_empty()
        || !s
            .bytes()
            .all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b))
    {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Formats `a+bi` / `a-bi` with shortest round-trip decimals.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        return format!("{}", z.re);
    }
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn validate_qubits(num_qubits: usize, qubits: &[usize]) -> Result<usize> {
    let mut mask = 0usize;
    for &q in qubits {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits,
            });
        }
        if mask & (1 << q) != 0 {
            return Err(Error::DuplicateQubit(q));
        }
        mask |= 1 << q;
    }
    Ok(mask)
}

/// Applies `op ⊗ I` to `state`, `op` acting on `targets` (`targets[0]` is the
/// operator's least-significant local bit). Any square operator of matching
/// size is accepted; the result is not renormalized.
pub fn apply_operator(
    state: &StateVector,
    op: &Operator,
    targets: &[usize],
) -> Result<StateVector> {
    apply_controlled(state, op, targets, &[], 0)
}

/// Applies `op` to `targets` on the subspace where `control` equals `control_value`.
pub fn controlled_apply(
    state: &StateVector,
    op: &Operator,
    targets: &[usize],
    control: usize,
    control_value: bool,
) -> Result<StateVector> {
    apply_controlled(state, op, targets, &[control], control_value as usize)
}

/// Multi-control form: `op` acts where the control qubits read `control_value`,
/// with `controls[k]` compared against bit `k` of `control_value`.
pub fn apply_controlled(
    state: &StateVector,
    op: &Operator,
    targets: &[usize],
    controls: &[usize],
    control_value: usize,
) -> Result<StateVector> {
    let n = state.num_qubits();
    if op.dim() != 1usize << targets.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 << targets.len(),
            found: op.dim(),
        });
    }
    let target_mask = validate_qubits(n, targets)?;
    let control_mask = validate_qubits(n, controls)?;
    if let Some(&c) = controls.iter().find(|&&c| target_mask & (1 << c) != 0) {
        return Err(Error::ControlTargetOverlap(c));
    }
    if controls.len() < usize::BITS as usize && control_value >> controls.len() != 0 {
        return Err(Error::InvalidArgument(format!(
            "control value {control_value} does not fit in {} control qubits",
            controls.len()
        )));
    }
    let control_pattern = controls
        .iter()
        .enumerate()
        .filter(|(k, _)| control_value >> k & 1 == 1)
        .fold(0usize, |acc, (_, &c)| acc | 1 << c);

    let sub = op.dim();
    let offsets: Vec<usize> = (0..sub)
        .map(|local| {
            targets
                .iter()
                .enumerate()
                .filter(|(b, _)| local >> b & 1 == 1)
                .fold(0usize, |acc, (_, &q)| acc | 1 << q)
        })
        .collect();

    let amps = state.amplitudes();
    let mut out = amps.to_vec();
    let mut gathered = vec![ZERO; sub];
    for base in 0..state.dim() {
        if base & target_mask != 0 || base & control_mask != control_pattern {
            continue;
        }
        for (g, off) in gathered.iter_mut().zip(&offsets) {
            *g = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            out[base | off] = op.row(r).iter().zip(&gathered).map(|(m, a)| m * a).sum();
        }
    }
    Ok(StateVector {
        num_qubits: n,
        amplitudes: out,
    })
}
