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

//! Operators as (positive multiples of) convex combinations of unitaries.
//!
//! Every finite matrix `A` is `α Σ pᵢUᵢ` for some `α ≥ 0`: [`lcu_decompose`]
//! builds a four-term witness from the Hermitian split `A = H₁ + iH₂`.
//! Normal matrices admit a two-term witness with commuting unitaries
//! ([`normal_decompose`]). A duality gate is unitary only when it is an
//! extreme point, i.e. all of its slit unitaries coincide
//! ([`classify_duality_gate`]).

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::duality::{DualityGate, SlitWeights};
use crate::error::{Error, Result};
use crate::statevec::{Operator, DEFAULT_UNITARY_TOL};

/// Reconstruction tolerance promised by the decompositions.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Default tolerance for [`check_normal`].
pub const DEFAULT_NORMAL_TOL: f64 = 1e-10;

/// `α Σ pᵢUᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LcuDecomposition {
    pub alpha: f64,
    pub weights: SlitWeights,
    pub unitaries: Vec<Operator>,
    /// Max-entry residual against the source operator, measured at creation.
    pub residual: f64,
}

impl LcuDecomposition {
    /// `α Σ pᵢUᵢ`.
    pub fn reconstruct(&self) -> Operator {
        let dim = self.unitaries[0].dim();
        let sum = self
            .weights
            .as_slice()
            .iter()
            .zip(&self.unitaries)
            .fold(Operator::zeros(dim), |acc, (p, u)| &acc + &u.scale_real(*p));
        sum.scale_real(self.alpha)
    }

    /// The duality gate `Σ pᵢUᵢ` (the cone generator scaled by `α`).
    pub fn duality_gate(&self) -> Result<DualityGate> {
        DualityGate::new(self.weights.clone(), self.unitaries.clone())
    }

    fn finish(mut self, source: &Operator) -> Self {
        self.residual = self.reconstruct().max_abs_diff(source);
        self
    }
}

/// Classification of a duality gate by its assembled operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateClass {
    /// `Σ pᵢUᵢ` is unitary: an extreme point of the set of duality gates.
    Unitary,
    /// Norm-contracting on some input.
    StrictlyContractive,
}

fn to_dmatrix(op: &Operator) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(op.dim(), op.dim(), op.entries())
}

fn from_dmatrix(m: &DMatrix<Complex64>) -> Operator {
    let dim = m.nrows();
    let entries = (0..dim)
        .flat_map(|r| (0..dim).map(move |c| (r, c)))
        .map(|(r, c)| m[(r, c)])
        .collect();
    Operator::new(dim, entries).expect("decomposition produced non-finite entries")
}

/// `Q diag(d) Q†`.
fn conjugate_diagonal(q: &DMatrix<Complex64>, diag: &[Complex64]) -> Operator {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag));
    from_dmatrix(&(q * d * q.adjoint()))
}

/// True iff `max |(AA† − A†A)_ij| ≤ tol · max(1, max|A_ij|)`.
pub fn check_normal(a: &Operator, tol: f64) -> bool {
    normal_defect(a) <= tol * a.max_abs().max(1.0)
}

fn normal_defect(a: &Operator) -> f64 {
    let adj = a.adjoint();
    (a * &adj).max_abs_diff(&(&adj * a))
}

/// Unitary `V` with `(V + V†)/2 = h` for Hermitian `h` with spectrum in
/// `[-1, 1]`: `V = h + i√(I − h²)` evaluated in the eigenbasis.
fn hermitian_to_unitary(h: &Operator) -> Operator {
    let eig = SymmetricEigen::new(to_dmatrix(h));
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&x| {
            let x = x.clamp(-1.0, 1.0);
            Complex64::new(x, (1.0 - x * x).max(0.0).sqrt())
        })
        .collect();
    conjugate_diagonal(&eig.eigenvectors, &phases)
}

fn spectral_norm_hermitian(h: &Operator) -> f64 {
    SymmetricEigen::new(to_dmatrix(h))
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
}

/// Four-unitary decomposition `A = α·¼(V₁ + V₁† + iV₂ + iV₂†)`, where
/// `Hₖ/s = (Vₖ + Vₖ†)/2` for the Hermitian parts `H₁ = (A + A†)/2`,
/// `H₂ = (A − A†)/2i` and `s = max(‖H₁‖, ‖H₂‖)`, `α = 2s`.
pub fn lcu_decompose(a: &Operator) -> LcuDecomposition {
    let dim = a.dim();
    let weights = SlitWeights::uniform(4).expect("four equal weights are valid");
    let adj = a.adjoint();
    let h1 = (a + &adj).scale_real(0.5);
    let h2 = (a - &adj).scale(Complex64::new(0.0, -0.5));
    let s = spectral_norm_hermitian(&h1).max(spectral_norm_hermitian(&h2));
    if s == 0.0 {
        return LcuDecomposition {
            alpha: 0.0,
            weights,
            unitaries: vec![Operator::identity(dim); 4],
            residual: 0.0,
        }
        .finish(a);
    }
    let v1 = hermitian_to_unitary(&h1.scale_real(1.0 / s));
    let v2 = hermitian_to_unitary(&h2.scale_real(1.0 / s));
    let i = Complex64::i();
    let (v1_adj, v2_adj) = (v1.adjoint(), v2.adjoint());
    let unitaries = vec![v1, v1_adj, v2.scale(i), v2_adj.scale(i)];
    LcuDecomposition {
        alpha: 2.0 * s,
        weights,
        unitaries,
        residual: 0.0,
    }
    .finish(a)
}

/// Two commuting unitaries with `A = α(U₁ + U₂)/2`, for normal `A`.
///
/// With `A = QΛQ†` and `α = max|λ|`, each eigenvalue splits as
/// `λ/α = (e^{iφ₁} + e^{iφ₂})/2`, `φ₁,₂ = arg λ ± arccos(|λ|/α)`.
pub fn normal_decompose(a: &Operator, tol: f64) -> Result<LcuDecomposition> {
    if !check_normal(a, tol) {
        return Err(Error::NotNormal {
            commutator: normal_defect(a),
        });
    }
    let dim = a.dim();
    let weights = SlitWeights::uniform(2).expect("two equal weights are valid");
    // Schur form of a normal matrix is diagonal up to rounding.
    let (q, t) = Schur::new(to_dmatrix(a)).unpack();
    let lambdas: Vec<Complex64> = (0..dim).map(|k| t[(k, k)]).collect();
    let alpha = lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max);
    if alpha == 0.0 {
        return Ok(LcuDecomposition {
            alpha: 0.0,
            weights,
            unitaries: vec![Operator::identity(dim); 2],
            residual: 0.0,
        }
        .finish(a));
    }
    let (plus, minus): (Vec<Complex64>, Vec<Complex64>) = lambdas
        .iter()
        .map(|l| {
            let spread = (l.norm() / alpha).clamp(0.0, 1.0).acos();
            let arg = l.arg();
            (
                Complex64::from_polar(1.0, arg + spread),
                Complex64::from_polar(1.0, arg - spread),
            )
        })
        .unzip();
    Ok(LcuDecomposition {
        alpha,
        weights,
        unitaries: vec![
            conjugate_diagonal(&q, &plus),
            conjugate_diagonal(&q, &minus),
        ],
        residual: 0.0,
    }
    .finish(a))
}

/// Unitary iff the assembled `Σ pᵢUᵢ` passes the unitarity check at `tol`.
pub fn classify_duality_gate(gate: &DualityGate, tol: f64) -> GateClass {
    if gate.operator().is_unitary(tol) {
        GateClass::Unitary
    } else {
        GateClass::StrictlyContractive
    }
}

/// [`classify_duality_gate`] at the default unitarity tolerance.
pub fn classify_duality_gate_default(gate: &DualityGate) -> GateClass {
    classify_duality_gate(gate, DEFAULT_UNITARY_TOL)
}
