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

//! Duality-mode database search and its amplitude-amplification hybrid.
//!
//! One duality step runs the two-slit gate `(D + I)/2`, where the slit oracle
//! `D` is `+1` on marked items and `−1` elsewhere. On a uniform input the
//! unmarked amplitudes cancel in the auxiliary = 0 block, so a hit always
//! reads a marked index and happens with probability `M/N`. Running `j`
//! Grover iterations first raises that to `sin²((2j+1)β)`, `β = arcsin √(M/N)`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::duality::{
    build_dilation, conditional_measure, DilationCircuit, DualityGate, MeasurementOutcome,
};
use crate::error::{Error, Result};
use crate::random::trial_rng;
use crate::recycling::MAX_CYCLES_CAP;
use crate::statevec::{Operator, StateVector, MAX_QUBITS};

/// Unsorted database of `N = 2ⁿ` items with a set of marked indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchProblem {
    n: usize,
    marked: Vec<usize>,
}

impl SearchProblem {
    pub fn new(n: usize, mut marked: Vec<usize>) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let size = 1usize << n;
        marked.sort_unstable();
        if marked.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidProblem(
                "marked indices must be distinct".into(),
            ));
        }
        if let Some(&bad) = marked.iter().find(|&&i| i >= size) {
            return Err(Error::InvalidProblem(format!(
                "marked index {bad} outside database of size {size}"
            )));
        }
        if marked.is_empty() || marked.len() >= size {
            return Err(Error::InvalidProblem(format!(
                "need 1 ≤ marked < {size}, got {}",
                marked.len()
            )));
        }
        Ok(SearchProblem { n, marked })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// `N`.
    pub fn size(&self) -> usize {
        1 << self.n
    }

    /// Marked indices, ascending.
    pub fn marked(&self) -> &[usize] {
        &self.marked
    }

    pub fn num_marked(&self) -> usize {
        self.marked.len()
    }

    pub fn is_marked(&self, index: usize) -> bool {
        self.marked.binary_search(&index).is_ok()
    }

    /// `β = arcsin √(M/N)`.
    pub fn beta(&self) -> f64 {
        amplification_angle(self.size(), self.num_marked())
    }

    /// Per-attempt hit probability after `j` Grover iterations.
    pub fn success_probability(&self, j: usize) -> f64 {
        hybrid_success_probability(self.beta(), j)
    }
}

fn amplification_angle(size: usize, marked: usize) -> f64 {
    (marked as f64 / size as f64).sqrt().asin()
}

fn hybrid_success_probability(beta: f64, j: usize) -> f64 {
    ((2 * j + 1) as f64 * beta).sin().powi(2)
}

fn signed_diagonal(problem: &SearchProblem, marked_sign: f64) -> Operator {
    let diag: Vec<Complex64> = (0..problem.size())
        .map(|i| {
            let s = if problem.is_marked(i) {
                marked_sign
            } else {
                -marked_sign
            };
            Complex64::new(s, 0.0)
        })
        .collect();
    Operator::diagonal(&diag)
}

/// Slit oracle of the duality step: `+1` on marked items, `−1` elsewhere.
pub fn oracle_unitary(problem: &SearchProblem) -> Operator {
    signed_diagonal(problem, 1.0)
}

/// Standard Grover phase oracle: `−1` on marked items, `+1` elsewhere.
pub fn phase_oracle(problem: &SearchProblem) -> Operator {
    signed_diagonal(problem, -1.0)
}

/// Diffusion `2|s⟩⟨s| − I` over `n` qubits as a dense operator.
pub fn diffusion_operator(n: usize) -> Operator {
    let dim = 1usize << n;
    let two_over_n = 2.0 / dim as f64;
    let mut op = Operator::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            let delta = if r == c { 1.0 } else { 0.0 };
            op.set(r, c, Complex64::new(two_over_n - delta, 0.0));
        }
    }
    op
}

/// In-place diffusion `a ↦ 2⟨a⟩ − a`.
pub fn apply_diffusion(amplitudes: &mut [Complex64]) {
    let mean: Complex64 = amplitudes.iter().sum::<Complex64>() / amplitudes.len() as f64;
    for a in amplitudes.iter_mut() {
        *a = 2.0 * mean - *a;
    }
}

/// In-place phase flip of the given indices.
pub fn apply_phase_flip(amplitudes: &mut [Complex64], marked: &[usize]) {
    for &i in marked {
        amplitudes[i] = -amplitudes[i];
    }
}

/// `iterations` rounds of diffusion ∘ phase oracle. Starting from the
/// uniform state, the marked subspace carries amplitude `sin((2j+1)β)`.
pub fn grover_iterate(
    state: &StateVector,
    problem: &SearchProblem,
    iterations: usize,
) -> Result<StateVector> {
    if state.dim() != problem.size() {
        return Err(Error::DimensionMismatch {
            expected: problem.size(),
            found: state.dim(),
        });
    }
    let mut amps = state.amplitudes().to_vec();
    for _ in 0..iterations {
        apply_phase_flip(&mut amps, problem.marked());
        apply_diffusion(&mut amps);
    }
    StateVector::from_amplitudes(amps)
}

/// The symmetric two-slit gate `{½·oracle, ½·I}`.
pub fn search_gate(problem: &SearchProblem) -> DualityGate {
    DualityGate::symmetric(oracle_unitary(problem), Operator::identity(problem.size()))
        .expect("diagonal ±1 oracle is unitary")
}

/// Dilation circuit of [`search_gate`], built once and reused across attempts.
#[derive(Clone, Debug)]
pub struct DualitySearch {
    problem: SearchProblem,
    circuit: DilationCircuit,
}

impl DualitySearch {
    pub fn new(problem: SearchProblem) -> Self {
        let circuit = build_dilation(&search_gate(&problem));
        DualitySearch { problem, circuit }
    }

    pub fn problem(&self) -> &SearchProblem {
        &self.problem
    }

    pub fn circuit(&self) -> &DilationCircuit {
        &self.circuit
    }

    /// One duality step: dilation followed by conditional measurement.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &StateVector,
        rng: &mut R,
    ) -> Result<MeasurementOutcome> {
        let full = crate::duality::run_dilation(state, &self.circuit)?;
        conditional_measure(&full, self.problem.num_qubits(), rng)
    }
}

/// Switches `state` into duality mode, applies the slit oracle to the upper
/// slit and measures the auxiliary qubit.
pub fn duality_search_step<R: Rng + ?Sized>(
    state: &StateVector,
    problem: &SearchProblem,
    rng: &mut R,
) -> Result<MeasurementOutcome> {
    DualitySearch::new(problem.clone()).step(state, rng)
}

/// Outcome of one hybrid search (several attempts until a hit).
#[derive(Clone, Debug, PartialEq)]
pub struct HybridResult {
    /// Attempts made (each a fresh preparation + one duality step).
    pub repetitions: usize,
    /// Marked index read on the successful attempt, `None` if the budget ran out.
    pub hit_index: Option<usize>,
    /// Oracle calls spent inside Grover iterations (`j` per attempt).
    pub grover_oracle_calls: usize,
    /// Oracle calls spent in duality steps (one per attempt).
    pub duality_oracle_calls: usize,
    pub analytic_success_prob: f64,
}

impl HybridResult {
    pub fn is_hit(&self) -> bool {
        self.hit_index.is_some()
    }
}

/// Prepare uniform, run `j` Grover iterations, take one duality step; repeat
/// with fresh preparation until a hit or `max_repetitions` attempts.
pub fn hybrid_search<R: Rng + ?Sized>(
    problem: &SearchProblem,
    j: usize,
    max_repetitions: usize,
    rng: &mut R,
) -> Result<HybridResult> {
    hybrid_search_with(
        &DualitySearch::new(problem.clone()),
        j,
        max_repetitions,
        rng,
    )
}

fn hybrid_search_with<R: Rng + ?Sized>(
    search: &DualitySearch,
    j: usize,
    max_repetitions: usize,
    rng: &mut R,
) -> Result<HybridResult> {
    if max_repetitions == 0 {
        return Err(Error::InvalidArgument(
            "max_repetitions must be at least 1".into(),
        ));
    }
    let problem = search.problem();
    // Every attempt prepares the same state, so it is computed once.
    let prepared = grover_iterate(
        &StateVector::uniform_state(problem.num_qubits())?,
        problem,
        j,
    )?;
    let mut hit_index = None;
    let mut repetitions = 0;
    while repetitions < max_repetitions {
        repetitions += 1;
        if let Some(index) = search.step(&prepared, rng)?.sampled_index() {
            hit_index = Some(index);
            break;
        }
    }
    Ok(HybridResult {
        repetitions,
        hit_index,
        grover_oracle_calls: j * repetitions,
        duality_oracle_calls: repetitions,
        analytic_success_prob: problem.success_probability(j),
    })
}

/// One row of the repetition curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub j: usize,
    pub success_prob: f64,
    /// Expected attempts under fresh re-preparation, `1/success_prob`.
    pub repetitions: f64,
}

/// `sin²((2j+1)β)` and its reciprocal for `j = 0..=j_max`.
pub fn repetition_curve(size: usize, marked: usize, j_max: usize) -> Result<Vec<CurveRow>> {
    if !size.is_power_of_two() || size < 2 {
        return Err(Error::InvalidProblem(format!(
            "database size {size} is not a power of two ≥ 2"
        )));
    }
    if marked == 0 || marked >= size {
        return Err(Error::InvalidProblem(format!(
            "need 1 ≤ marked < {size}, got {marked}"
        )));
    }
    let beta = amplification_angle(size, marked);
    Ok((0..=j_max)
        .map(|j| {
            let success_prob = hybrid_success_probability(beta, j);
            CurveRow {
                j,
                success_prob,
                repetitions: 1.0 / success_prob,
            }
        })
        .collect())
}

/// Per-trial record of a search experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: usize,
    pub repetitions: usize,
    pub hit_index: Option<usize>,
}

/// Aggregate of [`run_search_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct SearchStats {
    pub trials: usize,
    pub hits: usize,
    pub total_repetitions: usize,
    /// `hits / trials`.
    pub empirical_success_rate: f64,
    /// Analytic per-attempt hit probability `sin²((2j+1)β)`.
    pub analytic_success_prob: f64,
    pub records: Vec<TrialRecord>,
}

impl SearchStats {
    /// Hits per attempt, the empirical counterpart of `analytic_success_prob`.
    pub fn per_attempt_success_rate(&self) -> f64 {
        self.hits as f64 / self.total_repetitions as f64
    }

    pub fn mean_repetitions(&self) -> f64 {
        self.total_repetitions as f64 / self.trials as f64
    }
}

/// Runs `trials` independent hybrid searches. Trial `t` draws from
/// [`trial_rng`]`(seed, t)`; trials run in parallel and the result is
/// identical to a sequential run.
pub fn run_search_experiment(
    problem: &SearchProblem,
    j: usize,
    trials: usize,
    max_repetitions: Option<usize>,
    seed: u64,
) -> Result<SearchStats> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let analytic_success_prob = problem.success_probability(j);
    let budget = max_repetitions
        .unwrap_or_else(|| crate::recycling::default_max_cycles(analytic_success_prob));
    let budget = budget.min(MAX_CYCLES_CAP);
    let search = DualitySearch::new(problem.clone());
    let records = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let r = hybrid_search_with(&search, j, budget, &mut rng)?;
            Ok(TrialRecord {
                trial: t,
                repetitions: r.repetitions,
                hit_index: r.hit_index,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let hits = records.iter().filter(|r| r.hit_index.is_some()).count();
    let total_repetitions = records.iter().map(|r| r.repetitions).sum();
    Ok(SearchStats {
        trials,
        hits,
        total_repetitions,
        empirical_success_rate: hits as f64 / trials as f64,
        analytic_success_prob,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{aux_zero_block, hit_probability, run_dilation};
    use crate::random::random_state;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn problem_validation() {
        assert!(SearchProblem::new(2, vec![2]).is_ok());
        assert!(SearchProblem::new(2, vec![]).is_err());
        assert!(SearchProblem::new(2, vec![4]).is_err());
        assert!(SearchProblem::new(2, vec![1, 1]).is_err());
        assert!(SearchProblem::new(1, vec![0, 1]).is_err());
        let p = SearchProblem::new(3, vec![5, 1]).unwrap();
        assert_eq!(p.marked(), &[1, 5]);
        assert!((p.beta() - (0.25f64).sqrt().asin()).abs() < 1e-15);
    }

    #[test]
    fn oracle_examples() {
        let p = SearchProblem::new(1, vec![1]).unwrap();
        assert_eq!(oracle_unitary(&p), Operator::diagonal(&[c(-1.0), c(1.0)]));
        let p = SearchProblem::new(2, vec![2]).unwrap();
        assert_eq!(
            oracle_unitary(&p),
            Operator::diagonal(&[c(-1.0), c(-1.0), c(1.0), c(-1.0)])
        );
        assert_eq!(phase_oracle(&p), oracle_unitary(&p).scale_real(-1.0));
        let p = SearchProblem::new(4, vec![0, 9, 13]).unwrap();
        let d = oracle_unitary(&p);
        assert!(d.is_unitary(1e-15));
        assert_eq!(&d * &d, Operator::identity(16));
    }

    #[test]
    fn diffusion_matches_dense_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random_state(3, &mut rng);
        let dense = diffusion_operator(3).apply_full(&psi).unwrap();
        let mut amps = psi.amplitudes().to_vec();
        apply_diffusion(&mut amps);
        let fast = StateVector::from_amplitudes(amps).unwrap();
        assert!(fast.max_abs_diff(&dense).unwrap() < 1e-15);
        assert!(diffusion_operator(3).is_unitary(1e-14));
    }

    #[test]
    fn duality_step_examples() {
        let p = SearchProblem::new(2, vec![3]).unwrap();
        let uniform = StateVector::uniform_state(2).unwrap();
        let search = DualitySearch::new(p.clone());
        let full = run_dilation(&uniform, search.circuit()).unwrap();
        assert!((hit_probability(&full, 2).unwrap() - 0.25).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut saw_miss = false;
        for _ in 0..200 {
            match duality_search_step(&uniform, &p, &mut rng).unwrap() {
                MeasurementOutcome::Hit {
                    sampled_index,
                    post_state,
                } => {
                    assert_eq!(sampled_index, 3);
                    assert!(
                        post_state
                            .max_abs_diff(&StateVector::basis_state(2, 3).unwrap())
                            .unwrap()
                            < 1e-15
                    );
                }
                MeasurementOutcome::Miss { post_state } => {
                    saw_miss = true;
                    // −Σ_{i≠τ}|i⟩/√3 on aux = 1; the sign is (D − I)/2 = −1 off τ.
                    let work = post_state.high_block(2, 1).unwrap();
                    let s = -1.0 / 3f64.sqrt();
                    let expected = StateVector::from_real(&[s, s, s, 0.0]).unwrap();
                    assert!(work.max_abs_diff(&expected).unwrap() < 1e-14);
                    assert_eq!(post_state.high_block(2, 0).unwrap().norm(), 0.0);
                }
            }
        }
        assert!(saw_miss);

        let tau = StateVector::basis_state(2, 3).unwrap();
        for _ in 0..50 {
            assert_eq!(
                duality_search_step(&tau, &p, &mut rng)
                    .unwrap()
                    .sampled_index(),
                Some(3)
            );
        }
    }

    #[test]
    fn grover_examples() {
        let p = SearchProblem::new(2, vec![1]).unwrap();
        let uniform = StateVector::uniform_state(2).unwrap();
        assert_eq!(grover_iterate(&uniform, &p, 0).unwrap(), uniform);
        let out = grover_iterate(&uniform, &p, 1).unwrap();
        assert!(
            out.max_abs_diff(&StateVector::basis_state(2, 1).unwrap())
                .unwrap()
                < 1e-15
        );

        // sin(51·arcsin(1/32)) ≈ 0.99969
        let p = SearchProblem::new(10, vec![700]).unwrap();
        let out = grover_iterate(&StateVector::uniform_state(10).unwrap(), &p, 25).unwrap();
        let expected = (51.0 * (1.0f64 / 32.0).asin()).sin();
        assert!((out.amplitude(700).re - expected).abs() < 1e-10);
        assert!((out.amplitude(700).re - 0.99969).abs() < 1e-4);

        assert!(grover_iterate(&uniform, &SearchProblem::new(3, vec![1]).unwrap(), 1).is_err());
    }

    #[test]
    fn grover_matches_closed_form() {
        for n in [2usize, 4, 6, 10] {
            for marked in [vec![1usize], vec![0, 3]] {
                let p = SearchProblem::new(n, marked).unwrap();
                let m = p.num_marked() as f64;
                let big_n = p.size() as f64;
                let mut state = StateVector::uniform_state(n).unwrap();
                for j in 0..=40 {
                    let angle = (2 * j + 1) as f64 * p.beta();
                    let marked_amp: Complex64 = p
                        .marked()
                        .iter()
                        .map(|&i| state.amplitude(i))
                        .sum::<Complex64>()
                        / m.sqrt();
                    assert!((marked_amp - c(angle.sin())).norm() <= 1e-10, "n={n} j={j}");
                    let unmarked = c(angle.cos() / (big_n - m).sqrt());
                    for i in (0..p.size()).filter(|i| !p.is_marked(*i)) {
                        assert!((state.amplitude(i) - unmarked).norm() <= 1e-10);
                    }
                    state = grover_iterate(&state, &p, 1).unwrap();
                }
            }
        }
    }

    #[test]
    fn hybrid_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = SearchProblem::new(2, vec![2]).unwrap();
        for _ in 0..100 {
            let r = hybrid_search(&p, 1, 10, &mut rng).unwrap();
            assert_eq!(r.repetitions, 1);
            assert_eq!(r.hit_index, Some(2));
            assert_eq!(r.grover_oracle_calls, 1);
            assert!((r.analytic_success_prob - 1.0).abs() < 1e-15);
        }

        let p = SearchProblem::new(4, vec![7]).unwrap();
        assert!((p.success_probability(0) - 1.0 / 16.0).abs() < 1e-15);
        let p = SearchProblem::new(10, vec![7]).unwrap();
        assert!((1.0 / p.success_probability(0) - 1024.0).abs() < 1e-9);

        // A budget of one attempt stops after one attempt, hit or not.
        let p = SearchProblem::new(6, vec![5]).unwrap();
        let r = hybrid_search(&p, 0, 1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(r.repetitions, 1);
        assert!(hybrid_search(&p, 0, 0, &mut rng).is_err());
    }

    #[test]
    fn curve_examples() {
        let rows = repetition_curve(1024, 1, 30).unwrap();
        assert!((rows[0].repetitions - 1024.0).abs() < 1e-9);
        for row in &rows[..=3] {
            let ratio = row.repetitions * ((2 * row.j + 1) as f64).powi(2) / 1024.0;
            assert!((ratio - 1.0).abs() <= 0.02, "j={} ratio={ratio}", row.j);
        }
        assert!((rows[25].repetitions - 1.0006).abs() < 1e-4);
        assert!(repetition_curve(1000, 1, 3).is_err());
        assert!(repetition_curve(16, 16, 3).is_err());
        assert!(repetition_curve(16, 0, 3).is_err());
    }

    #[test]
    fn curve_decreases_until_first_peak() {
        for (size, marked) in [(16usize, 1usize), (64, 3), (1024, 1), (4096, 5)] {
            let rows = repetition_curve(size, marked, 200).unwrap();
            let beta = amplification_angle(size, marked);
            let over = rows
                .iter()
                .position(|r| (2 * r.j + 1) as f64 * beta >= std::f64::consts::FRAC_PI_2)
                .unwrap();
            // First discrete maximum of sin²((2j+1)β): `over` or its predecessor.
            let peak = if over > 0 && rows[over - 1].success_prob > rows[over].success_prob {
                over - 1
            } else {
                over
            };
            for w in rows[..=peak].windows(2) {
                assert!(w[1].repetitions < w[0].repetitions);
            }
        }
    }

    #[test]
    fn experiment_examples() {
        let p = SearchProblem::new(2, vec![1]).unwrap();
        let stats = run_search_experiment(&p, 1, 1000, None, 5).unwrap();
        assert_eq!(stats.hits, 1000);
        assert_eq!(stats.empirical_success_rate, 1.0);
        assert_eq!(stats.total_repetitions, 1000);

        let p = SearchProblem::new(4, vec![9]).unwrap();
        let stats = run_search_experiment(&p, 0, 20_000, None, 6).unwrap();
        let attempts = stats.total_repetitions as f64;
        let sigma = (attempts * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
        assert!((stats.hits as f64 - attempts / 16.0).abs() <= 4.0 * sigma);
        assert!(stats
            .records
            .iter()
            .all(|r| r.hit_index.is_none_or(|i| i == 9)));

        let one = run_search_experiment(&p, 0, 1, None, 11).unwrap();
        assert_eq!(one.records.len(), 1);
        assert_eq!(one, run_search_experiment(&p, 0, 1, None, 11).unwrap());
        assert!(run_search_experiment(&p, 0, 0, None, 11).is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        let p = SearchProblem::new(3, vec![2, 6]).unwrap();
        let stats = run_search_experiment(&p, 0, 500, None, 99).unwrap();
        let search = DualitySearch::new(p.clone());
        let budget = crate::recycling::default_max_cycles(p.success_probability(0));
        for (t, rec) in stats.records.iter().enumerate() {
            let r = hybrid_search_with(&search, 0, budget, &mut trial_rng(99, t as u64)).unwrap();
            assert_eq!(rec.repetitions, r.repetitions);
            assert_eq!(rec.hit_index, r.hit_index);
        }
    }

    #[test]
    fn arbitrary_database_hit_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=6 {
            let p = SearchProblem::new(n, vec![0]).unwrap();
            let search = DualitySearch::new(p.clone());
            let half = (&oracle_unitary(&p) + &Operator::identity(p.size())).scale_real(0.5);
            for _ in 0..10 {
                let psi = random_state(n, &mut rng);
                let full = run_dilation(&psi, search.circuit()).unwrap();
                let direct = half.apply_full(&psi).unwrap().norm_sqr();
                assert!((hit_probability(&full, n).unwrap() - direct).abs() <= 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hits_read_marked_items(seed in any::<u64>(), n in 1usize..=8, j in 0usize..6, extra in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let size = 1usize << n;
            let mut marked = vec![rng.gen_range(0..size)];
            for _ in 0..extra.min(size - 2) {
                let k = rng.gen_range(0..size);
                if !marked.contains(&k) { marked.push(k); }
            }
            let p = SearchProblem::new(n, marked).unwrap();
            let search = DualitySearch::new(p.clone());
            let state = grover_iterate(&StateVector::uniform_state(n).unwrap(), &p, j).unwrap();
            let full = run_dilation(&state, search.circuit()).unwrap();
            let block = aux_zero_block(&full, n).unwrap();
            for i in (0..size).filter(|i| !p.is_marked(*i)) {
                prop_assert!(block.amplitude(i).norm() <= 1e-12);
            }
            let p0 = hit_probability(&full, n).unwrap();
            prop_assert!((p0 - p.success_probability(j)).abs() <= 1e-12);
            for _ in 0..8 {
                if let Some(i) = search.step(&state, &mut rng).unwrap().sampled_index() {
                    prop_assert!(p.is_marked(i));
                }
            }
        }
    }
}
