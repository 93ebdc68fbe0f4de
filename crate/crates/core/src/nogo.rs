//! Conservation audits, randomized no-go verifiers and the fully quantum
//! exchange witness.
//!
//! A trial in the decomposed-dynamics verifier passes when the audit lands
//! on [`Verdict::GlobalConservedLocalsFrozen`]. The trials are witnesses on
//! the linear CPTP subclass of the dynamics, not a proof over all of it.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{conserving_stochastic_map, random_stochastic_map, ClassicalDistribution, ClassicalObservable};
use crate::dynamics::{
    evolve_hamiltonian, run_trajectory, DecomposedStep, HybridHamiltonian, Schedule, Trajectory,
};
use crate::error::{Error, Result};
use crate::hybrid::{hybrid_expectation, product_state, ExpectationTriple, HybridBranch, HybridState};
use crate::linalg::{
    c64, matrix_commutator_norm, pauli, tensor_product, unitary_from_generator, ComplexMatrix,
    HermitianMatrix,
};
use crate::quantum::{
    conserving_channel, random_density_matrix, random_kraus_channel, KrausChannel, QuantumObservable,
};
use crate::rng::{self, trial_stream};

pub const TOL_GLOBAL: f64 = 1e-12;
pub const TOL_LOCAL: f64 = 1e-9;
/// Bound on `⟨O_C⟩` drift under a hybrid Hamiltonian.
pub const BACKREACTION_TOL: f64 = 1e-12;
/// Bound on `‖[O_C ⊗ I, H^k]‖_max`.
pub const COMMUTATOR_TOL: f64 = 1e-10;
/// Highest power of `H` in the commutator check.
pub const MAX_POWER: usize = 4;
/// Largest label count or quantum dimension accepted by the trial runners.
pub const TRIAL_DIM_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    GlobalConservedLocalsFrozen,
    GlobalConservedLocalsMoved,
    GlobalViolated,
}

impl Verdict {
    pub fn classify(global: f64, local_c: f64, local_q: f64, tol_global: f64, tol_local: f64) -> Self {
        if !(global <= tol_global) {
            Verdict::GlobalViolated
        } else if !(local_c <= tol_local && local_q <= tol_local) {
            Verdict::GlobalConservedLocalsMoved
        } else {
            Verdict::GlobalConservedLocalsFrozen
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::GlobalConservedLocalsFrozen => "GlobalConservedLocalsFrozen",
            Verdict::GlobalConservedLocalsMoved => "GlobalConservedLocalsMoved",
            Verdict::GlobalViolated => "GlobalViolated",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub slice: usize,
    pub t: f64,
    pub classical: f64,
    pub quantum: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConservationReport {
    pub slices: Vec<SliceRecord>,
    pub global_drift: f64,
    pub local_c_drift: f64,
    pub local_q_drift: f64,
    pub verdict: Verdict,
    pub tol_global: f64,
    pub tol_local: f64,
}

/// Audits a recorded trajectory against its first slice.
pub fn audit_conservation(traj: &Trajectory, tol_global: f64, tol_local: f64) -> Result<ConservationReport> {
    audit_records(&traj.times, &traj.records, tol_global, tol_local)
}

/// Same as [`audit_conservation`] on bare `(time, record)` series.
pub fn audit_records(
    times: &[f64],
    records: &[ExpectationTriple],
    tol_global: f64,
    tol_local: f64,
) -> Result<ConservationReport> {
    if records.len() < 2 {
        return Err(Error::domain(format!(
            "audit needs at least 2 slices, got {}",
            records.len()
        )));
    }
    if times.len() != records.len() {
        return Err(Error::shape("times and records differ in length"));
    }
    if !(tol_global >= 0.0 && tol_local >= 0.0) {
        return Err(Error::domain("tolerances must be non-negative"));
    }
    if records
        .iter()
        .any(|r| !(r.classical.is_finite() && r.quantum.is_finite() && r.total.is_finite()))
    {
        return Err(Error::NonFinite("trajectory records"));
    }
    let first = records[0];
    let (mut global, mut local_c, mut local_q) = (0.0f64, 0.0f64, 0.0f64);
    let mut slices = Vec::with_capacity(records.len());
    for (k, (r, &t)) in records.iter().zip(times).enumerate() {
        global = global.max((r.total - first.total).abs());
        local_c = local_c.max((r.classical - first.classical).abs());
        local_q = local_q.max((r.quantum - first.quantum).abs());
        slices.push(SliceRecord {
            slice: k,
            t,
            classical: r.classical,
            quantum: r.quantum,
            total: r.total,
        });
    }
    Ok(ConservationReport {
        slices,
        global_drift: global,
        local_c_drift: local_c,
        local_q_drift: local_q,
        verdict: Verdict::classify(global, local_c, local_q, tol_global, tol_local),
        tol_global,
        tol_local,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: u64,
    pub report: ConservationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub n_trials: u64,
    pub n_pass: u64,
    pub n_fail: u64,
    /// Trials that met the precondition of the check. Equal to `n_trials`
    /// except in the conditional-filter run.
    pub n_conditioned: u64,
    pub seed: u64,
    pub failures: Vec<TrialFailure>,
}

impl TrialSummary {
    fn collect(seed: u64, outcomes: Vec<(bool, bool, Option<ConservationReport>)>) -> Self {
        let n_trials = outcomes.len() as u64;
        let mut n_conditioned = 0;
        let mut failures = Vec::new();
        for (k, (conditioned, passed, report)) in outcomes.into_iter().enumerate() {
            n_conditioned += conditioned as u64;
            if !passed {
                failures.push(TrialFailure {
                    trial: k as u64,
                    report: report.expect("failed trials keep their report"),
                });
            }
        }
        let n_fail = failures.len() as u64;
        TrialSummary {
            n_trials,
            n_pass: n_trials - n_fail,
            n_fail,
            n_conditioned,
            seed,
            failures,
        }
    }
}

/// Integer-valued classical observable with values in `−2..=2`, so
/// degenerate labels are common.
pub fn random_classical_observable<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ClassicalObservable {
    ClassicalObservable::new((0..n).map(|_| rng.random_range(-2i32..=2) as f64).collect())
        .expect("finite values")
}

/// `W diag(v) W†` with Haar `W` and integer `v ∈ −2..=2`.
pub fn random_quantum_observable<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> QuantumObservable {
    let w = rng::haar_unitary(dim, rng);
    let diag: Vec<_> = (0..dim)
        .map(|_| c64(rng.random_range(-2i32..=2) as f64, 0.0))
        .collect();
    let m = &(&w * &ComplexMatrix::from_diagonal(&diag)) * &w.adjoint();
    QuantumObservable::new("O_Q", HermitianMatrix::symmetrized(m))
}

/// `(G + G†)/2` with Ginibre `G`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let g = ComplexMatrix::from_inner(rng::ginibre(dim, dim, rng));
    HermitianMatrix::symmetrized((&g + &g.adjoint()).scale_real(0.5))
}

pub fn random_hybrid_hamiltonian<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Result<HybridHamiltonian> {
    let energies = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let h_q = random_hermitian(dim, rng);
    let couplings = (0..n)
        .map(|_| (rng.random_range(-1.0..1.0), random_hermitian(dim, rng)))
        .collect();
    HybridHamiltonian::new(energies, h_q, couplings)
}

/// Hybrid state with up to `n` branches of random weights, distributions and states.
pub fn random_hybrid_state<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Result<HybridState> {
    let k = rng.random_range(1..=n.max(1));
    let weights = rng::dirichlet(k, rng);
    let branches = weights
        .into_iter()
        .map(|w| {
            HybridBranch::new(
                w,
                ClassicalDistribution::random(n, rng)?,
                random_density_matrix(dim, rng)?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    HybridState::new(branches)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Outcome {
    pub report: ConservationReport,
    /// `max_t |⟨O_C⟩_t − ⟨O_C⟩_0|`.
    pub classical_drift: f64,
    /// `‖[O_C ⊗ I, H^k]‖_max` for `k = 1..=MAX_POWER`.
    pub commutator_residuals: Vec<f64>,
    pub passed: bool,
}

/// Evolves `chi0` under `h` to every time in `times` (slice 0 is `t = 0`)
/// and checks that `⟨O_C⟩` never moves and that `O_C ⊗ I` commutes with
/// the powers of the assembled generator.
pub fn verify_theorem1(
    h: &HybridHamiltonian,
    o_c: &ClassicalObservable,
    o_q: &QuantumObservable,
    times: &[f64],
    chi0: &HybridState,
) -> Result<Theorem1Outcome> {
    if o_c.len() != h.n_labels() || o_q.dim() != h.quantum_dim() {
        return Err(Error::shape("observables do not match the Hamiltonian"));
    }
    let mut all_times = Vec::with_capacity(times.len() + 1);
    all_times.push(0.0);
    all_times.extend_from_slice(times);
    let mut records = Vec::with_capacity(all_times.len());
    records.push(hybrid_expectation(chi0, o_c, o_q)?);
    for &t in times {
        let chi = evolve_hamiltonian(chi0, h, t)?;
        records.push(hybrid_expectation(&chi, o_c, o_q)?);
    }
    let report = audit_records(&all_times, &records, TOL_GLOBAL, TOL_LOCAL)?;

    let full = h.block_matrix()?;
    let o_c_full = tensor_product(
        &ComplexMatrix::from_diagonal(&o_c.values().iter().map(|&v| c64(v, 0.0)).collect::<Vec<_>>()),
        &ComplexMatrix::identity(h.quantum_dim()),
    )?;
    let mut power = full.clone();
    let mut commutator_residuals = Vec::with_capacity(MAX_POWER);
    for k in 1..=MAX_POWER {
        if k > 1 {
            power = power.matmul(&full)?;
        }
        commutator_residuals.push(matrix_commutator_norm(&o_c_full, &power)?);
    }
    let classical_drift = report.local_c_drift;
    let passed = classical_drift <= BACKREACTION_TOL
        && commutator_residuals.iter().all(|&r| r <= COMMUTATOR_TOL);
    Ok(Theorem1Outcome {
        report,
        classical_drift,
        commutator_residuals,
        passed,
    })
}

/// Randomized Hamiltonian-formalism trials: label count in `1..=max_labels`,
/// quantum dimension in `1..=max_qdim`, `n_times` random times in `[0, 10]`.
pub fn verify_theorem1_trials(
    max_labels: usize,
    max_qdim: usize,
    n_times: usize,
    n_trials: u64,
    seed: u64,
) -> Result<TrialSummary> {
    check_trial_params(max_labels, max_qdim, n_times, n_trials)?;
    let outcomes = (0..n_trials)
        .into_par_iter()
        .map(|k| {
            let mut r = trial_stream(seed, k);
            let n = r.random_range(1..=max_labels);
            let d = r.random_range(1..=max_qdim);
            let h = random_hybrid_hamiltonian(n, d, &mut r)?;
            let o_c = random_classical_observable(n, &mut r);
            let o_q = random_quantum_observable(d, &mut r);
            let chi0 = random_hybrid_state(n, d, &mut r)?;
            let times: Vec<f64> = (0..n_times).map(|_| r.random_range(0.0..=10.0)).collect();
            let out = verify_theorem1(&h, &o_c, &o_q, &times, &chi0)?;
            Ok((true, out.passed, (!out.passed).then_some(out.report)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialSummary::collect(seed, outcomes))
}

/// Which dynamics the decomposed-dynamics trials draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialDynamics {
    /// Conserving `V` and conserving `Λ_j` at every slice.
    Conserving,
    /// Per trial, each half is independently conserving or unconstrained;
    /// only trials whose global drift stays within tolerance are checked.
    Unconstrained,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Params {
    pub max_labels: usize,
    pub max_qdim: usize,
    pub n_slices: usize,
    pub n_trials: u64,
    pub seed: u64,
    pub tol_global: f64,
    pub tol_local: f64,
    pub dynamics: TrialDynamics,
}

impl Theorem2Params {
    pub fn new(max_labels: usize, max_qdim: usize, n_slices: usize, n_trials: u64, seed: u64) -> Self {
        Self {
            max_labels,
            max_qdim,
            n_slices,
            n_trials,
            seed,
            tol_global: TOL_GLOBAL,
            tol_local: TOL_LOCAL,
            dynamics: TrialDynamics::Conserving,
        }
    }
}

fn check_trial_params(labels: usize, qdim: usize, slices: usize, trials: u64) -> Result<()> {
    if labels == 0 || qdim == 0 || slices == 0 || trials == 0 {
        return Err(Error::domain("labels, qdim, slices and trials must be positive"));
    }
    if labels > TRIAL_DIM_CAP || qdim > TRIAL_DIM_CAP {
        return Err(Error::Capacity {
            requested: labels.max(qdim),
            cap: TRIAL_DIM_CAP,
        });
    }
    Ok(())
}

/// Randomized decomposed-dynamics trials from uncorrelated initial states.
///
/// Each trial draws its label count and quantum dimension uniformly up to
/// the given maxima. Trials are independent and seeded per index, so the
/// summary does not depend on scheduling.
pub fn verify_theorem2_trials(params: &Theorem2Params) -> Result<TrialSummary> {
    check_trial_params(params.max_labels, params.max_qdim, params.n_slices, params.n_trials)?;
    if !(params.tol_global >= 0.0 && params.tol_local >= 0.0) {
        return Err(Error::domain("tolerances must be non-negative"));
    }
    let outcomes = (0..params.n_trials)
        .into_par_iter()
        .map(|k| theorem2_trial(params, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialSummary::collect(params.seed, outcomes))
}

fn theorem2_trial(p: &Theorem2Params, k: u64) -> Result<(bool, bool, Option<ConservationReport>)> {
    let mut r = trial_stream(p.seed, k);
    let n = r.random_range(1..=p.max_labels);
    let d = r.random_range(1..=p.max_qdim);
    let o_c = random_classical_observable(n, &mut r);
    let o_q = random_quantum_observable(d, &mut r);
    let chi0 = product_state(
        ClassicalDistribution::random(n, &mut r)?,
        random_density_matrix(d, &mut r)?,
    );
    let (free_v, free_lambda) = match p.dynamics {
        TrialDynamics::Conserving => (false, false),
        TrialDynamics::Unconstrained => (r.random_bool(0.5), r.random_bool(0.5)),
    };
    let mut steps = Vec::with_capacity(p.n_slices);
    for _ in 0..p.n_slices {
        let v = if free_v {
            random_stochastic_map(n, &mut r)?
        } else {
            conserving_stochastic_map(&o_c, &mut r)
        };
        let controls = (0..n)
            .map(|_| {
                if free_lambda {
                    let n_ops = r.random_range(1..=3);
                    random_kraus_channel(d, n_ops, &mut r)
                } else {
                    conserving_channel(&o_q, &mut r)
                }
            })
            .collect::<Result<Vec<KrausChannel>>>()?;
        steps.push(DecomposedStep::new(v, controls)?);
    }
    let traj = run_trajectory(&chi0, &Schedule::Decomposed(steps), &o_c, &o_q)?;
    let report = audit_conservation(&traj, p.tol_global, p.tol_local)?;
    let (conditioned, passed) = match p.dynamics {
        TrialDynamics::Conserving => (true, report.verdict == Verdict::GlobalConservedLocalsFrozen),
        TrialDynamics::Unconstrained => {
            let conditioned = report.verdict != Verdict::GlobalViolated;
            (conditioned, !conditioned || report.verdict == Verdict::GlobalConservedLocalsFrozen)
        }
    };
    Ok((conditioned, passed, (!passed).then_some(report)))
}

/// `σ₊⊗σ₋ + σ₋⊗σ₊` on two qubits.
pub fn exchange_hamiltonian() -> HermitianMatrix {
    let a = tensor_product(&pauli::raising(), &pauli::lowering()).expect("2x2 factors");
    let b = tensor_product(&pauli::lowering(), &pauli::raising()).expect("2x2 factors");
    HermitianMatrix::symmetrized(&a + &b)
}

/// `(⟨σz⊗I⟩, ⟨I⊗σz⟩)` from `|↑↓⟩` after time `t` under [`exchange_hamiltonian`].
pub fn exchange_expectations(t: f64) -> Result<(f64, f64)> {
    let u = unitary_from_generator(&exchange_hamiltonian(), t)?;
    let mut psi0 = vec![c64(0.0, 0.0); 4];
    psi0[1] = c64(1.0, 0.0);
    let psi = u.apply(&psi0);
    let eye = ComplexMatrix::identity(2);
    let o1 = tensor_product(pauli::z().matrix(), &eye)?;
    let o2 = tensor_product(&eye, pauli::z().matrix())?;
    Ok((o1.quadratic_form(&psi).re, o2.quadratic_form(&psi).re))
}

/// Exchange model sampled at `n_points` evenly spaced times in `[0, t]`.
///
/// The two subsystem observables fill the report's two local slots:
/// `classical` holds `⟨σz⊗I⟩`, `quantum` holds `⟨I⊗σz⟩`.
pub fn exchange_trajectory(t: f64, n_points: usize) -> Result<Trajectory> {
    if n_points < 2 || !t.is_finite() {
        return Err(Error::domain("need a finite end time and at least 2 points"));
    }
    let times: Vec<f64> = (0..n_points)
        .map(|k| t * k as f64 / (n_points - 1) as f64)
        .collect();
    let records = times
        .iter()
        .map(|&s| exchange_expectations(s).map(|(a, b)| ExpectationTriple::new(a, b)))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::from_records(times, records)
}

/// Default samples per exchange run.
pub const EXCHANGE_POINTS: usize = 51;

pub fn exchange_report(t: f64) -> Result<ConservationReport> {
    audit_conservation(&exchange_trajectory(t, EXCHANGE_POINTS)?, TOL_GLOBAL, TOL_LOCAL)
}

/// Two exchanging qubits run to `t = π/2`: the total is conserved while
/// each local expectation swings from `±1` to `∓1`.
pub fn quantum_exchange_counterexample() -> Result<ConservationReport> {
    exchange_report(FRAC_PI_2)
}
