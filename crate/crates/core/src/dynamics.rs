//! Evolution engines for hybrid states.
//!
//! Two engines act on [`HybridState`]:
//!
//! - the Hamiltonian engine for `H = H_C + H_Q + Σ_i γ_i |i⟩⟨i| ⊗ S_i`, which
//!   only ever uses the label-conditional blocks `ε_i + H_Q + γ_i S_i`;
//! - the decomposed engine, where one slice is a stochastic map `V` on the
//!   classical sector followed by one quantum channel `Λ_j` per classical
//!   label `j`.
//!
//! Trajectories from the decomposed engine are recorded at half steps: odd
//! slices sit after `V`, even slices after the controls.
//!
//! State-dependent maps are opaque closures over the full hybrid state. They
//! are evaluated once per step, on the state entering that step. Whether `V`
//! should see the quantum sector or only the classical marginal is left to
//! the closure.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::classical::{apply_stochastic, ClassicalDistribution, ClassicalObservable, StochasticMap};
use crate::error::{Error, Result};
use crate::hybrid::{canonicalize, hybrid_expectation, ExpectationTriple, HybridBranch, HybridState};
use crate::linalg::{
    c64, tensor_product, unitary_from_spectrum, ComplexMatrix, HermitianMatrix, Spectrum,
};
use crate::quantum::{apply_channel, DensityMatrix, KrausChannel, QuantumObservable};

/// `H_C + H_Q + Σ_i γ_i |i⟩⟨i| ⊗ S_i`, stored as its label-conditional blocks.
#[derive(Clone, Debug)]
pub struct HybridHamiltonian {
    classical_energies: Vec<f64>,
    h_q: HermitianMatrix,
    couplings: Vec<(f64, HermitianMatrix)>,
    block_spectra: OnceLock<Vec<Spectrum>>,
}

impl HybridHamiltonian {
    pub fn new(
        classical_energies: Vec<f64>,
        h_q: HermitianMatrix,
        couplings: Vec<(f64, HermitianMatrix)>,
    ) -> Result<Self> {
        if classical_energies.is_empty() {
            return Err(Error::domain("hybrid Hamiltonian needs at least one label"));
        }
        if couplings.len() != classical_energies.len() {
            return Err(Error::shape(format!(
                "{} couplings for {} labels",
                couplings.len(),
                classical_energies.len()
            )));
        }
        if couplings.iter().any(|(_, s)| s.dim() != h_q.dim()) {
            return Err(Error::shape("coupling operators must match H_Q's dimension"));
        }
        if classical_energies
            .iter()
            .chain(couplings.iter().map(|(g, _)| g))
            .any(|x| !x.is_finite())
        {
            return Err(Error::NonFinite("hybrid Hamiltonian"));
        }
        Ok(Self {
            classical_energies,
            h_q,
            couplings,
            block_spectra: OnceLock::new(),
        })
    }

    #[inline]
    pub fn n_labels(&self) -> usize {
        self.classical_energies.len()
    }

    #[inline]
    pub fn quantum_dim(&self) -> usize {
        self.h_q.dim()
    }

    pub fn classical_energies(&self) -> &[f64] {
        &self.classical_energies
    }

    pub fn h_q(&self) -> &HermitianMatrix {
        &self.h_q
    }

    pub fn couplings(&self) -> &[(f64, HermitianMatrix)] {
        &self.couplings
    }

    /// Block for label `i`: `ε_i·I + H_Q + γ_i S_i`.
    pub fn block(&self, i: usize) -> HermitianMatrix {
        let (gamma, s) = &self.couplings[i];
        let eps = HermitianMatrix::identity(self.quantum_dim());
        HermitianMatrix::linear_combination(&[
            (self.classical_energies[i], &eps),
            (1.0, &self.h_q),
            (*gamma, s),
        ])
        .expect("blocks share one dimension")
    }

    fn spectra(&self) -> &[Spectrum] {
        self.block_spectra
            .get_or_init(|| (0..self.n_labels()).map(|i| self.block(i).eigh()).collect())
    }

    /// The full operator on the label ⊗ quantum space, assembled from tensor
    /// products. Only the backreaction check uses this form.
    pub fn block_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.n_labels();
        let eye_q = ComplexMatrix::identity(self.quantum_dim());
        let h_c = HermitianMatrix::from_real_diagonal(&self.classical_energies);
        let mut total = tensor_product(h_c.matrix(), &eye_q)?;
        total = total.try_add(&tensor_product(&ComplexMatrix::identity(n), self.h_q.matrix())?)?;
        for (i, (gamma, s)) in self.couplings.iter().enumerate() {
            let mut proj = vec![0.0; n];
            proj[i] = 1.0;
            let p = HermitianMatrix::from_real_diagonal(&proj);
            total = total.try_add(&tensor_product(p.matrix(), &s.matrix().scale_real(*gamma))?)?;
        }
        Ok(total)
    }
}

/// One unitary per label, `U_i = exp(−i(ε_i + H_Q + γ_i S_i)t)`.
pub fn conditional_unitaries(h: &HybridHamiltonian, t: f64) -> Result<Vec<ComplexMatrix>> {
    if !t.is_finite() {
        return Err(Error::domain("evolution time must be finite"));
    }
    Ok(h.spectra().iter().map(|s| unitary_from_spectrum(s, t)).collect())
}

/// Evolves every branch under the label-conditional unitaries.
///
/// Branch `(q_i, p_i, ρ_i)` becomes the branches `(q_i p_ij, j, U_j ρ_i U_j†)`;
/// the classical marginal is never touched.
pub fn evolve_hamiltonian(chi: &HybridState, h: &HybridHamiltonian, t: f64) -> Result<HybridState> {
    check_hamiltonian_shape(chi, h)?;
    let unitaries = conditional_unitaries(h, t)?;
    split_over_labels(chi, |j, rho| rho.conjugate(&unitaries[j]))
}

fn check_hamiltonian_shape(chi: &HybridState, h: &HybridHamiltonian) -> Result<()> {
    if chi.n_labels() != h.n_labels() || chi.quantum_dim() != h.quantum_dim() {
        return Err(Error::shape(format!(
            "state ({} labels, dim {}) vs Hamiltonian ({} labels, dim {})",
            chi.n_labels(),
            chi.quantum_dim(),
            h.n_labels(),
            h.quantum_dim()
        )));
    }
    Ok(())
}

/// `Σ_{i,j} p_ij q_i State_j ⊕ f_j(ρ_i)`, canonicalized.
fn split_over_labels<F>(chi: &HybridState, mut f: F) -> Result<HybridState>
where
    F: FnMut(usize, &DensityMatrix) -> Result<DensityMatrix>,
{
    let n = chi.n_labels();
    let mut out = Vec::new();
    for b in chi.branches() {
        for (j, &p) in b.classical.probs().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            out.push(HybridBranch {
                weight: b.weight * p,
                classical: ClassicalDistribution::point(n, j)?,
                quantum: f(j, &b.quantum)?,
            });
        }
    }
    canonicalize(&HybridState::from_branches_unchecked(out))
}

pub type StochasticGenerator = dyn Fn(&HybridState) -> Result<StochasticMap> + Send + Sync;
pub type ControlGenerator = dyn Fn(&HybridState) -> Result<Vec<KrausChannel>> + Send + Sync;

/// Classical half of a slice.
#[derive(Clone)]
pub enum ClassicalUpdate {
    Fixed(StochasticMap),
    StateDependent(Arc<StochasticGenerator>),
}

/// Control half of a slice: one channel per classical label.
#[derive(Clone)]
pub enum ControlUpdate {
    Fixed(Vec<KrausChannel>),
    StateDependent(Arc<ControlGenerator>),
}

impl fmt::Debug for ClassicalUpdate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassicalUpdate::Fixed(v) => f.debug_tuple("Fixed").field(v).finish(),
            ClassicalUpdate::StateDependent(_) => f.write_str("StateDependent(..)"),
        }
    }
}

impl fmt::Debug for ControlUpdate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlUpdate::Fixed(c) => f.debug_tuple("Fixed").field(&c.len()).finish(),
            ControlUpdate::StateDependent(_) => f.write_str("StateDependent(..)"),
        }
    }
}

/// One slice of the decomposed dynamics: `V`, then `Λ_j` conditioned on label `j`.
#[derive(Clone, Debug)]
pub struct DecomposedStep {
    pub classical: ClassicalUpdate,
    pub controls: ControlUpdate,
}

impl DecomposedStep {
    pub fn new(v: StochasticMap, controls: Vec<KrausChannel>) -> Result<Self> {
        if controls.len() != v.size() {
            return Err(Error::shape(format!(
                "{} controls for {} labels",
                controls.len(),
                v.size()
            )));
        }
        if let Some(first) = controls.first() {
            if controls.iter().any(|c| c.dim() != first.dim()) {
                return Err(Error::shape("controls must act on one quantum dimension"));
            }
        }
        Ok(Self {
            classical: ClassicalUpdate::Fixed(v),
            controls: ControlUpdate::Fixed(controls),
        })
    }

    pub fn identity(n_labels: usize, q_dim: usize) -> Self {
        Self {
            classical: ClassicalUpdate::Fixed(StochasticMap::identity(n_labels)),
            controls: ControlUpdate::Fixed(vec![KrausChannel::identity(q_dim); n_labels]),
        }
    }

    pub fn state_dependent<V, C>(v: V, controls: C) -> Self
    where
        V: Fn(&HybridState) -> Result<StochasticMap> + Send + Sync + 'static,
        C: Fn(&HybridState) -> Result<Vec<KrausChannel>> + Send + Sync + 'static,
    {
        Self {
            classical: ClassicalUpdate::StateDependent(Arc::new(v)),
            controls: ControlUpdate::StateDependent(Arc::new(controls)),
        }
    }

    /// Concrete maps for this step, evaluated on `chi` and validated against it.
    fn resolve(&self, chi: &HybridState, step: usize) -> Result<(StochasticMap, Vec<KrausChannel>)> {
        let wrap = |e: Error| Error::GeneratedMap {
            step,
            source: Box::new(e),
        };
        let v = match &self.classical {
            ClassicalUpdate::Fixed(v) => v.clone(),
            ClassicalUpdate::StateDependent(g) => {
                let v = g(chi).map_err(wrap)?;
                // Re-validate: a generator may hand back a hand-built map.
                StochasticMap::new(v.size(), v.entries().to_vec()).map_err(wrap)?
            }
        };
        let controls = match &self.controls {
            ControlUpdate::Fixed(c) => c.clone(),
            ControlUpdate::StateDependent(g) => g(chi).map_err(wrap)?,
        };
        let n = chi.n_labels();
        if v.size() != n {
            return Err(wrap(Error::shape(format!(
                "stochastic map of size {} for {n} labels",
                v.size()
            ))));
        }
        if controls.len() != n {
            return Err(wrap(Error::invariant(format!(
                "{} controls for {n} labels",
                controls.len()
            ))));
        }
        if let Some(bad) = controls.iter().find(|c| c.dim() != chi.quantum_dim()) {
            return Err(wrap(Error::shape(format!(
                "control on dimension {} for quantum dimension {}",
                bad.dim(),
                chi.quantum_dim()
            ))));
        }
        Ok((v, controls))
    }
}

/// Applies `V` to every branch's classical distribution; quantum states untouched.
pub fn apply_classical_half(chi: &HybridState, v: &StochasticMap) -> Result<HybridState> {
    let branches = chi
        .branches()
        .iter()
        .map(|b| {
            Ok(HybridBranch {
                weight: b.weight,
                classical: apply_stochastic(v, &b.classical)?,
                quantum: b.quantum.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HybridState::from_branches_unchecked(branches))
}

/// Splits every branch over labels and applies `Λ_j` on label `j`.
pub fn apply_control_half(chi: &HybridState, controls: &[KrausChannel]) -> Result<HybridState> {
    if controls.len() != chi.n_labels() {
        return Err(Error::shape(format!(
            "{} controls for {} labels",
            controls.len(),
            chi.n_labels()
        )));
    }
    split_over_labels(chi, |j, rho| apply_channel(&controls[j], rho))
}

/// One full slice: `V` then the label-controlled channels.
pub fn apply_step(chi: &HybridState, step: &DecomposedStep) -> Result<HybridState> {
    let (v, controls) = step.resolve(chi, 0)?;
    apply_control_half(&apply_classical_half(chi, &v)?, &controls)
}

/// What produced a trajectory entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlicePhase {
    Initial,
    /// Odd slice: after the stochastic map.
    Classical,
    /// Even slice: after the controls.
    Control,
    /// After a Hamiltonian time step.
    Hamiltonian,
}

/// Evolution schedule for [`run_trajectory`].
#[derive(Clone, Debug)]
pub enum Schedule {
    Decomposed(Vec<DecomposedStep>),
    Hamiltonian {
        hamiltonian: HybridHamiltonian,
        dt: f64,
        n_steps: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub slices: Vec<usize>,
    pub times: Vec<f64>,
    pub phases: Vec<SlicePhase>,
    pub states: Vec<HybridState>,
    pub records: Vec<ExpectationTriple>,
}

impl Trajectory {
    fn start(chi0: &HybridState, record: ExpectationTriple) -> Self {
        Self {
            slices: vec![0],
            times: vec![0.0],
            phases: vec![SlicePhase::Initial],
            states: vec![chi0.clone()],
            records: vec![record],
        }
    }

    fn push(&mut self, t: f64, phase: SlicePhase, state: HybridState, record: ExpectationTriple) {
        self.slices.push(self.slices.len());
        self.times.push(t);
        self.phases.push(phase);
        self.states.push(state);
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// A trajectory of bare expectation records, without states.
    pub fn from_records(times: Vec<f64>, records: Vec<ExpectationTriple>) -> Result<Self> {
        if times.len() != records.len() {
            return Err(Error::shape("times and records differ in length"));
        }
        let n = records.len();
        Ok(Self {
            slices: (0..n).collect(),
            times,
            phases: vec![SlicePhase::Hamiltonian; n],
            states: Vec::new(),
            records,
        })
    }
}

/// Runs a schedule from `chi0`, recording the hybrid expectation of
/// `(o_c, o_q)` at every slice.
///
/// Decomposed steps record twice per step (after `V`, after the controls);
/// Hamiltonian schedules record after each `dt`.
pub fn run_trajectory(
    chi0: &HybridState,
    schedule: &Schedule,
    o_c: &ClassicalObservable,
    o_q: &QuantumObservable,
) -> Result<Trajectory> {
    let mut traj = Trajectory::start(chi0, hybrid_expectation(chi0, o_c, o_q)?);
    let mut chi = chi0.clone();
    match schedule {
        Schedule::Decomposed(steps) => {
            for (k, step) in steps.iter().enumerate() {
                let (v, controls) = step.resolve(&chi, k)?;
                let mid = apply_classical_half(&chi, &v)?;
                let rec = hybrid_expectation(&mid, o_c, o_q)?;
                traj.push((2 * k + 1) as f64, SlicePhase::Classical, mid.clone(), rec);
                chi = apply_control_half(&mid, &controls)?;
                let rec = hybrid_expectation(&chi, o_c, o_q)?;
                traj.push((2 * k + 2) as f64, SlicePhase::Control, chi.clone(), rec);
            }
        }
        Schedule::Hamiltonian {
            hamiltonian,
            dt,
            n_steps,
        } => {
            check_hamiltonian_shape(&chi, hamiltonian)?;
            let unitaries = conditional_unitaries(hamiltonian, *dt)?;
            for k in 1..=*n_steps {
                chi = split_over_labels(&chi, |j, rho| rho.conjugate(&unitaries[j]))?;
                let rec = hybrid_expectation(&chi, o_c, o_q)?;
                traj.push(k as f64 * dt, SlicePhase::Hamiltonian, chi.clone(), rec);
            }
        }
    }
    Ok(traj)
}

/// Per-label unnormalized quantum blocks `σ_j = Σ_i q_i p_ij ρ_i`.
///
/// Two hybrid states are physically identical exactly when these agree.
pub fn label_blocks(chi: &HybridState) -> Vec<ComplexMatrix> {
    let dim = chi.quantum_dim();
    let mut blocks = vec![ComplexMatrix::zeros(dim, dim); chi.n_labels()];
    for b in chi.branches() {
        for (j, &p) in b.classical.probs().iter().enumerate() {
            if p != 0.0 {
                blocks[j] = blocks[j]
                    .try_add(&b.quantum.matrix().scale(c64(b.weight * p, 0.0)))
                    .expect("blocks share one dimension");
            }
        }
    }
    blocks
}
