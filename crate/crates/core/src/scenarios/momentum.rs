//! Momentum exchange through a mediator, quantum or classical.

use super::lattice::{
    build_hamiltonian, embed_one, hopping, kron_vec, momentum_operator, quasimomenta, translation,
    wavepacket, Particle, RingLatticeModel,
};
use super::{expect, Check, PureEvolution, ScenarioResult};
use crate::classical::{ClassicalDistribution, ClassicalObservable};
use crate::config::{FieldCoupling, FieldParams, Packets, ScenarioKind, ScheduleParams, Tolerances};
use crate::dynamics::{run_trajectory, HybridHamiltonian, Schedule, Trajectory};
use crate::error::{Error, Result};
use crate::hybrid::{product_state, reduced_quantum, ExpectationTriple, HybridState};
use crate::linalg::{matrix_commutator_norm, tensor_all, ComplexMatrix, HermitianMatrix, C64};
use crate::nogo::{audit_conservation, audit_records, ConservationReport, Verdict, BACKREACTION_TOL};
use crate::quantum::{expectation, DensityMatrix, QuantumObservable};

/// Bound on `‖[H, T⊗T⊗T]‖_max`.
pub const TRANSLATION_TOL: f64 = 1e-12;

pub fn translation_residual(h: &HermitianMatrix, l: usize) -> Result<f64> {
    let t = translation(l);
    matrix_commutator_norm(h.matrix(), &tensor_all(&[&t, &t, &t])?)
}

pub(crate) fn initial_packets(l: usize, p: &Packets) -> Result<Vec<C64>> {
    let s = wavepacket(l, p.x_s, p.width)?;
    let e = wavepacket(l, p.x_e, p.width)?;
    let m = wavepacket(l, p.x_m, p.width)?;
    Ok(kron_vec(&[&s, &e, &m]))
}

/// Three quantum particles; E mediates between S and M.
///
/// Columns: `exp_P_S, exp_P_E, exp_P_M, exp_P_total`. The report's two local
/// slots hold `⟨P_S⟩` and `⟨P_E + P_M⟩`.
pub fn momentum_exchange_quantum(
    model: &RingLatticeModel,
    packets: &Packets,
    schedule: &ScheduleParams,
    tol: &Tolerances,
) -> Result<ScenarioResult> {
    schedule.validate()?;
    let h = build_hamiltonian(model)?;
    let l = model.n_sites;
    let residual = translation_residual(&h, l)?;
    let p = momentum_operator(l);
    let ops: Vec<ComplexMatrix> = Particle::ALL.iter().map(|&q| embed_one(p.matrix(), q, l)).collect();
    let evo = PureEvolution::new(&h, &initial_packets(l, packets)?);
    let times = schedule.times();
    let mut rows = Vec::with_capacity(times.len());
    let mut triples = Vec::with_capacity(times.len());
    for &t in &times {
        let psi = evo.state(t);
        let [ps, pe, pm] = [0, 1, 2].map(|i| expect(&ops[i], &psi));
        rows.push(vec![ps, pe, pm, ps + pe + pm]);
        triples.push(ExpectationTriple::new(ps, pe + pm));
    }
    let report = audit_records(&times, &triples, tol.tol_global, tol.tol_local)?;
    let checks = vec![
        Check::at_most("translation_commutator", residual, TRANSLATION_TOL),
        Check::at_most("p_total_drift", report.global_drift, tol.tol_global),
    ];
    let coupled = model.g_se != 0.0 || model.g_em != 0.0;
    let expected = if coupled { Verdict::GlobalConservedLocalsMoved } else { Verdict::GlobalConservedLocalsFrozen };
    ScenarioResult::new(
        ScenarioKind::MomentumQuantum,
        &["exp_P_S", "exp_P_E", "exp_P_M", "exp_P_total"],
        &times,
        rows,
        report,
        checks,
        vec![expected],
    )
}

/// S ⊗ M coupled to a register of classical field labels.
///
/// Label `i` stands for the mediator sitting at site `i`.
#[derive(Clone, Debug)]
pub struct FieldSetup {
    pub hamiltonian: HybridHamiltonian,
    pub chi0: HybridState,
    pub n_labels: usize,
    pub n_sites: usize,
}

/// Quasimomentum carried by field label `i`: site index folded into the branch.
pub fn label_momenta(n_labels: usize, l: usize) -> Vec<f64> {
    let k = quasimomenta(l);
    let offset = l / 2;
    (0..n_labels).map(|i| k[(i + offset) % l]).collect()
}

/// `S_i` on `S ⊗ M` for label `i`.
fn field_coupling(model: &RingLatticeModel, coupling: FieldCoupling, i: usize, n: usize) -> Result<HermitianMatrix> {
    let l = model.n_sites;
    let eye = ComplexMatrix::identity(l);
    let (a, b) = match coupling {
        FieldCoupling::None => return Ok(HermitianMatrix::zeros(l * l)),
        FieldCoupling::Gradient => {
            let mut v = vec![0.0; l];
            let d = model.range % l;
            for r in [d, (l - d) % l] {
                v[(i + r) % l] = 1.0;
            }
            let v = HermitianMatrix::from_real_diagonal(&v);
            (v.scale(model.g_se), v.scale(model.g_em))
        }
        FieldCoupling::MomentumDiagonal => {
            let w = (i + 1) as f64 / n as f64;
            (hopping(l, model.g_se * w), hopping(l, model.g_em * w))
        }
    };
    let s = &tensor_all(&[a.matrix(), &eye])? + &tensor_all(&[&eye, b.matrix()])?;
    Ok(HermitianMatrix::symmetrized(s))
}

pub fn build_field_setup(
    model: &RingLatticeModel,
    packets: &Packets,
    field: &FieldParams,
    classical_energies: impl Fn(usize, usize) -> Vec<f64>,
) -> Result<FieldSetup> {
    model.validate()?;
    let l = model.n_sites;
    let n = field.classical_labels.unwrap_or(l);
    if n == 0 || n > l {
        return Err(Error::shape(format!("{n} field labels on a {l}-site ring")));
    }
    let eye = ComplexMatrix::identity(l);
    let h_q = HermitianMatrix::symmetrized(
        &tensor_all(&[hopping(l, model.hop_s).matrix(), &eye])?
            + &tensor_all(&[&eye, hopping(l, model.hop_m).matrix()])?,
    );
    let couplings = (0..n)
        .map(|i| Ok((1.0, field_coupling(model, field.coupling, i, n)?)))
        .collect::<Result<Vec<_>>>()?;
    let hamiltonian = HybridHamiltonian::new(classical_energies(n, l), h_q, couplings)?;
    let label = field
        .initial_label
        .unwrap_or_else(|| (packets.x_e.round().rem_euclid(l as f64) as usize) % n);
    let psi = kron_vec(&[&wavepacket(l, packets.x_s, packets.width)?, &wavepacket(l, packets.x_m, packets.width)?]);
    let chi0 = product_state(ClassicalDistribution::point(n, label)?, DensityMatrix::pure(&psi)?);
    Ok(FieldSetup { hamiltonian, chi0, n_labels: n, n_sites: l })
}

pub(crate) fn run_field(
    setup: &FieldSetup,
    schedule: &ScheduleParams,
    o_c: &ClassicalObservable,
    o_q: &QuantumObservable,
) -> Result<Trajectory> {
    schedule.validate()?;
    run_trajectory(
        &setup.chi0,
        &Schedule::Hamiltonian {
            hamiltonian: setup.hamiltonian.clone(),
            dt: schedule.dt(),
            n_steps: schedule.n_steps,
        },
        o_c,
        o_q,
    )
}

/// Checks shared by the hybrid runs: no backreaction, and no compensating
/// exchange between the sectors.
pub(crate) fn dichotomy_checks(report: &ConservationReport) -> Vec<Check> {
    let compensating = (report.verdict == Verdict::GlobalConservedLocalsMoved) as u8 as f64;
    vec![
        Check::at_most("classical_drift", report.local_c_drift, BACKREACTION_TOL),
        Check::at_most("compensating_exchange", compensating, 0.0),
    ]
}

pub(crate) const DICHOTOMY: [Verdict; 2] = [Verdict::GlobalViolated, Verdict::GlobalConservedLocalsFrozen];

/// Mediator replaced by classical labels.
///
/// Columns: `exp_O_C, exp_P_S, exp_P_M, exp_total`, with `O_C` the label
/// momenta from [`label_momenta`].
pub fn momentum_exchange_hybrid(
    model: &RingLatticeModel,
    packets: &Packets,
    field: &FieldParams,
    schedule: &ScheduleParams,
    tol: &Tolerances,
) -> Result<ScenarioResult> {
    let setup = build_field_setup(model, packets, field, |n, _| vec![0.0; n])?;
    let l = setup.n_sites;
    let o_c = ClassicalObservable::new(label_momenta(setup.n_labels, l))?;
    let p = momentum_operator(l);
    let eye = ComplexMatrix::identity(l);
    let p_s = tensor_all(&[p.matrix(), &eye])?;
    let p_m = tensor_all(&[&eye, p.matrix()])?;
    let o_q = QuantumObservable::new("P_S+P_M", HermitianMatrix::symmetrized(&p_s + &p_m));
    let traj = run_field(&setup, schedule, &o_c, &o_q)?;
    let report = audit_conservation(&traj, tol.tol_global, tol.tol_local)?;
    let obs_s = QuantumObservable::new("P_S", HermitianMatrix::symmetrized(p_s));
    let obs_m = QuantumObservable::new("P_M", HermitianMatrix::symmetrized(p_m));
    let mut rows = Vec::with_capacity(traj.len());
    for (state, rec) in traj.states.iter().zip(&traj.records) {
        let rho = reduced_quantum(state);
        rows.push(vec![rec.classical, expectation(&rho, &obs_s)?, expectation(&rho, &obs_m)?, rec.total]);
    }
    ScenarioResult::new(
        ScenarioKind::MomentumHybrid,
        &["exp_O_C", "exp_P_S", "exp_P_M", "exp_total"],
        &traj.times,
        rows,
        report,
        Vec::new(),
        DICHOTOMY.to_vec(),
    )
    .map(with_dichotomy_checks)
}

pub(crate) fn with_dichotomy_checks(mut r: ScenarioResult) -> ScenarioResult {
    r.checks = dichotomy_checks(&r.report);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ScheduleParams {
        ScheduleParams { t_max: 3.0, n_steps: 30 }
    }

    #[test]
    fn free_particles_are_frozen() {
        let model = RingLatticeModel { g_se: 0.0, g_em: 0.0, ..Default::default() };
        let r = momentum_exchange_quantum(&model, &Packets::default(), &quick(), &Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::GlobalConservedLocalsFrozen);
        assert!(r.as_expected());
    }

    #[test]
    fn default_quantum_mediator_moves_locals() {
        let r = momentum_exchange_quantum(&RingLatticeModel::default(), &Packets::default(), &quick(), &Tolerances::default())
            .unwrap();
        assert_eq!(r.verdict, Verdict::GlobalConservedLocalsMoved);
        assert!(r.as_expected(), "{:?}", r.checks);
        let ps = r.column("exp_P_S").unwrap();
        assert!((ps[ps.len() - 1] - ps[0]).abs() > 1e-2);
    }

    #[test]
    fn umklapp_breaks_additive_conservation() {
        let model = RingLatticeModel { umklapp: true, ..Default::default() };
        let r = momentum_exchange_quantum(&model, &Packets::default(), &quick(), &Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::GlobalViolated);
        assert!(r.check("translation_commutator").unwrap().passed);
    }

    #[test]
    fn direct_coupling_is_rejected() {
        let model = RingLatticeModel { g_sm: 0.3, ..Default::default() };
        let err = momentum_exchange_quantum(&model, &Packets::default(), &quick(), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::Locality(_)));
    }

    #[test]
    fn hybrid_couplings() {
        let run = |coupling| {
            let field = FieldParams { coupling, ..Default::default() };
            momentum_exchange_hybrid(&RingLatticeModel::default(), &Packets::default(), &field, &quick(), &Tolerances::default())
                .unwrap()
        };
        let none = run(FieldCoupling::None);
        assert_eq!(none.verdict, Verdict::GlobalConservedLocalsFrozen);
        let diag = run(FieldCoupling::MomentumDiagonal);
        assert_eq!(diag.verdict, Verdict::GlobalConservedLocalsFrozen);
        let grad = run(FieldCoupling::Gradient);
        assert_eq!(grad.verdict, Verdict::GlobalViolated);
        for r in [&none, &diag, &grad] {
            assert!(r.as_expected());
            assert!(r.report.local_c_drift <= 1e-12);
        }
        let ps = grad.column("exp_P_S").unwrap();
        assert!((ps[ps.len() - 1] - ps[0]).abs() > 1e-3);
    }

    #[test]
    fn label_momenta_fold_into_branch() {
        let k = label_momenta(5, 5);
        assert_eq!(k[0], 0.0);
        assert!(k[1] > 0.0 && k[3] < 0.0);
    }
}
