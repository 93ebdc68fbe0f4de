//! Kinetic energy of S under a mediated interaction.

use super::lattice::{build_hamiltonian, embed_one, hopping, quasimomenta, Particle, RingLatticeModel};
use super::momentum::{build_field_setup, initial_packets, run_field, with_dichotomy_checks, DICHOTOMY};
use super::{expect, Check, PureEvolution, ScenarioResult};
use crate::classical::ClassicalObservable;
use crate::config::{FieldParams, Packets, ScenarioKind, ScheduleParams, Tolerances};
use crate::error::Result;
use crate::hybrid::ExpectationTriple;
use crate::linalg::{tensor_all, ComplexMatrix, HermitianMatrix};
use crate::nogo::{audit_conservation, audit_records, Verdict};
use crate::quantum::QuantumObservable;

/// Quantum mediator. Columns: `exp_Ekin_S, exp_H_total`; the report's local
/// slots hold `⟨E_kin,S⟩` and `⟨H − E_kin,S⟩`.
pub fn energy_free_fall(
    model: &RingLatticeModel,
    packets: &Packets,
    schedule: &ScheduleParams,
    tol: &Tolerances,
) -> Result<ScenarioResult> {
    schedule.validate()?;
    let h = build_hamiltonian(model)?;
    let l = model.n_sites;
    let kin = embed_one(hopping(l, model.hop_s).matrix(), Particle::S, l);
    let evo = PureEvolution::new(&h, &initial_packets(l, packets)?);
    let times = schedule.times();
    let mut rows = Vec::with_capacity(times.len());
    let mut triples = Vec::with_capacity(times.len());
    for &t in &times {
        let psi = evo.state(t);
        let (e_kin, e_tot) = (expect(&kin, &psi), expect(h.matrix(), &psi));
        rows.push(vec![e_kin, e_tot]);
        triples.push(ExpectationTriple::new(e_kin, e_tot - e_kin));
    }
    let report = audit_records(&times, &triples, tol.tol_global, tol.tol_local)?;
    let e_tot: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let h_drift = e_tot.iter().map(|e| (e - e_tot[0]).abs()).fold(0.0, f64::max);
    let mut checks = vec![Check::at_most("h_total_drift", h_drift, tol.tol_global)];
    let coupled = model.g_se != 0.0 || model.g_em != 0.0;
    if coupled {
        checks.push(Check::exceeds("ekin_s_moves", report.local_c_drift, tol.tol_local));
    }
    let expected = if coupled { Verdict::GlobalConservedLocalsMoved } else { Verdict::GlobalConservedLocalsFrozen };
    ScenarioResult::new(
        ScenarioKind::Energy,
        &["exp_Ekin_S", "exp_H_total"],
        &times,
        rows,
        report,
        checks,
        vec![expected],
    )
}

/// Classical mediator: label `i` carries energy `−2 J_E cos k̃_i`.
///
/// Columns: `exp_O_C, exp_Ekin_S, exp_total`.
pub fn energy_free_fall_hybrid(
    model: &RingLatticeModel,
    packets: &Packets,
    field: &FieldParams,
    schedule: &ScheduleParams,
    tol: &Tolerances,
) -> Result<ScenarioResult> {
    let hop_e = model.hop_e;
    let energies = move |n: usize, l: usize| {
        let k = quasimomenta(l);
        (0..n).map(|i| -2.0 * hop_e * k[(i + l / 2) % l].cos()).collect::<Vec<f64>>()
    };
    let setup = build_field_setup(model, packets, field, energies)?;
    let l = setup.n_sites;
    let o_c = ClassicalObservable::new(setup.hamiltonian.classical_energies().to_vec())?;
    let kin = tensor_all(&[hopping(l, model.hop_s).matrix(), &ComplexMatrix::identity(l)])?;
    let o_q = QuantumObservable::new("Ekin_S", HermitianMatrix::symmetrized(kin));
    let traj = run_field(&setup, schedule, &o_c, &o_q)?;
    let report = audit_conservation(&traj, tol.tol_global, tol.tol_local)?;
    let rows = traj.records.iter().map(|r| vec![r.classical, r.quantum, r.total]).collect();
    ScenarioResult::new(
        ScenarioKind::Energy,
        &["exp_O_C", "exp_Ekin_S", "exp_total"],
        &traj.times,
        rows,
        report,
        Vec::new(),
        DICHOTOMY.to_vec(),
    )
    .map(with_dichotomy_checks)
}
