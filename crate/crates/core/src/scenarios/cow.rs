//! Path qubit in a gravitational potential: phases without momentum transfer.
//!
//! One classical label (the field configuration) couples to the path qubit
//! through `S = diag(γ₀, γ₁)`, so path `j` picks up phase `γ_j t`.

use super::{Check, ScenarioResult};
use crate::classical::{ClassicalDistribution, ClassicalObservable};
use crate::config::{ScenarioKind, Tolerances};
use crate::dynamics::{evolve_hamiltonian, HybridHamiltonian};
use crate::error::{Error, Result};
use crate::hybrid::{hybrid_expectation, product_state, reduced_quantum, ExpectationTriple};
use crate::linalg::{c64, HermitianMatrix};
use crate::nogo::{audit_records, Verdict};
use crate::quantum::{DensityMatrix, QuantumObservable};

/// Bound on the interference and momentum checks.
pub const COW_TOL: f64 = 1e-12;

/// `(1 + cos(Δγ t)) / 2`.
pub fn interference_closed_form(gamma: [f64; 2], t: f64) -> f64 {
    (1.0 + ((gamma[1] - gamma[0]) * t).cos()) / 2.0
}

/// `⟨+|ρ|+⟩` for a qubit.
pub fn plus_probability(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    0.5 * (m.get(0, 0) + m.get(1, 1) + m.get(0, 1) + m.get(1, 0)).re
}

/// Samples `n_points` times in `[0, t_max]`.
///
/// Columns: `interference_probability, closed_form, exp_P_neutron`. The
/// neutron momentum observable is path-diagonal, `diag(+1, −1)`.
pub fn cow_phase(gamma: [f64; 2], t_max: f64, n_points: usize, tol: &Tolerances) -> Result<ScenarioResult> {
    if n_points < 2 || !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::domain("cow needs n_points >= 2 and a finite t_max >= 0"));
    }
    let h = HybridHamiltonian::new(
        vec![0.0],
        HermitianMatrix::zeros(2),
        vec![(1.0, HermitianMatrix::from_real_diagonal(&gamma))],
    )?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let chi0 = product_state(
        ClassicalDistribution::point(1, 0)?,
        DensityMatrix::pure(&[c64(s, 0.0), c64(s, 0.0)])?,
    );
    let o_c = ClassicalObservable::zeros(1);
    let p_n = QuantumObservable::new("P_neutron", HermitianMatrix::from_real_diagonal(&[1.0, -1.0]));
    let times: Vec<f64> = (0..n_points)
        .map(|k| t_max * k as f64 / (n_points - 1) as f64)
        .collect();
    let mut rows = Vec::with_capacity(n_points);
    let mut triples: Vec<ExpectationTriple> = Vec::with_capacity(n_points);
    let mut max_err = 0.0f64;
    for &t in &times {
        let chi = evolve_hamiltonian(&chi0, &h, t)?;
        let prob = plus_probability(&reduced_quantum(&chi));
        let exact = interference_closed_form(gamma, t);
        max_err = max_err.max((prob - exact).abs());
        let rec = hybrid_expectation(&chi, &o_c, &p_n)?;
        rows.push(vec![prob, exact, rec.quantum]);
        triples.push(rec);
    }
    let report = audit_records(&times, &triples, tol.tol_global, tol.tol_local)?;
    let checks = vec![
        Check::at_most("interference_error", max_err, COW_TOL),
        Check::at_most("momentum_drift", report.local_q_drift, COW_TOL),
    ];
    ScenarioResult::new(
        ScenarioKind::Cow,
        &["interference_probability", "closed_form", "exp_P_neutron"],
        &times,
        rows,
        report,
        checks,
        vec![Verdict::GlobalConservedLocalsFrozen],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn prob_at(phase: f64) -> f64 {
        let r = cow_phase([0.0, 1.0], phase, 2, &Tolerances::default()).unwrap();
        r.column("interference_probability").unwrap()[1]
    }

    #[test]
    fn closed_form_examples() {
        assert!((prob_at(0.0) - 1.0).abs() < 1e-15);
        assert!(prob_at(PI).abs() < 1e-12);
        assert!((prob_at(PI / 2.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn default_run_matches_and_freezes_momentum() {
        let r = cow_phase([0.3, 1.7], 5.0, 20, &Tolerances { tol_global: 1e-12, tol_local: 1e-12 }).unwrap();
        assert!(r.as_expected(), "{:?}", r.checks);
        assert_eq!(r.records.len(), 20);
        assert!(r.report.local_q_drift <= 1e-15);
    }

    #[test]
    fn rejects_bad_sampling() {
        assert!(cow_phase([0.0, 1.0], 1.0, 1, &Tolerances::default()).is_err());
        assert!(cow_phase([0.0, 1.0], f64::NAN, 5, &Tolerances::default()).is_err());
    }
}
