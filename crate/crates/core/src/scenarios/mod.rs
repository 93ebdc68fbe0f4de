//! Runnable physics setups and their result type.

pub mod cow;
pub mod energy;
pub mod lattice;
pub mod momentum;

use serde::{Deserialize, Serialize};

use crate::config::{Mediator, ScenarioConfig, ScenarioKind};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, Spectrum, C64};
use crate::nogo::{ConservationReport, Verdict};

pub use cow::cow_phase;
pub use energy::{energy_free_fall, energy_free_fall_hybrid};
pub use lattice::RingLatticeModel;
pub use momentum::{momentum_exchange_hybrid, momentum_exchange_quantum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    Exceeds,
}

/// A named numeric check on a scenario run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, relation: Relation::AtMost, passed: value <= bound }
    }

    pub fn exceeds(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, relation: Relation::Exceeds, passed: value > bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub slice: usize,
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: ScenarioKind,
    pub columns: Vec<String>,
    pub records: Vec<ScenarioRecord>,
    pub report: ConservationReport,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub expected_verdicts: Vec<Verdict>,
}

impl ScenarioResult {
    /// True when every check passed and the verdict is one the scenario predicts.
    pub fn as_expected(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.expected_verdicts.contains(&self.verdict)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.records.iter().map(|r| r.values[idx]).collect())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn new(
        scenario: ScenarioKind,
        columns: &[&str],
        times: &[f64],
        rows: Vec<Vec<f64>>,
        report: ConservationReport,
        checks: Vec<Check>,
        expected_verdicts: Vec<Verdict>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::domain("scenario produced no records"));
        }
        let records = rows
            .into_iter()
            .zip(times)
            .enumerate()
            .map(|(slice, (values, &t))| ScenarioRecord { slice, t, values })
            .collect();
        Ok(Self {
            scenario,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            records,
            verdict: report.verdict,
            report,
            checks,
            expected_verdicts,
        })
    }
}

/// Runs the scenario named in `cfg`, adding any thresholds it records.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let field = cfg.field.unwrap_or_default();
    let mut result = match cfg.scenario {
        ScenarioKind::MomentumQuantum => {
            momentum_exchange_quantum(&cfg.lattice, &cfg.packets, &cfg.schedule, &cfg.tolerances)?
        }
        ScenarioKind::MomentumHybrid => {
            momentum_exchange_hybrid(&cfg.lattice, &cfg.packets, &field, &cfg.schedule, &cfg.tolerances)?
        }
        ScenarioKind::Cow => {
            let c = cfg.cow.unwrap_or_default();
            cow_phase(c.gamma, c.t_max, c.n_points, &cfg.tolerances)?
        }
        ScenarioKind::Energy => match cfg.mediator() {
            Mediator::Quantum => energy_free_fall(&cfg.lattice, &cfg.packets, &cfg.schedule, &cfg.tolerances)?,
            Mediator::Classical => {
                energy_free_fall_hybrid(&cfg.lattice, &cfg.packets, &field, &cfg.schedule, &cfg.tolerances)?
            }
        },
    };
    if let (Some(min), Some(p_s)) = (cfg.expect.min_delta_p_s, result.column("exp_P_S")) {
        let delta = (p_s[p_s.len() - 1] - p_s[0]).abs();
        result.checks.push(Check::exceeds("delta_p_s_at_t_max", delta, min));
    }
    Ok(result)
}

/// Pure-state propagation through a fixed spectrum.
pub(crate) struct PureEvolution {
    spectrum: Spectrum,
    coeffs: Vec<C64>,
}

impl PureEvolution {
    pub(crate) fn new(h: &HermitianMatrix, psi0: &[C64]) -> Self {
        let spectrum = h.eigh();
        let coeffs = spectrum.vectors.adjoint().apply(psi0);
        Self { spectrum, coeffs }
    }

    pub(crate) fn state(&self, t: f64) -> Vec<C64> {
        let phased: Vec<C64> = self
            .coeffs
            .iter()
            .zip(&self.spectrum.values)
            .map(|(c, &e)| c * C64::from_polar(1.0, -e * t))
            .collect();
        self.spectrum.vectors.apply(&phased)
    }
}

pub(crate) fn expect(op: &ComplexMatrix, psi: &[C64]) -> f64 {
    op.quadratic_form(psi).re
}
