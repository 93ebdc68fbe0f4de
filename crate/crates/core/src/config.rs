//! JSON scenario configuration.
//!
//! Every section is optional and falls back to its default; unknown keys are
//! rejected at every level. Sections that only make sense for one scenario
//! (`field`, `cow`, `mediator`) are rejected when given for another.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenarios::lattice::RingLatticeModel;

/// Checked-in default configuration for the quantum-mediated momentum run.
pub const MOMENTUM_QUANTUM_DEFAULTS: &str = include_str!("../defaults/momentum_quantum.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    MomentumQuantum,
    MomentumHybrid,
    Cow,
    Energy,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::MomentumQuantum,
        ScenarioKind::MomentumHybrid,
        ScenarioKind::Cow,
        ScenarioKind::Energy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::MomentumQuantum => "momentum_quantum",
            ScenarioKind::MomentumHybrid => "momentum_hybrid",
            ScenarioKind::Cow => "cow",
            ScenarioKind::Energy => "energy",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::MomentumQuantum => {
                "S-E-M ring lattice with a quantum mediator E; total quasimomentum conserved while P_S moves"
            }
            ScenarioKind::MomentumHybrid => {
                "mediator replaced by classical labels; audits O_C + P_S + P_M for the hybrid dichotomy"
            }
            ScenarioKind::Cow => "path qubit picking up label-conditional phases; momentum observable frozen",
            ScenarioKind::Energy => "kinetic energy of S against the conserved total energy (quantum or classical mediator)",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mediator {
    Quantum,
    Classical,
}

/// How the classical field labels couple to the quantum particles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldCoupling {
    None,
    /// Label-dependent on-site potential felt by S and M.
    Gradient,
    /// Label-dependent hopping renormalization; commutes with P_S and P_M.
    MomentumDiagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Packets {
    pub x_s: f64,
    pub x_e: f64,
    pub x_m: f64,
    pub width: f64,
}

impl Default for Packets {
    fn default() -> Self {
        Self { x_s: 0.0, x_e: 2.0, x_m: 3.0, width: 0.7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleParams {
    pub t_max: f64,
    pub n_steps: usize,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self { t_max: 3.0, n_steps: 30 }
    }
}

impl ScheduleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(Error::Config("t_max must be finite and non-negative".into()));
        }
        if self.n_steps == 0 {
            return Err(Error::Config("n_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    /// `n_steps + 1` evenly spaced times from 0 to `t_max`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| k as f64 * self.dt()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tol_global: f64,
    pub tol_local: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_global: 1e-10, tol_local: 1e-9 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_global >= 0.0 && self.tol_local >= 0.0) || !self.tol_global.is_finite() || !self.tol_local.is_finite() {
            return Err(Error::Config("tolerances must be finite and non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldParams {
    /// Number of classical field labels (source sites `0..n`); defaults to the ring size.
    #[serde(default)]
    pub classical_labels: Option<usize>,
    pub coupling: FieldCoupling,
    /// Initial label; defaults to the site nearest `packets.x_e`.
    #[serde(default)]
    pub initial_label: Option<usize>,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self { classical_labels: None, coupling: FieldCoupling::Gradient, initial_label: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CowParams {
    pub gamma: [f64; 2],
    pub t_max: f64,
    pub n_points: usize,
}

impl Default for CowParams {
    fn default() -> Self {
        Self { gamma: [0.0, 1.0], t_max: std::f64::consts::PI, n_points: 20 }
    }
}

/// Oracle-derived thresholds recorded alongside a configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    /// Lower bound on `|⟨P_S⟩(t_max) − ⟨P_S⟩(0)|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_delta_p_s: Option<f64>,
    /// Reference value of `|⟨P_S⟩(t_max) − ⟨P_S⟩(0)|` from exact diagonalization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_p_s_reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputParams {
    #[serde(default)]
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for OutputParams {
    fn default() -> Self {
        Self { path: None, format: OutputFormat::Csv }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub lattice: RingLatticeModel,
    #[serde(default)]
    pub packets: Packets,
    #[serde(default)]
    pub schedule: ScheduleParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cow: Option<CowParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mediator: Option<Mediator>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputParams,
    #[serde(default)]
    pub expect: Expectations,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Built-in configuration for a scenario.
    pub fn defaults(kind: ScenarioKind) -> Self {
        let mut cfg = Self::from_json(MOMENTUM_QUANTUM_DEFAULTS).expect("checked-in defaults parse");
        cfg.scenario = kind;
        if kind != ScenarioKind::MomentumQuantum {
            cfg.expect = Expectations::default();
        }
        match kind {
            ScenarioKind::MomentumQuantum => {}
            ScenarioKind::MomentumHybrid => cfg.field = Some(FieldParams::default()),
            ScenarioKind::Cow => {
                cfg.cow = Some(CowParams::default());
                cfg.tolerances = Tolerances { tol_global: 1e-12, tol_local: 1e-12 };
            }
            ScenarioKind::Energy => cfg.mediator = Some(Mediator::Quantum),
        }
        cfg
    }

    pub fn mediator(&self) -> Mediator {
        self.mediator.unwrap_or(Mediator::Quantum)
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        self.schedule.validate()?;
        self.lattice.validate()?;
        if !(self.packets.width > 0.0 && self.packets.width.is_finite()) {
            return Err(Error::Config("packet width must be positive".into()));
        }
        let uses_field = matches!(self.scenario, ScenarioKind::MomentumHybrid)
            || (self.scenario == ScenarioKind::Energy && self.mediator() == Mediator::Classical);
        if self.field.is_some() && !uses_field {
            return Err(Error::Config(format!("`field` does not apply to {}", self.scenario.name())));
        }
        if self.cow.is_some() && self.scenario != ScenarioKind::Cow {
            return Err(Error::Config(format!("`cow` does not apply to {}", self.scenario.name())));
        }
        if self.mediator.is_some() && self.scenario != ScenarioKind::Energy {
            return Err(Error::Config(format!("`mediator` does not apply to {}", self.scenario.name())));
        }
        if let Some(f) = &self.field {
            let n = f.classical_labels.unwrap_or(self.lattice.n_sites);
            if n == 0 || n > self.lattice.n_sites {
                return Err(Error::Config(format!(
                    "classical_labels must be in 1..={}",
                    self.lattice.n_sites
                )));
            }
            if f.initial_label.is_some_and(|l| l >= n) {
                return Err(Error::Config("initial_label out of range".into()));
            }
        }
        if let Some(c) = &self.cow {
            if c.n_points < 2 || !(c.t_max.is_finite() && c.t_max >= 0.0) || c.gamma.iter().any(|g| !g.is_finite()) {
                return Err(Error::Config("cow needs n_points >= 2 and finite gamma, t_max".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_for_every_scenario() {
        for kind in ScenarioKind::ALL {
            let cfg = ScenarioConfig::defaults(kind);
            cfg.validate().unwrap();
            let text = serde_json::to_string(&cfg).unwrap();
            assert_eq!(ScenarioConfig::from_json(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn minimal_config() {
        let cfg = ScenarioConfig::from_json(r#"{"scenario":"cow"}"#).unwrap();
        assert_eq!(cfg.lattice, RingLatticeModel::default());
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn rejects_unknown_and_misplaced_keys() {
        assert!(ScenarioConfig::from_json(r#"{"scenario":"cow","bogus":1}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"scenario":"cow","lattice":{"n_sites":5,"hop_s":1,"hop_e":1,"hop_m":1,"g_se":0,"g_em":0,"range":1,"extra":2}}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"scenario":"momentum_quantum","mediator":"quantum"}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"scenario":"energy","mediator":"quantum","field":{"coupling":"none"}}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"scenario":"warp"}"#).is_err());
        assert!(ScenarioConfig::from_json("{not json").is_err());
        assert!(ScenarioConfig::from_json(r#"{"scenario":"cow","schedule":{"t_max":1,"n_steps":0}}"#).is_err());
    }
}
