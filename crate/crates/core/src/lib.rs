//! Hybrid quantum-classical dynamics laboratory.
//!
//! The crate models a classical sector (finite label sets, stochastic maps)
//! coupled to a quantum sector (density matrices, Kraus channels) through
//! classically correlated branch ensembles, and audits conservation laws
//! across both sectors.

pub mod classical;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod hybrid;
pub mod linalg;
pub mod nogo;
pub mod output;
pub mod quantum;
pub mod rng;
pub mod scenarios;

pub use classical::{ClassicalDistribution, ClassicalObservable, StochasticMap};
pub use config::{ScenarioConfig, ScenarioKind};
pub use dynamics::{DecomposedStep, HybridHamiltonian, Schedule, Trajectory};
pub use error::{Error, Result};
pub use hybrid::{ExpectationTriple, HybridBranch, HybridState};
pub use linalg::{ComplexMatrix, HermitianMatrix};
pub use nogo::{ConservationReport, TrialSummary, Verdict};
pub use quantum::{DensityMatrix, KrausChannel, QuantumObservable};
pub use scenarios::{run_scenario, ScenarioResult};
