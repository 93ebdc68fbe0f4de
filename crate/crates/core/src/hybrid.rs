//! Hybrid states as classically correlated branch ensembles.
//!
//! A [`HybridState`] is a list of branches `(q_i, p_i, ρ_i)`: a weight, a
//! classical distribution and a density matrix. The sectors only ever share
//! classical correlation; nothing in this representation can entangle them.

use serde::{Deserialize, Serialize};

use crate::classical::{classical_expectation, ClassicalDistribution, ClassicalObservable};
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};
use crate::quantum::{expectation, DensityMatrix, QuantumObservable};

pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Branches lighter than this are dropped by [`canonicalize`].
pub const DROP_WEIGHT: f64 = 1e-14;
/// Entrywise tolerance for merging identical branches.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct HybridBranch {
    pub weight: f64,
    pub classical: ClassicalDistribution,
    pub quantum: DensityMatrix,
}

impl HybridBranch {
    pub fn new(weight: f64, classical: ClassicalDistribution, quantum: DensityMatrix) -> Result<Self> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::invariant(format!("branch weight {weight}")));
        }
        Ok(Self {
            weight,
            classical,
            quantum,
        })
    }
}

/// Σ_i q_i p_i ⊕ ρ_i.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HybridStateRepr", into = "HybridStateRepr")]
pub struct HybridState {
    branches: Vec<HybridBranch>,
}

impl HybridState {
    pub fn new(branches: Vec<HybridBranch>) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::domain("hybrid state needs at least one branch"))?;
        let (labels, dim) = (first.classical.len(), first.quantum.dim());
        for b in &branches {
            if b.classical.len() != labels || b.quantum.dim() != dim {
                return Err(Error::shape(format!(
                    "branch shapes ({}, {}) vs ({labels}, {dim})",
                    b.classical.len(),
                    b.quantum.dim()
                )));
            }
            if !b.weight.is_finite() || b.weight < 0.0 {
                return Err(Error::invariant(format!("branch weight {}", b.weight)));
            }
        }
        let total: f64 = branches.iter().map(|b| b.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invariant(format!("branch weights sum to {total}")));
        }
        Ok(Self { branches })
    }

    /// Internal constructor for engine outputs whose shapes are known to agree.
    pub(crate) fn from_branches_unchecked(branches: Vec<HybridBranch>) -> Self {
        debug_assert!(!branches.is_empty());
        Self { branches }
    }

    pub fn branches(&self) -> &[HybridBranch] {
        &self.branches
    }

    pub fn n_labels(&self) -> usize {
        self.branches[0].classical.len()
    }

    pub fn quantum_dim(&self) -> usize {
        self.branches[0].quantum.dim()
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.weight).sum()
    }
}

/// `(⟨O_C⟩, ⟨O_Q⟩, ⟨O_C⟩ + ⟨O_Q⟩)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationTriple {
    pub classical: f64,
    pub quantum: f64,
    pub total: f64,
}

impl ExpectationTriple {
    pub fn new(classical: f64, quantum: f64) -> Self {
        Self {
            classical,
            quantum,
            total: classical + quantum,
        }
    }
}

/// Uncorrelated state p ⊕ ρ.
pub fn product_state(p: ClassicalDistribution, rho: DensityMatrix) -> HybridState {
    HybridState {
        branches: vec![HybridBranch {
            weight: 1.0,
            classical: p,
            quantum: rho,
        }],
    }
}

/// Σ_j q_j {p_j, O_C} and Σ_j q_j Tr(ρ_j O_Q), and their sum.
pub fn hybrid_expectation(
    chi: &HybridState,
    o_c: &ClassicalObservable,
    o_q: &QuantumObservable,
) -> Result<ExpectationTriple> {
    let mut classical = 0.0;
    let mut quantum = 0.0;
    for b in &chi.branches {
        classical += b.weight * classical_expectation(&b.classical, o_c)?;
        quantum += b.weight * expectation(&b.quantum, o_q)?;
    }
    Ok(ExpectationTriple::new(classical, quantum))
}

/// Σ_i q_i p_i.
pub fn reduced_classical(chi: &HybridState) -> ClassicalDistribution {
    let parts: Vec<(f64, &ClassicalDistribution)> =
        chi.branches.iter().map(|b| (b.weight, &b.classical)).collect();
    ClassicalDistribution::mixture(&parts)
}

/// Σ_i q_i ρ_i.
pub fn reduced_quantum(chi: &HybridState) -> DensityMatrix {
    if let [only] = chi.branches.as_slice() {
        return only.quantum.clone();
    }
    let parts: Vec<(f64, &DensityMatrix)> =
        chi.branches.iter().map(|b| (b.weight, &b.quantum)).collect();
    DensityMatrix::mixture(&parts)
}

/// Canonical form of a hybrid state.
///
/// - branches with weight below [`DROP_WEIGHT`] are removed, and the rest
///   renormalized;
/// - branches on the same point-mass label are coalesced into one branch
///   holding the weighted mixture of their density matrices;
/// - other branches equal entrywise within [`MERGE_TOL`] are merged.
///
/// Branch order follows first appearance. Every hybrid expectation is
/// unchanged up to rounding.
pub fn canonicalize(chi: &HybridState) -> Result<HybridState> {
    let kept: Vec<&HybridBranch> = chi
        .branches
        .iter()
        .filter(|b| b.weight >= DROP_WEIGHT)
        .collect();
    if kept.is_empty() {
        return Err(Error::Degenerate("every branch has negligible weight".into()));
    }
    let dropped = kept.len() != chi.branches.len();

    // Each group collects indices into `kept` that become one branch.
    let mut groups: Vec<(Option<usize>, Vec<usize>)> = Vec::new();
    for (idx, b) in kept.iter().enumerate() {
        let label = b.classical.pure_label();
        let target = groups.iter().position(|(g_label, members)| match (label, g_label) {
            (Some(l), Some(g)) => l == *g,
            (None, None) => branches_equal(b, kept[members[0]]),
            _ => false,
        });
        match target {
            Some(g) => groups[g].1.push(idx),
            None => groups.push((label, vec![idx])),
        }
    }

    let mut branches: Vec<HybridBranch> = groups
        .into_iter()
        .map(|(label, members)| {
            let head = kept[members[0]];
            if members.len() == 1 {
                return head.clone();
            }
            let weight: f64 = members.iter().map(|&m| kept[m].weight).sum();
            let quantum = if label.is_some() {
                let parts: Vec<(f64, &DensityMatrix)> = members
                    .iter()
                    .map(|&m| (kept[m].weight, &kept[m].quantum))
                    .collect();
                DensityMatrix::mixture(&parts)
            } else {
                head.quantum.clone()
            };
            HybridBranch {
                weight,
                classical: head.classical.clone(),
                quantum,
            }
        })
        .collect();

    if dropped {
        let total: f64 = branches.iter().map(|b| b.weight).sum();
        for b in &mut branches {
            b.weight /= total;
        }
    }
    Ok(HybridState { branches })
}

fn branches_equal(a: &HybridBranch, b: &HybridBranch) -> bool {
    a.classical
        .probs()
        .iter()
        .zip(b.classical.probs())
        .all(|(x, y)| (x - y).abs() <= MERGE_TOL)
        && a.quantum.matrix().max_abs_diff(b.quantum.matrix()) <= MERGE_TOL
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchRepr {
    weight: f64,
    classical: Vec<f64>,
    quantum: MatrixRepr,
}

/// Wire form: weights, probability vectors, and density matrices split into
/// real and imaginary row lists.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HybridStateRepr {
    branches: Vec<BranchRepr>,
}

impl From<HybridState> for HybridStateRepr {
    fn from(chi: HybridState) -> Self {
        let branches = chi
            .branches
            .iter()
            .map(|b| {
                let m = b.quantum.matrix();
                let rows = |f: fn(&crate::linalg::C64) -> f64| {
                    (0..m.rows())
                        .map(|i| (0..m.cols()).map(|j| f(&m.get(i, j))).collect())
                        .collect()
                };
                BranchRepr {
                    weight: b.weight,
                    classical: b.classical.probs().to_vec(),
                    quantum: MatrixRepr {
                        re: rows(|z| z.re),
                        im: rows(|z| z.im),
                    },
                }
            })
            .collect();
        HybridStateRepr { branches }
    }
}

impl TryFrom<HybridStateRepr> for HybridState {
    type Error = Error;

    fn try_from(repr: HybridStateRepr) -> Result<Self> {
        let branches = repr
            .branches
            .into_iter()
            .map(|b| {
                let dim = b.quantum.re.len();
                if b.quantum.im.len() != dim
                    || b.quantum.re.iter().chain(&b.quantum.im).any(|r| r.len() != dim)
                {
                    return Err(Error::shape("density matrix rows must be square"));
                }
                let entries = b
                    .quantum
                    .re
                    .iter()
                    .flatten()
                    .zip(b.quantum.im.iter().flatten())
                    .map(|(&re, &im)| c64(re, im))
                    .collect();
                let rho = DensityMatrix::from_matrix(ComplexMatrix::from_row_major(dim, dim, entries)?)?;
                HybridBranch::new(b.weight, ClassicalDistribution::new(b.classical)?, rho)
            })
            .collect::<Result<Vec<_>>>()?;
        HybridState::new(branches)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, HermitianMatrix};
    use crate::quantum::random_density_matrix;
    use crate::rng::stream;
    use rand::Rng;

    fn z_obs() -> QuantumObservable {
        QuantumObservable::new("Z", pauli::z())
    }

    fn pure(n: usize, l: usize) -> ClassicalDistribution {
        ClassicalDistribution::point(n, l).unwrap()
    }

    fn two_branch() -> HybridState {
        HybridState::new(vec![
            HybridBranch::new(0.5, pure(2, 0), DensityMatrix::basis(2, 0).unwrap()).unwrap(),
            HybridBranch::new(0.5, pure(2, 1), DensityMatrix::basis(2, 1).unwrap()).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn product_state_round_trips() {
        let p = ClassicalDistribution::new(vec![0.25, 0.75]).unwrap();
        let rho = random_density_matrix(3, &mut stream(1)).unwrap();
        let chi = product_state(p.clone(), rho.clone());
        assert_eq!(chi.branches().len(), 1);
        assert_eq!(chi.branches()[0].weight, 1.0);
        assert_eq!(reduced_classical(&chi), p);
        assert_eq!(reduced_quantum(&chi), rho);

        let single = product_state(pure(1, 0), DensityMatrix::basis(2, 0).unwrap());
        assert_eq!(single.n_labels(), 1);
    }

    #[test]
    fn expectation_examples() {
        let chi = product_state(
            ClassicalDistribution::uniform(2).unwrap(),
            DensityMatrix::maximally_mixed(2).unwrap(),
        );
        let o_c = ClassicalObservable::new(vec![0.0, 1.0]).unwrap();
        let e = hybrid_expectation(&chi, &o_c, &z_obs()).unwrap();
        assert_eq!((e.classical, e.quantum, e.total), (0.5, 0.0, 0.5));

        let chi = HybridState::new(vec![
            HybridBranch::new(0.5, pure(2, 0), DensityMatrix::basis(2, 0).unwrap()).unwrap(),
            HybridBranch::new(0.5, pure(2, 1), DensityMatrix::basis(2, 0).unwrap()).unwrap(),
        ])
        .unwrap();
        let o_c = ClassicalObservable::new(vec![2.0, 4.0]).unwrap();
        let e = hybrid_expectation(&chi, &o_c, &z_obs()).unwrap();
        assert_eq!((e.classical, e.quantum, e.total), (3.0, 1.0, 4.0));

        let e = hybrid_expectation(&chi, &ClassicalObservable::zeros(2), &QuantumObservable::zeros(2)).unwrap();
        assert_eq!((e.classical, e.quantum, e.total), (0.0, 0.0, 0.0));
    }

    #[test]
    fn expectation_shape_errors() {
        let chi = two_branch();
        assert!(hybrid_expectation(&chi, &ClassicalObservable::zeros(3), &z_obs()).is_err());
        assert!(hybrid_expectation(&chi, &ClassicalObservable::zeros(2), &QuantumObservable::zeros(3)).is_err());
    }

    #[test]
    fn reduced_states() {
        let chi = two_branch();
        assert_eq!(reduced_classical(&chi).probs(), &[0.5, 0.5]);
        assert!(reduced_quantum(&chi)
            .matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed(2).unwrap().matrix())
            < 1e-15);
    }

    #[test]
    fn state_validation() {
        assert!(HybridState::new(vec![]).is_err());
        let b = HybridBranch::new(0.6, pure(2, 0), DensityMatrix::basis(2, 0).unwrap()).unwrap();
        assert!(HybridState::new(vec![b.clone()]).is_err());
        let other = HybridBranch::new(0.4, pure(3, 0), DensityMatrix::basis(2, 0).unwrap()).unwrap();
        assert!(matches!(HybridState::new(vec![b, other]), Err(Error::Shape(_))));
        assert!(HybridBranch::new(-0.1, pure(2, 0), DensityMatrix::basis(2, 0).unwrap()).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        let p = ClassicalDistribution::new(vec![0.3, 0.7]).unwrap();
        let rho = random_density_matrix(2, &mut stream(3)).unwrap();
        let dup = HybridState::new(vec![
            HybridBranch::new(0.5, p.clone(), rho.clone()).unwrap(),
            HybridBranch::new(0.5, p.clone(), rho.clone()).unwrap(),
        ])
        .unwrap();
        let c = canonicalize(&dup).unwrap();
        assert_eq!(c.branches().len(), 1);
        assert_eq!(c.branches()[0].weight, 1.0);
        assert_eq!(c.branches()[0].classical, p);

        let with_zero = HybridState::new(vec![
            HybridBranch::new(1.0, p.clone(), rho.clone()).unwrap(),
            HybridBranch::new(0.0, pure(2, 1), DensityMatrix::basis(2, 1).unwrap()).unwrap(),
        ])
        .unwrap();
        assert_eq!(canonicalize(&with_zero).unwrap().branches().len(), 1);
    }

    #[test]
    fn canonicalize_coalesces_point_labels() {
        let chi = HybridState::new(vec![
            HybridBranch::new(0.25, pure(2, 1), DensityMatrix::basis(2, 0).unwrap()).unwrap(),
            HybridBranch::new(0.5, pure(2, 0), DensityMatrix::basis(2, 0).unwrap()).unwrap(),
            HybridBranch::new(0.25, pure(2, 1), DensityMatrix::basis(2, 1).unwrap()).unwrap(),
        ])
        .unwrap();
        let c = canonicalize(&chi).unwrap();
        assert_eq!(c.branches().len(), 2);
        assert_eq!(c.branches()[0].classical.pure_label(), Some(1));
        assert_eq!(c.branches()[0].weight, 0.5);
        assert!(c.branches()[0]
            .quantum
            .matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed(2).unwrap().matrix())
            < 1e-15);
    }

    #[test]
    fn canonicalize_all_dropped_is_degenerate() {
        let chi = HybridState::from_branches_unchecked(vec![HybridBranch::new(
            1e-15,
            pure(1, 0),
            DensityMatrix::basis(1, 0).unwrap(),
        )
        .unwrap()]);
        assert!(matches!(canonicalize(&chi), Err(Error::Degenerate(_))));
    }

    fn random_state(n_branches: usize, labels: usize, dim: usize, seed: u64) -> HybridState {
        let mut rng = stream(seed);
        let w = crate::rng::dirichlet(n_branches, &mut rng);
        let branches = w
            .into_iter()
            .map(|q| {
                let p = if rng.random_bool(0.5) {
                    pure(labels, rng.random_range(0..labels))
                } else {
                    ClassicalDistribution::random(labels, &mut rng).unwrap()
                };
                HybridBranch::new(q, p, random_density_matrix(dim, &mut rng).unwrap()).unwrap()
            })
            .collect();
        HybridState::new(branches).unwrap()
    }

    fn random_hermitian(dim: usize, rng: &mut crate::rng::Stream) -> HermitianMatrix {
        let g = crate::rng::ginibre(dim, dim, rng);
        HermitianMatrix::symmetrized(ComplexMatrix::from_inner(&g + g.adjoint()))
    }

    #[test]
    fn canonicalize_preserves_expectations() {
        for seed in 0..20 {
            let chi = random_state(5, 3, 3, seed);
            let c = canonicalize(&chi).unwrap();
            let mut rng = stream(100 + seed);
            for _ in 0..10 {
                let o_c = ClassicalObservable::new((0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
                let o_q = QuantumObservable::new("O", random_hermitian(3, &mut rng));
                let a = hybrid_expectation(&chi, &o_c, &o_q).unwrap();
                let b = hybrid_expectation(&c, &o_c, &o_q).unwrap();
                assert!((a.classical - b.classical).abs() <= 1e-12);
                assert!((a.quantum - b.quantum).abs() <= 1e-12);
                assert!((a.total - b.total).abs() <= 1e-12);
            }
            assert_eq!(canonicalize(&c).unwrap(), c);
        }
    }

    #[test]
    fn reduced_states_match_expectation_components() {
        let chi = random_state(4, 3, 2, 77);
        let o_c = ClassicalObservable::new(vec![1.0, -2.0, 0.5]).unwrap();
        let e = hybrid_expectation(&chi, &o_c, &z_obs()).unwrap();
        let c = classical_expectation(&reduced_classical(&chi), &o_c).unwrap();
        let q = expectation(&reduced_quantum(&chi), &z_obs()).unwrap();
        assert!((c - e.classical).abs() < 1e-14);
        assert!((q - e.quantum).abs() < 1e-14);
        assert_eq!(e.total, e.classical + e.quantum);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let chi = random_state(3, 2, 2, 5);
        let text = serde_json::to_string(&chi).unwrap();
        let back: HybridState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, chi);

        let bad = r#"{"branches":[{"weight":0.5,"classical":[1.0],"quantum":{"re":[[1.0]],"im":[[0.0]]}}]}"#;
        assert!(serde_json::from_str::<HybridState>(bad).is_err());
        let extra = r#"{"branches":[],"x":1}"#;
        assert!(serde_json::from_str::<HybridState>(extra).is_err());
    }
}
