//! Classical sector over a finite label set `0..n`.
//!
//! Distributions are column vectors and stochastic maps are column
//! stochastic, so a map acts as `V · p`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::group_close;
use crate::rng;

pub const PROB_SUM_TOL: f64 = 1e-12;
pub const NEGATIVE_CLAMP: f64 = -1e-15;
/// Observable values closer than this form one degenerate class.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Probability distribution over labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::domain("distribution needs at least one label"));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < NEGATIVE_CLAMP) {
            return Err(Error::invariant(format!("invalid probability {bad}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::invariant(format!("probabilities sum to {sum}")));
        }
        Ok(Self::clamped(probs))
    }

    fn clamped(mut probs: Vec<f64>) -> Self {
        for p in &mut probs {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        Self { probs }
    }

    /// Point mass on `label`.
    pub fn point(n: usize, label: usize) -> Result<Self> {
        if label >= n {
            return Err(Error::domain(format!("label {label} out of range for {n} labels")));
        }
        let mut probs = vec![0.0; n];
        probs[label] = 1.0;
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("distribution needs at least one label"));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("distribution needs at least one label"));
        }
        Ok(Self {
            probs: rng::dirichlet(n, rng),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// The label carrying all probability, if the distribution is a point mass.
    pub fn pure_label(&self) -> Option<usize> {
        let mut found = None;
        for (i, &p) in self.probs.iter().enumerate() {
            if p == 1.0 && found.is_none() {
                found = Some(i);
            } else if p != 0.0 {
                return None;
            }
        }
        found
    }

    /// Weighted mixture Σ w_k p_k; weights must sum to one.
    pub(crate) fn mixture(parts: &[(f64, &ClassicalDistribution)]) -> Self {
        let n = parts[0].1.len();
        let mut probs = vec![0.0; n];
        for (w, p) in parts {
            for (acc, x) in probs.iter_mut().zip(p.probs.iter()) {
                *acc += w * x;
            }
        }
        Self::clamped(probs)
    }
}

/// Column-stochastic `n × n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMap {
    n: usize,
    /// Row-major entries.
    entries: Vec<f64>,
}

impl StochasticMap {
    /// Builds from row-major entries, checking column sums.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::shape(format!(
                "stochastic map of size {n} needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(bad) = entries
            .iter()
            .find(|x| !x.is_finite() || **x < NEGATIVE_CLAMP || **x > 1.0 + 1e-15)
        {
            return Err(Error::invariant(format!("stochastic entry {bad} out of range")));
        }
        for j in 0..n {
            let col: f64 = (0..n).map(|i| entries[i * n + j]).sum();
            if (col - 1.0).abs() > PROB_SUM_TOL {
                return Err(Error::invariant(format!("column {j} sums to {col}")));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    /// Deterministic map sending label `j` to `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::domain(format!("{perm:?} is not a permutation")));
            }
        }
        let mut entries = vec![0.0; n * n];
        for (j, &i) in perm.iter().enumerate() {
            entries[i * n + j] = 1.0;
        }
        Ok(Self { n, entries })
    }

    /// Every column equal to the uniform distribution.
    pub fn uniformizer(n: usize) -> Self {
        Self {
            n,
            entries: vec![1.0 / n as f64; n * n],
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Column `j`: the distribution label `j` is sent to.
    pub fn column(&self, j: usize) -> ClassicalDistribution {
        ClassicalDistribution::clamped((0..self.n).map(|i| self.entry(i, j)).collect())
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &StochasticMap) -> Result<StochasticMap> {
        if self.n != other.n {
            return Err(Error::shape(format!("compose {} with {}", self.n, other.n)));
        }
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = (0..n).map(|k| self.entry(i, k) * other.entry(k, j)).sum();
            }
        }
        Ok(Self { n, entries })
    }

    /// Largest deviation of a column sum from one.
    pub fn column_sum_defect(&self) -> f64 {
        (0..self.n)
            .map(|j| ((0..self.n).map(|i| self.entry(i, j)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Real value per label.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalObservable {
    values: Vec<f64>,
}

impl ClassicalObservable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("observable needs at least one label"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("classical observable"));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Σ_i p_i o_i.
pub fn classical_expectation(p: &ClassicalDistribution, obs: &ClassicalObservable) -> Result<f64> {
    if p.len() != obs.len() {
        return Err(Error::shape(format!(
            "distribution over {} labels, observable over {}",
            p.len(),
            obs.len()
        )));
    }
    Ok(p.probs.iter().zip(obs.values.iter()).map(|(p, o)| p * o).sum())
}

/// V · p.
pub fn apply_stochastic(v: &StochasticMap, p: &ClassicalDistribution) -> Result<ClassicalDistribution> {
    if v.n != p.len() {
        return Err(Error::shape(format!(
            "map of size {} applied to {} labels",
            v.n,
            p.len()
        )));
    }
    let probs = (0..v.n)
        .map(|i| (0..v.n).map(|j| v.entry(i, j) * p.probs[j]).sum())
        .collect();
    Ok(ClassicalDistribution::clamped(probs))
}

/// Random map preserving ⟨O⟩ for every input distribution: a convex mixture
/// of permutations that only move labels within a degenerate value class.
pub fn conserving_stochastic_map<R: Rng + ?Sized>(
    obs: &ClassicalObservable,
    rng: &mut R,
) -> StochasticMap {
    let n = obs.len();
    let classes = group_close(&obs.values, DEGENERACY_TOL);
    let n_components = rng.random_range(1..=3usize);
    let weights = rng::dirichlet(n_components, rng);
    let mut entries = vec![0.0; n * n];
    for w in weights {
        for class in &classes {
            let perm = rng::permutation(class.len(), rng);
            for (a, &src) in class.iter().enumerate() {
                let dst = class[perm[a]];
                entries[dst * n + src] += w;
            }
        }
    }
    StochasticMap { n, entries }
}

/// Column-stochastic map with independent flat-Dirichlet columns.
pub fn random_stochastic_map<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StochasticMap> {
    if n == 0 {
        return Err(Error::domain("map size must be positive"));
    }
    let mut entries = vec![0.0; n * n];
    for j in 0..n {
        for (i, x) in rng::dirichlet(n, rng).into_iter().enumerate() {
            entries[i * n + j] = x;
        }
    }
    Ok(StochasticMap { n, entries })
}
