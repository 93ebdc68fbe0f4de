//! Three distinguishable particles (S, E, M) on an `L`-site ring.
//!
//! Basis ordering is `|x_S⟩ ⊗ |x_E⟩ ⊗ |x_M⟩`, position basis, S slowest.
//! Quasimomenta use the branch `k̃ = 2πm/L`, `m ∈ {−⌊L/2⌋, …, ⌈L/2⌉−1}`.
//!
//! Lattice momentum is only conserved modulo `2π`. The additive sum
//! `P_S + P_E + P_M` of branch values is conserved by couplings whose
//! momentum-basis matrix elements keep `m_a + m_b` fixed as an integer; the
//! default model keeps only those (normal) processes and drops the umklapp
//! part of the density-density interaction. `umklapp: true` restores the
//! full interaction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, tensor_all, ComplexMatrix, HermitianMatrix, C64, DEFAULT_DIM_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Particle {
    S,
    E,
    M,
}

impl Particle {
    pub const ALL: [Particle; 3] = [Particle::S, Particle::E, Particle::M];

    fn slot(self) -> usize {
        self as usize
    }
}

/// One additive piece of the lattice Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LatticeTerm {
    Hopping { particle: Particle, amplitude: f64 },
    DensityDensity { a: Particle, b: Particle, strength: f64 },
}

impl LatticeTerm {
    fn couples(&self, x: Particle, y: Particle) -> bool {
        match *self {
            LatticeTerm::Hopping { .. } => false,
            LatticeTerm::DensityDensity { a, b, .. } => (a == x && b == y) || (a == y && b == x),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingLatticeModel {
    pub n_sites: usize,
    pub hop_s: f64,
    pub hop_e: f64,
    pub hop_m: f64,
    pub g_se: f64,
    pub g_em: f64,
    /// Direct S–M coupling. Anything but zero is rejected by the builder.
    #[serde(default)]
    pub g_sm: f64,
    pub range: usize,
    #[serde(default)]
    pub umklapp: bool,
}

impl Default for RingLatticeModel {
    fn default() -> Self {
        Self {
            n_sites: 5,
            hop_s: 1.0,
            hop_e: 1.0,
            hop_m: 1.0,
            g_se: 0.5,
            g_em: 0.5,
            g_sm: 0.0,
            range: 1,
            umklapp: false,
        }
    }
}

impl RingLatticeModel {
    pub fn validate(&self) -> Result<()> {
        let l = self.n_sites;
        if l == 0 {
            return Err(Error::Config("n_sites must be positive".into()));
        }
        if l.checked_pow(3).is_none_or(|d| d > DEFAULT_DIM_CAP) {
            return Err(Error::Capacity {
                requested: l.saturating_pow(3),
                cap: DEFAULT_DIM_CAP,
            });
        }
        let params = [self.hop_s, self.hop_e, self.hop_m, self.g_se, self.g_em, self.g_sm];
        if params.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("lattice model parameters"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n_sites.pow(3)
    }

    pub fn hop(&self, p: Particle) -> f64 {
        match p {
            Particle::S => self.hop_s,
            Particle::E => self.hop_e,
            Particle::M => self.hop_m,
        }
    }

    /// Term list of `H_S + H_E + H_M + H_SE + H_EM`, plus the S–M term when
    /// one was requested so that the locality gate can see it.
    pub fn terms(&self) -> Vec<LatticeTerm> {
        let mut terms: Vec<LatticeTerm> = Particle::ALL
            .iter()
            .map(|&p| LatticeTerm::Hopping { particle: p, amplitude: self.hop(p) })
            .collect();
        terms.push(LatticeTerm::DensityDensity { a: Particle::S, b: Particle::E, strength: self.g_se });
        terms.push(LatticeTerm::DensityDensity { a: Particle::E, b: Particle::M, strength: self.g_em });
        if self.g_sm != 0.0 {
            terms.push(LatticeTerm::DensityDensity { a: Particle::S, b: Particle::M, strength: self.g_sm });
        }
        terms
    }
}

/// Rejects any term acting jointly on S and M.
pub fn check_locality(terms: &[LatticeTerm]) -> Result<()> {
    if let Some(t) = terms.iter().find(|t| t.couples(Particle::S, Particle::M)) {
        return Err(Error::Locality(format!("direct S-M term {t:?}")));
    }
    Ok(())
}

/// Branch integers `m` in ascending order.
pub fn momentum_branch(l: usize) -> Vec<i64> {
    let l = l as i64;
    (-(l / 2)..(l + 1) / 2).collect()
}

pub fn quasimomenta(l: usize) -> Vec<f64> {
    momentum_branch(l)
        .into_iter()
        .map(|m| 2.0 * PI * m as f64 / l as f64)
        .collect()
}

/// One-site translation `T|x⟩ = |x+1⟩`.
pub fn translation(l: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(l, l).into_dmatrix();
    for x in 0..l {
        m[((x + 1) % l, x)] = c64(1.0, 0.0);
    }
    ComplexMatrix::from_inner(m)
}

/// `−J(T + T†)`.
pub fn hopping(l: usize, amplitude: f64) -> HermitianMatrix {
    let t = translation(l);
    HermitianMatrix::symmetrized((&t + &t.adjoint()).scale_real(-amplitude))
}

/// Columns are plane waves: `F[x, a] = e^{i k_a x}/√L`.
pub fn fourier(l: usize) -> ComplexMatrix {
    let k = quasimomenta(l);
    let norm = (l as f64).sqrt().recip();
    let mut m = ComplexMatrix::zeros(l, l).into_dmatrix();
    for x in 0..l {
        for (a, &ka) in k.iter().enumerate() {
            m[(x, a)] = C64::from_polar(norm, ka * x as f64);
        }
    }
    ComplexMatrix::from_inner(m)
}

/// Single-particle quasimomentum `F diag(k̃) F†`.
pub fn momentum_operator(l: usize) -> HermitianMatrix {
    let f = fourier(l);
    let d = ComplexMatrix::from_diagonal(&quasimomenta(l).iter().map(|&k| c64(k, 0.0)).collect::<Vec<_>>());
    HermitianMatrix::symmetrized(&(&f * &d) * &f.adjoint())
}

/// Distinct ring offsets `{d, −d} mod L`.
fn offsets(l: usize, range: usize) -> Vec<usize> {
    let a = range % l;
    let b = (l - a) % l;
    if a == b { vec![a] } else { vec![a, b] }
}

/// Two-particle density-density operator `Σ_x Σ_r n_x ⊗ n_{x+r}` over the
/// offsets `±range`, optionally with its umklapp part removed.
pub fn pair_interaction(l: usize, range: usize, umklapp: bool) -> HermitianMatrix {
    let mut diag = vec![0.0; l * l];
    for x in 0..l {
        for r in offsets(l, range) {
            diag[x * l + (x + r) % l] += 1.0;
        }
    }
    let w = HermitianMatrix::from_real_diagonal(&diag);
    if umklapp {
        return w;
    }
    let f = fourier(l);
    let f2 = tensor_all(&[&f, &f]).expect("L^2 within cap");
    let mut wm = (&(&f2.adjoint() * w.matrix()) * &f2).into_dmatrix();
    let m = momentum_branch(l);
    let total = |idx: usize| m[idx / l] + m[idx % l];
    for i in 0..l * l {
        for j in 0..l * l {
            if total(i) != total(j) {
                wm[(i, j)] = c64(0.0, 0.0);
            }
        }
    }
    let back = &(&f2 * &ComplexMatrix::from_inner(wm)) * &f2.adjoint();
    HermitianMatrix::symmetrized(back)
}

/// Embeds single-particle `op` at `slot` of the three-particle space.
pub fn embed_one(op: &ComplexMatrix, p: Particle, l: usize) -> ComplexMatrix {
    let eye = ComplexMatrix::identity(l);
    let mut factors = [&eye, &eye, &eye];
    factors[p.slot()] = op;
    tensor_all(&factors).expect("validated dimension")
}

/// Embeds a two-particle operator on adjacent particles `(S,E)` or `(E,M)`.
fn embed_pair(op: &ComplexMatrix, a: Particle, b: Particle, l: usize) -> Result<ComplexMatrix> {
    let eye = ComplexMatrix::identity(l);
    match (a, b) {
        (Particle::S, Particle::E) => tensor_all(&[op, &eye]),
        (Particle::E, Particle::M) => tensor_all(&[&eye, op]),
        _ => Err(Error::Locality(format!("no pair embedding for {a:?}-{b:?}"))),
    }
}

/// `H = Σ hopping + Σ g · pair interaction`, after the locality gate.
pub fn build_hamiltonian(model: &RingLatticeModel) -> Result<HermitianMatrix> {
    model.validate()?;
    let terms = model.terms();
    check_locality(&terms)?;
    let l = model.n_sites;
    let pair = pair_interaction(l, model.range, model.umklapp);
    let mut h = ComplexMatrix::zeros(model.dim(), model.dim());
    for term in &terms {
        let piece = match *term {
            LatticeTerm::Hopping { particle, amplitude } => embed_one(hopping(l, amplitude).matrix(), particle, l),
            LatticeTerm::DensityDensity { a, b, strength } => {
                embed_pair(pair.matrix(), a, b, l)?.scale_real(strength)
            }
        };
        h = h.try_add(&piece)?;
    }
    Ok(HermitianMatrix::symmetrized(h))
}

/// Normalized real packet centred on `x0` with width `sigma`, at rest.
pub fn wavepacket(l: usize, x0: f64, sigma: f64) -> Result<Vec<C64>> {
    if !(sigma > 0.0 && sigma.is_finite() && x0.is_finite()) {
        return Err(Error::Config("packet width must be positive and centre finite".into()));
    }
    let half = l as f64 / 2.0;
    let amp: Vec<f64> = (0..l)
        .map(|x| {
            let dx = (x as f64 - x0 + half).rem_euclid(l as f64) - half;
            (-dx * dx / (4.0 * sigma * sigma)).exp()
        })
        .collect();
    let norm = amp.iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok(amp.into_iter().map(|a| c64(a / norm, 0.0)).collect())
}

/// Kronecker product of state vectors, first factor slowest.
pub fn kron_vec(parts: &[&[C64]]) -> Vec<C64> {
    parts.iter().fold(vec![c64(1.0, 0.0)], |acc, v| {
        acc.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix_commutator_norm;

    #[test]
    fn branch_ranges() {
        assert_eq!(momentum_branch(5), vec![-2, -1, 0, 1, 2]);
        assert_eq!(momentum_branch(4), vec![-2, -1, 0, 1]);
        assert_eq!(momentum_branch(1), vec![0]);
    }

    #[test]
    fn fourier_is_unitary_and_diagonalizes_translation() {
        for l in [1, 2, 5, 6] {
            let f = fourier(l);
            assert!((&f.adjoint() * &f).max_abs_diff(&ComplexMatrix::identity(l)) < 1e-14);
            let d = &(&f.adjoint() * &translation(l)) * &f;
            for (a, k) in quasimomenta(l).iter().enumerate() {
                assert!((d.get(a, a) - C64::from_polar(1.0, -k)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn momentum_commutes_with_hopping() {
        let l = 6;
        assert!(commutator_hh(&momentum_operator(l), &hopping(l, 0.8)) < 1e-13);
    }

    fn commutator_hh(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        matrix_commutator_norm(a.matrix(), b.matrix()).unwrap()
    }

    #[test]
    fn hamiltonian_is_translation_invariant() {
        for umklapp in [false, true] {
            let model = RingLatticeModel { umklapp, g_se: 0.9, g_em: -0.4, range: 2, ..Default::default() };
            let h = build_hamiltonian(&model).unwrap();
            let t = translation(5);
            let t3 = tensor_all(&[&t, &t, &t]).unwrap();
            assert!(matrix_commutator_norm(h.matrix(), &t3).unwrap() < 1e-12);
        }
    }

    #[test]
    fn locality_gate() {
        let model = RingLatticeModel { g_sm: 0.1, ..Default::default() };
        assert!(matches!(build_hamiltonian(&model), Err(Error::Locality(_))));
        assert!(check_locality(&RingLatticeModel::default().terms()).is_ok());
    }

    #[test]
    fn capacity_and_validation() {
        let too_big = RingLatticeModel { n_sites: 17, ..Default::default() };
        assert!(matches!(too_big.validate(), Err(Error::Capacity { .. })));
        let nan = RingLatticeModel { hop_s: f64::NAN, ..Default::default() };
        assert!(nan.validate().is_err());
    }

    #[test]
    fn normal_interaction_conserves_pair_momentum() {
        let l = 5;
        let p = momentum_operator(l);
        let eye = ComplexMatrix::identity(l);
        let p_pair = HermitianMatrix::symmetrized(
            &tensor_all(&[p.matrix(), &eye]).unwrap() + &tensor_all(&[&eye, p.matrix()]).unwrap(),
        );
        let normal = pair_interaction(l, 1, false);
        assert!(commutator_hh(&normal, &p_pair) < 1e-12);
        let full = pair_interaction(l, 1, true);
        assert!(commutator_hh(&full, &p_pair) > 1e-3);
    }

    #[test]
    fn packet_is_normalized_and_at_rest() {
        let psi = wavepacket(5, 2.0, 0.7).unwrap();
        assert!((psi.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-15);
        let p = momentum_operator(5);
        assert!(p.matrix().quadratic_form(&psi).re.abs() < 1e-14);
        assert!(wavepacket(5, 0.0, 0.0).is_err());
    }
}
