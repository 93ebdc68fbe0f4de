//! Reference computations that share no code with the library's numerics:
//! Taylor-series propagation on plain vectors and a momentum-basis build of
//! the ring-lattice Hamiltonian.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub type Dense = Vec<Vec<C>>;

pub fn zeros(n: usize) -> Dense {
    vec![vec![C::new(0.0, 0.0); n]; n]
}

pub fn matvec(m: &Dense, v: &[C]) -> Vec<C> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == C::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// `exp(−iHt)` by a truncated Taylor series with `terms` terms.
pub fn taylor_unitary(h: &Dense, t: f64, terms: usize) -> Dense {
    let n = h.len();
    let mut result = zeros(n);
    let mut term = zeros(n);
    for i in 0..n {
        result[i][i] = C::new(1.0, 0.0);
        term[i][i] = C::new(1.0, 0.0);
    }
    let factor = C::new(0.0, -t);
    for k in 1..terms {
        term = matmul(&term, h);
        let scale = factor / k as f64;
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x *= scale;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    result
}

/// `exp(−iHt)ψ` in `n_sub` Taylor substeps of `order` terms each.
pub fn taylor_propagate(h: &Dense, psi: &[C], t: f64, n_sub: usize, order: usize) -> Vec<C> {
    let dt = t / n_sub as f64;
    let mut state = psi.to_vec();
    for _ in 0..n_sub {
        let mut term = state.clone();
        let mut acc = state.clone();
        for k in 1..order {
            term = matvec(h, &term);
            let s = C::new(0.0, -dt) / k as f64;
            for x in term.iter_mut() {
                *x *= s;
            }
            for (a, x) in acc.iter_mut().zip(&term) {
                *a += x;
            }
        }
        state = acc;
    }
    state
}

pub fn branch(l: usize) -> Vec<i64> {
    let l = l as i64;
    (-(l / 2)..(l + 1) / 2).collect()
}

pub fn momenta(l: usize) -> Vec<f64> {
    branch(l).iter().map(|&m| 2.0 * PI * m as f64 / l as f64).collect()
}

pub struct LatticeOracle {
    pub l: usize,
    pub h: Dense,
    pub k: Vec<f64>,
}

/// Ring lattice of three particles written directly in the plane-wave basis,
/// keeping only interaction matrix elements with `m_a + m_b` conserved.
pub fn lattice_oracle(l: usize, hops: [f64; 3], g_se: f64, g_em: f64, range: usize) -> LatticeOracle {
    let m = branch(l);
    let k = momenta(l);
    let dim = l * l * l;
    let idx = |a: usize, b: usize, c: usize| (a * l + b) * l + c;
    let mut offs = vec![range % l];
    let neg = (l - range % l) % l;
    if neg != offs[0] {
        offs.push(neg);
    }
    // Pair element for (a,b) -> (a',b'): second particle's momentum change q2.
    let pair = |a: usize, b: usize, a2: usize, b2: usize| -> C {
        if m[a] + m[b] != m[a2] + m[b2] {
            return C::new(0.0, 0.0);
        }
        let q2 = k[b2] - k[b];
        offs.iter().map(|&r| C::from_polar(1.0, -q2 * r as f64)).sum::<C>() / l as f64
    };
    let mut h = zeros(dim);
    for a in 0..l {
        for b in 0..l {
            for c in 0..l {
                let i = idx(a, b, c);
                h[i][i] += C::new(-2.0 * (hops[0] * k[a].cos() + hops[1] * k[b].cos() + hops[2] * k[c].cos()), 0.0);
                for a2 in 0..l {
                    for b2 in 0..l {
                        h[idx(a2, b2, c)][i] += pair(a, b, a2, b2) * g_se;
                    }
                }
                for b2 in 0..l {
                    for c2 in 0..l {
                        h[idx(a, b2, c2)][i] += pair(b, c, b2, c2) * g_em;
                    }
                }
            }
        }
    }
    LatticeOracle { l, h, k }
}

impl LatticeOracle {
    /// Product of real packets, transformed to the plane-wave basis.
    pub fn packet_state(&self, centres: [f64; 3], width: f64) -> Vec<C> {
        let l = self.l;
        let one = |x0: f64| -> Vec<C> {
            let half = l as f64 / 2.0;
            let amp: Vec<f64> = (0..l)
                .map(|x| {
                    let dx = (x as f64 - x0 + half).rem_euclid(l as f64) - half;
                    (-dx * dx / (4.0 * width * width)).exp()
                })
                .collect();
            let norm = amp.iter().map(|a| a * a).sum::<f64>().sqrt();
            self.k
                .iter()
                .map(|&kk| {
                    (0..l)
                        .map(|x| C::from_polar(amp[x] / norm, -kk * x as f64))
                        .sum::<C>()
                        / (l as f64).sqrt()
                })
                .collect()
        };
        let (s, e, m) = (one(centres[0]), one(centres[1]), one(centres[2]));
        let mut psi = Vec::with_capacity(l * l * l);
        for a in &s {
            for b in &e {
                for c in &m {
                    psi.push(a * b * c);
                }
            }
        }
        psi
    }

    /// `(⟨P_S⟩, ⟨P_E⟩, ⟨P_M⟩)`; momentum operators are diagonal here.
    pub fn momenta_of(&self, psi: &[C]) -> [f64; 3] {
        let l = self.l;
        let mut out = [0.0; 3];
        for (i, z) in psi.iter().enumerate() {
            let p = z.norm_sqr();
            let (a, b, c) = (i / (l * l), (i / l) % l, i % l);
            out[0] += p * self.k[a];
            out[1] += p * self.k[b];
            out[2] += p * self.k[c];
        }
        out
    }
}
