//! Seeded random streams and random matrix primitives.
//!
//! Every random quantity in the crate is drawn from a [`ChaCha8Rng`]. Trial
//! `k` of a run seeded with `s` uses the stream `seed_from_u64(s ^ k)`, so a
//! trial's draws do not depend on which thread runs it or in what order.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{c64, ComplexMatrix, C64};

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream for trial `k` of a run seeded with `seed`.
pub fn trial_stream(seed: u64, k: u64) -> Stream {
    stream(seed ^ k)
}

/// Standard complex Gaussian with E|z|² = 1.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with i.i.d. complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    // Filled row by row so draws are independent of nalgebra's storage order.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`), Haar
/// distributed via QR of a Ginibre matrix with the R-diagonal phases removed.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rows >= cols && cols > 0, "isometry needs rows >= cols > 0");
    let g = ginibre(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            for i in 0..rows {
                q[(i, j)] *= phase;
            }
        }
    }
    gram_schmidt_polish(&mut q);
    ComplexMatrix::from_inner(q)
}

/// Haar-random unitary.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(dim, dim, rng)
}

/// One pass of modified Gram-Schmidt to push column orthonormality to
/// machine precision.
fn gram_schmidt_polish(q: &mut DMatrix<C64>) {
    let cols = q.ncols();
    for j in 0..cols {
        for k in 0..j {
            let proj: C64 = (0..q.nrows()).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
            for i in 0..q.nrows() {
                let qk = q[(i, k)];
                q[(i, j)] -= proj * qk;
            }
        }
        let norm = (0..q.nrows())
            .map(|i| q[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        for i in 0..q.nrows() {
            q[(i, j)] /= norm;
        }
    }
}

/// Uniform draw from the probability simplex (flat Dirichlet).
pub fn dirichlet<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        // Exp1 returning all zeros has probability zero; fall back to uniform.
        return vec![1.0 / n as f64; n];
    }
    for x in &mut w {
        *x /= total;
    }
    w
}

/// Fisher-Yates permutation of `0..n`.
pub fn permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic() {
        let a: Vec<u64> = (0..4).map(|_| stream(7).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| stream(7).random()).collect();
        assert_eq!(a, b);
        let x: u64 = trial_stream(7, 1).random();
        let y: u64 = trial_stream(7, 2).random();
        assert_ne!(x, y);
    }

    #[test]
    fn isometry_has_orthonormal_columns() {
        let mut rng = stream(3);
        for (r, c) in [(4, 4), (12, 3), (1, 1), (6, 2)] {
            let v = random_isometry(r, c, &mut rng);
            let g = &v.adjoint() * &v;
            assert!(g.max_abs_diff(&ComplexMatrix::identity(c)) < 1e-14, "{r}x{c}");
        }
    }

    #[test]
    fn dirichlet_is_normalized() {
        let mut rng = stream(11);
        for n in 1..8 {
            let w = dirichlet(n, &mut rng);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert!(w.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn permutation_is_bijection() {
        let mut rng = stream(5);
        let mut p = permutation(9, &mut rng);
        p.sort_unstable();
        assert_eq!(p, (0..9).collect::<Vec<_>>());
    }
}
