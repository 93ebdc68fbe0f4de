//! Quantum sector: density matrices, observables and Kraus channels.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, HermitianMatrix, Spectrum, C64};
use crate::rng;

pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = -1e-10;
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are one degenerate block.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Unit-trace positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let tr = matrix.matrix().trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::invariant(format!("density matrix trace {tr}")));
        }
        let min = matrix.min_eigenvalue();
        if min < POSITIVITY_TOL {
            return Err(Error::invariant(format!(
                "density matrix min eigenvalue {min:e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Output of a trace-preserving completely positive map; valid by construction.
    pub(crate) fn from_cptp_output(m: ComplexMatrix) -> Self {
        Self {
            matrix: HermitianMatrix::symmetrized(m),
        }
    }

    /// |ψ⟩⟨ψ| for a normalized copy of `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(Error::domain("state vector must be finite and non-zero"));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self {
            matrix: HermitianMatrix::projector(&v),
        })
    }

    /// |k⟩⟨k| in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::domain(format!("basis index {k} >= dimension {dim}")));
        }
        let mut d = vec![0.0; dim];
        d[k] = 1.0;
        Ok(Self {
            matrix: HermitianMatrix::from_real_diagonal(&d),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        Ok(Self {
            matrix: HermitianMatrix::identity(dim).scale(1.0 / dim as f64),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.matrix().trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.min_eigenvalue()
    }

    /// U ρ U†.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        let out = u.matmul(self.matrix())?.matmul(&u.adjoint())?;
        Ok(Self::from_cptp_output(out))
    }

    /// Σ w_k ρ_k for non-negative weights summing to one.
    pub(crate) fn mixture(parts: &[(f64, &DensityMatrix)]) -> Self {
        let dim = parts[0].1.dim();
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        let mut acc = DMatrix::<C64>::zeros(dim, dim);
        for (w, rho) in parts {
            acc += rho.matrix().as_dmatrix() * c64(w / total, 0.0);
        }
        Self::from_cptp_output(ComplexMatrix::from_inner(acc))
    }
}

/// Named Hermitian observable. Its spectrum is computed once on demand.
#[derive(Clone, Debug)]
pub struct QuantumObservable {
    matrix: HermitianMatrix,
    name: String,
    spectrum: OnceLock<Spectrum>,
}

impl QuantumObservable {
    pub fn new(name: impl Into<String>, matrix: HermitianMatrix) -> Self {
        Self {
            matrix,
            name: name.into(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new("0", HermitianMatrix::zeros(dim))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| self.matrix.eigh())
    }
}

/// ⟨O⟩ = Re Tr(ρO).
pub fn expectation(rho: &DensityMatrix, obs: &QuantumObservable) -> Result<f64> {
    trace_product(rho.matrix(), obs.matrix().matrix())
}

/// Re Tr(AB) for Hermitian A, B; errors if the imaginary part exceeds rounding.
pub(crate) fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.rows() != b.rows() || !a.is_square() || !b.is_square() {
        return Err(Error::shape(format!(
            "expectation of a {}-dim observable in a {}-dim state",
            b.rows(),
            a.rows()
        )));
    }
    let n = a.rows();
    let am = a.as_dmatrix();
    let bm = b.as_dmatrix();
    let mut acc = C64::default();
    for i in 0..n {
        for j in 0..n {
            acc += am[(i, j)] * bm[(j, i)];
        }
    }
    let scale = 1.0f64.max(b.max_abs());
    if acc.im.abs() > 1e-12 * scale {
        return Err(Error::invariant(format!(
            "Tr(ρO) has imaginary part {:e}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// Trace-preserving completely positive map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::domain("Kraus set must be non-empty"))?;
        let dim = first.rows();
        if ops.iter().any(|k| !k.is_square() || k.rows() != dim) {
            return Err(Error::shape("Kraus operators must share one square dimension"));
        }
        let defect = completeness_defect(&ops);
        if defect > COMPLETENESS_TOL {
            return Err(Error::invariant(format!(
                "Kraus completeness defect {defect:e}"
            )));
        }
        Ok(Self { ops })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            ops: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.ops[0].rows()
    }

    /// ‖Σ K†K − I‖.
    pub fn completeness_defect(&self) -> f64 {
        completeness_defect(&self.ops)
    }
}

fn completeness_defect(ops: &[ComplexMatrix]) -> f64 {
    let dim = ops[0].rows();
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    for k in ops {
        acc += k.as_dmatrix().adjoint() * k.as_dmatrix();
    }
    ComplexMatrix::from_inner(acc).max_abs_diff(&ComplexMatrix::identity(dim))
}

/// Σ_k K_k ρ K_k†.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if ch.dim() != rho.dim() {
        return Err(Error::shape(format!(
            "channel on dimension {} applied to state of dimension {}",
            ch.dim(),
            rho.dim()
        )));
    }
    let r = rho.matrix().as_dmatrix();
    let mut acc = DMatrix::<C64>::zeros(rho.dim(), rho.dim());
    for k in &ch.ops {
        let km = k.as_dmatrix();
        acc += km * r * km.adjoint();
    }
    Ok(DensityMatrix::from_cptp_output(ComplexMatrix::from_inner(acc)))
}

/// Normalized Wishart (GG†/Tr) state; full rank with probability one.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let g = rng::ginibre(dim, dim, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    Ok(DensityMatrix::from_cptp_output(ComplexMatrix::from_inner(
        w / c64(tr, 0.0),
    )))
}

/// Random channel from a Haar isometry `dim → dim·n_ops` cut into `n_ops`
/// square blocks.
pub fn random_kraus_channel<R: Rng + ?Sized>(
    dim: usize,
    n_ops: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    if dim == 0 || n_ops == 0 {
        return Err(Error::domain("dimension and operator count must be positive"));
    }
    let iso = rng::random_isometry(dim * n_ops, dim, rng);
    let m = iso.as_dmatrix();
    let ops = (0..n_ops)
        .map(|k| ComplexMatrix::from_inner(m.rows(k * dim, dim).into_owned()))
        .collect();
    KrausChannel::new(ops)
}

/// Random channel whose dual fixes `obs`: Tr(Λ(ρ)O) = Tr(ρO) for every ρ.
///
/// Built as a convex mixture of unitaries that are block diagonal in the
/// eigenbasis of `obs`, each block a Haar unitary on one degenerate eigenspace.
pub fn conserving_channel<R: Rng + ?Sized>(
    obs: &QuantumObservable,
    rng: &mut R,
) -> Result<KrausChannel> {
    let spectrum = obs.spectrum();
    let blocks = spectrum.degenerate_blocks(DEGENERACY_TOL);
    let dim = obs.dim();
    let w = spectrum.vectors.as_dmatrix();
    let n_components = rng.random_range(1..=3usize);
    let weights = rng::dirichlet(n_components, rng);
    let mut ops = Vec::with_capacity(n_components);
    for &weight in &weights {
        let mut inner = DMatrix::<C64>::zeros(dim, dim);
        for block in &blocks {
            let u = rng::haar_unitary(block.len(), rng);
            for (a, &ia) in block.iter().enumerate() {
                for (b, &ib) in block.iter().enumerate() {
                    inner[(ia, ib)] = u.get(a, b);
                }
            }
        }
        let full = w * inner * w.adjoint() * c64(weight.sqrt(), 0.0);
        ops.push(ComplexMatrix::from_inner(full));
    }
    KrausChannel::new(ops)
}
