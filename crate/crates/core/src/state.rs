//! State representations in a fixed reference (computational) basis.
//!
//! Indices are 0-based in storage. The reference basis is always the basis
//! the amplitudes or matrix entries are stored in.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::C64;

/// Tolerance on the squared norm of pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Norms below this are rejected when normalizing.
pub const MIN_NORM: f64 = 1e-12;
/// Entrywise Hermiticity tolerance for density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted in a density matrix.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues at or below this count as zero when determining rank.
pub const RANK_TOL: f64 = 1e-12;

/// Selects one side of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// A normalized pure state `Σ_i c_i |i⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<C64>,
}

impl PureState {
    /// Builds a state from amplitudes that must already be normalized.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyState);
        }
        let norm_sqr: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    /// Normalizes `amplitudes`, returning the state and the factor `1/‖v‖` applied.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<(Self, f64)> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyState);
        }
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < MIN_NORM {
            return Err(Error::ZeroNorm(norm));
        }
        let factor = 1.0 / norm;
        let v = DVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|c| c * factor));
        Ok((Self { amplitudes: v }, factor))
    }

    /// Real amplitudes, normalized.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect()).map(|(s, _)| s)
    }

    /// The basis state `|k⟩` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut v = DVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    /// The uniform superposition `Σ_i |i⟩/√d`.
    pub fn maximally_coherent(dim: usize) -> Self {
        assert!(dim >= 1);
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            amplitudes: DVector::from_element(dim, a),
        }
    }

    pub(crate) fn from_vector_unchecked(amplitudes: DVector<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// Populations `|c_i|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// The projector `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(&self.amplitudes * self.amplitudes.adjoint())
    }
}

/// A bipartite pure state `Σ_ij c_ij |i⟩_A|j⟩_B`, stored as the `d_A × d_B`
/// coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitePureState {
    coeffs: DMatrix<C64>,
}

impl BipartitePureState {
    pub fn new(coeffs: DMatrix<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyState);
        }
        let norm_sqr = coeffs.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { coeffs })
    }

    /// Normalizes a coefficient matrix, returning the factor applied.
    pub fn normalized(coeffs: DMatrix<C64>) -> Result<(Self, f64)> {
        if coeffs.is_empty() {
            return Err(Error::EmptyState);
        }
        let norm = coeffs.norm();
        if norm < MIN_NORM {
            return Err(Error::ZeroNorm(norm));
        }
        let factor = 1.0 / norm;
        Ok((
            Self {
                coeffs: coeffs * C64::new(factor, 0.0),
            },
            factor,
        ))
    }

    /// Builds from row-major amplitudes (`index = i·d_B + j`), normalizing.
    pub fn from_row_major(dim_a: usize, dim_b: usize, amplitudes: &[C64]) -> Result<(Self, f64)> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::EmptyState);
        }
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                expected: dim_a * dim_b,
                found: amplitudes.len(),
            });
        }
        Self::normalized(DMatrix::from_row_slice(dim_a, dim_b, amplitudes))
    }

    /// Real coefficient rows, normalized.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim_a = rows.len();
        let dim_b = rows.first().map_or(0, |r| r.len());
        let flat: Vec<C64> = rows.iter().flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0))).collect();
        Self::from_row_major(dim_a, dim_b, &flat).map(|(s, _)| s)
    }

    /// `|a⟩ ⊗ |b⟩`.
    pub fn product(a: &PureState, b: &PureState) -> Self {
        let coeffs = a.vector() * b.vector().transpose();
        Self { coeffs }
    }

    pub fn dim_a(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn coeffs(&self) -> &DMatrix<C64> {
        &self.coeffs
    }

    /// The same state as a `d_A·d_B`-dimensional pure state in the product basis.
    pub fn flatten(&self) -> PureState {
        let (da, db) = self.coeffs.shape();
        let v = DVector::from_iterator(
            da * db,
            (0..da)
                .flat_map(|i| (0..db).map(move |j| (i, j)))
                .map(|(i, j)| self.coeffs[(i, j)]),
        );
        PureState::from_vector_unchecked(v)
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c {
            return Err(Error::NotSquare(r, c));
        }
        if r == 0 {
            return Err(Error::EmptyState);
        }
        let herm = hermitian_deviation(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let out = Self::from_matrix_unchecked(matrix);
        let min = out.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(out)
    }

    /// A diagonal (incoherent) state with the given populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(populations.len(), populations.iter().map(|&p| C64::new(p, 0.0)));
        Self::new(DMatrix::from_diagonal(&d))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.projector()
    }

    /// Hermitizes `matrix` without further checks. Callers guarantee the
    /// remaining invariants up to rounding.
    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        let adj = matrix.adjoint();
        let matrix = (matrix + adj) * C64::new(0.5, 0.0);
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Diagonal entries as real populations.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().0
    }

    /// Eigenpairs sorted by descending eigenvalue; column `k` of the matrix is
    /// the eigenvector for eigenvalue `k`.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        sorted_eigen(&self.matrix)
    }

    /// Number of eigenvalues above [`RANK_TOL`].
    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > RANK_TOL).count()
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }

    /// Re-runs the invariant checks at caller-chosen tolerances.
    pub fn check(&self, psd_tol: f64, trace_tol: f64) -> Result<()> {
        let herm = hermitian_deviation(&self.matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > trace_tol {
            return Err(Error::InvalidTrace(tr));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -psd_tol {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }
}

fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn sorted_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |i, k| eig.eigenvectors[(i, order[k])]);
    (values, vectors)
}

/// A finite pure-state decomposition `{p_i, |ψ_i⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    /// Weight-sum tolerance.
    pub const WEIGHT_TOL: f64 = 1e-10;

    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::InvalidEnsemble("no members".into()));
        };
        let dim = first.dim();
        let mut total = 0.0;
        for (w, s) in &members {
            if w.is_nan() || *w < 0.0 {
                return Err(Error::InvalidEnsemble(format!("negative weight {w}")));
            }
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            total += w;
        }
        if (total - 1.0).abs() > Self::WEIGHT_TOL {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    /// `Σ_i p_i |ψ_i⟩⟨ψ_i|`.
    pub fn density_matrix(&self) -> DensityMatrix {
        let d = self.dim();
        let mut m = DMatrix::<C64>::zeros(d, d);
        for (w, s) in &self.members {
            m += s.vector() * s.vector().adjoint() * C64::new(*w, 0.0);
        }
        DensityMatrix::from_matrix_unchecked(m)
    }

    /// Frobenius distance between the realized state and `rho`.
    pub fn reconstruction_error(&self, rho: &DensityMatrix) -> f64 {
        self.density_matrix().frobenius_distance(rho)
    }
}
