//! Dense density matrices and unitaries in the reference (energy) basis.
//!
//! Index 0 of every matrix is the ground state. All entropies are in bits.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Tolerance used when validating states and unitaries.
pub const VALIDITY_TOL: f64 = 1e-10;
/// Tolerance used for numerical assertions on derived quantities.
pub const ASSERT_TOL: f64 = 1e-8;
/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 16;

const EIGEN_MAX_ITER: usize = 10_000;

/// A validated density matrix: Hermitian, unit trace and positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates `entries` at [`VALIDITY_TOL`].
    pub fn new(entries: CMatrix) -> Result<Self> {
        Self::with_tolerance(entries, VALIDITY_TOL)
    }

    pub fn with_tolerance(entries: CMatrix, tol: f64) -> Result<Self> {
        let d = entries.nrows();
        if d == 0 || entries.ncols() != d {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, expected square and non-empty",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm = max_abs(&(&entries - entries.adjoint()));
        if herm > tol {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:e})")));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let (eigenvalues, _) = hermitian_eigen(&entries)?;
        let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { entries })
    }

    /// Skips validation; Hermiticity is restored exactly by symmetrisation.
    pub(crate) fn new_unchecked(entries: CMatrix) -> Self {
        let sym = (&entries + entries.adjoint()).scale(0.5);
        Self { entries: sym }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.iter().any(|&x| x < -VALIDITY_TOL || !x.is_finite()) {
            return Err(Error::InvalidState("diagonal has negative entries".into()));
        }
        let m = CMatrix::from_diagonal(&DVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| C64::new(x, 0.0)),
        ));
        Self::new(m)
    }

    /// `|psi><psi|` for a normalised state vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        Self::from_diagonal(&vec![1.0 / d as f64; d])
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    /// Real diagonal (populations in the reference basis).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.entries[(i, j)].norm() <= tol))
    }
}

/// A validated unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    entries: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        let d = entries.nrows();
        if d == 0 || entries.ncols() != d {
            return Err(Error::InvalidDimension(d));
        }
        let residual = unitarity_residual(&entries);
        if residual.is_nan() || residual > VALIDITY_TOL {
            return Err(Error::NotUnitary(residual));
        }
        Ok(Self { entries })
    }

    pub(crate) fn new_unchecked(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn identity(d: usize) -> Self {
        Self { entries: CMatrix::identity(d, d) }
    }

    /// Embeds a real orthogonal matrix.
    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    /// Permutation sending basis state `j` to `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let d = perm.len();
        let mut seen = vec![false; d];
        let mut m = CMatrix::zeros(d, d);
        for (j, &i) in perm.iter().enumerate() {
            if i >= d || seen[i] {
                return Err(Error::InvalidConfig(format!("{perm:?} is not a permutation")));
            }
            seen[i] = true;
            m[(i, j)] = C64::new(1.0, 0.0);
        }
        Ok(Self { entries: m })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dagger(&self) -> Self {
        Self { entries: self.entries.adjoint() }
    }

    /// `self * other`, i.e. `other` acts first.
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self { entries: &self.entries * &other.entries })
    }

    pub fn residual(&self) -> f64 {
        unitarity_residual(&self.entries)
    }

    /// Largest imaginary part over all entries.
    pub fn imaginary_residual(&self) -> f64 {
        self.entries.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.re)
    }
}

/// Eigen-decomposition of a density matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn reconstruct(&self) -> CMatrix {
        let lambda = CMatrix::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&x| C64::new(x, 0.0)),
        ));
        &self.eigenvectors * lambda * self.eigenvectors.adjoint()
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn unitarity_residual(m: &CMatrix) -> f64 {
    let d = m.nrows();
    max_abs(&(m.adjoint() * m - CMatrix::identity(d, d)))
}

/// Eigenvalues (descending) and eigenvectors of a Hermitian matrix.
///
/// The imaginary residue of the computed eigenvalues is checked against
/// [`VALIDITY_TOL`] relative to the matrix scale.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::ConvergenceFailure)?;
    let d = m.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Descending spectrum of a state.
pub fn spectrum_of(rho: &DensityMatrix) -> Result<Spectrum> {
    let (eigenvalues, eigenvectors) = hermitian_eigen(rho.entries())?;
    let total: f64 = eigenvalues.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("eigenvalues sum to {total}")));
    }
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    -probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Entropy of a list of eigenvalues; values in `[-VALIDITY_TOL, 0)` are
/// treated as zero, larger negatives are rejected.
pub fn entropy_of_eigenvalues(eigenvalues: &[f64]) -> Result<f64> {
    if let Some(&bad) = eigenvalues.iter().find(|&&x| x < -VALIDITY_TOL) {
        return Err(Error::InvalidState(format!("negative eigenvalue {bad:e}")));
    }
    Ok(shannon_entropy(eigenvalues))
}

/// `S(rho) = -Tr rho log2 rho`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let (eigenvalues, _) = hermitian_eigen(rho.entries())?;
    entropy_of_eigenvalues(&eigenvalues)
}

/// Removes every off-diagonal element in the reference basis.
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(rho.entries()[(i, i)].re, 0.0);
    }
    DensityMatrix { entries: m }
}

/// `U rho U^dag`.
pub fn conjugate(rho: &DensityMatrix, u: &UnitaryMatrix) -> Result<DensityMatrix> {
    check_dims(rho.dim(), u.dim())?;
    let m = u.entries() * rho.entries() * u.entries().adjoint();
    Ok(DensityMatrix::new_unchecked(m))
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    let (values, _) = hermitian_eigen(m)?;
    Ok(values.iter().map(|x| x.abs()).sum())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Reduced state of subsystem `keep` for a tensor product with local
/// dimensions `dims` (subsystem 0 leftmost).
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: usize) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    check_dims(total, rho.dim())?;
    if keep >= dims.len() {
        return Err(Error::IndexOutOfRange { index: keep, dim: dims.len() });
    }
    let dk = dims[keep];
    let inner: usize = dims[keep + 1..].iter().product();
    let outer: usize = dims[..keep].iter().product();
    let mut m = CMatrix::zeros(dk, dk);
    let idx = |o: usize, k: usize, i: usize| (o * dk + k) * inner + i;
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for o in 0..outer {
                for i in 0..inner {
                    acc += rho.entries()[(idx(o, a, i), idx(o, b, i))];
                }
            }
            m[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix::new_unchecked(m))
}

/// `exp(-i t G)` for a Hermitian generator `G`.
pub fn exp_hermitian(generator: &CMatrix, t: f64) -> Result<UnitaryMatrix> {
    let (values, vectors) = hermitian_eigen(generator)?;
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| C64::from_polar(1.0, -t * l)),
    );
    let m = &vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint();
    Ok(UnitaryMatrix::new_unchecked(m))
}
