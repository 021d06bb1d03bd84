//! Dense complex matrices with the factorizations the rest of the crate
//! builds on: Hermitian eigendecomposition, LU solves, spectral norms and
//! the spectral-decomposition oracle `f(A) = V f(Λ) V⁻¹`.
//!
//! Everything here is a pure function of its inputs and all reductions run
//! in a fixed order, so repeated runs are bit-identical.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Factorize, ReciprocalConditionNum, Solve, SVD, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = Array1<Complex64>;

/// Square dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    data: Array2<Complex64>,
}

impl ComplexMatrix {
    /// Wraps a square array. Rejects non-square shapes and non-finite entries.
    pub fn from_array(data: Array2<Complex64>) -> Result<Self> {
        if data.nrows() == 0 || data.nrows() != data.ncols() {
            return Err(Error::Validation(format!(
                "matrix must be square and non-empty, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        Ok(Self { data })
    }

    /// Row-major entry list of length `dim * dim`.
    pub fn from_rows(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Validation(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let data = Array2::from_shape_vec((dim, dim), entries)
            .map_err(|e| Error::Validation(e.to_string()))?;
        Self::from_array(data)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, z) in diag.iter().enumerate() {
            m.data[(i, i)] = *z;
        }
        m
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        Self {
            data: Array2::from_shape_fn((dim, dim), |(i, j)| f(i, j)),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[(i, j)] = v;
    }

    pub fn as_array(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<Complex64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.t().mapv(|z| z.conj()),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            data: &self.data - &other.data,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            data: self.data.mapv(|z| z * s),
        }
    }

    /// Adds `s` to the diagonal.
    pub fn shift(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for i in 0..out.dim() {
            out.data[(i, i)] += s;
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self {
            data: self.data.dot(&other.data),
        }
    }

    /// `self += coeff * other`, allocation-free.
    pub fn axpy(&mut self, coeff: Complex64, other: &Self) {
        self.data.zip_mut_with(&other.data, |a, b| *a += coeff * b);
    }

    pub fn matvec(&self, v: &CVector) -> CVector {
        self.data.dot(v)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        for i in 0..n {
            for j in i..n {
                if (self.data[(i, j)] - self.data[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Eigendecomposition of a Hermitian matrix: real ascending eigenvalues and
/// a unitary column basis.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    /// `V f(Λ) V*` for a scalar function of the (real) eigenvalues.
    pub fn apply_fn(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let v = self.vectors.as_array();
        let n = self.values.len();
        let mut scaled = v.clone();
        for (j, lam) in self.values.iter().enumerate() {
            let fz = f(*lam);
            for i in 0..n {
                scaled[(i, j)] *= fz;
            }
        }
        let vh = v.t().mapv(|z| z.conj());
        ComplexMatrix {
            data: scaled.dot(&vh),
        }
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|lam| Complex64::new(lam, 0.0))
    }
}

/// Eigendecomposition of a general (diagonalizable) matrix, kept as oracle
/// machinery: eigenvalues, eigenvector basis and its condition number.
#[derive(Debug, Clone)]
pub struct GeneralEig {
    pub values: Vec<Complex64>,
    pub vectors: ComplexMatrix,
    pub basis_cond: f64,
}

impl GeneralEig {
    /// `V f(Λ) V⁻¹`; fails if the eigenbasis is too ill-conditioned.
    pub fn apply_fn(&self, f: impl Fn(Complex64) -> Complex64) -> Result<ComplexMatrix> {
        if self.basis_cond > 1e8 {
            return Err(Error::IllConditionedEigenbasis {
                cond: self.basis_cond,
            });
        }
        let v = self.vectors.as_array();
        let n = self.values.len();
        let mut scaled = v.clone();
        for (j, lam) in self.values.iter().enumerate() {
            let fz = f(*lam);
            for i in 0..n {
                scaled[(i, j)] *= fz;
            }
        }
        // X = W V^{-1} solved as V^T X^T = W^T.
        let vt = v.t().to_owned();
        let lu = vt.factorize().map_err(|_| Error::Singular)?;
        let wt = scaled.t().to_owned();
        let n_cols = wt.ncols();
        let mut out = Array2::<Complex64>::zeros((n, n_cols));
        for j in 0..n_cols {
            let col = wt.column(j).to_owned();
            let x = lu.solve(&col).map_err(|_| Error::Singular)?;
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        Ok(ComplexMatrix { data: out.t().to_owned() })
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Fails with `NonHermitian` when the symmetry defect exceeds
/// `1e-12 * ||A||_F` and with `NoConvergence` when the LAPACK iteration stalls.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEig> {
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    if !a.is_hermitian(1e-12 * scale) {
        return Err(Error::NonHermitian);
    }
    let (vals, vecs) = a
        .as_array()
        .eigh(UPLO::Lower)
        .map_err(|e| Error::NoConvergence(e.to_string()))?;
    // LAPACK sees the row-major buffer as the transpose = conj(A); its
    // eigenvectors conjugate back to ours.
    Ok(HermitianEig {
        values: vals.to_vec(),
        vectors: ComplexMatrix {
            data: vecs.mapv(|z| z.conj()),
        },
    })
}

/// General dense eigendecomposition (LAPACK zgeev) with an eigenbasis
/// condition estimate from the singular values of `V`.
pub fn general_eig(a: &ComplexMatrix) -> Result<GeneralEig> {
    let (vals, vecs) = a
        .as_array()
        .eig()
        .map_err(|e| Error::NoConvergence(e.to_string()))?;
    let (_, sv, _) = vecs
        .svd(false, false)
        .map_err(|e| Error::NoConvergence(e.to_string()))?;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let basis_cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    Ok(GeneralEig {
        values: vals.to_vec(),
        vectors: ComplexMatrix { data: vecs },
        basis_cond,
    })
}

/// Solves `M x = b` by partial-pivot LU. `Singular` flags a reciprocal
/// condition number below 1e-14, the point where pivots carry no information.
pub fn solve_linear(m: &ComplexMatrix, b: &CVector) -> Result<CVector> {
    if b.len() != m.dim() {
        return Err(Error::GridMismatch(format!(
            "rhs length {} vs matrix dim {}",
            b.len(),
            m.dim()
        )));
    }
    let lu = m.as_array().factorize().map_err(|_| Error::Singular)?;
    let rcond = lu.rcond().map_err(|_| Error::Singular)?;
    if !rcond.is_finite() || rcond < 1e-14 {
        return Err(Error::Singular);
    }
    lu.solve(b).map_err(|_| Error::Singular)
}

/// LU factorization reused across many right-hand sides.
pub struct LinearSolver {
    lu: ndarray_linalg::LUFactorized<ndarray::OwnedRepr<Complex64>>,
    dim: usize,
}

impl LinearSolver {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        let lu = m.as_array().factorize().map_err(|_| Error::Singular)?;
        let rcond = lu.rcond().map_err(|_| Error::Singular)?;
        if !rcond.is_finite() || rcond < 1e-14 {
            return Err(Error::Singular);
        }
        Ok(Self { lu, dim: m.dim() })
    }

    pub fn solve(&self, b: &CVector) -> Result<CVector> {
        self.lu.solve(b).map_err(|_| Error::Singular)
    }

    /// Solves `M X = B` column by column.
    pub fn solve_matrix(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dim;
        let mut out = Array2::<Complex64>::zeros((n, n));
        for j in 0..n {
            let col = b.as_array().column(j).to_owned();
            let x = self.solve(&col)?;
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        Ok(ComplexMatrix { data: out })
    }
}

/// Largest singular value by power iteration on `A*A`, accurate to about
/// 1e-12 relative. Deterministic start vector; no randomness.
pub fn op_norm_2(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let scale = a.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let mut v: CVector = Array1::from_iter(
        (0..n).map(|i| Complex64::new(1.0 + (i as f64) / (n as f64), 0.3 * (i as f64 + 1.0) / (n as f64))),
    );
    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|z| z / nv);
    let ah = a.adjoint();
    let mut sigma = 0.0f64;
    for _ in 0..500 {
        let w = a.matvec(&v);
        let u = ah.matvec(&w);
        let norm_u = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_u == 0.0 {
            return 0.0;
        }
        let new_sigma = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let next = u.mapv(|z| z / norm_u);
        let delta = (new_sigma - sigma).abs();
        v = next;
        sigma = new_sigma;
        if delta <= 1e-13 * sigma.max(scale * 1e-300) {
            break;
        }
    }
    sigma
}

/// Oracle spectral norm from a full singular value decomposition.
pub fn op_norm_2_svd(a: &ComplexMatrix) -> f64 {
    let (_, sv, _) = a.as_array().svd(false, false).expect("svd failed");
    sv.iter().cloned().fold(0.0f64, f64::max)
}

/// Brute-force functional calculus `f(A) = V f(Λ) V⁻¹`.
///
/// Hermitian inputs go through the unitary eigendecomposition; everything
/// else uses the general solver with a conditioning guard. This is the
/// ground truth the contour calculus is validated against.
pub fn spectral_apply(a: &ComplexMatrix, f: impl Fn(Complex64) -> Complex64) -> Result<ComplexMatrix> {
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    if a.is_hermitian(1e-12 * scale) {
        let eig = hermitian_eig(a)?;
        Ok(eig.apply_fn(|lam| f(Complex64::new(lam, 0.0))))
    } else {
        let eig = general_eig(a)?;
        eig.apply_fn(f)
    }
}

/// Relative distance `||X - Y|| / max(||Y||, floor)` in the spectral norm.
pub fn rel_error(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let denom = op_norm_2(y).max(1e-300);
    op_norm_2(&x.sub(y)) / denom
}
