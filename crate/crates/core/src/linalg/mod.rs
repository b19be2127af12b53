//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `Array2<Complex64>`. Hermitian spectra go through LAPACK's
//! Hermitian driver, never a general nonsymmetric eigensolver, because the
//! sign of eigenvalues near zero is what the CP checks report.

mod expm;

pub use expm::expm;

use ndarray::{s, Array1, Array2, ArrayView2, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, EigValsh, Inverse, SVD, UPLO};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = Array2<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> Matrix {
    Array2::eye(n)
}

/// Conjugate transpose.
pub fn dagger(a: &Matrix) -> Matrix {
    a.t().mapv(|z| z.conj())
}

/// Kronecker product with the first factor most significant.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            let mut block = out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.zip_mut_with(b, |o, &x| *o = aij * x);
        }
    }
    out
}

pub fn trace(a: &Matrix) -> C64 {
    a.diag().sum()
}

pub fn frobenius_norm(a: &Matrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Maximum absolute column sum.
pub fn one_norm(a: &Matrix) -> f64 {
    a.axis_iter(Axis(1))
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    if a.iter().all(|z| *z == ZERO) {
        return Ok(0.0);
    }
    let (_, sv, _) = a.svd(false, false)?;
    Ok(sv.iter().cloned().fold(0.0, f64::max))
}

/// Largest entry of `|A - A^*|`.
pub fn hermitian_deviation(a: &Matrix) -> f64 {
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    dev
}

pub fn hermitian_part(a: &Matrix) -> Matrix {
    (a + &dagger(a)).mapv(|z| z * 0.5)
}

fn require_square(a: &Matrix, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what}: expected square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian part of `a`.
pub fn hermitian_eigh(a: &Matrix) -> Result<(Array1<f64>, Matrix)> {
    require_square(a, "hermitian_eigh")?;
    // LAPACK must see the matrix in column-major order: for C-order complex
    // input ndarray-linalg hands back the conjugated eigenvectors.
    let mut h = Array2::zeros(a.dim().f());
    h.assign(&hermitian_part(a));
    let (vals, vecs) = h.eigh(UPLO::Lower)?;
    Ok((vals, vecs.as_standard_layout().into_owned()))
}

/// Eigenvalues (ascending) of the Hermitian part of `a`.
pub fn hermitian_eigvals(a: &Matrix) -> Result<Array1<f64>> {
    require_square(a, "hermitian_eigvals")?;
    let h = hermitian_part(a);
    Ok(h.eigvalsh(UPLO::Lower)?)
}

pub fn min_hermitian_eigenvalue(a: &Matrix) -> Result<f64> {
    let vals = hermitian_eigvals(a)?;
    Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min))
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    require_square(a, "inverse")?;
    Ok(a.inv()?)
}

/// Column-stacking vectorization: `vec(A)[i + j*rows] = A[i, j]`.
pub fn vec_col(a: &Matrix) -> Array1<C64> {
    let (r, cols) = a.dim();
    let mut v = Array1::zeros(r * cols);
    for j in 0..cols {
        for i in 0..r {
            v[i + j * r] = a[[i, j]];
        }
    }
    v
}

/// Inverse of [`vec_col`] for a square `n x n` matrix.
pub fn unvec_col(v: &[C64], n: usize) -> Matrix {
    assert_eq!(v.len(), n * n, "unvec_col: length {} is not {n}^2", v.len());
    Array2::from_shape_fn((n, n), |(i, j)| v[i + j * n])
}

/// Product of a matrix with a column-stacked operator, returning the operator.
pub fn apply_vectorized(s: &ArrayView2<C64>, a: &Matrix) -> Matrix {
    let n = a.nrows();
    let out = s.dot(&vec_col(a));
    unvec_col(out.as_slice().expect("contiguous"), n)
}

/// Entries i.i.d. complex Gaussian with unit total variance.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    Array2::from_shape_fn((rows, cols), |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * scale, im * scale)
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    hermitian_part(&random_complex(rng, n, n))
}

/// Random full-rank density matrix `G G^* / tr(G G^*)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let g = random_complex(rng, n, n);
    let rho = g.dot(&dagger(&g));
    let tr = trace(&rho).re;
    rho.mapv(|z| z / tr)
}

/// Haar-ish random unitary from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let h = random_hermitian(rng, n);
    let (_, v) = hermitian_eigh(&h).expect("eigh of random Hermitian matrix");
    v
}

/// `A^{-1/2}` for a positive definite Hermitian matrix.
pub fn inverse_sqrt_psd(a: &Matrix) -> Result<Matrix> {
    let (vals, vecs) = hermitian_eigh(a)?;
    if let Some(&bad) = vals.iter().find(|&&v| v <= 0.0) {
        return Err(Error::Linalg(format!(
            "inverse square root of a matrix with eigenvalue {bad:e}"
        )));
    }
    let n = a.nrows();
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let f = 1.0 / v.sqrt();
        scaled.column_mut(j).mapv_inplace(|z| z * f);
    }
    let out = scaled.dot(&dagger(&vecs));
    debug_assert_eq!(out.nrows(), n);
    Ok(out)
}
