//! Dense complex linear algebra helpers for small matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Kronecker product; the left factor indexes the most significant digit.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_vectors(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `‖U U† − I‖_max`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    max_abs(&(u * u.adjoint() - identity(u.nrows())))
}

/// Hermitian eigendecomposition with eigenvalues sorted in nonincreasing order.
/// Column `k` of the returned matrix is the eigenvector of eigenvalue `k`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// The input is symmetrized before decomposition.
    pub fn new(m: &CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                context: "hermitian eigendecomposition",
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if !is_finite(m) {
            return Err(Error::NonFinite);
        }
        let sym = (m + m.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(sym);
        let n = m.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
        Ok(Self { values, vectors })
    }

    /// Orthogonal projector onto the span of eigenvectors with eigenvalue above `threshold`.
    pub fn support_projector(&self, threshold: f64) -> CMatrix {
        let n = self.vectors.nrows();
        let mut p = CMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            if lambda > threshold {
                let v = self.vectors.column(k).into_owned();
                p += projector(&v);
            }
        }
        p
    }

    pub fn rank(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&l| l > threshold).count()
    }

    /// Rebuilds `V f(Λ) V†` for a real spectral function.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.vectors.nrows();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let w = f(self.values[k]);
            for r in 0..n {
                scaled[(r, k)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Mixed-radix digits of `index`, most significant first.
pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_sorted_and_reconstruct() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.5, 0.5),
                c(0.0, 0.0),
                c(0.5, -0.5),
                c(1.0, 0.0),
                c(0.0, 0.3),
                c(0.0, 0.0),
                c(0.0, -0.3),
                c(3.0, 0.0),
            ],
        );
        let eig = HermitianEigen::new(&m).unwrap();
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        let rebuilt = eig.map_spectrum(|l| c(l, 0.0));
        assert!(max_abs(&(rebuilt - &m)) < 1e-12);
    }

    #[test]
    fn digits_most_significant_first() {
        assert_eq!(digits(5, &[2, 3]), vec![1, 2]);
        assert_eq!(digits(0, &[2, 2, 2]), vec![0, 0, 0]);
        assert_eq!(digits(7, &[2, 2, 2]), vec![1, 1, 1]);
    }
}
