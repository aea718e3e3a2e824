//! Small dense complex matrices.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::scalar::Real;

pub type C<T> = Complex<T>;

pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// Row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from row-major `(re, im)` entries.
    pub fn from_f64(rows: usize, cols: usize, entries: &[(f64, f64)]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match dimensions");
        CMatrix { rows, cols, data: entries.iter().map(|&(re, im)| c(re, im)).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn mul(&self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum dimension mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference dimension mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: C<T>) -> CMatrix<T> {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn adjoint(&self) -> CMatrix<T> {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn conj(&self) -> CMatrix<T> {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.conj()).collect() }
    }

    pub fn transpose(&self) -> CMatrix<T> {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Kronecker product, `self` is the more significant factor.
    pub fn kron(&self, rhs: &CMatrix<T>) -> CMatrix<T> {
        CMatrix::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |r, c| {
            self[(r / rhs.rows, c / rhs.cols)] * rhs[(r % rhs.rows, c % rhs.cols)]
        })
    }

    pub fn trace(&self) -> C<T> {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).fold(C::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    /// Largest entrywise modulus of `self - rhs`; infinite on a dimension mismatch.
    pub fn max_abs_diff(&self, rhs: &CMatrix<T>) -> T {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return T::infinity();
        }
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|a| a.norm()).fold(T::zero(), T::max)
    }

    pub fn approx_eq(&self, rhs: &CMatrix<T>, tol: T) -> bool {
        self.max_abs_diff(rhs) <= tol
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.is_square() && self.adjoint().mul(self).approx_eq(&Self::identity(self.rows), tol)
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    ///
    /// Uses the real symmetric embedding `[[A, -B], [B, A]]` of `A + iB`
    /// and cyclic Jacobi rotations; each eigenvalue of the embedding
    /// appears twice.
    pub fn hermitian_eigenvalues(&self) -> Vec<T> {
        assert!(self.is_square(), "eigenvalues of a non-square matrix");
        let n = self.rows;
        let m = 2 * n;
        let mut a = vec![T::zero(); m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self[(i, j)];
                a[i * m + j] = z.re;
                a[(i + n) * m + (j + n)] = z.re;
                a[i * m + (j + n)] = -z.im;
                a[(i + n) * m + j] = z.im;
            }
        }
        // symmetrise against rounding in the input
        for i in 0..m {
            for j in (i + 1)..m {
                let s = (a[i * m + j] + a[j * m + i]) * T::lit(0.5);
                a[i * m + j] = s;
                a[j * m + i] = s;
            }
        }
        jacobi_symmetric(&mut a, m);
        let mut ev: Vec<T> = (0..m).map(|i| a[i * m + i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        ev.into_iter().step_by(2).collect()
    }

    /// Positive semidefinite up to `tol` (Hermitian and no eigenvalue below `-tol`).
    pub fn is_psd(&self, tol: T) -> bool {
        self.is_hermitian(tol) && self.hermitian_eigenvalues().iter().all(|&e| e >= -tol)
    }
}

fn jacobi_symmetric<T: Real>(a: &mut [T], m: usize) {
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    off += a[i * m + j] * a[i * m + j];
                } else {
                    diag += a[i * m + j] * a[i * m + j];
                }
            }
        }
        if off <= eps * eps * (diag + off) || off == T::zero() {
            return;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = cs * akp - sn * akq;
                    a[k * m + q] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = cs * apk - sn * aqk;
                    a[q * m + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    fn index(&self, (r, c): (usize, usize)) -> &C<T> {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C<T> {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Real> fmt::Debug for CMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, " ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, " {:+.4}{:+.4}i", z.re.to_f64_lossy(), z.im.to_f64_lossy())?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Number of qubits for a dimension that must be a power of two.
pub fn qubits_of_dim(d: usize) -> Option<usize> {
    if d.is_power_of_two() {
        Some(d.trailing_zeros() as usize)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_identities_is_identity() {
        let a = CMatrix::<f64>::identity(2);
        let b = CMatrix::<f64>::identity(4);
        assert_eq!(a.kron(&b), CMatrix::identity(8));
    }

    #[test]
    fn eigenvalues_of_pauli_y() {
        let y = CMatrix::<f64>::from_f64(2, 2, &[(0., 0.), (0., -1.), (0., 1.), (0., 0.)]);
        let ev = y.hermitian_eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12, "{ev:?}");
    }

    #[test]
    fn eigenvalues_of_diagonal_are_sorted_diagonal() {
        let mut m = CMatrix::<f64>::zeros(3, 3);
        m[(0, 0)] = c(3.0, 0.0);
        m[(1, 1)] = c(-1.0, 0.0);
        m[(2, 2)] = c(0.5, 0.0);
        let ev = m.hermitian_eigenvalues();
        for (a, b) in ev.iter().zip([-1.0, 0.5, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn projector_is_psd_and_its_negation_is_not() {
        let p = CMatrix::<f64>::from_f64(2, 2, &[(0.5, 0.), (0.5, 0.), (0.5, 0.), (0.5, 0.)]);
        assert!(p.is_psd(1e-12));
        assert!(!p.scale(c(-1.0, 0.0)).is_psd(1e-12));
    }

    #[test]
    fn works_in_single_precision() {
        let h = CMatrix::<f32>::from_f64(2, 2, &[(0.5f64.sqrt(), 0.), (0.5f64.sqrt(), 0.), (0.5f64.sqrt(), 0.), (-(0.5f64.sqrt()), 0.)]);
        assert!(h.is_unitary(1e-6));
    }
}
