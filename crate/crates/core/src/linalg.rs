//! Small dense linear algebra used across the crate.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

#[allow(unused_imports)]
use crate::math::Float;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.data[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        m
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        let mut m = Self::zeros(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let orow = &o.data[k * o.cols..(k + 1) * o.cols];
                let mrow = &mut m.data[r * o.cols..(r + 1) * o.cols];
                for (x, y) in mrow.iter_mut().zip(orow) {
                    *x += a * y;
                }
            }
        }
        m
    }

    /// Kronecker product self ⊗ o.
    pub fn kron(&self, o: &Self) -> Self {
        let mut m = Self::zeros(self.rows * o.rows, self.cols * o.cols);
        for a in 0..self.rows {
            for b in 0..self.cols {
                let v = self.get(a, b);
                for c in 0..o.rows {
                    for d in 0..o.cols {
                        m.set(a * o.rows + c, b * o.cols + d, v * o.get(c, d));
                    }
                }
            }
        }
        m
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Eigen-decomposition of a real symmetric n×n matrix (row-major) by cyclic Jacobi.
/// Returns eigenvalues and eigenvectors as columns of a row-major matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| m[i * n + i]).collect();
    (vals, v)
}

/// dst(rows×cols) += alpha · A(rows×k) · B(k×cols), all row-major with the given row strides.
/// `a_trans` reads A as the transpose of a stored k×rows matrix.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm_acc(
    rows: usize,
    k: usize,
    cols: usize,
    alpha: f64,
    a: &[f64],
    a_trans: bool,
    b: &[f64],
    b_row_stride: usize,
    dst: &mut [f64],
    dst_row_stride: usize,
) {
    if rows == 0 || cols == 0 || k == 0 {
        return;
    }
    let (rsa, csa) = if a_trans { (1isize, rows as isize) } else { (k as isize, 1isize) };
    assert!(a.len() >= rows * k);
    assert!(b.len() >= (k - 1) * b_row_stride + cols);
    assert!(dst.len() >= (rows - 1) * dst_row_stride + cols);
    // SAFETY: the asserts above bound every index the kernel touches; the
    // output does not alias the inputs (distinct borrows).
    unsafe {
        matrixmultiply::dgemm(
            rows,
            k,
            cols,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            b_row_stride as isize,
            1,
            1.0,
            dst.as_mut_ptr(),
            dst_row_stride as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_reconstructs_matrix() {
        let a = [2.0, -1.0, 0.5, -1.0, 3.0, 0.25, 0.5, 0.25, -4.0];
        let (w, v) = symmetric_eigen(&a, 3);
        for r in 0..3 {
            for c in 0..3 {
                let s: f64 = (0..3).map(|k| v[r * 3 + k] * w[k] * v[c * 3 + k]).sum();
                assert!((s - a[r * 3 + c]).abs() < 1e-13);
            }
        }
        let tr: f64 = w.iter().sum();
        assert!((tr - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gemm_with_transpose() {
        // A = [[1,2],[3,4]], B = [[1,0,2],[0,1,3]]
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [1.0, 0.0, 2.0, 0.0, 1.0, 3.0];
        let mut c = [0.0; 6];
        gemm_acc(2, 2, 3, 1.0, &a, false, &b, 3, &mut c, 3);
        assert_eq!(c, [1.0, 2.0, 8.0, 3.0, 4.0, 18.0]);
        let mut c = [0.0; 6];
        gemm_acc(2, 2, 3, 2.0, &a, true, &b, 3, &mut c, 3);
        assert_eq!(c, [2.0, 6.0, 22.0, 4.0, 8.0, 32.0]);
    }

    #[test]
    fn kron_and_adjoint() {
        let mut a = CMatrix::zeros(2, 2);
        a.set(0, 1, Complex64::new(0.0, 1.0));
        let k = a.kron(&CMatrix::identity(2));
        assert_eq!(k.get(1, 3), Complex64::new(0.0, 1.0));
        assert_eq!(a.adjoint().get(1, 0), Complex64::new(0.0, -1.0));
    }
}
