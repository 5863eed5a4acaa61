//! Dense complex linear algebra shared by the other modules.

use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x)))
}

pub fn real_vector(data: &[f64]) -> CVector {
    CVector::from_iterator(data.len(), data.iter().map(|&x| c(x)))
}

pub fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&real_vector(values))
}

/// Largest entrywise modulus of `m - m*`.
pub fn asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

pub fn check_hermitian(m: &CMatrix, which: &'static str) -> Result<()> {
    let asym = asymmetry(m);
    if asym > 1e-12 * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { which, asymmetry: asym });
    }
    Ok(())
}

pub fn cholesky(m: &CMatrix, which: &'static str) -> Result<Cholesky<C64, Dyn>> {
    let chol = Cholesky::new(hermitian_part(m)).ok_or(Error::NotPositiveDefinite { which })?;
    // The complex square root never fails, so a negative pivot shows up as an imaginary diagonal.
    let l = chol.l_dirty();
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-10 * d.re) {
            return Err(Error::NotPositiveDefinite { which });
        }
    }
    Ok(chol)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Eigenvalues from the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Smallest eigenvalue of the Hermitian pencil `(herm(s), g)` with `g` given by its Cholesky factor.
pub fn min_pencil_eigenvalue(s: &CMatrix, g: &Cholesky<C64, Dyn>) -> f64 {
    let l = g.l();
    let whitened = whiten(&hermitian_part(s), &l);
    whitened.symmetric_eigenvalues().min()
}

/// `L^{-1} m L^{-*}` for a lower triangular `l`.
pub fn whiten(m: &CMatrix, l: &CMatrix) -> CMatrix {
    let left = l.solve_lower_triangular(m).expect("Cholesky factor is invertible");
    let right = l
        .solve_lower_triangular(&left.adjoint())
        .expect("Cholesky factor is invertible");
    let out = right.adjoint();
    hermitian_part(&out)
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().lu().try_inverse()
}

/// Upper Hessenberg reduction `A = Q H Q*`, reused for many shifted solves
/// `(λ I - A) x = b` at `O(n²)` each.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    q: CMatrix,
    h: CMatrix,
}

impl ShiftedSolver {
    pub fn new(a: &CMatrix) -> Self {
        if a.nrows() <= 2 {
            return Self { q: CMatrix::identity(a.nrows(), a.nrows()), h: a.clone() };
        }
        let (q, h) = a.clone().hessenberg().unpack();
        Self { q, h }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// Solves `(λ I - A) x = b`; `None` if a pivot vanishes.
    pub fn solve(&self, lambda: C64, b: &CVector) -> Option<CVector> {
        let rhs = self.q.ad_mul(b);
        let y = self.solve_hessenberg(lambda, rhs)?;
        Some(&self.q * y)
    }

    pub fn solve_hessenberg(&self, lambda: C64, mut y: CVector) -> Option<CVector> {
        let n = self.dim();
        let mut m = -self.h.clone();
        for i in 0..n {
            m[(i, i)] += lambda;
        }
        // Gaussian elimination with partial pivoting; only the subdiagonal needs clearing.
        for i in 0..n.saturating_sub(1) {
            if m[(i + 1, i)].norm() > m[(i, i)].norm() {
                m.swap_rows(i, i + 1);
                y.swap_rows(i, i + 1);
            }
            let pivot = m[(i, i)];
            if pivot.norm() == 0.0 {
                return None;
            }
            let factor = m[(i + 1, i)] / pivot;
            if factor.norm() != 0.0 {
                for j in i..n {
                    let v = m[(i, j)];
                    m[(i + 1, j)] -= factor * v;
                }
                let yi = y[i];
                y[i + 1] -= factor * yi;
            }
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= m[(i, j)] * y[j];
            }
            let pivot = m[(i, i)];
            if pivot.norm() == 0.0 {
                return None;
            }
            y[i] = acc / pivot;
        }
        Some(y)
    }
}
