//! Discrete Gelfand triple `V ↪ H ↪ V'` and the spectral interpolation scale.
//!
//! Every vector is an `H`-representative in `ℂⁿ`. The scale `V_ℓ`, `ℓ ∈ [-1, 1]`,
//! is defined through the generalized eigenpairs `gram_V φ = λ gram_H φ`:
//! with coefficients `c_i = φ_i* gram_H v`,
//!
//! ```text
//! ‖v‖_ℓ² = Σ_i λ_i^ℓ |c_i|²
//! ```
//!
//! so `ℓ = 0` is the `H` norm, `ℓ = 1` the `V` norm and `ℓ = -γ` the norm of
//! the functional `w ↦ (w | v)_H` in `V_γ'`.

use nalgebra::{Cholesky, Dyn};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, C64};

#[derive(Debug, Clone)]
pub struct HilbertTriple {
    gram_h: CMatrix,
    gram_v: CMatrix,
    chol_h: Cholesky<C64, Dyn>,
    chol_v: Cholesky<C64, Dyn>,
    eigenvalues: Vec<f64>,
    /// Columns are the `gram_H`-orthonormal eigenvectors `φ_i`.
    eigenvectors: CMatrix,
    /// `Φ* gram_H`, the coefficient map (and inverse of `Φ`).
    coefficient_map: CMatrix,
    embed_const: f64,
}

/// Builds the triple from the two Gram matrices.
pub fn build_triple(gram_h: CMatrix, gram_v: CMatrix) -> Result<HilbertTriple> {
    HilbertTriple::new(gram_h, gram_v)
}

impl HilbertTriple {
    pub fn new(gram_h: CMatrix, gram_v: CMatrix) -> Result<Self> {
        let n = gram_h.nrows();
        if n == 0 || gram_h.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n.max(1), found: gram_h.ncols() });
        }
        if gram_v.nrows() != n || gram_v.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: gram_v.nrows() });
        }
        linalg::check_hermitian(&gram_h, "gram_H")?;
        linalg::check_hermitian(&gram_v, "gram_V")?;
        let chol_h = linalg::cholesky(&gram_h, "gram_H")?;
        let chol_v = linalg::cholesky(&gram_v, "gram_V")?;

        let l = chol_h.l();
        let whitened = linalg::whiten(&gram_v, &l);
        let eig = whitened.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        if eigenvalues[0] <= 0.0 {
            return Err(Error::NotPositiveDefinite { which: "gram_V" });
        }
        let z = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        // φ = L^{-*} z, so that φ* gram_H φ = z* z = I.
        let eigenvectors = l
            .adjoint()
            .solve_upper_triangular(&z)
            .expect("Cholesky factor is invertible");
        let coefficient_map = eigenvectors.adjoint() * &gram_h;
        let embed_const = eigenvalues.iter().map(|l| l.powf(-0.5)).fold(0.0, f64::max);

        Ok(Self {
            gram_h,
            gram_v,
            chol_h,
            chol_v,
            eigenvalues,
            eigenvectors,
            coefficient_map,
            embed_const,
        })
    }

    pub fn dim(&self) -> usize {
        self.gram_h.nrows()
    }

    pub fn gram_h(&self) -> &CMatrix {
        &self.gram_h
    }

    pub fn gram_v(&self) -> &CMatrix {
        &self.gram_v
    }

    pub fn cholesky_h(&self) -> &Cholesky<C64, Dyn> {
        &self.chol_h
    }

    pub fn cholesky_v(&self) -> &Cholesky<C64, Dyn> {
        &self.chol_v
    }

    /// Generalized eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// `c_H` with `‖v‖_H ≤ c_H ‖v‖_V`.
    pub fn embed_const(&self) -> f64 {
        self.embed_const
    }

    /// Largest residual `‖gram_V φ_i − λ_i gram_H φ_i‖` relative to `‖gram_V‖`.
    pub fn eigen_residual(&self) -> f64 {
        let scale = linalg::spectral_norm(&self.gram_v);
        (0..self.dim())
            .map(|i| {
                let phi = self.eigenvectors.column(i);
                let r = &self.gram_v * phi - (&self.gram_h * phi) * c(self.eigenvalues[i]);
                r.norm() / scale
            })
            .fold(0.0, f64::max)
    }

    pub fn coefficients(&self, v: &CVector) -> CVector {
        &self.coefficient_map * v
    }

    fn check_vector(&self, v: &CVector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(())
    }

    fn check_ell(name: &'static str, ell: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&ell) || ell.is_nan() {
            return Err(Error::OutOfRange { name, value: ell });
        }
        Ok(())
    }

    /// `‖v‖_{V_ℓ}` for `ℓ ∈ [-1, 1]` (negative `ℓ` gives the dual norm `V_{|ℓ|}'`).
    pub fn scale_norm(&self, v: &CVector, ell: f64) -> Result<f64> {
        Self::check_ell("ell", ell)?;
        self.check_vector(v)?;
        let coeffs = self.coefficients(v);
        let sum: f64 = coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(ci, li)| li.powf(ell) * ci.norm_sqr())
            .sum();
        Ok(sum.sqrt())
    }

    pub fn h_norm(&self, v: &CVector) -> f64 {
        (v.dotc(&(&self.gram_h * v))).re.max(0.0).sqrt()
    }

    pub fn v_norm(&self, v: &CVector) -> f64 {
        (v.dotc(&(&self.gram_v * v))).re.max(0.0).sqrt()
    }

    /// Coefficient-space representation `D_out^{1/2} Φ* gram_H B Φ D_in^{-1/2}`.
    fn scaled_matrix(&self, b: &CMatrix, ell_in: f64, ell_out: f64) -> Result<CMatrix> {
        Self::check_ell("ell_in", ell_in)?;
        Self::check_ell("ell_out", ell_out)?;
        let n = self.dim();
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
        }
        let mut m = &self.coefficient_map * b * &self.eigenvectors;
        for (j, lj) in self.eigenvalues.iter().enumerate() {
            m.column_mut(j).scale_mut(lj.powf(-0.5 * ell_in));
        }
        for (i, li) in self.eigenvalues.iter().enumerate() {
            m.row_mut(i).scale_mut(li.powf(0.5 * ell_out));
        }
        Ok(m)
    }

    /// Norm of `B` as a map `V_{ℓ_in} → V_{ℓ_out}` on `H`-representatives.
    pub fn operator_norm_scales(&self, b: &CMatrix, ell_in: f64, ell_out: f64) -> Result<f64> {
        Ok(linalg::spectral_norm(&self.scaled_matrix(b, ell_in, ell_out)?))
    }

    /// All singular values of `B: V_{ℓ_in} → V_{ℓ_out}`, descending.
    pub fn scale_singular_values(&self, b: &CMatrix, ell_in: f64, ell_out: f64) -> Result<Vec<f64>> {
        let m = self.scaled_matrix(b, ell_in, ell_out)?;
        let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }

    /// `gram_H^{-1} S`: the operator associated with the form matrix `S`.
    pub fn form_operator(&self, s: &CMatrix) -> CMatrix {
        self.chol_h.solve(s)
    }

    /// Operator norm of the form matrix `S` between scales, i.e. of `gram_H^{-1} S`.
    /// `form_norm(S, 1, -1) = sup |v* S u| / (‖u‖_V ‖v‖_V)`.
    pub fn form_norm(&self, s: &CMatrix, ell_in: f64, ell_out: f64) -> Result<f64> {
        self.operator_norm_scales(&self.form_operator(s), ell_in, ell_out)
    }

    /// Adjoint of `B` with respect to the `H` inner product: `gram_H^{-1} B* gram_H`.
    pub fn h_adjoint(&self, b: &CMatrix) -> CMatrix {
        self.chol_h.solve(&(b.adjoint() * &self.gram_h))
    }

    /// Whether two triples describe the same spaces.
    pub fn same_as(&self, other: &HilbertTriple) -> bool {
        std::ptr::eq(self, other)
            || (self.dim() == other.dim()
                && linalg::max_abs(&(&self.gram_h - &other.gram_h)) == 0.0
                && linalg::max_abs(&(&self.gram_v - &other.gram_v)) == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, real_matrix, real_vector};

    fn scalar(h: f64, v: f64) -> HilbertTriple {
        build_triple(diag(&[h]), diag(&[v])).unwrap()
    }

    #[test]
    fn scalar_triple() {
        let t = scalar(1.0, 4.0);
        assert_eq!(t.eigenvalues(), &[4.0]);
        assert!((t.embed_const() - 0.5).abs() < 1e-15);
        let n = t.scale_norm(&real_vector(&[1.0]), 0.5).unwrap();
        assert!((n - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn diagonal_triple() {
        let t = build_triple(diag(&[1.0, 1.0]), diag(&[1.0, 9.0])).unwrap();
        assert!((t.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((t.eigenvalues()[1] - 9.0).abs() < 1e-14);
        assert!((t.embed_const() - 1.0).abs() < 1e-14);
        let n = t.scale_norm(&real_vector(&[1.0, 1.0]), 0.5).unwrap();
        assert!((n - 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_by_two_eigenvectors() {
        let t = build_triple(diag(&[1.0, 1.0]), real_matrix(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert!((t.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((t.eigenvalues()[1] - 3.0).abs() < 1e-14);
        let s = 0.5f64.sqrt();
        let phi0 = t.eigenvectors().column(0).into_owned();
        let phi1 = t.eigenvectors().column(1).into_owned();
        // Up to a unimodular phase.
        assert!((phi0.dotc(&real_vector(&[s, -s])).norm() - 1.0).abs() < 1e-13);
        assert!((phi1.dotc(&real_vector(&[s, s])).norm() - 1.0).abs() < 1e-13);
        assert!(t.eigen_residual() < 1e-10);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            build_triple(real_matrix(2, 2, &[1.0, 0.5, 0.0, 1.0]), diag(&[1.0, 1.0])),
            Err(Error::NotHermitian { which: "gram_H", .. })
        ));
        assert!(matches!(
            build_triple(diag(&[1.0, -1.0]), diag(&[1.0, 1.0])),
            Err(Error::NotPositiveDefinite { which: "gram_H" })
        ));
        assert!(matches!(
            build_triple(diag(&[1.0, 1.0]), diag(&[1.0, 0.0])),
            Err(Error::NotPositiveDefinite { which: "gram_V" })
        ));
        assert!(matches!(
            build_triple(diag(&[1.0, 1.0]), diag(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_case_of_scale_norm() {
        let t = build_triple(diag(&[2.0, 3.0]), real_matrix(2, 2, &[5.0, 1.0, 1.0, 4.0])).unwrap();
        let v = real_vector(&[0.3, -1.2]);
        assert!((t.scale_norm(&v, 0.0).unwrap() - t.h_norm(&v)).abs() < 1e-13);
        assert!((t.scale_norm(&v, 1.0).unwrap() - t.v_norm(&v)).abs() < 1e-13);
        assert!(matches!(t.scale_norm(&v, 1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn operator_norm_examples() {
        let t = build_triple(diag(&[1.0, 1.0]), diag(&[1.0, 9.0])).unwrap();
        let id = CMatrix::identity(2, 2);
        for ell in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!((t.operator_norm_scales(&id, ell, ell).unwrap() - 1.0).abs() < 1e-13);
        }
        let b = diag(&[1.0, 3.0]);
        assert!((t.operator_norm_scales(&b, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-13);

        let s = scalar(1.0, 4.0);
        let v = s.operator_norm_scales(&diag(&[2.0]), 1.0, -1.0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(matches!(s.operator_norm_scales(&diag(&[2.0]), 1.2, 0.0), Err(Error::OutOfRange { .. })));
    }
}
