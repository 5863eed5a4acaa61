//! Equivalence constants of `‖A^{1/2} v‖_H` and `‖v‖_V`, and the distance
//! between inverse square roots of two operators on the same triple.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sectorial::{QuadratureConfig, SectorialSnapshot};

/// `(c_low, c_up)`: extreme values of `‖A^{1/2} v‖_H / ‖v‖_V`.
pub fn sqrt_domain_constants(p: &SectorialSnapshot, quad: &QuadratureConfig) -> Result<(f64, f64)> {
    let root = p.sqrt(quad)?;
    let sv = p.triple().scale_singular_values(&root, 1.0, 0.0)?;
    Ok((*sv.last().unwrap_or(&0.0), sv[0]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtGap {
    /// `‖A₁^{-1/2} − A₂^{-1/2}‖_{L(H,V)}`.
    pub gap: f64,
    /// `‖S₁ − S₂‖_{L(V, V_γ')}`.
    pub form_distance: f64,
    /// `gap / form_distance` (zero when both vanish).
    pub ratio: f64,
}

pub fn perturbed_sqrt_gap(
    p1: &SectorialSnapshot,
    p2: &SectorialSnapshot,
    gamma: f64,
    quad: &QuadratureConfig,
) -> Result<SqrtGap> {
    if !p1.triple().same_as(p2.triple()) {
        return Err(Error::TripleMismatch);
    }
    let triple = p1.triple();
    let diff_forms = p1.form_matrix() - p2.form_matrix();
    let form_distance = triple.form_norm(&diff_forms, 1.0, -gamma)?;
    if form_distance == 0.0 {
        return Ok(SqrtGap { gap: 0.0, form_distance, ratio: 0.0 });
    }
    let d = p1.inv_sqrt(quad)? - p2.inv_sqrt(quad)?;
    let gap = triple.operator_norm_scales(&d, 0.0, 1.0)?;
    Ok(SqrtGap { gap, form_distance, ratio: gap / form_distance })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqrtLevel {
    pub dim: usize,
    pub c_low: f64,
    pub c_up: f64,
    pub gap: SqrtGap,
}

/// Constants and gaps for one `(base, perturbed)` pair per refinement level.
pub fn sqrt_study(
    levels: &[(SectorialSnapshot, SectorialSnapshot)],
    gamma: f64,
    quad: &QuadratureConfig,
) -> Result<Vec<SqrtLevel>> {
    levels
        .par_iter()
        .map(|(base, perturbed)| {
            let (c_low, c_up) = sqrt_domain_constants(base, quad)?;
            let gap = perturbed_sqrt_gap(base, perturbed, gamma, quad)?;
            Ok(SqrtLevel { dim: base.triple().dim(), c_low, c_up, gap })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag;
    use crate::triple::build_triple;
    use std::sync::Arc;

    #[test]
    fn domain_constant_examples() {
        let q = QuadratureConfig::default();
        let t = Arc::new(build_triple(diag(&[1.0]), diag(&[1.0])).unwrap());
        let (lo, up) = sqrt_domain_constants(&SectorialSnapshot::new(t, diag(&[1.0])).unwrap(), &q).unwrap();
        assert!((lo - 1.0).abs() < 1e-9 && (up - 1.0).abs() < 1e-9);

        let t = Arc::new(build_triple(diag(&[1.0]), diag(&[4.0])).unwrap());
        let (lo, up) = sqrt_domain_constants(&SectorialSnapshot::new(t, diag(&[4.0])).unwrap(), &q).unwrap();
        assert!((lo - 1.0).abs() < 1e-9 && (up - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gap_examples() {
        let q = QuadratureConfig::default();
        let t = Arc::new(build_triple(diag(&[1.0]), diag(&[1.0])).unwrap());
        let p1 = SectorialSnapshot::new(t.clone(), diag(&[1.0])).unwrap();
        let p4 = SectorialSnapshot::new(t, diag(&[4.0])).unwrap();
        assert_eq!(perturbed_sqrt_gap(&p1, &p1, 0.5, &q).unwrap().gap, 0.0);
        let g = perturbed_sqrt_gap(&p1, &p4, 0.5, &q).unwrap();
        assert!((g.gap - 0.5).abs() < 1e-9);
        assert!((g.form_distance - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gap_requires_same_triple() {
        let q = QuadratureConfig::default();
        let a = Arc::new(build_triple(diag(&[1.0]), diag(&[1.0])).unwrap());
        let b = Arc::new(build_triple(diag(&[1.0]), diag(&[2.0])).unwrap());
        let pa = SectorialSnapshot::new(a, diag(&[1.0])).unwrap();
        let pb = SectorialSnapshot::new(b, diag(&[1.0])).unwrap();
        assert_eq!(perturbed_sqrt_gap(&pa, &pb, 0.5, &q), Err(Error::TripleMismatch));
    }
}
