mod common;

use std::sync::Arc;

use common::{complex_vector, rng};
use maxreg::form::{adjoint_form, diag_perturbed, scalar_poly};
use maxreg::ModulusOfContinuity;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adjoint_is_an_involution(n in 1usize..6, alpha in 0.3f64..1.0, amp in 0.0f64..0.4, t in 0.0f64..=1.0) {
        let f = diag_perturbed(n, alpha, 0.5, amp, 1.0).unwrap();
        let ff = adjoint_form(&adjoint_form(&f));
        prop_assert_eq!(ff.matrix_at(t), f.matrix_at(t));
        prop_assert_eq!(ff.bound_m(), f.bound_m());
        prop_assert_eq!(ff.coercivity_delta(), f.coercivity_delta());
    }

    #[test]
    fn numerical_range_in_sector(seed in any::<u64>(), n in 1usize..6, amp in 0.0f64..0.4, t in 0.0f64..=1.0) {
        let f = diag_perturbed(n, 0.7, 0.5, amp, 1.0).unwrap();
        let u = complex_vector(&mut rng(seed), n);
        let a = f.eval(t, &u, &u);
        prop_assert!(a.im.abs() <= f.bound_m() / f.coercivity_delta() * a.re * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn holder_squared_integral_converges(alpha in 0.3f64..1.0, gamma in 0.0f64..0.55) {
        prop_assume!(alpha > gamma / 2.0 + 0.05);
        let m = ModulusOfContinuity::holder(alpha, 1.0, gamma).unwrap();
        prop_assert!(m.supports_maximal_regularity(1.0));
        let exact = 1.0 / (2.0 * alpha - gamma);
        let coarse = (m.weighted_integral(1.0, 100, true) - exact).abs();
        let fine = (m.weighted_integral(1.0, 400, true) - exact).abs();
        prop_assert!(fine <= coarse + 1e-12);
        prop_assert!(fine / exact < 2e-2, "{fine}");
    }
}

#[test]
fn scalar_family_certifies() {
    let f = scalar_poly(&[1.0, 1.0], 1.0, 1.0, 0.5).unwrap();
    let r = f.certify_constants(16, 8, 0).unwrap();
    assert!(r.omega_violation.is_none());
    assert!(r.m_observed <= f.bound_m() * (1.0 + 1e-12));
    assert!(r.delta_observed >= f.coercivity_delta() * (1.0 - 1e-12));
}

#[test]
fn diag_perturbed_certifies() {
    let f = diag_perturbed(6, 0.8, 0.5, 0.3, 1.0).unwrap();
    let r = f.certify_constants(16, 8, 3).unwrap();
    assert!(r.omega_violation.is_none(), "{:?}", r.omega_violation);
    assert!(r.sector_ratio <= 1.0 + 1e-12);
    let _ = Arc::clone(f.triple());
}
