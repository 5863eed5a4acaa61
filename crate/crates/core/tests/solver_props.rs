mod common;

use common::{complex_vector, rng};
use maxreg::form::diag_perturbed;
use maxreg::linalg::c;
use maxreg::solver::{
    mr_diagnostics, shift_transform, solve_representation_with, solve_stepping, InitialIterate, RepresentationOptions,
    ShiftDirection,
};
use maxreg::{CVector, GridFunction, NonAutonomousForm, Scheme, TimeGrid};
use proptest::prelude::*;
use rand::Rng;

fn smooth_forcing(grid: TimeGrid, n: usize, seed: u64) -> GridFunction {
    let mut r = rng(seed);
    let a = complex_vector(&mut r, n);
    let b = complex_vector(&mut r, n);
    let w: f64 = r.gen_range(0.5..3.0);
    GridFunction::from_fn(grid, |t| &a * c((w * t).cos()) + &b * c(t))
}

fn rel_l2(form: &NonAutonomousForm, a: &GridFunction, b: &GridFunction) -> f64 {
    let tr = form.triple();
    let diff = GridFunction { grid: a.grid, values: a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect() };
    diff.l2_norm(|v| tr.h_norm(v)) / b.l2_norm(|v| tr.h_norm(v))
}

#[test]
fn representation_agrees_with_crank_nicolson() {
    let tol = 1e-10;
    for alpha in [0.6, 0.8] {
        let form = diag_perturbed(8, alpha, 0.5, 0.3, 1.0).unwrap();
        let u0 = complex_vector(&mut rng(5), 8);
        let mut constant = None;
        for steps in [64, 128, 256] {
            let grid = TimeGrid::new(1.0, steps).unwrap();
            let f = smooth_forcing(grid, 8, 6);
            let rep = solve_representation_with(&form, &f, &u0, tol, 200, &RepresentationOptions::default()).unwrap();
            let cn = solve_stepping(&form, &f, &u0, Scheme::CrankNicolson).unwrap();
            let e = rel_l2(&form, &rep.u, &cn.u);
            let scaled = e / grid.dt().powf(1.5);
            let c0 = *constant.get_or_insert(scaled);
            assert!(e <= (5.0 * tol).max(c0 * grid.dt().powf(1.5)) * (1.0 + 1e-9), "{alpha} {steps}: {e}");
        }
    }
}

#[test]
fn initial_iterate_does_not_matter() {
    let tol = 1e-10;
    let form = diag_perturbed(6, 0.7, 0.5, 0.3, 1.0).unwrap();
    let grid = TimeGrid::new(1.0, 64).unwrap();
    let f = smooth_forcing(grid, 6, 9);
    let u0 = complex_vector(&mut rng(10), 6);
    let solve = |initial| {
        let opts = RepresentationOptions { initial, ..Default::default() };
        solve_representation_with(&form, &f, &u0, tol, 200, &opts).unwrap().u
    };
    let (a, b) = (solve(InitialIterate::Zero), solve(InitialIterate::Forcing));
    let tr = form.triple();
    let diff = a.values.iter().zip(&b.values).map(|(x, y)| tr.h_norm(&(x - y))).fold(0.0, f64::max);
    assert!(diff <= 2.0 * tol * a.sup_norm(|v| tr.h_norm(v)), "{diff}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shift_round_trip(seed in any::<u64>(), mu in -5.0f64..5.0) {
        let form = diag_perturbed(4, 0.8, 0.5, 0.2, 1.0).unwrap();
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let f = smooth_forcing(grid, 4, seed);
        let r = solve_stepping(&form, &f, &complex_vector(&mut rng(seed ^ 1), 4), Scheme::CrankNicolson).unwrap();
        let back = shift_transform(&form, &shift_transform(&form, &r, mu, ShiftDirection::Forward), mu, ShiftDirection::Backward);
        for (a, b) in back.u.values.iter().zip(&r.u.values) {
            prop_assert!((a - b).norm() <= 1e-14 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn shifted_solve_matches_direct(seed in any::<u64>(), mu in 0.1f64..1.0) {
        let form = diag_perturbed(4, 0.8, 0.5, 0.2, 1.0).unwrap();
        let steps = 1000;
        let grid = TimeGrid::new(1.0, steps).unwrap();
        prop_assume!(mu * grid.dt() <= 0.01);
        let f = smooth_forcing(grid, 4, seed);
        let u0 = CVector::from_fn(4, |i, _| c(1.0 / (1.0 + i as f64).powi(2)));
        let direct = solve_stepping(&form, &f, &u0, Scheme::CrankNicolson).unwrap();
        let shifted = form.shifted(mu).unwrap();
        let v = solve_stepping(&shifted, &f.exp_weighted(-mu), &u0, Scheme::CrankNicolson).unwrap();
        let u = shift_transform(&form, &v, mu, ShiftDirection::Backward);
        let tr = form.triple();
        for (a, b) in u.u.values.iter().zip(&direct.u.values) {
            prop_assert!(tr.h_norm(&(a - b)) <= 1e-6 * (1.0 + tr.h_norm(b)));
        }
    }
}

#[test]
fn mr_constant_is_stable() {
    let form = diag_perturbed(8, 0.8, 0.5, 0.3, 1.0).unwrap();
    let mut mr = Vec::new();
    let mut sup_v = Vec::new();
    for steps in [64, 128, 256] {
        let grid = TimeGrid::new(1.0, steps).unwrap();
        for draw in 0..5 {
            let f = smooth_forcing(grid, 8, 100 + draw);
            let u0 = complex_vector(&mut rng(200 + draw), 8);
            let r = solve_stepping(&form, &f, &u0, Scheme::CrankNicolson).unwrap();
            mr.push(mr_diagnostics(&form, &r.u, Some(&f)).mr_constant);
            sup_v.push(r.sup_v_norm / form.triple().v_norm(&u0).max(f.sup_norm(|v| form.triple().h_norm(v))));
        }
    }
    for values in [&mr, &sup_v] {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        assert!(values.iter().all(|v| (v / mean - 1.0).abs() <= 0.2), "{values:?}");
    }
}
