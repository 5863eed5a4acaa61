//! Scalar quadrature rules.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre over `[a, b]` split into `panels` equal pieces.
pub fn composite_gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        total += x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + 0.5 * h * xi)).sum::<f64>() * 0.5 * h;
    }
    total
}

/// `∫_{T 2^{-levels}}^{T} f` by Gauss–Legendre on the dyadic panels `[T 2^{-k-1}, T 2^{-k}]`.
pub fn dyadic_gauss<F: Fn(f64) -> f64>(f: F, horizon: f64, levels: usize, order: usize) -> f64 {
    (0..levels)
        .map(|k| {
            let hi = horizon * 0.5_f64.powi(k as i32);
            composite_gauss(&f, 0.5 * hi, hi, 1, order)
        })
        .sum()
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => dt * (0.5 * (samples[0] + samples[n - 1]) + samples[1..n - 1].iter().sum::<f64>()),
    }
}
