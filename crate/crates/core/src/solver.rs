//! `u̇ + A(t) u = f`, `u(0) = u₀`: implicit time stepping, the frozen-coefficient
//! representation formula iterated to its fixed point, and maximal-regularity norms.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::form::NonAutonomousForm;
use crate::linalg::{c, CMatrix, CVector};
use crate::quadrature::trapezoid;
use crate::sectorial::{QuadratureConfig, SectorialSnapshot};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::OutOfRange { name: "horizon", value: horizon });
        }
        if n_steps < 2 {
            return Err(Error::OutOfRange { name: "n_steps", value: n_steps as f64 });
        }
        Ok(Self { horizon, n_steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.horizon
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.node(k)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: TimeGrid,
    pub values: Vec<CVector>,
}

impl GridFunction {
    pub fn new(grid: TimeGrid, values: Vec<CVector>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        let n = values[0].len();
        for v in &values {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidArgument("grid function has non-finite entries".into()));
            }
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> CVector) -> Self {
        Self { grid, values: grid.nodes().into_iter().map(f).collect() }
    }

    pub fn zeros(grid: TimeGrid, dim: usize) -> Self {
        Self { grid, values: vec![CVector::zeros(dim); grid.len()] }
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// Node-wise multiplication by `e^{rate t_k}`.
    pub fn exp_weighted(&self, rate: f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v * c((rate * self.grid.node(k)).exp()))
            .collect();
        Self { grid: self.grid, values }
    }

    /// Discrete `L²(0,T; H)` norm, trapezoid in time.
    pub fn l2_norm(&self, norm: impl Fn(&CVector) -> f64) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| norm(v).powi(2)).collect();
        trapezoid(&sq, self.grid.dt()).sqrt()
    }

    pub fn sup_norm(&self, norm: impl Fn(&CVector) -> f64) -> f64 {
        self.values.iter().map(norm).fold(0.0, f64::max)
    }

    /// `u̇` by central differences inside, second-order one-sided at the ends.
    pub fn derivative(&self) -> Self {
        let v = &self.values;
        let n = v.len();
        let inv = 1.0 / (2.0 * self.grid.dt());
        let mut out = Vec::with_capacity(n);
        if n == 2 {
            let d = (&v[1] - &v[0]) * c(2.0 * inv);
            return Self { grid: self.grid, values: vec![d.clone(), d] };
        }
        out.push((&v[1] * c(4.0) - &v[0] * c(3.0) - &v[2]) * c(inv));
        for k in 1..n - 1 {
            out.push((&v[k + 1] - &v[k - 1]) * c(inv));
        }
        out.push((&v[n - 1] * c(3.0) - &v[n - 2] * c(4.0) + &v[n - 3]) * c(inv));
        Self { grid: self.grid, values: out }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ImplicitEuler,
    CrankNicolson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub u: GridFunction,
    /// `‖u̇‖_{L²(0,T;H)}`.
    pub du_norm: f64,
    /// `‖A(·)u(·)‖_{L²(0,T;H)}`.
    pub au_norm: f64,
    /// `max_k ‖u(t_k)‖_V`.
    pub sup_v_norm: f64,
    pub iterations: usize,
    /// Estimated contraction factor of the correction operator (0 for time stepping).
    pub q_norm_estimate: f64,
    pub shift_mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MrDiagnostics {
    pub du_norm: f64,
    pub au_norm: f64,
    pub sup_v_norm: f64,
    /// `‖f‖_{L²(0,T;H)}` of the supplied or reconstructed forcing.
    pub f_norm: f64,
    /// `(‖u̇‖ + ‖Au‖) / (‖u(0)‖_V + ‖f‖)`, zero for vanishing data.
    pub mr_constant: f64,
}

fn check_data(form: &NonAutonomousForm, f: &GridFunction, u0: &CVector) -> Result<()> {
    let n = form.dim();
    if u0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: u0.len() });
    }
    if f.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: f.dim() });
    }
    if (f.grid.horizon() - form.horizon()).abs() > 1e-12 * form.horizon() {
        return Err(Error::InvalidArgument("grid horizon differs from the form horizon".into()));
    }
    Ok(())
}

/// `A(t_k) u(t_k)` at every node.
pub fn apply_operator(form: &NonAutonomousForm, u: &GridFunction) -> GridFunction {
    let values = (0..u.grid.len())
        .into_par_iter()
        .map(|k| {
            let s = form.matrix_at(u.grid.node(k));
            form.triple().cholesky_h().solve(&(s * &u.values[k]))
        })
        .collect();
    GridFunction { grid: u.grid, values }
}

/// Norms of `u̇`, `A(·)u(·)` and `u` in `C([0,T];V)`; `f` defaults to `u̇ + A(·)u(·)`.
pub fn mr_diagnostics(form: &NonAutonomousForm, u: &GridFunction, f: Option<&GridFunction>) -> MrDiagnostics {
    let triple = form.triple();
    let hn = |v: &CVector| triple.h_norm(v);
    let du = u.derivative();
    let au = apply_operator(form, u);
    let du_norm = du.l2_norm(hn);
    let au_norm = au.l2_norm(hn);
    let f_norm = match f {
        Some(f) => f.l2_norm(hn),
        None => {
            let values = du.values.iter().zip(&au.values).map(|(a, b)| a + b).collect();
            GridFunction { grid: u.grid, values }.l2_norm(hn)
        }
    };
    let sup_v_norm = u.sup_norm(|v| triple.v_norm(v));
    let denom = triple.v_norm(&u.values[0]) + f_norm;
    let mr_constant = if denom > 0.0 { (du_norm + au_norm) / denom } else { 0.0 };
    MrDiagnostics { du_norm, au_norm, sup_v_norm, f_norm, mr_constant }
}

fn report(form: &NonAutonomousForm, u: GridFunction, iterations: usize, q: f64, mu: f64) -> SolveReport {
    let d = mr_diagnostics(form, &u, None);
    SolveReport {
        u,
        du_norm: d.du_norm,
        au_norm: d.au_norm,
        sup_v_norm: d.sup_v_norm,
        iterations,
        q_norm_estimate: q,
        shift_mu: mu,
    }
}

/// Implicit Euler or Crank–Nicolson on the grid of `f`.
pub fn solve_stepping(form: &NonAutonomousForm, f: &GridFunction, u0: &CVector, scheme: Scheme) -> Result<SolveReport> {
    check_data(form, f, u0)?;
    let grid = f.grid;
    let dt = grid.dt();
    let g = form.triple().gram_h();
    let mut values = Vec::with_capacity(grid.len());
    values.push(u0.clone());
    let mut s_prev = form.matrix_at(0.0);
    for k in 0..grid.n_steps() {
        let s_next = form.matrix_at(grid.node(k + 1));
        let u = &values[k];
        let (lhs, rhs) = match scheme {
            Scheme::ImplicitEuler => (g + &s_next * c(dt), g * (u + &f.values[k + 1] * c(dt))),
            Scheme::CrankNicolson => {
                let half = c(0.5 * dt);
                let rhs = g * u - (&s_prev * u) * half + g * (&f.values[k] + &f.values[k + 1]) * half;
                (g + &s_next * half, rhs)
            }
        };
        let next = lhs.lu().solve(&rhs).ok_or(Error::SingularSystem { step: k + 1 })?;
        values.push(next);
        s_prev = s_next;
    }
    Ok(report(form, GridFunction { grid, values }, 0, 0.0, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialIterate {
    Zero,
    /// `u₁ + u₂`, the iterate after one step from zero.
    Forcing,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SemigroupMethod {
    Oracle,
    Contour(QuadratureConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationOptions {
    pub initial: InitialIterate,
    pub semigroup: SemigroupMethod,
    /// Candidate shifts; by default `{0, 1, 10, 100}·δ/c_H²`.
    pub shifts: Option<Vec<f64>>,
}

impl Default for RepresentationOptions {
    fn default() -> Self {
        Self { initial: InitialIterate::Zero, semigroup: SemigroupMethod::Oracle, shifts: None }
    }
}

/// Per-node product-integration weights for `∫ e^{-(t_k−s)(A_k+μ)} y(s) ds` with `y`
/// linear on each step: `P = e^{-Δt(A+μ)}`, `W_a`, `W_b` the left/right endpoint
/// weights of one step and `C = W_a + P W_b`.
struct NodeWeights {
    p: CMatrix,
    wa: CMatrix,
    wb: CMatrix,
    cw: CMatrix,
}

impl NodeWeights {
    fn new(a: &CMatrix, p_unshifted: &CMatrix, mu: f64, dt: f64) -> Result<Self> {
        let n = a.nrows();
        let id = CMatrix::identity(n, n);
        let p = p_unshifted * c((-mu * dt).exp());
        let lu = (a + &id * c(mu)).lu();
        let i0 = lu.solve(&(&id - &p)).ok_or(Error::SingularSystem { step: 0 })?;
        let i1 = lu.solve(&(&i0 - &p * c(dt))).ok_or(Error::SingularSystem { step: 0 })?;
        let wa = i1 * c(1.0 / dt);
        let wb = i0 - &wa;
        let cw = &wa + &p * &wb;
        Ok(Self { p, wa, wb, cw })
    }

    /// `Σ_{j=1}^{k} P^{k−j}(W_a y_{j−1} + W_b y_j)` in Horner form.
    fn integrate(&self, k: usize, y: impl Fn(usize) -> CVector) -> CVector {
        let mut acc = &self.wa * y(0);
        for j in 1..k {
            acc = &self.p * acc + &self.cw * y(j);
        }
        acc + &self.wb * y(k)
    }
}

struct Representation<'a> {
    grid: TimeGrid,
    ops: &'a [CMatrix],
    weights: Vec<NodeWeights>,
}

impl Representation<'_> {
    /// `(K v)_k = Σ_j w_{kj} e^{-(t_k−t_j)(A_k+μ)} (A_k − A_j) v_j`.
    fn apply_k(&self, v: &[CVector]) -> Vec<CVector> {
        let av: Vec<CVector> = self.ops.iter().zip(v).map(|(a, x)| a * x).collect();
        (0..self.grid.len())
            .into_par_iter()
            .map(|k| {
                if k == 0 {
                    return CVector::zeros(v[0].len());
                }
                let ak = &self.ops[k];
                self.weights[k].integrate(k, |j| if j == k { CVector::zeros(v[j].len()) } else { ak * &v[j] - &av[j] })
            })
            .collect()
    }
}

fn sup_h(form: &NonAutonomousForm, v: &[CVector]) -> f64 {
    v.iter().map(|x| form.triple().h_norm(x)).fold(0.0, f64::max)
}

fn propagators(form: &NonAutonomousForm, grid: TimeGrid, method: &SemigroupMethod) -> Result<(Vec<CMatrix>, Vec<CMatrix>)> {
    let dt = grid.dt();
    let pairs: Vec<Result<(CMatrix, CMatrix)>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let snap = SectorialSnapshot::from_form(form, grid.node(k))?;
            let p = match method {
                SemigroupMethod::Oracle => snap.semigroup_oracle(dt),
                SemigroupMethod::Contour(quad) => {
                    let n = form.dim();
                    let mut p = CMatrix::zeros(n, n);
                    for j in 0..n {
                        let mut e = CVector::zeros(n);
                        e[j] = c(1.0);
                        p.set_column(j, &snap.semigroup_apply(dt, &e, quad)?);
                    }
                    p
                }
            };
            Ok((snap.op_a().clone(), p))
        })
        .collect();
    let mut ops = Vec::with_capacity(grid.len());
    let mut props = Vec::with_capacity(grid.len());
    for r in pairs {
        let (a, p) = r?;
        ops.push(a);
        props.push(p);
    }
    Ok((ops, props))
}

/// Representation-formula solver with default options.
pub fn solve_representation(
    form: &NonAutonomousForm,
    f: &GridFunction,
    u0: &CVector,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    solve_representation_with(form, f, u0, tol, max_iter, &RepresentationOptions::default())
}

/// Picard iteration `v ← u₁ + u₂ + K v` for the shifted unknown `v = e^{μt} u`,
/// with `μ` the first candidate whose estimated contraction factor is at most `1/2`.
pub fn solve_representation_with(
    form: &NonAutonomousForm,
    f: &GridFunction,
    u0: &CVector,
    tol: f64,
    max_iter: usize,
    options: &RepresentationOptions,
) -> Result<SolveReport> {
    check_data(form, f, u0)?;
    if !(tol > 0.0) {
        return Err(Error::OutOfRange { name: "tol", value: tol });
    }
    let grid = f.grid;
    let dt = grid.dt();
    let (ops, props) = propagators(form, grid, &options.semigroup)?;
    let base = form.coercivity_delta() / form.triple().embed_const().powi(2);
    let shifts = options.shifts.clone().unwrap_or_else(|| vec![0.0, base, 10.0 * base, 100.0 * base]);

    let mut last_factor = f64::INFINITY;
    for &mu in &shifts {
        let weights: Vec<NodeWeights> = ops
            .par_iter()
            .zip(props.par_iter())
            .map(|(a, p)| NodeWeights::new(a, p, mu, dt))
            .collect::<Result<_>>()?;
        let rep = Representation { grid, ops: &ops, weights };
        let forcing = f.exp_weighted(mu);
        let free: Vec<CVector> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let w = &rep.weights[k];
                let mut u1 = u0.clone();
                for _ in 0..k {
                    u1 = &w.p * u1;
                }
                if k == 0 {
                    u1
                } else {
                    u1 + w.integrate(k, |j| forcing.values[j].clone())
                }
            })
            .collect();

        let k1 = rep.apply_k(&free);
        let k2 = rep.apply_k(&k1);
        let n1 = sup_h(form, &k1);
        let factor = if n1 > 0.0 { sup_h(form, &k2) / n1 } else { 0.0 };
        last_factor = factor;
        if factor > 0.5 {
            continue;
        }

        let mut v = match options.initial {
            InitialIterate::Zero => vec![CVector::zeros(form.dim()); grid.len()],
            InitialIterate::Forcing => free.clone(),
        };
        let mut change = f64::INFINITY;
        for it in 1..=max_iter {
            let kv = rep.apply_k(&v);
            let next: Vec<CVector> = free.iter().zip(kv).map(|(a, b)| a + b).collect();
            let diff: Vec<CVector> = next.iter().zip(&v).map(|(a, b)| a - b).collect();
            change = sup_h(form, &diff);
            let scale = sup_h(form, &v);
            v = next;
            if change <= tol * scale || change == 0.0 {
                let u = GridFunction { grid, values: v }.exp_weighted(-mu);
                return Ok(report(form, u, it, factor, mu));
            }
        }
        let scale = sup_h(form, &v).max(f64::MIN_POSITIVE);
        return Err(Error::MaxIterExceeded { iterations: max_iter, residual: change / scale });
    }
    Err(Error::NotContracting { factor: last_factor })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    /// `u ↦ e^{-μt} u`.
    Forward,
    /// `u ↦ e^{μt} u`.
    Backward,
}

/// Reweights the solution by `e^{∓μt}` and recomputes the norms with `form`.
pub fn shift_transform(form: &NonAutonomousForm, report: &SolveReport, mu: f64, direction: ShiftDirection) -> SolveReport {
    let rate = match direction {
        ShiftDirection::Forward => -mu,
        ShiftDirection::Backward => mu,
    };
    let u = if mu == 0.0 { report.u.clone() } else { report.u.exp_weighted(rate) };
    let d = mr_diagnostics(form, &u, None);
    SolveReport {
        u,
        du_norm: d.du_norm,
        au_norm: d.au_norm,
        sup_v_norm: d.sup_v_norm,
        iterations: report.iterations,
        q_norm_estimate: report.q_norm_estimate,
        shift_mu: report.shift_mu,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{scalar_poly, ModulusOfContinuity};
    use crate::linalg::{diag, real_vector};
    use crate::triple::HilbertTriple;
    use std::sync::Arc;

    fn scalar_data(grid: TimeGrid, value: f64) -> GridFunction {
        GridFunction::from_fn(grid, |_| real_vector(&[value]))
    }

    fn max_err(u: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
        u.values
            .iter()
            .enumerate()
            .map(|(k, v)| (v[0].re - exact(u.grid.node(k))).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn stepping_scalar_decay() {
        let form = scalar_poly(&[1.0], 1.0, 1.0, 0.0).unwrap();
        let u0 = real_vector(&[1.0]);
        let e1 = {
            let grid = TimeGrid::new(1.0, 100).unwrap();
            let r = solve_stepping(&form, &scalar_data(grid, 0.0), &u0, Scheme::ImplicitEuler).unwrap();
            max_err(&r.u, |t| (-t).exp())
        };
        let e2 = {
            let grid = TimeGrid::new(1.0, 200).unwrap();
            let r = solve_stepping(&form, &scalar_data(grid, 0.0), &u0, Scheme::ImplicitEuler).unwrap();
            max_err(&r.u, |t| (-t).exp())
        };
        assert!(e1 < 5e-3 && (e1 / e2 - 2.0).abs() < 0.1, "{e1} {e2}");
    }

    #[test]
    fn stepping_steady_state_is_exact() {
        let form = scalar_poly(&[1.0], 1.0, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(1.0, 16).unwrap();
        for scheme in [Scheme::ImplicitEuler, Scheme::CrankNicolson] {
            let r = solve_stepping(&form, &scalar_data(grid, 1.0), &real_vector(&[1.0]), scheme).unwrap();
            assert!(max_err(&r.u, |_| 1.0) < 1e-14);
        }
    }

    #[test]
    fn crank_nicolson_second_order() {
        let form = scalar_poly(&[1.0, 1.0], 1.0, 1.0, 0.0).unwrap();
        let exact = |t: f64| (-t - 0.5 * t * t).exp();
        let errs: Vec<f64> = [64, 128]
            .iter()
            .map(|&n| {
                let grid = TimeGrid::new(1.0, n).unwrap();
                let r = solve_stepping(&form, &scalar_data(grid, 0.0), &real_vector(&[1.0]), Scheme::CrankNicolson).unwrap();
                max_err(&r.u, exact)
            })
            .collect();
        assert!((errs[0] / errs[1] - 4.0).abs() < 0.2, "{errs:?}");
    }

    #[test]
    fn representation_autonomous_scalar() {
        let form = scalar_poly(&[1.0], 1.0, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let r = solve_representation(&form, &scalar_data(grid, 0.0), &real_vector(&[1.0]), 1e-12, 50).unwrap();
        assert!(max_err(&r.u, |t| (-t).exp()) < 1e-13);
        // Product integration is exact for a constant forcing.
        let r = solve_representation(&form, &scalar_data(grid, 1.0), &real_vector(&[0.0]), 1e-12, 50).unwrap();
        assert!(max_err(&r.u, |t| 1.0 - (-t).exp()) < 1e-13);
    }

    #[test]
    fn representation_linear_coefficient() {
        let form = scalar_poly(&[1.0, 1.0], 1.0, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(1.0, 128).unwrap();
        let f = scalar_data(grid, 0.0);
        let u0 = real_vector(&[1.0]);
        let r = solve_representation(&form, &f, &u0, 1e-12, 100).unwrap();
        assert!(max_err(&r.u, |t| (-t - 0.5 * t * t).exp()) < 1e-4);
        let cn = solve_stepping(&form, &f, &u0, Scheme::CrankNicolson).unwrap();
        let d = r.u.values.iter().zip(&cn.u.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(d < 1e-4);
    }

    #[test]
    fn representation_decoupled_diagonal() {
        let triple = Arc::new(HilbertTriple::new(diag(&[1.0, 1.0]), diag(&[1.0, 1.0])).unwrap());
        let modulus = ModulusOfContinuity::holder(1.0, 1.0, 0.0).unwrap();
        let form = NonAutonomousForm::new(triple, Arc::new(|t| diag(&[1.0, 2.0 + t.sin()])), 1.0, 3.0, 1.0, modulus).unwrap();
        let grid = TimeGrid::new(1.0, 128).unwrap();
        let f = GridFunction::zeros(grid, 2);
        let r = solve_representation(&form, &f, &real_vector(&[1.0, 1.0]), 1e-12, 100).unwrap();
        for (k, v) in r.u.values.iter().enumerate() {
            let t = grid.node(k);
            assert!((v[0].re - (-t).exp()).abs() < 1e-12);
            assert!((v[1].re - (-2.0 * t - (1.0 - t.cos())).exp()).abs() < 1e-4);
        }
    }

    #[test]
    fn shift_transform_examples() {
        let form = scalar_poly(&[1.0], 1.0, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let r = solve_stepping(&form, &scalar_data(grid, 1.0), &real_vector(&[1.0]), Scheme::CrankNicolson).unwrap();
        assert_eq!(shift_transform(&form, &r, 0.0, ShiftDirection::Forward).u, r.u);
        let fwd = shift_transform(&form, &r, 1.0, ShiftDirection::Forward);
        assert!(max_err(&fwd.u, |t| (-t).exp()) < 1e-14);
        let back = shift_transform(&form, &fwd, 1.0, ShiftDirection::Backward);
        assert!(max_err(&back.u, |_| 1.0) < 1e-14);
    }

    #[test]
    fn mr_diagnostics_examples() {
        let form = scalar_poly(&[1.0], 1.0, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(1.0, 2000).unwrap();
        let u = GridFunction::from_fn(grid, |t| real_vector(&[(-t).exp()]));
        let d = mr_diagnostics(&form, &u, None);
        let exact = ((1.0 - (-2.0f64).exp()) / 2.0).sqrt();
        assert!((d.du_norm - exact).abs() < 1e-6 && (d.au_norm - exact).abs() < 1e-6);

        let zero = mr_diagnostics(&form, &GridFunction::zeros(grid, 1), None);
        assert_eq!((zero.du_norm, zero.au_norm, zero.sup_v_norm, zero.mr_constant), (0.0, 0.0, 0.0, 0.0));

        let one = GridFunction::from_fn(grid, |_| real_vector(&[1.0]));
        let d = mr_diagnostics(&form, &one, Some(&one));
        assert!(d.du_norm.abs() < 1e-12 && (d.au_norm - 1.0).abs() < 1e-12);
    }
}
