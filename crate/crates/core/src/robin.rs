//! Heat equation on `(0, 1)` with time-dependent Robin conditions
//! `∂_ν u + B(t) u = 0`, discretized by P1 finite elements.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::form::{ModulusOfContinuity, NonAutonomousForm};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::sectorial::SectorialSnapshot;
use crate::solver::{self, GridFunction, MrDiagnostics, Scheme, ShiftDirection, SolveReport, TimeGrid};
use crate::triple::HilbertTriple;

/// `B(t)` acting on the boundary values `(u(0), u(1))`.
pub type BoundaryFn = Arc<dyn Fn(f64) -> [[f64; 2]; 2] + Send + Sync>;

#[derive(Clone)]
pub struct RobinProblem {
    pub n_cells: usize,
    pub boundary: BoundaryFn,
    /// Hölder exponent of `B`, must exceed `1/4`.
    pub alpha: f64,
    /// `‖B(t) − B(s)‖ ≤ holder_c |t − s|^α`.
    pub holder_c: f64,
    pub horizon: f64,
    /// Overrides the default choice of `γ`.
    pub gamma: Option<f64>,
}

impl fmt::Debug for RobinProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RobinProblem")
            .field("n_cells", &self.n_cells)
            .field("alpha", &self.alpha)
            .field("holder_c", &self.holder_c)
            .field("horizon", &self.horizon)
            .field("gamma", &self.gamma)
            .finish()
    }
}

impl RobinProblem {
    pub fn new(n_cells: usize, boundary: BoundaryFn, alpha: f64, holder_c: f64, horizon: f64) -> Result<Self> {
        let p = Self { n_cells, boundary, alpha, holder_c, horizon, gamma: None };
        p.validate()?;
        Ok(p)
    }

    /// Diagonal `B(t) = diag(β₀(t), β₁(t))`.
    pub fn diagonal(
        n_cells: usize,
        beta: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static,
        alpha: f64,
        holder_c: f64,
        horizon: f64,
    ) -> Result<Self> {
        Self::new(
            n_cells,
            Arc::new(move |t| {
                let (b0, b1) = beta(t);
                [[b0, 0.0], [0.0, b1]]
            }),
            alpha,
            holder_c,
            horizon,
        )
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = Some(gamma);
        self.validate()?;
        Ok(self)
    }

    /// Same problem on another mesh.
    pub fn refined(&self, n_cells: usize) -> Result<Self> {
        let p = Self { n_cells, ..self.clone() };
        p.validate()?;
        Ok(p)
    }

    /// Same problem with `B` multiplied by `factor`.
    pub fn scaled_boundary(&self, factor: f64) -> Self {
        let inner = self.boundary.clone();
        Self {
            boundary: Arc::new(move |t| {
                let b = inner(t);
                [[factor * b[0][0], factor * b[0][1]], [factor * b[1][0], factor * b[1][1]]]
            }),
            holder_c: self.holder_c * factor.abs(),
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_cells < 2 {
            return Err(Error::OutOfRange { name: "n_cells", value: self.n_cells as f64 });
        }
        if !(self.alpha > 0.25) || self.alpha > 1.0 {
            return Err(Error::InvalidHolder { alpha: self.alpha });
        }
        if !(self.holder_c >= 0.0) {
            return Err(Error::OutOfRange { name: "holder_c", value: self.holder_c });
        }
        if !(self.horizon > 0.0) {
            return Err(Error::OutOfRange { name: "horizon", value: self.horizon });
        }
        if let Some(g) = self.gamma {
            if !(g > 0.5 && g < 1.0 && g < 2.0 * self.alpha) {
                return Err(Error::OutOfRange { name: "gamma", value: g });
            }
        }
        Ok(())
    }

    /// `γ = min(2α − 0.05, 0.95)`, or the midpoint of `(1/2, 2α)` when that is not above `1/2`.
    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or_else(|| {
            let g = (2.0 * self.alpha - 0.05).min(0.95);
            if g > 0.5 {
                g
            } else {
                0.5 * (0.5 + 2.0 * self.alpha)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.n_cells + 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    /// Nodes `x_i = i h`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| i as f64 * self.h()).collect()
    }

    /// Times used to certify the shift: uniform plus dyadic points near `0`.
    fn sample_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = (0..=64).map(|k| self.horizon * k as f64 / 64.0).collect();
        ts.extend((7..=24).map(|k| self.horizon * 0.5_f64.powi(k)));
        ts
    }
}

/// P1 mass matrix `(h/6)[[2,1],[1,2]]` per element.
pub fn mass_matrix(n_cells: usize) -> CMatrix {
    element_assembly(n_cells, |h| [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]])
}

/// P1 stiffness matrix `(1/h)[[1,−1],[−1,1]]` per element.
pub fn stiffness_matrix(n_cells: usize) -> CMatrix {
    element_assembly(n_cells, |h| [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]])
}

fn element_assembly(n_cells: usize, local: impl Fn(f64) -> [[f64; 2]; 2]) -> CMatrix {
    let h = 1.0 / n_cells as f64;
    let m = local(h);
    let mut out = CMatrix::zeros(n_cells + 1, n_cells + 1);
    for e in 0..n_cells {
        for a in 0..2 {
            for b in 0..2 {
                out[(e + a, e + b)] += c(m[a][b]);
            }
        }
    }
    out
}

/// Adds `Σ B_{ab} u(x_b) conj(v(x_a))` for the endpoints `x_0 = 0`, `x_1 = 1`.
fn add_boundary(s: &mut CMatrix, b: &[[f64; 2]; 2]) {
    let last = s.nrows() - 1;
    let idx = [0, last];
    for a in 0..2 {
        for bb in 0..2 {
            s[(idx[a], idx[bb])] += c(b[a][bb]);
        }
    }
}

fn spectral_norm_2x2(b: &[[f64; 2]; 2]) -> f64 {
    linalg::spectral_norm(&linalg::real_matrix(2, 2, &[b[0][0], b[0][1], b[1][0], b[1][1]]))
}

/// Norm of the trace `v ↦ (v(0), v(1))` from `V_ℓ` to `ℂ²`.
pub fn trace_norm(triple: &HilbertTriple, ell: f64) -> f64 {
    let n = triple.dim();
    let phi = triple.eigenvectors();
    let mut t = CMatrix::zeros(2, n);
    for (j, lj) in triple.eigenvalues().iter().enumerate() {
        let w = lj.powf(-0.5 * ell);
        t[(0, j)] = phi[(0, j)] * w;
        t[(1, j)] = phi[(n - 1, j)] * w;
    }
    linalg::spectral_norm(&t)
}

/// The assembled Robin form `S(t) = K + B(t) + μ M` and its ingredients.
#[derive(Debug, Clone)]
pub struct RobinForm {
    pub form: NonAutonomousForm,
    pub shift_mu: f64,
    pub gamma: f64,
    pub mass: CMatrix,
    pub stiffness: CMatrix,
    /// `‖Tr‖_{V→ℂ²}` and `‖Tr‖_{V_γ→ℂ²}`.
    pub trace_constants: (f64, f64),
}

impl RobinForm {
    pub fn snapshot(&self, t: f64) -> Result<SectorialSnapshot> {
        SectorialSnapshot::from_form(&self.form, t)
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }
}

/// Assembles the shifted Robin form. The shift starts at `sup ‖B‖ + 1` and doubles
/// until the sampled coercivity constant is positive.
pub fn assemble(problem: &RobinProblem) -> Result<RobinForm> {
    problem.validate()?;
    let n = problem.n_cells;
    let mass = mass_matrix(n);
    let stiffness = stiffness_matrix(n);
    let triple = Arc::new(HilbertTriple::new(mass.clone(), &mass + &stiffness)?);
    let gamma = problem.gamma();
    let times = problem.sample_times();
    let b_sup = times.iter().map(|&t| spectral_norm_2x2(&(problem.boundary)(t))).fold(0.0, f64::max);

    let base = {
        let stiffness = stiffness.clone();
        let boundary = problem.boundary.clone();
        move |t: f64| {
            let mut s = stiffness.clone();
            add_boundary(&mut s, &boundary(t));
            s
        }
    };
    let mut mu = b_sup + 1.0;
    let delta = loop {
        let delta = times
            .iter()
            .map(|&t| linalg::min_pencil_eigenvalue(&(base(t) + &mass * c(mu)), triple.cholesky_v()))
            .fold(f64::INFINITY, f64::min);
        if delta > 0.0 {
            break delta;
        }
        mu *= 2.0;
        if mu > 1e12 {
            return Err(Error::NonCoercive { delta });
        }
    };
    let mut m: f64 = 0.0;
    for &t in &times {
        m = m.max(triple.form_norm(&(base(t) + &mass * c(mu)), 1.0, -1.0)?);
    }

    let tr1 = trace_norm(&triple, 1.0);
    let trg = trace_norm(&triple, gamma);
    let modulus = ModulusOfContinuity::holder(problem.alpha, problem.holder_c * tr1 * trg, gamma)?;
    let shift_mass = &mass * c(mu);
    let form = NonAutonomousForm::new(
        triple,
        Arc::new(move |t| base(t) + &shift_mass),
        problem.horizon,
        1.05 * m,
        0.5 * delta,
        modulus,
    )?;
    Ok(RobinForm { form, shift_mu: mu, gamma, mass, stiffness, trace_constants: (tr1, trg) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    Stepping(Scheme),
    Representation { tol: f64, max_iter: usize },
}

/// Solves `u̇ + A(t)u = f` for the unshifted operator: the shifted problem with
/// forcing `e^{-μt} f` is solved and the result multiplied by `e^{μt}`. Norms in
/// the report refer to the shifted operator.
pub fn solve_robin(rf: &RobinForm, f: &GridFunction, u0: &CVector, method: LinearSolver) -> Result<SolveReport> {
    let mu = rf.shift_mu;
    let g = f.exp_weighted(-mu);
    let shifted = match method {
        LinearSolver::Stepping(scheme) => solver::solve_stepping(&rf.form, &g, u0, scheme)?,
        LinearSolver::Representation { tol, max_iter } => solver::solve_representation(&rf.form, &g, u0, tol, max_iter)?,
    };
    Ok(solver::shift_transform(&rf.form, &shifted, mu, ShiftDirection::Backward))
}

/// MR diagnostics of the shifted pair `(e^{-μt} u, e^{-μt} f)` against the coercive form.
pub fn robin_mr_diagnostics(rf: &RobinForm, u: &GridFunction, f: &GridFunction) -> MrDiagnostics {
    let mu = rf.shift_mu;
    solver::mr_diagnostics(&rf.form, &u.exp_weighted(-mu), Some(&f.exp_weighted(-mu)))
}

/// Closed-form solutions with their Robin coefficients and forcing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManufacturedCase {
    /// `e^{-t}(offset + sin(π(x−½)/2 + φ₀))`.
    Separable { phi0: f64, offset: f64 },
    /// `2 + t^{3/2} + e^{-t} sin(π(x−½)/2)`, with genuinely time-dependent `β`.
    TimeDependent,
    /// `e^{-π²t} cos(πx)` with `β ≡ 0`.
    NeumannMode,
    Zero,
}

impl ManufacturedCase {
    pub fn separable() -> Self {
        Self::Separable { phi0: 0.0, offset: 2.0 }
    }

    /// `(u, ∂_x u, ∂_t u − ∂_x² u)` at `(t, x)`.
    pub fn eval(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let q = PI / 2.0;
        match *self {
            Self::Separable { phi0, offset } => {
                let arg = q * (x - 0.5) + phi0;
                let e = (-t).exp();
                let g = offset + arg.sin();
                (e * g, e * q * arg.cos(), e * (-g + q * q * arg.sin()))
            }
            Self::TimeDependent => {
                let arg = q * (x - 0.5);
                let e = (-t).exp();
                let s = arg.sin();
                (2.0 + t.powf(1.5) + e * s, e * q * arg.cos(), 1.5 * t.sqrt() - e * s + q * q * e * s)
            }
            Self::NeumannMode => {
                let e = (-PI * PI * t).exp();
                (e * (PI * x).cos(), -PI * e * (PI * x).sin(), 0.0)
            }
            Self::Zero => (0.0, 0.0, 0.0),
        }
    }

    /// `(β₀(t), β₁(t)) = (u_x(t,0)/u(t,0), −u_x(t,1)/u(t,1))`; zero for the Neumann and zero cases.
    pub fn beta(&self, t: f64) -> (f64, f64) {
        match self {
            Self::NeumannMode | Self::Zero => (0.0, 0.0),
            _ => {
                let (u0, d0, _) = self.eval(t, 0.0);
                let (u1, d1, _) = self.eval(t, 1.0);
                (d0 / u0, -d1 / u1)
            }
        }
    }

    fn check_boundary(&self, horizon: f64) -> Result<()> {
        if matches!(self, Self::NeumannMode | Self::Zero) {
            return Ok(());
        }
        for k in 0..=256 {
            let t = horizon * k as f64 / 256.0;
            for x in [0.0, 1.0] {
                if self.eval(t, x).0.abs() < 1e-8 {
                    return Err(Error::BoundaryZero { endpoint: x });
                }
            }
        }
        Ok(())
    }

    /// `(α, c)` for the coefficients: Lipschitz with the sampled slope (plus 10%).
    fn holder(&self, horizon: f64) -> (f64, f64) {
        let samples = 4096;
        let mut lip: f64 = 0.0;
        let mut prev = self.beta(0.0);
        for k in 1..=samples {
            let t = horizon * k as f64 / samples as f64;
            let cur = self.beta(t);
            let d = (cur.0 - prev.0).abs().max((cur.1 - prev.1).abs());
            lip = lip.max(d * samples as f64 / horizon);
            prev = cur;
        }
        (1.0, 1.1 * lip)
    }

    pub fn problem(&self, n_cells: usize, horizon: f64) -> Result<RobinProblem> {
        self.check_boundary(horizon)?;
        let (alpha, c) = self.holder(horizon);
        let case = *self;
        RobinProblem::diagonal(n_cells, move |t| case.beta(t), alpha, c, horizon)
    }
}

#[derive(Debug, Clone)]
pub struct Manufactured {
    pub problem: RobinProblem,
    pub f: GridFunction,
    pub u0: CVector,
    pub u_exact: GridFunction,
}

/// Problem, forcing, initial value and nodal interpolant of the exact solution.
pub fn manufactured_case(case: ManufacturedCase, n_cells: usize, grid: TimeGrid) -> Result<Manufactured> {
    let problem = case.problem(n_cells, grid.horizon())?;
    let xs = problem.nodes();
    let sample = |t: f64, which: usize| -> CVector {
        CVector::from_iterator(
            xs.len(),
            xs.iter().map(|&x| {
                let (u, _, f) = case.eval(t, x);
                c(if which == 0 { u } else { f })
            }),
        )
    };
    // The load vector is M f_h with f_h the nodal interpolant of f.
    let f = GridFunction::from_fn(grid, |t| sample(t, 1));
    let u_exact = GridFunction::from_fn(grid, |t| sample(t, 0));
    let u0 = u_exact.values[0].clone();
    Ok(Manufactured { problem, f, u0, u_exact })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub n_steps: usize,
    pub l2l2_error: f64,
    pub linf_l2_error: f64,
    /// `log₂` of the previous level's `L²L²` error over this one (`NaN` on the first level).
    pub observed_order: f64,
}

/// Errors in the mass norm against the nodal interpolant on each `(n_cells, n_steps)` level.
pub fn convergence_study(
    case: ManufacturedCase,
    horizon: f64,
    levels: &[(usize, usize)],
    method: LinearSolver,
) -> Result<Vec<ConvergenceRow>> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("convergence study needs levels".into()));
    }
    let errors: Vec<Result<(f64, f64)>> = levels
        .par_iter()
        .map(|&(n_cells, n_steps)| {
            let grid = TimeGrid::new(horizon, n_steps)?;
            let m = manufactured_case(case, n_cells, grid)?;
            let rf = assemble(&m.problem)?;
            let report = solve_robin(&rf, &m.f, &m.u0, method)?;
            let err: Vec<f64> = report
                .u
                .values
                .iter()
                .zip(&m.u_exact.values)
                .map(|(a, b)| {
                    let d = a - b;
                    d.dotc(&(&rf.mass * &d)).re.max(0.0).sqrt()
                })
                .collect();
            let sq: Vec<f64> = err.iter().map(|e| e * e).collect();
            let l2 = crate::quadrature::trapezoid(&sq, grid.dt()).sqrt();
            let linf = err.iter().copied().fold(0.0, f64::max);
            Ok((l2, linf))
        })
        .collect();
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for (&(n_cells, n_steps), e) in levels.iter().zip(errors) {
        let (l2, linf) = e?;
        let observed_order = rows.last().map_or(f64::NAN, |prev| (prev.l2l2_error / l2).log2());
        rows.push(ConvergenceRow { n_cells, n_steps, l2l2_error: l2, linf_l2_error: linf, observed_order });
    }
    Ok(rows)
}
