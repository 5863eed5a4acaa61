//! `u̇ − u″ + β₁(u) u′ + β₀(u) u = f` with the Robin conditions of the base problem,
//! by damped Picard iteration on the map `w ↦ T(w)` that solves the problem with
//! coefficients frozen at `w`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::form::NonAutonomousForm;
use crate::linalg::{c, CMatrix, CVector};
use crate::robin::{self, LinearSolver, RobinForm, RobinProblem};
use crate::solver::{mr_diagnostics, GridFunction, Scheme, SolveReport};

/// Bounded continuous coefficient `β: ℝ → ℝ` with a known sup bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Zero,
    Constant(f64),
    /// `amplitude · tanh(scale · s)`.
    Tanh { amplitude: f64, scale: f64 },
    /// `Σ c_k s^k` evaluated at `s` clamped to `[-radius, radius]`.
    BoundedPoly { coeffs: Vec<f64>, radius: f64 },
}

impl Coefficient {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(v) => *v,
            Self::Tanh { amplitude, scale } => amplitude * (scale * s).tanh(),
            Self::BoundedPoly { coeffs, radius } => {
                let x = s.clamp(-radius, *radius);
                coeffs.iter().rev().fold(0.0, |acc, ck| acc * x + ck)
            }
        }
    }

    pub fn sup_bound(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(v) => v.abs(),
            Self::Tanh { amplitude, .. } => amplitude.abs(),
            Self::BoundedPoly { coeffs, radius } => {
                coeffs.iter().enumerate().map(|(k, ck)| ck.abs() * radius.powi(k as i32)).sum()
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }
}

#[derive(Debug, Clone)]
pub struct NonlinearProblem {
    pub base: RobinProblem,
    /// Reaction coefficient.
    pub beta0: Coefficient,
    /// Convection coefficient.
    pub beta1: Coefficient,
    pub damping: f64,
    pub tol: f64,
    pub max_outer: usize,
    pub inner: LinearSolver,
}

impl NonlinearProblem {
    pub fn new(base: RobinProblem, beta0: Coefficient, beta1: Coefficient) -> Self {
        Self {
            base,
            beta0,
            beta1,
            damping: 1.0,
            tol: 1e-8,
            max_outer: 50,
            inner: LinearSolver::Stepping(Scheme::CrankNicolson),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::OutOfRange { name: "damping", value: self.damping });
        }
        if !(self.tol > 0.0) {
            return Err(Error::OutOfRange { name: "tol", value: self.tol });
        }
        for (name, b) in [("beta0", &self.beta0), ("beta1", &self.beta1)] {
            let bound = b.sup_bound();
            if !bound.is_finite() || (-50..=50).any(|k| b.eval(k as f64 * 0.5).abs() > bound * (1.0 + 1e-12)) {
                return Err(Error::InvalidArgument(format!("{name} exceeds its declared bound")));
            }
        }
        Ok(())
    }
}

/// P1 convection matrix `∫ b u′ conj(v)` with `b` constant per element.
pub fn convection_matrix(per_element: &[f64]) -> CMatrix {
    let n = per_element.len();
    let mut out = CMatrix::zeros(n + 1, n + 1);
    for (e, &b) in per_element.iter().enumerate() {
        let half = c(0.5 * b);
        out[(e, e)] -= half;
        out[(e, e + 1)] += half;
        out[(e + 1, e)] -= half;
        out[(e + 1, e + 1)] += half;
    }
    out
}

/// P1 reaction matrix `∫ b u conj(v)` with `b` constant per element.
pub fn reaction_matrix(per_element: &[f64]) -> CMatrix {
    let n = per_element.len();
    let h = 1.0 / n as f64;
    let mut out = CMatrix::zeros(n + 1, n + 1);
    for (e, &b) in per_element.iter().enumerate() {
        let d = c(b * h / 3.0);
        let o = c(b * h / 6.0);
        out[(e, e)] += d;
        out[(e, e + 1)] += o;
        out[(e + 1, e)] += o;
        out[(e + 1, e + 1)] += d;
    }
    out
}

fn midpoints(w: &CVector) -> Vec<f64> {
    (0..w.len() - 1).map(|e| 0.5 * (w[e].re + w[e + 1].re)).collect()
}

/// The base form plus the frozen convection and reaction terms, shifted by
/// `B₀ + B₁²/(2δ) + δ/2` so that the sum stays coercive for every `w`.
pub fn linearized_form(problem: &NonlinearProblem, base: &RobinForm, w: &GridFunction) -> Result<RobinForm> {
    if problem.beta0.is_zero() && problem.beta1.is_zero() {
        return Ok(base.clone());
    }
    let n = base.dim();
    if w.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w.dim() });
    }
    let b0 = problem.beta0.sup_bound();
    let b1 = problem.beta1.sup_bound();
    let delta = base.form.coercivity_delta();
    let extra = b0 + b1 * b1 / (2.0 * delta) + 0.5 * delta;
    let mass = base.mass.clone();
    let nodes: Vec<CMatrix> = w
        .values
        .iter()
        .map(|wk| {
            let mids = midpoints(wk);
            let mut m = &mass * c(extra);
            if !problem.beta1.is_zero() {
                let b: Vec<f64> = mids.iter().map(|&s| problem.beta1.eval(s)).collect();
                m += convection_matrix(&b);
            }
            if !problem.beta0.is_zero() {
                let b: Vec<f64> = mids.iter().map(|&s| problem.beta0.eval(s)).collect();
                m += reaction_matrix(&b);
            }
            m
        })
        .collect();
    let grid = w.grid;
    let nodes = Arc::new(nodes);
    let inner = base.form.matrix_fn().clone();
    let perturbation = move |t: f64| -> CMatrix {
        let x = (t / grid.dt()).clamp(0.0, grid.n_steps() as f64);
        let k = (x.floor() as usize).min(grid.n_steps() - 1);
        let s = x - k as f64;
        if s == 0.0 {
            nodes[k].clone()
        } else {
            &nodes[k] * c(1.0 - s) + &nodes[k + 1] * c(s)
        }
    };
    let c_h2 = base.form.triple().embed_const().powi(2);
    let form = NonAutonomousForm::new(
        base.form.triple().clone(),
        Arc::new(move |t| inner(t) + perturbation(t)),
        base.form.horizon(),
        base.form.bound_m() + b1 + (b0 + extra) * c_h2,
        0.5 * delta,
        base.form.modulus().clone(),
    )?;
    Ok(RobinForm { form, shift_mu: base.shift_mu + extra, ..base.clone() })
}

#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub report: SolveReport,
    pub outer_iterations: usize,
    /// `‖T(w) − w‖_{L²(0,T;L²)}` per outer iteration.
    pub residual_history: Vec<f64>,
    /// MR constants of every computed `T(w)`.
    pub mr_constants: Vec<f64>,
    pub damping: f64,
}

fn l2l2(mass: &CMatrix, u: &GridFunction) -> f64 {
    u.l2_norm(|v| v.dotc(&(mass * v)).re.max(0.0).sqrt())
}

fn apply_t(
    problem: &NonlinearProblem,
    base: &RobinForm,
    w: &GridFunction,
    f: &GridFunction,
    u0: &CVector,
) -> Result<(SolveReport, f64)> {
    let lin = linearized_form(problem, base, w)?;
    let report = robin::solve_robin(&lin, f, u0, problem.inner)?;
    let mr = mr_diagnostics(&lin.form, &report.u, None).mr_constant;
    Ok((report, mr))
}

/// Damped Picard iteration `w ← (1−θ) w + θ T(w)` starting from `w = T(0)`.
pub fn solve_fixed_point(problem: &NonlinearProblem, f: &GridFunction, u0: &CVector) -> Result<FixedPointResult> {
    problem.validate()?;
    let base = robin::assemble(&problem.base)?;
    solve_fixed_point_on(problem, &base, f, u0)
}

fn solve_fixed_point_on(
    problem: &NonlinearProblem,
    base: &RobinForm,
    f: &GridFunction,
    u0: &CVector,
) -> Result<FixedPointResult> {
    let theta = problem.damping;
    let zero = GridFunction::zeros(f.grid, base.dim());
    let (first, mr0) = apply_t(problem, base, &zero, f, u0)?;
    let mut w = first.u;
    let mut history = Vec::new();
    let mut mr_constants = vec![mr0];
    let mut last = f64::INFINITY;
    for it in 1..=problem.max_outer {
        let (report, mr) = apply_t(problem, base, &w, f, u0)?;
        mr_constants.push(mr);
        let diff = GridFunction {
            grid: f.grid,
            values: report.u.values.iter().zip(&w.values).map(|(a, b)| a - b).collect(),
        };
        last = l2l2(&base.mass, &diff);
        history.push(last);
        if last <= problem.tol * (1.0 + l2l2(&base.mass, &w)) {
            return Ok(FixedPointResult {
                report,
                outer_iterations: it,
                residual_history: history,
                mr_constants,
                damping: theta,
            });
        }
        if !last.is_finite() {
            break;
        }
        w = GridFunction {
            grid: f.grid,
            values: w
                .values
                .iter()
                .zip(&report.u.values)
                .map(|(a, b)| a * c(1.0 - theta) + b * c(theta))
                .collect(),
        };
    }
    Err(Error::NotConverged { iterations: problem.max_outer, residual: last })
}

/// Tries damping `1, 1/2, 1/4` in turn and returns the first converged run.
pub fn solve_fixed_point_sweep(problem: &NonlinearProblem, f: &GridFunction, u0: &CVector) -> Result<FixedPointResult> {
    let base = robin::assemble(&problem.base)?;
    let mut last_err = None;
    for theta in [1.0, 0.5, 0.25] {
        let p = NonlinearProblem { damping: theta, ..problem.clone() };
        p.validate()?;
        match solve_fixed_point_on(&p, &base, f, u0) {
            Ok(r) => return Ok(r),
            Err(e @ Error::NotConverged { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::NotConverged { iterations: 0, residual: f64::INFINITY }))
}

/// `‖T(u) − u‖_{L²(0,T;L²)}` for a candidate solution.
pub fn fixed_point_residual(problem: &NonlinearProblem, u: &GridFunction, f: &GridFunction, u0: &CVector) -> Result<f64> {
    let base = robin::assemble(&problem.base)?;
    let (report, _) = apply_t(problem, &base, u, f, u0)?;
    let diff = GridFunction {
        grid: u.grid,
        values: report.u.values.iter().zip(&u.values).map(|(a, b)| a - b).collect(),
    };
    Ok(l2l2(&base.mass, &diff))
}
