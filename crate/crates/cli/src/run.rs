//! Command dispatch.

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use maxreg::form::{diag_perturbed, scalar_poly};
use maxreg::linalg::c;
use maxreg::nonlinear::{self, NonlinearProblem};
use maxreg::robin::{self, LinearSolver, ManufacturedCase, RobinForm, RobinProblem};
use maxreg::sectorial::ResolventEstimate;
use maxreg::solver::{self, MrDiagnostics, RepresentationOptions, SemigroupMethod};
use maxreg::sqrt_property::sqrt_study;
use maxreg::{CVector, GridFunction, NonAutonomousForm, SectorialSnapshot, SolveReport, TimeGrid, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Command, DataKind, Problem, RunConfig, SemigroupKind, SolverKind};
use crate::error::CliError;
use crate::table::{write_tables, Cell, Table};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output.dir`.
    pub out: Option<PathBuf>,
    /// Overrides `output.seed`.
    pub seed: Option<u64>,
    pub no_timestamp: bool,
}

type Result<T> = std::result::Result<T, CliError>;

/// Runs the command and writes its tables; returns the written paths.
pub fn run(config: &RunConfig, options: &RunOptions) -> Result<Vec<PathBuf>> {
    let mut config = config.clone();
    if let Some(seed) = options.seed {
        config.output.seed = seed;
    }
    if let Some(out) = &options.out {
        config.output.dir = out.to_string_lossy().into_owned();
    }
    let tables = execute(&config)?;
    let header = provenance(&config, !options.no_timestamp);
    write_tables(std::path::Path::new(&config.output.dir), &config.output.prefix, &header, &tables)
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Vec<(String, String)>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        toml::Value::String(s) => out.push((prefix.into(), s.clone())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

/// `tool`, `version`, `seed`, optional `timestamp`, then the resolved configuration.
pub fn provenance(config: &RunConfig, timestamp: bool) -> Vec<(String, String)> {
    let mut lines = vec![
        ("tool".to_string(), "maxreg".to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("seed".to_string(), config.output.seed.to_string()),
    ];
    if timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        lines.push(("timestamp".into(), secs.to_string()));
    }
    if let Ok(value) = toml::Value::try_from(config) {
        let mut echo = Vec::new();
        flatten("", &value, &mut echo);
        lines.extend(echo.into_iter().map(|(k, v)| (format!("config.{k}"), v)));
    }
    lines
}

/// Computes the tables of one run without touching the filesystem.
pub fn execute(config: &RunConfig) -> Result<Vec<Table>> {
    let ctx = Context::new(config)?;
    match config.command {
        Command::TripleCheck => ctx.triple_check(),
        Command::Estimates => ctx.estimates(),
        Command::SqrtCheck => ctx.sqrt_check(),
        Command::Solve => ctx.solve(),
        Command::MrCheck => ctx.mr_check(),
        Command::Robin => ctx.robin(),
        Command::Nonlinear => ctx.nonlinear(),
        Command::Convergence => ctx.convergence(),
    }
}

enum Built {
    Plain(NonAutonomousForm),
    Robin { problem: RobinProblem, rf: Box<RobinForm>, case: Option<ManufacturedCase> },
}

impl Built {
    fn form(&self) -> &NonAutonomousForm {
        match self {
            Self::Plain(f) => f,
            Self::Robin { rf, .. } => &rf.form,
        }
    }
}

struct Context<'a> {
    config: &'a RunConfig,
    built: Built,
}

fn robin_problem(problem: &Problem, n_cells: usize) -> Result<(RobinProblem, Option<ManufacturedCase>)> {
    let Problem::Robin1d { alpha, c: hc, beta0, beta1, beta_family, horizon, gamma, .. } = problem else {
        unreachable!("robin_problem on a non-Robin family");
    };
    let case = beta_family.manufactured();
    let mut p = match case {
        Some(case) => case.problem(n_cells, *horizon)?,
        None => {
            let (a, c0, b0, b1) = (*alpha, *hc, *beta0, *beta1);
            RobinProblem::diagonal(n_cells, move |t| (b0 + c0 * t.powf(a), b1 + c0 * t.powf(a)), a, c0, *horizon)?
        }
    };
    if let Some(g) = gamma {
        p = p.with_gamma(*g)?;
    }
    Ok((p, case))
}

fn build(problem: &Problem, size: Option<usize>) -> Result<Built> {
    Ok(match problem {
        Problem::ScalarPoly { coeffs, gram_v, gamma, horizon } => {
            Built::Plain(scalar_poly(coeffs, *gram_v, *horizon, *gamma)?)
        }
        Problem::DiagPerturbed { n, alpha, gamma, amplitude, horizon } => {
            Built::Plain(diag_perturbed(size.unwrap_or(*n), *alpha, *gamma, *amplitude, *horizon)?)
        }
        Problem::Robin1d { n_cells, .. } => {
            let (problem, case) = robin_problem(problem, size.unwrap_or(*n_cells))?;
            let rf = Box::new(robin::assemble(&problem)?);
            Built::Robin { problem, rf, case }
        }
    })
}

/// Number of cosine modes in a random profile on a mesh.
const PROFILE_MODES: usize = 4;

/// Random data: independent entries, or on a mesh (`smooth`) a random
/// combination of `cos(kπx)`, `k < PROFILE_MODES`, at the nodes, so that the
/// data stays bounded in `V` under refinement.
fn random_vector(rng: &mut ChaCha8Rng, n: usize, smooth: bool) -> CVector {
    let mut draw = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    if !smooth {
        return CVector::from_fn(n, |_, _| draw());
    }
    let coeffs: Vec<C64> = (0..PROFILE_MODES).map(|_| draw()).collect();
    let h = 1.0 / (n - 1) as f64;
    CVector::from_fn(n, |i, _| {
        let x = i as f64 * h;
        coeffs.iter().enumerate().map(|(k, a)| a * (k as f64 * std::f64::consts::PI * x).cos()).sum()
    })
}

fn initial_value(kind: DataKind, n: usize, smooth: bool, rng: &mut ChaCha8Rng) -> CVector {
    match kind {
        DataKind::Zero => CVector::zeros(n),
        DataKind::Ones => CVector::from_element(n, c(1.0)),
        DataKind::Random => random_vector(rng, n, smooth),
    }
}

/// Random forcing is `a cos(ωt) + b t` with random `a`, `b` and `ω ∈ [0.5, 3)`.
fn forcing(kind: DataKind, grid: TimeGrid, n: usize, smooth: bool, rng: &mut ChaCha8Rng) -> GridFunction {
    match kind {
        DataKind::Zero => GridFunction::zeros(grid, n),
        DataKind::Ones => GridFunction::from_fn(grid, |_| CVector::from_element(n, c(1.0))),
        DataKind::Random => {
            let a = random_vector(rng, n, smooth);
            let b = random_vector(rng, n, smooth);
            let w: f64 = rng.gen_range(0.5..3.0);
            GridFunction::from_fn(grid, |t| &a * c((w * t).cos()) + &b * c(t))
        }
    }
}

fn mr_row(d: &MrDiagnostics) -> Vec<Cell> {
    vec![d.du_norm.into(), d.au_norm.into(), d.sup_v_norm.into(), d.f_norm.into(), d.mr_constant.into()]
}

impl<'a> Context<'a> {
    fn new(config: &'a RunConfig) -> Result<Self> {
        let built = build(&config.problem, None)?;
        Ok(Self { config, built })
    }

    fn seed(&self) -> u64 {
        self.config.output.seed
    }

    fn grid(&self, n_steps: usize) -> Result<TimeGrid> {
        Ok(TimeGrid::new(self.config.problem.horizon(), n_steps)?)
    }

    fn linear_solver(&self) -> LinearSolver {
        let n = &self.config.numerics;
        match n.solver {
            SolverKind::Stepping => LinearSolver::Stepping(n.scheme.into()),
            SolverKind::Representation => LinearSolver::Representation { tol: n.tol, max_iter: n.max_iter },
        }
    }

    fn solve_plain(&self, form: &NonAutonomousForm, f: &GridFunction, u0: &CVector) -> Result<(SolveReport, MrDiagnostics)> {
        let n = &self.config.numerics;
        let report = match n.solver {
            SolverKind::Stepping => solver::solve_stepping(form, f, u0, n.scheme.into())?,
            SolverKind::Representation => {
                let semigroup = match n.semigroup {
                    SemigroupKind::Oracle => SemigroupMethod::Oracle,
                    SemigroupKind::Contour => SemigroupMethod::Contour(n.quadrature.to_core()),
                };
                let opts = RepresentationOptions { semigroup, ..Default::default() };
                solver::solve_representation_with(form, f, u0, n.tol, n.max_iter, &opts)?
            }
        };
        let mr = solver::mr_diagnostics(form, &report.u, Some(f));
        Ok((report, mr))
    }

    /// Solves with the configured data (or the manufactured data of a Robin case).
    fn solve_with_data(&self, built: &Built, grid: TimeGrid, rng: &mut ChaCha8Rng) -> Result<(SolveReport, MrDiagnostics)> {
        let data = &self.config.data;
        match built {
            Built::Plain(form) => {
                let n = form.dim();
                let u0 = initial_value(data.u0, n, false, rng);
                let f = forcing(data.forcing, grid, n, false, rng);
                self.solve_plain(form, &f, &u0)
            }
            Built::Robin { problem, rf, case } => {
                let (f, u0) = match case {
                    Some(case) => {
                        let m = robin::manufactured_case(*case, problem.n_cells, grid)?;
                        (m.f, m.u0)
                    }
                    None => {
                        let n = rf.dim();
                        let u0 = initial_value(data.u0, n, true, rng);
                        (forcing(data.forcing, grid, n, true, rng), u0)
                    }
                };
                let report = robin::solve_robin(rf, &f, &u0, self.linear_solver())?;
                let mr = robin::robin_mr_diagnostics(rf, &report.u, &f);
                Ok((report, mr))
            }
        }
    }

    fn u_table(&self, form: &NonAutonomousForm, u: &GridFunction) -> Table {
        let n = u.dim();
        let mut cols = vec!["t".to_string()];
        for i in 0..n {
            cols.push(format!("u{i}_re"));
            cols.push(format!("u{i}_im"));
        }
        cols.push("h_norm".into());
        cols.push("v_norm".into());
        let mut t = Table { name: "u".into(), columns: cols, rows: Vec::new() };
        let tr = form.triple();
        for (k, v) in u.values.iter().enumerate() {
            let mut row: Vec<Cell> = vec![u.grid.node(k).into()];
            for z in v.iter() {
                row.push(z.re.into());
                row.push(z.im.into());
            }
            row.push(tr.h_norm(v).into());
            row.push(tr.v_norm(v).into());
            t.push(row);
        }
        t
    }

    fn triple_check(&self) -> Result<Vec<Table>> {
        let n = &self.config.numerics;
        let form = self.built.form();
        let tr = form.triple();
        let rep = form.certify_constants(n.certify_time_samples, n.certify_vec_samples, self.seed())?;
        let eig = tr.eigenvalues();
        let horizon = form.horizon();
        let mut t = Table::new(
            "triple",
            &[
                "dim",
                "embed_const",
                "eigen_residual",
                "lambda_min",
                "lambda_max",
                "bound_m",
                "m_observed",
                "coercivity_delta",
                "delta_observed",
                "sector_theta",
                "random_bound_ratio",
                "sector_ratio",
                "omega_ratio",
                "omega_violated",
                "pairs_checked",
                "omega_sup",
                "omega_l2_integral",
                "mr_supported",
            ],
        );
        t.push(vec![
            tr.dim().into(),
            tr.embed_const().into(),
            tr.eigen_residual().into(),
            eig[0].into(),
            eig[eig.len() - 1].into(),
            form.bound_m().into(),
            rep.m_observed.into(),
            form.coercivity_delta().into(),
            rep.delta_observed.into(),
            form.sector_theta().into(),
            rep.random_bound_ratio.into(),
            rep.sector_ratio.into(),
            rep.omega_ratio.into(),
            rep.omega_violation.is_some().into(),
            rep.pairs_checked.into(),
            form.modulus().omega_bdd_sup(horizon).into(),
            form.modulus().weighted_integral(horizon, 200, true).into(),
            form.modulus().supports_maximal_regularity(horizon).into(),
        ]);
        Ok(vec![t])
    }

    fn estimates(&self) -> Result<Vec<Table>> {
        let n = &self.config.numerics;
        let p = SectorialSnapshot::from_form(self.built.form(), n.t)?;
        let lambdas = p.default_lambda_samples(n.per_decade);
        let times = p.default_time_samples(n.per_decade);
        let mut est = Table::new(
            "estimates",
            &["t", "ell", "estimate", "ell_in", "ell_out", "exponent", "c_observed", "worst_lambda_re", "worst_lambda_im", "growth"],
        );
        let mut semi = Table::new("semigroup", &["t", "ell", "dual_to_v", "scale_to_v", "dual_to_h", "analytic"]);
        for &ell in &n.ells {
            let rep = p.verify_resolvent_estimates(ell, &lambdas)?;
            for which in ResolventEstimate::all() {
                let e = rep.estimates.iter().find(|e| e.estimate == which).expect("all estimates reported");
                est.push(vec![
                    n.t.into(),
                    ell.into(),
                    which.label().into(),
                    e.ell_in.into(),
                    e.ell_out.into(),
                    e.exponent.into(),
                    e.c_observed.into(),
                    e.worst_lambda.re.into(),
                    e.worst_lambda.im.into(),
                    e.growth.into(),
                ]);
            }
            let s = p.semigroup_decay_constants(ell, &times)?;
            semi.push(vec![
                n.t.into(),
                ell.into(),
                s.dual_to_v.into(),
                s.scale_to_v.into(),
                s.dual_to_h.into(),
                s.analytic.into(),
            ]);
        }
        Ok(vec![est, semi])
    }

    fn sqrt_check(&self) -> Result<Vec<Table>> {
        let n = &self.config.numerics;
        let sizes: Vec<Option<usize>> = match self.config.problem {
            Problem::ScalarPoly { .. } => vec![None],
            _ => n.levels.iter().map(|&l| Some(l)).collect(),
        };
        let mut pairs = Vec::new();
        let mut gamma = 0.0;
        for size in &sizes {
            let built = build(&self.config.problem, *size)?;
            let form = built.form();
            gamma = form.modulus().gamma;
            pairs.push((SectorialSnapshot::from_form(form, n.t)?, SectorialSnapshot::from_form(form, n.t_perturbed)?));
        }
        let rows = sqrt_study(&pairs, gamma, &n.quadrature.to_core())?;
        let mut t = Table::new("sqrt", &["level", "dim", "c_low", "c_up", "gap", "form_distance", "ratio"]);
        for (size, r) in sizes.iter().zip(rows) {
            t.push(vec![
                size.unwrap_or(r.dim).into(),
                r.dim.into(),
                r.c_low.into(),
                r.c_up.into(),
                r.gap.gap.into(),
                r.gap.form_distance.into(),
                r.gap.ratio.into(),
            ]);
        }
        Ok(vec![t])
    }

    fn solve(&self) -> Result<Vec<Table>> {
        let grid = self.grid(self.config.numerics.n_steps)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed());
        let (report, mr) = self.solve_with_data(&self.built, grid, &mut rng)?;
        let mut m = Table::new(
            "mr",
            &["du_norm", "au_norm", "sup_v_norm", "f_norm", "mr_constant", "iterations", "q_norm_estimate", "shift_mu"],
        );
        let mut row = mr_row(&mr);
        row.extend([report.iterations.into(), report.q_norm_estimate.into(), report.shift_mu.into()]);
        m.push(row);
        Ok(vec![self.u_table(self.built.form(), &report.u), m])
    }

    /// Random `(u₀, f)` per draw; draw `d` uses the same data on every grid.
    /// `sup_v_constant` is `sup ‖u‖_V / (‖u₀‖_V + ‖f‖)`.
    fn mr_check(&self) -> Result<Vec<Table>> {
        let n = &self.config.numerics;
        let form = self.built.form();
        let dim = form.dim();
        let smooth = matches!(self.built, Built::Robin { .. });
        let mut t = Table::new(
            "mr_check",
            &["n_steps", "draw", "du_norm", "au_norm", "sup_v_norm", "f_norm", "mr_constant", "u0_v_norm", "sup_v_constant"],
        );
        for &steps in &n.grids {
            let grid = self.grid(steps)?;
            for d in 0..n.draws {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed().wrapping_add(d as u64));
                let u0 = random_vector(&mut rng, dim, smooth);
                let f = forcing(DataKind::Random, grid, dim, smooth, &mut rng);
                let mr = match &self.built {
                    Built::Plain(form) => self.solve_plain(form, &f, &u0)?.1,
                    Built::Robin { rf, .. } => {
                        let r = robin::solve_robin(rf, &f, &u0, self.linear_solver())?;
                        robin::robin_mr_diagnostics(rf, &r.u, &f)
                    }
                };
                let u0_v = form.triple().v_norm(&u0);
                let mut row: Vec<Cell> = vec![steps.into(), d.into()];
                row.extend(mr_row(&mr));
                row.extend([u0_v.into(), (mr.sup_v_norm / (u0_v + mr.f_norm)).into()]);
                t.push(row);
            }
        }
        Ok(vec![t])
    }

    fn robin(&self) -> Result<Vec<Table>> {
        let Built::Robin { problem, rf, case } = &self.built else {
            unreachable!("validated robin_1d family");
        };
        let steps = self.config.numerics.n_steps;
        let grid = self.grid(steps)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed());
        let (report, mr) = self.solve_with_data(&self.built, grid, &mut rng)?;
        let mut cols =
            vec!["n_cells", "n_steps", "shift_mu", "gamma", "du_norm", "au_norm", "sup_v_norm", "f_norm", "mr_constant"];
        let mut row: Vec<Cell> =
            vec![problem.n_cells.into(), steps.into(), rf.shift_mu.into(), rf.gamma.into()];
        row.extend(mr_row(&mr));
        if let Some(case) = case {
            let e = &robin::convergence_study(*case, grid.horizon(), &[(problem.n_cells, steps)], self.linear_solver())?[0];
            cols.extend(["l2l2_error", "linf_l2_error"]);
            row.extend([e.l2l2_error.into(), e.linf_l2_error.into()]);
        }
        let mut t = Table::new("robin", &cols);
        t.push(row);
        Ok(vec![self.u_table(&rf.form, &report.u), t])
    }

    fn nonlinear(&self) -> Result<Vec<Table>> {
        let Built::Robin { problem, rf, .. } = &self.built else {
            unreachable!("validated robin_1d family");
        };
        let nl = &self.config.nonlinear;
        let grid = self.grid(self.config.numerics.n_steps)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed());
        let u0 = initial_value(self.config.data.u0, rf.dim(), true, &mut rng);
        let f = forcing(self.config.data.forcing, grid, rf.dim(), true, &mut rng);
        let p = NonlinearProblem {
            base: problem.clone(),
            beta0: nl.beta0.to_core(),
            beta1: nl.beta1.to_core(),
            damping: nl.damping,
            tol: nl.tol,
            max_outer: nl.max_outer,
            inner: self.linear_solver(),
        };
        let r = if nl.sweep { nonlinear::solve_fixed_point_sweep(&p, &f, &u0)? } else { nonlinear::solve_fixed_point(&p, &f, &u0)? };
        let mut hist = Table::new("nonlinear", &["iteration", "residual", "mr_constant"]);
        for (k, res) in r.residual_history.iter().enumerate() {
            hist.push(vec![(k + 1).into(), (*res).into(), r.mr_constants[k + 1].into()]);
        }
        let mr_max = r.mr_constants.iter().copied().fold(0.0, f64::max);
        let mr_min = r.mr_constants.iter().copied().fold(f64::INFINITY, f64::min);
        let mut summary = Table::new(
            "nonlinear_summary",
            &["outer_iterations", "damping", "final_residual", "mr_initial", "mr_min", "mr_max", "sup_v_norm"],
        );
        summary.push(vec![
            r.outer_iterations.into(),
            r.damping.into(),
            (*r.residual_history.last().unwrap_or(&0.0)).into(),
            r.mr_constants[0].into(),
            mr_min.into(),
            mr_max.into(),
            r.report.sup_v_norm.into(),
        ]);
        Ok(vec![self.u_table(&rf.form, &r.report.u), hist, summary])
    }

    fn convergence(&self) -> Result<Vec<Table>> {
        let Built::Robin { case: Some(case), .. } = &self.built else {
            unreachable!("validated manufactured robin_1d family");
        };
        let n = &self.config.numerics;
        let levels: Vec<(usize, usize)> = n.levels.iter().map(|&l| (l, l * n.steps_per_cell)).collect();
        let rows = robin::convergence_study(*case, self.config.problem.horizon(), &levels, self.linear_solver())?;
        let mut t = Table::new("convergence", &["n_cells", "n_steps", "l2l2_error", "linf_l2_error", "observed_order"]);
        for r in rows {
            let order = if r.observed_order.is_finite() { Cell::Num(r.observed_order) } else { Cell::Blank };
            t.push(vec![r.n_cells.into(), r.n_steps.into(), r.l2l2_error.into(), r.linf_l2_error.into(), order]);
        }
        Ok(vec![t])
    }
}
