//! TOML run configuration.

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    TripleCheck,
    Estimates,
    SqrtCheck,
    Solve,
    MrCheck,
    Robin,
    Nonlinear,
    Convergence,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::TripleCheck => "triple-check",
            Self::Estimates => "estimates",
            Self::SqrtCheck => "sqrt-check",
            Self::Solve => "solve",
            Self::MrCheck => "mr-check",
            Self::Robin => "robin",
            Self::Nonlinear => "nonlinear",
            Self::Convergence => "convergence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaFamily {
    /// `β_j(t) = beta_j + c t^α` at both ends.
    Holder,
    Separable,
    TimeDependent,
    Neumann,
    Zero,
}

impl BetaFamily {
    pub fn manufactured(self) -> Option<maxreg::robin::ManufacturedCase> {
        use maxreg::robin::ManufacturedCase;
        match self {
            Self::Holder => None,
            Self::Separable => Some(ManufacturedCase::separable()),
            Self::TimeDependent => Some(ManufacturedCase::TimeDependent),
            Self::Neumann => Some(ManufacturedCase::NeumannMode),
            Self::Zero => Some(ManufacturedCase::Zero),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn holder() -> BetaFamily {
    BetaFamily::Holder
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum Problem {
    /// `S(t) = p(t) gram_V` on a one-dimensional triple.
    #[serde(rename = "scalar_poly")]
    ScalarPoly {
        coeffs: Vec<f64>,
        #[serde(default = "one")]
        gram_v: f64,
        #[serde(default = "half")]
        gamma: f64,
        #[serde(default = "one")]
        horizon: f64,
    },
    #[serde(rename = "diag_perturbed")]
    DiagPerturbed {
        n: usize,
        alpha: f64,
        #[serde(default = "half")]
        gamma: f64,
        amplitude: f64,
        #[serde(default = "one")]
        horizon: f64,
    },
    #[serde(rename = "robin_1d")]
    Robin1d {
        n_cells: usize,
        alpha: f64,
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "one")]
        beta0: f64,
        #[serde(default = "one")]
        beta1: f64,
        #[serde(default = "holder")]
        beta_family: BetaFamily,
        #[serde(default = "one")]
        horizon: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
}

impl Problem {
    pub fn horizon(&self) -> f64 {
        match self {
            Self::ScalarPoly { horizon, .. } | Self::DiagPerturbed { horizon, .. } | Self::Robin1d { horizon, .. } => {
                *horizon
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Stepping,
    Representation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    CrankNicolson,
    ImplicitEuler,
}

impl From<SchemeKind> for maxreg::Scheme {
    fn from(s: SchemeKind) -> Self {
        match s {
            SchemeKind::CrankNicolson => Self::CrankNicolson,
            SchemeKind::ImplicitEuler => Self::ImplicitEuler,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemigroupKind {
    Oracle,
    Contour,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Quadrature {
    pub nodes: usize,
    pub tol: f64,
    pub max_refinements: usize,
    pub corner_rel: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
}

impl Default for Quadrature {
    fn default() -> Self {
        let q = maxreg::QuadratureConfig::default();
        Self { nodes: q.nodes, tol: q.tol, max_refinements: q.max_refinements, corner_rel: q.corner_rel, truncation: q.truncation }
    }
}

impl Quadrature {
    pub fn to_core(&self) -> maxreg::QuadratureConfig {
        maxreg::QuadratureConfig {
            nodes: self.nodes,
            tol: self.tol,
            max_refinements: self.max_refinements,
            truncation: self.truncation,
            corner_rel: self.corner_rel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub n_steps: usize,
    pub solver: SolverKind,
    pub scheme: SchemeKind,
    pub tol: f64,
    pub max_iter: usize,
    pub semigroup: SemigroupKind,
    /// Snapshot time for `triple-check`, `estimates` and `sqrt-check`.
    pub t: f64,
    /// Second snapshot time for `sqrt-check`.
    pub t_perturbed: f64,
    pub ells: Vec<f64>,
    pub per_decade: usize,
    /// Mesh levels for `sqrt-check` and `convergence`.
    pub levels: Vec<usize>,
    /// `n_steps = steps_per_cell · n_cells` in `convergence`.
    pub steps_per_cell: usize,
    /// Step counts for `mr-check`.
    pub grids: Vec<usize>,
    pub draws: usize,
    pub certify_time_samples: usize,
    pub certify_vec_samples: usize,
    pub quadrature: Quadrature,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n_steps: 256,
            solver: SolverKind::Stepping,
            scheme: SchemeKind::CrankNicolson,
            tol: 1e-10,
            max_iter: 200,
            semigroup: SemigroupKind::Oracle,
            t: 0.0,
            t_perturbed: 1.0,
            ells: vec![0.0, 0.5, 1.0],
            per_decade: 8,
            levels: vec![16, 32, 64],
            steps_per_cell: 1,
            grids: vec![64, 128, 256],
            draws: 5,
            certify_time_samples: 32,
            certify_vec_samples: 16,
            quadrature: Quadrature::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Zero,
    Ones,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Data {
    pub u0: DataKind,
    pub forcing: DataKind,
}

impl Default for Data {
    fn default() -> Self {
        Self { u0: DataKind::Ones, forcing: DataKind::Zero }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientConfig {
    Zero,
    Constant { value: f64 },
    Tanh { amplitude: f64, scale: f64 },
    BoundedPoly { coeffs: Vec<f64>, radius: f64 },
}

impl CoefficientConfig {
    pub fn to_core(&self) -> maxreg::nonlinear::Coefficient {
        use maxreg::nonlinear::Coefficient;
        match self {
            Self::Zero => Coefficient::Zero,
            Self::Constant { value } => Coefficient::Constant(*value),
            Self::Tanh { amplitude, scale } => Coefficient::Tanh { amplitude: *amplitude, scale: *scale },
            Self::BoundedPoly { coeffs, radius } => Coefficient::BoundedPoly { coeffs: coeffs.clone(), radius: *radius },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Nonlinear {
    pub damping: f64,
    pub tol: f64,
    pub max_outer: usize,
    /// Try damping `1, 1/2, 1/4` instead of the fixed `damping`.
    pub sweep: bool,
    pub beta0: CoefficientConfig,
    pub beta1: CoefficientConfig,
}

impl Default for Nonlinear {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-8,
            max_outer: 50,
            sweep: false,
            beta0: CoefficientConfig::Zero,
            beta1: CoefficientConfig::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: String,
    pub prefix: String,
    pub seed: u64,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: "out".into(), prefix: String::new(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub problem: Problem,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub data: Data,
    #[serde(default)]
    pub nonlinear: Nonlinear,
    #[serde(default)]
    pub output: Output,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn backticked(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    if text.lines().all(|l| {
        let l = l.trim();
        l.is_empty() || l.starts_with('#')
    }) {
        return Err(CliError::EmptyConfig);
    }
    let config: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of(text, s.start));
        let message = e.message().trim().to_string();
        if message.starts_with("unknown field") || message.starts_with("unknown variant") {
            let key = backticked(&message).unwrap_or("?").to_string();
            if message.starts_with("unknown field") {
                return CliError::UnknownKey { key, line };
            }
            return CliError::InvalidValue { key, reason: message };
        }
        CliError::Parse { line, message }
    })?;
    validate(&config)?;
    Ok(config)
}

fn invalid(key: &str, reason: impl Into<String>) -> CliError {
    CliError::InvalidValue { key: key.into(), reason: reason.into() }
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn validate(c: &RunConfig) -> Result<(), CliError> {
    let n = &c.numerics;
    positive("numerics.tol", n.tol)?;
    positive("numerics.quadrature.tol", n.quadrature.tol)?;
    positive("numerics.quadrature.corner_rel", n.quadrature.corner_rel)?;
    if n.quadrature.corner_rel >= 1.0 {
        return Err(invalid("numerics.quadrature.corner_rel", "must be below 1"));
    }
    if let Some(r) = n.quadrature.truncation {
        positive("numerics.quadrature.truncation", r)?;
    }
    if n.quadrature.nodes < 2 {
        return Err(invalid("numerics.quadrature.nodes", "must be at least 2"));
    }
    if n.n_steps < 2 {
        return Err(invalid("numerics.n_steps", "must be at least 2"));
    }
    if n.grids.is_empty() || n.grids.iter().any(|&g| g < 2) {
        return Err(invalid("numerics.grids", "needs step counts of at least 2"));
    }
    if n.levels.is_empty() || n.levels.iter().any(|&l| l < 2) {
        return Err(invalid("numerics.levels", "needs levels of at least 2"));
    }
    if n.steps_per_cell == 0 {
        return Err(invalid("numerics.steps_per_cell", "must be at least 1"));
    }
    if n.ells.iter().any(|l| !(0.0..=1.0).contains(l)) {
        return Err(invalid("numerics.ells", "entries must lie in [0, 1]"));
    }
    if n.per_decade == 0 || n.draws == 0 || n.max_iter == 0 {
        return Err(invalid("numerics", "per_decade, draws and max_iter must be positive"));
    }
    if n.certify_time_samples < 2 || n.certify_vec_samples == 0 {
        return Err(invalid("numerics.certify_time_samples", "needs at least 2 time and 1 vector sample"));
    }
    let horizon = c.problem.horizon();
    positive("problem.horizon", horizon)?;
    for (key, t) in [("numerics.t", n.t), ("numerics.t_perturbed", n.t_perturbed)] {
        if !(0.0..=horizon).contains(&t) {
            return Err(invalid(key, format!("must lie in [0, {horizon}]")));
        }
    }
    match &c.problem {
        Problem::ScalarPoly { coeffs, gram_v, gamma, .. } => {
            if coeffs.is_empty() {
                return Err(invalid("problem.coeffs", "needs at least one coefficient"));
            }
            positive("problem.gram_v", *gram_v)?;
            if !(0.0..1.0).contains(gamma) {
                return Err(invalid("problem.gamma", "must lie in [0, 1)"));
            }
        }
        Problem::DiagPerturbed { n, alpha, gamma, .. } => {
            if *n == 0 {
                return Err(invalid("problem.n", "must be positive"));
            }
            if !(*alpha > 0.0 && *alpha <= 1.0) {
                return Err(invalid("problem.alpha", "must lie in (0, 1]"));
            }
            if !(0.0..1.0).contains(gamma) {
                return Err(invalid("problem.gamma", "must lie in [0, 1)"));
            }
        }
        Problem::Robin1d { n_cells, alpha, c: hc, gamma, .. } => {
            if *n_cells < 2 {
                return Err(invalid("problem.n_cells", "must be at least 2"));
            }
            if !(*alpha > 0.25 && *alpha <= 1.0) {
                return Err(invalid("problem.alpha", format!("must lie in (1/4, 1], got {alpha}")));
            }
            if !(*hc >= 0.0) {
                return Err(invalid("problem.c", "must be non-negative"));
            }
            if let Some(g) = gamma {
                if !(*g > 0.5 && *g < 1.0 && *g < 2.0 * alpha) {
                    return Err(invalid("problem.gamma", "must lie in (1/2, min(1, 2 alpha))"));
                }
            }
        }
    }
    let robin = matches!(c.problem, Problem::Robin1d { .. });
    match c.command {
        Command::Robin | Command::Nonlinear if !robin => {
            return Err(invalid("problem.family", format!("`{}` needs the robin_1d family", c.command.name())));
        }
        Command::Convergence => match &c.problem {
            Problem::Robin1d { beta_family, .. } if beta_family.manufactured().is_some() => {}
            _ => {
                return Err(invalid(
                    "problem.beta_family",
                    "`convergence` needs robin_1d with a manufactured beta_family",
                ))
            }
        },
        _ => {}
    }
    let nl = &c.nonlinear;
    if !(nl.damping > 0.0 && nl.damping <= 1.0) {
        return Err(invalid("nonlinear.damping", "must lie in (0, 1]"));
    }
    positive("nonlinear.tol", nl.tol)?;
    if nl.max_outer == 0 {
        return Err(invalid("nonlinear.max_outer", "must be positive"));
    }
    for (key, b) in [("nonlinear.beta0", &nl.beta0), ("nonlinear.beta1", &nl.beta1)] {
        match b {
            CoefficientConfig::Tanh { scale, amplitude } if !(scale.is_finite() && amplitude.is_finite()) => {
                return Err(invalid(key, "parameters must be finite"))
            }
            CoefficientConfig::BoundedPoly { radius, .. } => positive(&format!("{key}.radius"), *radius)?,
            _ => {}
        }
    }
    Ok(())
}
