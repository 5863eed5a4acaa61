//! Frozen-time operator `A = gram_H^{-1} S`: resolvents, resolvent and semigroup
//! estimates, the analytic semigroup by contour quadrature and `A^{-1/2}`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2, PI};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::form::NonAutonomousForm;
use crate::linalg::{self, c, CMatrix, CVector, ShiftedSolver, C64, I};
use crate::triple::HilbertTriple;

/// Quadrature controls shared by `semigroup_apply` and `inv_sqrt`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    /// Initial trapezoid intervals per contour ray (in `ln r`).
    pub nodes: usize,
    pub tol: f64,
    /// Number of step halvings allowed before giving up.
    pub max_refinements: usize,
    /// Truncation radius `R_q`; by default chosen with `e^{-t R_q cos ϑ} < 1e-16`.
    pub truncation: Option<f64>,
    /// Inner radius relative to the smallest eigenvalue modulus.
    pub corner_rel: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { nodes: 64, tol: 1e-8, max_refinements: 8, truncation: None, corner_rel: 1e-8 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::InvalidArgument("quadrature needs at least 2 nodes".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::OutOfRange { name: "tol", value: self.tol });
        }
        if !(self.corner_rel > 0.0 && self.corner_rel < 1.0) {
            return Err(Error::OutOfRange { name: "corner_rel", value: self.corner_rel });
        }
        if let Some(r) = self.truncation {
            if !(r > 0.0) {
                return Err(Error::OutOfRange { name: "truncation", value: r });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SectorialSnapshot {
    triple: Arc<HilbertTriple>,
    form_matrix: CMatrix,
    op_a: CMatrix,
    sector_theta: f64,
    contour_vartheta: f64,
    eigenvalues: Vec<C64>,
    shifted_solver: ShiftedSolver,
}

impl SectorialSnapshot {
    /// Snapshot of a bare form matrix, with `θ = arctan(M/δ)` from the observed constants.
    pub fn new(triple: Arc<HilbertTriple>, form_matrix: CMatrix) -> Result<Self> {
        let m = triple.form_norm(&form_matrix, 1.0, -1.0)?;
        let delta = linalg::min_pencil_eigenvalue(&form_matrix, triple.cholesky_v());
        if delta <= 0.0 {
            return Err(Error::NonCoercive { delta });
        }
        Self::with_theta(triple, form_matrix, (m / delta).atan())
    }

    /// Snapshot with a caller-supplied sector half-angle.
    pub fn with_theta(triple: Arc<HilbertTriple>, form_matrix: CMatrix, theta: f64) -> Result<Self> {
        let n = triple.dim();
        if form_matrix.nrows() != n || form_matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: form_matrix.nrows() });
        }
        if !(0.0..FRAC_PI_2).contains(&theta) {
            return Err(Error::OutOfRange { name: "sector_theta", value: theta });
        }
        let op_a = triple.form_operator(&form_matrix);
        let eigenvalues = linalg::eigenvalues(&op_a);
        let min_re = eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        if !(min_re > 0.0) {
            return Err(Error::NotStable { min_re });
        }
        let worst = eigenvalues.iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
        if worst > theta + 1e-9 {
            return Err(Error::NotSectorial { angle: worst, theta });
        }
        let shifted_solver = ShiftedSolver::new(&op_a);
        Ok(Self {
            triple,
            form_matrix,
            op_a,
            sector_theta: theta,
            contour_vartheta: 0.5 * theta + FRAC_PI_4,
            eigenvalues,
            shifted_solver,
        })
    }

    /// `A(t)` of a form, with the sector from the declared constants.
    pub fn from_form(form: &NonAutonomousForm, t: f64) -> Result<Self> {
        Self::with_theta(form.triple().clone(), form.matrix_at(t), form.sector_theta())
    }

    /// Identity triple (`gram_H = gram_V = I`) carrying the operator `a` directly.
    pub fn from_operator(a: CMatrix, theta: f64) -> Result<Self> {
        let n = a.nrows();
        let triple = Arc::new(HilbertTriple::new(CMatrix::identity(n, n), CMatrix::identity(n, n))?);
        Self::with_theta(triple, a, theta)
    }

    /// The snapshot of `S + μ gram_H`, same sector.
    pub fn shifted(&self, mu: f64) -> Result<Self> {
        let s = &self.form_matrix + self.triple.gram_h() * c(mu);
        Self::with_theta(self.triple.clone(), s, self.sector_theta)
    }

    pub fn triple(&self) -> &Arc<HilbertTriple> {
        &self.triple
    }

    pub fn form_matrix(&self) -> &CMatrix {
        &self.form_matrix
    }

    pub fn op_a(&self) -> &CMatrix {
        &self.op_a
    }

    pub fn sector_theta(&self) -> f64 {
        self.sector_theta
    }

    pub fn contour_vartheta(&self) -> f64 {
        self.contour_vartheta
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn min_re_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    /// `(λ I − A)^{-1}`.
    pub fn resolvent(&self, lambda: C64) -> Result<CMatrix> {
        let scale = lambda.norm().max(self.spectral_radius()).max(1.0);
        if self.eigenvalues.iter().any(|z| (lambda - z).norm() <= 1e-13 * scale) {
            return Err(Error::SingularResolvent { lambda });
        }
        let n = self.op_a.nrows();
        let shifted = CMatrix::identity(n, n) * lambda - &self.op_a;
        shifted.lu().try_inverse().ok_or(Error::SingularResolvent { lambda })
    }

    /// `(λ I − A)^{-1} v` in `O(n²)` through the cached Hessenberg form.
    pub fn resolvent_apply(&self, lambda: C64, v: &CVector) -> Result<CVector> {
        self.shifted_solver.solve(lambda, v).ok_or(Error::SingularResolvent { lambda })
    }

    /// `e^{-tA}` by Padé scaling and squaring; the identity at `t = 0`.
    pub fn semigroup_oracle(&self, t: f64) -> CMatrix {
        let n = self.op_a.nrows();
        if t == 0.0 {
            return CMatrix::identity(n, n);
        }
        (&self.op_a * c(-t)).exp()
    }

    /// `e^{-tA} v` by trapezoid quadrature in `x = ln r` along `Γ = {r e^{±iϑ}}`,
    /// halving the step until two successive sums agree to `quad.tol`, or to rounding
    /// level when the result is much smaller than the integrand.
    pub fn semigroup_apply(&self, t: f64, v: &CVector, quad: &QuadratureConfig) -> Result<CVector> {
        if !(t > 0.0) {
            return Err(Error::OutOfRange { name: "t", value: t });
        }
        quad.validate()?;
        if v.len() != self.op_a.nrows() {
            return Err(Error::DimensionMismatch { expected: self.op_a.nrows(), found: v.len() });
        }
        let vt = self.contour_vartheta;
        let cos_t = vt.cos();
        let r_min = quad.corner_rel * self.min_abs_eigenvalue();
        let r_max = quad.truncation.unwrap_or(36.84 / (t * cos_t)).max(2.0 * r_min);
        let (x0, x1) = (r_min.ln(), r_max.ln());
        let e_plus = C64::from_polar(1.0, vt);
        let e_minus = e_plus.conj();

        // Each node also reports the size of its two terms: their sum bounds the
        // rounding error of the cancelling quadrature sum.
        let node = |x: f64| -> Result<(CVector, f64)> {
            let r = x.exp();
            let (lp, lm) = (e_plus * r, e_minus * r);
            let rp = self.resolvent_apply(lp, v)?;
            let rm = self.resolvent_apply(lm, v)?;
            let w = r / (2.0 * PI) * -I;
            let tm = rm * (e_minus * (-t * lm).exp() * w);
            let tp = rp * (e_plus * (-t * lp).exp() * w);
            let size = self.triple.h_norm(&tm) + self.triple.h_norm(&tp);
            Ok((tm - tp, size))
        };
        let eval_nodes = |xs: Vec<f64>| -> Result<(CVector, f64)> {
            let vals: Vec<Result<(CVector, f64)>> = xs.into_par_iter().map(node).collect();
            let mut acc = CVector::zeros(v.len());
            let mut size = 0.0;
            for val in vals {
                let (term, s) = val?;
                acc += term;
                size += s;
            }
            Ok((acc, size))
        };

        // Below r_min the integrand is e^x times a constant vector to O(r_min), so the
        // trapezoid nodes x0 - kh, k >= 0, sum to f(x0) / (1 - e^{-h}).
        let mut intervals = quad.nodes;
        let mut h = (x1 - x0) / intervals as f64;
        let ((low, s_low), (b, sb)) = (node(x0)?, node(x1)?);
        let (interior, si) = eval_nodes((1..intervals).map(|k| x0 + k as f64 * h).collect())?;
        let mut raw = b * c(0.5) + interior;
        let mut mass = s_low + 0.5 * sb + si;
        let total = |raw: &CVector, h: f64| (raw - &low * c(1.0 / (-h).exp_m1())) * c(h);
        let mut estimate = total(&raw, h);
        let mut last_change = f64::INFINITY;
        for _ in 0..quad.max_refinements {
            let (mids, sm) = eval_nodes((0..intervals).map(|k| x0 + (k as f64 + 0.5) * h).collect())?;
            raw += mids;
            mass += sm;
            intervals *= 2;
            h *= 0.5;
            let refined = total(&raw, h);
            let scale = self.triple.h_norm(&refined).max(f64::MIN_POSITIVE);
            let change = self.triple.h_norm(&(&refined - &estimate));
            let floor = 64.0 * f64::EPSILON * h * mass;
            last_change = change / scale;
            estimate = refined;
            if change <= (quad.tol * scale).max(floor) {
                return Ok(estimate);
            }
        }
        Err(Error::QuadratureNotConverged { estimate: last_change, tol: quad.tol })
    }

    /// `A^{-1/2} = π^{-1/2} ∫ t^{1/2} e^{-tA} dx`, `t = e^x`, by the trapezoid rule on
    /// nodes `t = t_lo 2^{i/m + o}`. Nodes below `t_lo = 1/(2‖A‖_F)` are summed in closed
    /// form from the Taylor series; above it `e^{-tA} = I + Y` is doubled by `Y ← 2Y + Y²`.
    pub fn inv_sqrt(&self, quad: &QuadratureConfig) -> Result<CMatrix> {
        quad.validate()?;
        let min_re = self.min_re_eigenvalue();
        if !(min_re > 0.0) {
            return Err(Error::NotStable { min_re });
        }
        let n = self.op_a.nrows();
        let norm = self.op_a.norm();
        let b = &self.op_a / c(norm);
        let t_lo = 0.5 / norm;
        let t_max = 50.0 / min_re;
        let octaves = ((t_max / t_lo).log2().ceil() as usize).max(1);
        const TERMS: usize = 32;
        let mut powers = Vec::with_capacity(TERMS + 1);
        powers.push(CMatrix::identity(n, n));
        for k in 1..=TERMS {
            powers.push(&powers[k - 1] * &b);
        }

        // Sum over the trapezoid nodes t_i 2^o, o = 0.., plus the Taylor-region tail o < 0.
        let column = |base: f64| -> CMatrix {
            let mut tail = CMatrix::zeros(n, n);
            let mut y = CMatrix::zeros(n, n);
            let mut factor = 1.0;
            for (k, pk) in powers.iter().enumerate() {
                if k > 0 {
                    factor *= -base * norm / k as f64;
                    y += pk * c(factor);
                }
                let p = k as f64 + 0.5;
                let below = 2f64.powf(-p) / (1.0 - 2f64.powf(-p));
                let coeff = (-base * norm).powi(k as i32) / factorial(k) * base.sqrt() * below;
                tail += pk * c(coeff);
            }
            let mut sum = tail;
            let mut t = base;
            for _ in 0..octaves {
                sum += (&y + CMatrix::identity(n, n)) * c(t.sqrt());
                y = &y * c(2.0) + &y * &y;
                t *= 2.0;
            }
            sum
        };

        let mut m = 4usize;
        let mut columns: Vec<CMatrix> = (0..m).map(|i| column(t_lo * 2f64.powf(i as f64 / m as f64))).collect();
        let scale = 1.0 / PI.sqrt();
        let mut last = f64::INFINITY;
        for refinement in 0..=quad.max_refinements {
            let h = LN_2 / m as f64;
            let fine: CMatrix = columns.iter().fold(CMatrix::zeros(n, n), |acc, col| acc + col) * c(h * scale);
            let coarse: CMatrix =
                columns.iter().step_by(2).fold(CMatrix::zeros(n, n), |acc, col| acc + col) * c(2.0 * h * scale);
            let diff = (&fine - &coarse).norm() / fine.norm();
            // The trapezoid error decays exponentially in 1/h, so halving h roughly squares it.
            last = if diff < 1e-2 { diff * diff } else { diff };
            if last <= quad.tol {
                return Ok(fine);
            }
            if refinement == quad.max_refinements {
                break;
            }
            let new_m = 2 * m;
            let mut next = Vec::with_capacity(new_m);
            for (i, old) in columns.into_iter().enumerate() {
                next.push(old);
                next.push(column(t_lo * 2f64.powf((2 * i + 1) as f64 / new_m as f64)));
            }
            columns = next;
            m = new_m;
        }
        Err(Error::QuadratureNotConverged { estimate: last, tol: quad.tol })
    }

    /// `A^{1/2}` as the inverse of `inv_sqrt`.
    pub fn sqrt(&self, quad: &QuadratureConfig) -> Result<CMatrix> {
        let inv = self.inv_sqrt(quad)?;
        linalg::inverse(&inv).ok_or(Error::NotStable { min_re: self.min_re_eigenvalue() })
    }

    /// Observed constants of the resolvent estimates over `lambdas`.
    pub fn verify_resolvent_estimates(&self, ell: f64, lambdas: &[C64]) -> Result<ResolventReport> {
        if !(0.0..=1.0).contains(&ell) {
            return Err(Error::OutOfRange { name: "ell", value: ell });
        }
        for z in lambdas {
            if z.norm() > 0.0 && z.arg().abs() < self.sector_theta {
                return Err(Error::InvalidArgument(format!("sample {z} lies inside the sector")));
            }
        }
        let specs = ResolventEstimate::all();
        let mut values = vec![Vec::with_capacity(lambdas.len()); specs.len()];
        for &z in lambdas {
            let r = self.resolvent(z)?;
            for (k, e) in specs.iter().enumerate() {
                let (li, lo, p) = e.scales(ell);
                let norm = self.triple.operator_norm_scales(&r, li, lo)?;
                values[k].push(norm * (1.0 + z.norm()).powf(p));
            }
        }
        let estimates = specs
            .iter()
            .zip(values)
            .map(|(&estimate, vals)| {
                let (ell_in, ell_out, exponent) = estimate.scales(ell);
                let (arg, c_observed) = argmax(&vals);
                EstimateConstant {
                    estimate,
                    ell_in,
                    ell_out,
                    exponent,
                    c_observed,
                    worst_lambda: lambdas.get(arg).copied().unwrap_or_default(),
                    growth: ray_growth(lambdas, &vals),
                }
            })
            .collect();
        Ok(ResolventReport { ell, estimates })
    }

    /// Default samples outside the sector: rays at `ϑ, π/2, 3π/4, π` and mirrors,
    /// radii geometric on `[1e-3, 1e3 ρ(A)]` with `per_decade` points per decade.
    pub fn default_lambda_samples(&self, per_decade: usize) -> Vec<C64> {
        let angles = [self.contour_vartheta, FRAC_PI_2, 0.75 * PI, PI];
        let radii = geometric(1e-3, 1e3 * self.spectral_radius().max(1.0), per_decade);
        let mut out = Vec::new();
        for &a in &angles {
            for &r in &radii {
                out.push(C64::from_polar(r, a));
                if a < PI {
                    out.push(C64::from_polar(r, -a));
                }
            }
        }
        out
    }

    /// Observed constants of the semigroup decay bounds and of `sup t‖A e^{-tA}‖`.
    pub fn semigroup_decay_constants(&self, ell: f64, times: &[f64]) -> Result<SemigroupReport> {
        if !(0.0..=1.0).contains(&ell) {
            return Err(Error::OutOfRange { name: "ell", value: ell });
        }
        let mut c12: f64 = 0.0;
        let mut c13: f64 = 0.0;
        let mut c14: f64 = 0.0;
        let mut analytic: f64 = 0.0;
        for &t in times {
            if !(t > 0.0) {
                return Err(Error::OutOfRange { name: "t", value: t });
            }
            let e = self.semigroup_oracle(t);
            let tr = &self.triple;
            c12 = c12.max(tr.operator_norm_scales(&e, -ell, 1.0)? * t.powf(0.5 * (1.0 + ell)));
            c13 = c13.max(tr.operator_norm_scales(&e, ell, 1.0)? * t.powf(0.5 * (1.0 - ell)));
            c14 = c14.max(tr.operator_norm_scales(&e, -ell, 0.0)? * t.powf(0.5 * ell));
            analytic = analytic.max(tr.operator_norm_scales(&(&self.op_a * &e), 0.0, 0.0)? * t);
        }
        Ok(SemigroupReport { ell, dual_to_v: c12, scale_to_v: c13, dual_to_h: c14, analytic })
    }

    /// Times geometric on `[1e-3/ρ(A), 50/min Re σ(A)]`.
    pub fn default_time_samples(&self, per_decade: usize) -> Vec<f64> {
        geometric(1e-3 / self.spectral_radius(), 50.0 / self.min_re_eigenvalue(), per_decade)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

/// Geometric samples from `lo` to at least `hi` with `per_decade` points per decade.
pub fn geometric(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let per_decade = per_decade.max(1);
    let count = ((hi / lo).log10() * per_decade as f64).ceil().max(1.0) as usize;
    (0..=count).map(|k| lo * 10f64.powf(k as f64 / per_decade as f64)).collect()
}

fn argmax(vals: &[f64]) -> (usize, f64) {
    vals.iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best })
}

/// True when some ray attains its maximum at its outermost sample while still increasing.
fn ray_growth(lambdas: &[C64], vals: &[f64]) -> bool {
    let mut rays: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for (z, &v) in lambdas.iter().zip(vals) {
        let a = z.arg();
        match rays.iter_mut().find(|(angle, _)| (angle - a).abs() < 1e-12) {
            Some((_, pts)) => pts.push((z.norm(), v)),
            None => rays.push((a, vec![(z.norm(), v)])),
        }
    }
    rays.into_iter().any(|(_, mut pts)| {
        if pts.len() < 3 {
            return false;
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let k = pts.len();
        let peak = pts.iter().map(|p| p.1).fold(0.0, f64::max);
        pts[k - 1].1 >= peak && pts[k - 1].1 > pts[k - 2].1 * (1.0 + 1e-3)
    })
}

/// The six resolvent bounds, labelled by the spaces they act between.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventEstimate {
    /// `L(V_ℓ')`, decay `1`.
    DualScale,
    /// `L(V_ℓ)`, decay `1`.
    Scale,
    /// `L(V_ℓ', V)`, decay `(1−ℓ)/2`.
    DualToV,
    /// `L(V_ℓ', H)`, decay `1 − ℓ/2`.
    DualToH,
    /// `L(H, V_ℓ)`, decay `1 − ℓ/2`.
    HToScale,
    /// `L(V_ℓ', V_ℓ)`, decay `1 − ℓ`.
    DualToScale,
}

impl ResolventEstimate {
    pub fn all() -> [Self; 6] {
        use ResolventEstimate::*;
        [DualScale, Scale, DualToV, DualToH, HToScale, DualToScale]
    }

    pub fn label(self) -> &'static str {
        use ResolventEstimate::*;
        match self {
            DualScale => "dual_scale",
            Scale => "scale",
            DualToV => "dual_to_v",
            DualToH => "dual_to_h",
            HToScale => "h_to_scale",
            DualToScale => "dual_to_scale",
        }
    }

    /// `(ℓ_in, ℓ_out, decay exponent)`.
    pub fn scales(self, ell: f64) -> (f64, f64, f64) {
        use ResolventEstimate::*;
        match self {
            DualScale => (-ell, -ell, 1.0),
            Scale => (ell, ell, 1.0),
            DualToV => (-ell, 1.0, 0.5 * (1.0 - ell)),
            DualToH => (-ell, 0.0, 1.0 - 0.5 * ell),
            HToScale => (0.0, ell, 1.0 - 0.5 * ell),
            DualToScale => (-ell, ell, 1.0 - ell),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateConstant {
    pub estimate: ResolventEstimate,
    pub ell_in: f64,
    pub ell_out: f64,
    pub exponent: f64,
    pub c_observed: f64,
    pub worst_lambda: C64,
    /// Unbounded growth along a sample ray.
    pub growth: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventReport {
    pub ell: f64,
    pub estimates: Vec<EstimateConstant>,
}

impl ResolventReport {
    pub fn constant(&self, which: ResolventEstimate) -> f64 {
        self.estimates.iter().find(|e| e.estimate == which).map_or(f64::NAN, |e| e.c_observed)
    }
}

/// Observed `sup_t t^p ‖e^{-tA}‖` for the three scale pairs and `sup_t ‖t A e^{-tA}‖_{L(H)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupReport {
    pub ell: f64,
    /// `L(V_ℓ', V)` with weight `t^{(1+ℓ)/2}`.
    pub dual_to_v: f64,
    /// `L(V_ℓ, V)` with weight `t^{(1−ℓ)/2}`.
    pub scale_to_v: f64,
    /// `L(V_ℓ', H)` with weight `t^{ℓ/2}`.
    pub dual_to_h: f64,
    pub analytic: f64,
}

/// `max ‖R_t(λ) − R_s(λ)‖_{L(V_γ', V)} (1+|λ|)^{1−γ} / ω(|t−s|)` over the samples.
pub fn resolvent_continuity_constant(form: &NonAutonomousForm, lambdas: &[C64], pairs: &[(f64, f64)]) -> Result<f64> {
    let gamma = form.modulus().gamma;
    let triple = form.triple();
    let mut worst: f64 = 0.0;
    for &(t, s) in pairs {
        let w = form.modulus().eval(t - s);
        if w == 0.0 {
            continue;
        }
        let pt = SectorialSnapshot::from_form(form, t)?;
        let ps = SectorialSnapshot::from_form(form, s)?;
        for &z in lambdas {
            let d = pt.resolvent(z)? - ps.resolvent(z)?;
            let v = triple.operator_norm_scales(&d, -gamma, 1.0)? * (1.0 + z.norm()).powf(1.0 - gamma);
            worst = worst.max(v / w);
        }
    }
    Ok(worst)
}

/// Pairs `(a, a ± T 2^{-k})`, `k = 1..=k_max`, anchored at `0`, `T/2` and `T`.
pub fn dyadic_pairs(horizon: f64, k_max: usize) -> Vec<(f64, f64)> {
    let mut pairs = Vec::new();
    for anchor in [0.0, 0.5 * horizon, horizon] {
        for k in 1..=k_max {
            let d = horizon * 0.5_f64.powi(k as i32);
            let s = if anchor + d <= horizon { anchor + d } else { anchor - d };
            pairs.push((anchor, s));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, real_matrix, real_vector};

    fn op(a: CMatrix) -> SectorialSnapshot {
        SectorialSnapshot::from_operator(a, FRAC_PI_4).unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) {
        assert!((a - b).norm() <= tol * b.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn resolvent_examples() {
        close(&op(diag(&[2.0])).resolvent(c(-1.0)).unwrap(), &diag(&[-1.0 / 3.0]), 1e-15);
        let r = op(diag(&[1.0, 3.0])).resolvent(I).unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![(I - 1.0).inv(), (I - 3.0).inv()]));
        close(&r, &expected, 1e-15);
        let jordan = op(real_matrix(2, 2, &[2.0, 1.0, 0.0, 2.0]));
        close(&jordan.resolvent(c(0.0)).unwrap(), &real_matrix(2, 2, &[-0.5, 0.25, 0.0, -0.5]), 1e-15);
        assert!(matches!(jordan.resolvent(c(2.0)), Err(Error::SingularResolvent { .. })));
    }

    #[test]
    fn snapshot_rejects_unstable_and_non_sectorial() {
        assert!(matches!(SectorialSnapshot::from_operator(diag(&[-1.0]), 0.5), Err(Error::NotStable { .. })));
        let rot = real_matrix(2, 2, &[1.0, -2.0, 2.0, 1.0]);
        assert!(matches!(SectorialSnapshot::from_operator(rot, 0.5), Err(Error::NotSectorial { .. })));
    }

    #[test]
    fn oracle_examples() {
        let p = op(diag(&[3.0]));
        assert_eq!(p.semigroup_oracle(0.0), CMatrix::identity(1, 1));
        assert!((p.semigroup_oracle(1.0)[(0, 0)].re - (-3.0f64).exp()).abs() < 1e-15);
        // [[2,1],[1,2]] = Q diag(1,3) Q*, Q = [[1,1],[-1,1]]/√2.
        let s = op(real_matrix(2, 2, &[2.0, 1.0, 1.0, 2.0]));
        let (e1, e3) = ((-1.0f64).exp(), (-3.0f64).exp());
        let expected = real_matrix(2, 2, &[(e1 + e3) / 2.0, (e3 - e1) / 2.0, (e3 - e1) / 2.0, (e1 + e3) / 2.0]);
        close(&s.semigroup_oracle(1.0), &expected, 1e-14);
    }

    #[test]
    fn contour_examples() {
        let q = QuadratureConfig::default();
        let v = op(diag(&[1.0])).semigroup_apply(1.0, &real_vector(&[1.0]), &q).unwrap();
        assert!((v[0] - c((-1.0f64).exp())).norm() < 1e-8);
        let v = op(diag(&[1.0, 3.0])).semigroup_apply(0.5, &real_vector(&[1.0, 1.0]), &q).unwrap();
        assert!((&v - real_vector(&[(-0.5f64).exp(), (-1.5f64).exp()])).norm() < 1e-8);
        let v = op(real_matrix(2, 2, &[2.0, 1.0, 0.0, 2.0])).semigroup_apply(1.0, &real_vector(&[0.0, 1.0]), &q).unwrap();
        let e2 = (-2.0f64).exp();
        assert!((&v - real_vector(&[-e2, e2])).norm() < 1e-8, "{v}");
    }

    #[test]
    fn inv_sqrt_examples() {
        let q = QuadratureConfig::default();
        close(&op(diag(&[4.0])).inv_sqrt(&q).unwrap(), &diag(&[0.5]), 1e-10);
        close(&op(diag(&[1.0, 9.0])).inv_sqrt(&q).unwrap(), &diag(&[1.0, 1.0 / 3.0]), 1e-10);
        let a = 0.5 * (1.0 + 3f64.sqrt().recip());
        let b = 0.5 * (1.0 - 3f64.sqrt().recip());
        close(
            &op(real_matrix(2, 2, &[2.0, 1.0, 1.0, 2.0])).inv_sqrt(&q).unwrap(),
            &real_matrix(2, 2, &[a, -b, -b, a]),
            1e-10,
        );
    }

    #[test]
    fn inv_sqrt_of_jordan_block() {
        // (2I + N)^{-1/2} = 2^{-1/2}(I − N/4).
        let s = 2f64.sqrt().recip();
        let p = op(real_matrix(2, 2, &[2.0, 1.0, 0.0, 2.0]));
        close(&p.inv_sqrt(&QuadratureConfig::default()).unwrap(), &real_matrix(2, 2, &[s, -s / 4.0, 0.0, s]), 1e-10);
    }

    #[test]
    fn resolvent_estimate_examples() {
        let lambdas = [c(-1.0), c(-10.0), c(-100.0)];
        let r = op(diag(&[1.0])).verify_resolvent_estimates(0.0, &lambdas).unwrap();
        let c16 = r.constant(ResolventEstimate::Scale);
        assert!((c16 - 1.0).abs() < 1e-12, "{c16}");

        let p = op(diag(&[1.0, 3.0]));
        let far: Vec<C64> = [1e2, 1e4, 1e6].iter().map(|&x| c(-x)).collect();
        let r = p.verify_resolvent_estimates(1.0, &far).unwrap();
        assert!(r.constant(ResolventEstimate::Scale) <= 1.0 + 1e-12);

        let r = op(diag(&[1.0])).verify_resolvent_estimates(0.5, &[c(-1.0)]).unwrap();
        for e in &r.estimates {
            let expected = 0.5 * 2f64.powf(e.exponent);
            assert!((e.c_observed - expected).abs() < 1e-12);
        }
        assert!((r.constant(ResolventEstimate::DualScale) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decay_constants_of_identity() {
        let p = op(diag(&[1.0]));
        let times = p.default_time_samples(10);
        let r = p.semigroup_decay_constants(0.0, &times).unwrap();
        // sup t e^{-t} = 1/e.
        assert!((r.analytic - (-1.0f64).exp()).abs() < 1e-3);
    }
}
