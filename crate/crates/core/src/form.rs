//! Non-autonomous sesquilinear forms `a(t; u, v) = v* S(t) u` on a fixed triple.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::quadrature;
use crate::triple::HilbertTriple;

#[derive(Debug, Clone, PartialEq)]
pub enum ModulusKind {
    /// `ω(r) = c r^α`.
    Holder { alpha: f64, c: f64 },
    /// Piecewise linear through `(r, ω(r))` samples, `ω(0) = 0`, constant past the last sample.
    Tabulated(Vec<(f64, f64)>),
}

/// Modulus of continuity `ω` together with the scale exponent `γ ∈ [0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusOfContinuity {
    pub kind: ModulusKind,
    pub gamma: f64,
}

impl ModulusOfContinuity {
    pub fn holder(alpha: f64, c: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::OutOfRange { name: "alpha", value: alpha });
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::OutOfRange { name: "c", value: c });
        }
        Self::check_gamma(gamma)?;
        Ok(Self { kind: ModulusKind::Holder { alpha, c }, gamma })
    }

    pub fn tabulated(mut samples: Vec<(f64, f64)>, gamma: f64) -> Result<Self> {
        Self::check_gamma(gamma)?;
        if samples.is_empty() {
            return Err(Error::InvalidArgument("tabulated modulus needs samples".into()));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.iter().any(|&(r, w)| r < 0.0 || w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidArgument("modulus samples must be nonnegative".into()));
        }
        Ok(Self { kind: ModulusKind::Tabulated(samples), gamma })
    }

    fn check_gamma(gamma: f64) -> Result<()> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::OutOfRange { name: "gamma", value: gamma });
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        match &self.kind {
            ModulusKind::Holder { alpha, c } => c * r.powf(*alpha),
            ModulusKind::Tabulated(samples) => {
                let mut prev = (0.0, 0.0);
                for &(ri, wi) in samples {
                    if r <= ri {
                        if ri == prev.0 {
                            return wi;
                        }
                        return prev.1 + (wi - prev.1) * (r - prev.0) / (ri - prev.0);
                    }
                    prev = (ri, wi);
                }
                prev.1
            }
        }
    }

    /// `sup_{0 < t ≤ T} ω(t) / t^{γ/2}` (infinite when the bound fails).
    pub fn omega_bdd_sup(&self, horizon: f64) -> f64 {
        let half = 0.5 * self.gamma;
        match &self.kind {
            ModulusKind::Holder { alpha, c } => {
                if *c == 0.0 {
                    0.0
                } else if *alpha > half {
                    c * horizon.powf(alpha - half)
                } else if *alpha == half {
                    *c
                } else {
                    f64::INFINITY
                }
            }
            ModulusKind::Tabulated(_) => (0..=60)
                .map(|k| {
                    let t = horizon * 0.5_f64.powi(k);
                    self.eval(t) / t.powf(half)
                })
                .fold(0.0, f64::max),
        }
    }

    /// `∫_{T 2^{-levels}}^T ω(t)/t^{1+γ/2} dt`, or with `squared` the integral of `ω(t)²/t^{1+γ}`.
    pub fn weighted_integral(&self, horizon: f64, levels: usize, squared: bool) -> f64 {
        let g = self.gamma;
        let integrand = |t: f64| {
            if squared {
                self.eval(t).powi(2) / t.powf(1.0 + g)
            } else {
                self.eval(t) / t.powf(1.0 + 0.5 * g)
            }
        };
        quadrature::dyadic_gauss(integrand, horizon, levels, 8)
    }

    /// Whether the modulus is strong enough for maximal regularity: `α > γ/2` for
    /// Hölder moduli, a numerically convergent weighted `L¹` integral otherwise.
    pub fn supports_maximal_regularity(&self, horizon: f64) -> bool {
        match &self.kind {
            ModulusKind::Holder { alpha, c } => *c == 0.0 || *alpha > 0.5 * self.gamma,
            ModulusKind::Tabulated(_) => {
                let coarse = self.weighted_integral(horizon, 40, false);
                let fine = self.weighted_integral(horizon, 80, false);
                fine.is_finite() && (fine - coarse).abs() <= 1e-6 * fine.abs().max(1e-300)
            }
        }
    }
}

pub type FormFn = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// A time-dependent form on `[0, T]` with its declared constants `M`, `δ` and modulus `ω`.
#[derive(Clone)]
pub struct NonAutonomousForm {
    triple: Arc<HilbertTriple>,
    matrix_at: FormFn,
    horizon: f64,
    bound_m: f64,
    coercivity_delta: f64,
    modulus: ModulusOfContinuity,
}

impl fmt::Debug for NonAutonomousForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonAutonomousForm")
            .field("dim", &self.triple.dim())
            .field("horizon", &self.horizon)
            .field("bound_m", &self.bound_m)
            .field("coercivity_delta", &self.coercivity_delta)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl NonAutonomousForm {
    pub fn new(
        triple: Arc<HilbertTriple>,
        matrix_at: FormFn,
        horizon: f64,
        bound_m: f64,
        coercivity_delta: f64,
        modulus: ModulusOfContinuity,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::OutOfRange { name: "horizon", value: horizon });
        }
        if !(bound_m > 0.0) {
            return Err(Error::OutOfRange { name: "bound_m", value: bound_m });
        }
        if !(coercivity_delta > 0.0) {
            return Err(Error::OutOfRange { name: "coercivity_delta", value: coercivity_delta });
        }
        let s0 = matrix_at(0.0);
        if s0.nrows() != triple.dim() || s0.ncols() != triple.dim() {
            return Err(Error::DimensionMismatch { expected: triple.dim(), found: s0.nrows() });
        }
        Ok(Self { triple, matrix_at, horizon, bound_m, coercivity_delta, modulus })
    }

    /// Builds a form whose `M` and `δ` are measured on `samples + 1` uniform times
    /// (with a relative safety margin `1e-9`).
    pub fn with_observed_constants(
        triple: Arc<HilbertTriple>,
        matrix_at: FormFn,
        horizon: f64,
        modulus: ModulusOfContinuity,
        samples: usize,
    ) -> Result<Self> {
        let samples = samples.max(1);
        let mut m: f64 = 0.0;
        let mut delta = f64::INFINITY;
        for k in 0..=samples {
            let s = matrix_at(horizon * k as f64 / samples as f64);
            m = m.max(triple.form_norm(&s, 1.0, -1.0)?);
            delta = delta.min(linalg::min_pencil_eigenvalue(&s, triple.cholesky_v()));
        }
        if delta <= 0.0 {
            return Err(Error::NonCoercive { delta });
        }
        Self::new(triple, matrix_at, horizon, m * (1.0 + 1e-9), delta * (1.0 - 1e-9), modulus)
    }

    pub fn triple(&self) -> &Arc<HilbertTriple> {
        &self.triple
    }

    pub fn dim(&self) -> usize {
        self.triple.dim()
    }

    pub fn matrix_at(&self, t: f64) -> CMatrix {
        (self.matrix_at)(t)
    }

    pub fn matrix_fn(&self) -> &FormFn {
        &self.matrix_at
    }

    /// `A(t) = gram_H^{-1} S(t)`.
    pub fn operator_at(&self, t: f64) -> CMatrix {
        self.triple.form_operator(&self.matrix_at(t))
    }

    /// `a(t; u, v) = v* S(t) u`.
    pub fn eval(&self, t: f64, u: &CVector, v: &CVector) -> C64 {
        v.dotc(&(self.matrix_at(t) * u))
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn bound_m(&self) -> f64 {
        self.bound_m
    }

    pub fn coercivity_delta(&self) -> f64 {
        self.coercivity_delta
    }

    pub fn modulus(&self) -> &ModulusOfContinuity {
        &self.modulus
    }

    /// Numerical-range sector angle `arctan(M/δ)` from the declared constants.
    pub fn sector_theta(&self) -> f64 {
        (self.bound_m / self.coercivity_delta).atan()
    }

    /// The adjoint form `a*(t; u, v) = conj(a(t; v, u))`, i.e. `S(t)*`.
    pub fn adjoint(&self) -> Self {
        let inner = self.matrix_at.clone();
        Self {
            triple: self.triple.clone(),
            matrix_at: Arc::new(move |t| inner(t).adjoint()),
            horizon: self.horizon,
            bound_m: self.bound_m,
            coercivity_delta: self.coercivity_delta,
            modulus: self.modulus.clone(),
        }
    }

    /// The form shifted by `μ (u | v)_H`.
    pub fn shifted(&self, mu: f64) -> Result<Self> {
        let inner = self.matrix_at.clone();
        let gram = self.triple.gram_h().clone();
        let c_h2 = self.triple.embed_const().powi(2);
        // |μ (u|v)_H| ≤ |μ| c_H² ‖u‖_V ‖v‖_V and Re adds μ‖u‖_H² ≥ 0 for μ ≥ 0.
        let delta = if mu >= 0.0 { self.coercivity_delta } else { self.coercivity_delta + mu * c_h2 };
        Self::new(
            self.triple.clone(),
            Arc::new(move |t| inner(t) + &gram * linalg::c(mu)),
            self.horizon,
            self.bound_m + mu.abs() * c_h2,
            delta,
            self.modulus.clone(),
        )
    }

    pub fn certify_constants(&self, n_time_samples: usize, n_vec_samples: usize, seed: u64) -> Result<CertifyReport> {
        certify_constants(self, n_time_samples, n_vec_samples, seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaViolation {
    pub t: f64,
    pub s: f64,
    pub observed: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyReport {
    pub m_observed: f64,
    pub delta_observed: f64,
    /// Worst pair where `‖S(t) − S(s)‖_{V→V_γ'} > ω(|t−s|)`, if any.
    pub omega_violation: Option<OmegaViolation>,
    /// Largest `‖S(t) − S(s)‖_{V→V_γ'} / ω(|t−s|)` over the sampled pairs.
    pub omega_ratio: f64,
    /// Largest `|Im a(t;u,u)| / Re a(t;u,u)` over random vectors.
    pub sector_ratio: f64,
    /// Largest `|a(t;u,v)| / (‖u‖_V ‖v‖_V)` over random vectors.
    pub random_bound_ratio: f64,
    pub pairs_checked: usize,
}

fn sample_pairs(horizon: f64, n_time_samples: usize) -> Vec<(f64, f64)> {
    let times: Vec<f64> = (0..n_time_samples)
        .map(|k| horizon * k as f64 / (n_time_samples - 1) as f64)
        .collect();
    let mut pairs = Vec::new();
    for w in times.windows(2) {
        pairs.push((w[0], w[1]));
    }
    for &t in &times[1..] {
        pairs.push((0.0, t));
    }
    // Dyadic pairs near coincidence, anchored at the start, middle and end.
    for anchor in [0.0, 0.5 * horizon, horizon] {
        for k in 1..=20 {
            let d = horizon * 0.5_f64.powi(k);
            let s = if anchor + d <= horizon { anchor + d } else { anchor - d };
            pairs.push((anchor, s));
        }
    }
    pairs
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Sampling falsifier for the declared boundedness, coercivity and modulus of `form`.
pub fn certify_constants(
    form: &NonAutonomousForm,
    n_time_samples: usize,
    n_vec_samples: usize,
    seed: u64,
) -> Result<CertifyReport> {
    if n_time_samples < 2 {
        return Err(Error::InvalidArgument("n_time_samples must be at least 2".into()));
    }
    let triple = form.triple();
    let horizon = form.horizon();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let times: Vec<f64> = (0..n_time_samples)
        .map(|k| horizon * k as f64 / (n_time_samples - 1) as f64)
        .collect();
    let mut m_observed: f64 = 0.0;
    let mut delta_observed = f64::INFINITY;
    let mut sector_ratio: f64 = 0.0;
    let mut random_bound_ratio: f64 = 0.0;
    for &t in &times {
        let s = form.matrix_at(t);
        m_observed = m_observed.max(triple.form_norm(&s, 1.0, -1.0)?);
        delta_observed = delta_observed.min(linalg::min_pencil_eigenvalue(&s, triple.cholesky_v()));
        for _ in 0..n_vec_samples {
            let u = random_vector(&mut rng, triple.dim());
            let v = random_vector(&mut rng, triple.dim());
            let auu = u.dotc(&(&s * &u));
            if auu.re > 0.0 {
                sector_ratio = sector_ratio.max(auu.im.abs() / auu.re);
            }
            let auv = v.dotc(&(&s * &u));
            random_bound_ratio = random_bound_ratio.max(auv.norm() / (triple.v_norm(&u) * triple.v_norm(&v)));
        }
    }
    if delta_observed <= 0.0 {
        return Err(Error::NonCoercive { delta: delta_observed });
    }

    let modulus = form.modulus();
    let pairs = sample_pairs(horizon, n_time_samples);
    let mut omega_violation: Option<OmegaViolation> = None;
    let mut omega_ratio: f64 = 0.0;
    for &(t, s) in &pairs {
        let diff = form.matrix_at(t) - form.matrix_at(s);
        let observed = triple.form_norm(&diff, 1.0, -modulus.gamma)?;
        let bound = modulus.eval(t - s);
        if observed > 0.0 {
            omega_ratio = omega_ratio.max(if bound > 0.0 { observed / bound } else { f64::INFINITY });
        }
        if observed > bound * (1.0 + 1e-9) + 1e-13 {
            let worse = omega_violation
                .as_ref()
                .is_none_or(|w| observed - w.bound > w.observed - w.bound || observed / bound > w.observed / w.bound);
            if worse {
                omega_violation = Some(OmegaViolation { t, s, observed, bound });
            }
        }
    }

    Ok(CertifyReport {
        m_observed,
        delta_observed,
        omega_violation,
        omega_ratio,
        sector_ratio,
        random_bound_ratio,
        pairs_checked: pairs.len(),
    })
}

/// `adjoint_form(F)`: the form `a*`.
pub fn adjoint_form(form: &NonAutonomousForm) -> NonAutonomousForm {
    form.adjoint()
}

/// Constant-in-time form with observed constants.
pub fn autonomous(triple: Arc<HilbertTriple>, s: CMatrix, horizon: f64) -> Result<NonAutonomousForm> {
    let modulus = ModulusOfContinuity::holder(1.0, 0.0, 0.0)?;
    NonAutonomousForm::with_observed_constants(triple, Arc::new(move |_| s.clone()), horizon, modulus, 1)
}

/// Scalar form `S(t) = Σ_k coeffs[k] t^k` with `gram_H = 1`, `gram_V = gram_v`.
/// The modulus is Lipschitz with the sampled sup of `|S'|` scaled to `V → V_γ'`.
pub fn scalar_poly(coeffs: &[f64], gram_v: f64, horizon: f64, gamma: f64) -> Result<NonAutonomousForm> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("scalar_poly needs at least one coefficient".into()));
    }
    if !(gram_v > 0.0) {
        return Err(Error::OutOfRange { name: "gram_v", value: gram_v });
    }
    let triple = Arc::new(HilbertTriple::new(linalg::diag(&[1.0]), linalg::diag(&[gram_v]))?);
    let coeffs = coeffs.to_vec();
    let poly = {
        let coeffs = coeffs.clone();
        move |t: f64| coeffs.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
    };
    let deriv = move |t: f64| {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &ck)| acc * t + k as f64 * ck)
    };
    let samples = 2000;
    let mut lip: f64 = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..=samples {
        let t = horizon * k as f64 / samples as f64;
        lip = lip.max(deriv(t).abs());
        lo = lo.min(poly(t));
        hi = hi.max(poly(t).abs());
    }
    if lo <= 0.0 {
        return Err(Error::NonCoercive { delta: lo / gram_v });
    }
    let slack = 1.0 + 1e-6;
    let modulus = ModulusOfContinuity::holder(1.0, lip * slack * gram_v.powf(-0.5 * (1.0 + gamma)), gamma)?;
    NonAutonomousForm::new(
        triple,
        Arc::new(move |t| linalg::diag(&[poly(t)])),
        horizon,
        hi * slack / gram_v,
        lo / (gram_v * slack),
        modulus,
    )
}

/// Fixed non-symmetric direction with unit spectral norm.
fn perturbation_direction(n: usize) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);
    let x = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let norm = linalg::spectral_norm(&x);
    x / linalg::c(norm)
}

/// `gram_H = I`, `gram_V = diag((1+i)²)`, `S(t) = Λ + amp t^α Λ^{γ/2} X Λ^{1/2}` with `‖X‖ = 1`.
///
/// The difference `S(t) − S(s)` has `V → V_γ'` norm exactly `amp |t^α − s^α|`,
/// so the modulus is `holder(α, amp)`. Needs `amp T^α < 1`.
pub fn diag_perturbed(n: usize, alpha: f64, gamma: f64, amplitude: f64, horizon: f64) -> Result<NonAutonomousForm> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let modulus = ModulusOfContinuity::holder(alpha, amplitude.abs(), gamma)?;
    let size = amplitude.abs() * horizon.powf(alpha);
    if size >= 1.0 {
        return Err(Error::NonCoercive { delta: 1.0 - size });
    }
    let lambdas: Vec<f64> = (0..n).map(|i| ((1 + i) * (1 + i)) as f64).collect();
    let triple = Arc::new(HilbertTriple::new(CMatrix::identity(n, n), linalg::diag(&lambdas))?);
    let x = perturbation_direction(n);
    let w = CMatrix::from_fn(n, n, |i, j| x[(i, j)] * (lambdas[i].powf(0.5 * gamma) * lambdas[j].sqrt()));
    let base = linalg::diag(&lambdas);
    NonAutonomousForm::new(
        triple,
        Arc::new(move |t| &base + &w * linalg::c(amplitude * t.max(0.0).powf(alpha))),
        horizon,
        1.0 + size,
        1.0 - size,
        modulus,
    )
}
