//! The hypergeometric-type Laplace transform
//!
//! ```text
//! L_W^(γ)(s, θ, σ) = E[(W/(1+W))^s (γW/(1+γW))^θ (1/(1+W))^σ]
//! ```
//!
//! with its closed form on the GB2 family, a Monte Carlo estimator, the
//! boundary case `γ = ∞`, the first-difference calculus in `θ` and `σ`, the
//! M-functions, and residual checks for the identities they satisfy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{DistSpec, SampleBatch};
use crate::error::{domain, Error, Result};
use crate::quadrature::QuadratureConfig;
use crate::specfun::{ln_beta, ln_gauss_2f1, ln_pochhammer};

/// Exponents `(s, θ, σ)` of the transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformPoint {
    pub s: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl TransformPoint {
    pub fn new(s: f64, theta: f64, sigma: f64) -> Self {
        Self { s, theta, sigma }
    }

    /// Membership in `Ξ = {θ ≥ 0, σ ≥ 0, s+θ ≥ 0, s+σ ≥ 0}`.
    pub fn in_xi(&self) -> bool {
        let Self { s, theta, sigma } = *self;
        [s, theta, sigma].iter().all(|v| v.is_finite())
            && theta >= 0.0
            && sigma >= 0.0
            && s + theta >= 0.0
            && s + sigma >= 0.0
    }

    pub fn shift(&self, ds: f64, dtheta: f64, dsigma: f64) -> Self {
        Self::new(self.s + ds, self.theta + dtheta, self.sigma + dsigma)
    }

    /// The point with `θ` and `σ` exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.s, self.sigma, self.theta)
    }

    fn require_xi(&self, func: &'static str) -> Result<()> {
        if self.in_xi() {
            Ok(())
        } else {
            Err(domain(func, format!("{self:?} is outside Ξ")))
        }
    }
}

/// All points of `values³ ∩ Ξ`, ordered by `s`, then `θ`, then `σ`.
pub fn grid(values: &[f64]) -> Vec<TransformPoint> {
    let mut out = Vec::new();
    for &s in values {
        for &theta in values {
            for &sigma in values {
                let pt = TransformPoint::new(s, theta, sigma);
                if pt.in_xi() {
                    out.push(pt);
                }
            }
        }
    }
    out
}

/// Closed form of the transform for `W ~ GB2(ν, p, q; γ)` at the matching `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedGb2 {
    pub nu: f64,
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    ln_base: f64,
    cfg: QuadratureConfig,
}

impl ClosedGb2 {
    pub fn new(spec: &DistSpec, cfg: &QuadratureConfig) -> Result<Self> {
        spec.validate()?;
        let DistSpec::Gb2 { nu, p, q, gamma } = *spec else {
            return Err(Error::InvalidParameters(format!(
                "closed-form transform needs a gb2 law, got {}",
                spec.family()
            )));
        };
        let ln_base = ln_gauss_2f1(p + nu, q + nu, p + q, 1.0 - gamma, cfg)?;
        Ok(Self {
            nu,
            p,
            q,
            gamma,
            ln_base,
            cfg: *cfg,
        })
    }

    /// The closed form at any exponents for which it converges,
    /// `s + θ + q + ν > 0` and `σ + p − ν > 0`, including points outside Ξ.
    pub fn ln_eval_general(&self, pt: TransformPoint) -> Result<f64> {
        let Self { nu, p, q, gamma, .. } = *self;
        let TransformPoint { s, theta, sigma } = pt;
        let mut v = ln_pochhammer(q + nu, s + theta)? + ln_pochhammer(p - nu, sigma)?
            - ln_pochhammer(p + q, s + theta + sigma)?;
        if theta != 0.0 {
            v += theta * gamma.ln();
        }
        let z = 1.0 - gamma;
        v += ln_gauss_2f1(theta + p + nu, s + theta + q + nu, s + theta + sigma + p + q, z, &self.cfg)?
            - self.ln_base;
        Ok(v)
    }

    pub fn eval_general(&self, pt: TransformPoint) -> Result<f64> {
        self.ln_eval_general(pt).map(f64::exp)
    }
}

/// Closed form on Ξ.
pub fn l_closed(spec: &DistSpec, pt: TransformPoint) -> Result<f64> {
    pt.require_xi("l_closed")?;
    ClosedGb2::new(spec, &QuadratureConfig::default())?.eval_general(pt)
}

/// `L^(∞)(s, σ) = B(s+a, σ+b)/B(a, b)` for `W ~ B2(a, b)`.
pub fn l_inf_closed(spec: &DistSpec, s: f64, sigma: f64) -> Result<f64> {
    spec.validate()?;
    let DistSpec::B2 { a, b } = *spec else {
        return Err(Error::InvalidParameters(format!(
            "boundary transform needs a b2 law, got {}",
            spec.family()
        )));
    };
    if !(s >= 0.0 && sigma >= 0.0) {
        return Err(domain("l_inf_closed", format!("need s, σ ≥ 0, got ({s}, {sigma})")));
    }
    Ok((ln_beta(s + a, sigma + b)? - ln_beta(a, b)?).exp())
}

/// Empirical transform of a sample, with per-draw logarithms cached.
#[derive(Debug, Clone, PartialEq)]
pub struct McTransform {
    /// `None` is the boundary case `γ = ∞`.
    pub gamma: Option<f64>,
    ln_t: Vec<f64>,
    ln_omt: Vec<f64>,
    ln_g: Vec<f64>,
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub se: f64,
}

/// Compensated (Neumaier) sum.
fn neumaier<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in it {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

const MC_CHUNK: usize = 1 << 14;

impl McTransform {
    pub fn new(batch: &SampleBatch, gamma: Option<f64>) -> Result<Self> {
        if batch.values.is_empty() {
            return Err(Error::Empty("sample batch"));
        }
        if batch.spec.unit_support() {
            return Err(Error::InvalidParameters(
                "the transform is defined for variables on (0, ∞)".into(),
            ));
        }
        if let Some(g) = gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameters(format!("γ must be positive, got {g}")));
            }
        }
        let n = batch.values.len();
        let mut ln_t = Vec::with_capacity(n);
        let mut ln_omt = Vec::with_capacity(n);
        let mut ln_g = Vec::with_capacity(n);
        for &w in &batch.values {
            let l1p = w.ln_1p();
            ln_t.push(w.ln() - l1p);
            ln_omt.push(-l1p);
            ln_g.push(match gamma {
                Some(g) => (g * w).ln() - (g * w).ln_1p(),
                None => 0.0,
            });
        }
        Ok(Self {
            gamma,
            ln_t,
            ln_omt,
            ln_g,
        })
    }

    pub fn len(&self) -> usize {
        self.ln_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_t.is_empty()
    }

    /// Sample mean of the integrand and its standard error.
    pub fn estimate(&self, pt: TransformPoint) -> Result<McEstimate> {
        pt.require_xi("l_mc")?;
        let TransformPoint { s, theta, sigma } = pt;
        let theta = if self.gamma.is_some() { theta } else { 0.0 };
        let n = self.len();
        let term = |i: usize| {
            let mut e = 0.0;
            if s != 0.0 {
                e += s * self.ln_t[i];
            }
            if theta != 0.0 {
                e += theta * self.ln_g[i];
            }
            if sigma != 0.0 {
                e += sigma * self.ln_omt[i];
            }
            e.exp()
        };
        let chunks = n.div_ceil(MC_CHUNK);
        let range = |c: usize| c * MC_CHUNK..n.min((c + 1) * MC_CHUNK);
        let sums: Vec<f64> = (0..chunks)
            .into_par_iter()
            .map(|c| neumaier(range(c).map(term)))
            .collect();
        let mean = neumaier(sums) / n as f64;
        let ss: Vec<f64> = (0..chunks)
            .into_par_iter()
            .map(|c| neumaier(range(c).map(|i| (term(i) - mean).powi(2))))
            .collect();
        let var = if n > 1 { neumaier(ss) / (n - 1) as f64 } else { 0.0 };
        Ok(McEstimate {
            value: mean,
            se: (var / n as f64).sqrt(),
        })
    }
}

/// Monte Carlo transform of a batch.
pub fn l_mc(batch: &SampleBatch, gamma: Option<f64>, pt: TransformPoint) -> Result<McEstimate> {
    McTransform::new(batch, gamma)?.estimate(pt)
}

/// A transform evaluator, represented by value.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformEvaluator {
    Closed(ClosedGb2),
    MonteCarlo(McTransform),
    /// `L^(∞)` of `B2(a, b)`; does not depend on `θ`.
    BoundaryB2 { a: f64, b: f64 },
    /// A constant function, mainly as a reference for the difference calculus.
    Constant(f64),
}

impl TransformEvaluator {
    pub fn closed(spec: &DistSpec, cfg: &QuadratureConfig) -> Result<Self> {
        Ok(Self::Closed(ClosedGb2::new(spec, cfg)?))
    }

    pub fn monte_carlo(batch: &SampleBatch, gamma: Option<f64>) -> Result<Self> {
        Ok(Self::MonteCarlo(McTransform::new(batch, gamma)?))
    }

    pub fn boundary_b2(spec: &DistSpec) -> Result<Self> {
        spec.validate()?;
        match *spec {
            DistSpec::B2 { a, b } => Ok(Self::BoundaryB2 { a, b }),
            _ => Err(Error::InvalidParameters("boundary evaluator needs a b2 law".into())),
        }
    }

    /// The transform parameter `γ`; infinite for the boundary evaluators.
    pub fn gamma(&self) -> f64 {
        match self {
            Self::Closed(c) => c.gamma,
            Self::MonteCarlo(m) => m.gamma.unwrap_or(f64::INFINITY),
            Self::BoundaryB2 { .. } => f64::INFINITY,
            Self::Constant(_) => 1.0,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self, Self::Closed(_) | Self::BoundaryB2 { .. })
    }

    pub fn eval(&self, pt: TransformPoint) -> Result<f64> {
        pt.require_xi("transform")?;
        match self {
            Self::Closed(c) => c.eval_general(pt),
            Self::MonteCarlo(m) => m.estimate(pt).map(|e| e.value),
            Self::BoundaryB2 { a, b } => Ok((ln_beta(pt.s + a, pt.sigma + b)? - ln_beta(*a, *b)?).exp()),
            Self::Constant(c) => Ok(*c),
        }
    }
}

/// Exponent a difference operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffVar {
    Theta,
    Sigma,
}

/// `Δ f = f(· + 1) − f(·)` in the named exponent.
pub fn delta_op(ev: &TransformEvaluator, var: DiffVar, pt: TransformPoint) -> Result<f64> {
    let shifted = match var {
        DiffVar::Theta => pt.shift(0.0, 1.0, 0.0),
        DiffVar::Sigma => pt.shift(0.0, 0.0, 1.0),
    };
    pt.require_xi("delta_op")?;
    shifted.require_xi("delta_op")?;
    Ok(ev.eval(shifted)? - ev.eval(pt)?)
}

/// `Δθ Δσ f`.
pub fn delta_theta_sigma(ev: &TransformEvaluator, pt: TransformPoint) -> Result<f64> {
    Ok(delta_op(ev, DiffVar::Sigma, pt.shift(0.0, 1.0, 0.0))? - delta_op(ev, DiffVar::Sigma, pt)?)
}

/// One checked identity: both sides, and residuals. `rel_residual` is taken
/// relative to the largest term entering either side, so identities whose
/// sides vanish are still measured on a meaningful scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub identity: String,
    pub point: TransformPoint,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
}

impl Residual {
    pub fn new(identity: &str, point: TransformPoint, lhs: f64, rhs: f64, terms: &[f64]) -> Self {
        let abs = (lhs - rhs).abs();
        let scale = terms
            .iter()
            .chain([lhs, rhs].iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let rel = if abs == 0.0 {
            0.0
        } else if scale > 0.0 {
            abs / scale
        } else {
            f64::INFINITY
        };
        Self {
            identity: identity.to_string(),
            point,
            lhs,
            rhs,
            abs_residual: abs,
            rel_residual: if abs.is_nan() { f64::INFINITY } else { rel },
        }
    }
}

/// Residuals of the basic identities at `pt`:
///
/// * `id1`: `L = L(s,θ+1,σ) + γ⁻¹ L(s−1,θ+1,σ+1)`
/// * `id2`: `L = L(s+1,θ,σ) + L(s,θ,σ+1)`
/// * `w_theta`: `Δθ L = −γ⁻¹ L(s−1,θ+1,σ+1)`
/// * `w_sigma`: `Δσ L = −L(s+1,θ,σ)`
/// * `d1d2`: `Δθ Δσ L = γ⁻¹ L(s,θ+1,σ+1)`
/// * `ddl`: `L + Δθ L + Δσ L = (γ−1) Δθ Δσ L`
pub fn residual_identities(ev: &TransformEvaluator, pt: TransformPoint) -> Result<Vec<Residual>> {
    pt.require_xi("residual_identities")?;
    let g = ev.gamma();
    let ginv = if g.is_infinite() { 0.0 } else { 1.0 / g };
    let l = ev.eval(pt)?;
    let l_t = ev.eval(pt.shift(0.0, 1.0, 0.0))?;
    let l_s = ev.eval(pt.shift(0.0, 0.0, 1.0))?;
    let l_ts = ev.eval(pt.shift(0.0, 1.0, 1.0))?;
    let l_up = ev.eval(pt.shift(1.0, 0.0, 0.0))?;
    let l_dn = ev.eval(pt.shift(-1.0, 1.0, 1.0))?;
    let d_t = l_t - l;
    let d_s = l_s - l;
    let d_ts = (l_ts - l_t) - d_s;
    let mut out = vec![
        Residual::new("id1", pt, l, l_t + ginv * l_dn, &[l_t, ginv * l_dn]),
        Residual::new("id2", pt, l, l_up + l_s, &[l_up, l_s]),
        Residual::new("w_theta", pt, d_t, -ginv * l_dn, &[l, l_t]),
        Residual::new("w_sigma", pt, d_s, -l_up, &[l, l_s]),
        Residual::new("d1d2", pt, d_ts, ginv * l_ts, &[l, l_t, l_s, l_ts]),
    ];
    if g.is_finite() {
        out.push(Residual::new(
            "ddl",
            pt,
            l + d_t + d_s,
            (g - 1.0) * d_ts,
            &[l, d_t, d_s, (g - 1.0) * d_ts],
        ));
    }
    Ok(out)
}

/// Both forms of the M-function at a point, and `Φ L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MValues {
    /// `L(s,θ,σ) L(s,θ+1,σ+1) / (L(s+1,θ,σ) L(s−1,θ+1,σ+1))`
    pub m: f64,
    /// `L Δθ Δσ L / (Δθ L Δσ L)`
    pub m_diff: f64,
    /// `Φ L = L (L + Δθ L + Δσ L) / (Δθ L Δσ L)`
    pub phi: f64,
}

fn nonzero(v: f64, what: &'static str) -> Result<f64> {
    if v.abs() > f64::MIN_POSITIVE && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NearZeroDenominator(what))
    }
}

pub fn m_values(ev: &TransformEvaluator, pt: TransformPoint) -> Result<MValues> {
    pt.require_xi("m_fn")?;
    let l = ev.eval(pt)?;
    let l_t = ev.eval(pt.shift(0.0, 1.0, 0.0))?;
    let l_s = ev.eval(pt.shift(0.0, 0.0, 1.0))?;
    let l_ts = ev.eval(pt.shift(0.0, 1.0, 1.0))?;
    let l_up = ev.eval(pt.shift(1.0, 0.0, 0.0))?;
    let l_dn = ev.eval(pt.shift(-1.0, 1.0, 1.0))?;
    let d_t = l_t - l;
    let d_s = l_s - l;
    let d_ts = (l_ts - l_t) - d_s;
    let den = nonzero(l_up * l_dn, "m_fn")?;
    let den_diff = nonzero(d_t * d_s, "m_fn (difference form)")?;
    Ok(MValues {
        m: l * l_ts / den,
        m_diff: l * d_ts / den_diff,
        phi: l * (l + d_t + d_s) / den_diff,
    })
}

/// Tolerance within which the two M forms must agree for closed forms.
const M_FORM_TOL: f64 = 1e-8;

/// The M-function. For closed-form evaluators the product form is checked
/// against the difference form.
pub fn m_fn(ev: &TransformEvaluator, pt: TransformPoint) -> Result<f64> {
    let mv = m_values(ev, pt)?;
    if ev.is_closed_form() {
        let diff = (mv.m - mv.m_diff).abs() / mv.m.abs().max(mv.m_diff.abs());
        if !(diff <= M_FORM_TOL) {
            return Err(Error::Inconsistent(format!(
                "M forms disagree at {pt:?}: {} vs {}",
                mv.m, mv.m_diff
            )));
        }
    }
    Ok(mv.m)
}

/// Parameters `(λ, a, b, α, β)` with the four laws
/// `X ~ GB2(λ,a,b;α)`, `Y ~ GB2(−λ,a,b;β)`, `U ~ GB2(−λ,a,b;α)`, `V ~ GB2(λ,a,b;β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelQuad {
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// The four roles of a [`ModelQuad`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    X,
    Y,
    U,
    V,
}

impl ModelQuad {
    pub fn new(lambda: f64, a: f64, b: f64, alpha: f64, beta: f64) -> Result<Self> {
        let m = Self { lambda, a, b, alpha, beta };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { lambda, a, b, alpha, beta } = *self;
        let ok = [lambda, a, b, alpha, beta].iter().all(|v| v.is_finite())
            && a > 0.0
            && b > 0.0
            && alpha > 0.0
            && beta > 0.0
            && lambda.abs() < a.min(b);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!(
                "model requires a, b, α, β > 0 and |λ| < min(a, b), got {self:?}"
            )))
        }
    }

    pub fn law(&self, role: Role) -> DistSpec {
        let Self { lambda, a, b, alpha, beta } = *self;
        let (nu, gamma) = match role {
            Role::X => (lambda, alpha),
            Role::Y => (-lambda, beta),
            Role::U => (-lambda, alpha),
            Role::V => (lambda, beta),
        };
        DistSpec::Gb2 { nu, p: a, q: b, gamma }
    }

    pub fn evaluators(&self, cfg: &QuadratureConfig) -> Result<ModelEvaluators> {
        self.validate()?;
        Ok(ModelEvaluators {
            x: ClosedGb2::new(&self.law(Role::X), cfg)?,
            y: ClosedGb2::new(&self.law(Role::Y), cfg)?,
            u: ClosedGb2::new(&self.law(Role::U), cfg)?,
            v: ClosedGb2::new(&self.law(Role::V), cfg)?,
        })
    }

    /// `(a−λ)^(σ) (b+λ)^(s+θ) / ((a+λ)^(θ) (b−λ)^(s+σ))`
    pub fn ratio_pochhammer(&self, pt: TransformPoint) -> Result<f64> {
        pt.require_xi("ratio_pochhammer")?;
        let Self { lambda, a, b, .. } = *self;
        let TransformPoint { s, theta, sigma } = pt;
        Ok((ln_pochhammer(a - lambda, sigma)? + ln_pochhammer(b + lambda, s + theta)?
            - ln_pochhammer(a + lambda, theta)?
            - ln_pochhammer(b - lambda, s + sigma)?)
        .exp())
    }
}

/// Closed-form evaluators for the four roles.
#[derive(Debug, Clone)]
pub struct ModelEvaluators {
    pub x: ClosedGb2,
    pub y: ClosedGb2,
    pub u: ClosedGb2,
    pub v: ClosedGb2,
}

impl ModelEvaluators {
    pub fn get(&self, role: Role) -> TransformEvaluator {
        TransformEvaluator::Closed(match role {
            Role::X => self.x,
            Role::Y => self.y,
            Role::U => self.u,
            Role::V => self.v,
        })
    }
}

/// `L_X(s,θ,σ) L_Y(s,σ,θ) = L_U(s,σ,θ) L_V(s,θ,σ)`.
pub fn residual_lindep(ev: &ModelEvaluators, pt: TransformPoint) -> Result<Residual> {
    pt.require_xi("residual_lindep")?;
    let sw = pt.swapped();
    let lhs = ev.x.eval_general(pt)? * ev.y.eval_general(sw)?;
    let rhs = ev.u.eval_general(sw)? * ev.v.eval_general(pt)?;
    Ok(Residual::new("lindep", pt, lhs, rhs, &[]))
}

/// `L_X(s,θ,σ) / L_U(s,σ,θ)` against the Pochhammer ratio.
pub fn residual_ratio(model: &ModelQuad, ev: &ModelEvaluators, pt: TransformPoint) -> Result<Residual> {
    let direct = ev.x.eval_general(pt)? / ev.u.eval_general(pt.swapped())?;
    Ok(Residual::new("ratio_pochhammer", pt, direct, model.ratio_pochhammer(pt)?, &[]))
}

/// Residuals of `M_X M_Y = M_U M_V`, of
/// `(α−1)M_X + (β−1)M_Y = (α−1)M_U + (β−1)M_V`, of the realized branch
/// `M_X = M_U`, and the value `(α−1)M_X − (β−1)M_V` (recorded as `lhs` of
/// the `nonvanishing` entry against 0).
pub fn residual_m_identities(
    model: &ModelQuad,
    ev: &ModelEvaluators,
    pt: TransformPoint,
) -> Result<Vec<Residual>> {
    pt.require_xi("residual_m_identities")?;
    let sw = pt.swapped();
    let mx = m_fn(&ev.get(Role::X), pt)?;
    let my = m_fn(&ev.get(Role::Y), sw)?;
    let mu = m_fn(&ev.get(Role::U), sw)?;
    let mv = m_fn(&ev.get(Role::V), pt)?;
    let ap = model.alpha - 1.0;
    let bp = model.beta - 1.0;
    let diag = ap * mx - bp * mv;
    Ok(vec![
        Residual::new("m_prod", pt, mx * my, mu * mv, &[]),
        Residual::new("m_sum", pt, ap * mx + bp * my, ap * mu + bp * mv, &[ap * mx, bp * my, ap * mu, bp * mv]),
        Residual::new("m_branch", pt, mx, mu, &[]),
        Residual::new("nonvanishing", pt, diag, 0.0, &[ap * mx, bp * mv]),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::beta_fn;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn gb2() -> DistSpec {
        DistSpec::Gb2 { nu: 0.3, p: 1.5, q: 2.0, gamma: 2.0 }
    }

    #[test]
    fn xi_membership() {
        assert!(TransformPoint::new(0.0, 0.0, 0.0).in_xi());
        assert!(TransformPoint::new(-1.0, 1.0, 1.0).in_xi());
        assert!(!TransformPoint::new(-1.0, 0.5, 1.0).in_xi());
        assert!(!TransformPoint::new(0.0, -0.1, 1.0).in_xi());
        assert_eq!(grid(&[0.0, 0.5, 1.0, 2.0]).len(), 64);
        assert_eq!(grid(&[-1.0, 0.0, 1.0]).len(), 9);
    }

    #[test]
    fn closed_form_basics() {
        assert!((l_closed(&gb2(), TransformPoint::new(0.0, 0.0, 0.0)).unwrap() - 1.0).abs() < 1e-14);
        // γ = 1 reduces to a beta ratio
        let (nu, p, q) = (0.3, 1.5, 2.0);
        let spec = DistSpec::Gb2 { nu, p, q, gamma: 1.0 };
        let (s, t, g) = (1.0, 0.5, 2.0);
        let got = l_closed(&spec, TransformPoint::new(s, t, g)).unwrap();
        let want = beta_fn(s + t + q + nu, g + p - nu).unwrap() / beta_fn(q + nu, p - nu).unwrap();
        assert!((got / want - 1.0).abs() < 1e-13);
        assert!(l_closed(&spec, TransformPoint::new(-1.0, 0.0, 0.0)).is_err());
        assert!(l_closed(&DistSpec::B2 { a: 1.0, b: 1.0 }, TransformPoint::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn boundary_closed_form() {
        let b = DistSpec::B2 { a: 2.0, b: 3.0 };
        assert!((l_inf_closed(&b, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((l_inf_closed(&b, 1.0, 0.0).unwrap() - 0.4).abs() < 1e-14);
        // W ↦ 1/W swaps the roles of s and σ and maps B2(a,b) to B2(b,a)
        let f = DistSpec::B2 { a: 3.0, b: 2.0 };
        let v1 = l_inf_closed(&b, 0.7, 1.9).unwrap();
        let v2 = l_inf_closed(&f, 1.9, 0.7).unwrap();
        assert!((v1 / v2 - 1.0).abs() < 1e-13);
        let ev = TransformEvaluator::boundary_b2(&b).unwrap();
        let a = ev.eval(TransformPoint::new(1.0, 0.0, 0.5)).unwrap();
        let c = ev.eval(TransformPoint::new(1.0, 3.0, 0.5)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn constant_evaluator_has_zero_differences() {
        let ev = TransformEvaluator::Constant(2.5);
        let pt = TransformPoint::new(1.0, 0.5, 0.5);
        assert_eq!(delta_op(&ev, DiffVar::Theta, pt).unwrap(), 0.0);
        assert_eq!(delta_op(&ev, DiffVar::Sigma, pt).unwrap(), 0.0);
        assert!(delta_op(&ev, DiffVar::Sigma, TransformPoint::new(-1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn closed_identities_hold() {
        let ev = TransformEvaluator::closed(&gb2(), &cfg()).unwrap();
        for pt in grid(&[0.0, 1.0]) {
            for r in residual_identities(&ev, pt).unwrap() {
                assert!(r.rel_residual < 1e-9, "{r:?}");
            }
            let mv = m_values(&ev, pt).unwrap();
            assert!((mv.m - mv.m_diff).abs() < 1e-9 * mv.m.abs());
            assert!((mv.phi - (ev.gamma() - 1.0) * mv.m).abs() < 1e-9 * mv.phi.abs());
        }
    }

    #[test]
    fn unit_gamma_ddl_vanishes() {
        let spec = DistSpec::Gb2 { nu: 0.3, p: 1.5, q: 2.0, gamma: 1.0 };
        let ev = TransformEvaluator::closed(&spec, &cfg()).unwrap();
        let r = residual_identities(&ev, TransformPoint::new(1.0, 0.5, 0.5)).unwrap();
        let ddl = r.iter().find(|r| r.identity == "ddl").unwrap();
        assert_eq!(ddl.rhs, 0.0);
        assert!(ddl.abs_residual < 1e-10);
    }

    #[test]
    fn model_ratio_example() {
        let m = ModelQuad::new(0.3, 1.5, 2.0, 2.0, 0.5).unwrap();
        let r = m.ratio_pochhammer(TransformPoint::new(1.0, 1.0, 0.0)).unwrap();
        assert!((r - 7.59 / 3.06).abs() < 1e-13);
        let m0 = ModelQuad::new(0.0, 1.5, 2.0, 2.0, 0.5).unwrap();
        assert!((m0.ratio_pochhammer(TransformPoint::new(0.7, 1.5, 1.5)).unwrap() - 1.0).abs() < 1e-14);
        assert!(ModelQuad::new(1.6, 1.5, 2.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn lindep_at_origin_and_symmetric_case() {
        let m = ModelQuad::new(0.3, 1.5, 2.0, 2.0, 0.5).unwrap();
        let ev = m.evaluators(&cfg()).unwrap();
        let r = residual_lindep(&ev, TransformPoint::new(0.0, 0.0, 0.0)).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-14 && (r.rhs - 1.0).abs() < 1e-14);
        let sym = ModelQuad::new(0.0, 1.5, 2.0, 1.7, 1.7).unwrap();
        let ev = sym.evaluators(&cfg()).unwrap();
        let r = residual_lindep(&ev, TransformPoint::new(1.0, 0.5, 2.0)).unwrap();
        assert!(r.rel_residual < 1e-14);
    }

    #[test]
    fn residual_scale() {
        let r = Residual::new("t", TransformPoint::new(0.0, 0.0, 0.0), 1e-17, 0.0, &[1.0, 1.0]);
        assert!(r.rel_residual < 1e-16);
        let z = Residual::new("t", TransformPoint::new(0.0, 0.0, 0.0), 0.0, 0.0, &[]);
        assert_eq!(z.rel_residual, 0.0);
    }
}
