//! Hypergeometric difference equations in normal form
//!
//! ```text
//! (x+β1+β2+2) ℓ(x+2) − ((ρ1+ρ2)(x+1) + β1ρ2 + β2ρ1) ℓ(x+1) + ρ1ρ2 x ℓ(x) = 0
//! ```
//!
//! on the lattice `x ∈ β3 + ℕ0`: the equation satisfied by the transform of
//! the `U` role, the ladder that raises `β2`, the integral fundamental
//! solutions, and coefficient fitting.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{tanh_sinh, QuadratureConfig};
use crate::specfun::ln_beta;

/// `(ρ1, ρ2, β1, β2, β3)` of a normal-form equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HdeSpec {
    pub rho1: f64,
    pub rho2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
}

/// Coefficients of `δ1 ℓ1 + δ2 ℓ2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitCoeffs {
    pub delta1: f64,
    pub delta2: f64,
}

/// The equation for `ℓ(x) = E[(1+U)^{-(x-β3)}]`, `U ~ GB2(−λ, a, b; α)`:
/// `ρ1 = 1`, `ρ2 = α/(α−1)`, `β1 = b−λ−1`, `β2 = λ−a`, `β3 = a+λ`.
pub fn hde_spec_from_model(alpha: f64, lambda: f64, a: f64, b: f64) -> Result<HdeSpec> {
    if !(alpha > 0.0 && a > 0.0 && b > 0.0 && lambda.abs() < a.min(b)) || !lambda.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "need α, a, b > 0 and |λ| < min(a, b), got α = {alpha}, λ = {lambda}, a = {a}, b = {b}"
        )));
    }
    if alpha == 1.0 {
        return Err(Error::InvalidParameters(
            "α = 1 has a first-order equation; use lu_alpha1".into(),
        ));
    }
    Ok(HdeSpec {
        rho1: 1.0,
        rho2: alpha / (alpha - 1.0),
        beta1: b - lambda - 1.0,
        beta2: lambda - a,
        beta3: a + lambda,
    })
}

impl HdeSpec {
    /// The equation with `β2` raised by `n − 1`, satisfied by `ℓ^(n)`.
    pub fn lifted(&self, n: usize) -> Self {
        Self {
            beta2: self.beta2 + n.saturating_sub(1) as f64,
            ..*self
        }
    }

    /// The three coefficients `(c2, c1, c0)` multiplying `ℓ(x+2), ℓ(x+1), ℓ(x)`.
    pub fn coefficients(&self, x: f64) -> (f64, f64, f64) {
        let Self { rho1, rho2, beta1, beta2, .. } = *self;
        (
            x + beta1 + beta2 + 2.0,
            -((rho1 + rho2) * (x + 1.0) + beta1 * rho2 + beta2 * rho1),
            rho1 * rho2 * x,
        )
    }
}

/// Smallest ladder depth `n` with `β2 + n − 1 > −1 + margin`.
pub fn ladder_depth(beta2: f64, margin: f64) -> usize {
    let mut n = 1usize;
    while beta2 + (n as f64) - 1.0 <= -1.0 + margin {
        n += 1;
    }
    n
}

/// Three-term residual of the equation at `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HdeResidual {
    pub x: f64,
    pub residual: f64,
    /// Largest of the three terms in absolute value.
    pub scale: f64,
    pub rel_residual: f64,
}

pub fn hde_residual<F>(spec: &HdeSpec, ell: F, x: f64) -> Result<HdeResidual>
where
    F: Fn(f64) -> Result<f64>,
{
    let (c2, c1, c0) = spec.coefficients(x);
    let terms = [c2 * ell(x + 2.0)?, c1 * ell(x + 1.0)?, c0 * ell(x)?];
    let residual = terms[0] + terms[1] + terms[2];
    let scale = terms.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    let rel = if residual == 0.0 { 0.0 } else { residual.abs() / scale };
    Ok(HdeResidual {
        x,
        residual,
        scale,
        rel_residual: rel,
    })
}

/// `ℓ^(n)(x) = Σ_k C(n−1, k) (−ρ2)^{n−1−k} ℓ(x+k)`, the `n−1`-fold
/// application of `ℓ ↦ ℓ(·+1) − ρ2 ℓ`.
pub fn ell_ladder<F>(ell: F, rho2: f64, n: usize) -> impl Fn(f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = n.max(1) - 1;
    let mut coef = Vec::with_capacity(m + 1);
    let mut binom = 1.0_f64;
    for k in 0..=m {
        coef.push(binom * (-rho2).powi((m - k) as i32));
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    move |x: f64| {
        let mut acc = 0.0;
        for (k, c) in coef.iter().enumerate() {
            acc += c * ell(x + k as f64)?;
        }
        Ok(acc)
    }
}

/// Which of the two root configurations the equation falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootCase {
    /// `ρ2 < 0 < ρ1`
    NegativeRho2,
    /// `0 < ρ1 < ρ2`
    Ordered,
}

impl HdeSpec {
    pub fn root_case(&self) -> Result<RootCase> {
        if self.rho2 < 0.0 && self.rho1 > 0.0 {
            Ok(RootCase::NegativeRho2)
        } else if 0.0 < self.rho1 && self.rho1 < self.rho2 {
            Ok(RootCase::Ordered)
        } else {
            Err(domain(
                "integral_solutions",
                format!("unsupported roots ρ1 = {}, ρ2 = {}", self.rho1, self.rho2),
            ))
        }
    }
}

/// The two integral solutions at `x ∈ β3 + ℕ0`.
///
/// For `ρ2 < 0 < ρ1`:
/// `ℓ1 = ∫_0^ρ1 t^{x−1}(ρ1−t)^β1 (t−ρ2)^β2 dt`,
/// `ℓ2 = (−1)^{x−β3} ∫_ρ2^0 (−t)^{x−1}(ρ1−t)^β1 (t−ρ2)^β2 dt`.
/// For `0 < ρ1 < ρ2`:
/// `ℓ1 = ∫_0^ρ1 t^{x−1}(ρ1−t)^β1 (ρ2−t)^β2 dt`,
/// `ℓ2 = ∫_ρ1^ρ2 t^{x−1}(t−ρ1)^β1 (ρ2−t)^β2 dt`.
pub fn integral_solutions(spec: &HdeSpec, x: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let HdeSpec { rho1, rho2, beta1, beta2, beta3 } = *spec;
    if !(beta1 > -1.0) || !(beta2 > -1.0) {
        return Err(domain(
            "integral_solutions",
            format!("need β1, β2 > −1 (lift β2 with the ladder first), got β1 = {beta1}, β2 = {beta2}"),
        ));
    }
    let k = x - beta3;
    if !(x > 0.0) || k < -1e-9 || (k - k.round()).abs() > 1e-9 {
        return Err(domain("integral_solutions", format!("x = {x} is not in β3 + ℕ0")));
    }
    let e0 = x - 1.0;
    let f = |a: f64, b: f64, c: f64| (e0 * a.ln() + beta1 * b.ln() + beta2 * c.ln()).exp();
    match spec.root_case()? {
        RootCase::NegativeRho2 => {
            let l1 = tanh_sinh(|_, t, d1| f(t, d1, t - rho2), 0.0, rho1, cfg)?;
            let sign = if (k.round() as i64) % 2 == 0 { 1.0 } else { -1.0 };
            let l2 = tanh_sinh(|_, da, mt| f(mt, rho1 + mt, da), rho2, 0.0, cfg)?;
            Ok((l1, sign * l2))
        }
        RootCase::Ordered => {
            let gap = rho2 - rho1;
            let l1 = tanh_sinh(|_, t, d1| f(t, d1, gap + d1), 0.0, rho1, cfg)?;
            let l2 = tanh_sinh(|_, da, db| f(rho1 + da, da, db), rho1, rho2, cfg)?;
            Ok((l1, l2))
        }
    }
}

/// Solve for `δ1, δ2` with `δ1 ℓ1 + δ2 ℓ2 = (v0, v1)` at `(β3, β3+1)`.
pub fn fit_solution(spec: &HdeSpec, v0: f64, v1: f64, cfg: &QuadratureConfig) -> Result<FitCoeffs> {
    let (a11, a12) = integral_solutions(spec, spec.beta3, cfg)?;
    let (a21, a22) = integral_solutions(spec, spec.beta3 + 1.0, cfg)?;
    let det = a11 * a22 - a12 * a21;
    let scale = (a11.abs() + a12.abs()) * (a21.abs() + a22.abs());
    if !(det.abs() > 1e-13 * scale) {
        return Err(Error::Singular(det));
    }
    Ok(FitCoeffs {
        delta1: (v0 * a22 - a12 * v1) / det,
        delta2: (a11 * v1 - a21 * v0) / det,
    })
}

/// `δ1 ℓ1(x) + δ2 ℓ2(x)`.
pub fn eval_fit(spec: &HdeSpec, fit: &FitCoeffs, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (l1, l2) = integral_solutions(spec, x, cfg)?;
    Ok(fit.delta1 * l1 + fit.delta2 * l2)
}

/// Values at `β3, β3+1, ..., β3+len−1` generated from `(v0, v1)` by the
/// recursion.
pub fn propagate(spec: &HdeSpec, v0: f64, v1: f64, len: usize) -> Result<Vec<f64>> {
    let mut out = vec![v0, v1];
    out.truncate(len);
    while out.len() < len {
        let j = out.len() - 2;
        let x = spec.beta3 + j as f64;
        let (c2, c1, c0) = spec.coefficients(x);
        if c2 == 0.0 {
            return Err(Error::NearZeroDenominator("propagate"));
        }
        out.push(-(c1 * out[j + 1] + c0 * out[j]) / c2);
    }
    Ok(out)
}

/// `L_U(0, 0, x) = B(b−λ, a+λ+x)/B(b−λ, a+λ)` for `U ~ GB2(−λ, a, b; 1)`.
pub fn lu_alpha1(lambda: f64, a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && lambda.abs() < a.min(b)) || !(x >= 0.0) {
        return Err(Error::InvalidParameters(format!(
            "need |λ| < min(a, b) and x ≥ 0, got λ = {lambda}, a = {a}, b = {b}, x = {x}"
        )));
    }
    Ok((ln_beta(b - lambda, a + lambda + x)? - ln_beta(b - lambda, a + lambda)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(a.abs())
    }

    #[test]
    fn model_spec() {
        let s = hde_spec_from_model(2.0, 0.3, 1.5, 2.0).unwrap();
        assert_eq!(s.rho1, 1.0);
        assert_eq!(s.rho2, 2.0);
        assert!(close(s.beta1, 0.7, 1e-15));
        assert!(close(s.beta2, -1.2, 1e-15));
        assert!(close(s.beta3, 1.8, 1e-15));
        assert_eq!(s.root_case().unwrap(), RootCase::Ordered);
        let s = hde_spec_from_model(0.5, 0.3, 1.5, 2.0).unwrap();
        assert_eq!(s.rho2, -1.0);
        assert_eq!(s.root_case().unwrap(), RootCase::NegativeRho2);
        assert!(hde_spec_from_model(1.0, 0.3, 1.5, 2.0).is_err());
        assert!(hde_spec_from_model(2.0, 1.6, 1.5, 2.0).is_err());
    }

    #[test]
    fn depth() {
        assert_eq!(ladder_depth(-1.2, 0.05), 2);
        assert_eq!(ladder_depth(-0.5, 0.05), 1);
        assert_eq!(ladder_depth(-2.96, 0.05), 4);
    }

    #[test]
    fn zero_sequence_has_zero_residual() {
        let s = hde_spec_from_model(2.0, 0.3, 1.5, 2.0).unwrap();
        let r = hde_residual(&s, |_| Ok(0.0), s.beta3).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.rel_residual, 0.0);
    }

    #[test]
    fn ladder_identity_at_depth_one() {
        let f = ell_ladder(|x: f64| Ok(x * x), 3.0, 1);
        assert_eq!(f(2.0).unwrap(), 4.0);
        // depth 3: ℓ(x+2) − 2ρ ℓ(x+1) + ρ² ℓ(x)
        let g = ell_ladder(|x: f64| Ok(x * x), 3.0, 3);
        assert!(close(g(2.0).unwrap(), 16.0 - 6.0 * 9.0 + 9.0 * 4.0, 1e-15));
    }

    #[test]
    fn integral_solutions_solve_equation() {
        let cfg = QuadratureConfig::default();
        for alpha in [2.0, 0.4] {
            let s = hde_spec_from_model(alpha, 0.3, 1.5, 2.0).unwrap().lifted(2);
            for j in 0..5 {
                let x = s.beta3 + j as f64;
                let r1 = hde_residual(&s, |x| Ok(integral_solutions(&s, x, &cfg)?.0), x).unwrap();
                let r2 = hde_residual(&s, |x| Ok(integral_solutions(&s, x, &cfg)?.1), x).unwrap();
                assert!(r1.rel_residual < 1e-9 && r2.rel_residual < 1e-9, "{alpha} {x}");
            }
        }
    }

    #[test]
    fn integral_solutions_domain() {
        let cfg = QuadratureConfig::default();
        let s = hde_spec_from_model(2.0, 0.3, 1.5, 2.0).unwrap();
        assert!(integral_solutions(&s, s.beta3, &cfg).is_err());
        let l = s.lifted(2);
        assert!(integral_solutions(&l, l.beta3 + 0.5, &cfg).is_err());
    }

    #[test]
    fn fit_recovers_own_solution() {
        let cfg = QuadratureConfig::default();
        let s = hde_spec_from_model(0.4, 0.3, 1.5, 2.0).unwrap().lifted(2);
        let (v0, _) = integral_solutions(&s, s.beta3, &cfg).unwrap();
        let (v1, _) = integral_solutions(&s, s.beta3 + 1.0, &cfg).unwrap();
        let fit = fit_solution(&s, v0, v1, &cfg).unwrap();
        assert!(close(fit.delta1, 1.0, 1e-12));
        assert!(fit.delta2.abs() < 1e-12);
        let (_, l2) = integral_solutions(&s, s.beta3 + 1.0, &cfg).unwrap();
        assert!(l2 < 0.0);
    }

    #[test]
    fn alpha_one_closed_form() {
        assert_eq!(lu_alpha1(0.3, 1.5, 2.0, 0.0).unwrap(), 1.0);
        assert!(close(lu_alpha1(0.3, 1.5, 2.0, 1.0).unwrap(), 1.8 / 3.5, 1e-14));
        for x in 0..10 {
            let x = x as f64;
            let l0 = lu_alpha1(0.3, 1.5, 2.0, x).unwrap();
            let l1 = lu_alpha1(0.3, 1.5, 2.0, x + 1.0).unwrap();
            assert!(close((x + 3.5) * l1, (x + 1.8) * l0, 1e-13));
        }
    }
}
