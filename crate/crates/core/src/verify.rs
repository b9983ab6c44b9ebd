//! Verification suites: the transform identities, Monte Carlo agreement,
//! map structure, difference equations, the Euler transformation of 2F1 and
//! the independence experiments. Every suite returns a serializable report
//! whose content depends only on its configuration.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample, DistSpec, Law};
use crate::error::{Error, Result};
use crate::hde::{
    eval_fit, fit_solution, hde_residual, hde_spec_from_model, integral_solutions, ladder_depth,
    lu_alpha1, propagate, ell_ladder, FitCoeffs, HdeSpec,
};
use crate::maps::{conjugate_fg, conjugate_zero_inf, jacobian_numeric, MapSpec, PlanePoint};
use crate::quadrature::QuadratureConfig;
use crate::rng::{derive_seed, stream_rng};
use crate::specfun::gauss_2f1;
use crate::statcheck::{Expectation, IpExperimentConfig};
use crate::transforms::{
    grid, m_values, residual_identities, residual_lindep, residual_m_identities, residual_ratio,
    ClosedGb2, ModelQuad, Residual, Role, TransformEvaluator, TransformPoint,
};

/// Largest residual of one family of checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: String,
    pub count: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn summarize<'a, I>(items: I, tolerance: &dyn Fn(&str) -> f64) -> BTreeMap<String, CheckSummary>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let mut out: BTreeMap<String, CheckSummary> = BTreeMap::new();
    for (name, r) in items {
        let e = out.entry(name.to_string()).or_insert_with(|| CheckSummary {
            check: name.to_string(),
            count: 0,
            max_residual: 0.0,
            tolerance: tolerance(name),
            pass: true,
        });
        e.count += 1;
        // NaN never passes
        if !(r <= e.max_residual) {
            e.max_residual = if r.is_nan() { f64::INFINITY } else { r.max(e.max_residual) };
        }
        e.pass = e.max_residual < e.tolerance;
    }
    out
}

// ---------------------------------------------------------------------------
// Transform identities

/// Configuration of the transform-identity suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSuiteConfig {
    pub model: ModelQuad,
    /// Values for each of `s, θ, σ`; the grid is their cube intersected with Ξ.
    pub grid: Vec<f64>,
    pub tolerance: f64,
    /// `γ` values at which the Pochhammer ratio is checked.
    pub ratio_gammas: Vec<f64>,
    /// Added to `λ` in the `Y` role only; a deliberate corruption that must
    /// make the factorization check fail.
    pub corrupt_lambda: Option<f64>,
}

impl Default for TransformSuiteConfig {
    fn default() -> Self {
        Self {
            model: ModelQuad {
                lambda: 0.3,
                a: 1.5,
                b: 2.0,
                alpha: 2.0,
                beta: 0.5,
            },
            grid: vec![0.0, 0.5, 1.0, 2.0],
            tolerance: 1e-8,
            ratio_gammas: vec![0.5, 3.0],
            corrupt_lambda: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub config: TransformSuiteConfig,
    pub points: usize,
    pub checks: BTreeMap<String, CheckSummary>,
    /// Largest `|(α−1)M_X − (β−1)M_V|` relative to its terms; must be
    /// bounded away from zero when `α ≠ β`.
    pub nonvanishing_max: f64,
    pub residuals: Vec<Residual>,
    pub pass: bool,
}

fn tagged(mut r: Residual, tag: &str) -> Residual {
    r.identity = format!("{}[{tag}]", r.identity);
    r
}

fn base_name(identity: &str) -> &str {
    identity.split('[').next().unwrap_or(identity)
}

impl TransformSuiteConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.grid.is_empty() || !self.grid.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameters("grid must be a non-empty list of finite values".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameters(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !self.ratio_gammas.iter().all(|&g| g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameters("ratio_gammas must be positive".into()));
        }
        if let Some(d) = self.corrupt_lambda {
            ModelQuad { lambda: self.model.lambda + d, ..self.model }.validate()?;
        }
        Ok(())
    }
}

pub fn verify_transforms(cfg: &TransformSuiteConfig, quad: &QuadratureConfig) -> Result<TransformReport> {
    cfg.validate()?;
    let model = cfg.model;
    let ev = model.evaluators(quad)?;
    let mut ev_lindep = ev.clone();
    if let Some(d) = cfg.corrupt_lambda {
        let mut bad = model;
        bad.lambda += d;
        let DistSpec::Gb2 { p, q, gamma, .. } = model.law(Role::Y) else {
            unreachable!()
        };
        ev_lindep.y = ClosedGb2::new(&DistSpec::Gb2 { nu: -bad.lambda, p, q, gamma }, quad)?;
    }
    let ratio_models: Vec<(f64, ModelQuad, crate::transforms::ModelEvaluators)> = cfg
        .ratio_gammas
        .iter()
        .map(|&g| {
            let m = ModelQuad { alpha: g, ..model };
            Ok((g, m, m.evaluators(quad)?))
        })
        .collect::<Result<_>>()?;
    let pts = grid(&cfg.grid);

    let per_point: Vec<Result<Vec<Residual>>> = pts
        .par_iter()
        .map(|&pt| {
            let mut out = Vec::new();
            for role in [Role::X, Role::Y, Role::U, Role::V] {
                let e = ev.get(role);
                let tag = format!("{role:?}");
                for r in residual_identities(&e, pt)? {
                    out.push(tagged(r, &tag));
                }
                let mv = m_values(&e, pt)?;
                let g = e.gamma();
                out.push(tagged(Residual::new("m_forms", pt, mv.m, mv.m_diff, &[]), &tag));
                out.push(tagged(Residual::new("m_phi", pt, mv.phi, (g - 1.0) * mv.m, &[]), &tag));
            }
            out.push(residual_lindep(&ev_lindep, pt)?);
            out.extend(residual_m_identities(&model, &ev, pt)?);
            let mut quotients = Vec::new();
            for (g, m, mev) in &ratio_models {
                let r = residual_ratio(m, mev, pt)?;
                quotients.push(r.lhs);
                out.push(tagged(r, &format!("gamma={g}")));
            }
            for w in quotients.windows(2) {
                out.push(Residual::new("ratio_gamma_independence", pt, w[0], w[1], &[]));
            }
            Ok(out)
        })
        .collect();
    let mut residuals = Vec::new();
    for r in per_point {
        residuals.extend(r?);
    }

    let (diag, checked): (Vec<&Residual>, Vec<&Residual>) =
        residuals.iter().partition(|r| r.identity == "nonvanishing");
    let nonvanishing_max = diag.iter().fold(0.0_f64, |m, r| m.max(r.rel_residual));
    let tol = cfg.tolerance;
    let mut checks = summarize(
        checked.iter().map(|r| (base_name(&r.identity), r.rel_residual)),
        &|_| tol,
    );
    let distinct = model.alpha != model.beta;
    checks.insert(
        "nonvanishing".into(),
        CheckSummary {
            check: "nonvanishing".into(),
            count: diag.len(),
            max_residual: nonvanishing_max,
            tolerance: 1e-3,
            // the diagnostic passes when it is NOT small somewhere
            pass: !distinct || nonvanishing_max > 1e-3,
        },
    );
    let pass = checks.values().all(|c| c.pass);
    Ok(TransformReport {
        config: cfg.clone(),
        points: pts.len(),
        checks,
        nonvanishing_max,
        residuals,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo agreement

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSuiteConfig {
    pub law: DistSpec,
    pub n: usize,
    pub seed: u64,
    pub grid: Vec<f64>,
    /// Allowed deviation in standard errors.
    pub se_multiple: f64,
    /// Absolute tolerance of the pointwise identities on the shared sample.
    pub identity_tolerance: f64,
}

impl Default for MonteCarloSuiteConfig {
    fn default() -> Self {
        Self {
            law: DistSpec::Gb2 {
                nu: 0.3,
                p: 1.5,
                q: 2.0,
                gamma: 2.0,
            },
            n: 1_000_000,
            seed: 20_240_601,
            grid: vec![0.0, 0.5, 1.0, 2.0],
            se_multiple: 4.0,
            identity_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McPointReport {
    pub point: TransformPoint,
    pub closed: f64,
    pub mc: f64,
    pub se: f64,
    pub z_score: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub config: MonteCarloSuiteConfig,
    pub points: Vec<McPointReport>,
    pub max_z_score: f64,
    pub max_identity_residual: f64,
    pub pass: bool,
}

impl MonteCarloSuiteConfig {
    pub fn validate(&self) -> Result<()> {
        self.law.validate()?;
        if !matches!(self.law, DistSpec::Gb2 { .. }) {
            return Err(Error::InvalidParameters("Monte Carlo suite needs a gb2 law".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameters(format!("n must be at least 2, got {}", self.n)));
        }
        if self.grid.is_empty() || !self.grid.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameters("grid must be a non-empty list of finite values".into()));
        }
        if !(self.se_multiple > 0.0 && self.identity_tolerance >= 0.0) {
            return Err(Error::InvalidParameters("tolerances must be positive".into()));
        }
        Ok(())
    }
}

pub fn verify_monte_carlo(cfg: &MonteCarloSuiteConfig, quad: &QuadratureConfig) -> Result<MonteCarloReport> {
    cfg.validate()?;
    let DistSpec::Gb2 { gamma, .. } = cfg.law else {
        unreachable!()
    };
    let batch = sample(&cfg.law, cfg.n, cfg.seed)?;
    let mc = TransformEvaluator::monte_carlo(&batch, Some(gamma))?;
    let TransformEvaluator::MonteCarlo(mct) = &mc else {
        unreachable!()
    };
    let closed = ClosedGb2::new(&cfg.law, quad)?;
    let mut points = Vec::new();
    let mut max_id = 0.0_f64;
    for pt in grid(&cfg.grid) {
        let est = mct.estimate(pt)?;
        let c = closed.eval_general(pt)?;
        let diff = (est.value - c).abs();
        // zero standard error (the constant integrand at the origin) leaves
        // only rounding
        let allowed = cfg.se_multiple * est.se + 1e-12 * c.abs();
        points.push(McPointReport {
            point: pt,
            closed: c,
            mc: est.value,
            se: est.se,
            z_score: if est.se > 0.0 { diff / est.se } else { 0.0 },
            pass: diff <= allowed,
        });
        for r in residual_identities(&mc, pt)? {
            if r.identity == "id1" || r.identity == "id2" {
                max_id = max_id.max(r.abs_residual);
            }
        }
    }
    let max_z = points.iter().fold(0.0_f64, |m, p| m.max(p.z_score));
    let pass = points.iter().all(|p| p.pass) && max_id <= cfg.identity_tolerance;
    Ok(MonteCarloReport {
        config: cfg.clone(),
        points,
        max_z_score: max_z,
        max_identity_residual: max_id,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Maps

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapsSuiteConfig {
    pub points: usize,
    pub seed: u64,
    /// Fixed parameters; drawn at random per point when absent.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub tolerance: f64,
    pub jacobian_tolerance: f64,
    pub limit_tolerance: f64,
}

impl Default for MapsSuiteConfig {
    fn default() -> Self {
        Self {
            points: 10_000,
            seed: 7,
            alpha: None,
            beta: None,
            delta: None,
            tolerance: 1e-12,
            jacobian_tolerance: 1e-6,
            limit_tolerance: 1e-6,
        }
    }
}

impl MapsSuiteConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("delta", self.delta)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidParameters(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if let (Some(a), Some(b)) = (self.alpha, self.beta) {
            if a == b {
                return Err(Error::InvalidParameters("fab checks require α ≠ β".into()));
            }
        }
        if self.points == 0 {
            return Err(Error::InvalidParameters("points must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapsReport {
    pub config: MapsSuiteConfig,
    pub checks: BTreeMap<String, CheckSummary>,
    pub pass: bool,
}

fn rel_err(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

fn pt_err(p: PlanePoint, q: PlanePoint) -> f64 {
    rel_err(p.x, q.x).max(rel_err(p.y, q.y))
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

/// Residuals of every map check at one random draw.
fn map_checks_at<R: Rng>(cfg: &MapsSuiteConfig, rng: &mut R) -> Result<Vec<(&'static str, f64)>> {
    let alpha = cfg.alpha.unwrap_or_else(|| log_uniform(rng, 0.1, 10.0));
    let mut beta = cfg.beta.unwrap_or_else(|| log_uniform(rng, 0.1, 10.0));
    if beta == alpha {
        beta *= 1.5;
    }
    let delta = cfg.delta.unwrap_or_else(|| log_uniform(rng, 0.1, 10.0));
    let p = PlanePoint::new(log_uniform(rng, 0.02, 50.0), log_uniform(rng, 0.02, 50.0));
    let q = PlanePoint::new(rng.random_range(0.01..0.99), rng.random_range(0.01..0.99));
    let mut out = Vec::new();

    let fab = MapSpec::Fab { alpha, beta };
    let fai = MapSpec::FaInf { alpha };
    let fib = MapSpec::FInfB { beta };
    let faz = MapSpec::FaZero { alpha };
    let gd = MapSpec::Gdelta { delta };

    for (name, m) in [("conservation_fab", fab), ("conservation_fa_inf", fai)] {
        let img = m.apply(p)?;
        let a = m.invariant_triple(p)?;
        let b = m.image_invariant_triple(img)?;
        let r = (0..3).fold(0.0_f64, |acc, i| acc.max(rel_err(a[i], b[i])));
        out.push((name, r));
    }
    for (name, m, pt) in [
        ("involution_fab", fab, p),
        ("involution_fa_inf", fai, p),
        ("involution_finf_b", fib, p),
        ("involution_fa_zero", faz, p),
        ("involution_gdelta", gd, q),
    ] {
        out.push((name, pt_err(m.apply(m.apply(pt)?)?, pt)));
    }
    out.push((
        "conjugation_fg",
        pt_err(conjugate_fg(delta, p)?, MapSpec::FaInf { alpha: 1.0 / delta }.apply(p)?),
    ));
    out.push(("conjugation_zero_inf", pt_err(conjugate_zero_inf(alpha, p)?, faz.apply(p)?)));
    for (name, m) in [("jacobian_fa_inf", fai), ("jacobian_fa_zero", faz)] {
        out.push((name, rel_err(m.jacobian_closed(p)?, jacobian_numeric(&m, p)?)));
    }
    // the limit maps differ from Fab at 1e8 by O((1+x)/(y·1e8)), so these
    // draws stay in a box where that truncation is far below the tolerance
    let big = 1e8;
    let la = log_uniform(rng, 0.5, 2.0);
    let lb = log_uniform(rng, 0.5, 2.0);
    let lp = PlanePoint::new(log_uniform(rng, 0.5, 2.0), log_uniform(rng, 0.5, 2.0));
    out.push((
        "limit_fab_beta_inf",
        pt_err(MapSpec::Fab { alpha: la, beta: big }.apply(lp)?, MapSpec::FaInf { alpha: la }.apply(lp)?),
    ));
    out.push((
        "limit_fab_alpha_inf",
        pt_err(MapSpec::Fab { alpha: big, beta: lb }.apply(lp)?, MapSpec::FInfB { beta: lb }.apply(lp)?),
    ));
    Ok(out)
}

pub fn verify_maps(cfg: &MapsSuiteConfig) -> Result<MapsReport> {
    cfg.validate()?;
    const BLOCK: usize = 1024;
    let blocks = cfg.points.div_ceil(BLOCK);
    let parts: Vec<Result<Vec<(&'static str, f64)>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(cfg.seed, b as u64);
            let len = BLOCK.min(cfg.points - b * BLOCK);
            let mut out = Vec::new();
            for _ in 0..len {
                out.extend(map_checks_at(cfg, &mut rng)?);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    let checks = summarize(all.iter().map(|&(n, r)| (n, r)), &|name: &str| {
        if name.starts_with("jacobian") {
            cfg.jacobian_tolerance
        } else if name.starts_with("limit") {
            cfg.limit_tolerance
        } else if name == "involution_gdelta" {
            // not one of the pinned checks; near the square's edges the
            // complements lose a few digits
            1e3 * cfg.tolerance
        } else {
            cfg.tolerance
        }
    });
    Ok(MapsReport {
        config: cfg.clone(),
        pass: checks.values().all(|c| c.pass),
        checks,
    })
}

// ---------------------------------------------------------------------------
// Difference equations

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HdeSuiteConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    /// Lattice points `β3 + {0, ..., lattice}`.
    pub lattice: usize,
    /// Ladder margin: depth is the smallest `n` with `β2 + n − 1 > −1 + margin`.
    pub ladder_margin: f64,
    pub seed: u64,
}

impl HdeSuiteConfig {
    pub fn new(alpha: f64, lambda: f64, a: f64, b: f64) -> Self {
        Self {
            alpha,
            lambda,
            a,
            b,
            lattice: 20,
            ladder_margin: 0.05,
            seed: 11,
        }
    }
}

impl HdeSuiteConfig {
    pub fn validate(&self) -> Result<()> {
        ModelQuad::new(self.lambda, self.a, self.b, self.alpha, self.alpha + 1.0)?;
        if !(self.ladder_margin > 0.0 && self.ladder_margin < 1.0) {
            return Err(Error::InvalidParameters(format!(
                "ladder_margin must lie in (0, 1), got {}",
                self.ladder_margin
            )));
        }
        if self.lattice < 1 {
            return Err(Error::InvalidParameters("lattice must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for HdeSuiteConfig {
    fn default() -> Self {
        Self::new(2.0, 0.3, 1.5, 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdeReport {
    pub config: HdeSuiteConfig,
    pub spec: Option<HdeSpec>,
    pub ladder_depth: Option<usize>,
    pub fit: Option<FitCoeffs>,
    pub checks: BTreeMap<String, CheckSummary>,
    pub pass: bool,
}

fn hde_tolerance(name: &str) -> f64 {
    match name {
        "hde_closed" | "hde_lifted" => 1e-9,
        "ladder" | "r15a" | "hde_integral" => 1e-8,
        "fit_delta2" | "fit_propagation" | "recursion_propagation" => 1e-6,
        "recovery" => 1e-5,
        "alpha1_closed" | "alpha1_recursion" => 1e-10,
        // must fail to vanish: stored as 1/residual
        "identification" => 1e6,
        _ => 0.0,
    }
}

/// `[n1(s+θ)+n2(σ)−(1−α)(n1(s+θ+1)+n3(θ))] L_U(s,σ,θ+1)
///   = α n3(θ) L_U(s,σ,θ) − (1−α) n1(s+θ+1) L_U(s,σ,θ+2)`.
fn r15a(u: &ClosedGb2, model: &ModelQuad, s: f64, th: f64, sg: f64) -> Result<f64> {
    let ModelQuad { lambda, a, b, alpha, .. } = *model;
    let n1 = |z: f64| z + b + lambda;
    let n2 = |z: f64| z + a - lambda;
    let n3 = |z: f64| z + a + lambda;
    let l = |t: f64| u.eval_general(TransformPoint::new(s, sg, t));
    let coef = n1(s + th) + n2(sg) - (1.0 - alpha) * (n1(s + th + 1.0) + n3(th));
    let lhs = coef * l(th + 1.0)?;
    let t1 = alpha * n3(th) * l(th)?;
    let t2 = (1.0 - alpha) * n1(s + th + 1.0) * l(th + 2.0)?;
    let rhs = t1 - t2;
    Ok(Residual::new("r15a", TransformPoint::new(s, th, sg), lhs, rhs, &[t1, t2]).rel_residual)
}

pub fn verify_hde(cfg: &HdeSuiteConfig, quad: &QuadratureConfig) -> Result<HdeReport> {
    cfg.validate()?;
    let HdeSuiteConfig { alpha, lambda, a, b, .. } = *cfg;
    // β only enters the unused Y and V roles
    let model = ModelQuad::new(lambda, a, b, alpha, alpha + 1.0)?;
    let u = ClosedGb2::new(&model.law(Role::U), quad)?;
    let mut found: Vec<(&'static str, f64)> = Vec::new();

    for s in 0..3 {
        for th in 0..3 {
            for sg in 0..3 {
                found.push(("r15a", r15a(&u, &model, s as f64, th as f64, sg as f64)?));
            }
        }
    }

    // parameter identification: perturbed triples must give another ratio
    let mut rng = stream_rng(cfg.seed, 0);
    let pts = grid(&[0.0, 1.0, 2.0]);
    for _ in 0..20 {
        let scale = |rng: &mut rand_chacha::ChaCha8Rng| 1.0 + rng.random_range(0.02..0.2) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let other = ModelQuad {
            lambda: lambda * scale(&mut rng),
            a: a * scale(&mut rng),
            b: b * scale(&mut rng),
            ..model
        };
        if other.validate().is_err() {
            continue;
        }
        let mut worst = 0.0_f64;
        for pt in &pts {
            worst = worst.max(rel_err(model.ratio_pochhammer(*pt)?, other.ratio_pochhammer(*pt)?));
        }
        found.push(("identification", if worst > 0.0 { 1.0 / worst } else { f64::INFINITY }));
    }

    let lattice: Vec<usize> = (0..=cfg.lattice).collect();
    let (spec, depth, fit) = if alpha == 1.0 {
        for &k in &lattice {
            let x = k as f64;
            let closed = u.eval_general(TransformPoint::new(0.0, 0.0, x))?;
            found.push(("alpha1_closed", rel_err(lu_alpha1(lambda, a, b, x)?, closed)));
            let l0 = lu_alpha1(lambda, a, b, x)?;
            let l1 = lu_alpha1(lambda, a, b, x + 1.0)?;
            found.push(("alpha1_recursion", rel_err((x + a + b) * l1, (x + a + lambda) * l0)));
        }
        (None, None, None)
    } else {
        let spec = hde_spec_from_model(alpha, lambda, a, b)?;
        let beta3 = spec.beta3;
        let ell = |x: f64| u.eval_general(TransformPoint::new(0.0, 0.0, x - beta3));
        for &k in &lattice {
            found.push(("hde_closed", hde_residual(&spec, ell, beta3 + k as f64)?.rel_residual));
        }
        let n = ladder_depth(spec.beta2, cfg.ladder_margin);
        let lifted = spec.lifted(n);
        let ladder = ell_ladder(ell, spec.rho2, n);
        let factor = (alpha / (1.0 - alpha)).powi(n as i32 - 1);
        let m = (n - 1) as f64;
        for &k in &lattice {
            let x = beta3 + k as f64;
            let direct = factor * u.eval_general(TransformPoint::new(m, -m, k as f64))?;
            found.push(("ladder", rel_err(ladder(x)?, direct)));
            found.push(("hde_lifted", hde_residual(&lifted, &ladder, x)?.rel_residual));
            for which in 0..2 {
                let sol = |x: f64| integral_solutions(&lifted, x, quad).map(|p| if which == 0 { p.0 } else { p.1 });
                found.push(("hde_integral", hde_residual(&lifted, sol, x)?.rel_residual));
            }
        }
        let v0 = ladder(beta3)?;
        let v1 = ladder(beta3 + 1.0)?;
        let fit = fit_solution(&lifted, v0, v1, quad)?;
        found.push(("fit_delta2", (fit.delta2 / fit.delta1).abs()));
        let x10 = beta3 + 10.0;
        let target = ladder(x10)?;
        found.push(("fit_propagation", rel_err(eval_fit(&lifted, &fit, x10, quad)?, target)));
        let seq = propagate(&lifted, v0, v1, 11)?;
        found.push(("recursion_propagation", rel_err(seq[10], target)));
        // E[(1+αU)^{n−1} / (1+U)^{x+n−1}] = (1−α)^{n−1} ℓ^(n)(β3 + x), carried by
        // the single fitted solution δ1 ℓ1
        let law = Law::new(model.law(Role::U), quad)?;
        let single = FitCoeffs { delta1: fit.delta1, delta2: 0.0 };
        for k in 0..=10usize {
            let moment = law.expect_unit(|t, omt| (omt + alpha * t).powi(n as i32 - 1) * omt.powi(k as i32))?;
            let rebuilt = (1.0 - alpha).powi(n as i32 - 1) * eval_fit(&lifted, &single, beta3 + k as f64, quad)?;
            found.push(("recovery", rel_err(rebuilt, moment)));
        }
        if lifted.rho2 < 0.0 {
            let (_, l2) = integral_solutions(&lifted, beta3 + 1.0, quad)?;
            found.push(("case_i_sign", if l2 < 0.0 { 0.0 } else { 1.0 }));
        }
        (Some(spec), Some(n), Some(fit))
    };

    let checks = summarize(found.iter().map(|&(n, r)| (n, r)), &|name: &str| {
        if name == "case_i_sign" {
            0.5
        } else {
            hde_tolerance(name)
        }
    });
    Ok(HdeReport {
        config: cfg.clone(),
        spec,
        ladder_depth: depth,
        fit,
        pass: checks.values().all(|c| c.pass),
        checks,
    })
}

// ---------------------------------------------------------------------------
// Euler transformation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerReport {
    pub draws: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// One draw of `(a, b, c, z)` with `c > b > 0`, `c − a > 0`, `z ∈ (−2, 0.9)`.
pub fn euler_draw<R: Rng>(rng: &mut R) -> (f64, f64, f64, f64) {
    let b = rng.random_range(0.05..4.0);
    let c = b + rng.random_range(0.05..4.0);
    let a = c - rng.random_range(0.05..6.0);
    let z = rng.random_range(-2.0..0.9);
    (a, b, c, z)
}

/// `|2F1(a,b;c;z) − (1−z)^{c−a−b} 2F1(c−a,c−b;c;z)| / |2F1(a,b;c;z)|`.
pub fn euler_residual(a: f64, b: f64, c: f64, z: f64, quad: &QuadratureConfig) -> Result<f64> {
    let lhs = gauss_2f1(a, b, c, z, quad)?;
    let rhs = (1.0 - z).powf(c - a - b) * gauss_2f1(c - a, c - b, c, z, quad)?;
    Ok((lhs - rhs).abs() / lhs.abs())
}

pub fn verify_euler(draws: usize, seed: u64, quad: &QuadratureConfig) -> Result<EulerReport> {
    let mut rng = stream_rng(seed, 0);
    let mut worst = 0.0_f64;
    for _ in 0..draws {
        let (a, b, c, z) = euler_draw(&mut rng);
        worst = worst.max(euler_residual(a, b, c, z, quad)?);
    }
    let tolerance = 1e-9;
    Ok(EulerReport {
        draws,
        seed,
        max_residual: worst,
        tolerance,
        pass: worst < tolerance,
    })
}

// ---------------------------------------------------------------------------
// Independence experiments

/// Shared knobs of the bundled experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpDefaults {
    pub n: usize,
    pub seed: u64,
    pub n_permutations: usize,
    pub dcorr_subsample: usize,
    pub level: f64,
    pub ks_threshold: Option<f64>,
    pub retries: usize,
}

impl Default for IpDefaults {
    fn default() -> Self {
        Self {
            n: 200_000,
            seed: 42,
            n_permutations: 199,
            dcorr_subsample: 4000,
            level: 0.01,
            ks_threshold: Some(0.005),
            retries: 1,
        }
    }
}

fn experiment(
    name: &str,
    map: MapSpec,
    laws: (DistSpec, DistSpec, Option<DistSpec>, Option<DistSpec>),
    expect: Expectation,
    d: &IpDefaults,
) -> IpExperimentConfig {
    IpExperimentConfig {
        name: name.to_string(),
        map,
        law_x: laws.0,
        law_y: laws.1,
        predicted_u: laws.2,
        predicted_v: laws.3,
        expect,
        n: d.n,
        seed: d.seed,
        n_permutations: d.n_permutations,
        dcorr_subsample: d.dcorr_subsample,
        level: d.level,
        ks_threshold: d.ks_threshold,
        retries: d.retries,
    }
}

fn gb2(nu: f64, p: f64, q: f64, gamma: f64) -> DistSpec {
    DistSpec::Gb2 { nu, p, q, gamma }
}

/// `X ~ GB2(λ,a,b;α)`, `Y ~ GB2(−λ,a,b;β)` through `F^(α,β)`.
pub fn preset_fab(m: &ModelQuad, d: &IpDefaults) -> Result<IpExperimentConfig> {
    m.validate()?;
    let c = experiment(
        "fab",
        MapSpec::Fab { alpha: m.alpha, beta: m.beta },
        (
            m.law(Role::X),
            m.law(Role::Y),
            Some(m.law(Role::U)),
            Some(m.law(Role::V)),
        ),
        Expectation::Independent,
        d,
    );
    c.validate()?;
    Ok(c)
}

/// `X ~ GB2(λ,a,b;α)`, `Y ~ B2(b−a, a+λ)` through `F^(α,∞)`; needs `|λ| < a < b`.
pub fn preset_fa_inf(lambda: f64, a: f64, b: f64, alpha: f64, d: &IpDefaults) -> Result<IpExperimentConfig> {
    if !(lambda.abs() < a && a < b) {
        return Err(Error::InvalidParameters(format!(
            "the β = ∞ experiment needs |λ| < a < b, got λ = {lambda}, a = {a}, b = {b}"
        )));
    }
    let c = experiment(
        "fa-inf",
        MapSpec::FaInf { alpha },
        (
            gb2(lambda, a, b, alpha),
            DistSpec::B2 { a: b - a, b: a + lambda },
            Some(gb2(-lambda, a, b, alpha)),
            Some(DistSpec::B2 { a: b - a, b: a - lambda }),
        ),
        Expectation::Independent,
        d,
    );
    c.validate()?;
    Ok(c)
}

/// `X ~ GB2(λ,a,b;α)`, `Y ~ B2(b−λ, 2λ)` through `F^(α,0)`; needs `0 < λ < min(a, b)`.
pub fn preset_fa_zero(lambda: f64, a: f64, b: f64, alpha: f64, d: &IpDefaults) -> Result<IpExperimentConfig> {
    if !(lambda > 0.0 && lambda < a.min(b)) {
        return Err(Error::InvalidParameters(format!(
            "the β = 0 experiment needs 0 < λ < min(a, b), got λ = {lambda}, a = {a}, b = {b}"
        )));
    }
    let c = experiment(
        "fa-zero",
        MapSpec::FaZero { alpha },
        (
            gb2(lambda, a, b, alpha),
            DistSpec::B2 { a: b - lambda, b: 2.0 * lambda },
            Some(gb2(lambda, b, a, alpha)),
            Some(DistSpec::B2 { a: a - lambda, b: 2.0 * lambda }),
        ),
        Expectation::Independent,
        d,
    );
    c.validate()?;
    Ok(c)
}

/// `X' ~ GB1(a+b, c, −b−c; δ)`, `Y' ~ B1(a, b)` through `G^δ`.
pub fn preset_gdelta(a: f64, b: f64, c: f64, delta: f64, d: &IpDefaults) -> Result<IpExperimentConfig> {
    let name = if delta == 1.0 { "dr" } else { "gdelta" };
    let cfg = experiment(
        name,
        MapSpec::Gdelta { delta },
        (
            DistSpec::Gb1 { p: a + b, q: c, r: -b - c, delta },
            DistSpec::B1 { a, b },
            Some(DistSpec::Gb1 { p: b + c, q: a, r: -a - b, delta }),
            Some(DistSpec::B1 { a: c, b }),
        ),
        Expectation::Independent,
        d,
    );
    cfg.validate()?;
    Ok(cfg)
}

/// `X, Y ~ B2(a, b)` i.i.d. through `F^(α,β)`: the image must be dependent.
pub fn preset_negative_control(a: f64, b: f64, alpha: f64, beta: f64, d: &IpDefaults) -> Result<IpExperimentConfig> {
    // the induced dependence is weak (distance correlation near 0.013), so the
    // statistic uses every pair instead of a subsample
    let mut defaults = *d;
    defaults.ks_threshold = None;
    defaults.dcorr_subsample = defaults.n;
    let c = experiment(
        "negative-control",
        MapSpec::Fab { alpha, beta },
        (DistSpec::B2 { a, b }, DistSpec::B2 { a, b }, None, None),
        Expectation::Dependent,
        &defaults,
    );
    c.validate()?;
    Ok(c)
}

/// Derived seed for the `k`-th experiment of a batch run.
pub fn batch_seed(seed: u64, k: usize) -> u64 {
    derive_seed(seed, k as u64)
}
