//! Generalized beta laws of the first and second kind.
//!
//! All four families share one shape after mapping the support onto `(0, 1)`
//! (`t = x/(1+x)` for the second kind, `t = x` for the first kind):
//!
//! ```text
//! k(t) = t^e1 (1-t)^e2 ((1-t) + g t)^pow
//! ```
//!
//! so `∫ k = B(e1+1, e2+1) · 2F1(-pow, e1+1; e1+e2+2; 1-g)`. Normalizers, CDFs
//! and expectations are all computed from this kernel.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre8, tanh_sinh, QuadratureConfig};
use crate::rng::{stream_rng, CHUNK_SIZE};
use crate::specfun::{ln_beta, ln_gauss_2f1};

/// A distribution from one of the four supported families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistSpec {
    /// Density ∝ `x^{q+ν-1} (1+γx)^{-(p+ν)} (1+x)^{-(q-ν)}` on `(0, ∞)`.
    Gb2 { nu: f64, p: f64, q: f64, gamma: f64 },
    /// Density ∝ `x^{a-1} (1+x)^{-(a+b)}` on `(0, ∞)`.
    B2 { a: f64, b: f64 },
    /// Density ∝ `x^{p-1} (1-x)^{q-1} (1+(δ-1)x)^r` on `(0, 1)`.
    Gb1 { p: f64, q: f64, r: f64, delta: f64 },
    /// Density ∝ `x^{a-1} (1-x)^{b-1}` on `(0, 1)`.
    B1 { a: f64, b: f64 },
}

fn finite(vals: &[f64]) -> bool {
    vals.iter().all(|v| v.is_finite())
}

impl DistSpec {
    pub fn gb2(nu: f64, p: f64, q: f64, gamma: f64) -> Result<Self> {
        let s = DistSpec::Gb2 { nu, p, q, gamma };
        s.validate()?;
        Ok(s)
    }

    pub fn b2(a: f64, b: f64) -> Result<Self> {
        let s = DistSpec::B2 { a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn gb1(p: f64, q: f64, r: f64, delta: f64) -> Result<Self> {
        let s = DistSpec::Gb1 { p, q, r, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn b1(a: f64, b: f64) -> Result<Self> {
        let s = DistSpec::B1 { a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DistSpec::Gb2 { nu, p, q, gamma } => {
                finite(&[nu, p, q, gamma]) && p > 0.0 && q > 0.0 && gamma > 0.0 && -q < nu && nu < p
            }
            DistSpec::B2 { a, b } | DistSpec::B1 { a, b } => finite(&[a, b]) && a > 0.0 && b > 0.0,
            DistSpec::Gb1 { p, q, r, delta } => {
                finite(&[p, q, r, delta]) && p > 0.0 && q > 0.0 && delta > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("invalid distribution {self:?}")))
        }
    }

    /// Short family name, as used on the command line.
    pub fn family(&self) -> &'static str {
        match self {
            DistSpec::Gb2 { .. } => "gb2",
            DistSpec::B2 { .. } => "b2",
            DistSpec::Gb1 { .. } => "gb1",
            DistSpec::B1 { .. } => "b1",
        }
    }

    /// True for the first-kind families supported on `(0, 1)`.
    pub fn unit_support(&self) -> bool {
        matches!(self, DistSpec::Gb1 { .. } | DistSpec::B1 { .. })
    }

    pub fn in_support(&self, x: f64) -> bool {
        if self.unit_support() {
            x > 0.0 && x < 1.0
        } else {
            x > 0.0 && x < f64::INFINITY
        }
    }

    fn kernel(&self) -> UnitKernel {
        match *self {
            DistSpec::Gb2 { nu, p, q, gamma } => UnitKernel {
                e1: q + nu - 1.0,
                e2: p - nu - 1.0,
                pow: -(p + nu),
                g: gamma,
            },
            DistSpec::B2 { a, b } | DistSpec::B1 { a, b } => UnitKernel {
                e1: a - 1.0,
                e2: b - 1.0,
                pow: 0.0,
                g: 1.0,
            },
            DistSpec::Gb1 { p, q, r, delta } => UnitKernel {
                e1: p - 1.0,
                e2: q - 1.0,
                pow: r,
                g: delta,
            },
        }
    }

    /// `(t, 1 - t)` for a point of the support, computed without cancellation.
    fn to_unit(self, x: f64) -> (f64, f64) {
        if self.unit_support() {
            (x, 1.0 - x)
        } else {
            (x / (1.0 + x), 1.0 / (1.0 + x))
        }
    }
}

/// `t^e1 (1-t)^e2 ((1-t) + g t)^pow` on `(0, 1)`.
#[derive(Debug, Clone, Copy)]
struct UnitKernel {
    e1: f64,
    e2: f64,
    pow: f64,
    g: f64,
}

impl UnitKernel {
    fn ln_eval(&self, t: f64, omt: f64) -> f64 {
        let mut v = 0.0;
        if self.e1 != 0.0 {
            v += self.e1 * t.ln();
        }
        if self.e2 != 0.0 {
            v += self.e2 * omt.ln();
        }
        if self.pow != 0.0 {
            v += self.pow * (omt + self.g * t).ln();
        }
        v
    }

    fn eval(&self, t: f64, omt: f64) -> f64 {
        self.ln_eval(t, omt).exp()
    }

    fn ln_integral(&self, cfg: &QuadratureConfig) -> Result<f64> {
        let b = self.e1 + 1.0;
        let c = self.e1 + self.e2 + 2.0;
        Ok(ln_beta(b, c - b)? + ln_gauss_2f1(-self.pow, b, c, 1.0 - self.g, cfg)?)
    }
}

/// A validated distribution with its normalizing constant cached.
#[derive(Debug, Clone)]
pub struct Law {
    spec: DistSpec,
    kernel: UnitKernel,
    ln_z: f64,
    cfg: QuadratureConfig,
}

impl Law {
    pub fn new(spec: DistSpec, cfg: &QuadratureConfig) -> Result<Self> {
        spec.validate()?;
        cfg.validate()?;
        let kernel = spec.kernel();
        let ln_z = kernel.ln_integral(cfg)?;
        Ok(Self {
            spec,
            kernel,
            ln_z,
            cfg: *cfg,
        })
    }

    pub fn spec(&self) -> &DistSpec {
        &self.spec
    }

    /// Normalizing constant of the unnormalized density.
    pub fn normalizer(&self) -> f64 {
        self.ln_z.exp()
    }

    pub fn ln_normalizer(&self) -> f64 {
        self.ln_z
    }

    /// Normalized log-density; `-∞` outside the support.
    pub fn log_density(&self, x: f64) -> f64 {
        if !self.spec.in_support(x) {
            return f64::NEG_INFINITY;
        }
        let ln_k = match self.spec {
            DistSpec::Gb2 { nu, p, q, gamma } => {
                (q + nu - 1.0) * x.ln() - (p + nu) * (gamma * x).ln_1p() - (q - nu) * x.ln_1p()
            }
            DistSpec::B2 { a, b } => (a - 1.0) * x.ln() - (a + b) * x.ln_1p(),
            _ => self.kernel.ln_eval(x, 1.0 - x),
        };
        ln_k - self.ln_z
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    /// Mass of the unit-interval kernel over `[lo, hi]`, given `1 - hi`.
    fn mass(&self, lo: f64, hi: f64, om_hi: f64) -> Result<f64> {
        let k = &self.kernel;
        tanh_sinh(|_, da, db| k.eval(lo + da, om_hi + db), lo, hi, &self.cfg)
    }

    /// Mass of the kernel over `[t, 1]`.
    fn upper_mass(&self, t: f64) -> Result<f64> {
        let k = &self.kernel;
        tanh_sinh(|_, da, db| k.eval(t + da, db), t, 1.0, &self.cfg)
    }

    /// Distribution function by quadrature of the density.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::InvalidParameters("cdf at NaN".into()));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        if !self.spec.in_support(x) {
            return Ok(1.0);
        }
        let (t, omt) = self.spec.to_unit(x);
        let z = self.normalizer();
        let v = if t <= 0.5 {
            self.mass(0.0, t, omt)? / z
        } else {
            1.0 - self.upper_mass(t)? / z
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// Distribution function at every point of an ascending sequence.
    ///
    /// Integrates gap by gap, so the cost is linear in the number of points:
    /// short gaps away from the endpoints use a fixed Gauss rule, everything
    /// else the adaptive rule.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let z = self.normalizer();
        let k = &self.kernel;
        let mut out = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        let mut prev = 0.0_f64;
        let mut prev_x = f64::NEG_INFINITY;
        for &x in xs {
            if x.is_nan() || x < prev_x {
                return Err(Error::InvalidParameters(
                    "cdf_sorted needs an ascending sequence without NaN".into(),
                ));
            }
            prev_x = x;
            if x <= 0.0 {
                out.push(0.0);
                continue;
            }
            if !self.spec.in_support(x) {
                out.push(1.0);
                continue;
            }
            let (t, omt) = self.spec.to_unit(x);
            if t > prev {
                let width = t - prev;
                if prev > 0.0 && width <= 0.25 * prev.min(omt) {
                    acc += gauss_legendre8(|u| k.eval(u, omt + (t - u)), prev, t);
                } else {
                    acc += self.mass(prev, t, omt)?;
                }
                prev = t;
            }
            out.push((acc / z).clamp(0.0, 1.0));
        }
        Ok(out)
    }

    /// `E[f(T, 1 - T)]` where `T` is the variable mapped onto `(0, 1)`
    /// (`T = X/(1+X)` for the second kind, `T = X` for the first kind).
    pub fn expect_unit<F: Fn(f64, f64) -> f64>(&self, f: F) -> Result<f64> {
        let k = &self.kernel;
        let v = tanh_sinh(|_, t, omt| f(t, omt) * k.eval(t, omt), 0.0, 1.0, &self.cfg)?;
        Ok(v / self.normalizer())
    }

    /// Acceptance probability of the exact rejection sampler.
    pub fn acceptance_rate(&self) -> f64 {
        let k = &self.kernel;
        let ln_env = match self.spec {
            DistSpec::Gb2 { .. } | DistSpec::Gb1 { .. } => (k.pow * k.g.ln()).max(0.0),
            _ => return 1.0,
        };
        (self.ln_z - ln_beta(k.e1 + 1.0, k.e2 + 1.0).unwrap_or(self.ln_z) - ln_env).exp()
    }
}

/// A batch of draws together with the law and seed that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub spec: DistSpec,
    pub seed: u64,
    pub values: Vec<f64>,
}

enum Sampler {
    Ratio { ga: Gamma<f64>, gb: Gamma<f64> },
    Unit { ga: Gamma<f64>, gb: Gamma<f64> },
    Gb2 { ga: Gamma<f64>, gb: Gamma<f64>, expo: f64, gamma: f64, ln_sup: f64 },
    Gb1 { ga: Gamma<f64>, gb: Gamma<f64>, r: f64, delta: f64, ln_sup: f64 },
}

fn gamma_dist(shape: f64) -> Result<Gamma<f64>> {
    Gamma::new(shape, 1.0).map_err(|e| Error::InvalidParameters(format!("gamma shape {shape}: {e}")))
}

fn draw_ratio<R: Rng>(rng: &mut R, ga: &Gamma<f64>, gb: &Gamma<f64>) -> f64 {
    loop {
        let x = ga.sample(rng) / gb.sample(rng);
        if x > 0.0 && x.is_finite() {
            return x;
        }
    }
}

fn draw_unit<R: Rng>(rng: &mut R, ga: &Gamma<f64>, gb: &Gamma<f64>) -> f64 {
    loop {
        let a = ga.sample(rng);
        let b = gb.sample(rng);
        let x = a / (a + b);
        if x > 0.0 && x < 1.0 {
            return x;
        }
    }
}

impl Sampler {
    fn new(spec: &DistSpec) -> Result<Self> {
        spec.validate()?;
        Ok(match *spec {
            DistSpec::B2 { a, b } => Sampler::Ratio {
                ga: gamma_dist(a)?,
                gb: gamma_dist(b)?,
            },
            DistSpec::B1 { a, b } => Sampler::Unit {
                ga: gamma_dist(a)?,
                gb: gamma_dist(b)?,
            },
            // Target over proposal B2(q+ν, p-ν) is ((1+x)/(1+γx))^{p+ν}, which
            // moves monotonically between 1 (x→0) and γ^{-(p+ν)} (x→∞).
            DistSpec::Gb2 { nu, p, q, gamma } => Sampler::Gb2 {
                ga: gamma_dist(q + nu)?,
                gb: gamma_dist(p - nu)?,
                expo: p + nu,
                gamma,
                ln_sup: (-(p + nu) * gamma.ln()).max(0.0),
            },
            // Target over proposal B1(p, q) is (1+(δ-1)x)^r, between 1 and δ^r.
            DistSpec::Gb1 { p, q, r, delta } => Sampler::Gb1 {
                ga: gamma_dist(p)?,
                gb: gamma_dist(q)?,
                r,
                delta,
                ln_sup: (r * delta.ln()).max(0.0),
            },
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Ratio { ga, gb } => draw_ratio(rng, ga, gb),
            Sampler::Unit { ga, gb } => draw_unit(rng, ga, gb),
            Sampler::Gb2 { ga, gb, expo, gamma, ln_sup } => loop {
                let x = draw_ratio(rng, ga, gb);
                let ln_acc = expo * (x.ln_1p() - (gamma * x).ln_1p()) - ln_sup;
                if rng.random::<f64>().ln() < ln_acc {
                    return x;
                }
            },
            Sampler::Gb1 { ga, gb, r, delta, ln_sup } => loop {
                let x = draw_unit(rng, ga, gb);
                let ln_acc = r * ((1.0 - x) + delta * x).ln() - ln_sup;
                if rng.random::<f64>().ln() < ln_acc {
                    return x;
                }
            },
        }
    }
}

/// `n` exact i.i.d. draws. Chunk `c` of [`CHUNK_SIZE`] draws uses substream
/// `c` of `seed`; chunks run in parallel and are concatenated in order.
pub fn sample(spec: &DistSpec, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::InvalidParameters("sample size must be at least 1".into()));
    }
    let sampler = Sampler::new(spec)?;
    let chunks = n.div_ceil(CHUNK_SIZE);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
            let mut rng = stream_rng(seed, c as u64);
            (0..len).map(|_| sampler.draw(&mut rng)).collect()
        })
        .collect();
    Ok(SampleBatch {
        spec: *spec,
        seed,
        values: parts.concat(),
    })
}

/// Normalizing constant with default quadrature settings.
pub fn normalizer(spec: &DistSpec) -> Result<f64> {
    Ok(Law::new(*spec, &QuadratureConfig::default())?.normalizer())
}

/// Normalized log-density with default quadrature settings.
pub fn log_density(spec: &DistSpec, x: f64) -> Result<f64> {
    Ok(Law::new(*spec, &QuadratureConfig::default())?.log_density(x))
}

/// Distribution function at a single point.
pub fn cdf_numeric(spec: &DistSpec, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Law::new(*spec, cfg)?.cdf(x)
}
