//! Independence and goodness-of-fit checks for map images.
//!
//! Distance correlation is computed with the `O(n log n)` algorithm for
//! univariate samples: after sorting by `x`, a Fenwick tree over the ranks of
//! `y` accumulates the four sums needed for `Σ_{ij} |x_i−x_j||y_i−y_j|`, and
//! the row sums of the distance matrices come from prefix sums. This keeps
//! permutation tests on subsamples of several thousand points cheap.

use rand::seq::index;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample, DistSpec, Law};
use crate::error::{Error, Result};
use crate::maps::MapSpec;
use crate::quadrature::QuadratureConfig;
use crate::rng::{derive_seed, stream_rng};

/// Fenwick tree over four running sums.
struct Fenwick {
    tree: Vec<[f64; 4]>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self {
            tree: vec![[0.0; 4]; n + 1],
        }
    }

    fn add(&mut self, pos: usize, v: [f64; 4]) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            for (t, x) in self.tree[i].iter_mut().zip(v) {
                *t += x;
            }
            i += i & i.wrapping_neg();
        }
    }

    /// Sums over positions `< pos`.
    fn prefix(&self, pos: usize) -> [f64; 4] {
        let mut acc = [0.0; 4];
        let mut i = pos;
        while i > 0 {
            for (a, t) in acc.iter_mut().zip(self.tree[i]) {
                *a += t;
            }
            i -= i & i.wrapping_neg();
        }
        acc
    }
}

/// Row sums `Σ_j |z_i − z_j|` for every `i`.
fn row_sums(z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]));
    let total: f64 = z.iter().sum();
    let mut out = vec![0.0; n];
    let mut prefix = 0.0;
    for (k, &i) in order.iter().enumerate() {
        let v = z[i];
        let below = v * k as f64 - prefix;
        let above = (total - prefix - v) - v * (n - k - 1) as f64;
        out[i] = below + above;
        prefix += v;
    }
    out
}

/// `Σ_{i,j} |x_i − x_j| |y_i − y_j|`, with `x_order` the permutation sorting
/// `x` and `y_rank` the rank of each `y`.
fn cross_sum(x: &[f64], y: &[f64], x_order: &[usize], y_rank: &[usize]) -> f64 {
    let mut fw = Fenwick::new(x.len());
    let mut inserted = [0.0; 4];
    let mut acc = 0.0;
    for &i in x_order {
        let (xi, yi) = (x[i], y[i]);
        let lo = fw.prefix(y_rank[i]);
        let hi = [
            inserted[0] - lo[0],
            inserted[1] - lo[1],
            inserted[2] - lo[2],
            inserted[3] - lo[3],
        ];
        // Σ (x_i − x_j)(y_i − y_j) over lower y, minus the same over higher y
        let part = |s: [f64; 4]| s[0] * xi * yi - xi * s[2] - yi * s[1] + s[3];
        acc += part(lo) - part(hi);
        let v = [1.0, xi, yi, xi * yi];
        fw.add(y_rank[i], v);
        for k in 0..4 {
            inserted[k] += v[k];
        }
    }
    2.0 * acc
}

fn ranks(z: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]));
    let mut r = vec![0; z.len()];
    for (k, &i) in order.iter().enumerate() {
        r[i] = k;
    }
    r
}

fn centered(z: &[f64]) -> Vec<f64> {
    let m = z.iter().sum::<f64>() / z.len() as f64;
    z.iter().map(|v| v - m).collect()
}

/// Precomputed pieces of the distance correlation of a fixed pair of
/// samples, reused across permutations of `y`.
struct DcorState {
    x: Vec<f64>,
    y: Vec<f64>,
    x_order: Vec<usize>,
    ax: Vec<f64>,
    by: Vec<f64>,
    sum_a: f64,
    sum_b: f64,
    dvar_x: f64,
    dvar_y: f64,
}

fn dvar(z: &[f64], rows: &[f64]) -> f64 {
    let n = z.len() as f64;
    let s1: f64 = z.iter().sum();
    let s2: f64 = z.iter().map(|v| v * v).sum();
    let sq = 2.0 * n * s2 - 2.0 * s1 * s1;
    let r2: f64 = rows.iter().map(|v| v * v).sum();
    let tot: f64 = rows.iter().sum();
    (sq / (n * n) - 2.0 * r2 / (n * n * n) + tot * tot / (n * n * n * n)).max(0.0)
}

impl DcorState {
    fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch(xs.len(), ys.len()));
        }
        if xs.len() < 4 {
            return Err(Error::InvalidParameters(format!(
                "distance correlation needs at least 4 points, got {}",
                xs.len()
            )));
        }
        if xs.iter().chain(ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters("non-finite input to dcorr".into()));
        }
        let x = centered(xs);
        let y = centered(ys);
        let mut x_order: Vec<usize> = (0..x.len()).collect();
        x_order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let ax = row_sums(&x);
        let by = row_sums(&y);
        Ok(Self {
            dvar_x: dvar(&x, &ax),
            dvar_y: dvar(&y, &by),
            sum_a: ax.iter().sum(),
            sum_b: by.iter().sum(),
            x,
            y,
            x_order,
            ax,
            by,
        })
    }

    /// Distance correlation with `y` reindexed by `perm` (`y'_i = y_{perm[i]}`).
    fn dcor(&self, perm: Option<&[usize]>) -> f64 {
        if self.dvar_x <= 0.0 || self.dvar_y <= 0.0 {
            return 0.0;
        }
        let n = self.x.len() as f64;
        let (yp, bp): (Vec<f64>, Vec<f64>) = match perm {
            Some(p) => (p.iter().map(|&j| self.y[j]).collect(), p.iter().map(|&j| self.by[j]).collect()),
            None => (self.y.clone(), self.by.clone()),
        };
        let s1 = cross_sum(&self.x, &yp, &self.x_order, &ranks(&yp));
        let s2: f64 = self.ax.iter().zip(&bp).map(|(a, b)| a * b).sum();
        let dcov = s1 / (n * n) - 2.0 * s2 / (n * n * n) + self.sum_a * self.sum_b / (n * n * n * n);
        let r2 = dcov.max(0.0) / (self.dvar_x * self.dvar_y).sqrt();
        r2.sqrt().min(1.0)
    }
}

/// Empirical distance correlation, in `[0, 1]`; 0 when either sample is
/// constant.
pub fn dcorr(xs: &[f64], ys: &[f64]) -> Result<f64> {
    Ok(DcorState::new(xs, ys)?.dcor(None))
}

/// Observed distance correlation and its permutation p-value
/// `(1 + #{perm ≥ observed}) / (n_perm + 1)`. Permutation `k` shuffles with
/// substream `k` of `seed`.
pub fn perm_test(xs: &[f64], ys: &[f64], n_perm: usize, seed: u64) -> Result<(f64, f64)> {
    if n_perm < 99 {
        return Err(Error::InvalidParameters(format!(
            "at least 99 permutations required, got {n_perm}"
        )));
    }
    let st = DcorState::new(xs, ys)?;
    let obs = st.dcor(None);
    let n = xs.len();
    let exceed: usize = (0..n_perm)
        .into_par_iter()
        .map(|k| {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut stream_rng(seed, k as u64));
            usize::from(st.dcor(Some(&perm)) >= obs)
        })
        .sum();
    Ok((obs, (1 + exceed) as f64 / (n_perm + 1) as f64))
}

pub fn perm_pvalue(xs: &[f64], ys: &[f64], n_perm: usize, seed: u64) -> Result<f64> {
    perm_test(xs, ys, n_perm, seed).map(|r| r.1)
}

/// Kolmogorov-Smirnov distance of an ascending sample to CDF values at the
/// same points.
pub fn ks_from_sorted(sorted: &[f64], cdf: &[f64]) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Empty("KS sample"));
    }
    if sorted.len() != cdf.len() {
        return Err(Error::LengthMismatch(sorted.len(), cdf.len()));
    }
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &f) in cdf.iter().enumerate() {
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

fn sorted_copy(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameters("NaN in sample".into()));
    }
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// One-sample KS statistic against a pointwise CDF.
pub fn ks_stat<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    let s = sorted_copy(sample)?;
    let f: Vec<f64> = s.iter().map(|&x| cdf(x)).collect();
    ks_from_sorted(&s, &f)
}

/// One-sample KS statistic against a law, with the CDF accumulated along the
/// sorted sample.
pub fn ks_law(sample: &[f64], law: &Law) -> Result<f64> {
    let s = sorted_copy(sample)?;
    let f = law.cdf_sorted(&s)?;
    ks_from_sorted(&s, &f)
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("KS sample"));
    }
    let sa = sorted_copy(a)?;
    let sb = sorted_copy(b)?;
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < sa.len() && j < sb.len() {
        let v = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= v {
            i += 1;
        }
        while j < sb.len() && sb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic KS coefficient `c(α) = sqrt(−ln(α/2)/2)`; 1.628 at α = 0.01.
pub fn ks_coefficient(level: f64) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt()
}

pub fn ks_critical_one_sample(n: usize, level: f64) -> f64 {
    ks_coefficient(level) / (n as f64).sqrt()
}

pub fn ks_critical_two_sample(n: usize, m: usize, level: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ks_coefficient(level) * ((n + m) / (n * m)).sqrt()
}

/// What an experiment is expected to show.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    /// `U` and `V` independent with the predicted marginals.
    Independent,
    /// `U` and `V` dependent (a negative control).
    Dependent,
}

/// An independence-preservation experiment: push `X ⊗ Y` through a map and
/// test the image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IpExperimentConfig {
    pub name: String,
    pub map: MapSpec,
    pub law_x: DistSpec,
    pub law_y: DistSpec,
    pub predicted_u: Option<DistSpec>,
    pub predicted_v: Option<DistSpec>,
    pub expect: Expectation,
    pub n: usize,
    pub seed: u64,
    pub n_permutations: usize,
    pub dcorr_subsample: usize,
    /// Significance level of the permutation test.
    pub level: f64,
    /// KS pass threshold; the one-sample critical value at `level` if absent.
    pub ks_threshold: Option<f64>,
    /// Fresh-seed reruns allowed after a failure.
    pub retries: usize,
}

impl IpExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.map.validate()?;
        self.law_x.validate()?;
        self.law_y.validate()?;
        for s in self.predicted_u.iter().chain(self.predicted_v.iter()) {
            s.validate()?;
        }
        let bad = |m: String| Err(Error::InvalidParameters(m));
        if let MapSpec::Fab { alpha, beta } = self.map {
            if alpha == beta {
                return bad("independence checks of fab require α ≠ β".into());
            }
        }
        if self.n < 1000 {
            return bad(format!("n must be at least 1000, got {}", self.n));
        }
        if self.n_permutations < 99 {
            return bad(format!("n_permutations must be at least 99, got {}", self.n_permutations));
        }
        if self.dcorr_subsample < 4 || self.dcorr_subsample > self.n {
            return bad(format!(
                "dcorr_subsample must lie in [4, n], got {}",
                self.dcorr_subsample
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level must lie in (0, 1), got {}", self.level));
        }
        if self.expect == Expectation::Independent
            && (self.predicted_u.is_none() || self.predicted_v.is_none())
        {
            return bad("independent experiments need predicted marginals".into());
        }
        let unit = self.map.unit_domain();
        if self.law_x.unit_support() != unit || self.law_y.unit_support() != unit {
            return bad("input laws do not match the map domain".into());
        }
        Ok(())
    }

    pub fn ks_limit(&self) -> f64 {
        self.ks_threshold
            .unwrap_or_else(|| ks_critical_one_sample(self.n, self.level))
    }
}

/// Pass thresholds used by a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub level: f64,
    pub ks: f64,
}

/// Outcome of one experiment, with the configuration echoed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub dcorr_stat: f64,
    pub p_value: f64,
    pub ks_u: Option<f64>,
    pub ks_v: Option<f64>,
    pub thresholds: Thresholds,
    pub pass: bool,
    /// Number of runs performed (1 + retries used).
    pub attempts: usize,
    /// Seed of the run reported.
    pub seed_used: u64,
    pub config: IpExperimentConfig,
}

/// Strictly monotone compression of a coordinate onto `(0, 1)`.
fn compress(v: f64, unit: bool) -> f64 {
    if unit {
        v
    } else {
        v / (1.0 + v)
    }
}

fn run_once(cfg: &IpExperimentConfig, seed: u64, quad: &QuadratureConfig) -> Result<VerificationReport> {
    let xs = sample(&cfg.law_x, cfg.n, derive_seed(seed, 1))?.values;
    let ys = sample(&cfg.law_y, cfg.n, derive_seed(seed, 2))?.values;
    let mut us = Vec::with_capacity(cfg.n);
    let mut vs = Vec::with_capacity(cfg.n);
    for (&x, &y) in xs.iter().zip(&ys) {
        let (u, v) = cfg.map.eval(x, y);
        let ok = if cfg.map.unit_domain() {
            u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0
        } else {
            u > 0.0 && v > 0.0 && u.is_finite() && v.is_finite()
        };
        if !ok {
            return Err(Error::Domain {
                func: "run_ip_experiment",
                detail: format!("image ({u}, {v}) of ({x}, {y}) left the domain"),
            });
        }
        us.push(u);
        vs.push(v);
    }

    let unit = cfg.map.unit_domain();
    let idx = index::sample(&mut stream_rng(derive_seed(seed, 3), 0), cfg.n, cfg.dcorr_subsample);
    let cu: Vec<f64> = idx.iter().map(|i| compress(us[i], unit)).collect();
    let cv: Vec<f64> = idx.iter().map(|i| compress(vs[i], unit)).collect();
    let (dcorr_stat, p_value) = perm_test(&cu, &cv, cfg.n_permutations, derive_seed(seed, 4))?;

    let ks = |spec: &Option<DistSpec>, data: &[f64]| -> Result<Option<f64>> {
        match spec {
            Some(s) => Ok(Some(ks_law(data, &Law::new(*s, quad)?)?)),
            None => Ok(None),
        }
    };
    let ks_u = ks(&cfg.predicted_u, &us)?;
    let ks_v = ks(&cfg.predicted_v, &vs)?;
    let limit = cfg.ks_limit();
    let ks_ok = |k: Option<f64>| k.is_none_or(|v| v < limit);
    let pass = match cfg.expect {
        Expectation::Independent => p_value >= cfg.level && ks_ok(ks_u) && ks_ok(ks_v),
        Expectation::Dependent => p_value < cfg.level && ks_ok(ks_u) && ks_ok(ks_v),
    };
    Ok(VerificationReport {
        name: cfg.name.clone(),
        dcorr_stat,
        p_value,
        ks_u,
        ks_v,
        thresholds: Thresholds {
            level: cfg.level,
            ks: limit,
        },
        pass,
        attempts: 1,
        seed_used: seed,
        config: cfg.clone(),
    })
}

/// Run an experiment, rerunning with a fresh derived seed on failure up to
/// `cfg.retries` times. Deterministic for a fixed configuration.
pub fn run_ip_experiment(cfg: &IpExperimentConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let quad = QuadratureConfig::default();
    let mut seed = cfg.seed;
    let mut attempt = 1;
    loop {
        let mut rep = run_once(cfg, seed, &quad)?;
        rep.attempts = attempt;
        if rep.pass || attempt > cfg.retries {
            return Ok(rep);
        }
        seed = derive_seed(seed, 0x5EED);
        attempt += 1;
    }
}
