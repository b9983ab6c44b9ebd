//! Normalization, sampling and limit properties of the four families.

use proptest::prelude::*;
use ybip::distributions::{sample, DistSpec, Law};
use ybip::quadrature::{tanh_sinh, QuadratureConfig};
use ybip::statcheck::{ks_critical_one_sample, ks_critical_two_sample, ks_law, ks_two_sample};

fn log_uniform(u: f64, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * u).exp()
}

/// Total mass of the density written out independently of the library,
/// divided by the library's normalizer. The quadrature passes exact distances
/// to both endpoints so the singular factors keep full precision.
fn mass(spec: DistSpec) -> f64 {
    let cfg = QuadratureConfig::default();
    let law = Law::new(spec, &cfg).unwrap();
    let kernel = |t: f64, omt: f64| -> f64 {
        match spec {
            DistSpec::Gb2 { nu, p, q, gamma } => {
                // x = t/(1−t), 1+x = 1/(1−t), 1+γx = ((1−t)+γt)/(1−t), dx = dt/(1−t)²
                let ln_x = t.ln() - omt.ln();
                let ln_1px = -omt.ln();
                let ln_1pgx = (omt + gamma * t).ln() - omt.ln();
                ((q + nu - 1.0) * ln_x - (p + nu) * ln_1pgx - (q - nu) * ln_1px - 2.0 * omt.ln()).exp()
            }
            DistSpec::Gb1 { p, q, r, delta } => {
                ((p - 1.0) * t.ln() + (q - 1.0) * omt.ln() + r * (omt + delta * t).ln()).exp()
            }
            _ => unreachable!(),
        }
    };
    let total = tanh_sinh(
        |_, t, omt| if t > 0.0 && omt > 0.0 { kernel(t, omt) } else { 0.0 },
        0.0,
        1.0,
        &cfg,
    )
    .unwrap();
    total / law.normalizer()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gb2_density_normalized(
        p in 0.3f64..4.0,
        q in 0.3f64..4.0,
        w in 0.05f64..0.95,
        g in 0.0f64..1.0,
    ) {
        let nu = -q + w * (p + q);
        let spec = DistSpec::gb2(nu, p, q, log_uniform(g, 0.1, 10.0)).unwrap();
        let m = mass(spec);
        prop_assert!((m - 1.0).abs() < 1e-8, "{spec:?}: mass {m}");
    }

    #[test]
    fn gb1_density_normalized(
        p in 0.3f64..4.0,
        q in 0.3f64..4.0,
        r in -3.0f64..3.0,
        g in 0.0f64..1.0,
    ) {
        let spec = DistSpec::gb1(p, q, r, log_uniform(g, 0.1, 10.0)).unwrap();
        let m = mass(spec);
        prop_assert!((m - 1.0).abs() < 1e-8, "{spec:?}: mass {m}");
    }
}

#[test]
fn b2_sample_mean() {
    // E[B2(a, b)] = a / (b - 1) for b > 1; b > 2 keeps the variance finite
    let (a, b) = (1.5, 4.0);
    let xs = sample(&DistSpec::b2(a, b).unwrap(), 200_000, 9).unwrap().values;
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let exact = a / (b - 1.0);
    assert!((mean - exact).abs() < 4.0 * se, "mean {mean} vs {exact} (se {se})");
}

#[test]
fn samplers_fit_their_laws() {
    let cfg = QuadratureConfig::default();
    let n = 50_000;
    let specs = [
        DistSpec::gb2(0.3, 1.5, 2.0, 2.0).unwrap(),
        DistSpec::gb2(-0.3, 1.5, 2.0, 0.5).unwrap(),
        DistSpec::gb2(0.2, 0.7, 1.1, 40.0).unwrap(),
        DistSpec::b2(0.5, 3.0).unwrap(),
        DistSpec::gb1(3.5, 1.2, -3.2, 0.4).unwrap(),
        DistSpec::gb1(0.8, 2.0, 2.5, 5.0).unwrap(),
        DistSpec::b1(0.6, 0.9).unwrap(),
    ];
    let crit = ks_critical_one_sample(n, 0.001);
    for (k, spec) in specs.iter().enumerate() {
        let xs = sample(spec, n, 100 + k as u64).unwrap().values;
        let d = ks_law(&xs, &Law::new(*spec, &cfg).unwrap()).unwrap();
        assert!(d < crit, "{spec:?}: KS {d} above {crit}");
    }
}

#[test]
fn gb2_unit_gamma_matches_b2_by_samples() {
    // γ = 1 collapses the density to x^{q+ν−1}(1+x)^{−(p+q)}
    let (nu, p, q) = (0.4, 1.3, 2.2);
    let n = 40_000;
    let a = sample(&DistSpec::gb2(nu, p, q, 1.0).unwrap(), n, 1).unwrap().values;
    let b = sample(&DistSpec::b2(q + nu, p - nu).unwrap(), n, 2).unwrap().values;
    let d = ks_two_sample(&a, &b).unwrap();
    assert!(d < ks_critical_two_sample(n, n, 0.001), "two-sample KS {d}");
}

#[test]
fn distinct_laws_are_told_apart() {
    // KS must notice a moderate parameter change at this size
    let cfg = QuadratureConfig::default();
    let xs = sample(&DistSpec::gb2(0.3, 1.5, 2.0, 2.0).unwrap(), 50_000, 4).unwrap().values;
    let other = Law::new(DistSpec::gb2(0.3, 1.5, 2.0, 3.0).unwrap(), &cfg).unwrap();
    let d = ks_law(&xs, &other).unwrap();
    assert!(d > ks_critical_one_sample(xs.len(), 0.001), "KS {d}");
}
