//! Property tests of the special functions against independent oracles.

use proptest::prelude::*;
use ybip::quadrature::QuadratureConfig;
use ybip::specfun::{gauss_2f1, ln_beta, log_gamma, pochhammer};
use ybip::verify::euler_residual;

/// Direct power series of 2F1, used only where it converges fast.
fn series_2f1(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..2000 {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn euler_transformation(
        b in 0.05f64..4.0,
        dc in 0.05f64..4.0,
        da in 0.05f64..6.0,
        z in -2.0f64..0.9,
    ) {
        let c = b + dc;
        let a = c - da;
        let r = euler_residual(a, b, c, z, &QuadratureConfig::default()).unwrap();
        prop_assert!(r < 1e-9, "a={a} b={b} c={c} z={z} residual={r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hypergeometric_matches_series(
        a in -3.0f64..3.0,
        b in 0.1f64..3.0,
        dc in 0.1f64..3.0,
        z in -0.5f64..0.5,
    ) {
        let c = b + dc;
        let q = gauss_2f1(a, b, c, z, &QuadratureConfig::default()).unwrap();
        let s = series_2f1(a, b, c, z);
        prop_assert!(rel(q, s) < 1e-9, "a={a} b={b} c={c} z={z}: {q} vs {s}");
    }

    #[test]
    fn pochhammer_factorizes(c in 0.05f64..10.0, d1 in 0.0f64..5.0, d2 in 0.0f64..5.0) {
        let whole = pochhammer(c, d1 + d2).unwrap();
        let parts = pochhammer(c, d1).unwrap() * pochhammer(c + d1, d2).unwrap();
        prop_assert!(rel(whole, parts) < 1e-12, "c={c} d1={d1} d2={d2}");
    }

    #[test]
    fn log_gamma_recurrence(x in 1e-3f64..50.0) {
        let lhs = log_gamma(x + 1.0).unwrap();
        let rhs = log_gamma(x).unwrap() + x.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0), "x={x}");
    }

    #[test]
    fn beta_symmetric_and_recursive(a in 0.05f64..10.0, b in 0.05f64..10.0) {
        let lb = ln_beta(a, b).unwrap();
        prop_assert!((lb - ln_beta(b, a).unwrap()).abs() < 1e-13 * lb.abs().max(1.0));
        // B(a+1, b) = B(a, b) a / (a + b)
        let shifted = ln_beta(a + 1.0, b).unwrap();
        prop_assert!((shifted - (lb + (a / (a + b)).ln())).abs() < 1e-12 * lb.abs().max(1.0));
    }
}
