//! The difference equation separates the transform from perturbations of it.

use ybip::hde::{hde_residual, hde_spec_from_model};
use ybip::quadrature::QuadratureConfig;
use ybip::transforms::{ClosedGb2, ModelQuad, Role, TransformPoint};

#[test]
fn perturbed_transform_violates_equation() {
    let (alpha, lambda, a, b) = (2.0, 0.3, 1.5, 2.0);
    let model = ModelQuad::new(lambda, a, b, alpha, 0.5).unwrap();
    let u = ClosedGb2::new(&model.law(Role::U), &QuadratureConfig::default()).unwrap();
    let spec = hde_spec_from_model(alpha, lambda, a, b).unwrap();
    let b3 = spec.beta3;
    let ell = |x: f64| u.eval_general(TransformPoint::new(0.0, 0.0, x - b3));
    for eps in [1e-3, 1e-2] {
        let bent = |x: f64| ell(x).map(|v| v * (1.0 + eps * (x - b3)));
        let worst = (0..10)
            .map(|k| hde_residual(&spec, bent, b3 + k as f64).unwrap().rel_residual)
            .fold(0.0_f64, f64::max);
        assert!(worst > 1e-6, "eps {eps}: residual {worst}");
    }
    for k in 0..10 {
        assert!(hde_residual(&spec, ell, b3 + k as f64).unwrap().rel_residual < 1e-9);
    }
}

#[test]
fn other_parameters_fail_the_equation() {
    let (alpha, lambda, a, b) = (0.4, 0.3, 1.5, 2.0);
    let spec = hde_spec_from_model(alpha, lambda, a, b).unwrap();
    let wrong = ModelQuad::new(lambda, a + 0.1, b, alpha, 0.5).unwrap();
    let u = ClosedGb2::new(&wrong.law(Role::U), &QuadratureConfig::default()).unwrap();
    let b3 = spec.beta3;
    let ell = |x: f64| u.eval_general(TransformPoint::new(0.0, 0.0, x - b3));
    let worst = (0..10)
        .map(|k| hde_residual(&spec, ell, b3 + k as f64).unwrap().rel_residual)
        .fold(0.0_f64, f64::max);
    assert!(worst > 1e-6, "residual {worst}");
}
