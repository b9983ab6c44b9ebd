//! Properties of the transform, checked on random points.

use proptest::prelude::*;
use ybip::distributions::{sample, DistSpec};
use ybip::quadrature::QuadratureConfig;
use ybip::transforms::{
    residual_identities, residual_lindep, ModelQuad, TransformEvaluator, TransformPoint,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pointwise_identities_on_random_points(
        s in 0.0f64..3.0,
        theta in -0.5f64..3.0,
        sigma in -0.5f64..3.0,
        nu in -0.9f64..0.9,
        gamma in 0.2f64..5.0,
    ) {
        let spec = DistSpec::gb2(nu, 1.5, 2.0, gamma).unwrap();
        let pt = TransformPoint::new(s, theta, sigma);
        prop_assume!(pt.in_xi());
        let ev = TransformEvaluator::closed(&spec, &QuadratureConfig::default()).unwrap();
        for r in residual_identities(&ev, pt).unwrap() {
            prop_assert!(r.rel_residual < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn factorization_on_random_models(
        lambda in -0.9f64..0.9,
        alpha in 0.2f64..5.0,
        beta in 0.2f64..5.0,
        s in 0.0f64..2.0,
        theta in 0.0f64..2.0,
        sigma in 0.0f64..2.0,
    ) {
        let model = ModelQuad::new(lambda, 1.2, 1.7, alpha, beta).unwrap();
        let ev = model.evaluators(&QuadratureConfig::default()).unwrap();
        let r = residual_lindep(&ev, TransformPoint::new(s, theta, sigma)).unwrap();
        prop_assert!(r.rel_residual < 1e-8, "{r:?}");
    }
}

#[test]
fn transform_is_one_at_origin() {
    let spec = DistSpec::gb2(0.3, 1.5, 2.0, 2.0).unwrap();
    let ev = TransformEvaluator::closed(&spec, &QuadratureConfig::default()).unwrap();
    assert!((ev.eval(TransformPoint::new(0.0, 0.0, 0.0)).unwrap() - 1.0).abs() < 1e-14);
    let batch = sample(&spec, 1000, 1).unwrap();
    let mc = TransformEvaluator::monte_carlo(&batch, Some(2.0)).unwrap();
    assert_eq!(mc.eval(TransformPoint::new(0.0, 0.0, 0.0)).unwrap(), 1.0);
}

#[test]
fn monte_carlo_tracks_closed_form() {
    let spec = DistSpec::gb2(-0.3, 1.5, 2.0, 0.5).unwrap();
    let batch = sample(&spec, 100_000, 3).unwrap();
    let TransformEvaluator::MonteCarlo(mc) = TransformEvaluator::monte_carlo(&batch, Some(0.5)).unwrap() else {
        unreachable!()
    };
    let closed = TransformEvaluator::closed(&spec, &QuadratureConfig::default()).unwrap();
    for pt in [TransformPoint::new(1.0, 0.5, 0.0), TransformPoint::new(0.0, 2.0, 1.0)] {
        let est = mc.estimate(pt).unwrap();
        let c = closed.eval(pt).unwrap();
        assert!((est.value - c).abs() < 4.0 * est.se, "{pt:?}: {} vs {c}", est.value);
    }
}
