//! Structural properties of the maps at random points.

use proptest::prelude::*;
use ybip::maps::{conjugate_fg, conjugate_zero_inf, MapSpec, PlanePoint};

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 { 0.0 } else { d / a.abs().max(b.abs()) }
}

fn close(p: PlanePoint, q: PlanePoint, tol: f64) -> bool {
    rel(p.x, q.x) < tol && rel(p.y, q.y) < tol
}

fn pos() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fab_conserves_and_inverts(alpha in pos(), beta in pos(), x in pos(), y in pos()) {
        prop_assume!(alpha != beta);
        let m = MapSpec::Fab { alpha, beta };
        let p = PlanePoint::new(x, y);
        let img = m.apply(p).unwrap();
        let a = m.invariant_triple(p).unwrap();
        let b = m.image_invariant_triple(img).unwrap();
        for i in 0..3 {
            prop_assert!(rel(a[i], b[i]) < 1e-12, "invariant {}", i);
        }
        prop_assert!(close(m.apply(img).unwrap(), p, 1e-12), "involution at {:?}", p);
    }

    #[test]
    fn boundary_maps_invert(alpha in pos(), x in pos(), y in pos()) {
        let p = PlanePoint::new(x, y);
        for m in [MapSpec::FaInf { alpha }, MapSpec::FaZero { alpha }, MapSpec::FInfB { beta: alpha }] {
            prop_assert!(close(m.apply(m.apply(p).unwrap()).unwrap(), p, 1e-12), "{m:?}");
        }
    }

    #[test]
    fn gdelta_is_an_involution_of_the_square(delta in pos(), x in 0.01f64..0.99, y in 0.01f64..0.99) {
        let m = MapSpec::Gdelta { delta };
        let p = PlanePoint::new(x, y);
        let img = m.apply(p).unwrap();
        prop_assert!(img.x > 0.0 && img.x < 1.0 && img.y > 0.0 && img.y < 1.0, "image {:?}", img);
        prop_assert!(close(m.apply(img).unwrap(), p, 1e-10), "involution at {:?}", p);
    }

    #[test]
    fn conjugations_hold(delta in pos(), alpha in pos(), x in pos(), y in pos()) {
        let p = PlanePoint::new(x, y);
        let fg = conjugate_fg(delta, p).unwrap();
        prop_assert!(close(fg, MapSpec::FaInf { alpha: 1.0 / delta }.apply(p).unwrap(), 1e-12), "at {:?}", p);
        let zi = conjugate_zero_inf(alpha, p).unwrap();
        prop_assert!(close(zi, MapSpec::FaZero { alpha }.apply(p).unwrap(), 1e-12), "at {:?}", p);
    }
}
