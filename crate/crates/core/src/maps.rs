//! Quadrirational Yang-Baxter maps of the plane and their structure:
//! conserved triples, closed-form Jacobians and conjugations.
//!
//! Every formula is written as a ratio of sums of positive terms, so on the
//! open domain there is no cancellation anywhere. The `G^δ` map additionally
//! carries the complements `1 - x`, `1 - y` through the computation.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// One of the supported maps with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum MapSpec {
    #[serde(rename = "fab")]
    Fab { alpha: f64, beta: f64 },
    #[serde(rename = "fa-inf")]
    FaInf { alpha: f64 },
    #[serde(rename = "finf-b")]
    FInfB { beta: f64 },
    #[serde(rename = "fa-zero")]
    FaZero { alpha: f64 },
    #[serde(rename = "gdelta")]
    Gdelta { delta: f64 },
}

/// A point of `(0, ∞)²`, or of `(0, 1)²` for `G^δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

fn check_open(func: &'static str, pt: PlanePoint) -> Result<()> {
    if positive(pt.x) && positive(pt.y) {
        Ok(())
    } else {
        Err(domain(func, format!("point ({}, {}) must lie in (0, ∞)²", pt.x, pt.y)))
    }
}

fn check_unit(func: &'static str, pt: PlanePoint) -> Result<()> {
    if pt.x > 0.0 && pt.x < 1.0 && pt.y > 0.0 && pt.y < 1.0 {
        Ok(())
    } else {
        Err(domain(func, format!("point ({}, {}) must lie in (0, 1)²", pt.x, pt.y)))
    }
}

fn check_param(name: &str, v: f64) -> Result<()> {
    if positive(v) {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("map parameter {name} must be positive, got {v}")))
    }
}

impl MapSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MapSpec::Fab { alpha, beta } => {
                check_param("alpha", alpha)?;
                check_param("beta", beta)
            }
            MapSpec::FaInf { alpha } | MapSpec::FaZero { alpha } => check_param("alpha", alpha),
            MapSpec::FInfB { beta } => check_param("beta", beta),
            MapSpec::Gdelta { delta } => check_param("delta", delta),
        }
    }

    /// Short name, as used on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            MapSpec::Fab { .. } => "fab",
            MapSpec::FaInf { .. } => "fa-inf",
            MapSpec::FInfB { .. } => "finf-b",
            MapSpec::FaZero { .. } => "fa-zero",
            MapSpec::Gdelta { .. } => "gdelta",
        }
    }

    /// True when the domain is `(0, 1)²` rather than `(0, ∞)²`.
    pub fn unit_domain(&self) -> bool {
        matches!(self, MapSpec::Gdelta { .. })
    }

    pub fn check_point(&self, pt: PlanePoint) -> Result<()> {
        if self.unit_domain() {
            check_unit("apply_map", pt)
        } else {
            check_open("apply_map", pt)
        }
    }

    /// Image of `pt`, without domain checks.
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            MapSpec::Fab { alpha: a, beta: b } => fab(a, b, x, y),
            MapSpec::FaInf { alpha: a } => fa_inf(a, x, y),
            MapSpec::FInfB { beta: b } => (
                x * y * (1.0 + b * y) / (1.0 + x + y + b * x * y),
                (1.0 + x + b * x * y) / (b * y),
            ),
            MapSpec::FaZero { alpha: a } => (
                (1.0 + x + y) / (a * x * y),
                (1.0 + x + y + a * x * y) / (a * x * (1.0 + x)),
            ),
            MapSpec::Gdelta { delta } => {
                let g = gdelta(delta, x, 1.0 - x, y, 1.0 - y);
                (g.u, g.v)
            }
        }
    }

    /// Image of a point strictly inside the domain.
    pub fn apply(&self, pt: PlanePoint) -> Result<PlanePoint> {
        self.validate()?;
        self.check_point(pt)?;
        let (u, v) = self.eval(pt.x, pt.y);
        Ok(PlanePoint::new(u, v))
    }

    /// The conserved triple evaluated at an input point `(x, y)`.
    ///
    /// `(u, v) = F(x, y)` exactly when this equals
    /// [`MapSpec::image_invariant_triple`] at `(u, v)`.
    pub fn invariant_triple(&self, pt: PlanePoint) -> Result<[f64; 3]> {
        check_open("invariant_triple", pt)?;
        let PlanePoint { x, y } = pt;
        let first = x * y / ((1.0 + x) * (1.0 + y));
        match *self {
            MapSpec::Fab { alpha: a, beta: b } => Ok([
                first,
                a * x / ((1.0 + a * x) * (1.0 + y)),
                b * y / ((1.0 + x) * (1.0 + b * y)),
            ]),
            MapSpec::FaInf { alpha: a } => {
                Ok([first, a * x / ((1.0 + a * x) * (1.0 + y)), 1.0 / (1.0 + x)])
            }
            _ => Err(Error::UnsupportedMap("invariant_triple")),
        }
    }

    /// The conserved triple evaluated at an image point `(u, v)`.
    pub fn image_invariant_triple(&self, pt: PlanePoint) -> Result<[f64; 3]> {
        check_open("invariant_triple", pt)?;
        let PlanePoint { x: u, y: v } = pt;
        let first = u * v / ((1.0 + u) * (1.0 + v));
        match *self {
            MapSpec::Fab { alpha: a, beta: b } => Ok([
                first,
                b * v / ((1.0 + u) * (1.0 + b * v)),
                a * u / ((1.0 + a * u) * (1.0 + v)),
            ]),
            MapSpec::FaInf { alpha: a } => {
                Ok([first, 1.0 / (1.0 + u), a * u / ((1.0 + a * u) * (1.0 + v))])
            }
            _ => Err(Error::UnsupportedMap("invariant_triple")),
        }
    }

    /// Closed-form Jacobian magnitude of the inverse map at an image point.
    /// Both supported maps are involutions, so this is also the Jacobian of
    /// the map itself at `(u, v)`.
    pub fn jacobian_closed(&self, pt: PlanePoint) -> Result<f64> {
        check_open("jacobian_closed", pt)?;
        let PlanePoint { x: u, y: v } = pt;
        match *self {
            MapSpec::FaInf { alpha: a } => {
                Ok((1.0 + a * u) * (1.0 + v + a * u * v) / (a * u * (1.0 + u + v + a * u * v)))
            }
            MapSpec::FaZero { alpha: a } => Ok((1.0 + u + v) * (1.0 + u + v + a * u * v)
                / (a * a * u * u * u * (1.0 + u) * v * v)),
            _ => Err(Error::UnsupportedMap("jacobian_closed")),
        }
    }
}

fn fab(a: f64, b: f64, x: f64, y: f64) -> (f64, f64) {
    let axy = a * b * x * y;
    (
        (y / a) * (b + a * x + b * y + axy) / (1.0 + x + y + b * x * y),
        (x / b) * (a + a * x + b * y + axy) / (1.0 + x + y + a * x * y),
    )
}

fn fa_inf(a: f64, x: f64, y: f64) -> (f64, f64) {
    (
        (1.0 + y + a * x * y) / (a * x),
        x * y * (1.0 + a * x) / (1.0 + x + y + a * x * y),
    )
}

/// Image of `G^δ` together with the complements of both coordinates.
#[derive(Debug, Clone, Copy)]
struct GImage {
    u: f64,
    om_u: f64,
    v: f64,
    om_v: f64,
}

fn gdelta(d: f64, x: f64, om_x: f64, y: f64, om_y: f64) -> GImage {
    let xy = x * y;
    let om_xy = om_x + x * om_y; // 1 - xy
    let s = om_xy + d * xy; // 1 + (δ-1)xy
    let t = om_x + d * x; // 1 + (δ-1)x
    GImage {
        u: om_xy / s,
        om_u: d * xy / s,
        v: om_x * s / (t * om_xy),
        om_v: d * x * om_y / (t * om_xy),
    }
}

/// `F^(1/δ, ∞)` evaluated through `G^δ`:
/// `(δ h(G₁[g(x/δ), g(1/y)]), 1/h(G₂[g(x/δ), g(1/y)]))`
/// with `h(t) = t/(1-t)` and `g(t) = t/(1+t)`.
pub fn conjugate_fg(delta: f64, pt: PlanePoint) -> Result<PlanePoint> {
    check_param("delta", delta)?;
    check_open("conjugate_fg", pt)?;
    let xs = pt.x / delta;
    let yinv = 1.0 / pt.y;
    // g(t) and 1 - g(t) = 1/(1+t)
    let (gx, om_gx) = (xs / (1.0 + xs), 1.0 / (1.0 + xs));
    let (gy, om_gy) = (yinv / (1.0 + yinv), 1.0 / (1.0 + yinv));
    let img = gdelta(delta, gx, om_gx, gy, om_gy);
    Ok(PlanePoint::new(
        delta * (img.u / img.om_u),
        img.om_v / img.v,
    ))
}

/// `F^(α,0)` evaluated through `F^(1/α,∞)`:
/// `((1/α) F₁(αx, 1/y), 1/F₂(αx, 1/y))`.
pub fn conjugate_zero_inf(alpha: f64, pt: PlanePoint) -> Result<PlanePoint> {
    check_param("alpha", alpha)?;
    check_open("conjugate_zero_inf", pt)?;
    let (f1, f2) = fa_inf(1.0 / alpha, alpha * pt.x, 1.0 / pt.y);
    Ok(PlanePoint::new(f1 / alpha, 1.0 / f2))
}

/// Absolute Jacobian determinant of `spec` at `pt` by central differences.
pub fn jacobian_numeric(spec: &MapSpec, pt: PlanePoint) -> Result<f64> {
    spec.check_point(pt)?;
    let step = |v: f64| {
        let h = 1e-5 * v;
        if spec.unit_domain() {
            h.min(0.5 * (1.0 - v))
        } else {
            h
        }
    };
    let hx = step(pt.x);
    let hy = step(pt.y);
    let (ux1, vx1) = spec.eval(pt.x + hx, pt.y);
    let (ux0, vx0) = spec.eval(pt.x - hx, pt.y);
    let (uy1, vy1) = spec.eval(pt.x, pt.y + hy);
    let (uy0, vy0) = spec.eval(pt.x, pt.y - hy);
    let du_dx = (ux1 - ux0) / (2.0 * hx);
    let dv_dx = (vx1 - vx0) / (2.0 * hx);
    let du_dy = (uy1 - uy0) / (2.0 * hy);
    let dv_dy = (vy1 - vy0) / (2.0 * hy);
    Ok((du_dx * dv_dy - du_dy * dv_dx).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(a.abs())
    }

    #[test]
    fn hand_evaluations() {
        let p = PlanePoint::new(1.0, 1.0);
        let fab = MapSpec::Fab { alpha: 1.0, beta: 2.0 }.apply(p).unwrap();
        assert!(close(fab.x, 1.4, 1e-15) && close(fab.y, 0.75, 1e-15));
        let fi = MapSpec::FaInf { alpha: 1.0 };
        let img = fi.apply(p).unwrap();
        assert!(close(img.x, 3.0, 1e-15) && close(img.y, 0.5, 1e-15));
        let back = fi.apply(img).unwrap();
        assert!(close(back.x, 1.0, 1e-15) && close(back.y, 1.0, 1e-15));
        let z = MapSpec::FaZero { alpha: 1.0 }.apply(p).unwrap();
        assert!(close(z.x, 3.0, 1e-15) && close(z.y, 2.0, 1e-15));
    }

    #[test]
    fn gdelta_unit_parameter() {
        let g = MapSpec::Gdelta { delta: 1.0 };
        let (x, y) = (0.3, 0.8);
        let img = g.apply(PlanePoint::new(x, y)).unwrap();
        assert!(close(img.x, 1.0 - x * y, 1e-15));
        assert!(close(img.y, (1.0 - x) / (1.0 - x * y), 1e-15));
    }

    #[test]
    fn domain_errors() {
        let f = MapSpec::Fab { alpha: 1.0, beta: 2.0 };
        assert!(f.apply(PlanePoint::new(0.0, 1.0)).is_err());
        assert!(f.apply(PlanePoint::new(1.0, f64::INFINITY)).is_err());
        let g = MapSpec::Gdelta { delta: 2.0 };
        assert!(g.apply(PlanePoint::new(0.5, 1.0)).is_err());
        assert!(MapSpec::FaInf { alpha: -1.0 }.apply(PlanePoint::new(1.0, 1.0)).is_err());
        // α = β is fine pointwise
        assert!(MapSpec::Fab { alpha: 2.0, beta: 2.0 }.apply(PlanePoint::new(1.0, 1.0)).is_ok());
    }

    #[test]
    fn invariant_examples() {
        let f = MapSpec::Fab { alpha: 1.0, beta: 2.0 };
        let p = PlanePoint::new(1.0, 1.0);
        let tin = f.invariant_triple(p).unwrap();
        let tout = f.image_invariant_triple(f.apply(p).unwrap()).unwrap();
        assert!(close(tin[0], 0.25, 1e-15));
        for i in 0..3 {
            assert!(close(tin[i], tout[i], 1e-14));
        }
        let tiny = f.invariant_triple(PlanePoint::new(1e-300, 1.0)).unwrap();
        assert!(tiny[0] < 1e-299 && tiny[1] < 1e-299);
        assert!(matches!(
            MapSpec::FaZero { alpha: 1.0 }.invariant_triple(p),
            Err(Error::UnsupportedMap(_))
        ));
    }

    #[test]
    fn jacobian_example() {
        let j = MapSpec::FaInf { alpha: 1.0 }
            .jacobian_closed(PlanePoint::new(3.0, 0.5))
            .unwrap();
        assert!(close(j, 2.0 / 3.0, 1e-15));
        assert!(MapSpec::Fab { alpha: 1.0, beta: 2.0 }
            .jacobian_closed(PlanePoint::new(1.0, 1.0))
            .is_err());
    }

    #[test]
    fn conjugation_examples() {
        let p = conjugate_fg(1.0, PlanePoint::new(1.0, 1.0)).unwrap();
        assert!(close(p.x, 3.0, 1e-15) && close(p.y, 0.5, 1e-15));
        let z = conjugate_zero_inf(1.0, PlanePoint::new(1.0, 1.0)).unwrap();
        assert!(close(z.x, 3.0, 1e-15) && close(z.y, 2.0, 1e-15));
    }

    #[test]
    fn serde_names() {
        let m = MapSpec::FaInf { alpha: 2.0 };
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"kind":"fa-inf","alpha":2.0}"#);
        let back: MapSpec = serde_json::from_str(r#"{"kind":"fab","alpha":2.0,"beta":0.5}"#).unwrap();
        assert_eq!(back, MapSpec::Fab { alpha: 2.0, beta: 0.5 });
    }
}
