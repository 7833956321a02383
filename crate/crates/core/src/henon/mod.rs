//! Hénon maps `H(x, y) = (p(x) - a y, x)`, the solid-torus models and
//! accessible-boundary probing.

mod accessible;
mod torus;

pub use accessible::{
    accessible_boundary_sample, boundary_ray_1d, cantor_accessible, AccessibleOptions, BoundaryCertificate,
    BoundaryPoint, BoundarySample, CantorEndpoint, EndpointSide,
};
pub use torus::{
    f_gamma, f_solid_torus, torus_diagnostics, CloudStep, GammaTorusMap, InjectivityReport, SolidTorusMap,
    TorusMap, TorusPoint, TorusReport,
};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{roots_of, ComplexPolynomial};

pub const DEFAULT_A_MAX: f64 = 0.05;
pub const DEFAULT_ALPHA: f64 = 0.1;
const CONVERGENCE_RADIUS: f64 = 1e-9;

pub type Point2 = (Complex64, Complex64);

#[derive(Clone, Debug, PartialEq)]
pub struct HenonParams {
    pub p: ComplexPolynomial,
    pub a: Complex64,
    pub alpha: Complex64,
}

impl HenonParams {
    pub fn new(p: ComplexPolynomial, a: Complex64, alpha: Complex64) -> Result<Self> {
        Self::with_limit(p, a, alpha, DEFAULT_A_MAX)
    }

    pub fn with_limit(p: ComplexPolynomial, a: Complex64, alpha: Complex64, a_max: f64) -> Result<Self> {
        p.require_dynamical()?;
        if !(a.norm() <= a_max) {
            return Err(Error::Precondition(format!("|a| = {} exceeds {a_max}", a.norm())));
        }
        if !alpha.is_finite() {
            return Err(Error::Precondition("alpha must be finite".into()));
        }
        Ok(Self { p, a, alpha })
    }

    /// `1 + |alpha| rho < rho`.
    pub fn alpha_admissible(&self, rho: f64) -> bool {
        1.0 + self.alpha.norm() * rho < rho
    }

    /// Smallest escape radius accepted by `classify_henon_orbit`.
    pub fn escape_floor(&self) -> f64 {
        2.0 * (1.0 + self.a.norm() + self.p.coefficient_bound())
    }
}

pub fn henon(params: &HenonParams, (x, y): Point2) -> Point2 {
    (params.p.eval(x) - params.a * y, x)
}

/// `[[p'(x), -a], [1, 0]]`.
pub fn henon_jacobian(params: &HenonParams, (x, _): Point2) -> Matrix2<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    Matrix2::new(params.p.derivative().eval(x), -params.a, one, zero)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointClass {
    Attracting,
    Saddle,
    Repelling,
    Indifferent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HenonFixedPoint {
    pub id: usize,
    pub point: Point2,
    pub eigenvalues: [Complex64; 2],
    pub class: FixedPointClass,
}

/// Solutions of `x = p(x) - a x` on the diagonal, ordered by `(re, im)`.
pub fn henon_fixed_points(params: &HenonParams) -> Result<Vec<HenonFixedPoint>> {
    let q = params.p.minus_linear(Complex64::new(1.0, 0.0) + params.a, Complex64::new(0.0, 0.0));
    let mut xs = roots_of(&q)?;
    xs.sort_by(|u, v| u.re.total_cmp(&v.re).then(u.im.total_cmp(&v.im)));
    let dp = params.p.derivative();
    Ok(xs
        .into_iter()
        .enumerate()
        .map(|(id, x)| {
            // lambda^2 - p'(x) lambda + a = 0
            let t = dp.eval(x);
            let disc = (t * t - params.a * 4.0).sqrt();
            let eigenvalues = [(t + disc) / 2.0, (t - disc) / 2.0];
            let class = classify_eigenvalues(&eigenvalues);
            HenonFixedPoint {
                id,
                point: (x, x),
                eigenvalues,
                class,
            }
        })
        .collect())
}

fn classify_eigenvalues(ev: &[Complex64; 2]) -> FixedPointClass {
    let (a, b) = (ev[0].norm(), ev[1].norm());
    const EDGE: f64 = 1e-12;
    if a < 1.0 - EDGE && b < 1.0 - EDGE {
        FixedPointClass::Attracting
    } else if a > 1.0 + EDGE && b > 1.0 + EDGE {
        FixedPointClass::Repelling
    } else if (a < 1.0 - EDGE && b > 1.0 + EDGE) || (b < 1.0 - EDGE && a > 1.0 + EDGE) {
        FixedPointClass::Saddle
    } else {
        FixedPointClass::Indifferent
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HenonVerdict {
    Escaped { step: usize },
    Bounded,
    Converged { fixed_point: usize, step: usize },
}

/// Escape / convergence to an attracting fixed point / inconclusive.
pub fn classify_henon_orbit(
    params: &HenonParams,
    start: Point2,
    escape_radius: f64,
    budget: usize,
) -> Result<HenonVerdict> {
    let floor = params.escape_floor();
    if !(escape_radius >= floor) {
        return Err(Error::Precondition(format!(
            "escape radius {escape_radius} below {floor}"
        )));
    }
    let attractors: Vec<HenonFixedPoint> = henon_fixed_points(params)?
        .into_iter()
        .filter(|f| f.class == FixedPointClass::Attracting)
        .collect();
    Ok(classify_with(params, &attractors, start, escape_radius, budget))
}

pub(crate) fn classify_with(
    params: &HenonParams,
    attractors: &[HenonFixedPoint],
    start: Point2,
    escape_radius: f64,
    budget: usize,
) -> HenonVerdict {
    let mut z = start;
    for step in 1..=budget {
        z = henon(params, z);
        if !(z.0.norm().max(z.1.norm()) <= escape_radius) {
            return HenonVerdict::Escaped { step };
        }
        for f in attractors {
            if (z.0 - f.point.0).norm().max((z.1 - f.point.1).norm()) < CONVERGENCE_RADIUS {
                return HenonVerdict::Converged {
                    fixed_point: f.id,
                    step,
                };
            }
        }
    }
    HenonVerdict::Bounded
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(a: f64) -> HenonParams {
        HenonParams::new(ComplexPolynomial::quadratic(c(0.1, 0.0)), c(a, 0.0), c(0.1, 0.0)).unwrap()
    }

    #[test]
    fn map_examples() {
        let h = params(0.05);
        assert_eq!(henon(&h, (c(0.0, 0.0), c(0.0, 0.0))), (c(0.1, 0.0), c(0.0, 0.0)));
        let h0 = params(0.0);
        let x = c(0.3, -0.2);
        assert_eq!(henon(&h0, (x, c(5.0, 1.0))), (h0.p.eval(x), x));
        assert!(HenonParams::new(h.p.clone(), c(0.06, 0.0), c(0.1, 0.0)).is_err());
    }

    #[test]
    fn jacobian_determinant_is_a() {
        let h = HenonParams::new(ComplexPolynomial::quadratic(c(0.1, 0.0)), c(0.03, -0.02), c(0.1, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let z = (c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)), c(rng.gen(), rng.gen()));
            assert_eq!(henon_jacobian(&h, z).determinant(), h.a);
        }
    }

    #[test]
    fn fixed_point_of_perturbed_map() {
        let fps = henon_fixed_points(&params(0.05)).unwrap();
        let f = fps.iter().find(|f| f.class == FixedPointClass::Attracting).unwrap();
        let expected = (1.05 - (1.05f64 * 1.05 - 0.4).sqrt()) / 2.0;
        assert!((f.point.0 - c(expected, 0.0)).norm() < 1e-12);
        assert!((f.point.0 - c(0.105925, 0.0)).norm() < 2e-6);
        for ev in f.eigenvalues {
            assert!((ev.norm() - 0.05f64.sqrt()).abs() < 1e-12);
        }
        let g = fps.iter().find(|f| f.class != FixedPointClass::Attracting).unwrap();
        assert_eq!(g.class, FixedPointClass::Saddle);
    }

    #[test]
    fn degenerate_jacobian_reduces_to_p() {
        let fps = henon_fixed_points(&params(0.0)).unwrap();
        let p = ComplexPolynomial::quadratic(c(0.1, 0.0));
        for f in &fps {
            assert!((p.eval(f.point.0) - f.point.0).norm() < 1e-12);
            assert!(f.eigenvalues.iter().any(|e| e.norm() < 1e-15));
            assert!(f.eigenvalues.iter().any(|e| (e - p.derivative().eval(f.point.0)).norm() < 1e-15));
        }
        let h = HenonParams::new(ComplexPolynomial::monomial(2), c(0.05, 0.0), c(0.1, 0.0)).unwrap();
        let att: Vec<_> = henon_fixed_points(&h)
            .unwrap()
            .into_iter()
            .filter(|f| f.class == FixedPointClass::Attracting)
            .collect();
        assert_eq!(att.len(), 1);
        assert!(att[0].point.0.norm() < 1e-12);
    }

    #[test]
    fn orbit_trichotomy() {
        let h = params(0.05);
        let r = 10.0;
        assert!(matches!(
            classify_henon_orbit(&h, (c(3.0, 0.0), c(0.0, 0.0)), r, 100).unwrap(),
            HenonVerdict::Escaped { .. }
        ));
        assert!(matches!(
            classify_henon_orbit(&h, (c(0.1, 0.0), c(0.1, 0.0)), r, 500).unwrap(),
            HenonVerdict::Converged { fixed_point: 0, .. }
        ));
        assert_eq!(
            classify_henon_orbit(&h, (c(3.0, 0.0), c(0.0, 0.0)), r, 0).unwrap(),
            HenonVerdict::Bounded
        );
        assert!(classify_henon_orbit(&h, (c(0.0, 0.0), c(0.0, 0.0)), 1.0, 10).is_err());
    }
}
