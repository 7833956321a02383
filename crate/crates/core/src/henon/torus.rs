//! Solid-torus model maps `(zeta, z) -> (zeta^d, b(zeta) + m(zeta) z)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fatou::{BoundaryParametrization, GAMMA_TOLERANCE};
use crate::poly::ComplexPolynomial;

const UNIT_SLACK: f64 = 1e-12;
const SINGULAR_DERIVATIVE: f64 = 1e-6;
const COLLISION: f64 = 1e-9;
const DISTINCT_START: f64 = 1e-7;
const CLOUD_SLACK: f64 = 1e-6;
const WINDING_SAMPLES: usize = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub zeta: Complex64,
    pub z: Complex64,
    pub rho: f64,
}

impl TorusPoint {
    pub fn new(zeta: Complex64, z: Complex64, rho: f64) -> Result<Self> {
        if !(rho > 1.0 && rho.is_finite()) {
            return Err(Error::InvalidTorusPoint(format!("fiber radius {rho} must exceed 1")));
        }
        if !((zeta.norm() - 1.0).abs() <= UNIT_SLACK) {
            return Err(Error::InvalidTorusPoint(format!("|zeta| = {} is not 1", zeta.norm())));
        }
        if !(z.norm() <= rho) {
            return Err(Error::InvalidTorusPoint(format!("|z| = {} exceeds {rho}", z.norm())));
        }
        Ok(Self { zeta, z, rho })
    }
}

/// A map of `S^1 x D_rho` that is affine on each fiber.
pub trait TorusMap: Sync {
    fn degree(&self) -> u32;

    fn rho(&self) -> f64;

    /// `(zeta', b, m)` with `z' = b + m z` over `zeta`.
    fn fiber_map(&self, zeta: Complex64) -> Result<(Complex64, Complex64, Complex64)>;

    /// The formula without the nesting precondition.
    fn apply_raw(&self, zeta: Complex64, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (w, b, m) = self.fiber_map(zeta)?;
        Ok((w, b + m * z))
    }

    fn apply(&self, pt: &TorusPoint) -> Result<TorusPoint> {
        let (zeta, z) = self.apply_raw(pt.zeta, pt.z)?;
        TorusPoint::new(zeta, z, pt.rho)
    }
}

fn unit(w: Complex64) -> Complex64 {
    w / w.norm()
}

/// `(zeta, z) -> (zeta^d, zeta - alpha z / zeta^{d-1})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolidTorusMap {
    pub d: u32,
    pub alpha: Complex64,
    pub rho: f64,
}

impl SolidTorusMap {
    pub fn new(d: u32, alpha: Complex64, rho: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Precondition(format!("degree {d} < 2")));
        }
        if !(rho > 1.0 && rho.is_finite()) || !alpha.is_finite() {
            return Err(Error::Precondition(format!("need rho > 1 and finite alpha, got {rho}, {alpha}")));
        }
        Ok(Self { d, alpha, rho })
    }

    /// `1 + |alpha| rho < rho`.
    pub fn is_nested(&self) -> bool {
        1.0 + self.alpha.norm() * self.rho < self.rho
    }
}

impl TorusMap for SolidTorusMap {
    fn degree(&self) -> u32 {
        self.d
    }

    fn rho(&self) -> f64 {
        self.rho
    }

    fn fiber_map(&self, zeta: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        let lower = zeta.powu(self.d - 1);
        Ok((unit(lower * zeta), zeta, -self.alpha / lower))
    }
}

pub fn f_solid_torus(d: u32, alpha: Complex64, pt: &TorusPoint) -> Result<TorusPoint> {
    let map = SolidTorusMap::new(d, alpha, pt.rho)?;
    if !map.is_nested() {
        return Err(Error::Precondition(format!(
            "1 + |alpha| rho = {} is not below rho = {}",
            1.0 + alpha.norm() * pt.rho,
            pt.rho
        )));
    }
    map.apply(pt)
}

/// `(zeta, z) -> (zeta^k, gamma(zeta) - alpha z / p'(gamma(zeta)))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaTorusMap {
    pub k: u32,
    pub alpha: Complex64,
    pub gamma: BoundaryParametrization,
    pub polynomial: ComplexPolynomial,
    pub rho: f64,
}

impl GammaTorusMap {
    /// With `rho` omitted, the nesting radius `1.1 max|gamma| / (1 - |alpha| / min|p' o gamma|)`.
    pub fn new(
        k: u32,
        alpha: Complex64,
        gamma: BoundaryParametrization,
        polynomial: ComplexPolynomial,
        rho: Option<f64>,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::Precondition(format!("degree {k} < 2")));
        }
        if !(gamma.residual <= GAMMA_TOLERANCE) {
            return Err(Error::TowerDivergence {
                levels: gamma.levels,
                residual: gamma.residual,
            });
        }
        let dp = polynomial.derivative();
        let mut max_gamma: f64 = 0.0;
        let mut min_dp = f64::INFINITY;
        for (j, &g) in gamma.curve.samples().iter().enumerate() {
            let d = dp.eval(g).norm();
            if d < SINGULAR_DERIVATIVE {
                return Err(Error::SingularDerivative {
                    angle: j as f64 / gamma.curve.resolution() as f64,
                    modulus: d,
                });
            }
            max_gamma = max_gamma.max(g.norm());
            min_dp = min_dp.min(d);
        }
        let rho = match rho {
            Some(r) => r,
            None => {
                let shrink = 1.0 - alpha.norm() / min_dp;
                if shrink <= 0.0 {
                    return Err(Error::Precondition(format!(
                        "|alpha| = {} is not below min |p' o gamma| = {min_dp}",
                        alpha.norm()
                    )));
                }
                (1.1 * max_gamma / shrink).max(1.0 + 1e-3)
            }
        };
        if !(rho > 1.0 && rho.is_finite()) {
            return Err(Error::Precondition(format!("fiber radius {rho} must exceed 1")));
        }
        Ok(Self {
            k,
            alpha,
            gamma,
            polynomial,
            rho,
        })
    }
}

impl TorusMap for GammaTorusMap {
    fn degree(&self) -> u32 {
        self.k
    }

    fn rho(&self) -> f64 {
        self.rho
    }

    fn fiber_map(&self, zeta: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        let theta = (zeta.arg() / TAU).rem_euclid(1.0);
        let g = self.gamma.eval(theta);
        let d = self.polynomial.derivative().eval(g);
        if d.norm() < SINGULAR_DERIVATIVE {
            return Err(Error::SingularDerivative {
                angle: theta,
                modulus: d.norm(),
            });
        }
        Ok((unit(zeta.powu(self.k)), g, -self.alpha / d))
    }
}

pub fn f_gamma(
    k: u32,
    alpha: Complex64,
    gamma: &BoundaryParametrization,
    p: &ComplexPolynomial,
    pt: &TorusPoint,
) -> Result<TorusPoint> {
    let map = GammaTorusMap::new(k, alpha, gamma.clone(), p.clone(), Some(pt.rho))?;
    map.apply(pt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub points: usize,
    pub violations: usize,
    /// First colliding pair of starting points.
    pub example: Option<[TorusPoint; 2]>,
}

impl InjectivityReport {
    pub fn injective(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudStep {
    pub iteration: usize,
    /// Mean radius of the image disks `f^i({zeta} x D)`.
    pub fiber_radius: f64,
    /// `fiber_radius` over that of the previous iteration.
    pub decay: f64,
    /// Largest overshoot of an image disk beyond the previous cloud.
    pub max_excess: f64,
    pub contained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusReport {
    pub rho: f64,
    pub degree: u32,
    pub nesting_margin: f64,
    pub winding: i64,
    /// Distance of the lifted winding from the nearest integer.
    pub winding_defect: f64,
    pub injectivity: InjectivityReport,
    pub clouds: Vec<CloudStep>,
    pub monotone: bool,
}

/// Nesting, winding, injectivity and the iterated image clouds of `map`.
pub fn torus_diagnostics<M: TorusMap + ?Sized>(
    map: &M,
    samples: usize,
    iterations: usize,
    seed: u64,
) -> Result<TorusReport> {
    let rho = map.rho();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(Complex64, Complex64)> = (0..samples)
        .map(|_| {
            let zeta = Complex64::from_polar(1.0, TAU * rng.gen::<f64>());
            let z = Complex64::from_polar(rho * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>());
            (zeta, z)
        })
        .collect();
    let images = points
        .par_iter()
        .map(|&(zeta, z)| map.apply_raw(zeta, z))
        .collect::<Result<Vec<_>>>()?;
    let sup = images.iter().map(|w| w.1.norm()).fold(0.0, f64::max);

    let lift: f64 = (0..WINDING_SAMPLES)
        .map(|j| -> Result<f64> {
            let a = Complex64::from_polar(1.0, TAU * j as f64 / WINDING_SAMPLES as f64);
            let b = Complex64::from_polar(1.0, TAU * (j + 1) as f64 / WINDING_SAMPLES as f64);
            let (wa, _, _) = map.fiber_map(a)?;
            let (wb, _, _) = map.fiber_map(b)?;
            Ok((wb / wa).arg())
        })
        .sum::<Result<f64>>()?
        / TAU;

    let mut probe = points.clone();
    probe.extend(coarse_grid(rho));
    let probe_images = probe
        .par_iter()
        .map(|&(zeta, z)| map.apply_raw(zeta, z))
        .collect::<Result<Vec<_>>>()?;
    let injectivity = collisions(&probe, &probe_images, rho);

    let clouds = cloud_steps(map, &points, iterations)?;
    let monotone = clouds.iter().all(|c| c.contained);
    Ok(TorusReport {
        rho,
        degree: map.degree(),
        nesting_margin: rho - sup,
        winding: lift.round() as i64,
        winding_defect: (lift - lift.round()).abs(),
        injectivity,
        clouds,
        monotone,
    })
}

/// 64 angles times a square grid of step `rho / 12` in the disk.
fn coarse_grid(rho: f64) -> Vec<(Complex64, Complex64)> {
    let h = rho / 12.0;
    let mut out = Vec::new();
    for a in 0..64 {
        let zeta = Complex64::from_polar(1.0, TAU * a as f64 / 64.0);
        for i in -12i32..=12 {
            for j in -12i32..=12 {
                let z = Complex64::new(i as f64 * h, j as f64 * h);
                if z.norm() <= rho {
                    out.push((zeta, z));
                }
            }
        }
    }
    out
}

fn collisions(points: &[(Complex64, Complex64)], images: &[(Complex64, Complex64)], rho: f64) -> InjectivityReport {
    let dist = |a: (Complex64, Complex64), b: (Complex64, Complex64)| (a.0 - b.0).norm().max((a.1 - b.1).norm());
    let mut order: Vec<usize> = (0..images.len()).collect();
    order.sort_by(|&i, &j| images[i].0.re.total_cmp(&images[j].0.re));
    let mut violations = 0;
    let mut example = None;
    for (n, &i) in order.iter().enumerate() {
        for &j in &order[n + 1..] {
            if images[j].0.re - images[i].0.re > COLLISION {
                break;
            }
            if dist(images[i], images[j]) < COLLISION && dist(points[i], points[j]) >= DISTINCT_START {
                violations += 1;
                if example.is_none() {
                    let (a, b) = (i.min(j), i.max(j));
                    let pt = |k: usize| TorusPoint {
                        zeta: points[k].0,
                        z: points[k].1,
                        rho,
                    };
                    example = Some([pt(a), pt(b)]);
                }
            }
        }
    }
    InjectivityReport {
        points: points.len(),
        violations,
        example,
    }
}

/// The image of the fiber disk over `zeta_0` after `i + 1` steps must lie in
/// the image after `i` steps of the fiber disk over `zeta_0^d`.
fn cloud_steps<M: TorusMap + ?Sized>(
    map: &M,
    points: &[(Complex64, Complex64)],
    iterations: usize,
) -> Result<Vec<CloudStep>> {
    let rho = map.rho();
    let tracks = points
        .par_iter()
        .map(|&(zeta0, _)| -> Result<Vec<(f64, f64)>> {
            let (mut zeta, b, m) = map.fiber_map(zeta0)?;
            let (mut ca, mut ra) = (b, m.norm() * rho);
            let (mut cb, mut rb) = (Complex64::new(0.0, 0.0), rho);
            let mut out = Vec::with_capacity(iterations);
            for _ in 0..iterations {
                let excess = (ca - cb).norm() + ra - rb;
                out.push((ra, excess));
                let (next, b, m) = map.fiber_map(zeta)?;
                ca = b + m * ca;
                cb = b + m * cb;
                ra *= m.norm();
                rb *= m.norm();
                zeta = next;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = points.len().max(1) as f64;
    let mut previous = rho;
    Ok((0..iterations)
        .map(|i| {
            let radius = tracks.iter().map(|t| t[i].0).sum::<f64>() / n;
            let excess = tracks.iter().map(|t| t[i].1).fold(f64::NEG_INFINITY, f64::max);
            let step = CloudStep {
                iteration: i + 1,
                fiber_radius: radius,
                decay: if previous > 0.0 { radius / previous } else { 0.0 },
                max_excess: excess,
                contained: excess <= CLOUD_SLACK,
            };
            previous = radius;
            step
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatou::{boundary_parametrization, ImmediateBasin};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solid_torus_examples() {
        let out = f_solid_torus(2, c(0.1, 0.0), &TorusPoint::new(c(1.0, 0.0), c(0.0, 0.0), 1.2).unwrap()).unwrap();
        assert_eq!((out.zeta, out.z), (c(1.0, 0.0), c(1.0, 0.0)));
        let out = f_solid_torus(2, c(0.1, 0.0), &TorusPoint::new(c(0.0, 1.0), c(0.5, 0.0), 1.2).unwrap()).unwrap();
        assert!((out.zeta - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((out.z - c(0.0, 1.05)).norm() < 1e-15);
        let bad = TorusPoint::new(c(1.0, 0.0), c(0.0, 0.0), 1.05).unwrap();
        assert!(f_solid_torus(2, c(0.1, 0.0), &bad).is_err());
        assert!(TorusPoint::new(c(1.1, 0.0), c(0.0, 0.0), 1.2).is_err());
        assert!(TorusPoint::new(c(1.0, 0.0), c(1.3, 0.0), 1.2).is_err());
    }

    #[test]
    fn diagnostics_of_the_model_map() {
        let map = SolidTorusMap::new(2, c(0.1, 0.0), 1.2).unwrap();
        let r = torus_diagnostics(&map, 2000, 12, 1).unwrap();
        assert!(r.nesting_margin >= 0.08, "{}", r.nesting_margin);
        assert_eq!(r.winding, 2);
        assert!(r.winding_defect < 1e-9);
        assert!(r.injectivity.injective());
        assert!(r.monotone);
        for step in &r.clouds[1..] {
            assert!((step.decay - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_alpha_collapses_fibers() {
        let map = SolidTorusMap::new(3, c(0.0, 0.0), 1.5).unwrap();
        let r = torus_diagnostics(&map, 100, 3, 2).unwrap();
        assert_eq!(r.winding, 3);
        assert_eq!(r.clouds[0].fiber_radius, 0.0);
    }

    #[test]
    fn large_alpha_breaks_injectivity() {
        let map = SolidTorusMap::new(2, c(1.0, 0.0), 1.2).unwrap();
        let r = torus_diagnostics(&map, 100, 2, 3).unwrap();
        assert!(!r.injectivity.injective());
        let [a, b] = r.injectivity.example.unwrap();
        let (wa, za) = map.apply_raw(a.zeta, a.z).unwrap();
        let (wb, zb) = map.apply_raw(b.zeta, b.z).unwrap();
        assert!((wa - wb).norm() < 1e-9 && (za - zb).norm() < 1e-9);
    }

    #[test]
    fn gamma_map_of_square_matches_model() {
        let p = ComplexPolynomial::monomial(2);
        let b = ImmediateBasin::locate(&p, c(0.0, 0.0)).unwrap();
        let gamma = boundary_parametrization(&b, 1024).unwrap();
        let pt = TorusPoint::new(Complex64::from_polar(1.0, TAU * 5.0 / 1024.0), c(0.3, -0.2), 1.2).unwrap();
        let lhs = f_gamma(2, c(0.1, 0.0), &gamma, &p, &pt).unwrap();
        let rhs = f_solid_torus(2, c(0.05, 0.0), &pt).unwrap();
        assert!((lhs.zeta - rhs.zeta).norm() < 1e-12);
        assert!((lhs.z - rhs.z).norm() < 1e-12);
    }

    #[test]
    fn gamma_map_of_perturbed_square() {
        let p = ComplexPolynomial::quadratic(c(0.1, 0.0));
        let b = ImmediateBasin::locate(&p, c(0.1, 0.0)).unwrap();
        let gamma = boundary_parametrization(&b, 1024).unwrap();
        let map = GammaTorusMap::new(2, c(0.05, 0.0), gamma.clone(), p.clone(), None).unwrap();
        let out = map.apply(&TorusPoint::new(c(1.0, 0.0), c(0.0, 0.0), map.rho).unwrap()).unwrap();
        assert_eq!(out.z, gamma.eval(0.0));
        let r = torus_diagnostics(&map, 500, 6, 4).unwrap();
        assert!(r.nesting_margin > 0.0);
        assert_eq!(r.winding, 2);
        assert!(r.monotone);
    }
}
