//! Accessible boundary points: radial bisection for the Hénon basin and the
//! Cantor-set model where the accessible boundary is countable.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_with, henon, henon_fixed_points, FixedPointClass, HenonParams, HenonVerdict, Point2};
use crate::error::{Error, Result};
use crate::fatou::{boundary_parametrization, BoundaryParametrization, ImmediateBasin};
use crate::poly::ComplexPolynomial;

const ONE_D_CONVERGENCE: f64 = 1e-9;
const MAX_CANTOR_DEPTH: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccessibleOptions {
    pub directions: usize,
    /// Bisection steps after the first exit is bracketed.
    pub refine: usize,
    /// Orbit budget for basin membership.
    pub budget: usize,
    /// Ray scan step.
    pub step: f64,
    /// Rays are abandoned beyond this parameter.
    pub search_radius: f64,
    pub certificate_budget: usize,
    /// Trailing iterates whose `x` must lie near `d Omega`.
    pub tail: usize,
    pub tolerance: f64,
    pub avoid_radius: f64,
    pub gamma_resolution: usize,
}

impl Default for AccessibleOptions {
    fn default() -> Self {
        Self {
            directions: 64,
            refine: 60,
            budget: 2000,
            step: 1e-2,
            search_radius: 4.0,
            certificate_budget: 25,
            tail: 10,
            tolerance: 5e-2,
            avoid_radius: 1e-3,
            gamma_resolution: 2048,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCertificate {
    pub bounded: bool,
    pub avoids_attractor: bool,
    /// Closest approach of the orbit to `z(a)`.
    pub attractor_distance: f64,
    /// Largest distance from a tail `x` to the sampled `d Omega`.
    pub tail_distance: f64,
    pub near_boundary: bool,
}

impl BoundaryCertificate {
    pub fn certified(&self) -> bool {
        self.bounded && self.avoids_attractor && self.near_boundary
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub direction: usize,
    /// Ray angle in turns.
    pub angle: f64,
    /// Last ray parameter found in the basin.
    pub t: f64,
    pub point: Point2,
    pub certificate: BoundaryCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub fixed_point: Point2,
    pub points: Vec<BoundaryPoint>,
    /// Directions whose ray never left the basin.
    pub flagged: Vec<usize>,
}

impl BoundarySample {
    pub fn certified(&self) -> usize {
        self.points.iter().filter(|p| p.certificate.certified()).count()
    }

    pub fn to_jsonl(&self) -> String {
        self.points
            .iter()
            .map(|p| serde_json::to_string(p).expect("boundary point serializes") + "\n")
            .collect()
    }
}

/// Bisection along the rays `(x* + t e^{2 pi i j / D}, y*)` from the
/// attracting fixed point `z(a) = (x*, y*)`.
pub fn accessible_boundary_sample(params: &HenonParams, opts: &AccessibleOptions) -> Result<BoundarySample> {
    let attractors: Vec<_> = henon_fixed_points(params)?
        .into_iter()
        .filter(|f| f.class == FixedPointClass::Attracting)
        .collect();
    let target = attractors
        .first()
        .ok_or_else(|| Error::Precondition("no attracting fixed point".into()))?
        .clone();
    let escape = params.escape_floor().max(opts.search_radius + target.point.0.norm() + 1.0);
    let basin = ImmediateBasin::locate(&params.p, target.point.0)?;
    let gamma = boundary_parametrization(&basin, opts.gamma_resolution)?;
    let (x0, y0) = target.point;
    let inside = |t: f64, v: Complex64| {
        matches!(
            classify_with(params, &attractors, (x0 + v * t, y0), escape, opts.budget),
            HenonVerdict::Converged { fixed_point, .. } if fixed_point == target.id
        )
    };
    let found: Vec<(usize, Option<f64>)> = (0..opts.directions)
        .into_par_iter()
        .map(|j| {
            let v = direction(j, opts.directions);
            (j, ray_exit(|t| inside(t, v), opts))
        })
        .collect();
    let mut points = Vec::new();
    let mut flagged = Vec::new();
    for (j, t) in found {
        let Some(t) = t else {
            flagged.push(j);
            continue;
        };
        let point = (x0 + direction(j, opts.directions) * t, y0);
        let certificate = certify(params, point, target.point, &gamma, escape, opts);
        points.push(BoundaryPoint {
            direction: j,
            angle: j as f64 / opts.directions as f64,
            t,
            point,
            certificate,
        });
    }
    Ok(BoundarySample {
        fixed_point: target.point,
        points,
        flagged,
    })
}

fn direction(j: usize, count: usize) -> Complex64 {
    Complex64::from_polar(1.0, TAU * j as f64 / count as f64)
}

/// Scans `t = step, 2 step, ...` for the first parameter outside, then bisects.
fn ray_exit(inside: impl Fn(f64) -> bool, opts: &AccessibleOptions) -> Option<f64> {
    let mut t_in = 0.0;
    let mut k = 1;
    let t_out = loop {
        let t = k as f64 * opts.step;
        if t > opts.search_radius {
            return None;
        }
        if !inside(t) {
            break t;
        }
        t_in = t;
        k += 1;
    };
    let (mut lo, mut hi) = (t_in, t_out);
    for _ in 0..opts.refine {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

fn certify(
    params: &HenonParams,
    start: Point2,
    attractor: Point2,
    gamma: &BoundaryParametrization,
    escape: f64,
    opts: &AccessibleOptions,
) -> BoundaryCertificate {
    let mut z = start;
    let mut bounded = true;
    let mut closest = f64::INFINITY;
    let mut tail: f64 = 0.0;
    let tail_from = opts.certificate_budget.saturating_sub(opts.tail);
    for n in 0..=opts.certificate_budget {
        if !(z.0.norm().max(z.1.norm()) <= escape) {
            bounded = false;
            break;
        }
        closest = closest.min((z.0 - attractor.0).norm().max((z.1 - attractor.1).norm()));
        if n >= tail_from {
            tail = tail.max(gamma.distance(z.0));
        }
        z = henon(params, z);
    }
    if !bounded {
        tail = f64::INFINITY;
    }
    BoundaryCertificate {
        bounded,
        avoids_attractor: closest >= opts.avoid_radius,
        attractor_distance: closest,
        tail_distance: tail,
        near_boundary: tail <= opts.tolerance,
    }
}

/// The same scan and bisection for `p` alone from its attracting fixed point `x*`.
pub fn boundary_ray_1d(p: &ComplexPolynomial, x0: Complex64, angle: f64, opts: &AccessibleOptions) -> Option<f64> {
    let escape = (2.0 * p.escape_radius()).max(opts.search_radius + x0.norm() + 1.0);
    let v = Complex64::from_polar(1.0, TAU * angle);
    let inside = |t: f64| {
        let mut w = x0 + v * t;
        for _ in 0..opts.budget {
            w = p.eval(w);
            if !(w.norm() <= escape) {
                return false;
            }
            if (w - x0).norm() < ONE_D_CONVERGENCE {
                return true;
            }
        }
        false
    };
    ray_exit(inside, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointSide {
    Left,
    Right,
}

/// An endpoint of a removed middle-third interval `(l, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CantorEndpoint {
    pub value: Rational64,
    pub removed: (Rational64, Rational64),
    pub side: EndpointSide,
    pub stage: u32,
}

impl CantorEndpoint {
    /// A point of the removed interval; the segment from it to `value`
    /// (endpoint excluded) lies in the complement.
    pub fn path_point(&self) -> Rational64 {
        (self.removed.0 + self.removed.1) / 2
    }
}

/// Endpoints of the intervals removed in the first `k` stages, in order.
pub fn cantor_accessible(k: u32) -> Result<Vec<CantorEndpoint>> {
    if k < 1 || k > MAX_CANTOR_DEPTH {
        return Err(Error::Precondition(format!("depth {k} not in 1..={MAX_CANTOR_DEPTH}")));
    }
    let mut intervals = vec![(Rational64::from_integer(0), Rational64::from_integer(1))];
    let mut out = Vec::with_capacity((1usize << (k + 1)) - 2);
    for stage in 1..=k {
        let mut next = Vec::with_capacity(intervals.len() * 2);
        for (a, b) in intervals {
            let third = (b - a) / 3;
            let (l, r) = (a + third, b - third);
            out.push(CantorEndpoint {
                value: l,
                removed: (l, r),
                side: EndpointSide::Left,
                stage,
            });
            out.push(CantorEndpoint {
                value: r,
                removed: (l, r),
                side: EndpointSide::Right,
                stage,
            });
            next.push((a, l));
            next.push((r, b));
        }
        intervals = next;
    }
    out.sort_by(|x, y| x.value.cmp(&y.value));
    Ok(out)
}
