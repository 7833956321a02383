//! Equipotentials and the pullback tower converging to `gamma_Omega`.
//!
//! `C_0` is the level curve `|phi| = s` parametrized by the angle of `phi`.
//! `C_{i+1}(theta)` is the preimage of `C_i(k theta)` inside `Omega`, tracked
//! by continuity in `theta` and anchored at `theta = 0` to the preimage
//! nearest `C_i(0)`. The curves increase towards `d Omega` and satisfy
//! `p(C_{i+1}(theta)) = C_i(k theta)` up to root-polish error, so the top
//! curve is a sampled solution of `gamma(z^k) = p(gamma(z))`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basin::ImmediateBasin;
use super::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::poly::{preimages, ComplexPolynomial};

pub const MAX_TOWER_LEVELS: usize = 40;
pub const GAMMA_TOLERANCE: f64 = 1e-3;
const GAMMA_TARGET: f64 = 1e-6;
const LEVEL_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelEvent {
    pub from: f64,
    pub to: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equipotential {
    pub curve: ClosedCurve,
    pub level: f64,
    /// Level adjustments made before sampling.
    pub events: Vec<LevelEvent>,
}

/// Geometric mean of the critical-value level and the univalence radius.
pub fn default_level(basin: &ImmediateBasin) -> Result<f64> {
    let lo = basin.critical_value_level()?;
    let hi = basin.univalence_radius()?;
    Ok(if lo > 0.0 && hi.is_finite() {
        (lo * hi).sqrt()
    } else if hi.is_finite() {
        0.5 * hi
    } else {
        1.0
    })
}

/// The level curve `|phi| = s` sampled at `m` angles, after raising `s`
/// until every critical value in `Omega` lies strictly inside.
pub fn equipotential(basin: &ImmediateBasin, level: f64, m: usize) -> Result<Equipotential> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(Error::Precondition(format!("level {level} must be positive")));
    }
    let lo = basin.critical_value_level()?;
    let hi = basin.univalence_radius()?;
    let lambda = basin.multiplier.norm();
    let factor = if lambda > 0.0 {
        1.5f64.min(lambda.powf(-0.5))
    } else {
        1.5
    };
    let mut s = level;
    let mut events = Vec::new();
    while s <= lo * (1.0 + LEVEL_MARGIN) {
        let to = s * factor;
        events.push(LevelEvent {
            from: s,
            to,
            reason: format!("critical value level {lo} not strictly inside"),
        });
        s = to;
    }
    if s >= hi * (1.0 - LEVEL_MARGIN) {
        return Err(Error::Coordinate(format!(
            "level {s} reaches the univalence radius {hi}"
        )));
    }
    let p = &basin.polynomial;
    let samples = (0..m)
        .into_par_iter()
        .map(|j| {
            let zeta = Complex64::from_polar(s, TAU * j as f64 / m as f64);
            basin.coordinate.invert(p, zeta)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Equipotential {
        curve: ClosedCurve::new(samples)?,
        level: s,
        events,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PullbackTower {
    pub degree: usize,
    pub level: f64,
    pub curves: Vec<ClosedCurve>,
    /// `max_j |p(C_i(theta_j)) - C_{i-1}(k theta_j)|`, zero at level 0.
    pub lift_residuals: Vec<f64>,
}

impl PullbackTower {
    pub fn new(degree: usize, base: &Equipotential) -> Self {
        Self {
            degree,
            level: base.level,
            curves: vec![base.curve.clone()],
            lift_residuals: vec![0.0],
        }
    }

    pub fn depth(&self) -> usize {
        self.curves.len() - 1
    }

    pub fn resolution(&self) -> usize {
        self.curves[0].resolution()
    }

    pub fn top(&self) -> &ClosedCurve {
        self.curves.last().expect("tower has a base curve")
    }

    /// Adds `C_{L+1}` by lifting the top curve.
    pub fn push_level(&mut self, p: &ComplexPolynomial) -> Result<()> {
        let level = self.curves.len();
        let below = self.top().clone();
        let m = below.resolution();
        let k = self.degree;
        let mut lifted: Vec<Complex64> = Vec::with_capacity(m);
        for j in 0..=m {
            let target = below.at_index(k * j % m);
            let guess = match j {
                0 => below.at_index(0),
                1 => lifted[0],
                _ => lifted[j - 1] * 2.0 - lifted[j - 2],
            };
            let w = nearest_root(p, target, guess).map_err(|_| Error::LiftAmbiguity {
                level,
                parameter: j as f64 / m as f64,
            })?;
            if j == m {
                if (w - lifted[0]).norm() > 1e-9 * w.norm().max(1.0) {
                    return Err(Error::LiftAmbiguity {
                        level,
                        parameter: 0.0,
                    });
                }
            } else {
                lifted.push(w);
            }
        }
        let curve = ClosedCurve::new(lifted)?;
        let residual = (0..m)
            .map(|j| (p.eval(curve.at_index(j)) - below.at_index(k * j % m)).norm())
            .fold(0.0, f64::max);
        self.curves.push(curve);
        self.lift_residuals.push(residual);
        Ok(())
    }

    /// `max_j |p(C_L(theta_j)) - C_L(k theta_j)|` for the top curve.
    pub fn functional_residual(&self, p: &ComplexPolynomial) -> f64 {
        functional_residual(p, self.top(), self.degree)
    }
}

/// Root of `p(w) = target` nearest `guess`; fails on a near tie.
fn nearest_root(p: &ComplexPolynomial, target: Complex64, guess: Complex64) -> Result<Complex64> {
    let mut roots = preimages(p, target)?;
    roots.sort_by(|a, b| (a - guess).norm().total_cmp(&(b - guess).norm()));
    let best = roots[0];
    let d1 = (best - guess).norm();
    if let Some(second) = roots.iter().find(|r| (**r - best).norm() > 1e-12) {
        if (second - guess).norm() < 1.5 * d1 {
            return Err(Error::LiftAmbiguity {
                level: 0,
                parameter: 0.0,
            });
        }
    }
    Ok(best)
}

pub fn functional_residual(p: &ComplexPolynomial, curve: &ClosedCurve, k: usize) -> f64 {
    let m = curve.resolution();
    (0..m)
        .map(|j| (p.eval(curve.at_index(j)) - curve.at_index(k * j % m)).norm())
        .fold(0.0, f64::max)
}

/// Sampled `gamma_Omega` with its functional-equation residual.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryParametrization {
    pub curve: ClosedCurve,
    pub degree: usize,
    pub residual: f64,
    /// Tower levels used (zero for the exact monomial case).
    pub levels: usize,
}

impl BoundaryParametrization {
    pub fn eval(&self, theta: f64) -> Complex64 {
        self.curve.interpolate(theta)
    }

    /// Distance to the sampled boundary.
    pub fn distance(&self, w: Complex64) -> f64 {
        self.curve.distance(w).0
    }
}

pub fn boundary_parametrization(basin: &ImmediateBasin, m: usize) -> Result<BoundaryParametrization> {
    boundary_parametrization_to(basin, m, GAMMA_TARGET)
}

/// Grows the tower until the residual is at most `target` or the level cap
/// is reached; fails if the residual then still exceeds `GAMMA_TOLERANCE`.
pub fn boundary_parametrization_to(
    basin: &ImmediateBasin,
    m: usize,
    target: f64,
) -> Result<BoundaryParametrization> {
    let p = &basin.polynomial;
    let k = basin.degree;
    if p.is_monomial() && basin.fixed_point == Complex64::new(0.0, 0.0) {
        let curve = ClosedCurve::circle(Complex64::new(0.0, 0.0), 1.0, m)?;
        let residual = functional_residual(p, &curve, k);
        return Ok(BoundaryParametrization {
            curve,
            degree: k,
            residual,
            levels: 0,
        });
    }
    let base = equipotential(basin, default_level(basin)?, m)?;
    let mut tower = PullbackTower::new(k, &base);
    let mut residual = tower.functional_residual(p);
    while residual > target && tower.depth() < MAX_TOWER_LEVELS {
        tower.push_level(p)?;
        residual = tower.functional_residual(p);
    }
    if residual > GAMMA_TOLERANCE {
        return Err(Error::TowerDivergence {
            levels: tower.depth(),
            residual,
        });
    }
    Ok(BoundaryParametrization {
        curve: tower.top().clone(),
        degree: k,
        residual,
        levels: tower.depth(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basin_z2_plus_tenth() -> ImmediateBasin {
        ImmediateBasin::locate(&ComplexPolynomial::quadratic(c(0.1, 0.0)), c(0.1, 0.0)).unwrap()
    }

    #[test]
    fn square_map_equipotential_is_a_circle() {
        let b = ImmediateBasin::locate(&ComplexPolynomial::monomial(2), c(0.0, 0.0)).unwrap();
        let e = equipotential(&b, 0.5, 64).unwrap();
        assert!(e.events.is_empty());
        for z in e.curve.samples() {
            assert!((z.norm() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn equipotential_encloses_critical_value() {
        let b = basin_z2_plus_tenth();
        let e = equipotential(&b, default_level(&b).unwrap(), 512).unwrap();
        assert!(e.events.is_empty());
        assert!(e.curve.encloses(c(0.1, 0.0)));
        assert_eq!(e.curve.winding_number(b.fixed_point), 1);
        assert!(!e.curve.encloses(c(0.0, 0.0)));
    }

    #[test]
    fn tiny_level_is_raised_and_logged() {
        let b = basin_z2_plus_tenth();
        let e = equipotential(&b, 1e-6, 256).unwrap();
        assert!(!e.events.is_empty());
        assert!(e.level > b.critical_value_level().unwrap());
        assert!(e.curve.encloses(c(0.1, 0.0)));
    }

    #[test]
    fn equipotential_is_koenigs_compatible() {
        // |phi(p(w))| = |lambda| s on the level-s curve.
        let b = basin_z2_plus_tenth();
        let e = equipotential(&b, default_level(&b).unwrap(), 128).unwrap();
        let p = &b.polynomial;
        let target = b.multiplier.norm() * e.level;
        for &w in e.curve.samples() {
            let v = b.coordinate.eval(p, p.eval(w)).unwrap().norm();
            assert!((v - target).abs() <= 1e-6 * target);
        }
    }

    #[test]
    fn level_at_critical_point_is_rejected() {
        let b = basin_z2_plus_tenth();
        let r = b.univalence_radius().unwrap();
        assert!(equipotential(&b, r, 64).is_err());
    }

    #[test]
    fn gamma_for_square_is_unit_circle() {
        let b = ImmediateBasin::locate(&ComplexPolynomial::monomial(2), c(0.0, 0.0)).unwrap();
        let g = boundary_parametrization(&b, 1024).unwrap();
        assert!(g.residual < 1e-13);
        assert!((g.eval(0.25) - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn gamma_for_z2_plus_tenth() {
        let b = basin_z2_plus_tenth();
        let g = boundary_parametrization(&b, 4096).unwrap();
        assert!(g.residual <= GAMMA_TOLERANCE);
        let p = &b.polynomial;
        // Direct substitution at every sample.
        for j in 0..4096 {
            let lhs = p.eval(g.curve.at_index(j));
            let rhs = g.curve.at_index(2 * j);
            assert!((lhs - rhs).norm() <= GAMMA_TOLERANCE);
        }
        // gamma(0) is the repelling fixed point (1 + sqrt 0.6) / 2.
        let beta = (1.0 + 0.6f64.sqrt()) / 2.0;
        assert!((g.eval(0.0) - c(beta, 0.0)).norm() < 1e-5);
        // Boundary points do not escape and are not captured quickly.
        for j in (0..4096).step_by(97) {
            let z = g.curve.at_index(j);
            assert!(p.iterate(z, 8).norm() < 2.0);
            assert!((p.iterate(z, 8) - b.fixed_point).norm() > 1e-2);
        }
    }

    #[test]
    fn half_turn_is_not_a_second_solution() {
        // For k = 2 there is a single rotation class.
        let b = basin_z2_plus_tenth();
        let g = boundary_parametrization(&b, 1024).unwrap();
        let m = 1024;
        let rotated = ClosedCurve::new(
            (0..m).map(|j| g.curve.at_index(j + m / 2)).collect(),
        )
        .unwrap();
        assert!(functional_residual(&b.polynomial, &rotated, 2) > 0.1);
    }

    #[test]
    fn tower_levels_satisfy_lift_relation() {
        let b = basin_z2_plus_tenth();
        let e = equipotential(&b, default_level(&b).unwrap(), 512).unwrap();
        let mut t = PullbackTower::new(2, &e);
        for _ in 0..6 {
            t.push_level(&b.polynomial).unwrap();
        }
        for (i, r) in t.lift_residuals.iter().enumerate() {
            assert!(*r <= 1e-9, "level {i}: {r}");
        }
        // Curves move outward: each encloses the previous.
        for i in 1..t.curves.len() {
            for &z in t.curves[i - 1].samples().iter().step_by(16) {
                assert!(t.curves[i].encloses(z));
            }
        }
    }
}
