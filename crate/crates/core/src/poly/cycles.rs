use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexPolynomial;
use crate::error::Result;

pub const DEFAULT_CYCLE_BUDGET: usize = 10_000;
const DETECT_TOL: f64 = 1e-7;
const RESIDUAL_TOL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-6;

/// A periodic orbit together with its multiplier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub points: Vec<Complex64>,
    pub multiplier: Complex64,
}

impl Cycle {
    pub fn period(&self) -> usize {
        self.points.len()
    }

    pub fn is_attracting(&self) -> bool {
        self.multiplier.norm() < 1.0
    }

    /// Largest `|p(z_j) - z_{j+1}|` around the cycle.
    pub fn residual(&self, p: &ComplexPolynomial) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|j| (p.eval(self.points[j]) - self.points[(j + 1) % n]).norm())
            .fold(0.0, f64::max)
    }

    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.points
            .iter()
            .map(|w| (w - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn matches(&self, other: &Cycle) -> bool {
        self.period() == other.period()
            && other.points.iter().any(|w| (w - self.points[0]).norm() <= DEDUP_TOL)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleSearch {
    pub cycles: Vec<Cycle>,
    /// Some seed neither escaped nor settled within the iteration budget.
    pub incomplete: bool,
}

pub fn find_attracting_cycles(
    p: &ComplexPolynomial,
    max_period: usize,
    seed_count: usize,
) -> Result<CycleSearch> {
    find_attracting_cycles_with_budget(p, max_period, seed_count, DEFAULT_CYCLE_BUDGET)
}

/// Attracting cycles of period at most `max_period` reached from the
/// critical points plus `seed_count` extra seeds spread on a circle.
pub fn find_attracting_cycles_with_budget(
    p: &ComplexPolynomial,
    max_period: usize,
    seed_count: usize,
    budget: usize,
) -> Result<CycleSearch> {
    p.require_dynamical()?;
    let max_period = max_period.max(1);
    let radius = p.escape_radius();
    let mut seeds = p.critical_points()?;
    for k in 0..seed_count {
        let angle = std::f64::consts::TAU * (k as f64 + 0.5) / seed_count as f64;
        seeds.push(Complex64::from_polar(0.5 * radius, angle));
    }

    let mut cycles: Vec<Cycle> = Vec::new();
    let mut incomplete = false;
    for seed in seeds {
        match settle(p, seed, max_period, budget, radius) {
            Settle::Cycle(cycle) => {
                if cycle.is_attracting() && !cycles.iter().any(|c| c.matches(&cycle)) {
                    cycles.push(cycle);
                }
            }
            Settle::Escaped => {}
            Settle::Undecided => incomplete = true,
        }
    }
    Ok(CycleSearch { cycles, incomplete })
}

enum Settle {
    Cycle(Cycle),
    Escaped,
    Undecided,
}

fn settle(
    p: &ComplexPolynomial,
    seed: Complex64,
    max_period: usize,
    budget: usize,
    radius: f64,
) -> Settle {
    let mut ring = vec![seed; max_period + 1];
    let mut z = seed;
    for n in 1..=budget {
        z = p.eval(z);
        if z.norm() > radius || !z.re.is_finite() {
            return Settle::Escaped;
        }
        ring[n % (max_period + 1)] = z;
        let scale = z.norm().max(1.0);
        for q in 1..=max_period.min(n) {
            let back = ring[(n - q) % (max_period + 1)];
            if (z - back).norm() < DETECT_TOL * scale {
                if let Some(cycle) = refine(p, z, q) {
                    return Settle::Cycle(cycle);
                }
            }
        }
    }
    Settle::Undecided
}

/// Newton on `p^q(w) - w`, then builds the canonical cycle.
fn refine(p: &ComplexPolynomial, start: Complex64, q: usize) -> Option<Cycle> {
    let mut w = start;
    for _ in 0..60 {
        let (value, deriv) = orbit_derivative(p, w, q);
        let f = value - w;
        let df = deriv - Complex64::new(1.0, 0.0);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        w -= step;
        if step.norm() <= 1e-16 * w.norm().max(1.0) {
            break;
        }
    }
    let mut points = Vec::with_capacity(q);
    let mut z = w;
    for _ in 0..q {
        points.push(z);
        z = p.eval(z);
    }
    // Minimal period: reject if a proper divisor already closes the orbit.
    for d in 1..q {
        if q % d == 0 && (points[d % q] - points[0]).norm() <= RESIDUAL_TOL {
            return None;
        }
    }
    let dp = p.derivative();
    let multiplier = points
        .iter()
        .map(|&z| dp.eval(z))
        .product::<Complex64>();
    let start = (0..q)
        .min_by(|&a, &b| {
            points[a]
                .re
                .total_cmp(&points[b].re)
                .then(points[a].im.total_cmp(&points[b].im))
        })
        .unwrap_or(0);
    points.rotate_left(start);
    let cycle = Cycle { points, multiplier };
    if cycle.residual(p) <= RESIDUAL_TOL * cycle.points[0].norm().max(1.0) {
        Some(cycle)
    } else {
        None
    }
}

fn orbit_derivative(p: &ComplexPolynomial, mut z: Complex64, q: usize) -> (Complex64, Complex64) {
    let mut deriv = Complex64::new(1.0, 0.0);
    for _ in 0..q {
        let (v, dv) = p.eval_with_derivative(z);
        deriv *= dv;
        z = v;
    }
    (z, deriv)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CriticalVerdict {
    Attracted { cycle: usize, steps: usize },
    /// Escape to infinity: a failure of the hyperbolicity proxy.
    Escaped { step: usize },
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityReport {
    pub hyperbolic: bool,
    pub critical_points: Vec<Complex64>,
    pub verdicts: Vec<CriticalVerdict>,
    pub cycles: Vec<Cycle>,
}

/// Desk proxy for hyperbolicity: every critical orbit enters the
/// `1e-6`-neighbourhood of an attracting cycle within `budget` steps.
pub fn is_desk_hyperbolic(p: &ComplexPolynomial, budget: usize) -> Result<HyperbolicityReport> {
    let search = find_attracting_cycles_with_budget(p, 32, 0, budget.max(1))?;
    let crit = p.critical_points()?;
    let radius = p.escape_radius();
    let verdicts: Vec<CriticalVerdict> = crit
        .iter()
        .map(|&c| {
            let mut z = c;
            for n in 0..=budget {
                if let Some(idx) = search
                    .cycles
                    .iter()
                    .position(|cy| cy.distance_to(z) <= DEDUP_TOL)
                {
                    return CriticalVerdict::Attracted { cycle: idx, steps: n };
                }
                if z.norm() > radius {
                    return CriticalVerdict::Escaped { step: n };
                }
                z = p.eval(z);
            }
            CriticalVerdict::Undecided
        })
        .collect();
    let hyperbolic = verdicts
        .iter()
        .all(|v| matches!(v, CriticalVerdict::Attracted { .. }));
    Ok(HyperbolicityReport {
        hyperbolic,
        critical_points: crit,
        verdicts,
        cycles: search.cycles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn superattracting_fixed_point_of_square() {
        let p = ComplexPolynomial::monomial(2);
        let s = find_attracting_cycles(&p, 4, 0).unwrap();
        assert_eq!(s.cycles.len(), 1);
        assert_eq!(s.cycles[0].points, vec![c(0.0, 0.0)]);
        assert_eq!(s.cycles[0].multiplier, c(0.0, 0.0));
        assert!(!s.incomplete);
    }

    #[test]
    fn basilica_two_cycle() {
        let p = ComplexPolynomial::quadratic(c(-1.0, 0.0));
        let s = find_attracting_cycles(&p, 4, 0).unwrap();
        assert_eq!(s.cycles.len(), 1);
        let cy = &s.cycles[0];
        assert_eq!(cy.period(), 2);
        assert!((cy.points[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((cy.points[1] - c(0.0, 0.0)).norm() < 1e-12);
        assert!(cy.multiplier.norm() < 1e-12);
    }

    #[test]
    fn fixed_point_of_z2_plus_tenth() {
        // Oracle: quadratic formula (1 - sqrt(0.6)) / 2, multiplier 2 z.
        let fixed = (1.0 - 0.6f64.sqrt()) / 2.0;
        let p = ComplexPolynomial::quadratic(c(0.1, 0.0));
        let s = find_attracting_cycles(&p, 4, 8).unwrap();
        assert_eq!(s.cycles.len(), 1);
        assert!((s.cycles[0].points[0] - c(fixed, 0.0)).norm() < 1e-12);
        assert!((s.cycles[0].multiplier - c(2.0 * fixed, 0.0)).norm() < 1e-12);
        assert!((s.cycles[0].multiplier.re - 0.225403).abs() < 1e-6);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        // Multiplier 0.999: convergence is far slower than a 50-step budget.
        let lambda = 0.999;
        let p = ComplexPolynomial::new(vec![c(0.0, 0.0), c(lambda, 0.0), c(1.0, 0.0)]).unwrap();
        let s = find_attracting_cycles_with_budget(&p, 2, 0, 50).unwrap();
        assert!(s.incomplete);
    }

    #[test]
    fn hyperbolicity_examples() {
        let r = is_desk_hyperbolic(&ComplexPolynomial::monomial(2), 100).unwrap();
        assert!(r.hyperbolic);
        let r = is_desk_hyperbolic(&ComplexPolynomial::quadratic(c(0.1, 0.0)), 100).unwrap();
        assert!(r.hyperbolic);
        let r = is_desk_hyperbolic(&ComplexPolynomial::quadratic(c(1.0, 0.0)), 100).unwrap();
        assert!(!r.hyperbolic);
        assert!(matches!(r.verdicts[0], CriticalVerdict::Escaped { .. }));
    }

    #[test]
    fn returned_cycles_satisfy_invariants() {
        for text in ["-1,0,1", "0.1,0,1", "-0.12+0.75i,0,1", "0,-0.5,0,1"] {
            let p: ComplexPolynomial = text.parse().unwrap();
            let s = find_attracting_cycles(&p, 8, 16).unwrap();
            for cy in &s.cycles {
                assert!(cy.residual(&p) <= 1e-9, "{text}");
                assert!(cy.is_attracting());
            }
        }
    }
}
