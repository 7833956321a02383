//! Linearizing coordinates at an attracting fixed point.
//!
//! `Koenigs` solves `phi(p(z)) = lambda phi(z)` for `0 < |lambda| < 1`;
//! `Bottcher` solves `phi(p(z)) = phi(z)^k` at a superattracting point.
//! Both are normalized so that `phi(z) ~ (z - z0)` up to a constant.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::ComplexPolynomial;

const SERIES_ORDER: usize = 14;
const MAX_STEPS: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub enum LocalCoordinate {
    Koenigs {
        z0: Complex64,
        lambda: Complex64,
        /// `phi(z0 + u) = sum b_m u^m` near `z0`, `b_0 = 0`, `b_1 = 1`.
        series: Vec<Complex64>,
        radius: f64,
    },
    Bottcher {
        z0: Complex64,
        degree: usize,
        /// Normalizing factor `c_k^{1/(k-1)}`.
        scale: Complex64,
        /// `eps(v) = sum e_j v^j`, with `Q(v) = v^k (1 + eps(v))`.
        eps: Vec<Complex64>,
        monomial: bool,
    },
}

impl LocalCoordinate {
    /// Builds the coordinate at the attracting fixed point `z0` of `p`.
    pub fn at_fixed_point(p: &ComplexPolynomial, z0: Complex64) -> Result<Self> {
        p.require_dynamical()?;
        let taylor = p.taylor_at(z0);
        let lambda = taylor[1];
        if (taylor[0] - z0).norm() > 1e-9 * z0.norm().max(1.0) {
            return Err(Error::Coordinate(format!("{z0} is not a fixed point")));
        }
        if lambda.norm() >= 1.0 {
            return Err(Error::Coordinate(format!("multiplier {lambda} is not attracting")));
        }
        if lambda != Complex64::new(0.0, 0.0) {
            return Ok(Self::koenigs(p, z0, lambda, &taylor));
        }
        let k = (2..taylor.len())
            .find(|&j| taylor[j] != Complex64::new(0.0, 0.0))
            .expect("degree >= 2 has a nonzero coefficient");
        let ck = taylor[k];
        let scale = if ck == Complex64::new(1.0, 0.0) {
            ck
        } else {
            ck.powf(1.0 / (k as f64 - 1.0))
        };
        let eps: Vec<Complex64> = (0..taylor.len() - k)
            .map(|j| {
                if j == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    taylor[k + j] / ck / scale.powi(j as i32)
                }
            })
            .collect();
        let monomial = z0 == Complex64::new(0.0, 0.0) && p.is_monomial();
        Ok(Self::Bottcher {
            z0,
            degree: k,
            scale,
            eps,
            monomial,
        })
    }

    fn koenigs(p: &ComplexPolynomial, z0: Complex64, lambda: Complex64, taylor: &[Complex64]) -> Self {
        let mut q = taylor.to_vec();
        q[0] = Complex64::new(0.0, 0.0);
        q.truncate(SERIES_ORDER + 1);
        // powers[j] = q^j truncated.
        let mut powers: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); SERIES_ORDER + 1]];
        powers[0][0] = Complex64::new(1.0, 0.0);
        for j in 1..=SERIES_ORDER {
            let prev = &powers[j - 1];
            let mut next = vec![Complex64::new(0.0, 0.0); SERIES_ORDER + 1];
            for (a, &pa) in prev.iter().enumerate() {
                if pa == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (b, &qb) in q.iter().enumerate() {
                    if a + b <= SERIES_ORDER {
                        next[a + b] += pa * qb;
                    }
                }
            }
            powers.push(next);
        }
        let mut b = vec![Complex64::new(0.0, 0.0); SERIES_ORDER + 1];
        b[1] = Complex64::new(1.0, 0.0);
        for m in 2..=SERIES_ORDER {
            let rhs: Complex64 = (1..m).map(|j| b[j] * powers[j][m]).sum();
            b[m] = rhs / (lambda - lambda.powi(m as i32));
        }
        let crit_gap = p
            .critical_points()
            .unwrap_or_default()
            .iter()
            .map(|c| (c - z0).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = 1e-3f64.min(0.1 * crit_gap);
        Self::Koenigs {
            z0,
            lambda,
            series: b,
            radius,
        }
    }

    pub fn fixed_point(&self) -> Complex64 {
        match self {
            Self::Koenigs { z0, .. } | Self::Bottcher { z0, .. } => *z0,
        }
    }

    pub fn is_bottcher(&self) -> bool {
        matches!(self, Self::Bottcher { .. })
    }

    /// `lambda` for Koenigs, `0` for Böttcher.
    pub fn multiplier(&self) -> Complex64 {
        match self {
            Self::Koenigs { lambda, .. } => *lambda,
            Self::Bottcher { .. } => Complex64::new(0.0, 0.0),
        }
    }

    /// The model map `F` with `phi(p(z)) = F(phi(z))`.
    pub fn model(&self, zeta: Complex64) -> Complex64 {
        match self {
            Self::Koenigs { lambda, .. } => lambda * zeta,
            Self::Bottcher { degree, .. } => zeta.powi(*degree as i32),
        }
    }

    /// `|phi|` on the boundary of the basin (infinite for Koenigs).
    pub fn boundary_level(&self) -> f64 {
        match self {
            Self::Koenigs { .. } => f64::INFINITY,
            Self::Bottcher { .. } => 1.0,
        }
    }

    pub fn eval(&self, p: &ComplexPolynomial, z: Complex64) -> Result<Complex64> {
        match self {
            Self::Koenigs {
                z0,
                lambda,
                series,
                radius,
            } => {
                let mut u = z - z0;
                let mut scale = Complex64::new(1.0, 0.0);
                for _ in 0..MAX_STEPS {
                    if u.norm() <= *radius {
                        return Ok(horner(series, u) * scale);
                    }
                    u = p.eval(u + z0) - z0;
                    scale /= lambda;
                    if !u.norm().is_finite() || u.norm() > 1e12 {
                        break;
                    }
                }
                Err(Error::Coordinate(format!("{z} does not converge to {z0}")))
            }
            Self::Bottcher {
                z0,
                degree,
                scale,
                eps,
                monomial,
            } => {
                if *monomial {
                    return Ok(z);
                }
                let mut v = (z - z0) * scale;
                let v0 = v;
                let mut acc = Complex64::new(1.0, 0.0);
                let mut power = 1.0 / *degree as f64;
                for _ in 0..200 {
                    let e = horner(eps, v);
                    if e.norm() >= 0.5 {
                        return Err(Error::Coordinate(format!(
                            "{z} is outside the Böttcher chart at {z0}"
                        )));
                    }
                    if e.norm() < 1e-18 {
                        break;
                    }
                    acc *= (Complex64::new(1.0, 0.0) + e).powf(power);
                    v = v.powi(*degree as i32) * (Complex64::new(1.0, 0.0) + e);
                    power /= *degree as f64;
                }
                Ok(v0 * acc)
            }
        }
    }

    /// `phi` and `phi'` at `z`.
    pub fn eval_with_derivative(&self, p: &ComplexPolynomial, z: Complex64) -> Result<(Complex64, Complex64)> {
        match self {
            Self::Koenigs {
                z0,
                lambda,
                series,
                radius,
            } => {
                let mut u = z - z0;
                let mut scale = Complex64::new(1.0, 0.0);
                let mut chain = Complex64::new(1.0, 0.0);
                for _ in 0..MAX_STEPS {
                    if u.norm() <= *radius {
                        let (v, dv) = horner_with_derivative(series, u);
                        return Ok((v * scale, dv * chain));
                    }
                    let (next, d) = p.eval_with_derivative(u + z0);
                    u = next - z0;
                    scale /= lambda;
                    chain *= d / lambda;
                    if !u.norm().is_finite() || u.norm() > 1e12 {
                        break;
                    }
                }
                Err(Error::Coordinate(format!("{z} does not converge to {z0}")))
            }
            Self::Bottcher { .. } => {
                let v = self.eval(p, z)?;
                let h = 1e-7 * (z - self.fixed_point()).norm().max(1e-12);
                let dv = (self.eval(p, z + h)? - self.eval(p, z - h)?) / (2.0 * h);
                Ok((v, dv))
            }
        }
    }

    /// `phi^{-1}(zeta)` on the branch through `z0`, by Newton continuation
    /// along the ray `t zeta`.
    ///
    /// Valid while `|zeta|` is below the univalence radius.
    pub fn invert(&self, p: &ComplexPolynomial, zeta: Complex64) -> Result<Complex64> {
        if let Self::Bottcher { monomial: true, .. } = self {
            return Ok(zeta);
        }
        let small = match self {
            Self::Koenigs { radius, .. } => 0.25 * radius,
            Self::Bottcher { .. } => 1e-3,
        };
        if zeta.norm() <= small {
            return self.invert_small(p, zeta);
        }
        let mut t = small / zeta.norm();
        let mut w = self.invert_small(p, zeta * t)?;
        while t < 1.0 {
            let t_next = (t * 1.25).min(1.0);
            let target = zeta * t_next;
            let (_, dv) = self.eval_with_derivative(p, w)?;
            w += zeta * (t_next - t) / dv;
            for _ in 0..30 {
                let (v, dv) = self.eval_with_derivative(p, w)?;
                let step = (v - target) / dv;
                w -= step;
                if step.norm() <= 1e-15 * (w - self.fixed_point()).norm().max(1e-300) {
                    break;
                }
            }
            t = t_next;
        }
        let err = (self.eval(p, w)? - zeta).norm();
        if err > 1e-9 * zeta.norm() {
            return Err(Error::Coordinate(format!(
                "continuation to level {} did not converge",
                zeta.norm()
            )));
        }
        Ok(w)
    }

    fn invert_small(&self, p: &ComplexPolynomial, zeta: Complex64) -> Result<Complex64> {
        match self {
            Self::Koenigs { z0, series, .. } => {
                let mut u = zeta;
                for _ in 0..50 {
                    let (v, dv) = horner_with_derivative(series, u);
                    let step = (v - zeta) / dv;
                    u -= step;
                    if step.norm() <= 1e-17 * zeta.norm().max(1e-300) {
                        break;
                    }
                }
                Ok(z0 + u)
            }
            Self::Bottcher { z0, scale, .. } => {
                let mut z = z0 + zeta / scale;
                for _ in 0..50 {
                    let f = self.eval(p, z)? - zeta;
                    let h = 1e-7 * (z - z0).norm().max(1e-12);
                    let df = (self.eval(p, z + h)? - self.eval(p, z - h)?) / (2.0 * h);
                    let step = f / df;
                    z -= step;
                    if step.norm() <= 1e-16 * (z - z0).norm().max(1e-300) {
                        break;
                    }
                }
                Ok(z)
            }
        }
    }
}

fn horner(coeffs: &[Complex64], u: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
}

fn horner_with_derivative(coeffs: &[Complex64], u: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dv = dv * u + v;
        v = v * u + c;
    }
    (v, dv)
}
