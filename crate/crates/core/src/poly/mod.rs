//! Complex polynomials: evaluation, preimages, critical points and
//! attracting cycles.

mod cycles;
mod literal;
mod roots;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cycles::{
    find_attracting_cycles, find_attracting_cycles_with_budget, is_desk_hyperbolic,
    CriticalVerdict, Cycle, CycleSearch, HyperbolicityReport, DEFAULT_CYCLE_BUDGET,
};
pub use literal::{format_complex, parse_complex};
pub use roots::{preimage_tolerance, preimages, residual_bound, roots_of};

/// A polynomial with complex coefficients, lowest degree first.
///
/// Trailing zero coefficients are trimmed on construction, so the last
/// stored coefficient is the leading one (the zero polynomial is `[0]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPolynomial("no coefficients".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidPolynomial("non-finite coefficient".into()));
        }
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == Complex64::new(0.0, 0.0) {
            coeffs.pop();
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `z^d`.
    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
        coeffs[degree] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    /// `z^2 + c`.
    pub fn quadratic(c: Complex64) -> Self {
        Self {
            coeffs: vec![c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    /// Fails unless the degree is at least two.
    pub fn require_dynamical(&self) -> Result<()> {
        if self.degree() < 2 {
            Err(Error::DegenerateDegree {
                degree: self.degree(),
            })
        } else {
            Ok(())
        }
    }

    /// True when the polynomial is exactly `z^d`.
    pub fn is_monomial(&self) -> bool {
        let d = self.degree();
        self.coeffs[d] == Complex64::new(1.0, 0.0)
            && self.coeffs[..d].iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            deriv = deriv * z + value;
            value = value * z + c;
        }
        (value, deriv)
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self {
                coeffs: vec![Complex64::new(0.0, 0.0)],
            };
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
        Self { coeffs }
    }

    /// `p(z) - c`.
    pub fn minus_constant(&self, c: Complex64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] -= c;
        Self::new(coeffs).expect("finite coefficients")
    }

    /// `p(z) - (a z + b)`.
    pub fn minus_linear(&self, a: Complex64, b: Complex64) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < 2 {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        coeffs[0] -= b;
        coeffs[1] -= a;
        Self::new(coeffs).expect("finite coefficients")
    }

    /// `self(other(z))`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut acc = vec![Complex64::new(0.0, 0.0)];
        for &c in self.coeffs.iter().rev() {
            acc = poly_mul(&acc, &other.coeffs);
            acc[0] += c;
        }
        Self::new(acc).expect("finite coefficients")
    }

    /// Coefficients of `u -> p(center + u)`, lowest degree first.
    pub fn taylor_at(&self, center: Complex64) -> Vec<Complex64> {
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            for j in (k..n - 1).rev() {
                let next = work[j + 1];
                work[j] += center * next;
            }
            out.push(work[k]);
        }
        out
    }

    /// `sum_{i<d} |a_i| / |a_d|`.
    pub fn coefficient_bound(&self) -> f64 {
        let lead = self.leading().norm();
        self.coeffs[..self.degree()]
            .iter()
            .map(|c| c.norm())
            .sum::<f64>()
            / lead
    }

    /// A radius beyond which every orbit escapes; at least `2 max(1, bound)`.
    pub fn escape_radius(&self) -> f64 {
        let s = self.coefficient_bound();
        let lead = self.leading().norm();
        (2.0 * s.max(1.0)).max((s + 2.0) / lead)
    }

    pub fn critical_points(&self) -> Result<Vec<Complex64>> {
        self.require_dynamical()?;
        roots_of(&self.derivative())
    }

    pub fn iterate(&self, mut z: Complex64, n: usize) -> Complex64 {
        for _ in 0..n {
            z = self.eval(z);
        }
        z
    }
}

pub(crate) fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl TryFrom<Vec<Complex64>> for ComplexPolynomial {
    type Error = Error;

    fn try_from(value: Vec<Complex64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ComplexPolynomial> for Vec<Complex64> {
    fn from(p: ComplexPolynomial) -> Self {
        p.coeffs
    }
}

/// Comma separated coefficient list `a0,a1,...,ad` of complex literals.
impl FromStr for ComplexPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        let mut offset = 0;
        for field in s.split(',') {
            coeffs.push(literal::parse_complex_at(field, offset)?);
            offset += field.len() + 1;
        }
        Self::new(coeffs)
    }
}

impl fmt::Display for ComplexPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&format_complex(*c))?;
        }
        Ok(())
    }
}
