use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::ComplexPolynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "step", rename_all = "snake_case")]
pub enum Verdict {
    /// First `n` with `|p^n(z)| > R`.
    Escaped(usize),
    /// The budget ran out without an escape.
    Bounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitClass {
    pub verdict: Verdict,
    pub escape_radius: f64,
}

impl OrbitClass {
    pub fn is_bounded(&self) -> bool {
        self.verdict == Verdict::Bounded
    }
}

/// Escape-time membership test for the filled Julia set.
pub fn classify_point(
    p: &ComplexPolynomial,
    z: Complex64,
    escape_radius: f64,
    max_iter: usize,
) -> Result<OrbitClass> {
    let floor = 2.0 * p.coefficient_bound().max(1.0);
    if !(escape_radius >= floor) {
        return Err(Error::Precondition(format!(
            "escape radius {escape_radius} below 2 max(1, coefficient bound) = {floor}"
        )));
    }
    let mut w = z;
    for n in 0..=max_iter {
        if !(w.norm() <= escape_radius) {
            return Ok(OrbitClass {
                verdict: Verdict::Escaped(n),
                escape_radius,
            });
        }
        if n < max_iter {
            w = p.eval(w);
        }
    }
    Ok(OrbitClass {
        verdict: Verdict::Bounded,
        escape_radius,
    })
}
