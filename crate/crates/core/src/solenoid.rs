//! The solenoid `Sigma_n` and the cone over it, the models for `z -> z^n`.
//!
//! A point stores `theta_0` and digits `(k_1, ..., k_N)`; the deeper angles
//! are `theta_{-i} = (theta_{-i+1} + k_i) / n`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::natural_extension::History;
use crate::poly::ComplexPolynomial;

const DIGIT_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum Angle {
    Exact(BigRational),
    Float(f64),
}

impl Angle {
    pub fn zero() -> Self {
        Angle::Exact(BigRational::zero())
    }

    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Precondition("zero denominator".into()));
        }
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    fn from_rational(q: BigRational) -> Result<Self> {
        if q < BigRational::zero() || q >= BigRational::one() {
            return Err(Error::Precondition(format!("angle {q} not in [0, 1)")));
        }
        Ok(Angle::Exact(q))
    }

    pub fn float(x: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Precondition(format!("angle {x} not in [0, 1)")));
        }
        Ok(Angle::Float(x))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Angle::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Angle::Float(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Angle::Exact(_))
    }

    /// `(frac(n theta), floor(n theta))`.
    fn times(&self, n: u32) -> (Angle, u32) {
        match self {
            Angle::Exact(q) => {
                let x = q * BigRational::from_integer(n.into());
                let k = x.floor();
                let frac = x - &k;
                (Angle::Exact(frac), k.to_integer().to_u32().unwrap_or(0))
            }
            Angle::Float(t) => {
                let x = t * n as f64;
                let k = (x.floor() as u32).min(n - 1);
                let mut frac = x - k as f64;
                if frac >= 1.0 {
                    frac = 0.0;
                }
                (Angle::Float(frac.max(0.0)), k)
            }
        }
    }

    /// `(theta + k) / n`.
    fn preimage(&self, k: u32, n: u32) -> Angle {
        match self {
            Angle::Exact(q) => Angle::Exact(
                (q + BigRational::from_integer(k.into())) / BigRational::from_integer(n.into()),
            ),
            Angle::Float(t) => Angle::Float((t + k as f64) / n as f64),
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Angle::Float(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolenoidPoint {
    theta0: Angle,
    digits: Vec<u32>,
    base: u32,
}

impl SolenoidPoint {
    pub fn new(theta0: Angle, digits: Vec<u32>, base: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::Precondition(format!("base {base} < 2")));
        }
        if let Some(&k) = digits.iter().find(|&&k| k >= base) {
            return Err(Error::Precondition(format!("digit {k} out of range for base {base}")));
        }
        Ok(Self {
            theta0,
            digits,
            base,
        })
    }

    pub fn zero(base: u32, depth: usize) -> Self {
        Self {
            theta0: Angle::zero(),
            digits: vec![0; depth],
            base,
        }
    }

    pub fn theta0(&self) -> &Angle {
        &self.theta0
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    /// `theta_0, theta_{-1}, ..., theta_{-N}`.
    pub fn angles(&self) -> Vec<Angle> {
        let mut out = vec![self.theta0.clone()];
        for &k in &self.digits {
            let next = out.last().expect("nonempty").preimage(k, self.base);
            out.push(next);
        }
        out
    }

    /// The map induced by `z -> z^n`; the deepest digit is dropped.
    pub fn shift(&self) -> Self {
        let mut s = self.shift_extend();
        s.digits.truncate(self.digits.len());
        s
    }

    /// As `shift`, but keeping every digit (depth grows by one).
    pub fn shift_extend(&self) -> Self {
        let (theta0, k) = self.theta0.times(self.base);
        let mut digits = Vec::with_capacity(self.digits.len() + 1);
        digits.push(k);
        digits.extend_from_slice(&self.digits);
        Self {
            theta0,
            digits,
            base: self.base,
        }
    }

    /// Inverse of `shift`: moves to `theta_{-1}` and appends `k` as the new
    /// deepest digit. Without stored digits, `k` selects `theta_{-1}` itself.
    pub fn unshift(&self, k: u32) -> Result<Self> {
        if k >= self.base {
            return Err(Error::InvalidBranch {
                index: k as usize,
                available: self.base as usize,
            });
        }
        if self.digits.is_empty() {
            return Ok(Self {
                theta0: self.theta0.preimage(k, self.base),
                digits: Vec::new(),
                base: self.base,
            });
        }
        let theta0 = self.theta0.preimage(self.digits[0], self.base);
        let mut digits = self.digits[1..].to_vec();
        digits.push(k);
        Ok(Self {
            theta0,
            digits,
            base: self.base,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("solenoid point serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Text(String),
    Number(f64),
}

#[derive(Serialize, Deserialize)]
struct SolenoidDocument {
    theta0: AngleRepr,
    digits: Vec<u32>,
    base: u32,
}

impl Serialize for SolenoidPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let theta0 = match &self.theta0 {
            Angle::Exact(_) => AngleRepr::Text(self.theta0.to_string()),
            Angle::Float(x) => AngleRepr::Number(*x),
        };
        SolenoidDocument {
            theta0,
            digits: self.digits.clone(),
            base: self.base,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SolenoidPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = SolenoidDocument::deserialize(d)?;
        let theta0 = match doc.theta0 {
            AngleRepr::Text(t) => parse_rational_angle(&t),
            AngleRepr::Number(x) => Angle::float(x),
        }
        .map_err(serde::de::Error::custom)?;
        SolenoidPoint::new(theta0, doc.digits, doc.base).map_err(serde::de::Error::custom)
    }
}

/// `"p/q"` or an integer numerator alone; must lie in `[0, 1)`.
pub fn parse_rational_angle(text: &str) -> Result<Angle> {
    let (num, den) = match text.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| Error::parse(0, format!("bad numerator {num:?}")))?;
    let den = BigInt::from_str(den).map_err(|_| Error::parse(0, format!("bad denominator {den:?}")))?;
    if den.is_zero() {
        return Err(Error::parse(0, "zero denominator"));
    }
    Angle::from_rational(BigRational::new(num, den))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConePoint {
    pub r: f64,
    pub point: SolenoidPoint,
}

impl PartialEq for ConePoint {
    /// The whole solenoid collapses at `r = 0`.
    fn eq(&self, other: &Self) -> bool {
        if self.r == 0.0 && other.r == 0.0 {
            return self.point.base == other.point.base;
        }
        self.r == other.r && self.point == other.point
    }
}

impl ConePoint {
    pub fn new(r: f64, point: SolenoidPoint) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Precondition(format!("cone radius {r} must be finite and >= 0")));
        }
        Ok(Self { r, point })
    }

    /// The cone point `(0, anything)`.
    pub fn apex(base: u32, depth: usize) -> Self {
        Self {
            r: 0.0,
            point: SolenoidPoint::zero(base, depth),
        }
    }

    pub fn is_apex(&self) -> bool {
        self.r == 0.0
    }

    /// `(r, s) -> (r^n, shift(s))`.
    pub fn shift(&self) -> Self {
        Self {
            r: self.r.powi(self.point.base as i32),
            point: self.point.shift(),
        }
    }

    pub fn shift_extend(&self) -> Self {
        Self {
            r: self.r.powi(self.point.base as i32),
            point: self.point.shift_extend(),
        }
    }

    /// Radii `r_{-i} = r^{1/n^i}`.
    pub fn radii(&self, depth: usize) -> Vec<f64> {
        let n = self.point.base as f64;
        let mut out = Vec::with_capacity(depth + 1);
        let mut root = 1.0;
        for _ in 0..=depth {
            out.push(self.r.powf(root));
            root /= n;
        }
        out
    }

    /// Entrywise distance of decoded histories over the common depth.
    pub fn distance(&self, other: &ConePoint) -> f64 {
        let n = self.point.depth().min(other.point.depth());
        let a = decode(self, n).expect("depth within range");
        let b = decode(other, n).expect("depth within range");
        a.distance(&b)
    }
}

/// History of `z -> z^n` from a cone point.
pub fn decode(c: &ConePoint, depth: usize) -> Result<History> {
    if c.r == 0.0 {
        return Ok(History::fixed(Complex64::new(0.0, 0.0), depth));
    }
    if depth > c.point.depth() {
        return Err(Error::DepthInsufficient { depth });
    }
    let radii = c.radii(depth);
    let entries = c
        .point
        .angles()
        .iter()
        .zip(radii)
        .map(|(a, r)| Complex64::from_polar(r, std::f64::consts::TAU * a.to_f64()))
        .collect();
    History::from_entries(entries)
}

/// Cone point of a history of `z -> z^n` (floating angles).
pub fn encode_history_p0(h: &History, n: u32) -> Result<ConePoint> {
    let p = ComplexPolynomial::monomial(n as usize);
    h.validate(&p)?;
    let zero = Complex64::new(0.0, 0.0);
    let zeros = h.entries().iter().filter(|z| **z == zero).count();
    if zeros == h.entries().len() {
        return Ok(ConePoint::apex(n, h.depth()));
    }
    if zeros > 0 {
        let depth = h.entries().iter().position(|z| *z == zero).unwrap_or(0);
        return Err(Error::InvalidHistory {
            depth,
            residual: 0.0,
        });
    }
    let angles: Vec<f64> = h
        .entries()
        .iter()
        .map(|z| (z.arg() / std::f64::consts::TAU).rem_euclid(1.0))
        .map(|t| if t >= 1.0 { 0.0 } else { t })
        .collect();
    let mut digits = Vec::with_capacity(h.depth());
    for i in 1..angles.len() {
        let x = n as f64 * angles[i] - angles[i - 1];
        let k = x.round();
        let slack = (x - k).abs();
        // A wrapped angle near 0/1 can put the digit at n; fold it back.
        let k = (k as i64).rem_euclid(n as i64) as u32;
        if slack > DIGIT_SLACK {
            return Err(Error::InvalidHistory {
                depth: i,
                residual: slack,
            });
        }
        digits.push(k);
    }
    ConePoint::new(
        h.head().norm(),
        SolenoidPoint::new(Angle::Float(angles[0]), digits, n)?,
    )
}

/// A history of `z -> z^n` with exact rational angles.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactHistory {
    pub r0: f64,
    pub angles: Vec<BigRational>,
    pub base: u32,
}

impl ExactHistory {
    pub fn depth(&self) -> usize {
        self.angles.len() - 1
    }

    /// `n theta_{-i} = theta_{-i+1} (mod 1)` exactly, angles in `[0, 1)`.
    pub fn validate(&self) -> Result<()> {
        let n = BigRational::from_integer(self.base.into());
        for (i, a) in self.angles.iter().enumerate() {
            if *a < BigRational::zero() || *a >= BigRational::one() {
                return Err(Error::InvalidHistory { depth: i, residual: 1.0 });
            }
            if i > 0 {
                let x = a * &n - &self.angles[i - 1];
                if !x.is_integer() {
                    return Err(Error::InvalidHistory { depth: i, residual: 1.0 });
                }
            }
        }
        Ok(())
    }

    /// `(r0^n, n theta_0 mod 1, theta_0, ...)`.
    pub fn shift(&self) -> Self {
        let (head, _) = Angle::Exact(self.angles[0].clone()).times(self.base);
        let Angle::Exact(head) = head else {
            unreachable!("exact angles stay exact")
        };
        let mut angles = vec![head];
        angles.extend(self.angles.iter().cloned());
        Self {
            r0: self.r0.powi(self.base as i32),
            angles,
            base: self.base,
        }
    }

    pub fn to_history(&self) -> Result<History> {
        let c = ConePoint {
            r: self.r0,
            point: SolenoidPoint {
                theta0: Angle::Float(0.0),
                digits: vec![],
                base: self.base,
            },
        };
        let radii = c.radii(self.depth());
        History::from_entries(
            self.angles
                .iter()
                .zip(radii)
                .map(|(a, r)| {
                    Complex64::from_polar(r, std::f64::consts::TAU * a.to_f64().unwrap_or(f64::NAN))
                })
                .collect(),
        )
    }
}

pub fn encode_exact(h: &ExactHistory) -> Result<ConePoint> {
    h.validate()?;
    if h.r0 == 0.0 {
        return Ok(ConePoint::apex(h.base, h.depth()));
    }
    let n = BigRational::from_integer(h.base.into());
    let digits = (1..h.angles.len())
        .map(|i| {
            (&h.angles[i] * &n - &h.angles[i - 1])
                .to_integer()
                .to_u32()
                .expect("validated digit")
        })
        .collect();
    ConePoint::new(
        h.r0,
        SolenoidPoint::new(Angle::Exact(h.angles[0].clone()), digits, h.base)?,
    )
}

/// Exact decoding; requires a rational `theta_0`.
pub fn decode_exact(c: &ConePoint, depth: usize) -> Result<ExactHistory> {
    if depth > c.point.depth() && c.r != 0.0 {
        return Err(Error::DepthInsufficient { depth });
    }
    if c.r == 0.0 {
        return Ok(ExactHistory {
            r0: 0.0,
            angles: vec![BigRational::zero(); depth + 1],
            base: c.point.base,
        });
    }
    let angles = c
        .point
        .angles()
        .into_iter()
        .take(depth + 1)
        .map(|a| match a {
            Angle::Exact(q) => Ok(q),
            Angle::Float(_) => Err(Error::Precondition("exact decoding needs a rational angle".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExactHistory {
        r0: c.r,
        angles,
        base: c.point.base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn q(a: i64, b: i64) -> Angle {
        Angle::rational(a, b).unwrap()
    }

    #[test]
    fn shift_examples() {
        let s = SolenoidPoint::new(q(1, 4), vec![1, 0], 2).unwrap();
        let t = s.shift();
        assert_eq!(t.theta0(), &q(1, 2));
        assert_eq!(t.digits(), &[0, 1]);
        let z = SolenoidPoint::zero(2, 3);
        assert_eq!(z.shift(), z);
        let s = SolenoidPoint::new(q(2, 3), vec![2], 3).unwrap();
        let t = s.shift();
        assert_eq!(t.theta0(), &q(0, 1));
        assert_eq!(t.digits(), &[2]);
    }

    #[test]
    fn unshift_examples() {
        let s = SolenoidPoint::new(q(0, 1), vec![], 2).unwrap();
        assert_eq!(s.unshift(1).unwrap().theta0(), &q(1, 2));
        let s = SolenoidPoint::new(q(1, 2), vec![], 2).unwrap();
        assert_eq!(s.unshift(0).unwrap().theta0(), &q(1, 4));
        assert!(s.unshift(2).is_err());
    }

    #[test]
    fn shift_unshift_round_trips() {
        let s = SolenoidPoint::new(q(3, 7), vec![1, 0, 2, 2], 3).unwrap();
        for k in 0..3 {
            assert_eq!(s.unshift(k).unwrap().shift(), s);
        }
        let dropped = *s.digits().last().unwrap();
        assert_eq!(s.shift().unshift(dropped).unwrap(), s);
    }

    #[test]
    fn derived_angles_satisfy_relation() {
        let s = SolenoidPoint::new(q(5, 9), vec![1, 1, 0, 1], 2).unwrap();
        let a = s.angles();
        for i in 1..a.len() {
            let (Angle::Exact(x), Angle::Exact(y)) = (&a[i], &a[i - 1]) else {
                panic!()
            };
            assert!((x * BigRational::from_integer(2.into()) - y).is_integer());
        }
    }

    #[test]
    fn encode_examples() {
        let p = ComplexPolynomial::monomial(2);
        let h = History::new(&p, vec![c(4.0, 0.0), c(2.0, 0.0), c(2f64.sqrt(), 0.0)]).unwrap();
        let e = encode_history_p0(&h, 2).unwrap();
        assert_eq!(e.r, 4.0);
        assert_eq!(e.point.digits(), &[0, 0]);
        let h = History::new(&p, vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let e = encode_history_p0(&h, 2).unwrap();
        assert_eq!(e.r, 1.0);
        assert_eq!(e.point.theta0().to_f64(), 0.0);
        assert_eq!(e.point.digits(), &[1]);
        let e = encode_history_p0(&History::fixed(c(0.0, 0.0), 2), 2).unwrap();
        assert!(e.is_apex());
        assert_eq!(e, ConePoint::apex(2, 0));
        let mixed = History::from_entries(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(encode_history_p0(&mixed.unwrap(), 2).is_err());
    }

    #[test]
    fn decode_examples() {
        let one = ConePoint::new(1.0, SolenoidPoint::zero(2, 4)).unwrap();
        assert_eq!(decode(&one, 4).unwrap().entries(), &[c(1.0, 0.0); 5]);
        let apex = ConePoint::new(0.0, SolenoidPoint::new(q(1, 3), vec![1], 2).unwrap()).unwrap();
        assert_eq!(decode(&apex, 3).unwrap().entries(), &[c(0.0, 0.0); 4]);
        assert!(decode(&one, 5).is_err());
    }

    #[test]
    fn exact_round_trip_and_conjugacy() {
        let s = SolenoidPoint::new(q(3, 10), vec![1, 0, 1, 1], 2).unwrap();
        let cone = ConePoint::new(0.7, s).unwrap();
        let h = decode_exact(&cone, 4).unwrap();
        assert_eq!(encode_exact(&h).unwrap(), cone);
        let lhs = encode_exact(&h.shift()).unwrap();
        let rhs = cone.shift_extend();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn float_round_trip() {
        let s = SolenoidPoint::new(Angle::float(0.123).unwrap(), vec![2, 0, 1], 3).unwrap();
        let cone = ConePoint::new(0.4, s).unwrap();
        let back = encode_history_p0(&decode(&cone, 3).unwrap(), 3).unwrap();
        assert!((back.r - cone.r).abs() < 1e-12);
        assert_eq!(back.point.digits(), cone.point.digits());
        assert!((back.point.theta0().to_f64() - 0.123).abs() < 1e-12);
    }

    #[test]
    fn json_forms() {
        let s = SolenoidPoint::new(q(3, 8), vec![1, 0], 2).unwrap();
        let text = s.to_json();
        assert_eq!(text, r#"{"theta0":"3/8","digits":[1,0],"base":2}"#);
        assert_eq!(SolenoidPoint::from_json(&text).unwrap(), s);
        let f = SolenoidPoint::from_json(r#"{"theta0":0.25,"digits":[],"base":2}"#).unwrap();
        assert_eq!(f.theta0(), &Angle::Float(0.25));
        for bad in [
            r#"{"theta0":"3/2","digits":[],"base":2}"#,
            r#"{"theta0":"1/0","digits":[],"base":2}"#,
            r#"{"theta0":0.5,"digits":[2],"base":2}"#,
            r#"{"theta0":0.5,"digits":[],"base":1}"#,
        ] {
            assert!(SolenoidPoint::from_json(bad).is_err(), "{bad}");
        }
    }
}
