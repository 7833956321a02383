//! Exact algebra of limits: `Z[1/m]`, the direct limit of `Z --(x m)--> Z`,
//! winding vectors of loop words and the covering-triviality check on
//! component graphs.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fatou::{component_map, ComponentAtlas, ComponentTarget};
use crate::poly::ComplexPolynomial;

/// `numerator / base^exponent` in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalizedInteger {
    numerator: BigInt,
    exponent: u32,
    base: u32,
}

impl LocalizedInteger {
    pub fn new(numerator: impl Into<BigInt>, exponent: u32, base: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::Precondition(format!("base {base} < 2")));
        }
        Ok(Self::normalized(numerator.into(), exponent, base))
    }

    pub fn zero(base: u32) -> Self {
        Self {
            numerator: BigInt::zero(),
            exponent: 0,
            base,
        }
    }

    fn normalized(mut numerator: BigInt, mut exponent: u32, base: u32) -> Self {
        let m = BigInt::from(base);
        if numerator.is_zero() {
            exponent = 0;
        }
        while exponent > 0 {
            let (q, r) = numerator.div_rem(&m);
            if !r.is_zero() {
                break;
            }
            numerator = q;
            exponent -= 1;
        }
        Self {
            numerator,
            exponent,
            base,
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    fn same_base(&self, other: &Self) -> Result<()> {
        if self.base != other.base {
            return Err(Error::BaseMismatch(self.base, other.base));
        }
        Ok(())
    }

    fn raised(&self, exponent: u32) -> BigInt {
        &self.numerator * BigInt::from(self.base).pow(exponent - self.exponent)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_base(other)?;
        let e = self.exponent.max(other.exponent);
        Ok(Self::normalized(self.raised(e) + other.raised(e), e, self.base))
    }

    pub fn neg(&self) -> Self {
        Self {
            numerator: -&self.numerator,
            exponent: self.exponent,
            base: self.base,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Product in the ring `Z[1/m]`.
    pub fn scale(&self, other: &Self) -> Result<Self> {
        self.same_base(other)?;
        Ok(Self::normalized(
            &self.numerator * &other.numerator,
            self.exponent + other.exponent,
            self.base,
        ))
    }

    pub fn scale_integer(&self, k: impl Into<BigInt>) -> Self {
        Self::normalized(&self.numerator * k.into(), self.exponent, self.base)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.numerator.clone(), BigInt::from(self.base).pow(self.exponent))
    }
}

impl fmt::Display for LocalizedInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}^{}", self.numerator, self.base, self.exponent)
        }
    }
}

/// The class of `value` at `level` in `lim (Z --(x m)--> Z --(x m)--> ...)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LimitGroupElement {
    level: u32,
    value: BigInt,
    multiplier: u32,
}

impl LimitGroupElement {
    pub fn new(level: u32, value: impl Into<BigInt>, multiplier: u32) -> Result<Self> {
        if multiplier < 2 {
            return Err(Error::Precondition(format!("multiplier {multiplier} < 2")));
        }
        Ok(Self::normalize(level, value.into(), multiplier))
    }

    /// `(level, m v) ~ (level - 1, v)` until `v` is not divisible by `m`.
    fn normalize(mut level: u32, mut value: BigInt, multiplier: u32) -> Self {
        let m = BigInt::from(multiplier);
        if value.is_zero() {
            level = 0;
        }
        while level > 0 {
            let (q, r) = value.div_rem(&m);
            if !r.is_zero() {
                break;
            }
            value = q;
            level -= 1;
        }
        Self {
            level,
            value,
            multiplier,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn multiplier(&self) -> u32 {
        self.multiplier
    }

    /// The representative at a higher `level`.
    pub fn at_level(&self, level: u32) -> Option<BigInt> {
        (level >= self.level).then(|| &self.value * BigInt::from(self.multiplier).pow(level - self.level))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.multiplier != other.multiplier {
            return Err(Error::BaseMismatch(self.multiplier, other.multiplier));
        }
        let l = self.level.max(other.level);
        let sum = self.at_level(l).expect("common level") + other.at_level(l).expect("common level");
        Ok(Self::normalize(l, sum, self.multiplier))
    }

    pub fn neg(&self) -> Self {
        Self {
            level: self.level,
            value: -&self.value,
            multiplier: self.multiplier,
        }
    }

    /// Equality by raising both representatives to a common level.
    pub fn limit_equal(&self, other: &Self) -> bool {
        if self.multiplier != other.multiplier {
            return false;
        }
        let l = self.level.max(other.level);
        self.at_level(l) == other.at_level(l)
    }

    /// `(level, v) -> v / m^level`.
    pub fn to_localized(&self) -> LocalizedInteger {
        LocalizedInteger::normalized(self.value.clone(), self.level, self.multiplier)
    }

    pub fn from_localized(x: &LocalizedInteger) -> Self {
        Self::normalize(x.exponent, x.numerator.clone(), x.base)
    }
}

/// Components with the data the covering and homology arguments use.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentGraph {
    pub nodes: Vec<String>,
    /// Diameter below the configured `delta`.
    pub small: Vec<bool>,
    /// `p_*` as node indices.
    pub map: Vec<usize>,
    /// Degree of `p` on each node.
    pub k: Vec<u32>,
    /// Distinguished fixed nodes.
    #[serde(rename = "X0")]
    pub x0: Vec<usize>,
}

impl ComponentGraph {
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::InvalidGraph("no nodes".into()));
        }
        if self.small.len() != n || self.map.len() != n || self.k.len() != n {
            return Err(Error::InvalidGraph("small, map and k must have one entry per node".into()));
        }
        let names: BTreeSet<&String> = self.nodes.iter().collect();
        if names.len() != n {
            return Err(Error::InvalidGraph("duplicate node names".into()));
        }
        if let Some(j) = self.map.iter().position(|&t| t >= n) {
            return Err(Error::InvalidGraph(format!("map of node {j} out of range")));
        }
        if let Some(j) = self.k.iter().position(|&k| k == 0) {
            return Err(Error::InvalidGraph(format!("node {j} has degree 0")));
        }
        let mut seen = BTreeSet::new();
        for &x in &self.x0 {
            if x >= n || !seen.insert(x) {
                return Err(Error::InvalidGraph(format!("distinguished node {x} invalid or repeated")));
            }
            if self.map[x] != x {
                return Err(Error::InvalidGraph(format!("distinguished node {x} is not fixed")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("component graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    /// Nodes are the atlas components whose forward images stay resolved;
    /// `small` compares diameters with `delta`, and `X0` holds the
    /// components of attracting fixed points.
    pub fn from_atlas(p: &ComplexPolynomial, atlas: &ComponentAtlas, delta: f64) -> Result<Self> {
        let targets = component_map(p, atlas);
        let mut alive: BTreeSet<usize> = atlas.components.iter().map(|c| c.id).collect();
        loop {
            let dropped: Vec<usize> = alive
                .iter()
                .copied()
                .filter(|id| match targets[id] {
                    ComponentTarget::Resolved(t) => !alive.contains(&t),
                    ComponentTarget::Unresolved => true,
                })
                .collect();
            if dropped.is_empty() {
                break;
            }
            for id in dropped {
                alive.remove(&id);
            }
        }
        let ids: Vec<usize> = alive.into_iter().collect();
        let index = |id: usize| ids.binary_search(&id).expect("alive target");
        let records: Vec<_> = ids
            .iter()
            .map(|&id| atlas.components.iter().find(|c| c.id == id).expect("atlas id"))
            .collect();
        let map: Vec<usize> = ids
            .iter()
            .map(|id| match targets[id] {
                ComponentTarget::Resolved(t) => index(t),
                ComponentTarget::Unresolved => unreachable!("dropped above"),
            })
            .collect();
        let x0 = (0..ids.len())
            .filter(|&i| {
                map[i] == i
                    && records[i].cycle_point.is_some()
                    && atlas.cycles[records[i].cycle].period() == 1
            })
            .collect();
        let g = Self {
            nodes: ids.iter().map(|id| format!("u{id}")).collect(),
            small: records.iter().map(|c| c.diameter < delta).collect(),
            map,
            k: records.iter().map(|c| c.degree).collect(),
            x0,
        };
        g.validate()?;
        Ok(g)
    }
}

/// `(+)_{X in X0} Z[1/k(X)]` with one coordinate per distinguished node.
/// The map into `H_1` is a split injection but not onto; only its image is
/// modelled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Model {
    pub summands: Vec<Summand>,
    pub surjective: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summand {
    pub node: usize,
    pub name: String,
    pub base: u32,
    /// Level-0 generator: the boundary curve of the node.
    pub generator: String,
}

pub fn h1_model(g: &ComponentGraph) -> Result<H1Model> {
    g.validate()?;
    if g.x0.is_empty() {
        return Err(Error::Precondition("no distinguished components".into()));
    }
    let summands = g
        .x0
        .iter()
        .map(|&x| {
            if g.k[x] < 2 {
                return Err(Error::InvalidGraph(format!("distinguished node {x} has degree {}", g.k[x])));
            }
            Ok(Summand {
                node: x,
                name: g.nodes[x].clone(),
                base: g.k[x],
                generator: format!("boundary of {}", g.nodes[x]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(H1Model {
        summands,
        surjective: false,
    })
}

impl H1Model {
    pub fn describe(&self) -> String {
        self.summands
            .iter()
            .map(|s| format!("Z[1/{}]", s.base))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn zero(&self) -> Vec<LocalizedInteger> {
        self.summands.iter().map(|s| LocalizedInteger::zero(s.base)).collect()
    }

    /// Inclusion of summand `i`.
    pub fn include(&self, i: usize, x: &LocalizedInteger) -> Result<Vec<LocalizedInteger>> {
        let s = self
            .summands
            .get(i)
            .ok_or_else(|| Error::Precondition(format!("no summand {i}")))?;
        if x.base != s.base {
            return Err(Error::BaseMismatch(s.base, x.base));
        }
        let mut out = self.zero();
        out[i] = x.clone();
        Ok(out)
    }

    /// Projection onto summand `i`.
    pub fn project(&self, i: usize, v: &[LocalizedInteger]) -> Result<LocalizedInteger> {
        v.get(i)
            .cloned()
            .ok_or_else(|| Error::Precondition(format!("no summand {i}")))
    }

    pub fn add(&self, u: &[LocalizedInteger], v: &[LocalizedInteger]) -> Result<Vec<LocalizedInteger>> {
        if u.len() != self.summands.len() || v.len() != self.summands.len() {
            return Err(Error::Precondition("element has the wrong number of coordinates".into()));
        }
        u.iter().zip(v).map(|(a, b)| a.add(b)).collect()
    }
}

/// `e_i` or `e_i^{-1}` with `i >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopSymbol {
    pub index: usize,
    pub inverse: bool,
}

/// Words like `e1 e2 e1^-1 e2^{-1}`; whitespace between symbols is optional.
pub fn parse_word(text: &str) -> Result<Vec<LoopSymbol>> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if bytes[i] != b'e' {
            return Err(Error::parse(i, "expected 'e'"));
        }
        i += 1;
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return Err(Error::parse(i, "expected a loop index"));
        }
        let index: usize = text[start..i]
            .parse()
            .map_err(|_| Error::parse(start, "loop index too large"))?;
        if index == 0 {
            return Err(Error::parse(start, "loop indices start at 1"));
        }
        let mut inverse = false;
        if i < bytes.len() && bytes[i] == b'^' {
            i += 1;
            let braced = i < bytes.len() && bytes[i] == b'{';
            if braced {
                i += 1;
            }
            let rest = &text[i..];
            if rest.starts_with("-1") {
                inverse = true;
                i += 2;
            } else if rest.starts_with('1') {
                i += 1;
            } else {
                return Err(Error::parse(i, "exponent must be 1 or -1"));
            }
            if braced {
                if i >= bytes.len() || bytes[i] != b'}' {
                    return Err(Error::parse(i, "expected '}'"));
                }
                i += 1;
            }
        }
        out.push(LoopSymbol { index, inverse });
    }
    Ok(out)
}

/// Signed count of each loop symbol in the word.
pub fn winding_vector(word: &[LoopSymbol], support: usize) -> Result<Vec<i64>> {
    let mut out = vec![0i64; support];
    for s in word {
        if s.index == 0 || s.index > support {
            return Err(Error::Precondition(format!("loop index {} outside 1..={support}", s.index)));
        }
        out[s.index - 1] += if s.inverse { -1 } else { 1 };
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CoveringVerdict {
    Trivial,
    Inconclusive { node: usize, name: String },
}

/// `p_*^k(source) = node` with `source` small.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub node: usize,
    pub source: usize,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringReport {
    #[serde(flatten)]
    pub verdict: CoveringVerdict,
    pub k0: usize,
    /// Nodes that are not small (finitely many by construction).
    pub big_nodes: Vec<usize>,
    pub trace: Vec<Option<Witness>>,
}

impl CoveringReport {
    pub fn is_trivial(&self) -> bool {
        self.verdict == CoveringVerdict::Trivial
    }
}

/// Every node must be `p_*^k(X')` for a small `X'`; witnesses have minimal
/// `k`, ties broken by the smallest source index.
pub fn covering_trivial(g: &ComponentGraph) -> Result<CoveringReport> {
    g.validate()?;
    let n = g.len();
    let mut trace: Vec<Option<Witness>> = vec![None; n];
    let mut queue = VecDeque::new();
    for i in (0..n).filter(|&i| g.small[i]) {
        trace[i] = Some(Witness { node: i, source: i, k: 0 });
        queue.push_back(i);
    }
    while let Some(i) = queue.pop_front() {
        let w = trace[i].clone().expect("queued nodes have witnesses");
        let j = g.map[i];
        if trace[j].is_none() {
            trace[j] = Some(Witness {
                node: j,
                source: w.source,
                k: w.k + 1,
            });
            queue.push_back(j);
        }
    }
    let verdict = match trace.iter().position(|w| w.is_none()) {
        None => CoveringVerdict::Trivial,
        Some(node) => CoveringVerdict::Inconclusive {
            node,
            name: g.nodes[node].clone(),
        },
    };
    Ok(CoveringReport {
        verdict,
        k0: 0,
        big_nodes: (0..n).filter(|&i| !g.small[i]).collect(),
        trace,
    })
}

/// The element of `Z[1/m]` equal to `q`, if there is one.
pub fn rational_in_localization(q: &BigRational, base: u32) -> Option<LocalizedInteger> {
    let m = BigRational::from_integer(BigInt::from(base));
    let bound = q.denom().bits() as u32;
    let mut x = q.clone();
    let mut exponent = 0u32;
    while !x.is_integer() {
        if exponent >= bound {
            return None;
        }
        x *= &m;
        exponent += 1;
    }
    Some(LocalizedInteger::normalized(x.to_integer(), exponent, base))
}
