//! Truncated histories `(z_0, z_{-1}, ..., z_{-N})` with `p(z_{-i-1}) = z_{-i}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fatou::{component_map, ComponentAtlas, ComponentTarget};
use crate::poly::{preimages, ComplexPolynomial};

pub const HISTORY_TOLERANCE: f64 = 1e-9;
/// Roots closer than this (relative) are one branch of higher multiplicity.
const BRANCH_MERGE: f64 = 1e-7;
const MIN_STEP: f64 = 1e-12;
/// Accept a continuation step when the tracked root moved less than this
/// fraction of its distance to the other roots.
const TRACK_RATIO: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
pub struct History {
    entries: Vec<Complex64>,
}

impl History {
    /// Checks `|p(z_{-i-1}) - z_{-i}| <= 1e-9 max(1, |z_{-i}|)` at every step.
    pub fn new(p: &ComplexPolynomial, entries: Vec<Complex64>) -> Result<Self> {
        let h = Self::from_entries(entries)?;
        h.validate(p)?;
        Ok(h)
    }

    /// Structural checks only: nonempty, finite.
    pub fn from_entries(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Precondition("a history has at least one entry".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Precondition("non-finite history entry".into()));
        }
        Ok(Self { entries })
    }

    /// The constant history `(z, z, ..., z)`.
    pub fn fixed(z: Complex64, depth: usize) -> Self {
        Self {
            entries: vec![z; depth + 1],
        }
    }

    pub fn validate(&self, p: &ComplexPolynomial) -> Result<()> {
        for i in 0..self.depth() {
            let residual = (p.eval(self.entries[i + 1]) - self.entries[i]).norm();
            if residual > HISTORY_TOLERANCE * self.entries[i].norm().max(1.0) {
                return Err(Error::InvalidHistory { depth: i + 1, residual });
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `z_0`.
    pub fn head(&self) -> Complex64 {
        self.entries[0]
    }

    /// `z_{-i}`.
    pub fn entry(&self, i: usize) -> Complex64 {
        self.entries[i]
    }

    pub fn deepest(&self) -> Complex64 {
        self.entries[self.depth()]
    }

    /// `(p(z_0), z_0, ..., z_{-N})`; old entries are copied untouched.
    pub fn shift(&self, p: &ComplexPolynomial) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len() + 1);
        entries.push(p.eval(self.entries[0]));
        entries.extend_from_slice(&self.entries);
        Self { entries }
    }

    /// Drops `z_0`; with `Some(b)` appends branch `b` of the sorted
    /// preimages of the deepest entry.
    pub fn unshift(&self, p: &ComplexPolynomial, branch: Option<usize>) -> Result<Self> {
        if self.depth() == 0 {
            return Err(Error::Precondition("unshift needs depth >= 1".into()));
        }
        let mut entries = self.entries[1..].to_vec();
        if let Some(b) = branch {
            let roots = sorted_preimages(p, self.deepest())?;
            let w = *roots.get(b).ok_or(Error::InvalidBranch {
                index: b,
                available: roots.len(),
            })?;
            entries.push(w);
        }
        Ok(Self { entries })
    }

    /// Truncation to depth `n` (no-op when already shallower).
    pub fn truncate(&self, n: usize) -> Self {
        Self {
            entries: self.entries[..(n + 1).min(self.entries.len())].to_vec(),
        }
    }

    /// Largest entrywise distance over the common depth.
    pub fn distance(&self, other: &History) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&HistoryDocument::from(self)).expect("history serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: HistoryDocument = serde_json::from_str(text)?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct HistoryDocument {
    depth: usize,
    entries: Vec<[f64; 2]>,
}

impl From<&History> for HistoryDocument {
    fn from(h: &History) -> Self {
        Self {
            depth: h.depth(),
            entries: h.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<HistoryDocument> for History {
    type Error = Error;

    fn try_from(doc: HistoryDocument) -> Result<Self> {
        if doc.entries.len() != doc.depth.wrapping_add(1) {
            return Err(Error::Document(format!(
                "depth {} does not match {} entries",
                doc.depth,
                doc.entries.len()
            )));
        }
        History::from_entries(doc.entries.iter().map(|e| Complex64::new(e[0], e[1])).collect())
    }
}

impl Serialize for History {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HistoryDocument::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for History {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        HistoryDocument::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

/// Preimages ordered by real part (rounded to `1e-9`), then imaginary part.
pub fn sorted_preimages(p: &ComplexPolynomial, c: Complex64) -> Result<Vec<Complex64>> {
    let mut roots = preimages(p, c)?;
    roots.sort_by(|a, b| {
        let ra = (a.re * 1e9).round();
        let rb = (b.re * 1e9).round();
        ra.total_cmp(&rb).then(a.im.total_cmp(&b.im))
    });
    Ok(roots)
}

/// Distinct preimages with multiplicities, in sorted order.
fn branches(p: &ComplexPolynomial, c: Complex64) -> Result<Vec<(Complex64, usize)>> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for w in sorted_preimages(p, c)? {
        match out
            .iter_mut()
            .find(|(v, _)| (v - w).norm() <= BRANCH_MERGE * w.norm().max(1.0))
        {
            Some((_, m)) => *m += 1,
            None => out.push((w, 1)),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberEntry {
    pub history: History,
    /// Product of root multiplicities along the branch.
    pub multiplicity: usize,
    pub ramified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub base: Complex64,
    pub depth: usize,
    pub entries: Vec<FiberEntry>,
}

impl Fiber {
    /// Count with multiplicity; equals `d^N`.
    pub fn count(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn is_ramified(&self) -> bool {
        self.entries.iter().any(|e| e.ramified)
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("fiber entry serializes"));
            out.push('\n');
        }
        out
    }
}

/// All depth-`n` histories over `z`, grouped into branches.
pub fn fiber(p: &ComplexPolynomial, z: Complex64, n: usize) -> Result<Fiber> {
    p.require_dynamical()?;
    let entries = grow(p, vec![z], 1, n)?;
    Ok(Fiber {
        base: z,
        depth: n,
        entries,
    })
}

fn grow(
    p: &ComplexPolynomial,
    prefix: Vec<Complex64>,
    multiplicity: usize,
    n: usize,
) -> Result<Vec<FiberEntry>> {
    if prefix.len() == n + 1 {
        return Ok(vec![FiberEntry {
            history: History { entries: prefix },
            multiplicity,
            ramified: multiplicity > 1,
        }]);
    }
    let children = branches(p, *prefix.last().expect("nonempty prefix"))?;
    let grown: Vec<Result<Vec<FiberEntry>>> = children
        .into_par_iter()
        .map(|(w, m)| {
            let mut next = prefix.clone();
            next.push(w);
            grow(p, next, multiplicity * m, n)
        })
        .collect();
    let mut out = Vec::new();
    for g in grown {
        out.extend(g?);
    }
    Ok(out)
}

/// Continues every entry of `h` along the polyline `path`, which must start
/// at `h.head()`, by nearest-root tracking with step halving.
pub fn continue_along_path(
    p: &ComplexPolynomial,
    h: &History,
    path: &[Complex64],
) -> Result<History> {
    let Some(&start) = path.first() else {
        return Err(Error::Precondition("empty path".into()));
    };
    if (start - h.head()).norm() > HISTORY_TOLERANCE * start.norm().max(1.0) {
        return Err(Error::Precondition("path does not start at the history head".into()));
    }
    let mut current = h.entries.clone();
    current[0] = start;
    for seg in path.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = (b - a).norm();
        let mut t = 0.0;
        let mut dt: f64 = 1.0;
        while t < 1.0 {
            let step = dt.min(1.0 - t);
            match track_step(p, &current, a + (b - a) * (t + step)) {
                Ok(next) => {
                    current = next;
                    t += step;
                    dt = (step * 2.0).min(1.0);
                }
                Err(depth) => {
                    dt = step * 0.5;
                    if dt * len < MIN_STEP {
                        return Err(Error::Continuation {
                            depth,
                            location: a + (b - a) * t,
                        });
                    }
                }
            }
        }
    }
    Ok(History { entries: current })
}

/// Moves `z_0` to `target` and re-solves each deeper entry near its old
/// value. Returns the failing depth when the tracking test does not hold.
fn track_step(
    p: &ComplexPolynomial,
    current: &[Complex64],
    target: Complex64,
) -> std::result::Result<Vec<Complex64>, usize> {
    let mut next = Vec::with_capacity(current.len());
    next.push(target);
    for i in 1..current.len() {
        let roots = preimages(p, next[i - 1]).map_err(|_| i)?;
        let old = current[i];
        let mut order: Vec<Complex64> = roots;
        order.sort_by(|x, y| (x - old).norm().total_cmp(&(y - old).norm()));
        let best = order[0];
        let moved = (best - old).norm();
        let separation = order[1..]
            .iter()
            .map(|r| (r - best).norm())
            .fold(f64::INFINITY, f64::min);
        if !(moved <= TRACK_RATIO * separation) {
            return Err(i);
        }
        next.push(best);
    }
    Ok(next)
}

/// `([w_0], [w_{-1}], ...)` read from an atlas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentLabel {
    pub ids: Vec<usize>,
    /// First depth whose entry is not in a resolved component.
    pub cutoff: Option<usize>,
    /// `p_*([w_{-i-1}]) = [w_{-i}]` for every labelled step.
    pub compatible: bool,
}

impl ComponentLabel {
    pub fn is_constant(&self) -> bool {
        self.ids.windows(2).all(|w| w[0] == w[1])
    }
}

pub fn component_label(p: &ComplexPolynomial, h: &History, atlas: &ComponentAtlas) -> ComponentLabel {
    let map = component_map(p, atlas);
    let mut ids = Vec::new();
    let mut cutoff = None;
    for (i, &z) in h.entries.iter().enumerate() {
        match atlas.component_at(z) {
            Some(id) => ids.push(id),
            None => {
                cutoff = Some(i);
                break;
            }
        }
    }
    let compatible = ids
        .windows(2)
        .all(|w| map.get(&w[1]) == Some(&ComponentTarget::Resolved(w[0])));
    ComponentLabel {
        ids,
        cutoff,
        compatible,
    }
}
