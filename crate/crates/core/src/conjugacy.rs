//! The conjugacy between the distinguished component of the natural
//! extension and the cone model.
//!
//! Level curves `C_0 = Gamma`, `C_1 = Gamma'`, ... come from the pullback
//! tower and `C_i(theta)` is sent to the model circle of radius
//! `r^{1/n^i}` at angle `theta`. Inside `A_0` points are joined to the two
//! boundary curves along log-polar segments around `z*`; on `A_i` the map is
//! the `n`th root of its value at `p(w)` nearest the tower's angle for `w`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fatou::{classify_point, default_level, equipotential, ClosedCurve, Equipotential, ImmediateBasin, PullbackTower};
use crate::natural_extension::{sorted_preimages, History};
use crate::poly::ComplexPolynomial;
use crate::solenoid::{encode_history_p0, ConePoint};

pub const DEFAULT_MODEL_RADIUS: f64 = 0.25;
pub const DEFAULT_RESOLUTION: usize = 4096;
pub const LEVEL_TOLERANCE: f64 = 1e-6;
pub const INTERPOLATION: &str = "log-polar-segment";
const SEGMENT_SLACK: f64 = 1e-9;
const FIXED_TOLERANCE: f64 = 1e-12;
const MAX_ORBIT: usize = 256;
const DOCUMENT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusModel {
    pub gamma: ClosedCurve,
    pub gamma_prime: ClosedCurve,
    pub radius: f64,
    pub degree: usize,
    pub fixed_point: Complex64,
    /// `max_j |p(Gamma'(theta_j)) - Gamma(n theta_j)|`.
    pub residual: f64,
}

impl AnnulusModel {
    pub fn inner_radius(&self) -> f64 {
        self.radius.powf(1.0 / self.degree as f64)
    }
}

/// `Gamma` is the equipotential at `level` (or the default level), `Gamma'`
/// its pullback inside `Omega`.
pub fn build_annulus(
    basin: &ImmediateBasin,
    level: Option<f64>,
    resolution: usize,
    radius: f64,
) -> Result<AnnulusModel> {
    let level = match level {
        Some(s) => s,
        None => default_level(basin)?,
    };
    let base = equipotential(basin, level, resolution)?;
    annulus_from_equipotential(basin, &base, radius)
}

/// As `build_annulus` with an explicit curve `Gamma`.
pub fn annulus_from_curve(basin: &ImmediateBasin, gamma: ClosedCurve, radius: f64) -> Result<AnnulusModel> {
    let base = Equipotential {
        curve: gamma,
        level: f64::NAN,
        events: Vec::new(),
    };
    annulus_from_equipotential(basin, &base, radius)
}

fn annulus_from_equipotential(basin: &ImmediateBasin, base: &Equipotential, radius: f64) -> Result<AnnulusModel> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::Precondition(format!("model radius {radius} not in (0, 1)")));
    }
    let p = &basin.polynomial;
    let gamma = &base.curve;
    require_in_basin(p, gamma)?;
    if gamma.winding_number(basin.fixed_point) != 1 {
        return Err(Error::Precondition("Gamma does not wind once around the fixed point".into()));
    }
    for c in basin.free_critical_points() {
        if !gamma.encloses(p.eval(c)) {
            return Err(Error::Precondition(format!("critical value {} not inside Gamma", p.eval(c))));
        }
    }
    let mut tower = PullbackTower::new(basin.degree, base);
    tower.push_level(p)?;
    let gamma_prime = tower.top().clone();
    require_in_basin(p, &gamma_prime)?;
    if !gamma_prime.encloses(basin.fixed_point) {
        return Err(Error::Precondition("Gamma' does not surround the fixed point".into()));
    }
    Ok(AnnulusModel {
        gamma: gamma.clone(),
        gamma_prime,
        radius,
        degree: basin.degree,
        fixed_point: basin.fixed_point,
        residual: tower.lift_residuals[1],
    })
}

fn require_in_basin(p: &ComplexPolynomial, curve: &ClosedCurve) -> Result<()> {
    let escape = 2.0 * p.escape_radius().max(p.coefficient_bound()).max(1.0);
    for &z in curve.samples() {
        if !classify_point(p, z, escape, 2000)?.is_bounded() {
            return Err(Error::Precondition(format!("curve leaves the filled Julia set at {z}")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelTable {
    pub level: usize,
    pub model_radius: f64,
    #[serde(with = "complex_pairs")]
    pub samples: Vec<Complex64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyMap {
    pub polynomial: ComplexPolynomial,
    pub fixed_point: Complex64,
    pub degree: usize,
    pub radius: f64,
    /// `C_0, ..., C_L`.
    pub curves: Vec<ClosedCurve>,
    /// Tower coherence residual at each level.
    pub residuals: Vec<f64>,
    cells: Vec<SegmentCell>,
}

/// Log-polar data of the cell between samples `j`, `j + 1` of `A_0`.
#[derive(Clone, Debug, PartialEq)]
struct SegmentCell {
    log_a: Complex64,
    d0: Complex64,
    d1: Complex64,
    e: Complex64,
}

fn segment_cells(outer: &ClosedCurve, inner: &ClosedCurve, z: Complex64) -> Vec<SegmentCell> {
    (0..outer.resolution())
        .map(|j| {
            let a0 = outer.at_index(j) - z;
            let b0 = outer.at_index(j + 1) - z;
            SegmentCell {
                log_a: a0.ln(),
                d0: ((inner.at_index(j) - z) / a0).ln(),
                d1: ((inner.at_index(j + 1) - z) / b0).ln(),
                e: (b0 / a0).ln(),
            }
        })
        .collect()
}

fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Even-odd rule for the polygon through `samples`.
fn crosses_odd(samples: &[Complex64], w: Complex64) -> bool {
    let m = samples.len();
    let mut inside = false;
    for j in 0..m {
        let a = samples[j];
        let b = samples[(j + 1) % m];
        if (a.im > w.im) != (b.im > w.im) {
            let x = a.re + (w.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if w.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

impl ConjugacyMap {
    /// The map on `A_0` alone (curves `Gamma`, `Gamma'`).
    pub fn new(p: &ComplexPolynomial, annulus: &AnnulusModel) -> Result<Self> {
        let mut map = Self {
            polynomial: p.clone(),
            fixed_point: annulus.fixed_point,
            degree: annulus.degree,
            radius: annulus.radius,
            curves: vec![annulus.gamma.clone(), annulus.gamma_prime.clone()],
            residuals: Vec::new(),
            cells: segment_cells(&annulus.gamma, &annulus.gamma_prime, annulus.fixed_point),
        };
        map.residuals = vec![map.level_residual(0)?, map.level_residual(1)?];
        Ok(map)
    }

    /// Number of annuli `A_0, ..., A_{L-1}` covered.
    pub fn levels(&self) -> usize {
        self.curves.len() - 1
    }

    pub fn resolution(&self) -> usize {
        self.curves[0].resolution()
    }

    pub fn model_radius(&self, level: usize) -> f64 {
        self.radius.powf((self.degree as f64).powi(-(level as i32)))
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    fn model_value(&self, level: usize, theta: f64) -> Complex64 {
        Complex64::from_polar(self.model_radius(level), TAU * theta)
    }

    /// Level 0: `| |psi(C_0(theta_j))| - r |`. Level `i`:
    /// `max_j |psi(p(C_i(theta_j))) - psi(C_i(theta_j))^n|`.
    fn level_residual(&self, level: usize) -> Result<f64> {
        let curve = &self.curves[level];
        let m = curve.resolution();
        let values = (0..m)
            .into_par_iter()
            .map(|j| -> Result<f64> {
                let w = curve.at_index(j);
                if level == 0 {
                    return Ok((self.psi0(w)?.norm() - self.radius).abs());
                }
                let image = self.psi_bar(self.polynomial.eval(w))?;
                let model = self.model_value(level, j as f64 / m as f64);
                Ok((image - model.powu(self.degree as u32)).norm())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(values.into_iter().fold(0.0, f64::max))
    }

    /// `psi_bar_0` on the closed annulus between `Gamma` and `Gamma'`.
    pub fn psi0(&self, w: Complex64) -> Result<Complex64> {
        let (modulus, theta) = self.psi0_polar(w)?;
        Ok(Complex64::from_polar(modulus, TAU * theta))
    }

    /// `psi_bar_0(w)` as `(modulus, angle in turns)`.
    pub fn psi0_polar(&self, w: Complex64) -> Result<(f64, f64)> {
        let (theta, t) = self.annulus_coordinates(w)?;
        let n = self.degree as f64;
        Ok((self.radius.powf(1.0 + t * (1.0 / n - 1.0)), theta))
    }

    /// `(theta, t)` with `w` on the log-polar segment from `Gamma(theta)`
    /// (`t = 0`) to `Gamma'(theta)` (`t = 1`).
    pub fn annulus_coordinates(&self, w: Complex64) -> Result<(f64, f64)> {
        let z = self.fixed_point;
        if w == z {
            return Err(Error::OutsideAnnulus { point: w });
        }
        let m = self.cells.len();
        let lw = (w - z).ln();
        let mut best: Option<(f64, f64, f64)> = None;
        for (j, cell) in self.cells.iter().enumerate() {
            let mut l = lw - cell.log_a;
            l.im = wrap_angle(l.im);
            // Cross product of the segment direction with the offset of w.
            let f = |s: f64| {
                let d = cell.d0 * (1.0 - s) + cell.d1 * s;
                let off = l - cell.e * s;
                (d.conj() * off).im
            };
            let (mut lo, mut hi) = (0.0, 1.0);
            let (flo, fhi) = (f(lo), f(hi));
            let eps = 1e-13 * (cell.d0.norm() + cell.d1.norm());
            let s = if flo.abs() <= eps {
                0.0
            } else if fhi.abs() <= eps {
                1.0
            } else if flo * fhi > 0.0 {
                continue;
            } else {
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if (f(mid) > 0.0) == (flo > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let d = cell.d0 * (1.0 - s) + cell.d1 * s;
            let off = l - cell.e * s;
            let t = (d.conj() * off).re / d.norm_sqr();
            let miss = (off - d * t).norm();
            if (-SEGMENT_SLACK..=1.0 + SEGMENT_SLACK).contains(&t) && best.is_none_or(|b| miss < b.2) {
                best = Some(((j as f64 + s) / m as f64, t.clamp(0.0, 1.0), miss));
            }
        }
        match best {
            Some((theta, t, miss)) if miss < 1e-6 => {
                let t = if t < 1e-12 { 0.0 } else { t };
                Ok((theta.rem_euclid(1.0), t))
            }
            _ => Err(Error::OutsideAnnulus { point: w }),
        }
    }

    /// Strictly inside `Gamma` (the region that never enters the tower).
    pub fn inside_gamma(&self, w: Complex64) -> bool {
        let gamma = &self.curves[0];
        crosses_odd(gamma.samples(), w) && gamma.distance(w).0 > SEGMENT_SLACK * w.norm().max(1.0)
    }

    /// Index `i` of the annulus `A_i` containing `w`.
    pub fn level_of(&self, w: Complex64) -> Result<usize> {
        let mut z = w;
        for i in 0..MAX_ORBIT {
            if self.inside_gamma(z) {
                return if i == 0 {
                    Err(Error::OutsideAnnulus { point: w })
                } else {
                    Ok(i - 1)
                };
            }
            z = self.polynomial.eval(z);
        }
        Err(Error::OutsideAnnulus { point: w })
    }

    /// `psi_bar` on `A_0 u A_1 u ...`.
    pub fn psi_bar(&self, w: Complex64) -> Result<Complex64> {
        let level = self.level_of(w)?;
        let mut orbit = vec![w];
        for _ in 0..level {
            let next = self.polynomial.eval(*orbit.last().expect("nonempty"));
            orbit.push(next);
        }
        let base = *orbit.last().expect("nonempty");
        if !self.curves[1].encloses(base) && self.curves[1].distance(base).0 > 1e-9 {
            return Err(Error::OutsideAnnulus { point: w });
        }
        let mut v = self.psi0(base)?;
        for i in (0..level).rev() {
            v = self.select_root(v, orbit[i], level - i)?;
        }
        Ok(v)
    }

    /// The `n`th root of `v` whose angle is nearest the tower angle of `w`.
    fn select_root(&self, v: Complex64, w: Complex64, level: usize) -> Result<Complex64> {
        let lo = level.min(self.levels());
        let hi = (level + 1).min(self.levels());
        let (d_lo, t_lo) = self.curves[lo].distance(w);
        let (d_hi, t_hi) = self.curves[hi].distance(w);
        let theta = if d_lo <= d_hi { t_lo } else { t_hi };
        let n = self.degree as f64;
        let base_arg = v.arg();
        let mut ranked: Vec<(f64, u32)> = (0..self.degree as u32)
            .map(|k| {
                let angle = (base_arg + TAU * k as f64) / n;
                let gap = (angle - TAU * theta).rem_euclid(TAU);
                (gap.min(TAU - gap), k)
            })
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        if self.degree > 1 && ranked[0].0 > 0.8 * PI / n {
            return Err(Error::LiftAmbiguity {
                level,
                parameter: theta,
            });
        }
        let k = ranked[0].1;
        Ok(Complex64::from_polar(
            v.norm().powf(1.0 / n),
            (base_arg + TAU * k as f64) / n,
        ))
    }

    /// Adds `levels` more annuli to the tower.
    pub fn extend_tower(&self, levels: usize) -> Result<Self> {
        let mut out = self.clone();
        let base = Equipotential {
            curve: self.curves[0].clone(),
            level: f64::NAN,
            events: Vec::new(),
        };
        let mut tower = PullbackTower::new(self.degree, &base);
        tower.curves = self.curves.clone();
        tower.lift_residuals = vec![0.0; self.curves.len()];
        for _ in 0..levels {
            tower.push_level(&self.polynomial)?;
            out.curves = tower.curves.clone();
            let level = out.curves.len() - 1;
            let residual = out.level_residual(level)?;
            out.residuals.push(residual);
        }
        Ok(out)
    }

    /// The cone point of a history in the distinguished component.
    pub fn psi_hat(&self, h: &History) -> Result<ConePoint> {
        let n = self.degree as u32;
        let entries = h.entries();
        if entries.iter().all(|w| (w - self.fixed_point).norm() <= FIXED_TOLERANCE) {
            return Ok(ConePoint::apex(n, h.depth()));
        }
        let m = entries
            .iter()
            .position(|&w| !self.inside_gamma(w))
            .ok_or(Error::DepthInsufficient { depth: h.depth() })?;
        let level = self.level_of(entries[m])?;
        let mut model = vec![self.psi_bar(entries[m])?];
        for (j, &w) in entries.iter().enumerate().skip(m + 1) {
            let v = self.select_root(*model.last().expect("nonempty"), w, level + j - m)?;
            model.push(v);
        }
        let mut cone = encode_history_p0(&History::from_entries(model)?, n)?;
        for _ in 0..m {
            cone = cone.shift_extend();
        }
        Ok(cone)
    }

    /// `max |psi_hat(shift h) - shift(psi_hat h)|` over the samples.
    pub fn verify_conjugacy(&self, samples: &[History]) -> Result<ConjugacyReport> {
        let residuals = samples
            .par_iter()
            .map(|h| -> Result<f64> {
                let lhs = self.psi_hat(&h.shift(&self.polynomial))?;
                let rhs = self.psi_hat(h)?.shift();
                Ok(lhs.distance(&rhs))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut report = ConjugacyReport {
            samples: samples.len(),
            max: 0.0,
            mean: 0.0,
            argmax: None,
        };
        for (i, r) in residuals.iter().enumerate() {
            report.mean += r / samples.len() as f64;
            if report.argmax.is_none() || *r > report.max {
                report.max = *r;
                report.argmax = Some(i);
            }
        }
        Ok(report)
    }

    /// Histories whose head is drawn from the annuli `A_j`, `j < L`, with
    /// uniformly random backward branches below it.
    pub fn sample_histories(&self, count: usize, depth: usize, seed: u64) -> Result<Vec<History>> {
        if depth == 0 {
            return Err(Error::Precondition("sample depth must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = self.fixed_point;
        (0..count)
            .map(|_| {
                let j = rng.gen_range(0..self.levels());
                let theta: f64 = rng.gen();
                let t: f64 = rng.gen_range(0.05..0.95);
                let a = self.curves[j].interpolate(theta) - z;
                let b = self.curves[j + 1].interpolate(theta) - z;
                let mut w = z + a * ((b / a).ln() * t).exp();
                let mut entries = vec![w];
                for _ in 0..depth {
                    let roots = sorted_preimages(&self.polynomial, w)?;
                    w = roots[rng.gen_range(0..roots.len())];
                    entries.push(w);
                }
                History::from_entries(entries)
            })
            .collect()
    }

    pub fn tables(&self) -> Vec<LevelTable> {
        self.curves
            .iter()
            .enumerate()
            .map(|(i, c)| LevelTable {
                level: i,
                model_radius: self.model_radius(i),
                samples: c.samples().to_vec(),
                residual: self.residuals[i],
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = ConjugacyDocument {
            version: DOCUMENT_VERSION,
            interpolation: INTERPOLATION.to_string(),
            polynomial: self.polynomial.to_string(),
            fixed_point: [self.fixed_point.re, self.fixed_point.im],
            degree: self.degree,
            radius: self.radius,
            levels: self.tables(),
        };
        serde_json::to_string(&doc).expect("conjugacy map serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ConjugacyDocument = serde_json::from_str(text)?;
        if doc.version != DOCUMENT_VERSION {
            return Err(Error::Document(format!("unsupported version {}", doc.version)));
        }
        if doc.interpolation != INTERPOLATION {
            return Err(Error::Document(format!("unknown interpolation {:?}", doc.interpolation)));
        }
        let polynomial: ComplexPolynomial = doc.polynomial.parse()?;
        polynomial.require_dynamical()?;
        if doc.degree < 2 || doc.degree > polynomial.degree() {
            return Err(Error::Document(format!("degree {} out of range", doc.degree)));
        }
        if !(doc.radius > 0.0 && doc.radius < 1.0) {
            return Err(Error::Document(format!("model radius {} not in (0, 1)", doc.radius)));
        }
        if doc.levels.len() < 2 {
            return Err(Error::Document("a conjugacy map needs at least two level tables".into()));
        }
        let m = doc.levels[0].samples.len();
        let mut curves = Vec::with_capacity(doc.levels.len());
        let mut residuals = Vec::with_capacity(doc.levels.len());
        for (i, table) in doc.levels.into_iter().enumerate() {
            if table.level != i || table.samples.len() != m {
                return Err(Error::Document(format!("level table {i} is inconsistent")));
            }
            curves.push(ClosedCurve::new(table.samples).map_err(|e| Error::Document(e.to_string()))?);
            residuals.push(table.residual);
        }
        let fixed_point = Complex64::new(doc.fixed_point[0], doc.fixed_point[1]);
        if !fixed_point.is_finite() {
            return Err(Error::Document("fixed point is not finite".into()));
        }
        let cells = segment_cells(&curves[0], &curves[1], fixed_point);
        Ok(Self {
            polynomial,
            fixed_point,
            degree: doc.degree,
            radius: doc.radius,
            curves,
            residuals,
            cells,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyReport {
    pub samples: usize,
    pub max: f64,
    pub mean: f64,
    /// Index of the worst sample.
    pub argmax: Option<usize>,
}

/// Smallest cone distance between two of the points.
pub fn min_pairwise_distance(points: &[ConePoint]) -> f64 {
    let depth = points.iter().map(|c| c.point.depth()).min().unwrap_or(0);
    let decoded: Vec<History> = points
        .iter()
        .map(|c| crate::solenoid::decode(c, depth).expect("depth within range"))
        .collect();
    (0..decoded.len())
        .into_par_iter()
        .map(|i| {
            decoded[i + 1..]
                .iter()
                .map(|h| decoded[i].distance(h))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConjugacyDocument {
    version: u32,
    interpolation: String,
    polynomial: String,
    fixed_point: [f64; 2],
    degree: usize,
    radius: f64,
    levels: Vec<LevelTable>,
}

mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> (ImmediateBasin, ConjugacyMap) {
        let p = ComplexPolynomial::monomial(2);
        let b = ImmediateBasin::locate(&p, c(0.0, 0.0)).unwrap();
        let a = build_annulus(&b, Some(0.5), 512, 0.5).unwrap();
        let map = ConjugacyMap::new(&p, &a).unwrap();
        (b, map)
    }

    fn tenth(m: usize) -> (ImmediateBasin, AnnulusModel) {
        let p = ComplexPolynomial::quadratic(c(0.1, 0.0));
        let b = ImmediateBasin::locate(&p, c(0.1, 0.0)).unwrap();
        let a = build_annulus(&b, None, m, DEFAULT_MODEL_RADIUS).unwrap();
        (b, a)
    }

    #[test]
    fn square_annulus_is_exact() {
        let (_, map) = square();
        for &w in map.curves[1].samples() {
            assert!((w.norm() - 0.5f64.sqrt()).abs() < 1e-15);
        }
        for w in [c(0.6, 0.0), c(0.0, -0.55), c(-0.4, 0.41)] {
            assert!((map.psi0(w).unwrap() - w).norm() < 1e-12);
        }
        assert!(map.psi0(c(0.3, 0.0)).is_err());
        assert!(map.psi0(c(0.9, 0.0)).is_err());
    }

    #[test]
    fn gamma_maps_to_model_circle() {
        let (_, a) = tenth(1024);
        let p = ComplexPolynomial::quadratic(c(0.1, 0.0));
        let map = ConjugacyMap::new(&p, &a).unwrap();
        for &w in a.gamma.samples().iter().step_by(37) {
            assert_eq!(map.psi0_polar(w).unwrap().0, DEFAULT_MODEL_RADIUS);
        }
    }

    #[test]
    fn annulus_outside_filled_julia_set_fails() {
        let (b, _) = tenth(64);
        let big = ClosedCurve::circle(b.fixed_point, 3.0, 64).unwrap();
        assert!(annulus_from_curve(&b, big, 0.25).is_err());
    }

    #[test]
    fn inner_boundary_conjugacy() {
        let (b, a) = tenth(4096);
        assert!(a.residual < 1e-6);
        let map = ConjugacyMap::new(&b.polynomial, &a).unwrap();
        let worst = a
            .gamma_prime
            .samples()
            .par_iter()
            .map(|&w| {
                let lhs = map.psi0(b.polynomial.eval(w)).unwrap();
                (lhs - map.psi0(w).unwrap().powu(2)).norm()
            })
            .reduce(|| 0.0, f64::max);
        assert!(worst <= 1e-6, "{worst}");
    }

    #[test]
    fn tower_levels_are_coherent() {
        let (b, a) = tenth(1024);
        let map = ConjugacyMap::new(&b.polynomial, &a).unwrap();
        assert_eq!(map.extend_tower(0).unwrap(), map);
        let map = map.extend_tower(4).unwrap();
        assert_eq!(map.levels(), 5);
        assert!(map.max_residual() <= LEVEL_TOLERANCE, "{:?}", map.residuals);
    }

    #[test]
    fn fixed_history_maps_to_cone_point() {
        let (b, a) = tenth(256);
        let map = ConjugacyMap::new(&b.polynomial, &a).unwrap();
        let cone = map.psi_hat(&History::fixed(b.fixed_point, 5)).unwrap();
        assert!(cone.is_apex());
        let near = History::fixed(b.fixed_point + c(1e-3, 0.0), 0);
        assert!(matches!(map.psi_hat(&near), Err(Error::DepthInsufficient { .. })));
    }

    #[test]
    fn square_histories_map_by_polar_identity() {
        let (_, map) = square();
        let map = map.extend_tower(3).unwrap();
        let samples = map.sample_histories(20, 6, 3).unwrap();
        for h in &samples {
            let cone = map.psi_hat(h).unwrap();
            let back = crate::solenoid::decode(&cone, 6).unwrap();
            assert!(back.distance(h) < 1e-12, "{}", back.distance(h));
        }
        assert!(map.verify_conjugacy(&samples).unwrap().max < 1e-12);
    }

    #[test]
    fn conjugacy_residual_on_random_histories() {
        let (b, a) = tenth(1024);
        let map = ConjugacyMap::new(&b.polynomial, &a).unwrap().extend_tower(4).unwrap();
        let samples = map.sample_histories(60, 8, 11).unwrap();
        let report = map.verify_conjugacy(&samples).unwrap();
        assert!(report.max <= 1e-5, "{report:?}");
        let cones: Vec<ConePoint> = samples.iter().map(|h| map.psi_hat(h).unwrap()).collect();
        assert!(min_pairwise_distance(&cones) >= 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let (b, a) = tenth(128);
        let map = ConjugacyMap::new(&b.polynomial, &a).unwrap().extend_tower(1).unwrap();
        let back = ConjugacyMap::from_json(&map.to_json()).unwrap();
        assert_eq!(back, map);
        assert!(ConjugacyMap::from_json("{}").is_err());
    }
}
