//! Grid surrogate for the interior components of the filled Julia set.
//!
//! Bounded cells are grouped by the attracting cycle they converge to and
//! by their phase along that cycle, then split into 4-connected pieces.
//! Two Fatou components that touch at a pinch point carry different phases
//! in the cases we care about, so the phase keeps them apart even where the
//! grid cannot resolve the pinch.

use std::collections::{BTreeMap, VecDeque};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{find_attracting_cycles, preimages, ComplexPolynomial, Cycle};

pub const ATLAS_VERSION: u32 = 1;
const MAX_CELLS: usize = 1 << 26;
const MIN_COMPONENT_CELLS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let g = Self {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        };
        g.validate()?;
        Ok(g)
    }

    /// `n x n` cells over `[-r, r]^2`.
    pub fn square(radius: f64, n: usize) -> Result<Self> {
        Self::new(-radius, radius, -radius, radius, n, n)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.x_min < self.x_max) || !(self.y_min < self.y_max) {
            return Err(Error::Precondition("grid bounds must be finite and ordered".into()));
        }
        if self.nx == 0 || self.ny == 0 || self.nx.saturating_mul(self.ny) > MAX_CELLS {
            return Err(Error::Precondition(format!(
                "grid resolution {}x{} out of range",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    /// Center of cell `index`; row 0 is the top edge (`y_max`).
    pub fn center(&self, index: usize) -> Complex64 {
        let (i, j) = (index % self.nx, index / self.nx);
        Complex64::new(
            self.x_min + (i as f64 + 0.5) * self.dx(),
            self.y_max - (j as f64 + 0.5) * self.dy(),
        )
    }

    pub fn cell_of(&self, z: Complex64) -> Option<usize> {
        let fx = (z.re - self.x_min) / self.dx();
        let fy = (self.y_max - z.im) / self.dy();
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        (i < self.nx && j < self.ny).then_some(j * self.nx + i)
    }

    fn neighbours(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = (index % self.nx, index / self.nx);
        let mut out = [None; 4];
        if i > 0 {
            out[0] = Some(index - 1);
        }
        if i + 1 < self.nx {
            out[1] = Some(index + 1);
        }
        if j > 0 {
            out[2] = Some(index - self.nx);
        }
        if j + 1 < self.ny {
            out[3] = Some(index + self.nx);
        }
        out.into_iter().flatten()
    }
}

/// `x_min,x_max,y_min,y_max,nx,ny`.
impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::parse(0, "grid needs x_min,x_max,y_min,y_max,nx,ny"));
        }
        let mut bounds = [0.0; 4];
        for (k, b) in bounds.iter_mut().enumerate() {
            *b = parts[k]
                .parse()
                .map_err(|_| Error::parse(0, format!("bad grid bound {:?}", parts[k])))?;
        }
        let nx = parts[4]
            .parse()
            .map_err(|_| Error::parse(0, "bad grid width"))?;
        let ny = parts[5]
            .parse()
            .map_err(|_| Error::parse(0, "bad grid height"))?;
        Grid::new(bounds[0], bounds[1], bounds[2], bounds[3], nx, ny)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellLabel {
    Exterior,
    /// Bounded but not attributed to a kept component.
    Unresolved,
    Component(usize),
}

impl CellLabel {
    fn code(self) -> i64 {
        match self {
            CellLabel::Exterior => -1,
            CellLabel::Unresolved => -2,
            CellLabel::Component(id) => id as i64,
        }
    }

    fn from_code(code: i64, components: usize) -> Result<Self> {
        match code {
            -1 => Ok(CellLabel::Exterior),
            -2 => Ok(CellLabel::Unresolved),
            id if id >= 0 && (id as u64) < components as u64 => Ok(CellLabel::Component(id as usize)),
            other => Err(Error::Document(format!("label {other} out of range"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub id: usize,
    /// Cell center converging fastest to the attracting cycle.
    pub representative: Complex64,
    pub cells: usize,
    /// Bounding-box diagonal of the component's cells.
    pub diameter: f64,
    pub cycle: usize,
    pub phase: usize,
    pub cycle_point: Option<Complex64>,
    /// Degree of `p` on the component.
    pub degree: u32,
}

#[derive(Clone, Copy, Debug)]
pub struct AtlasOptions {
    pub max_iter: usize,
    pub max_period: usize,
}

impl Default for AtlasOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            max_period: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentAtlas {
    pub polynomial: ComplexPolynomial,
    pub grid: Grid,
    pub max_iter: usize,
    pub cycles: Vec<Cycle>,
    pub labels: Vec<CellLabel>,
    pub components: Vec<ComponentRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum ComponentTarget {
    Resolved(usize),
    Unresolved,
}

impl ComponentAtlas {
    pub fn label_at(&self, z: Complex64) -> CellLabel {
        match self.grid.cell_of(z) {
            Some(idx) => self.labels[idx],
            None => CellLabel::Exterior,
        }
    }

    pub fn component_at(&self, z: Complex64) -> Option<usize> {
        match self.label_at(z) {
            CellLabel::Component(id) => Some(id),
            _ => None,
        }
    }

    /// Components containing a point of an attracting cycle.
    pub fn cycle_components(&self) -> Vec<usize> {
        self.components
            .iter()
            .filter(|c| c.cycle_point.is_some())
            .map(|c| c.id)
            .collect()
    }

    pub fn cells_of(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, l)| **l == CellLabel::Component(id))
            .map(|(i, _)| i)
    }
}

pub fn interior_components(p: &ComplexPolynomial, grid: Grid) -> Result<ComponentAtlas> {
    interior_components_with(p, grid, AtlasOptions::default())
}

#[derive(Clone, Copy)]
enum Fate {
    Escaped,
    Stuck,
    Captured { cycle: usize, phase: usize, entry: usize },
}

pub fn interior_components_with(
    p: &ComplexPolynomial,
    grid: Grid,
    options: AtlasOptions,
) -> Result<ComponentAtlas> {
    p.require_dynamical()?;
    grid.validate()?;
    let search = find_attracting_cycles(p, options.max_period, 16)?;
    let cycles = search.cycles;
    let radii = capture_radii(p, &cycles);
    let escape = p.escape_radius();

    let fates: Vec<Fate> = (0..grid.cell_count())
        .into_par_iter()
        .map(|idx| fate(p, grid.center(idx), &cycles, &radii, escape, options.max_iter))
        .collect();

    // 4-connected labelling within each (cycle, phase) class.
    let mut raw: Vec<Option<usize>> = vec![None; fates.len()];
    let mut pieces: Vec<Vec<usize>> = Vec::new();
    for start in 0..fates.len() {
        let Fate::Captured { cycle, phase, .. } = fates[start] else {
            continue;
        };
        if raw[start].is_some() {
            continue;
        }
        let piece = pieces.len();
        let mut members = vec![start];
        raw[start] = Some(piece);
        let mut queue = VecDeque::from([start]);
        while let Some(cell) = queue.pop_front() {
            for nb in grid.neighbours(cell) {
                if raw[nb].is_none() {
                    if let Fate::Captured { cycle: c2, phase: f2, .. } = fates[nb] {
                        if c2 == cycle && f2 == phase {
                            raw[nb] = Some(piece);
                            members.push(nb);
                            queue.push_back(nb);
                        }
                    }
                }
            }
        }
        pieces.push(members);
    }

    let mut labels: Vec<CellLabel> = fates
        .iter()
        .map(|f| match f {
            Fate::Escaped => CellLabel::Exterior,
            _ => CellLabel::Unresolved,
        })
        .collect();
    let mut components = Vec::new();
    for members in pieces.iter().filter(|m| m.len() >= MIN_COMPONENT_CELLS) {
        let id = components.len();
        for &cell in members {
            labels[cell] = CellLabel::Component(id);
        }
        let (rep_cell, cycle, phase) = members
            .iter()
            .filter_map(|&cell| match fates[cell] {
                Fate::Captured { cycle, phase, entry } => Some((entry, cell, cycle, phase)),
                _ => None,
            })
            .min()
            .map(|(_, cell, cycle, phase)| (cell, cycle, phase))
            .expect("pieces only contain captured cells");
        let (mut lo, mut hi) = (grid.center(members[0]), grid.center(members[0]));
        for &cell in members {
            let z = grid.center(cell);
            lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
            hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
        }
        let diameter = (hi - lo).norm() + grid.dx().hypot(grid.dy());
        components.push(ComponentRecord {
            id,
            representative: grid.center(rep_cell),
            cells: members.len(),
            diameter,
            cycle,
            phase,
            cycle_point: None,
            degree: 1,
        });
    }

    for cycle in &cycles {
        for &z in &cycle.points {
            match grid.cell_of(z).map(|c| labels[c]) {
                Some(CellLabel::Component(id)) => components[id].cycle_point = Some(z),
                _ => return Err(Error::Resolution { point: z }),
            }
        }
    }

    let mut atlas = ComponentAtlas {
        polynomial: p.clone(),
        grid,
        max_iter: options.max_iter,
        cycles,
        labels,
        components,
    };
    assign_degrees(&mut atlas)?;
    Ok(atlas)
}

fn capture_radii(p: &ComplexPolynomial, cycles: &[Cycle]) -> Vec<f64> {
    let all: Vec<Complex64> = cycles.iter().flat_map(|c| c.points.iter().copied()).collect();
    let mut sep = f64::INFINITY;
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            sep = sep.min((a - b).norm());
        }
    }
    cycles
        .iter()
        .map(|cycle| {
            let mut r = 1e-2f64.min(0.25 * sep);
            for _ in 0..40 {
                let contracts = cycle.points.iter().all(|&c| {
                    (0..16).all(|k| {
                        let w = c + Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / 16.0);
                        (p.iterate(w, cycle.period()) - c).norm() <= 0.5 * r
                    })
                });
                if contracts {
                    break;
                }
                r *= 0.5;
            }
            r
        })
        .collect()
}

fn fate(
    p: &ComplexPolynomial,
    mut z: Complex64,
    cycles: &[Cycle],
    radii: &[f64],
    escape: f64,
    max_iter: usize,
) -> Fate {
    for n in 0..=max_iter {
        if !(z.norm() <= escape) {
            return Fate::Escaped;
        }
        for (j, (cycle, &r)) in cycles.iter().zip(radii).enumerate() {
            if let Some(i) = cycle.points.iter().position(|&c| (z - c).norm() <= r) {
                let q = cycle.period();
                return Fate::Captured {
                    cycle: j,
                    phase: (i + q - n % q) % q,
                    entry: n,
                };
            }
        }
        z = p.eval(z);
    }
    Fate::Stuck
}

fn assign_degrees(atlas: &mut ComponentAtlas) -> Result<()> {
    let p = atlas.polynomial.clone();
    let crit = p.critical_points()?;
    let map = component_map(&p, atlas);
    for id in 0..atlas.components.len() {
        let inside = crit
            .iter()
            .filter(|&&c| atlas.component_at(c) == Some(id))
            .count() as u32;
        let degree = if map.get(&id) == Some(&ComponentTarget::Resolved(id)) {
            1 + inside
        } else {
            // Sheet count at the representative's image.
            let image = p.eval(atlas.components[id].representative);
            let sheets = preimages(&p, image)?
                .into_iter()
                .filter(|&w| atlas.component_at(w) == Some(id))
                .count() as u32;
            if sheets == 0 {
                1 + inside
            } else {
                sheets
            }
        };
        atlas.components[id].degree = degree;
    }
    Ok(())
}

/// The map induced by `p` on atlas components, via each representative.
pub fn component_map(p: &ComplexPolynomial, atlas: &ComponentAtlas) -> BTreeMap<usize, ComponentTarget> {
    atlas
        .components
        .iter()
        .map(|c| {
            let target = match atlas.component_at(p.eval(c.representative)) {
                Some(t) => ComponentTarget::Resolved(t),
                None => ComponentTarget::Unresolved,
            };
            (c.id, target)
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct AtlasDocument {
    version: u32,
    polynomial: ComplexPolynomial,
    grid: Grid,
    max_iter: usize,
    cycles: Vec<Cycle>,
    /// `[label, run]` pairs; -1 exterior, -2 unresolved, otherwise a component id.
    labels: Vec<(i64, u64)>,
    components: Vec<ComponentRecord>,
}

impl ComponentAtlas {
    pub fn to_json(&self) -> String {
        let mut runs: Vec<(i64, u64)> = Vec::new();
        for label in &self.labels {
            let code = label.code();
            match runs.last_mut() {
                Some((c, n)) if *c == code => *n += 1,
                _ => runs.push((code, 1)),
            }
        }
        let doc = AtlasDocument {
            version: ATLAS_VERSION,
            polynomial: self.polynomial.clone(),
            grid: self.grid,
            max_iter: self.max_iter,
            cycles: self.cycles.clone(),
            labels: runs,
            components: self.components.clone(),
        };
        serde_json::to_string(&doc).expect("atlas serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: AtlasDocument = serde_json::from_str(text)?;
        if doc.version != ATLAS_VERSION {
            return Err(Error::Document(format!("unsupported atlas version {}", doc.version)));
        }
        doc.grid.validate()?;
        for (k, c) in doc.components.iter().enumerate() {
            if c.id != k {
                return Err(Error::Document(format!("component {k} has id {}", c.id)));
            }
        }
        let total = doc.grid.cell_count() as u64;
        let mut labels = Vec::with_capacity(doc.grid.cell_count());
        let mut seen: u64 = 0;
        for (code, run) in doc.labels {
            seen = seen
                .checked_add(run)
                .filter(|&s| s <= total)
                .ok_or_else(|| Error::Document("label runs exceed the grid".into()))?;
            let label = CellLabel::from_code(code, doc.components.len())?;
            labels.extend(std::iter::repeat(label).take(run as usize));
        }
        if seen != total {
            return Err(Error::Document(format!("label runs cover {seen} of {total} cells")));
        }
        Ok(Self {
            polynomial: doc.polynomial,
            grid: doc.grid,
            max_iter: doc.max_iter,
            cycles: doc.cycles,
            labels,
            components: doc.components,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Brute-force oracle: flood fill of bounded cells (no phase split).
    fn bounded_flood_count(p: &ComplexPolynomial, grid: Grid) -> usize {
        let n = grid.cell_count();
        let bounded: Vec<bool> = (0..n)
            .map(|i| p.iterate(grid.center(i), 200).norm() < 1e-3)
            .collect();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if !bounded[s] || seen[s] {
                continue;
            }
            let mut stack = vec![s];
            seen[s] = true;
            let mut size = 0;
            while let Some(k) = stack.pop() {
                size += 1;
                for nb in grid.neighbours(k) {
                    if bounded[nb] && !seen[nb] {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
            if size >= 2 {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn unit_disk_for_square_map() {
        let p = ComplexPolynomial::monomial(2);
        let grid = Grid::square(2.0, 128).unwrap();
        let atlas = interior_components(&p, grid).unwrap();
        assert_eq!(atlas.components.len(), 1);
        assert_eq!(bounded_flood_count(&p, grid), 1);
        assert_eq!(atlas.components[0].degree, 2);
        assert_eq!(atlas.component_at(c(0.0, 0.0)), Some(0));
        let map = component_map(&p, &atlas);
        assert_eq!(map[&0], ComponentTarget::Resolved(0));
    }

    #[test]
    fn single_component_for_z2_plus_tenth() {
        let p = ComplexPolynomial::quadratic(c(0.1, 0.0));
        let grid = Grid::square(2.0, 128).unwrap();
        let atlas = interior_components(&p, grid).unwrap();
        assert_eq!(atlas.components.len(), 1);
        assert_eq!(atlas.components[0].degree, 2);
    }

    #[test]
    fn basilica_components_swap() {
        let p = ComplexPolynomial::quadratic(c(-1.0, 0.0));
        let grid = Grid::square(2.0, 256).unwrap();
        let atlas = interior_components(&p, grid).unwrap();
        let u0 = atlas.component_at(c(0.0, 0.0)).unwrap();
        let u1 = atlas.component_at(c(-1.0, 0.0)).unwrap();
        assert_ne!(u0, u1);
        assert!(atlas.components.len() > 2);
        let map = component_map(&p, &atlas);
        assert_eq!(map[&u0], ComponentTarget::Resolved(u1));
        assert_eq!(map[&u1], ComponentTarget::Resolved(u0));
        assert_eq!(atlas.components[u0].degree, 2);
        assert_eq!(atlas.components[u1].degree, 1);
        // The satellite around 1 maps onto the component of 0.
        let v1 = atlas.component_at(c(1.0, 0.0)).unwrap();
        assert!(v1 != u0 && v1 != u1);
        assert_eq!(map[&v1], ComponentTarget::Resolved(u0));
    }

    #[test]
    fn images_of_components_stay_bounded() {
        let p = ComplexPolynomial::quadratic(c(-1.0, 0.0));
        let grid = Grid::square(2.0, 128).unwrap();
        let atlas = interior_components(&p, grid).unwrap();
        let map = component_map(&p, &atlas);
        let cyc: Vec<usize> = atlas.cycle_components();
        for comp in &atlas.components {
            let img = p.eval(comp.representative);
            assert!(img.norm() <= 2.0);
            // Iterating the induced map lands in the cycle components.
            let mut id = comp.id;
            for _ in 0..64 {
                match map[&id] {
                    ComponentTarget::Resolved(t) => id = t,
                    ComponentTarget::Unresolved => break,
                }
            }
            if let ComponentTarget::Resolved(_) = map[&id] {
                assert!(cyc.contains(&id));
            }
        }
    }

    #[test]
    fn coarse_grid_reports_resolution_error() {
        // Both cycle points share the single bounded cell of a 3x3 grid.
        let p = ComplexPolynomial::quadratic(c(-1.0, 0.0));
        let grid = Grid::square(6.0, 3).unwrap();
        assert!(matches!(
            interior_components(&p, grid),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn image_in_discarded_region_is_unresolved() {
        let p = ComplexPolynomial::quadratic(c(-1.0, 0.0));
        let mut atlas = interior_components(&p, Grid::square(2.0, 64).unwrap()).unwrap();
        let u0 = atlas.component_at(c(0.0, 0.0)).unwrap();
        let u1 = atlas.component_at(c(-1.0, 0.0)).unwrap();
        for l in atlas.labels.iter_mut() {
            if *l == CellLabel::Component(u0) {
                *l = CellLabel::Unresolved;
            }
        }
        let map = component_map(&p, &atlas);
        assert_eq!(map[&u1], ComponentTarget::Unresolved);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let p = ComplexPolynomial::quadratic(c(-1.0, 0.0));
        let atlas = interior_components(&p, Grid::square(2.0, 64).unwrap()).unwrap();
        let text = atlas.to_json();
        let back = ComponentAtlas::from_json(&text).unwrap();
        assert_eq!(back, atlas);
        assert!(ComponentAtlas::from_json("{}").is_err());
        let broken = text.replacen("\"version\":1", "\"version\":9", 1);
        assert!(ComponentAtlas::from_json(&broken).is_err());
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "-2,2,-1.5,1.5,40,30".parse().unwrap();
        assert_eq!((g.nx, g.ny), (40, 30));
        assert!("1,0,0,1,4,4".parse::<Grid>().is_err());
        assert!("0,1,0,1,0,4".parse::<Grid>().is_err());
        assert!("0,1,0,1".parse::<Grid>().is_err());
        let z = c(0.3, -0.7);
        assert_eq!(g.cell_of(g.center(g.cell_of(z).unwrap())), g.cell_of(z));
    }
}
