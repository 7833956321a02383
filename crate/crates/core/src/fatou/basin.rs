use num_complex::Complex64;

use super::atlas::{interior_components, ComponentAtlas, Grid};
use super::coords::LocalCoordinate;
use crate::error::{Error, Result};
use crate::poly::{find_attracting_cycles, ComplexPolynomial};

const DEFAULT_ATLAS_CELLS: usize = 384;

/// The immediate basin `Omega` of an attracting fixed point.
#[derive(Clone, Debug)]
pub struct ImmediateBasin {
    pub polynomial: ComplexPolynomial,
    pub fixed_point: Complex64,
    pub multiplier: Complex64,
    /// Critical points in `Omega`, with multiplicity.
    pub critical_points: Vec<Complex64>,
    /// Degree `k` of `p` on `Omega`.
    pub degree: usize,
    pub coordinate: LocalCoordinate,
    pub atlas: ComponentAtlas,
    pub component: usize,
}

impl ImmediateBasin {
    /// Basin of the attracting fixed point closest to `guess`, labelled on a
    /// default grid over the escape disk.
    pub fn locate(p: &ComplexPolynomial, guess: Complex64) -> Result<Self> {
        let r = p.escape_radius();
        let atlas = interior_components(p, Grid::square(r, DEFAULT_ATLAS_CELLS)?)?;
        Self::from_atlas(p, atlas, guess)
    }

    /// The attracting fixed point of `p` closest to `z`.
    pub fn nearest_fixed_point(p: &ComplexPolynomial, z: Complex64) -> Result<Complex64> {
        find_attracting_cycles(p, 1, 16)?
            .cycles
            .iter()
            .map(|c| c.points[0])
            .min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()))
            .ok_or_else(|| Error::Precondition("p has no attracting fixed point".into()))
    }

    pub fn from_atlas(p: &ComplexPolynomial, atlas: ComponentAtlas, guess: Complex64) -> Result<Self> {
        let fixed_point = Self::nearest_fixed_point(p, guess)?;
        let component = atlas
            .component_at(fixed_point)
            .ok_or(Error::Resolution { point: fixed_point })?;
        let multiplier = p.derivative().eval(fixed_point);
        let critical_points: Vec<Complex64> = p
            .critical_points()?
            .into_iter()
            .filter(|&c| (c - fixed_point).norm() < 1e-9 || atlas.component_at(c) == Some(component))
            .collect();
        let coordinate = LocalCoordinate::at_fixed_point(p, fixed_point)?;
        Ok(Self {
            polynomial: p.clone(),
            fixed_point,
            multiplier,
            degree: 1 + critical_points.len(),
            critical_points,
            coordinate,
            atlas,
            component,
        })
    }

    /// Critical points other than the fixed point itself.
    pub fn free_critical_points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.critical_points
            .iter()
            .copied()
            .filter(move |c| (c - self.fixed_point).norm() >= 1e-9)
    }

    /// `min |phi(c)|` over free critical points, capped by the boundary level.
    pub fn univalence_radius(&self) -> Result<f64> {
        let mut r = self.coordinate.boundary_level();
        for c in self.free_critical_points() {
            r = r.min(self.coordinate.eval(&self.polynomial, c)?.norm());
        }
        Ok(r)
    }

    /// `max |phi(p(c))|` over free critical points (zero when there are none).
    pub fn critical_value_level(&self) -> Result<f64> {
        let mut r: f64 = 0.0;
        for c in self.free_critical_points() {
            let v = self.polynomial.eval(c);
            r = r.max(self.coordinate.eval(&self.polynomial, v)?.norm());
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degrees_of_model_basins() {
        let b = ImmediateBasin::locate(&ComplexPolynomial::monomial(2), c(0.0, 0.0)).unwrap();
        assert_eq!(b.degree, 2);
        assert_eq!(b.univalence_radius().unwrap(), 1.0);
        let b = ImmediateBasin::locate(&ComplexPolynomial::quadratic(c(0.1, 0.0)), c(0.1, 0.0)).unwrap();
        assert_eq!(b.degree, 2);
        assert!((b.multiplier.re - 0.225403).abs() < 1e-6);
        // The critical value sits strictly inside the univalent disk.
        let ratio = b.critical_value_level().unwrap() / b.univalence_radius().unwrap();
        assert!((ratio - b.multiplier.norm()).abs() < 1e-9);
    }

    #[test]
    fn odd_cubic_has_degree_three() {
        // z^3 + 0.3 z is odd, so Omega is symmetric and holds both
        // critical points +-i sqrt(0.1).
        let p = ComplexPolynomial::from_real(&[0.0, 0.3, 0.0, 1.0]).unwrap();
        let b = ImmediateBasin::locate(&p, c(0.0, 0.0)).unwrap();
        assert!(b.fixed_point.norm() < 1e-12);
        assert_eq!(b.degree, 3);
    }
}
