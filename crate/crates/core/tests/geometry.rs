use limitlab::fatou::{
    boundary_parametrization, component_map, default_level, equipotential, interior_components, ComponentTarget,
    Grid, ImmediateBasin, PullbackTower,
};
use limitlab::henon::{f_solid_torus, henon_jacobian, HenonParams, TorusPoint};
use limitlab::natural_extension::{component_label, fiber};
use limitlab::{Complex64, ComplexPolynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn equipotential_maps_by_the_model() {
    for text in ["0.1,0,1", "0,0.5,1"] {
        let p: ComplexPolynomial = text.parse().unwrap();
        let basin = ImmediateBasin::locate(&p, c(0.0, 0.0)).unwrap();
        let level = default_level(&basin).unwrap();
        let eq = equipotential(&basin, level, 64).unwrap();
        let expected = basin.coordinate.model(c(eq.level, 0.0)).norm();
        for &w in eq.curve.samples() {
            let phi = basin.coordinate.eval(&p, p.eval(w)).unwrap();
            assert!((phi.norm() - expected).abs() <= 1e-8 * expected.max(1e-3), "{text}: {} vs {expected}", phi.norm());
        }
    }
}

#[test]
fn pullback_tower_is_coherent() {
    let p: ComplexPolynomial = "0.1,0,1".parse().unwrap();
    let basin = ImmediateBasin::locate(&p, c(0.0, 0.0)).unwrap();
    let eq = equipotential(&basin, default_level(&basin).unwrap(), 256).unwrap();
    let mut tower = PullbackTower::new(basin.degree, &eq);
    for _ in 0..6 {
        tower.push_level(&p).unwrap();
    }
    for (l, r) in tower.lift_residuals.iter().enumerate() {
        assert!(*r <= 1e-10, "level {l}: {r}");
    }
    // Each curve encloses the one below it.
    for pair in tower.curves.windows(2) {
        assert!(pair[0].samples().iter().all(|&w| pair[1].encloses(w)));
    }
}

#[test]
fn boundary_residual_does_not_grow_with_resolution() {
    let p: ComplexPolynomial = "0.1,0,1".parse().unwrap();
    let basin = ImmediateBasin::locate(&p, c(0.0, 0.0)).unwrap();
    let coarse = boundary_parametrization(&basin, 256).unwrap();
    let fine = boundary_parametrization(&basin, 512).unwrap();
    assert!(fine.residual <= coarse.residual + 1e-12, "{} > {}", fine.residual, coarse.residual);
    // The fine samples at even indices lie on the coarse curve.
    for j in 0..256 {
        let a = fine.curve.at_index(2 * j);
        assert!(coarse.distance(a) <= 1e-2, "{a}");
    }
}

#[test]
fn square_boundary_is_the_unit_circle() {
    let p = ComplexPolynomial::monomial(2);
    let basin = ImmediateBasin::locate(&p, c(0.0, 0.0)).unwrap();
    let gamma = boundary_parametrization(&basin, 128).unwrap();
    assert_eq!(gamma.levels, 0);
    assert!(gamma.residual <= 1e-12);
    for j in 0..128 {
        let theta = j as f64 / 128.0;
        assert!((gamma.eval(theta) - Complex64::from_polar(1.0, TAU * theta)).norm() <= 1e-12);
    }
}

#[test]
fn henon_jacobian_determinant_is_a() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p: ComplexPolynomial = "0.1,0,1".parse().unwrap();
    for _ in 0..50 {
        let a = c(rng.gen_range(-0.035..0.035), rng.gen_range(-0.035..0.035));
        let params = HenonParams::new(p.clone(), a, c(0.1, 0.0)).unwrap();
        let x = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let m = henon_jacobian(&params, (x, c(0.0, 0.0)));
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert!((det - a).norm() <= 1e-14);
    }
}

#[test]
fn solid_torus_image_stays_in_the_smaller_disk() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (alpha, rho) = (c(0.1, 0.05), 1.2);
    for _ in 0..1000 {
        let zeta = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
        let z = Complex64::from_polar(rho * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
        let pt = TorusPoint::new(zeta, z, rho).unwrap();
        for d in 2..5 {
            let img = f_solid_torus(d, alpha, &pt).unwrap();
            assert!((img.zeta - zeta.powu(d)).norm() <= 1e-12);
            assert!(img.z.norm() <= 1.0 + alpha.norm() * rho + 1e-12);
        }
    }
    let far = TorusPoint::new(c(1.0, 0.0), c(0.0, 0.0), 1.2).unwrap();
    assert!(f_solid_torus(2, c(0.5, 0.0), &far).is_err());
}

#[test]
fn basilica_component_map_and_labels() {
    let p: ComplexPolynomial = "-1,0,1".parse().unwrap();
    let atlas = interior_components(&p, Grid::square(2.0, 384).unwrap()).unwrap();
    let map = component_map(&p, &atlas);
    let at = |z: Complex64| atlas.component_at(z).unwrap();
    let (u0, u1) = (at(c(0.0, 0.0)), at(c(-1.0, 0.0)));
    assert_eq!(map[&u0], ComponentTarget::Resolved(u1));
    assert_eq!(map[&u1], ComponentTarget::Resolved(u0));
    // Histories over the critical point alternate between the two cycle components.
    let f = fiber(&p, c(0.0, 0.0), 4).unwrap();
    let h = f
        .entries
        .iter()
        .map(|e| &e.history)
        .find(|h| h.entries().iter().all(|z| z.norm() < 1.2 && (z.norm() < 0.3 || (z + 1.0).norm() < 0.3)))
        .expect("a history along the cycle");
    let label = component_label(&p, h, &atlas);
    assert_eq!(label.cutoff, None);
    assert!(label.compatible);
    assert!(!label.is_constant());
    for w in label.ids.windows(2) {
        assert_ne!(w[0], w[1]);
    }
}
