//! Simultaneous root finding (Aberth–Ehrlich) with a perturbation restart
//! ladder and a companion-matrix fallback.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ComplexPolynomial;
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 600;
const RETRIES: u64 = 3;
const CLUSTER_RADIUS: f64 = 1e-7;

/// Residual bound every returned preimage of `c` satisfies, unless the
/// rounding error of evaluating `p` at the root is larger.
pub fn preimage_tolerance(c: Complex64) -> f64 {
    1e-10 * c.norm().max(1.0)
}

/// All solutions of `p(w) = c`, with multiplicity (exactly `deg p` values).
pub fn preimages(p: &ComplexPolynomial, c: Complex64) -> Result<Vec<Complex64>> {
    if p.degree() == 0 {
        return Err(Error::DegenerateDegree { degree: 0 });
    }
    let q = p.minus_constant(c);
    let tol = preimage_tolerance(c);
    let roots = solve(&q, tol).ok_or(Error::RootFinding { c })?;
    Ok(roots)
}

/// Roots of `p` with multiplicity.
pub fn roots_of(p: &ComplexPolynomial) -> Result<Vec<Complex64>> {
    preimages(p, Complex64::new(0.0, 0.0))
}

fn solve(q: &ComplexPolynomial, tol: f64) -> Option<Vec<Complex64>> {
    let zeros = q.coefficients().iter().take_while(|c| **c == Complex64::new(0.0, 0.0)).count();
    if zeros > 0 {
        // Exact roots at 0; iterating on them stalls.
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
        if zeros < q.degree() {
            let rest = ComplexPolynomial {
                coeffs: q.coefficients()[zeros..].to_vec(),
            };
            roots.extend(solve_deflated(&rest, q, tol)?);
        }
        return Some(roots);
    }
    solve_deflated(q, q, tol)
}

/// Roots of `q`, accepted by their residual on `full`.
fn solve_deflated(q: &ComplexPolynomial, full: &ComplexPolynomial, tol: f64) -> Option<Vec<Complex64>> {
    let d = q.degree();
    let coeffs = q.coefficients();
    let accept = |_: &ComplexPolynomial, r: Vec<Complex64>, tol: f64| {
        let r = accept(q, r, f64::INFINITY)?;
        r.iter().all(|&w| within(full, w, tol)).then_some(r)
    };
    if d == 1 {
        let w = -coeffs[0] / coeffs[1];
        return accept(q, vec![w], tol);
    }
    if d == 2 {
        if let Some(r) = accept(q, quadratic(coeffs), tol) {
            return Some(r);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_a6e7);
    for attempt in 0..=RETRIES {
        let start = initial_guesses(coeffs, attempt, &mut rng);
        if let Some(r) = aberth(q, start).and_then(|r| accept(q, r, tol)) {
            return Some(r);
        }
    }
    companion(coeffs).and_then(|r| accept(q, r, tol))
}

fn quadratic(c: &[Complex64]) -> Vec<Complex64> {
    let (a, b, k) = (c[2], c[1], c[0]);
    let disc = (b * b - a * k * 4.0).sqrt();
    // Pick the sign that avoids cancellation in -b -/+ sqrt(disc).
    let sign = if (b.conj() * disc).re >= 0.0 { 1.0 } else { -1.0 };
    let big = -(b + disc * sign) * 0.5;
    if big.norm() == 0.0 {
        let w = -b / (a * 2.0);
        return vec![w, w];
    }
    vec![big / a, k / big]
}

fn initial_guesses(coeffs: &[Complex64], attempt: u64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let center = -coeffs[d - 1] / (lead * d as f64);
    let shifted = ComplexPolynomial {
        coeffs: coeffs.to_vec(),
    }
    .taylor_at(center);
    // Geometric mean of the root moduli about the centroid.
    let mut radius = (shifted[0] / lead).norm().powf(1.0 / d as f64);
    if !radius.is_finite() || radius < 1e-8 {
        radius = 1.0;
    }
    (0..d)
        .map(|k| {
            let mut angle = std::f64::consts::TAU * k as f64 / d as f64 + 0.4;
            let mut r = radius;
            if attempt > 0 {
                angle += rng.gen_range(-0.5..0.5);
                r *= rng.gen_range(0.5..2.0);
            }
            center + Complex64::from_polar(r, angle)
        })
        .collect()
}

fn aberth(q: &ComplexPolynomial, mut z: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let d = z.len();
    for _ in 0..MAX_ITERATIONS {
        let mut max_step = 0.0f64;
        for i in 0..d {
            let (v, dv) = q.eval_with_derivative(z[i]);
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = v / dv;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..d {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff != Complex64::new(0.0, 0.0) {
                        repulsion += diff.inv();
                    }
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                return None;
            }
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
        }
        if max_step < 1e-15 {
            return Some(z);
        }
    }
    // Multiple roots converge linearly; let the acceptance test judge.
    Some(z)
}

fn companion(coeffs: &[Complex64]) -> Option<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let m = DMatrix::from_fn(d, d, |i, j| {
        if i == 0 {
            -coeffs[d - 1 - j] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let schur = nalgebra::linalg::Schur::try_new(m, 1e-15, 10_000)?;
    schur.eigenvalues().map(|v| v.iter().copied().collect())
}

fn polish(q: &ComplexPolynomial, mut w: Complex64) -> Complex64 {
    let mut res = q.eval(w).norm();
    for _ in 0..8 {
        let (v, dv) = q.eval_with_derivative(w);
        if v == Complex64::new(0.0, 0.0) || dv == Complex64::new(0.0, 0.0) {
            break;
        }
        let next = w - v / dv;
        let next_res = q.eval(next).norm();
        if !(next_res < res) {
            break;
        }
        w = next;
        res = next_res;
    }
    w
}

/// Roundoff in evaluating `q` at `w`, in units of the coefficient sum.
const ROUNDING: f64 = 128.0 * f64::EPSILON;

/// `tol`, raised to the rounding error of evaluating `q` at `w` (large roots
/// of badly scaled polynomials).
pub fn residual_bound(q: &ComplexPolynomial, w: Complex64, tol: f64) -> f64 {
    let r = w.norm();
    let scale = q.coefficients().iter().rev().fold(0.0, |acc, c| acc * r + c.norm());
    tol.max(ROUNDING * scale)
}

fn within(q: &ComplexPolynomial, w: Complex64, tol: f64) -> bool {
    q.eval(w).norm() <= residual_bound(q, w, tol)
}

/// Polishes, merges numerically coincident roots, and checks residuals.
fn accept(q: &ComplexPolynomial, roots: Vec<Complex64>, tol: f64) -> Option<Vec<Complex64>> {
    if roots.len() != q.degree() || roots.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
        return None;
    }
    let mut roots: Vec<Complex64> = roots.into_iter().map(|w| polish(q, w)).collect();
    merge_clusters(q, &mut roots);
    if roots.iter().all(|&w| within(q, w, tol)) {
        Some(roots)
    } else {
        None
    }
}

/// Replaces each cluster of coincident roots by its centroid when that does
/// not worsen the residual, so that multiple roots come out exactly equal.
fn merge_clusters(q: &ComplexPolynomial, roots: &mut [Complex64]) {
    let n = roots.len();
    let mut cluster: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = roots[i].norm().max(1.0);
            if (roots[i] - roots[j]).norm() <= CLUSTER_RADIUS * scale {
                let (a, b) = (cluster[i], cluster[j]);
                for c in cluster.iter_mut() {
                    if *c == b {
                        *c = a;
                    }
                }
            }
        }
    }
    for id in 0..n {
        let members: Vec<usize> = (0..n).filter(|&k| cluster[k] == id).collect();
        if members.len() < 2 {
            continue;
        }
        let centroid =
            members.iter().map(|&k| roots[k]).sum::<Complex64>() / members.len() as f64;
        let worst = members
            .iter()
            .map(|&k| q.eval(roots[k]).norm())
            .fold(0.0, f64::max);
        if q.eval(centroid).norm() <= worst.max(f64::EPSILON) {
            for &k in &members {
                roots[k] = centroid;
            }
        }
    }
}
